//! Numerical parallel transport for the KZ connection.
//!
//! A path is a sequence of segments `t ∈ [0,1] ↦ z(t)`; transport solves
//! `ψ′ = −𝛀(ż)ψ` on each segment with the identity as initial frame and
//! multiplies the resulting matrices.
//!
//! The braid generator `σᵢ` moves `zᵢ` and `zᵢ₊₁` counterclockwise by a half
//! turn about their midpoint, `zᵢ(t) = m + r e^{iπt}`, `zᵢ₊₁(t) = m − r e^{iπt}`
//! with `r = (zᵢ − zᵢ₊₁)/2`, then relabels the two slots by the exchange
//! `Pᵢ,ᵢ₊₁` so the result acts on the fibre over the starting configuration.
//! This needs `λᵢ = λᵢ₊₁`; the full twist `σᵢ²` is available for any weights.
//!
//! Braid words are read left to right as paths: `"1 -2"` is `σ₁` followed by
//! `σ₂⁻¹`, whose matrix is `S(σ₂⁻¹)·S(σ₁)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blocks::BlockSpace;
use crate::error::{Error, Result};
use crate::kz::KZForm;
use crate::ode::{self, CMatrix, Method, OdeOptions};

type Curve = Arc<dyn Fn(f64) -> (Vec<Complex64>, Vec<Complex64>) + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Constant(Vec<Complex64>),
    Linear(Vec<Complex64>, Vec<Complex64>),
    /// half turn of slots i, i+1; `aspect` stretches the circle into an
    /// ellipse across the chord
    HalfTwist {
        base: Vec<Complex64>,
        i: usize,
        inverse: bool,
        aspect: f64,
    },
    Rotation(Vec<Complex64>),
    Custom(Curve),
}

#[derive(Clone)]
pub struct Segment {
    shape: Shape,
    reversed: bool,
}

impl Segment {
    /// Position and velocity at `t`.
    pub fn eval(&self, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        if self.reversed {
            let (z, v) = self.eval_forward(1.0 - t);
            return (z, v.into_iter().map(|x| -x).collect());
        }
        self.eval_forward(t)
    }

    fn eval_forward(&self, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        match &self.shape {
            Shape::Constant(z) => (z.clone(), vec![Complex64::new(0.0, 0.0); z.len()]),
            Shape::Linear(a, b) => (
                a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect(),
                a.iter().zip(b).map(|(x, y)| y - x).collect(),
            ),
            Shape::HalfTwist {
                base,
                i,
                inverse,
                aspect,
            } => {
                let (a, b) = (base[*i], base[*i + 1]);
                let m = (a + b) / 2.0;
                let r = (a - b) / 2.0;
                let s = if *inverse { -1.0 } else { 1.0 };
                let ang = PI * t;
                let u = Complex64::new(ang.cos(), s * aspect * ang.sin());
                let du = Complex64::new(-PI * ang.sin(), s * aspect * PI * ang.cos());
                let mut z = base.clone();
                let mut v = vec![Complex64::new(0.0, 0.0); base.len()];
                z[*i] = m + r * u;
                z[*i + 1] = m - r * u;
                v[*i] = r * du;
                v[*i + 1] = -r * du;
                (z, v)
            }
            Shape::Rotation(base) => {
                let e = Complex64::from_polar(1.0, 2.0 * PI * t);
                let w = Complex64::new(0.0, 2.0 * PI);
                (
                    base.iter().map(|z| z * e).collect(),
                    base.iter().map(|z| z * e * w).collect(),
                )
            }
            Shape::Custom(f) => f(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    Generic,
    /// 0-based slot, inverse flag
    BraidGenerator(usize, bool),
    Rotation,
    Custom,
}

#[derive(Clone)]
pub struct Path {
    n: usize,
    segments: Vec<Segment>,
    kind: PathKind,
}

fn check_points(z: &[Complex64]) -> Result<()> {
    for (i, a) in z.iter().enumerate() {
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite point {a}")));
        }
        for (j, b) in z.iter().enumerate().skip(i + 1) {
            if a == b {
                return Err(Error::CoincidentPoints { i, j });
            }
        }
    }
    Ok(())
}

impl Path {
    pub fn constant(z: &[Complex64]) -> Result<Self> {
        check_points(z)?;
        Ok(Self::single(z.len(), Shape::Constant(z.to_vec()), PathKind::Generic))
    }

    pub fn linear(from: &[Complex64], to: &[Complex64]) -> Result<Self> {
        if from.len() != to.len() {
            return Err(Error::DimensionMismatch {
                expected: from.len(),
                got: to.len(),
            });
        }
        check_points(from)?;
        check_points(to)?;
        let p = Self::single(from.len(), Shape::Linear(from.to_vec(), to.to_vec()), PathKind::Generic);
        p.validate()?;
        Ok(p)
    }

    /// The positive half-twist of slots `i, i+1` (0-based), or its inverse.
    pub fn half_twist(z: &[Complex64], i: usize, inverse: bool) -> Result<Self> {
        Self::half_twist_shaped(z, i, inverse, 1.0)
    }

    /// Half-twist along an ellipse with semi-axes `|r|` along the chord and
    /// `aspect·|r|` across it; homotopic to the circular one when no other
    /// point lies inside either curve.
    pub fn half_twist_shaped(z: &[Complex64], i: usize, inverse: bool, aspect: f64) -> Result<Self> {
        check_points(z)?;
        if i + 1 >= z.len() {
            return Err(Error::InvalidArgument(format!(
                "generator σ{} needs at least {} points, got {}",
                i + 1,
                i + 2,
                z.len()
            )));
        }
        if !(aspect > 0.0) {
            return Err(Error::InvalidArgument(format!("aspect must be positive, got {aspect}")));
        }
        let m = (z[i] + z[i + 1]) / 2.0;
        let r = (z[i] - z[i + 1]) / 2.0;
        for (k, p) in z.iter().enumerate() {
            if k != i && k != i + 1 {
                // coordinates along and across the chord, in units of |r|
                let w = (p - m) / r;
                let y = w.im / aspect;
                if w.re * w.re + y * y <= 1.0 + 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "point {} lies inside the half-twist of slots {} and {}",
                        k + 1,
                        i + 1,
                        i + 2
                    )));
                }
            }
        }
        let shape = Shape::HalfTwist {
            base: z.to_vec(),
            i,
            inverse,
            aspect,
        };
        Ok(Self::single(z.len(), shape, PathKind::BraidGenerator(i, inverse)))
    }

    /// The loop `zᵢ(t) = e^{2πit} zᵢ`.
    pub fn rotation(z: &[Complex64]) -> Result<Self> {
        check_points(z)?;
        Ok(Self::single(z.len(), Shape::Rotation(z.to_vec()), PathKind::Rotation))
    }

    /// A user-supplied curve returning positions and velocities.
    pub fn custom<F>(n: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> (Vec<Complex64>, Vec<Complex64>) + Send + Sync + 'static,
    {
        let p = Self::single(n, Shape::Custom(Arc::new(f)), PathKind::Custom);
        for t in [0.0, 1.0] {
            let (z, v) = p.segments[0].eval(t);
            if z.len() != n || v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: z.len().min(v.len()),
                });
            }
        }
        p.validate()?;
        Ok(p)
    }

    fn single(n: usize, shape: Shape, kind: PathKind) -> Self {
        Path {
            n,
            segments: vec![Segment { shape, reversed: false }],
            kind,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start(&self) -> Vec<Complex64> {
        self.segments[0].eval(0.0).0
    }

    pub fn end(&self) -> Vec<Complex64> {
        self.segments.last().expect("nonempty path").eval(1.0).0
    }

    /// `self` followed by `next`; the endpoint must match the start of `next`.
    pub fn then(mut self, next: Path) -> Result<Self> {
        if self.n != next.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: next.n,
            });
        }
        let gap = self
            .end()
            .iter()
            .zip(next.start())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if gap > 1e-12 * (1.0 + self.end().iter().map(|z| z.norm()).fold(0.0, f64::max)) {
            return Err(Error::InvalidArgument(format!("paths do not join (gap {gap:e})")));
        }
        self.segments.extend(next.segments);
        self.kind = PathKind::Generic;
        Ok(self)
    }

    pub fn reversed(&self) -> Self {
        Path {
            n: self.n,
            segments: self
                .segments
                .iter()
                .rev()
                .map(|s| Segment {
                    shape: s.shape.clone(),
                    reversed: !s.reversed,
                })
                .collect(),
            kind: PathKind::Generic,
        }
    }

    /// Smallest pairwise distance over a uniform sample of each segment.
    pub fn min_distance(&self, samples: usize) -> f64 {
        let mut best = f64::INFINITY;
        for s in &self.segments {
            for k in 0..=samples {
                let (z, _) = s.eval(k as f64 / samples as f64);
                for i in 0..z.len() {
                    for j in i + 1..z.len() {
                        best = best.min((z[i] - z[j]).norm());
                    }
                }
            }
        }
        best
    }

    fn validate(&self) -> Result<()> {
        let d = self.min_distance(512);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidArgument(
                "path passes through a collision of marked points".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TransportOptions {
    pub tol: f64,
    /// largest accepted block residual
    pub block_tol: f64,
    pub method: Method,
    pub max_steps: usize,
    pub parallel_columns: bool,
    /// ellipse aspect of braid-generator paths
    pub aspect: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            tol: 1e-10,
            block_tol: 1e-8,
            method: Method::Dopri5,
            max_steps: 1_000_000,
            parallel_columns: false,
            aspect: 1.0,
        }
    }
}

impl TransportOptions {
    fn ode(&self) -> OdeOptions {
        OdeOptions {
            method: self.method,
            tol: self.tol,
            max_steps: self.max_steps,
            parallel_columns: self.parallel_columns,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MonodromyResult {
    pub matrix: CMatrix,
    pub est_error: f64,
    /// relative component leaving the block bundle; `None` for transport on
    /// the full invariant space
    pub block_residual: Option<f64>,
    pub min_distance: f64,
    pub steps: usize,
}

/// The reported solution is integrated at `tol / FINE_FACTOR`; its distance
/// to the solution at `tol` is the error estimate.
pub const FINE_FACTOR: f64 = 32.0;

/// Transport on the invariants along `path`.
pub fn transport(form: &KZForm, path: &Path, opts: &TransportOptions) -> Result<MonodromyResult> {
    let n = form.system().n();
    if path.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: path.n(),
        });
    }
    let d = form.system().invariant_dim();
    let mut total = CMatrix::identity(d, d);
    let (mut est, mut steps) = (0.0, 0);
    for seg in path.segments() {
        let a = |t: f64| {
            let (z, v) = seg.eval(t);
            // the path was validated, so points are distinct away from
            // numerical accidents; those surface as non-finite steps
            -form
                .evaluate(&z, &v)
                .unwrap_or_else(|_| CMatrix::from_element(d, d, Complex64::new(f64::NAN, 0.0)))
        };
        let coarse_opts = opts.ode();
        let fine_opts = OdeOptions {
            tol: opts.tol / FINE_FACTOR,
            ..coarse_opts
        };
        let id = CMatrix::identity(d, d);
        let (coarse, fine) = rayon::join(
            || ode::solve(&a, &id, 0.0, 1.0, &coarse_opts),
            || ode::solve(&a, &id, 0.0, 1.0, &fine_opts),
        );
        let (coarse, fine) = (coarse?, fine?);
        let delta = (&fine.y - &coarse.y).norm();
        // error of a product: ‖δS‖‖T‖ + ‖S‖‖δT‖ + ‖δS‖‖δT‖
        est = delta * total.norm() + fine.y.norm() * est + delta * est;
        steps += coarse.steps + fine.steps;
        total = fine.y * total;
    }
    Ok(MonodromyResult {
        matrix: total,
        est_error: est,
        block_residual: None,
        min_distance: path.min_distance(256),
        steps,
    })
}

/// One braid generator on the block space; `i` is 0-based.
pub fn braid_generator(
    form: &KZForm,
    block: &BlockSpace,
    i: usize,
    inverse: bool,
    opts: &TransportOptions,
) -> Result<MonodromyResult> {
    let sys = form.system();
    check_generator(sys.n(), i)?;
    let swap = sys.swap_invariant(i)?.to_c64();
    let path = Path::half_twist_shaped(&block.points(), i, inverse, opts.aspect)?;
    let mut t = transport(form, &path, opts)?;
    t.est_error *= spectral_norm(&swap);
    finish_on_block(block, swap * &t.matrix, t, opts)
}

/// The full twist of slots `i, i+1`, allowed for any weights.
pub fn pure_twist(form: &KZForm, block: &BlockSpace, i: usize, opts: &TransportOptions) -> Result<MonodromyResult> {
    check_generator(form.system().n(), i)?;
    let z = block.points();
    let first = Path::half_twist_shaped(&z, i, false, opts.aspect)?;
    let mut swapped = z.clone();
    swapped.swap(i, i + 1);
    let second = Path::half_twist_shaped(&swapped, i, false, opts.aspect)?;
    let t = transport(form, &first.then(second)?, opts)?;
    let m = t.matrix.clone();
    finish_on_block(block, m, t, opts)
}

/// Transport along a loop based at the block configuration, on the block
/// space.
pub fn loop_on_block(
    form: &KZForm,
    block: &BlockSpace,
    path: &Path,
    opts: &TransportOptions,
) -> Result<MonodromyResult> {
    let gap = path
        .start()
        .iter()
        .zip(path.end())
        .zip(block.points())
        .map(|((a, b), z)| (a - b).norm().max((a - z).norm()))
        .fold(0.0, f64::max);
    if gap > 1e-9 {
        return Err(Error::InvalidArgument(
            "path is not a loop at the block configuration".into(),
        ));
    }
    let t = transport(form, path, opts)?;
    let m = t.matrix.clone();
    finish_on_block(block, m, t, opts)
}

fn finish_on_block(
    block: &BlockSpace,
    s: CMatrix,
    t: MonodromyResult,
    opts: &TransportOptions,
) -> Result<MonodromyResult> {
    let (m, residual) = block.project(&s);
    if !(residual <= opts.block_tol) {
        return Err(Error::BlockResidual {
            residual,
            tol: opts.block_tol,
        });
    }
    // M = Φᵀ S W, so ‖δM‖ ≤ ‖Φᵀ‖₂ ‖δS‖ ‖W‖₂
    let scale = spectral_norm(&block.forms().to_c64()) * spectral_norm(&block.block_basis().to_c64());
    Ok(MonodromyResult {
        matrix: m,
        est_error: t.est_error * scale,
        block_residual: Some(residual),
        min_distance: t.min_distance,
        steps: t.steps,
    })
}

fn check_generator(n: usize, i: usize) -> Result<()> {
    if i + 1 >= n {
        return Err(Error::InvalidArgument(format!(
            "generator σ{} is out of range for {n} points",
            i + 1
        )));
    }
    Ok(())
}

/// Parses `"1 -2 1"` into 1-based signed generators.
pub fn parse_braid_word(word: &str, n: usize) -> Result<Vec<i64>> {
    word.split_whitespace()
        .map(|tok| {
            let g: i64 = tok
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad braid generator {tok:?}")))?;
            if g == 0 || g.unsigned_abs() as usize >= n {
                return Err(Error::InvalidArgument(format!(
                    "generator σ{} is out of range for {n} points",
                    g.unsigned_abs()
                )));
            }
            Ok(g)
        })
        .collect()
}

/// Monodromy of a braid word on the block space.
pub fn braid_word(form: &KZForm, block: &BlockSpace, word: &[i64], opts: &TransportOptions) -> Result<MonodromyResult> {
    let b = block.dim();
    let mut generators: Vec<(i64, MonodromyResult)> = Vec::new();
    for g in word {
        if !generators.iter().any(|(h, _)| h == g) {
            let r = braid_generator(form, block, (g.unsigned_abs() - 1) as usize, *g < 0, opts)?;
            generators.push((*g, r));
        }
    }
    let mut total = CMatrix::identity(b, b);
    let (mut est, mut residual, mut steps) = (0.0f64, 0.0f64, 0);
    let mut min_d = Path::constant(&block.points())?.min_distance(1);
    for g in word {
        let r = &generators.iter().find(|(h, _)| h == g).expect("generator computed").1;
        est = r.est_error * total.norm() + r.matrix.norm() * est + r.est_error * est;
        residual = residual.max(r.block_residual.unwrap_or(0.0));
        steps += r.steps;
        min_d = min_d.min(r.min_distance);
        total = &r.matrix * total;
    }
    Ok(MonodromyResult {
        matrix: total,
        est_error: est,
        block_residual: Some(residual),
        min_distance: min_d,
        steps,
    })
}

/// The unit scalar `c` minimizing `‖a − c·b‖_F` and that residual.
pub fn projective_compare(a: &CMatrix, b: &CMatrix) -> Result<(Complex64, f64)> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let inner: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    if b.norm() == 0.0 || a.norm() == 0.0 || inner.norm() == 0.0 {
        return Err(Error::InvalidArgument("projective comparison of zero matrices".into()));
    }
    let c = inner / inner.norm();
    Ok((c, (a - b * c).norm()))
}

fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Singular values, largest first; used as a unitarity proxy.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// JSON form of a monodromy: `[re, im]` entries plus diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyDocument {
    pub word: Vec<i64>,
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub est_error: f64,
    pub block_residual: Option<f64>,
    pub min_distance: f64,
    pub steps: usize,
}

impl MonodromyResult {
    pub fn to_document(&self, word: &[i64]) -> MonodromyDocument {
        MonodromyDocument {
            word: word.to_vec(),
            dim: self.matrix.nrows(),
            matrix: crate::kz::matrix_entries(&self.matrix),
            est_error: self.est_error,
            block_residual: self.block_residual,
            min_distance: self.min_distance,
            steps: self.steps,
        }
    }
}
