//! The KZ connection `d + 𝛀` with
//!
//! ```text
//! 𝛀 = 1/(k+h) Σ_{i<j} Ωⁱʲ (dzᵢ − dzⱼ)/(zᵢ − zⱼ)
//! ```
//!
//! on the trivial bundle of invariants. Flat sections solve `ψ′ = −𝛀(ż)ψ`.
//!
//! Flatness is equivalent to the Kohno relations, checked here exactly. Along
//! the rotation `zᵢ(t) = e^{2πit} zᵢ` every ratio `(żᵢ − żⱼ)/(zᵢ − zⱼ)` equals
//! `2πi`, so the transport is `exp(−2πi/(k+h) Σ Ωⁱʲ)`; on invariants
//! `Σ Ωⁱʲ = −½ Σ cᵢ` with `cᵢ = ⟨λᵢ, λᵢ+2ρ⟩`, which gives the scalar
//! `exp(πi Σ cᵢ/(k+h))`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q, q_to_f64, SparseMatrix, Q};
use crate::ode::{expm, CMatrix};
use crate::tensor::TensorSystem;

type OmegaMap = BTreeMap<(usize, usize), SparseMatrix<Q>>;

#[derive(Debug, Clone)]
pub struct KZForm {
    system: Arc<TensorSystem>,
    level: i64,
    /// 1/(k+h)
    prefactor: Q,
    omega: Vec<((usize, usize), CMatrix)>,
}

impl KZForm {
    pub fn new(system: Arc<TensorSystem>, level: i64) -> Result<Self> {
        if level < 1 {
            return Err(Error::InvalidLevel(level));
        }
        let prefactor = Q::new(1.into(), (level + system.algebra().dual_coxeter()).into());
        let omega = system
            .pairs()
            .map(|(i, j)| Ok(((i, j), system.omega_pair(i, j)?.to_c64())))
            .collect::<Result<_>>()?;
        Ok(KZForm {
            system,
            level,
            prefactor,
            omega,
        })
    }

    pub fn system(&self) -> &Arc<TensorSystem> {
        &self.system
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn prefactor(&self) -> &Q {
        &self.prefactor
    }

    /// `𝛀(v)` at `z` on the invariants:
    /// `1/(k+h) Σ_{i<j} Ωⁱʲ (vᵢ − vⱼ)/(zᵢ − zⱼ)`.
    pub fn evaluate(&self, z: &[Complex64], v: &[Complex64]) -> Result<CMatrix> {
        let n = self.system.n();
        for len in [z.len(), v.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let d = self.system.invariant_dim();
        let mut out = CMatrix::zeros(d, d);
        for ((i, j), om) in &self.omega {
            let dz = z[*i] - z[*j];
            if dz.is_zero() {
                return Err(Error::CoincidentPoints { i: *i, j: *j });
            }
            let c = (v[*i] - v[*j]) / dz;
            if !c.is_zero() {
                out.zip_apply(om, |o, x| *o += x * c);
            }
        }
        Ok(out * Complex64::new(q_to_f64(&self.prefactor), 0.0))
    }

    /// Kohno relations for the form's own Ωⁱʲ, on the full space and on
    /// invariants.
    pub fn flatness_check(&self) -> Result<FlatnessReport> {
        let mut full = OmegaMap::new();
        let mut inv = OmegaMap::new();
        for (i, j) in self.system.pairs() {
            full.insert((i, j), self.system.omega_full(i, j)?.clone());
            inv.insert((i, j), self.system.omega_pair(i, j)?.clone());
        }
        Ok(FlatnessReport {
            full: kohno_check(self.system.n(), &full),
            invariant: kohno_check(self.system.n(), &inv),
        })
    }

    /// Predicted scalar and the exponential `exp(−2πi/(k+h) Σ Ωⁱʲ)` on
    /// invariants.
    pub fn rotation_monodromy(&self) -> Result<RotationMonodromy> {
        let d = self.system.invariant_dim();
        if d == 0 {
            return Err(Error::InvalidArgument("the invariant subspace is zero".into()));
        }
        let total = self.system.casimir_total()?;
        let phase = PI * q_to_f64(&(total * self.prefactor.clone()));
        let predicted = Complex64::from_polar(1.0, phase);
        let sum = self.omega.iter().fold(CMatrix::zeros(d, d), |acc, (_, m)| acc + m);
        let gen = sum * Complex64::new(0.0, -2.0 * PI * q_to_f64(&self.prefactor));
        let matrix = expm(&gen);
        let deviation = (&matrix - CMatrix::identity(d, d) * predicted).norm();
        Ok(RotationMonodromy {
            predicted,
            matrix,
            deviation,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RotationMonodromy {
    pub predicted: Complex64,
    pub matrix: CMatrix,
    /// ‖matrix − predicted·1‖_F
    pub deviation: f64,
}

/// Outcome of one family of exact commutator identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KohnoReport {
    pub relations: usize,
    /// human-readable names of the relations that fail
    pub failures: Vec<String>,
    /// largest absolute entry over all commutators, as a rational string
    pub max_deviation: String,
}

impl KohnoReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub full: KohnoReport,
    pub invariant: KohnoReport,
}

impl FlatnessReport {
    pub fn holds(&self) -> bool {
        self.full.holds() && self.invariant.holds()
    }

    pub fn ensure(&self) -> Result<()> {
        if self.holds() {
            return Ok(());
        }
        let mut all = self
            .full
            .failures
            .iter()
            .map(|f| format!("{f} (full space)"))
            .collect::<Vec<_>>();
        all.extend(self.invariant.failures.iter().map(|f| format!("{f} (invariants)")));
        Err(Error::IdentityFailure(format!(
            "Kohno relations fail: {}",
            all.join(", ")
        )))
    }
}

/// Checks `[Ωⁱʲ, Ωᵏˡ] = 0` for disjoint pairs and `[Ωⁱʲ, Ωⁱᵏ + Ωʲᵏ] = 0` for
/// distinct `i, j, k`, given Ωⁱʲ for `i < j`.
pub fn kohno_check(n: usize, omega: &OmegaMap) -> KohnoReport {
    let get = |a: usize, b: usize| &omega[&(a.min(b), a.max(b))];
    let pairs: Vec<(usize, usize)> = omega.keys().copied().collect();
    let mut jobs: Vec<(String, usize, usize, Vec<(usize, usize)>)> = Vec::new();
    for &(i, j) in &pairs {
        for &(k, l) in &pairs {
            if (i, j) < (k, l) && k != i && k != j && l != i && l != j {
                jobs.push((
                    format!("[Ω{}{}, Ω{}{}]", i + 1, j + 1, k + 1, l + 1),
                    i,
                    j,
                    vec![(k, l)],
                ));
            }
        }
        for k in (0..n).filter(|&k| k != i && k != j) {
            jobs.push((
                format!("[Ω{}{}, Ω{}{} + Ω{}{}]", i + 1, j + 1, i + 1, k + 1, j + 1, k + 1),
                i,
                j,
                vec![(i, k), (j, k)],
            ));
        }
    }
    let results: Vec<(String, Q)> = jobs
        .par_iter()
        .map(|(name, i, j, others)| {
            let a = get(*i, *j);
            let (r, c) = (a.nrows(), a.ncols());
            let b = others
                .iter()
                .fold(SparseMatrix::zeros(r, c), |acc, (x, y)| acc.add(get(*x, *y)));
            (name.clone(), a.commutator(&b).max_abs())
        })
        .collect();
    let mut failures = Vec::new();
    let mut max = q(0);
    for (name, dev) in results {
        if !dev.is_zero() {
            failures.push(name);
        }
        if dev > max {
            max = dev;
        }
    }
    KohnoReport {
        relations: jobs.len(),
        failures,
        max_deviation: max.to_string(),
    }
}

/// Complex matrix as rows of `[re, im]` pairs.
pub fn matrix_entries(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn matrix_from_entries(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::InvalidArgument("ragged matrix".into()));
    }
    Ok(CMatrix::from_fn(nr, nc, |r, c| {
        Complex64::new(rows[r][c][0], rows[r][c][1])
    }))
}

/// A form evaluation for export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormEvaluation {
    pub z: Vec<[f64; 2]>,
    pub v: Vec<[f64; 2]>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl FormEvaluation {
    pub fn new(form: &KZForm, z: &[Complex64], v: &[Complex64]) -> Result<Self> {
        let pair = |w: &Complex64| [w.re, w.im];
        Ok(FormEvaluation {
            z: z.iter().map(pair).collect(),
            v: v.iter().map(pair).collect(),
            matrix: matrix_entries(&form.evaluate(z, v)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qr;
    use crate::lie::{LieAlgebra, Series, Weight};

    fn form(s: Series, r: usize, ws: &[&[i64]], k: i64) -> KZForm {
        let alg = Arc::new(LieAlgebra::new(s, r).unwrap());
        let ws: Vec<Weight> = ws.iter().map(|w| Weight(w.to_vec())).collect();
        KZForm::new(Arc::new(TensorSystem::new(alg, &ws).unwrap()), k).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn prefactor_and_levels() {
        let f = form(Series::A, 1, &[&[1], &[1]], 2);
        assert_eq!(*f.prefactor(), qr(1, 4));
        let sys = f.system().clone();
        assert!(matches!(KZForm::new(sys, 0), Err(Error::InvalidLevel(0))));
    }

    #[test]
    fn degenerate_directions() {
        let f = form(Series::A, 1, &[&[1], &[1], &[1], &[1]], 2);
        let z = [c(0.0, 0.0), c(1.0, 0.2), c(-1.0, 2.0), c(3.0, -1.0)];
        let constant = [c(0.3, 0.1); 4];
        assert_eq!(f.evaluate(&z, &constant).unwrap().norm(), 0.0);
        // scaling direction: −Σc/(2(k+h)) = −6/8 on invariants
        let m = f.evaluate(&z, &z).unwrap();
        let want = CMatrix::identity(2, 2) * c(-0.75, 0.0);
        assert!((m - want).norm() < 1e-14);
        let bad = [c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 2.0), c(3.0, -1.0)];
        assert!(matches!(
            f.evaluate(&bad, &z),
            Err(Error::CoincidentPoints { i: 0, j: 1 })
        ));
    }

    #[test]
    fn linear_in_direction() {
        let f = form(Series::A, 1, &[&[1], &[1], &[2], &[2]], 2);
        let z = [c(0.0, 0.0), c(1.0, 0.2), c(-1.0, 2.0), c(3.0, -1.0)];
        let v = [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(-1.0, 0.5)];
        let w = [c(0.2, 0.0), c(0.0, -3.0), c(1.0, 1.0), c(0.0, 0.0)];
        let vw: Vec<Complex64> = v.iter().zip(&w).map(|(a, b)| a * c(2.0, -1.0) + b).collect();
        let lhs = f.evaluate(&z, &vw).unwrap();
        let rhs = f.evaluate(&z, &v).unwrap() * c(2.0, -1.0) + f.evaluate(&z, &w).unwrap();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn flat_examples() {
        for (s, r, ws, k) in [
            (Series::A, 1, vec![&[1][..], &[1], &[1], &[1]], 1),
            (Series::A, 2, vec![&[1, 0][..], &[0, 1], &[1, 0], &[0, 1]], 2),
            (Series::A, 1, vec![&[1][..], &[2], &[1]], 3),
        ] {
            let rep = form(s, r, &ws, k).flatness_check().unwrap();
            rep.ensure().unwrap();
            assert_eq!(rep.full.max_deviation, "0");
        }
    }

    #[test]
    fn sign_error_breaks_flatness() {
        let f = form(Series::A, 1, &[&[1], &[1], &[1], &[1]], 1);
        let sys = f.system();
        let mut om: OmegaMap = sys
            .pairs()
            .map(|(i, j)| ((i, j), sys.omega_full(i, j).unwrap().clone()))
            .collect();
        let neg = om[&(0, 1)].scale(&q(-1));
        om.insert((0, 1), neg);
        let rep = kohno_check(4, &om);
        assert!(!rep.holds());
        assert!(rep.failures.iter().any(|s| s.contains("Ω13")));
    }

    #[test]
    fn rotation_scalars() {
        let f = form(Series::A, 1, &[&[1], &[1], &[1], &[1]], 2);
        let rot = f.rotation_monodromy().unwrap();
        assert!((rot.predicted - c(0.0, -1.0)).norm() < 1e-15);
        assert!(rot.deviation < 1e-10);
        let f = form(Series::A, 1, &[&[1], &[1], &[0]], 1);
        let rot = f.rotation_monodromy().unwrap();
        assert!((rot.predicted - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(rot.deviation < 1e-10);
        let f = form(Series::A, 2, &[&[0, 0], &[0, 0]], 1);
        assert!((f.rotation_monodromy().unwrap().predicted - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn export_evaluation() {
        let f = form(Series::A, 1, &[&[1], &[1], &[0]], 1);
        let z = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
        let ev = FormEvaluation::new(&f, &z, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let back: FormEvaluation = serde_json::from_str(&serde_json::to_string(&ev).unwrap()).unwrap();
        assert_eq!(back, ev);
        let m = matrix_from_entries(&ev.matrix).unwrap();
        // Ω¹² = −3/2 on the invariant of ½⊗½, times (v₁−v₂)/(z₁−z₂) = −1 and 1/3
        assert!((m[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
    }
}
