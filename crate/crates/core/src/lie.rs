//! Root data of simple Lie algebras.
//!
//! Conventions:
//! * `cartan[i][j] = 2⟨αᵢ,αⱼ⟩/⟨αⱼ,αⱼ⟩ = ⟨αᵢ, αⱼ^∨⟩` with Bourbaki node numbering.
//!   Row `i` is therefore the simple root `αᵢ` written in Dynkin labels.
//! * Weights are always stored as Dynkin labels (fundamental-weight basis).
//! * The invariant form is normalized so that the highest root has square norm 2.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q, SparseMatrix, Q};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Series {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Series::A => "A",
            Series::B => "B",
            Series::C => "C",
            Series::D => "D",
            Series::E => "E",
            Series::F => "F",
            Series::G => "G",
        };
        f.write_str(s)
    }
}

impl FromStr for Series {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Series::A),
            "B" => Ok(Series::B),
            "C" => Ok(Series::C),
            "D" => Ok(Series::D),
            "E" => Ok(Series::E),
            "F" => Ok(Series::F),
            "G" => Ok(Series::G),
            other => Err(Error::InvalidType {
                series: other.to_string(),
                rank: 0,
                reason: "unknown series label".into(),
            }),
        }
    }
}

/// A weight in Dynkin labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weight(pub Vec<i64>);

impl Weight {
    pub fn zero(rank: usize) -> Self {
        Weight(vec![0; rank])
    }

    pub fn fundamental(rank: usize, i: usize) -> Self {
        let mut w = vec![0; rank];
        w[i] = 1;
        Weight(w)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_dominant(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: i64) -> Weight {
        Weight(self.0.iter().map(|a| a * s).collect())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Combinatorial data of a simple Lie algebra. Immutable after construction.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    series: Series,
    rank: usize,
    cartan: Vec<Vec<i64>>,
    /// positive roots in simple-root coordinates, sorted by height
    roots_simple: Vec<Vec<i64>>,
    positive_roots: Vec<Weight>,
    highest_root: Weight,
    weyl_vector: Weight,
    dual_coxeter: i64,
    /// ⟨ωᵢ,ωⱼ⟩
    gram: Vec<Vec<Q>>,
    /// ⟨αᵢ,αᵢ⟩
    simple_norms: Vec<Q>,
    /// inverse transpose of the Cartan matrix: Dynkin labels → simple-root coordinates
    to_simple: Vec<Vec<Q>>,
}

fn cartan_matrix(series: Series, rank: usize) -> Result<Vec<Vec<i64>>> {
    let invalid = |reason: &str| Error::InvalidType {
        series: series.to_string(),
        rank,
        reason: reason.to_string(),
    };
    let ok = match series {
        Series::A => rank >= 1,
        Series::B | Series::C => rank >= 2,
        Series::D => rank >= 4,
        Series::E => (6..=8).contains(&rank),
        Series::F => rank == 4,
        Series::G => rank == 2,
    };
    if !ok {
        let reason = match series {
            Series::A => "A requires rank >= 1",
            Series::B => "B requires rank >= 2",
            Series::C => "C requires rank >= 2",
            Series::D => "D requires rank >= 4",
            Series::E => "E exists only in ranks 6, 7, 8",
            Series::F => "F exists only in rank 4",
            Series::G => "G exists only in rank 2",
        };
        return Err(invalid(reason));
    }
    let mut a = vec![vec![0i64; rank]; rank];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let link = |a: &mut Vec<Vec<i64>>, i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    match series {
        Series::A | Series::B | Series::C => {
            for i in 0..rank - 1 {
                link(&mut a, i, i + 1);
            }
            if series == Series::B {
                a[rank - 2][rank - 1] = -2;
            } else if series == Series::C {
                a[rank - 1][rank - 2] = -2;
            }
        }
        Series::D => {
            for i in 0..rank - 2 {
                link(&mut a, i, i + 1);
            }
            link(&mut a, rank - 3, rank - 1);
        }
        Series::E => {
            link(&mut a, 0, 2);
            link(&mut a, 1, 3);
            for i in 2..rank - 1 {
                link(&mut a, i, i + 1);
            }
        }
        Series::F => {
            link(&mut a, 0, 1);
            link(&mut a, 1, 2);
            link(&mut a, 2, 3);
            a[1][2] = -2;
        }
        Series::G => {
            a[0][1] = -1;
            a[1][0] = -3;
        }
    }
    Ok(a)
}

/// Standard dimension of the simple algebra of the given type.
pub fn standard_dimension(series: Series, rank: usize) -> usize {
    match series {
        Series::A => rank * (rank + 2),
        Series::B | Series::C => rank * (2 * rank + 1),
        Series::D => rank * (2 * rank - 1),
        Series::E => match rank {
            6 => 78,
            7 => 133,
            _ => 248,
        },
        Series::F => 52,
        Series::G => 14,
    }
}

fn frac_to_i64(x: &Q) -> Option<i64> {
    if x.is_integer() {
        x.to_integer().to_i64()
    } else {
        None
    }
}

impl LieAlgebra {
    pub fn new(series: Series, rank: usize) -> Result<Self> {
        let cartan = cartan_matrix(series, rank)?;
        let simple_norms = symmetrizer(&cartan);

        let roots_simple = positive_roots_simple(&cartan);
        let positive_roots: Vec<Weight> = roots_simple.iter().map(|c| simple_to_dynkin(&cartan, c)).collect();
        let highest = roots_simple.last().expect("nonempty root system");
        let highest_root = simple_to_dynkin(&cartan, highest);

        // ⟨ωᵢ,ωⱼ⟩ = (A⁻¹)ᵢⱼ ⟨αⱼ,αⱼ⟩/2
        let a_q = SparseMatrix::from_dense(
            &cartan
                .iter()
                .map(|r| r.iter().map(|x| q(*x)).collect())
                .collect::<Vec<_>>(),
        );
        let a_inv = linalg::inverse(&a_q).expect("Cartan matrix is invertible");
        let mut gram = vec![vec![Q::zero(); rank]; rank];
        for (i, row) in gram.iter_mut().enumerate() {
            for (j, g) in row.iter_mut().enumerate() {
                *g = a_inv.get(i, j) * simple_norms[j].clone() / q(2);
            }
        }
        let to_simple = (0..rank)
            .map(|i| (0..rank).map(|j| a_inv.get(j, i)).collect())
            .collect();

        let mut alg = LieAlgebra {
            series,
            rank,
            cartan,
            roots_simple,
            positive_roots,
            highest_root: highest_root.clone(),
            weyl_vector: Weight(vec![1; rank]),
            dual_coxeter: 0,
            gram,
            simple_norms,
            to_simple,
        };

        let theta_sq = alg.pairing_unchecked(&highest_root, &highest_root);
        let scale = q(2) / theta_sq;
        for row in alg.gram.iter_mut() {
            for g in row.iter_mut() {
                *g = g.clone() * scale.clone();
            }
        }
        for n in alg.simple_norms.iter_mut() {
            *n = n.clone() * scale.clone();
        }
        let h = Q::one() + alg.pairing_unchecked(&alg.weyl_vector, &alg.highest_root);
        alg.dual_coxeter = frac_to_i64(&h).expect("dual Coxeter number is an integer");
        Ok(alg)
    }

    pub fn series(&self) -> Series {
        self.series
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.series, self.rank)
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn positive_roots(&self) -> &[Weight] {
        &self.positive_roots
    }

    /// Positive roots in simple-root coordinates, in the same order as
    /// [`positive_roots`](Self::positive_roots) (nondecreasing height).
    pub fn positive_roots_simple(&self) -> &[Vec<i64>] {
        &self.roots_simple
    }

    pub fn highest_root(&self) -> &Weight {
        &self.highest_root
    }

    pub fn weyl_vector(&self) -> &Weight {
        &self.weyl_vector
    }

    pub fn dual_coxeter(&self) -> i64 {
        self.dual_coxeter
    }

    pub fn gram(&self) -> &[Vec<Q>] {
        &self.gram
    }

    /// ⟨αᵢ,αᵢ⟩ for each simple root.
    pub fn simple_root_norms(&self) -> &[Q] {
        &self.simple_norms
    }

    /// ⟨β,β⟩ for the positive root with the given index.
    pub fn root_norm(&self, idx: usize) -> Q {
        let b = &self.positive_roots[idx];
        self.pairing_unchecked(b, b)
    }

    /// Coefficients `mᵢ` with β^∨ = Σ mᵢ αᵢ^∨ for the positive root `idx`.
    pub fn coroot_coefficients(&self, idx: usize) -> Vec<Q> {
        let norm = self.root_norm(idx);
        self.roots_simple[idx]
            .iter()
            .zip(&self.simple_norms)
            .map(|(c, n)| q(*c) * n.clone() / norm.clone())
            .collect()
    }

    /// Inverse of the matrix ⟨αᵢ^∨, αⱼ^∨⟩; the Cartan part of the Casimir
    /// element is Σᵢⱼ (this)ᵢⱼ hᵢ ⊗ hⱼ.
    pub fn coroot_gram_inverse(&self) -> Vec<Vec<Q>> {
        let r = self.rank;
        let k = SparseMatrix::from_dense(
            &(0..r)
                .map(|i| {
                    (0..r)
                        .map(|j| {
                            let ai = self.simple_root(i);
                            let aj = self.simple_root(j);
                            q(4) * self.pairing_unchecked(&ai, &aj)
                                / (self.simple_norms[i].clone() * self.simple_norms[j].clone())
                        })
                        .collect()
                })
                .collect::<Vec<_>>(),
        );
        let inv = linalg::inverse(&k).expect("coroot Gram matrix is invertible");
        (0..r).map(|i| (0..r).map(|j| inv.get(i, j)).collect()).collect()
    }

    pub fn dimension(&self) -> usize {
        self.rank + 2 * self.positive_roots.len()
    }

    pub fn simple_root(&self, i: usize) -> Weight {
        Weight(self.cartan[i].clone())
    }

    pub fn index_of_root(&self, root_simple: &[i64]) -> Option<usize> {
        self.roots_simple.iter().position(|r| r == root_simple)
    }

    fn check(&self, w: &Weight) -> Result<()> {
        if w.rank() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                got: w.rank(),
            });
        }
        Ok(())
    }

    fn pairing_unchecked(&self, a: &Weight, b: &Weight) -> Q {
        let mut acc = Q::zero();
        for (i, ai) in a.0.iter().enumerate() {
            if *ai == 0 {
                continue;
            }
            for (j, bj) in b.0.iter().enumerate() {
                if *bj != 0 {
                    acc += self.gram[i][j].clone() * q(ai * bj);
                }
            }
        }
        acc
    }

    /// The normalized invariant form on weights.
    pub fn pairing(&self, a: &Weight, b: &Weight) -> Result<Q> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.pairing_unchecked(a, b))
    }

    pub fn is_admissible(&self, w: &Weight, level: i64) -> Result<bool> {
        self.check(w)?;
        if !w.is_dominant() {
            return Err(Error::NotDominant { weight: w.to_string() });
        }
        Ok(self.pairing_unchecked(w, &self.highest_root) <= q(level))
    }

    /// Coordinates of a weight in the basis of simple roots (rational).
    pub fn to_simple_coords(&self, w: &Weight) -> Result<Vec<Q>> {
        self.check(w)?;
        Ok((0..self.rank)
            .map(|i| {
                w.0.iter()
                    .enumerate()
                    .fold(Q::zero(), |acc, (j, c)| acc + self.to_simple[i][j].clone() * q(*c))
            })
            .collect())
    }

    /// Whether `w` is an integral combination of simple roots.
    pub fn in_root_lattice(&self, w: &Weight) -> Result<bool> {
        Ok(self.to_simple_coords(w)?.iter().all(|c| c.is_integer()))
    }

    /// Simple reflection sᵢ(w) = w − ⟨w,αᵢ^∨⟩αᵢ.
    pub fn reflect(&self, w: &Weight, i: usize) -> Weight {
        let c = w.0[i];
        Weight(w.0.iter().zip(&self.cartan[i]).map(|(x, a)| x - c * a).collect())
    }

    /// Height of a root-lattice element `w` relative to zero: sum of its
    /// simple-root coordinates.
    pub fn height(&self, w: &Weight) -> Result<Q> {
        Ok(self.to_simple_coords(w)?.into_iter().fold(Q::zero(), |a, b| a + b))
    }

    /// The dominant element of the Weyl orbit of `w` and the parity of the
    /// number of reflections used.
    pub fn dominant_conjugate(&self, w: &Weight) -> (Weight, bool) {
        let mut cur = w.clone();
        let mut odd = false;
        while let Some(i) = cur.0.iter().position(|&c| c < 0) {
            cur = self.reflect(&cur, i);
            odd = !odd;
        }
        (cur, odd)
    }

    /// λ* = −w₀λ, the highest weight of the dual representation.
    pub fn dual_weight(&self, w: &Weight) -> Weight {
        self.dominant_conjugate(&w.scale(-1)).0
    }

    /// ⟨λ, λ + 2ρ⟩, the eigenvalue of the Casimir element on V_λ.
    pub fn casimir_scalar(&self, w: &Weight) -> Result<Q> {
        self.check(w)?;
        if !w.is_dominant() {
            return Err(Error::NotDominant { weight: w.to_string() });
        }
        let shifted = w.add(&self.weyl_vector.scale(2));
        Ok(self.pairing_unchecked(w, &shifted))
    }

    /// Weyl dimension formula ∏_{α>0} ⟨λ+ρ,α⟩/⟨ρ,α⟩.
    pub fn weyl_dimension(&self, w: &Weight) -> Result<BigInt> {
        self.check(w)?;
        let shifted = w.add(&self.weyl_vector);
        let mut num = Q::one();
        for a in &self.positive_roots {
            num = num * self.pairing_unchecked(&shifted, a) / self.pairing_unchecked(&self.weyl_vector, a);
        }
        debug_assert!(num.is_integer());
        Ok(num.to_integer())
    }

    /// All dominant weights admissible at level `k`, sorted lexicographically.
    pub fn admissible_weights(&self, level: i64) -> Vec<Weight> {
        // ⟨ωᵢ,θ⟩ is a positive integer (the comark) for every i
        let comarks: Vec<i64> = (0..self.rank)
            .map(|i| {
                frac_to_i64(&self.pairing_unchecked(&Weight::fundamental(self.rank, i), &self.highest_root))
                    .expect("integral comark")
            })
            .collect();
        let mut out = Vec::new();
        let mut cur = vec![0i64; self.rank];
        fn rec(i: usize, budget: i64, comarks: &[i64], cur: &mut Vec<i64>, out: &mut Vec<Weight>) {
            if i == comarks.len() {
                out.push(Weight(cur.clone()));
                return;
            }
            let mut c = 0;
            while c * comarks[i] <= budget {
                cur[i] = c;
                rec(i + 1, budget - c * comarks[i], comarks, cur, out);
                c += 1;
            }
            cur[i] = 0;
        }
        if level >= 0 {
            rec(0, level, &comarks, &mut cur, &mut out);
        }
        out.sort();
        out
    }

    /// Whether the descent condition for an n-fold metaplectic square root
    /// holds: `n·ρ` lies in the root lattice. This is automatic for even `n`
    /// since `2ρ` is the sum of the positive roots.
    pub fn metaplectic_parity(&self, n: i64) -> Result<MetaplecticParity> {
        if n < 1 {
            return Err(Error::InvalidArgument(format!("n must be >= 1, got {n}")));
        }
        Ok(MetaplecticParity {
            descends: self.in_root_lattice(&self.weyl_vector.scale(n))?,
            n_even: n % 2 == 0,
        })
    }

    pub fn to_document(&self) -> AlgebraDocument {
        let gram_num = self
            .gram
            .iter()
            .map(|r| r.iter().map(|x| x.numer().to_string()).collect())
            .collect();
        let gram_den = self
            .gram
            .iter()
            .map(|r| r.iter().map(|x| x.denom().to_string()).collect())
            .collect();
        AlgebraDocument {
            series: self.series,
            rank: self.rank,
            cartan: self.cartan.clone(),
            gram_num,
            gram_den,
            positive_roots: self.positive_roots.clone(),
            theta: self.highest_root.clone(),
            rho: self.weyl_vector.clone(),
            h: self.dual_coxeter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaplecticParity {
    /// `n·ρ` lies in the root lattice
    pub descends: bool,
    pub n_even: bool,
}

/// Serialized algebra data; rational Gram entries are split into decimal
/// numerator and denominator strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDocument {
    pub series: Series,
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    pub gram_num: Vec<Vec<String>>,
    pub gram_den: Vec<Vec<String>>,
    pub positive_roots: Vec<Weight>,
    pub theta: Weight,
    pub rho: Weight,
    pub h: i64,
}

/// Lower bound on the codimension of the locus of bundles admitting a
/// destabilising reduction to a parabolic `P ⊂ G`:
/// `⌈(n−2)(dim G − dim P)/2⌉ − dim Z(P)`.
///
/// Only `n ≥ 2` is accepted; at `n = 2` the bound degenerates to `−dim Z(P)`.
pub fn codim_bound(dim_g: i64, dim_p: i64, dim_zp: i64, n: i64) -> Result<i64> {
    if dim_g <= 0 || dim_p <= 0 || dim_zp < 0 {
        return Err(Error::InvalidArgument(
            "dimensions must be positive (dim Z(P) nonnegative)".into(),
        ));
    }
    if dim_p >= dim_g {
        return Err(Error::InvalidArgument(format!(
            "dim P = {dim_p} must be smaller than dim G = {dim_g}"
        )));
    }
    if dim_zp > dim_p {
        return Err(Error::InvalidArgument(format!(
            "dim Z(P) = {dim_zp} cannot exceed dim P = {dim_p}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2 marked points, got {n}")));
    }
    let twice = (n - 2) * (dim_g - dim_p);
    Ok((twice + 1).div_euclid(2) - dim_zp)
}

/// ⟨αᵢ,αᵢ⟩ up to a common scale: ⟨αᵢ,αⱼ⟩ = Aᵢⱼ|αⱼ|²/2 must be symmetric.
fn symmetrizer(cartan: &[Vec<i64>]) -> Vec<Q> {
    let r = cartan.len();
    let mut norms: Vec<Option<Q>> = vec![None; r];
    norms[0] = Some(Q::one());
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        for j in 0..r {
            if i != j && cartan[i][j] != 0 && norms[j].is_none() {
                // Aᵢⱼ|αⱼ|² = Aⱼᵢ|αᵢ|²
                let ni = norms[i].clone().unwrap();
                norms[j] = Some(ni * q(cartan[j][i]) / q(cartan[i][j]));
                stack.push(j);
            }
        }
    }
    norms
        .into_iter()
        .map(|n| n.expect("connected Dynkin diagram"))
        .collect()
}

fn simple_to_dynkin(cartan: &[Vec<i64>], c: &[i64]) -> Weight {
    let r = cartan.len();
    Weight(
        (0..r)
            .map(|j| c.iter().enumerate().map(|(i, ci)| ci * cartan[i][j]).sum())
            .collect(),
    )
}

/// Positive roots by root strings: for a root β and simple αᵢ with
/// β − pαᵢ, …, β a string, β + αᵢ is a root iff p − ⟨β,αᵢ^∨⟩ > 0.
fn positive_roots_simple(cartan: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let r = cartan.len();
    let mut all: HashSet<Vec<i64>> = HashSet::new();
    let mut layer: BTreeSet<Vec<i64>> = BTreeSet::new();
    for i in 0..r {
        let mut e = vec![0; r];
        e[i] = 1;
        layer.insert(e.clone());
        all.insert(e);
    }
    let mut out: Vec<Vec<i64>> = layer.iter().cloned().collect();
    while !layer.is_empty() {
        let mut next = BTreeSet::new();
        for beta in &layer {
            let labels = simple_to_dynkin(cartan, beta);
            for i in 0..r {
                let mut p = 0;
                let mut down = beta.clone();
                loop {
                    down[i] -= 1;
                    if all.contains(&down) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                if p - labels.0[i] > 0 {
                    let mut up = beta.clone();
                    up[i] += 1;
                    if !all.contains(&up) {
                        next.insert(up);
                    }
                }
            }
        }
        for b in &next {
            all.insert(b.clone());
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
