//! Tensor products `V_{λ₁} ⊗ ⋯ ⊗ V_{λ_n}`, their invariants and the
//! Casimir operators Ωⁱʲ.
//!
//! Basis vectors of the product are indexed in mixed radix with slot 0 most
//! significant. Operators acting on one or two slots are applied factor-wise
//! to basis indices, so the full-space matrices are assembled directly in
//! sparse form; no Kronecker product of full size is ever formed.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::{q, qr, SparseMatrix, Q};
use crate::lie::{LieAlgebra, Weight};
use crate::linalg::{self, SparseVec};
use crate::rep::{casimir_dual_pairs, AlgebraLabel, ExportHeader, LieElement, MatrixDocument, Representation};

pub const DEFAULT_DIM_CAP: usize = 50_000;

#[derive(Debug, Clone, Copy)]
pub struct TensorConfig {
    /// Largest admissible dimension of the full tensor product.
    pub dim_cap: usize,
    /// Check at construction that both Ωⁱʲ routes agree.
    pub verify_routes: bool,
}

impl Default for TensorConfig {
    fn default() -> Self {
        TensorConfig {
            dim_cap: DEFAULT_DIM_CAP,
            verify_routes: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TensorSystem {
    algebra: Arc<LieAlgebra>,
    factors: Vec<Arc<Representation>>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
    /// columns span the invariants; total × d
    invariant_basis: SparseMatrix<Q>,
    /// full index at which invariant basis vector `k` has coordinate 1 and
    /// all other basis vectors vanish
    pivots: Vec<usize>,
    omega_full: BTreeMap<(usize, usize), SparseMatrix<Q>>,
    omega_inv: BTreeMap<(usize, usize), SparseMatrix<Q>>,
    invariant_forms: OnceLock<SparseMatrix<Q>>,
}

impl TensorSystem {
    pub fn new(algebra: Arc<LieAlgebra>, weights: &[Weight]) -> Result<Self> {
        Self::with_config(algebra, weights, TensorConfig::default())
    }

    pub fn with_config(algebra: Arc<LieAlgebra>, weights: &[Weight], config: TensorConfig) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("at least one tensor factor is required".into()));
        }
        // check the cap before building anything large
        let mut total = BigInt::one();
        for w in weights {
            total *= algebra.weyl_dimension(w)?;
        }
        if total > BigInt::from(config.dim_cap) {
            return Err(Error::TooLarge {
                dim: usize::try_from(&total).unwrap_or(usize::MAX),
                cap: config.dim_cap,
            });
        }
        let mut cache: HashMap<Weight, Arc<Representation>> = HashMap::new();
        let mut factors = Vec::with_capacity(weights.len());
        for w in weights {
            let rep = match cache.get(w) {
                Some(r) => r.clone(),
                None => {
                    let r = Arc::new(Representation::new(algebra.clone(), w.clone())?);
                    cache.insert(w.clone(), r.clone());
                    r
                }
            };
            factors.push(rep);
        }
        Self::from_factors(factors, config)
    }

    pub fn from_factors(factors: Vec<Arc<Representation>>, config: TensorConfig) -> Result<Self> {
        let algebra = factors
            .first()
            .ok_or_else(|| Error::InvalidArgument("at least one tensor factor is required".into()))?
            .algebra()
            .clone();
        let dims: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
        let total = dims
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(*d))
            .filter(|t| *t <= config.dim_cap)
            .ok_or(Error::TooLarge {
                dim: dims.iter().fold(1usize, |a, d| a.saturating_mul(*d)),
                cap: config.dim_cap,
            })?;
        let mut strides = vec![1; dims.len()];
        for s in (0..dims.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        let mut sys = TensorSystem {
            algebra,
            factors,
            dims,
            strides,
            total,
            invariant_basis: SparseMatrix::zeros(total, 0),
            pivots: Vec::new(),
            omega_full: BTreeMap::new(),
            omega_inv: BTreeMap::new(),
            invariant_forms: OnceLock::new(),
        };
        sys.compute_invariants();

        let n = sys.n();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let built: Vec<Result<((usize, usize), SparseMatrix<Q>, SparseMatrix<Q>)>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let full = sys.omega_dual_basis(i, j)?;
                if config.verify_routes && full != sys.omega_casimir_difference(i, j)? {
                    return Err(Error::IdentityFailure(format!(
                        "the two constructions of Ω^{}{} disagree",
                        i + 1,
                        j + 1
                    )));
                }
                let inv = sys.restrict(&full)?;
                Ok(((i, j), full, inv))
            })
            .collect();
        for r in built {
            let (key, full, inv) = r?;
            sys.omega_full.insert(key, full);
            sys.omega_inv.insert(key, inv);
        }
        Ok(sys)
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn factors(&self) -> &[Arc<Representation>] {
        &self.factors
    }

    pub fn weights(&self) -> Vec<Weight> {
        self.factors.iter().map(|f| f.highest_weight().clone()).collect()
    }

    /// Number of tensor factors.
    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn invariant_dim(&self) -> usize {
        self.invariant_basis.ncols()
    }

    /// Rows form a basis of the invariant linear forms (d × total); computed
    /// once.
    pub fn invariant_forms(&self) -> Result<&SparseMatrix<Q>> {
        if let Some(m) = self.invariant_forms.get() {
            return Ok(m);
        }
        let m = compute_invariant_forms(self)?;
        Ok(self.invariant_forms.get_or_init(|| m))
    }

    pub fn invariant_basis(&self) -> &SparseMatrix<Q> {
        &self.invariant_basis
    }

    /// Coordinates used to read off invariant-basis coefficients.
    pub fn invariant_pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn digits(&self, idx: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.dims)
            .map(|(s, d)| (idx / s) % d)
            .collect()
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    fn digit(&self, idx: usize, slot: usize) -> usize {
        (idx / self.strides[slot]) % self.dims[slot]
    }

    pub fn basis_weight(&self, idx: usize) -> Weight {
        let r = self.algebra.rank();
        self.factors.iter().enumerate().fold(Weight::zero(r), |acc, (s, f)| {
            acc.add(&f.basis_weights()[self.digit(idx, s)])
        })
    }

    fn check_slots(&self, i: usize, j: usize) -> Result<()> {
        let n = self.n();
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidSlots { i, j, n });
        }
        Ok(())
    }

    /// Embeds an operator on slot `s` into the full space.
    pub fn embed_single(&self, s: usize, op: &SparseMatrix<Q>) -> SparseMatrix<Q> {
        let cols = op.transpose();
        let stride = self.strides[s];
        let mut trip = Vec::new();
        for col in 0..self.total {
            let a = self.digit(col, s);
            let base = col - a * stride;
            for (r, v) in cols.row(a) {
                trip.push((base + r * stride, col, v.clone()));
            }
        }
        SparseMatrix::from_triplets(self.total, self.total, trip)
    }

    /// Embeds an operator on `V_i ⊗ V_j` (local index `a·dim V_j + b`) into
    /// the full space.
    pub fn embed_pair(&self, i: usize, j: usize, op: &SparseMatrix<Q>) -> SparseMatrix<Q> {
        let cols = op.transpose();
        let (si, sj, dj) = (self.strides[i], self.strides[j], self.dims[j]);
        let mut trip = Vec::new();
        for col in 0..self.total {
            let (a, b) = (self.digit(col, i), self.digit(col, j));
            let base = col - a * si - b * sj;
            for (r, v) in cols.row(a * dj + b) {
                trip.push((base + (r / dj) * si + (r % dj) * sj, col, v.clone()));
            }
        }
        SparseMatrix::from_triplets(self.total, self.total, trip)
    }

    /// Diagonal action of a Lie algebra element on the full space.
    pub fn diagonal(&self, x: LieElement) -> SparseMatrix<Q> {
        (0..self.n()).fold(SparseMatrix::zeros(self.total, self.total), |acc, s| {
            acc.add(&self.embed_single(s, self.factors[s].element(x)))
        })
    }

    fn compute_invariants(&mut self) {
        let zero_weight: Vec<usize> = (0..self.total)
            .filter(|&idx| self.basis_weight(idx).is_zero())
            .collect();
        let r = self.algebra.rank();
        let transposed: Vec<Vec<(SparseMatrix<Q>, SparseMatrix<Q>)>> = self
            .factors
            .iter()
            .map(|f| (0..r).map(|i| (f.e(i).transpose(), f.f(i).transpose())).collect())
            .collect();
        // row key: (generator, image index)
        let mut rows: BTreeMap<(usize, usize), SparseVec<Q>> = BTreeMap::new();
        for (local, &col) in zero_weight.iter().enumerate() {
            for s in 0..self.n() {
                let a = self.digit(col, s);
                let base = col - a * self.strides[s];
                for (i, (et, ft)) in transposed[s].iter().enumerate() {
                    for (g, m) in [(i, et), (r + i, ft)] {
                        for (t, v) in m.row(a) {
                            let row = rows.entry((g, base + t * self.strides[s])).or_default();
                            match row.last_mut() {
                                Some((c, acc)) if *c == local => *acc += v,
                                _ => row.push((local, v.clone())),
                            }
                        }
                    }
                }
            }
        }
        let ns = linalg::nullspace(rows.into_values().collect(), zero_weight.len());
        let columns: Vec<SparseVec<Q>> = ns
            .basis
            .iter()
            .map(|v| v.iter().map(|(c, x)| (zero_weight[*c], x.clone())).collect())
            .collect();
        self.invariant_basis = SparseMatrix::from_columns(self.total, &columns);
        self.pivots = ns.free.iter().map(|c| zero_weight[*c]).collect();
    }

    /// Restriction of a full-space operator to the invariants, in the
    /// invariant basis. Fails unless the operator preserves the invariants.
    pub fn restrict(&self, op: &SparseMatrix<Q>) -> Result<SparseMatrix<Q>> {
        if op.nrows() != self.total || op.ncols() != self.total {
            return Err(Error::DimensionMismatch {
                expected: self.total,
                got: op.nrows(),
            });
        }
        let image = op.mul(&self.invariant_basis);
        let m = image.select_rows(&self.pivots);
        if self.invariant_basis.mul(&m) != image {
            return Err(Error::IdentityFailure(
                "operator does not preserve the invariant subspace".into(),
            ));
        }
        Ok(m)
    }

    /// Ωⁱʲ on the full space as Σ c·x⊗y over dual bases, `x` acting on slot
    /// `i` and `y` on slot `j`.
    pub fn omega_dual_basis(&self, i: usize, j: usize) -> Result<SparseMatrix<Q>> {
        self.check_slots(i, j)?;
        let (fi, fj) = (&self.factors[i], &self.factors[j]);
        let local = casimir_dual_pairs(&self.algebra).into_iter().fold(
            SparseMatrix::zeros(fi.dim() * fj.dim(), fi.dim() * fj.dim()),
            |acc, (c, x, y)| acc.add(&fi.element(x).kron(fj.element(y)).scale(&c)),
        );
        Ok(self.embed_pair(i, j, &local))
    }

    /// Ωⁱʲ on the full space as ½(C⁽ⁱʲ⁾ − C⁽ⁱ⁾ − C⁽ʲ⁾) with C⁽ⁱʲ⁾ the Casimir
    /// of the diagonal action on slots `i, j`.
    pub fn omega_casimir_difference(&self, i: usize, j: usize) -> Result<SparseMatrix<Q>> {
        self.check_slots(i, j)?;
        let (fi, fj) = (&self.factors[i], &self.factors[j]);
        let pair = |x: LieElement| {
            self.embed_single(i, fi.element(x))
                .add(&self.embed_single(j, fj.element(x)))
        };
        let c_ij = casimir_dual_pairs(&self.algebra)
            .into_iter()
            .fold(SparseMatrix::zeros(self.total, self.total), |acc, (c, x, y)| {
                acc.add(&pair(x).mul(&pair(y)).scale(&c))
            });
        let c_i = self.embed_single(i, &fi.casimir_matrix());
        let c_j = self.embed_single(j, &fj.casimir_matrix());
        Ok(c_ij.sub(&c_i).sub(&c_j).scale(&qr(1, 2)))
    }

    fn key(&self, i: usize, j: usize) -> Result<(usize, usize)> {
        self.check_slots(i, j)?;
        Ok((i.min(j), i.max(j)))
    }

    /// Ωⁱʲ on the full space.
    pub fn omega_full(&self, i: usize, j: usize) -> Result<&SparseMatrix<Q>> {
        Ok(&self.omega_full[&self.key(i, j)?])
    }

    /// Ωⁱʲ restricted to the invariants, in the invariant basis.
    pub fn omega_pair(&self, i: usize, j: usize) -> Result<&SparseMatrix<Q>> {
        Ok(&self.omega_inv[&self.key(i, j)?])
    }

    /// All pairs `i < j` in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.omega_inv.keys().copied()
    }

    /// Σᵢ ⟨λᵢ, λᵢ+2ρ⟩.
    pub fn casimir_total(&self) -> Result<Q> {
        self.factors.iter().try_fold(
            q(0),
            |acc, f| Ok(acc + self.algebra.casimir_scalar(f.highest_weight())?),
        )
    }

    /// Σ_{i<j} Ωⁱʲ = −½ Σᵢ cᵢ on the invariants.
    pub fn check_casimir_sum(&self) -> Result<()> {
        let d = self.invariant_dim();
        let sum = self
            .omega_inv
            .values()
            .fold(SparseMatrix::zeros(d, d), |acc, m| acc.add(m));
        let expected = SparseMatrix::identity(d).scale(&(-self.casimir_total()? / q(2)));
        if sum != expected {
            return Err(Error::IdentityFailure(format!(
                "Σ Ω^ij on invariants is not −½Σc (max deviation {})",
                sum.sub(&expected).max_abs()
            )));
        }
        Ok(())
    }

    /// Every Ωⁱʲ commutes with the diagonal Chevalley generators.
    pub fn check_invariance(&self) -> Result<()> {
        let r = self.algebra.rank();
        let roots: Vec<usize> = (0..r)
            .map(|i| self.algebra.index_of_root(&unit(r, i)).expect("simple roots are roots"))
            .collect();
        let gens: Vec<SparseMatrix<Q>> = roots
            .iter()
            .flat_map(|&idx| {
                [
                    self.diagonal(LieElement::RootE(idx)),
                    self.diagonal(LieElement::RootF(idx)),
                ]
            })
            .collect();
        for (&(i, j), om) in &self.omega_full {
            if gens.iter().any(|g| !om.commutator(g).is_zero()) {
                return Err(Error::IdentityFailure(format!(
                    "Ω^{}{} does not commute with the diagonal action",
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// Permutation operator exchanging slots `i` and `i+1`; both must carry
    /// the same representation.
    pub fn swap_full(&self, i: usize) -> Result<SparseMatrix<Q>> {
        self.check_slots(i, i + 1)?;
        if self.factors[i].highest_weight() != self.factors[i + 1].highest_weight() {
            return Err(Error::InvalidArgument(format!(
                "slots {} and {} carry different weights {} and {}",
                i + 1,
                i + 2,
                self.factors[i].highest_weight(),
                self.factors[i + 1].highest_weight()
            )));
        }
        let trip = (0..self.total).map(|col| {
            let mut d = self.digits(col);
            d.swap(i, i + 1);
            (self.index(&d), col, q(1))
        });
        Ok(SparseMatrix::from_triplets(self.total, self.total, trip))
    }

    /// Slot exchange restricted to the invariants.
    pub fn swap_invariant(&self, i: usize) -> Result<SparseMatrix<Q>> {
        self.restrict(&self.swap_full(i)?)
    }

    pub fn basis_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for f in &self.factors {
            hasher.update(f.basis_hash().as_bytes());
            hasher.update(b"|");
        }
        hex::encode(hasher.finalize())
    }

    pub fn header(&self) -> ExportHeader {
        ExportHeader {
            algebra: AlgebraLabel {
                series: self.algebra.series(),
                rank: self.algebra.rank(),
            },
            weights: self.weights(),
            dimension: self.total,
            basis_weights: (0..self.total).map(|idx| self.basis_weight(idx)).collect(),
            basis_hash: self.basis_hash(),
        }
    }

    pub fn omega_document(&self, i: usize, j: usize) -> Result<OmegaDocument> {
        let (a, b) = self.key(i, j)?;
        Ok(OmegaDocument {
            header: self.header(),
            slots: (a + 1, b + 1),
            full: MatrixDocument::new(format!("Omega{}{}", a + 1, b + 1), self.omega_full(a, b)?),
            invariant_basis: MatrixDocument::new("invariant_basis", &self.invariant_basis),
            restricted: MatrixDocument::new(format!("Omega{}{}_invariant", a + 1, b + 1), self.omega_pair(a, b)?),
        })
    }
}

fn unit(r: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; r];
    v[i] = 1;
    v
}

/// Ωⁱʲ export; slots are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaDocument {
    pub header: ExportHeader,
    pub slots: (usize, usize),
    pub full: MatrixDocument,
    pub invariant_basis: MatrixDocument,
    pub restricted: MatrixDocument,
}

fn compute_invariant_forms(system: &TensorSystem) -> Result<SparseMatrix<Q>> {
    let total = system.dim();
    let r = system.algebra().rank();
    let zero_weight: Vec<usize> = (0..total).filter(|&i| system.basis_weight(i).is_zero()).collect();
    let mut local = vec![usize::MAX; total];
    for (k, &i) in zero_weight.iter().enumerate() {
        local[i] = k;
    }
    // φ ∘ X = 0 reads Xᵀφ = 0, restricted to zero-weight coordinates
    let mut rows = Vec::new();
    for i in 0..r {
        let idx = simple_index(system, i);
        for g in [LieElement::RootE(idx), LieElement::RootF(idx)] {
            let xt = system.diagonal(g).transpose();
            for col in 0..total {
                let row: SparseVec<Q> = xt
                    .row(col)
                    .iter()
                    .filter(|(c, _)| local[*c] != usize::MAX)
                    .map(|(c, v)| (local[*c], v.clone()))
                    .collect();
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }
    let ns = linalg::nullspace(rows, zero_weight.len());
    if ns.dim != system.invariant_dim() {
        return Err(Error::IdentityFailure(format!(
            "{} invariant forms for {} invariant vectors",
            ns.dim,
            system.invariant_dim()
        )));
    }
    let full_rows = ns
        .basis
        .iter()
        .map(|v| {
            let mut row: SparseVec<Q> = v.iter().map(|(c, x)| (zero_weight[*c], x.clone())).collect();
            row.sort_by_key(|(c, _)| *c);
            row
        })
        .collect();
    Ok(SparseMatrix::from_rows(total, full_rows))
}

fn simple_index(system: &TensorSystem, i: usize) -> usize {
    let mut v = vec![0; system.algebra().rank()];
    v[i] = 1;
    system.algebra().index_of_root(&v).expect("simple roots are roots")
}
