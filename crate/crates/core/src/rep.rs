//! Irreducible highest-weight modules with exact Chevalley generator matrices.
//!
//! The module is generated from a highest-weight vector `v` by the lowering
//! operators, one depth (distance below λ in simple roots) at a time. A
//! candidate vector `f_j b` in weight μ is nonzero in the irreducible quotient
//! iff some raising operator `e_i` maps it to a nonzero vector one depth up.
//! The joint kernel of the raising operators below the top is exactly the
//! radical of the contravariant form, so choosing a basis among the candidates
//! by the rank of their raised images realizes `V_λ = M(λ)/rad`. Raised images
//! are computed with
//!
//! ```text
//! e_i f_j b = f_j (e_i b) + δ_ij ⟨μ+α_j, α_i^∨⟩ b,
//! ```
//!
//! where everything on the right lives at smaller depth and is already known.
//!
//! Generator conventions: `[h_i, e_j] = A_ji e_j`, `[h_i, f_j] = −A_ji f_j`,
//! `[e_i, f_j] = δ_ij h_i` with `A_ji = cartan[j][i] = ⟨α_j, α_i^∨⟩`.
//!
//! Basis order: increasing depth, then weights by decreasing Dynkin labels
//! (lexicographic), then the order in which basis vectors were selected.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::{q, SparseMatrix, Q};
use crate::lie::{LieAlgebra, Series, Weight};
use crate::linalg::{self, SparseVec};

type Block = Vec<Vec<Q>>;

/// Irreducible representation `V_λ`.
#[derive(Debug, Clone)]
pub struct Representation {
    algebra: Arc<LieAlgebra>,
    highest_weight: Weight,
    weights: Vec<Weight>,
    e: Vec<SparseMatrix<Q>>,
    f: Vec<SparseMatrix<Q>>,
    h: Vec<SparseMatrix<Q>>,
    /// `E_β` for every positive root, in the algebra's root order
    root_e: Vec<SparseMatrix<Q>>,
    /// `F_β` normalized by `[E_β, F_β] = H_{β^∨}`
    root_f: Vec<SparseMatrix<Q>>,
}

struct Space {
    weight: Weight,
    dim: usize,
}

fn block_col(block: Option<&Block>, col: usize, rows: usize) -> Vec<Q> {
    match block {
        Some(b) => b.iter().map(|r| r[col].clone()).collect(),
        None => vec![Q::zero(); rows],
    }
}

fn block_apply(block: Option<&Block>, v: &[Q], rows: usize) -> Vec<Q> {
    match block {
        Some(b) => b
            .iter()
            .map(|r| {
                r.iter()
                    .zip(v)
                    .fold(Q::zero(), |acc, (a, x)| acc + a.clone() * x.clone())
            })
            .collect(),
        None => vec![Q::zero(); rows],
    }
}

impl Representation {
    pub fn new(algebra: Arc<LieAlgebra>, highest_weight: Weight) -> Result<Self> {
        let r = algebra.rank();
        if highest_weight.rank() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: highest_weight.rank(),
            });
        }
        if !highest_weight.is_dominant() {
            return Err(Error::NotDominant {
                weight: highest_weight.to_string(),
            });
        }
        let simple: Vec<Weight> = (0..r).map(|i| algebra.simple_root(i)).collect();

        let mut levels: Vec<Vec<Space>> = vec![vec![Space {
            weight: highest_weight.clone(),
            dim: 1,
        }]];
        let mut dims: HashMap<Weight, usize> = HashMap::new();
        dims.insert(highest_weight.clone(), 1);
        // e_i : V_μ → V_{μ+α_i}, keyed by (i, μ)
        let mut e_blocks: HashMap<(usize, Weight), Block> = HashMap::new();
        // f_j : V_{μ+α_j} → V_μ, keyed by (j, μ+α_j)
        let mut f_blocks: HashMap<(usize, Weight), Block> = HashMap::new();

        loop {
            let prev = levels.last().unwrap();
            let mut candidates: BTreeSet<std::cmp::Reverse<Weight>> = BTreeSet::new();
            for sp in prev {
                for a in &simple {
                    candidates.insert(std::cmp::Reverse(sp.weight.sub(a)));
                }
            }
            let mut level = Vec::new();
            for std::cmp::Reverse(mu) in candidates {
                let ups: Vec<(usize, Weight, usize)> = (0..r)
                    .filter_map(|i| {
                        let w = mu.add(&simple[i]);
                        dims.get(&w).map(|d| (i, w, *d))
                    })
                    .collect();
                let image_dim: usize = ups.iter().map(|(_, _, d)| d).sum();
                // candidate vectors f_j b and their raised images
                let mut cands: Vec<(usize, usize)> = Vec::new();
                let mut images: Vec<SparseVec<Q>> = Vec::new();
                for (j, above_j, dj) in &ups {
                    for b in 0..*dj {
                        let mut img: Vec<Q> = Vec::with_capacity(image_dim);
                        for (i, above_i, di) in &ups {
                            // f_j(e_i b) with e_i b ∈ V_{μ+α_j+α_i}
                            let top = above_j.add(&simple[*i]);
                            let mut comp = match dims.get(&top) {
                                Some(&dt) => {
                                    let eb = block_col(e_blocks.get(&(*i, above_j.clone())), b, dt);
                                    block_apply(f_blocks.get(&(*j, top.clone())), &eb, *di)
                                }
                                None => vec![Q::zero(); *di],
                            };
                            if i == j {
                                comp[b] += q(above_j.0[*i]);
                            }
                            debug_assert_eq!(above_i, &mu.add(&simple[*i]));
                            img.extend(comp);
                        }
                        cands.push((*j, b));
                        images.push(img.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect());
                    }
                }
                let (basis, coords) = linalg::column_relations(&images, image_dim);
                let d = basis.len();
                if d == 0 {
                    continue;
                }
                // f blocks: columns are candidate coordinates
                for (j, above_j, dj) in &ups {
                    let mut blk = vec![vec![Q::zero(); *dj]; d];
                    for (c, (cj, b)) in cands.iter().enumerate() {
                        if cj == j {
                            for (p, row) in blk.iter_mut().enumerate() {
                                row[*b] = coords[c][p].clone();
                            }
                        }
                    }
                    f_blocks.insert((*j, above_j.clone()), blk);
                }
                // e blocks: raised images of the chosen basis
                let mut offset = 0;
                for (i, _, di) in &ups {
                    let mut blk = vec![vec![Q::zero(); d]; *di];
                    for (p, &c) in basis.iter().enumerate() {
                        for (idx, v) in &images[c] {
                            if *idx >= offset && *idx < offset + di {
                                blk[idx - offset][p] = v.clone();
                            }
                        }
                    }
                    e_blocks.insert((*i, mu.clone()), blk);
                    offset += di;
                }
                dims.insert(mu.clone(), d);
                level.push(Space { weight: mu, dim: d });
            }
            if level.is_empty() {
                break;
            }
            levels.push(level);
        }

        // global basis
        let mut offsets: HashMap<Weight, usize> = HashMap::new();
        let mut weights = Vec::new();
        for level in &levels {
            for sp in level {
                offsets.insert(sp.weight.clone(), weights.len());
                weights.extend(std::iter::repeat_n(sp.weight.clone(), sp.dim));
            }
        }
        let n = weights.len();
        let expected = algebra.weyl_dimension(&highest_weight)?;
        if BigInt::from(n) != expected {
            return Err(Error::IdentityFailure(format!(
                "constructed dimension {n} of V{highest_weight} differs from the Weyl dimension {expected}"
            )));
        }

        let assemble = |blocks: &HashMap<(usize, Weight), Block>, i: usize, raising: bool| {
            let mut trip = Vec::new();
            for ((bi, w), blk) in blocks {
                if *bi != i {
                    continue;
                }
                let (src, dst) = if raising {
                    (w.clone(), w.add(&simple[i]))
                } else {
                    (w.clone(), w.sub(&simple[i]))
                };
                let (Some(&so), Some(&dst_off)) = (offsets.get(&src), offsets.get(&dst)) else {
                    continue;
                };
                for (rr, row) in blk.iter().enumerate() {
                    for (cc, v) in row.iter().enumerate() {
                        if !v.is_zero() {
                            trip.push((dst_off + rr, so + cc, v.clone()));
                        }
                    }
                }
            }
            SparseMatrix::from_triplets(n, n, trip)
        };
        let e: Vec<_> = (0..r).map(|i| assemble(&e_blocks, i, true)).collect();
        let f: Vec<_> = (0..r).map(|i| assemble(&f_blocks, i, false)).collect();
        let h: Vec<_> = (0..r)
            .map(|i| SparseMatrix::from_triplets(n, n, weights.iter().enumerate().map(|(k, w)| (k, k, q(w.0[i])))))
            .collect();

        let mut rep = Representation {
            algebra,
            highest_weight,
            weights,
            e,
            f,
            h,
            root_e: Vec::new(),
            root_f: Vec::new(),
        };
        rep.build_root_vectors()?;
        Ok(rep)
    }

    /// `E_β = [E_i, E_γ]`, `F_β = [F_γ, F_i]` for β = γ + α_i with minimal
    /// `i`, then `F_β` is rescaled so that `[E_β, F_β] = H_{β^∨}`. The
    /// recipe only uses brackets of generators, so the resulting elements of
    /// 𝔤 do not depend on the module.
    fn build_root_vectors(&mut self) -> Result<()> {
        let alg = self.algebra.clone();
        let r = alg.rank();
        let roots = alg.positive_roots_simple();
        let mut root_e: Vec<SparseMatrix<Q>> = Vec::with_capacity(roots.len());
        let mut root_f: Vec<SparseMatrix<Q>> = Vec::with_capacity(roots.len());
        for (idx, beta) in roots.iter().enumerate() {
            let height: i64 = beta.iter().sum();
            if height == 1 {
                let i = beta.iter().position(|&c| c == 1).unwrap();
                root_e.push(self.e[i].clone());
                root_f.push(self.f[i].clone());
                continue;
            }
            let (i, gamma) = (0..r)
                .find_map(|i| {
                    let mut g = beta.clone();
                    g[i] -= 1;
                    alg.index_of_root(&g).map(|gi| (i, gi))
                })
                .expect("every non-simple positive root has a simple predecessor");
            let eb = self.e[i].commutator(&root_e[gamma]);
            let fb = root_f[gamma].commutator(&self.f[i]);
            let coroot = alg
                .coroot_coefficients(idx)
                .iter()
                .zip(&self.h)
                .fold(SparseMatrix::zeros(self.dim(), self.dim()), |acc, (m, h)| {
                    acc.add(&h.scale(m))
                });
            let bracket = eb.commutator(&fb);
            let fb = if coroot.is_zero() {
                fb
            } else {
                let k = (0..self.dim()).find(|&k| !coroot.get(k, k).is_zero()).unwrap();
                let c = bracket.get(k, k) / coroot.get(k, k);
                if c.is_zero() || bracket != coroot.scale(&c) {
                    return Err(Error::IdentityFailure(format!(
                        "[E_β, F_β] is not proportional to H_β∨ for root {:?}",
                        beta
                    )));
                }
                fb.scale(&(Q::one() / c))
            };
            root_e.push(eb);
            root_f.push(fb);
        }
        self.root_e = root_e;
        self.root_f = root_f;
        Ok(())
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn highest_weight(&self) -> &Weight {
        &self.highest_weight
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn basis_weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn e(&self, i: usize) -> &SparseMatrix<Q> {
        &self.e[i]
    }

    pub fn f(&self, i: usize) -> &SparseMatrix<Q> {
        &self.f[i]
    }

    pub fn h(&self, i: usize) -> &SparseMatrix<Q> {
        &self.h[i]
    }

    pub fn root_e(&self, idx: usize) -> &SparseMatrix<Q> {
        &self.root_e[idx]
    }

    pub fn root_f(&self, idx: usize) -> &SparseMatrix<Q> {
        &self.root_f[idx]
    }

    /// Raising operator of the highest root θ.
    pub fn theta_e(&self) -> &SparseMatrix<Q> {
        self.root_e.last().expect("at least one root")
    }

    pub fn element(&self, x: LieElement) -> &SparseMatrix<Q> {
        match x {
            LieElement::RootE(i) => &self.root_e[i],
            LieElement::RootF(i) => &self.root_f[i],
            LieElement::Cartan(a) => &self.h[a],
        }
    }

    /// The Casimir operator Σ x_a x^a on this module.
    pub fn casimir_matrix(&self) -> SparseMatrix<Q> {
        casimir_dual_pairs(&self.algebra)
            .into_iter()
            .fold(SparseMatrix::zeros(self.dim(), self.dim()), |acc, (c, x, y)| {
                acc.add(&self.element(x).mul(self.element(y)).scale(&c))
            })
    }

    /// Casimir matrix equals ⟨λ, λ+2ρ⟩ times the identity.
    pub fn check_casimir(&self) -> Result<()> {
        let c = self.algebra.casimir_scalar(&self.highest_weight)?;
        let diff = self.casimir_matrix().sub(&SparseMatrix::identity(self.dim()).scale(&c));
        if !diff.is_zero() {
            return Err(Error::IdentityFailure(format!(
                "Casimir of V{} is not {c}·1 (max deviation {})",
                self.highest_weight,
                diff.max_abs()
            )));
        }
        Ok(())
    }

    /// Chevalley and Serre relations, exactly.
    pub fn check_relations(&self) -> Result<()> {
        let a = self.algebra.cartan();
        let r = self.algebra.rank();
        let fail = |what: String| Err(Error::IdentityFailure(format!("V{}: {what}", self.highest_weight)));
        for i in 0..r {
            for j in 0..r {
                let aji = q(a[j][i]);
                if self.h[i].commutator(&self.e[j]) != self.e[j].scale(&aji) {
                    return fail(format!("[h{i}, e{j}] != A{j}{i} e{j}"));
                }
                if self.h[i].commutator(&self.f[j]) != self.f[j].scale(&-aji) {
                    return fail(format!("[h{i}, f{j}] != -A{j}{i} f{j}"));
                }
                let ef = self.e[i].commutator(&self.f[j]);
                let ok = if i == j { ef == self.h[i] } else { ef.is_zero() };
                if !ok {
                    return fail(format!("[e{i}, f{j}] != δ h"));
                }
                if !self.h[i].commutator(&self.h[j]).is_zero() {
                    return fail(format!("[h{i}, h{j}] != 0"));
                }
                if i != j {
                    let power = (1 - a[j][i]) as usize;
                    let mut xe = self.e[j].clone();
                    let mut xf = self.f[j].clone();
                    for _ in 0..power {
                        xe = self.e[i].commutator(&xe);
                        xf = self.f[i].commutator(&xf);
                    }
                    if !xe.is_zero() || !xf.is_zero() {
                        return fail(format!("Serre relation (ad {i})^{power} on {j}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Hash of the basis ordering (weights in order), hex encoded.
    pub fn basis_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.algebra.label().as_bytes());
        for w in &self.weights {
            hasher.update(w.to_string().as_bytes());
            hasher.update(b";");
        }
        hex::encode(hasher.finalize())
    }

    pub fn to_document(&self) -> RepresentationDocument {
        let mut matrices = Vec::new();
        for i in 0..self.algebra.rank() {
            matrices.push(MatrixDocument::new(format!("e{}", i + 1), &self.e[i]));
            matrices.push(MatrixDocument::new(format!("f{}", i + 1), &self.f[i]));
            matrices.push(MatrixDocument::new(format!("h{}", i + 1), &self.h[i]));
        }
        RepresentationDocument {
            header: ExportHeader {
                algebra: AlgebraLabel {
                    series: self.algebra.series(),
                    rank: self.algebra.rank(),
                },
                weights: vec![self.highest_weight.clone()],
                dimension: self.dim(),
                basis_weights: self.weights.clone(),
                basis_hash: self.basis_hash(),
            },
            matrices,
        }
    }
}

/// Basis elements of 𝔤 used to write the Casimir element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LieElement {
    RootE(usize),
    RootF(usize),
    Cartan(usize),
}

/// Terms `(c, x, y)` with Ω = Σ c·x⊗y, from dual bases of the normalized
/// form: `(⟨β,β⟩/2)(E_β⊗F_β + F_β⊗E_β)` on root spaces (since
/// `⟨E_β,F_β⟩ = 2/⟨β,β⟩` when `[E_β,F_β] = H_{β^∨}`) and `(K⁻¹)_{ab} H_a⊗H_b`
/// with `K_{ab} = ⟨α_a^∨, α_b^∨⟩` on the Cartan subalgebra.
pub fn casimir_dual_pairs(alg: &LieAlgebra) -> Vec<(Q, LieElement, LieElement)> {
    let mut terms = Vec::new();
    for idx in 0..alg.positive_roots().len() {
        let c = alg.root_norm(idx) / q(2);
        terms.push((c.clone(), LieElement::RootE(idx), LieElement::RootF(idx)));
        terms.push((c, LieElement::RootF(idx), LieElement::RootE(idx)));
    }
    for (a, row) in alg.coroot_gram_inverse().iter().enumerate() {
        for (b, c) in row.iter().enumerate() {
            if !c.is_zero() {
                terms.push((c.clone(), LieElement::Cartan(a), LieElement::Cartan(b)));
            }
        }
    }
    terms
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraLabel {
    pub series: Series,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportHeader {
    pub algebra: AlgebraLabel,
    /// highest weights of the factors
    pub weights: Vec<Weight>,
    pub dimension: usize,
    pub basis_weights: Vec<Weight>,
    pub basis_hash: String,
}

/// Sparse exact matrix as `(row, col, numerator, denominator)` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, String, String)>,
}

impl MatrixDocument {
    pub fn new(name: impl Into<String>, m: &SparseMatrix<Q>) -> Self {
        MatrixDocument {
            name: name.into(),
            rows: m.nrows(),
            cols: m.ncols(),
            entries: m
                .triplets()
                .map(|(r, c, v)| (r, c, v.numer().to_string(), v.denom().to_string()))
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<SparseMatrix<Q>> {
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|e| Error::InvalidArgument(format!("bad integer {s:?}: {e}")))
        };
        let mut trip = Vec::with_capacity(self.entries.len());
        for (r, c, n, d) in &self.entries {
            let d = parse(d)?;
            if d.is_zero() || *r >= self.rows || *c >= self.cols {
                return Err(Error::InvalidArgument(format!("bad entry ({r}, {c})")));
            }
            trip.push((*r, *c, Q::new(parse(n)?, d)));
        }
        Ok(SparseMatrix::from_triplets(self.rows, self.cols, trip))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationDocument {
    pub header: ExportHeader,
    pub matrices: Vec<MatrixDocument>,
}

/// Weight multiplicities of a representation, as a sorted map.
pub fn weight_multiplicities(rep: &Representation) -> std::collections::BTreeMap<Weight, usize> {
    let mut m = std::collections::BTreeMap::new();
    for w in rep.basis_weights() {
        *m.entry(w.clone()).or_insert(0) += 1;
    }
    m
}
