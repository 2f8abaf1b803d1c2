//! Sections of `O(m)` on the projective line as an sl₂-module.
//!
//! In the affine chart `w` of the flag variety, a section of the line bundle
//! of weight `mω₁` is a polynomial of degree at most `m`, and the Lie
//! algebra acts by first-order differential operators:
//!
//! ```text
//! e = −∂_w,   f = w²∂_w − m w,   h = m − 2w∂_w
//! ```
//!
//! so on monomials `e·wᵃ = −a wᵃ⁻¹`, `f·wᵃ = −(m−a) wᵃ⁺¹`,
//! `h·wᵃ = (m−2a) wᵃ`. The constant section is the highest weight vector.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{q, SparseMatrix, Q};
use crate::lie::Series;
use crate::linalg::{self, SparseVec};
use crate::rep::{casimir_dual_pairs, LieElement, MatrixDocument, Representation};
use crate::LieAlgebra;

#[derive(Debug, Clone)]
pub struct SectionSpace {
    m: usize,
    e: SparseMatrix<Q>,
    f: SparseMatrix<Q>,
    h: SparseMatrix<Q>,
}

/// The section space of `O(m)` with its induced action; basis `1, w, …, wᵐ`.
pub fn bbw_action(m: usize) -> SectionSpace {
    let d = m + 1;
    let mut e = Vec::new();
    let mut f = Vec::new();
    let mut h = Vec::new();
    for a in 0..d {
        let (ai, mi) = (a as i64, m as i64);
        if a > 0 {
            e.push((a - 1, a, q(-ai)));
        }
        if a < m {
            f.push((a + 1, a, q(-(mi - ai))));
        }
        if mi != 2 * ai {
            h.push((a, a, q(mi - 2 * ai)));
        }
    }
    SectionSpace {
        m,
        e: SparseMatrix::from_triplets(d, d, e),
        f: SparseMatrix::from_triplets(d, d, f),
        h: SparseMatrix::from_triplets(d, d, h),
    }
}

impl SectionSpace {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m + 1
    }

    pub fn e(&self) -> &SparseMatrix<Q> {
        &self.e
    }

    pub fn f(&self) -> &SparseMatrix<Q> {
        &self.f
    }

    pub fn h(&self) -> &SparseMatrix<Q> {
        &self.h
    }

    fn element(&self, x: LieElement) -> &SparseMatrix<Q> {
        match x {
            LieElement::RootE(_) => &self.e,
            LieElement::RootF(_) => &self.f,
            LieElement::Cartan(_) => &self.h,
        }
    }

    pub fn check_relations(&self) -> Result<()> {
        let ok = self.e.commutator(&self.f) == self.h
            && self.h.commutator(&self.e) == self.e.scale(&q(2))
            && self.h.commutator(&self.f) == self.f.scale(&q(-2));
        if !ok {
            return Err(Error::IdentityFailure(format!(
                "sl2 relations fail on sections of O({})",
                self.m
            )));
        }
        Ok(())
    }

    pub fn casimir_matrix(&self) -> SparseMatrix<Q> {
        let alg = LieAlgebra::new(Series::A, 1).expect("A1");
        casimir_dual_pairs(&alg)
            .into_iter()
            .fold(SparseMatrix::zeros(self.dim(), self.dim()), |acc, (c, x, y)| {
                acc.add(&self.element(x).mul(self.element(y)).scale(&c))
            })
    }

    pub fn h_eigenvalues(&self) -> Vec<i64> {
        (0..=self.m as i64).map(|a| self.m as i64 - 2 * a).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Intertwiner {
    /// `T` with `T·X_sections = X_rep·T`
    pub matrix: SparseMatrix<Q>,
    pub solution_dim: usize,
}

/// Solves `T·X_ss − X_rep·T = 0` for `X ∈ {e, f, h}`.
pub fn intertwiner(ss: &SectionSpace, rep: &Representation) -> Result<Intertwiner> {
    let alg = rep.algebra();
    if alg.series() != Series::A || alg.rank() != 1 {
        return Err(Error::NoIntertwiner(format!("{} is not A1", alg.label())));
    }
    let d = ss.dim();
    if rep.dim() != d {
        return Err(Error::NoIntertwiner(format!(
            "sections of O({}) have dimension {d}, V{} has {}",
            ss.m,
            rep.highest_weight(),
            rep.dim()
        )));
    }
    // unknown T[r][k] sits at r·d + k
    let mut rows: Vec<SparseVec<Q>> = Vec::new();
    for (xs, xr) in [(&ss.e, rep.e(0)), (&ss.f, rep.f(0)), (&ss.h, rep.h(0))] {
        let xs_cols = xs.transpose();
        for r in 0..d {
            for c in 0..d {
                let mut row: Vec<(usize, Q)> = Vec::new();
                for (k, v) in xs_cols.row(c) {
                    row.push((r * d + k, v.clone()));
                }
                for (k, v) in xr.row(r) {
                    row.push((k * d + c, -v.clone()));
                }
                let row = merge(row);
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }
    let null = linalg::nullspace(rows, d * d);
    if null.dim != 1 {
        return Err(Error::NoIntertwiner(format!(
            "intertwining solutions for O({}) form a space of dimension {}",
            ss.m, null.dim
        )));
    }
    let t = SparseMatrix::from_triplets(d, d, null.basis[0].iter().map(|(i, v)| (i / d, i % d, v.clone())));
    if linalg::inverse(&t).is_none() {
        return Err(Error::NoIntertwiner(format!("intertwiner for O({}) is singular", ss.m)));
    }
    for (xs, xr) in [(&ss.e, rep.e(0)), (&ss.f, rep.f(0)), (&ss.h, rep.h(0))] {
        if t.mul(xs) != xr.mul(&t) {
            return Err(Error::NoIntertwiner(format!(
                "solution for O({}) does not intertwine",
                ss.m
            )));
        }
    }
    Ok(Intertwiner {
        matrix: t,
        solution_dim: null.dim,
    })
}

fn merge(mut row: Vec<(usize, Q)>) -> Vec<(usize, Q)> {
    row.sort_by_key(|(i, _)| *i);
    let mut out: Vec<(usize, Q)> = Vec::with_capacity(row.len());
    for (i, v) in row {
        match out.last_mut() {
            Some((j, w)) if *j == i => *w += v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|(_, v)| !num_traits::Zero::is_zero(v));
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct BbwReport {
    pub m: usize,
    pub dimension: usize,
    pub solution_dim: usize,
    pub action: Vec<MatrixDocument>,
    pub intertwiner: MatrixDocument,
}

/// Builds the section space and its intertwiner with the abstract irrep.
pub fn bbw_check(alg: std::sync::Arc<LieAlgebra>, m: usize) -> Result<BbwReport> {
    let ss = bbw_action(m);
    ss.check_relations()?;
    let rep = Representation::new(alg, crate::Weight(vec![m as i64]))?;
    let t = intertwiner(&ss, &rep)?;
    Ok(BbwReport {
        m,
        dimension: ss.dim(),
        solution_dim: t.solution_dim,
        action: vec![
            MatrixDocument::new("e", &ss.e),
            MatrixDocument::new("f", &ss.f),
            MatrixDocument::new("h", &ss.h),
        ],
        intertwiner: MatrixDocument::new("T", &t.matrix),
    })
}
