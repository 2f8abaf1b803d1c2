//! Conformal blocks at a configuration of marked points.
//!
//! Let `E(z) = Σᵢ zᵢ e_θ⁽ⁱ⁾`. The covacua are the invariant linear forms `φ`
//! on `V_λ⃗` with `φ ∘ E(z)^{k+1} = 0`. Computation, exact over Gaussian
//! rationals:
//!
//! 1. `Ψ`: a basis of invariant forms, the joint kernel of the transposed
//!    generators on zero-weight coordinates;
//! 2. `c ∈ ker (Ψᵀ E(z)^{k+1})ᵀ` picks out the covacua `φ = Ψc`;
//! 3. restricted to invariant vectors `x = Bξ`, these forms read
//!    `ξ ↦ (ΨᵀB)ᵀc · ξ`. The columns of `Φ = (ΨᵀB)ᵀ C` are the block forms in
//!    invariant coordinates.
//!
//! The block bundle is the quotient of the invariants by the common kernel
//! `Y = ker Φᵀ`. KZ transport preserves `Y`, so it acts on the quotient; an
//! operator `S` on invariants acts on block coordinates `Φᵀξ` by the matrix
//! `M` with `ΦᵀS = MΦᵀ`. [`BlockSpace::block_basis`] is the complement of `Y`
//! orthogonal for the standard Hermitian product on invariant coordinates,
//! normalized so that `Φᵀ W = 1`; then `M = Φᵀ S W`.
//!
//! A marked point at infinity is moved to the origin of the chart
//! `w = 1/(z − a)` with `a` an integer to the right of every finite point.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{cq_from_c64, q, q_to_cq, Scalar, SparseMatrix, CQ};
use crate::fusion::FusionRing;
use crate::linalg::{self, SparseVec};
use crate::rep::ExportHeader;
use crate::tensor::TensorSystem;

/// A marked point on the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

#[derive(Debug, Clone)]
pub struct BlockSpace {
    system: Arc<TensorSystem>,
    level: i64,
    input: Vec<Point>,
    /// chart coordinates, all finite
    points: Vec<CQ>,
    chart_center: Option<i64>,
    /// d × b; the covacua in invariant coordinates
    forms: SparseMatrix<CQ>,
    /// d × b; Φᵀ W = 1
    block_basis: SparseMatrix<CQ>,
}

/// Coordinates with all points finite: the identity chart, or
/// `w = 1/(z − a)` when one point is at infinity.
fn chart(points: &[Point]) -> Result<(Vec<CQ>, Option<i64>)> {
    let n_inf = points.iter().filter(|p| matches!(p, Point::Infinity)).count();
    if n_inf > 1 {
        let slots: Vec<usize> = (0..points.len()).filter(|&i| points[i] == Point::Infinity).collect();
        return Err(Error::CoincidentPoints {
            i: slots[0],
            j: slots[1],
        });
    }
    let finite = |p: &Point| match p {
        Point::Finite(z) => Some(*z),
        Point::Infinity => None,
    };
    for p in points.iter().filter_map(finite) {
        if !p.re.is_finite() || !p.im.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite point {p}")));
        }
    }
    if n_inf == 0 {
        let pts = points
            .iter()
            .filter_map(finite)
            .map(cq_from_c64)
            .collect::<Result<_>>()?;
        return Ok((pts, None));
    }
    let a = points
        .iter()
        .filter_map(finite)
        .map(|z| z.re.abs() + 1.0)
        .fold(1.0f64, f64::max)
        .ceil() as i64;
    let shift = q_to_cq(&q(a));
    let pts = points
        .iter()
        .map(|p| match p {
            Point::Infinity => Ok(CQ::zero()),
            Point::Finite(z) => Ok(CQ::one() / (cq_from_c64(*z)? - shift.clone())),
        })
        .collect::<Result<_>>()?;
    Ok((pts, Some(a)))
}

pub(crate) fn check_distinct(points: &[CQ]) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(Error::CoincidentPoints { i, j });
            }
        }
    }
    Ok(())
}

fn rows_of<T: Scalar>(m: &SparseMatrix<T>) -> Vec<SparseVec<T>> {
    (0..m.nrows()).map(|r| m.row(r).to_vec()).collect()
}

impl BlockSpace {
    pub fn new(system: Arc<TensorSystem>, ring: &FusionRing, points: &[Point]) -> Result<Self> {
        let n = system.n();
        if points.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: points.len(),
            });
        }
        let level = ring.level();
        for w in system.weights() {
            if !system.algebra().is_admissible(&w, level)? {
                return Err(Error::NotAdmissible {
                    weight: w.to_string(),
                    level,
                });
            }
        }
        let fusion = ring.block_dim(&system.weights())? as usize;
        let (chart_points, chart_center) = chart(points)?;
        check_distinct(&chart_points)?;

        let (forms, block_basis) = covacua(&system, level, &chart_points)?;
        if forms.ncols() != fusion {
            return Err(Error::BlockDimensionMismatch {
                subspace: forms.ncols(),
                fusion,
            });
        }
        Ok(BlockSpace {
            system,
            level,
            input: points.to_vec(),
            points: chart_points,
            chart_center,
            forms,
            block_basis,
        })
    }

    pub fn system(&self) -> &Arc<TensorSystem> {
        &self.system
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.forms.ncols()
    }

    pub fn input_points(&self) -> &[Point] {
        &self.input
    }

    /// Points in the working chart (all finite).
    pub fn points(&self) -> Vec<Complex64> {
        self.points.iter().map(Scalar::to_c64).collect()
    }

    pub fn exact_points(&self) -> &[CQ] {
        &self.points
    }

    /// `a` in the chart `w = 1/(z − a)`, when a point is at infinity.
    pub fn chart_center(&self) -> Option<i64> {
        self.chart_center
    }

    pub fn forms(&self) -> &SparseMatrix<CQ> {
        &self.forms
    }

    pub fn block_basis(&self) -> &SparseMatrix<CQ> {
        &self.block_basis
    }

    /// Block basis as vectors of the full tensor product.
    pub fn block_basis_full(&self) -> SparseMatrix<CQ> {
        self.system.invariant_basis().to_cq().mul(&self.block_basis)
    }

    /// Action on block coordinates of an operator `s` on invariants, and the
    /// relative residual `‖ΦᵀS − MΦᵀ‖/‖ΦᵀS‖` measuring how far `s` fails to
    /// preserve the common kernel of the covacua.
    pub fn project(&self, s: &DMatrix<Complex64>) -> (DMatrix<Complex64>, f64) {
        let phi_t = self.forms.to_c64().transpose();
        let w = self.block_basis.to_c64();
        let lhs = &phi_t * s;
        let m = &lhs * &w;
        let scale = lhs.norm();
        let res = (&lhs - &m * &phi_t).norm();
        (m, if scale > 0.0 { res / scale } else { res })
    }

    pub fn to_document(&self) -> BlockDocument {
        BlockDocument {
            header: self.system.header(),
            level: self.level,
            points: self
                .input
                .iter()
                .map(|p| match p {
                    Point::Finite(z) => Some([z.re, z.im]),
                    Point::Infinity => None,
                })
                .collect(),
            chart_center: self.chart_center,
            invariant_dim: self.system.invariant_dim(),
            dim: self.dim(),
            forms: ComplexMatrixDocument::new("forms", &self.forms),
            block_basis: ComplexMatrixDocument::new("block_basis", &self.block_basis),
        }
    }
}

fn covacua(system: &TensorSystem, level: i64, points: &[CQ]) -> Result<(SparseMatrix<CQ>, SparseMatrix<CQ>)> {
    let total = system.dim();
    let d = system.invariant_dim();
    if d == 0 {
        return Ok((SparseMatrix::zeros(0, 0), SparseMatrix::zeros(0, 0)));
    }
    let psi_t = system.invariant_forms()?;
    let e = (0..system.n()).fold(SparseMatrix::<CQ>::zeros(total, total), |acc, i| {
        let theta = system.embed_single(i, system.factors()[i].theta_e()).to_cq();
        acc.add(&theta.scale(&points[i]))
    });
    // Ψᵀ E^{k+1}
    let mut m = psi_t.to_cq();
    for _ in 0..=level {
        m = m.mul(&e);
    }
    let c = linalg::nullspace(rows_of(&m.transpose()), d);
    let g = psi_t.mul(system.invariant_basis()).to_cq();
    let cmat = SparseMatrix::from_columns(d, &c.basis);
    let phi = g.transpose().mul(&cmat);
    let b = phi.ncols();
    if b == 0 {
        return Ok((phi, SparseMatrix::zeros(d, 0)));
    }
    // W = Φ̄ (Φᵀ Φ̄)⁻¹
    let phi_bar = phi.map(|z| z.conj());
    let gram = phi.transpose().mul(&phi_bar);
    let inv =
        linalg::inverse(&gram).ok_or_else(|| Error::IdentityFailure("block forms are linearly dependent".into()))?;
    Ok((phi, phi_bar.mul(&inv)))
}

/// Exact complex matrix as `(row, col, re_num, re_den, im_num, im_den)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixDocument {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, String, String, String, String)>,
}

impl ComplexMatrixDocument {
    pub fn new(name: impl Into<String>, m: &SparseMatrix<CQ>) -> Self {
        ComplexMatrixDocument {
            name: name.into(),
            rows: m.nrows(),
            cols: m.ncols(),
            entries: m
                .triplets()
                .map(|(r, c, z)| {
                    (
                        r,
                        c,
                        z.re.numer().to_string(),
                        z.re.denom().to_string(),
                        z.im.numer().to_string(),
                        z.im.denom().to_string(),
                    )
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDocument {
    pub header: ExportHeader,
    pub level: i64,
    /// `[re, im]` per point; `null` marks the point at infinity
    pub points: Vec<Option<[f64; 2]>>,
    pub chart_center: Option<i64>,
    pub invariant_dim: usize,
    pub dim: usize,
    pub forms: ComplexMatrixDocument,
    pub block_basis: ComplexMatrixDocument,
}
