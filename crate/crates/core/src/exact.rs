//! Exact scalars and sparse matrices.
//!
//! Everything algebraic in the crate is computed over [`Q`] (arbitrary
//! precision rationals) or, once complex marked points enter, over [`CQ`]
//! (Gaussian rationals). Finite `f64` values are dyadic rationals, so user
//! supplied coordinates convert into [`CQ`] without rounding.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;
pub type CQ = Complex<BigRational>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn q_to_f64(x: &Q) -> f64 {
    // numer/denom may individually overflow f64 while the ratio does not
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = x.denom().bits().max(x.numer().bits()).saturating_sub(900);
            let n = (x.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (x.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Exact conversion of a finite double into a rational.
pub fn q_from_f64(x: f64) -> Result<Q> {
    Q::from_float(x).ok_or_else(|| Error::InvalidArgument(format!("non-finite coordinate {x}")))
}

pub fn cq_from_c64(z: Complex64) -> Result<CQ> {
    Ok(CQ::new(q_from_f64(z.re)?, q_from_f64(z.im)?))
}

/// Field elements with integral structure, as needed by fraction-free
/// elimination: denominators can be cleared by a rational integer and the
/// integer content of an integral element can be divided out.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Least common multiple of the denominators of all rational components.
    fn denom_lcm(&self) -> BigInt;
    /// Gcd of `acc` with the numerators of all rational components.
    fn content_gcd(&self, acc: BigInt) -> BigInt;
    fn scale_int(&self, m: &BigInt) -> Self;
    fn div_int(&self, m: &BigInt) -> Self;
    /// Bit length of the representation; used for pivot selection.
    fn size(&self) -> u64;
    /// A factor making `self` rational, when it is not already.
    fn rationalizer(&self) -> Option<Self>;
    fn to_c64(&self) -> Complex64;
}

impl Scalar for Q {
    fn denom_lcm(&self) -> BigInt {
        self.denom().clone()
    }
    fn content_gcd(&self, acc: BigInt) -> BigInt {
        acc.gcd(self.numer())
    }
    fn scale_int(&self, m: &BigInt) -> Self {
        self * Q::from_integer(m.clone())
    }
    fn div_int(&self, m: &BigInt) -> Self {
        self / Q::from_integer(m.clone())
    }
    fn size(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }
    fn rationalizer(&self) -> Option<Self> {
        None
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(q_to_f64(self), 0.0)
    }
}

impl Scalar for CQ {
    fn denom_lcm(&self) -> BigInt {
        self.re.denom().lcm(self.im.denom())
    }
    fn content_gcd(&self, acc: BigInt) -> BigInt {
        acc.gcd(self.re.numer()).gcd(self.im.numer())
    }
    fn scale_int(&self, m: &BigInt) -> Self {
        let m = Q::from_integer(m.clone());
        CQ::new(&self.re * &m, &self.im * &m)
    }
    fn div_int(&self, m: &BigInt) -> Self {
        let m = Q::from_integer(m.clone());
        CQ::new(&self.re / &m, &self.im / &m)
    }
    fn size(&self) -> u64 {
        self.re.size() + self.im.size()
    }
    fn rationalizer(&self) -> Option<Self> {
        (!self.im.is_zero()).then(|| self.conj())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }
}

pub fn q_to_cq(x: &Q) -> CQ {
    CQ::new(x.clone(), Q::zero())
}

/// Row-major sparse matrix; each row keeps `(column, value)` pairs sorted by
/// column with no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            data: (0..n).map(|i| vec![(i, T::one())]).collect(),
        }
    }

    /// Builds a matrix from triplets; duplicate positions are summed.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut acc: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); rows];
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) out of bounds");
            let slot = acc[r].entry(c).or_insert_with(T::zero);
            *slot = slot.clone() + v;
        }
        let data = acc
            .into_iter()
            .map(|row| row.into_iter().filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        Self { rows, cols, data }
    }

    /// Builds a matrix from sorted sparse rows. Zeros are dropped.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, T)>>) -> Self {
        let data = rows
            .into_iter()
            .map(|r| {
                debug_assert!(r.windows(2).all(|w| w[0].0 < w[1].0));
                r.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect::<Vec<_>>();
        Self {
            rows: data.len(),
            cols,
            data,
        }
    }

    /// Builds a matrix whose columns are the given sparse vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<(usize, T)>]) -> Self {
        let triplets = columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(r, v)| (*r, c, v.clone())));
        Self::from_triplets(rows, columns.len(), triplets)
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(c, v)| (c, v.clone()))
                    .collect()
            })
            .collect();
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub fn row(&self, r: usize) -> &[(usize, T)] {
        &self.data[r]
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        match self.data[r].binary_search_by_key(&c, |(k, _)| *k) {
            Ok(pos) => self.data[r][pos].1.clone(),
            Err(_) => T::zero(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, *c, v)))
    }

    pub fn column(&self, c: usize) -> Vec<(usize, T)> {
        self.data
            .iter()
            .enumerate()
            .filter_map(|(r, row)| {
                row.binary_search_by_key(&c, |(k, _)| *k)
                    .ok()
                    .map(|pos| (r, row[pos].1.clone()))
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.cols];
        for (r, row) in self.data.iter().enumerate() {
            for (c, v) in row {
                data[*c].push((r, v.clone()));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SparseMatrix<U> {
        SparseMatrix::from_rows(
            self.cols,
            self.data
                .iter()
                .map(|row| row.iter().map(|(c, v)| (*c, f(v))).collect())
                .collect(),
        )
    }

    pub fn scale(&self, s: &T) -> Self {
        if s.is_zero() {
            return Self::zeros(self.rows, self.cols);
        }
        self.map(|v| v.clone() * s.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -T::one())
    }

    /// `self + s * other`
    pub fn combine(&self, other: &Self, s: T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| merge_rows(a, b, &T::one(), &s))
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let data = self
            .data
            .iter()
            .map(|row| {
                let mut acc: BTreeMap<usize, T> = BTreeMap::new();
                for (k, a) in row {
                    for (c, b) in &other.data[*k] {
                        let slot = acc.entry(*c).or_insert_with(T::zero);
                        *slot = slot.clone() + a.clone() * b.clone();
                    }
                }
                acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        Self {
            rows: self.rows,
            cols: other.cols,
            data,
        }
    }

    /// `[self, other] = self·other − other·self`
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        self.data
            .iter()
            .map(|row| {
                row.iter()
                    .fold(T::zero(), |acc, (c, a)| acc + a.clone() * v[*c].clone())
            })
            .collect()
    }

    /// Sparse column vector times matrix from the left: `vᵀ·self`.
    pub fn left_mul_sparse(&self, v: &[(usize, T)]) -> Vec<(usize, T)> {
        let mut acc: BTreeMap<usize, T> = BTreeMap::new();
        for (r, a) in v {
            for (c, b) in &self.data[*r] {
                let slot = acc.entry(*c).or_insert_with(T::zero);
                *slot = slot.clone() + a.clone() * b.clone();
            }
        }
        acc.into_iter().filter(|(_, x)| !x.is_zero()).collect()
    }

    /// Matrix times a sparse column vector.
    pub fn mul_sparse(&self, v: &[(usize, T)]) -> Vec<(usize, T)> {
        let dense: BTreeMap<usize, &T> = v.iter().map(|(i, x)| (*i, x)).collect();
        self.data
            .iter()
            .enumerate()
            .filter_map(|(r, row)| {
                let s = row.iter().fold(T::zero(), |acc, (c, a)| match dense.get(c) {
                    Some(x) => acc + a.clone() * (*x).clone(),
                    None => acc,
                });
                (!s.is_zero()).then_some((r, s))
            })
            .collect()
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            rows: rows.len(),
            cols: self.cols,
            data: rows.iter().map(|r| self.data[*r].clone()).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v.clone();
        }
        out
    }

    pub fn to_c64(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v.to_c64();
        }
        m
    }

    /// Kronecker product; index `(a, b)` maps to `a·other.rows + b`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = Vec::with_capacity(rows);
        for ra in &self.data {
            for rb in &other.data {
                let mut row = Vec::with_capacity(ra.len() * rb.len());
                for (ca, va) in ra {
                    for (cb, vb) in rb {
                        row.push((ca * other.cols + cb, va.clone() * vb.clone()));
                    }
                }
                data.push(row);
            }
        }
        Self { rows, cols, data }
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }
}

impl SparseMatrix<Q> {
    /// Largest absolute entry; zero for the zero matrix.
    pub fn max_abs(&self) -> Q {
        self.triplets().map(|(_, _, v)| v.abs()).max().unwrap_or_else(Q::zero)
    }

    pub fn to_cq(&self) -> SparseMatrix<CQ> {
        self.map(q_to_cq)
    }
}

/// `sa·a + sb·b` for sorted sparse rows.
pub(crate) fn merge_rows<T: Scalar>(a: &[(usize, T)], b: &[(usize, T)], sa: &T, sb: &T) -> Vec<(usize, T)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (col, val) = match (a.get(i), b.get(j)) {
            (Some((ca, va)), Some((cb, _))) if ca < cb => {
                i += 1;
                (*ca, sa.clone() * va.clone())
            }
            (Some((ca, _)), Some((cb, vb))) if cb < ca => {
                j += 1;
                (*cb, sb.clone() * vb.clone())
            }
            (Some((ca, va)), Some((_, vb))) => {
                i += 1;
                j += 1;
                (*ca, sa.clone() * va.clone() + sb.clone() * vb.clone())
            }
            (Some((ca, va)), None) => {
                i += 1;
                (*ca, sa.clone() * va.clone())
            }
            (None, Some((cb, vb))) => {
                j += 1;
                (*cb, sb.clone() * vb.clone())
            }
            (None, None) => unreachable!(),
        };
        if !val.is_zero() {
            out.push((col, val));
        }
    }
    out
}
