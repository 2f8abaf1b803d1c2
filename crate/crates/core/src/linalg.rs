//! Exact linear algebra by fraction-free Gauss–Jordan elimination on sparse
//! rows.
//!
//! Rows are first scaled to integral entries. Elimination uses
//! `r ← p·r − a·pivot` (no division) followed by removal of the integer content
//! of `r`, which keeps entries small without ever leaving the integral
//! subring. Only the final normalization divides by pivots. Over the Gaussian
//! rationals a row is first multiplied by the conjugate of its leading entry;
//! otherwise non-rational common factors would accumulate step after step.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::exact::{merge_rows, Scalar, SparseMatrix};

pub type SparseVec<T> = Vec<(usize, T)>;

/// Reduced row echelon form: pivot entries are one and pivot columns are
/// zero in every other row.
#[derive(Debug, Clone)]
pub struct Rref<T> {
    pub ncols: usize,
    pub pivots: Vec<usize>,
    pub rows: Vec<SparseVec<T>>,
}

fn make_integral<T: Scalar>(row: SparseVec<T>) -> SparseVec<T> {
    let lcm = row
        .iter()
        .fold(BigInt::one(), |acc, (_, v)| num_integer::lcm(acc, v.denom_lcm()));
    let row: SparseVec<T> = if lcm.is_one() {
        row
    } else {
        row.into_iter().map(|(c, v)| (c, v.scale_int(&lcm))).collect()
    };
    remove_content(row)
}

fn remove_content<T: Scalar>(row: SparseVec<T>) -> SparseVec<T> {
    let row = match row.first().and_then(|(_, v)| v.rationalizer()) {
        Some(f) => row.into_iter().map(|(c, v)| (c, v * f.clone())).collect(),
        None => row,
    };
    let g = row.iter().fold(BigInt::zero(), |acc, (_, v)| v.content_gcd(acc));
    if g.is_zero() || g.is_one() {
        return row;
    }
    row.into_iter().map(|(c, v)| (c, v.div_int(&g))).collect()
}

fn row_cost<T: Scalar>(row: &SparseVec<T>) -> (usize, u64) {
    (row.len(), row.iter().map(|(_, v)| v.size()).sum())
}

/// `p·row − a·pivot` where `a` is the entry of `row` in the pivot column.
fn eliminate<T: Scalar>(row: &SparseVec<T>, pivot: &SparseVec<T>, col: usize) -> SparseVec<T> {
    let a = match row.binary_search_by_key(&col, |(c, _)| *c) {
        Ok(pos) => row[pos].1.clone(),
        Err(_) => return row.clone(),
    };
    let p = pivot[0].1.clone();
    remove_content(merge_rows(row, pivot, &p, &(-a)))
}

pub fn rref<T: Scalar>(rows: Vec<SparseVec<T>>, ncols: usize) -> Rref<T> {
    let mut pool: Vec<SparseVec<T>> = rows.into_iter().filter(|r| !r.is_empty()).map(make_integral).collect();
    let mut pivot_rows: Vec<SparseVec<T>> = Vec::new();
    let mut pivots = Vec::new();

    for col in 0..ncols {
        if pool.is_empty() {
            break;
        }
        // every pooled row is zero left of `col`
        let best = pool
            .iter()
            .enumerate()
            .filter(|(_, r)| r[0].0 == col)
            .min_by_key(|(_, r)| row_cost(r))
            .map(|(i, _)| i);
        let Some(best) = best else { continue };
        let pivot = pool.swap_remove(best);
        pool = pool
            .iter()
            .map(|r| eliminate(r, &pivot, col))
            .filter(|r| !r.is_empty())
            .collect();
        for r in pivot_rows.iter_mut() {
            *r = eliminate(r, &pivot, col);
        }
        pivot_rows.push(pivot);
        pivots.push(col);
    }

    let rows = pivot_rows
        .into_iter()
        .map(|r| {
            let p = r[0].1.clone();
            r.into_iter().map(|(c, v)| (c, v / p.clone())).collect()
        })
        .collect();
    Rref { ncols, pivots, rows }
}

impl<T: Scalar> Rref<T> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.ncols];
        for p in &self.pivots {
            is_pivot[*p] = true;
        }
        (0..self.ncols).filter(|c| !is_pivot[*c]).collect()
    }

    /// Entry of the reduced matrix at `(r, c)`.
    pub fn entry(&self, r: usize, c: usize) -> T {
        match self.rows[r].binary_search_by_key(&c, |(k, _)| *k) {
            Ok(pos) => self.rows[r][pos].1.clone(),
            Err(_) => T::zero(),
        }
    }
}

/// Nullspace basis in reduced form: basis vector `k` has a one at
/// `free[k]` and zeros at every other free position.
#[derive(Debug, Clone)]
pub struct Nullspace<T> {
    pub dim: usize,
    pub basis: Vec<SparseVec<T>>,
    pub free: Vec<usize>,
}

pub fn nullspace<T: Scalar>(rows: Vec<SparseVec<T>>, ncols: usize) -> Nullspace<T> {
    nullspace_from_rref(&rref(rows, ncols))
}

pub fn nullspace_from_rref<T: Scalar>(red: &Rref<T>) -> Nullspace<T> {
    let free = red.free_columns();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v: SparseVec<T> = red
                .rows
                .iter()
                .zip(&red.pivots)
                .filter_map(|(row, &p)| {
                    let e = match row.binary_search_by_key(&f, |(c, _)| *c) {
                        Ok(pos) => row[pos].1.clone(),
                        Err(_) => return None,
                    };
                    Some((p, -e))
                })
                .collect();
            v.push((f, T::one()));
            v.sort_by_key(|(c, _)| *c);
            v
        })
        .collect::<Vec<_>>();
    Nullspace {
        dim: basis.len(),
        basis,
        free,
    }
}

/// Greedy maximal independent subset of the given columns (earliest first)
/// and the coordinates of every column in terms of that subset.
pub fn column_relations<T: Scalar>(columns: &[SparseVec<T>], dim: usize) -> (Vec<usize>, Vec<Vec<T>>) {
    let m = SparseMatrix::from_columns(dim, columns);
    let rows = (0..m.nrows()).map(|r| m.row(r).to_vec()).collect();
    let red = rref(rows, columns.len());
    let coords = (0..columns.len())
        .map(|j| (0..red.rank()).map(|r| red.entry(r, j)).collect())
        .collect();
    (red.pivots, coords)
}

pub fn rank<T: Scalar>(m: &SparseMatrix<T>) -> usize {
    let rows = (0..m.nrows()).map(|r| m.row(r).to_vec()).collect();
    rref(rows, m.ncols()).rank()
}

/// Inverse of a square matrix, `None` when singular.
pub fn inverse<T: Scalar>(m: &SparseMatrix<T>) -> Option<SparseMatrix<T>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let rows = (0..n)
        .map(|r| {
            let mut row = m.row(r).to_vec();
            row.push((n + r, T::one()));
            row
        })
        .collect();
    let red = rref(rows, 2 * n);
    if red.rank() < n || red.pivots[n - 1] >= n {
        return None;
    }
    let inv_rows = red
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .filter(|(c, _)| *c >= n)
                .map(|(c, v)| (c - n, v.clone()))
                .collect()
        })
        .collect();
    Some(SparseMatrix::from_rows(n, inv_rows))
}

/// Solves `m·x = b`; `None` when inconsistent. Free variables are set to zero.
pub fn solve<T: Scalar>(m: &SparseMatrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = m.ncols();
    let rows = (0..m.nrows())
        .map(|r| {
            let mut row = m.row(r).to_vec();
            if !b[r].is_zero() {
                row.push((n, b[r].clone()));
            }
            row
        })
        .collect();
    let red = rref(rows, n + 1);
    if red.pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![T::zero(); n];
    for (row, &p) in red.rows.iter().zip(&red.pivots) {
        if let Ok(pos) = row.binary_search_by_key(&n, |(c, _)| *c) {
            x[p] = row[pos].1.clone();
        }
    }
    Some(x)
}
