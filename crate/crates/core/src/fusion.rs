//! Level-k fusion rules by the Kac–Walton algorithm.
//!
//! Weight multiplicities come from Freudenthal's formula, independently of
//! the module construction in [`crate::rep`]. The classical product is
//! decomposed by Brauer–Klimyk, and each classical summand is folded into the
//! fundamental alcove of the shifted level `k + h` by the affine Weyl group,
//! with signs.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{q, Q};
use crate::lie::{LieAlgebra, Weight};

/// Multiplicities of all weights of `V_λ` by Freudenthal's recursion
///
/// ```text
/// (|λ+ρ|² − |μ+ρ|²) m(μ) = 2 Σ_{α>0} Σ_{j≥1} m(μ+jα) ⟨μ+jα, α⟩,
/// ```
///
/// processed by depth below λ.
pub fn freudenthal_multiplicities(alg: &LieAlgebra, lambda: &Weight) -> Result<BTreeMap<Weight, u64>> {
    alg.pairing(lambda, lambda)?;
    if !lambda.is_dominant() {
        return Err(Error::NotDominant {
            weight: lambda.to_string(),
        });
    }
    let rho = alg.weyl_vector();
    let lr = lambda.add(rho);
    let top = alg.pairing(&lr, &lr)?;
    let roots = alg.positive_roots();
    let simple: Vec<Weight> = (0..alg.rank()).map(|i| alg.simple_root(i)).collect();

    let mut mult: HashMap<Weight, u64> = HashMap::new();
    mult.insert(lambda.clone(), 1);
    let mut layer = vec![lambda.clone()];
    while !layer.is_empty() {
        let mut candidates: Vec<Weight> = layer
            .iter()
            .flat_map(|w| simple.iter().map(move |a| w.sub(a)))
            .collect();
        candidates.sort();
        candidates.dedup();
        let mut next = Vec::new();
        for mu in candidates {
            let mr = mu.add(rho);
            let den = top.clone() - alg.pairing(&mr, &mr)?;
            if den <= Q::zero() {
                continue;
            }
            let mut rhs = Q::zero();
            for a in roots {
                let mut shifted = mu.add(a);
                while let Some(m) = mult.get(&shifted) {
                    rhs += q(*m as i64) * alg.pairing(&shifted, a)?;
                    shifted = shifted.add(a);
                }
            }
            let m = q(2) * rhs / den;
            if !m.is_integer() || m < Q::zero() {
                return Err(Error::IdentityFailure(format!(
                    "Freudenthal recursion produced multiplicity {m} at {mu}"
                )));
            }
            if !m.is_zero() {
                let m: u64 = m.to_integer().try_into().expect("multiplicity fits in u64");
                mult.insert(mu.clone(), m);
                next.push(mu);
            }
        }
        layer = next;
    }
    Ok(mult.into_iter().collect())
}

/// Classical decomposition `V_λ ⊗ V_μ = ⊕ c_ν V_ν` by Brauer–Klimyk.
pub fn classical_decomposition(alg: &LieAlgebra, lambda: &Weight, mu: &Weight) -> Result<BTreeMap<Weight, u64>> {
    let rho = alg.weyl_vector();
    let mut acc: BTreeMap<Weight, i64> = BTreeMap::new();
    for (nu, m) in freudenthal_multiplicities(alg, mu)? {
        let x = lambda.add(&nu).add(rho);
        let (dom, odd) = alg.dominant_conjugate(&x);
        if dom.0.contains(&0) {
            continue;
        }
        let sign = if odd { -1 } else { 1 };
        *acc.entry(dom.sub(rho)).or_default() += sign * m as i64;
    }
    collect_nonnegative(acc)
}

fn collect_nonnegative(acc: BTreeMap<Weight, i64>) -> Result<BTreeMap<Weight, u64>> {
    acc.into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|(w, c)| {
            u64::try_from(c)
                .map(|c| (w.clone(), c))
                .map_err(|_| Error::IdentityFailure(format!("negative multiplicity {c} for {w}")))
        })
        .collect()
}

/// Level-k fusion coefficients `N_{λμ}^ν` on the admissible weights.
#[derive(Debug, Clone)]
pub struct FusionRing {
    algebra: Arc<LieAlgebra>,
    level: i64,
    weights: Vec<Weight>,
    index: HashMap<Weight, usize>,
    /// `table[a][b][c] = N_{w_a w_b}^{w_c}`
    table: Vec<Vec<Vec<u64>>>,
}

impl FusionRing {
    pub fn new(algebra: Arc<LieAlgebra>, level: i64) -> Result<Self> {
        if level < 1 {
            return Err(Error::InvalidLevel(level));
        }
        let weights = algebra.admissible_weights(level);
        let index: HashMap<Weight, usize> = weights.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let shifted = level + algebra.dual_coxeter();
        let comarks: Vec<i64> = (0..algebra.rank())
            .map(|i| {
                algebra
                    .pairing(&Weight::fundamental(algebra.rank(), i), algebra.highest_root())
                    .map(|c| c.to_integer().try_into().expect("small comark"))
            })
            .collect::<Result<_>>()?;
        let m = weights.len();
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).collect();
        let rows: Vec<Result<((usize, usize), Vec<u64>)>> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let mut acc: BTreeMap<Weight, i64> = BTreeMap::new();
                for (nu, c) in classical_decomposition(&algebra, &weights[a], &weights[b])? {
                    if let Some((w, sign)) = affine_fold(&algebra, &nu, shifted, &comarks) {
                        *acc.entry(w).or_default() += sign * c as i64;
                    }
                }
                let mut row = vec![0u64; m];
                for (w, c) in collect_nonnegative(acc)? {
                    let idx = *index
                        .get(&w)
                        .ok_or_else(|| Error::IdentityFailure(format!("fold produced inadmissible {w}")))?;
                    row[idx] = c;
                }
                Ok(((a, b), row))
            })
            .collect();
        let mut table = vec![vec![Vec::new(); m]; m];
        for r in rows {
            let ((a, b), row) = r?;
            table[b][a] = row.clone();
            table[a][b] = row;
        }
        Ok(FusionRing {
            algebra,
            level,
            weights,
            index,
            table,
        })
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    /// Admissible weights Λ_k in lexicographic order; the vacuum is first.
    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    fn idx(&self, w: &Weight) -> Result<usize> {
        self.index.get(w).copied().ok_or_else(|| Error::NotAdmissible {
            weight: w.to_string(),
            level: self.level,
        })
    }

    pub fn coefficient(&self, lambda: &Weight, mu: &Weight, nu: &Weight) -> Result<u64> {
        Ok(self.table[self.idx(lambda)?][self.idx(mu)?][self.idx(nu)?])
    }

    /// Ring axioms: commutativity, unit, associativity and duality
    /// `N_{λμ}^0 = δ_{μ,λ*}`.
    pub fn check(&self) -> Result<()> {
        let m = self.weights.len();
        let vac = 0;
        let fail = |what: String| Err(Error::IdentityFailure(format!("fusion ring: {what}")));
        for a in 0..m {
            let dual = self.idx(&self.algebra.dual_weight(&self.weights[a]))?;
            for b in 0..m {
                if self.table[a][b] != self.table[b][a] {
                    return fail(format!("N not symmetric at ({a},{b})"));
                }
                let unit = u64::from(a == b);
                if self.table[a][vac][b] != unit {
                    return fail(format!("vacuum is not a unit at ({a},{b})"));
                }
                if self.table[a][b][vac] != u64::from(b == dual) {
                    return fail(format!("duality fails at ({a},{b})"));
                }
            }
        }
        let bad = (0..m).into_par_iter().find_any(|&a| {
            (0..m).any(|b| {
                (0..m).any(|c| {
                    (0..m).any(|d| {
                        let left: u64 = (0..m).map(|e| self.table[a][b][e] * self.table[e][c][d]).sum();
                        let right: u64 = (0..m).map(|e| self.table[b][c][e] * self.table[a][e][d]).sum();
                        left != right
                    })
                })
            })
        });
        if let Some(a) = bad {
            return fail(format!("associativity fails with first factor {}", self.weights[a]));
        }
        Ok(())
    }

    fn multiply(&self, v: &[u64], b: usize) -> Vec<u64> {
        let m = self.weights.len();
        let mut out = vec![0; m];
        for (a, x) in v.iter().enumerate().filter(|(_, x)| **x != 0) {
            for (c, n) in self.table[a][b].iter().enumerate() {
                out[c] += x * n;
            }
        }
        out
    }

    /// Number of vacuum channels in `λ₁ ⊗ ⋯ ⊗ λ_n`, fusing left to right.
    pub fn block_dim_left(&self, weights: &[Weight]) -> Result<u64> {
        let idx: Vec<usize> = weights.iter().map(|w| self.idx(w)).collect::<Result<_>>()?;
        let Some((&first, rest)) = idx.split_first() else {
            return Ok(1);
        };
        let mut v = vec![0; self.weights.len()];
        v[first] = 1;
        for &b in rest {
            v = self.multiply(&v, b);
        }
        Ok(v[0])
    }

    /// Same count fusing right to left.
    pub fn block_dim_right(&self, weights: &[Weight]) -> Result<u64> {
        let rev: Vec<Weight> = weights.iter().rev().cloned().collect();
        self.block_dim_left(&rev)
    }

    /// Same count for the balanced bracketing `(λ₁…λ_m)(λ_{m+1}…λ_n)` via
    /// `Σ_ν N(first half → ν) N(second half → ν*)`.
    pub fn block_dim_split(&self, weights: &[Weight]) -> Result<u64> {
        if weights.len() < 2 {
            return self.block_dim_left(weights);
        }
        let half = weights.len() / 2;
        let channels = |ws: &[Weight]| -> Result<Vec<u64>> {
            let idx: Vec<usize> = ws.iter().map(|w| self.idx(w)).collect::<Result<_>>()?;
            let mut v = vec![0; self.weights.len()];
            v[idx[0]] = 1;
            for &b in &idx[1..] {
                v = self.multiply(&v, b);
            }
            Ok(v)
        };
        let left = channels(&weights[..half])?;
        let right = channels(&weights[half..])?;
        let mut total = 0;
        for (a, x) in left.iter().enumerate() {
            let dual = self.idx(&self.algebra.dual_weight(&self.weights[a]))?;
            total += x * right[dual];
        }
        Ok(total)
    }

    /// Dimension of the space of conformal blocks, checked across three
    /// association orders.
    pub fn block_dim(&self, weights: &[Weight]) -> Result<u64> {
        let l = self.block_dim_left(weights)?;
        let r = self.block_dim_right(weights)?;
        let s = self.block_dim_split(weights)?;
        if l != r || l != s {
            return Err(Error::IdentityFailure(format!(
                "block dimension depends on association order ({l}, {r}, {s})"
            )));
        }
        Ok(l)
    }

    /// Writes all nonzero coefficients as CSV with columns λ, μ, ν, N;
    /// weights are space separated Dynkin labels.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let label = |w: &Weight| w.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
        let mut wtr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        wtr.write_record(["lambda", "mu", "nu", "N"]).map_err(io)?;
        for (a, wa) in self.weights.iter().enumerate() {
            for (b, wb) in self.weights.iter().enumerate() {
                for (c, wc) in self.weights.iter().enumerate() {
                    let n = self.table[a][b][c];
                    if n != 0 {
                        wtr.write_record([label(wa), label(wb), label(wc), n.to_string()])
                            .map_err(io)?;
                    }
                }
            }
        }
        wtr.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

/// Moves `ν + ρ` into the open fundamental alcove at shifted level `kh`
/// using simple reflections and the affine reflection
/// `x ↦ x − (⟨x,θ⟩ − kh)θ`. Returns the folded weight minus ρ with the sign
/// of the Weyl element, or `None` on a wall.
fn affine_fold(alg: &LieAlgebra, nu: &Weight, kh: i64, comarks: &[i64]) -> Option<(Weight, i64)> {
    let theta = alg.highest_root();
    let mut x = nu.add(alg.weyl_vector());
    let mut sign = 1;
    loop {
        if let Some(i) = x.0.iter().position(|&c| c < 0) {
            x = alg.reflect(&x, i);
            sign = -sign;
            continue;
        }
        if x.0.contains(&0) {
            return None;
        }
        let level: i64 = x.0.iter().zip(comarks).map(|(a, b)| a * b).sum();
        if level == kh {
            return None;
        }
        if level < kh {
            return Some((x.sub(alg.weyl_vector()), sign));
        }
        x = x.sub(&theta.scale(level - kh));
        sign = -sign;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Series;
    use crate::rep::{weight_multiplicities, Representation};

    fn alg(s: Series, r: usize) -> Arc<LieAlgebra> {
        Arc::new(LieAlgebra::new(s, r).unwrap())
    }

    fn w(v: &[i64]) -> Weight {
        Weight(v.to_vec())
    }

    #[test]
    fn freudenthal_matches_constructed_modules() {
        for (s, r, hw) in [
            (Series::A, 2, vec![2, 1]),
            (Series::B, 2, vec![1, 1]),
            (Series::C, 3, vec![0, 1, 0]),
            (Series::G, 2, vec![1, 1]),
        ] {
            let a = alg(s, r);
            let rep = Representation::new(a.clone(), w(&hw)).unwrap();
            let fr = freudenthal_multiplicities(&a, &w(&hw)).unwrap();
            let built: BTreeMap<Weight, u64> = weight_multiplicities(&rep)
                .into_iter()
                .map(|(k, v)| (k, v as u64))
                .collect();
            assert_eq!(fr, built, "{s}{r} {hw:?}");
        }
    }

    #[test]
    fn classical_dimensions_add_up() {
        let a = alg(Series::G, 2);
        let d = |x: &Weight| a.weyl_dimension(x).unwrap();
        let (l, m) = (w(&[1, 0]), w(&[0, 1]));
        let dec = classical_decomposition(&a, &l, &m).unwrap();
        let total = dec
            .iter()
            .fold(num_bigint::BigInt::zero(), |acc, (nu, c)| acc + d(nu) * *c);
        assert_eq!(total, d(&l) * d(&m));
    }

    /// N_{ab}^c = 1 iff |a−b| ≤ c ≤ min(a+b, 2k−a−b) and a+b+c even.
    fn su2_rule(k: i64, a: i64, b: i64, c: i64) -> u64 {
        u64::from((a - b).abs() <= c && c <= (a + b).min(2 * k - a - b) && (a + b + c) % 2 == 0)
    }

    #[test]
    fn su2_fusion_rules() {
        for k in 1..=5 {
            let ring = FusionRing::new(alg(Series::A, 1), k).unwrap();
            ring.check().unwrap();
            for a in 0..=k {
                for b in 0..=k {
                    for c in 0..=k {
                        assert_eq!(
                            ring.coefficient(&w(&[a]), &w(&[b]), &w(&[c])).unwrap(),
                            su2_rule(k, a, b, c),
                            "k={k} ({a},{b},{c})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn small_rings() {
        // A₂ level 1 is the group ring of Z/3
        let ring = FusionRing::new(alg(Series::A, 2), 1).unwrap();
        ring.check().unwrap();
        assert_eq!(ring.weights().len(), 3);
        assert_eq!(ring.coefficient(&w(&[1, 0]), &w(&[1, 0]), &w(&[0, 1])).unwrap(), 1);
        // G₂ level 1 has the Fibonacci rule τ⊗τ = 1 ⊕ τ
        let ring = FusionRing::new(alg(Series::G, 2), 1).unwrap();
        ring.check().unwrap();
        let tau = w(&[1, 0]);
        assert_eq!(ring.weights(), &[w(&[0, 0]), tau.clone()]);
        assert_eq!(ring.coefficient(&tau, &tau, &w(&[0, 0])).unwrap(), 1);
        assert_eq!(ring.coefficient(&tau, &tau, &tau).unwrap(), 1);
        for (s, r, k) in [(Series::A, 2, 3), (Series::B, 2, 2), (Series::C, 2, 2)] {
            FusionRing::new(alg(s, r), k).unwrap().check().unwrap();
        }
    }

    #[test]
    fn block_dimensions() {
        let ring1 = FusionRing::new(alg(Series::A, 1), 1).unwrap();
        let ring2 = FusionRing::new(alg(Series::A, 1), 2).unwrap();
        let half = w(&[1]);
        assert_eq!(ring1.block_dim(&vec![half.clone(); 4]).unwrap(), 1);
        assert_eq!(ring2.block_dim(&vec![half.clone(); 4]).unwrap(), 2);
        assert_eq!(ring1.block_dim(&[half.clone(), half.clone(), w(&[0])]).unwrap(), 1);
        assert!(matches!(
            ring1.block_dim(&[w(&[2]), w(&[2])]),
            Err(Error::NotAdmissible { .. })
        ));
        let ring = FusionRing::new(alg(Series::A, 2), 2).unwrap();
        for l in ring.weights().to_vec() {
            let dual = ring.algebra().dual_weight(&l);
            assert_eq!(ring.block_dim(&[l, dual, w(&[0, 0])]).unwrap(), 1);
        }
    }

    #[test]
    fn csv_export() {
        let ring = FusionRing::new(alg(Series::A, 1), 1).unwrap();
        let mut buf = Vec::new();
        ring.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "lambda,mu,nu,N\n0,0,0,1\n0,1,1,1\n1,0,1,1\n1,1,0,1\n");
    }
}
