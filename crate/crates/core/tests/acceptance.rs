//! Acceptance criteria; prints one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use kzmono::bbw::bbw_check;
use kzmono::blocks::{BlockSpace, Point};
use kzmono::fusion::{freudenthal_multiplicities, FusionRing};
use kzmono::kz::KZForm;
use kzmono::lie::codim_bound;
use kzmono::ode::CMatrix;
use kzmono::tensor::TensorSystem;
use kzmono::transport::{self, projective_compare, Path, TransportOptions};
use kzmono::{LieAlgebra, Representation, Result, Series, Weight};

const EXACT_TOL: f64 = 1e-8;
const HOMOTOPY_TOL: f64 = 1e-7;

type Outcome = std::result::Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn alg(s: Series, r: usize) -> Arc<LieAlgebra> {
    Arc::new(LieAlgebra::new(s, r).unwrap())
}

fn spins(n: usize) -> Vec<Weight> {
    vec![Weight(vec![1]); n]
}

fn finite(z: &[Complex64]) -> Vec<Point> {
    z.iter().map(|p| Point::Finite(*p)).collect()
}

/// Distinct quarter-integer points, exactly representable.
fn random_points(rng: &mut StdRng, n: usize) -> Vec<Complex64> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < n {
        let (a, b) = (rng.gen_range(-24i32..=24), rng.gen_range(-24i32..=24));
        if seen.insert((a, b)) {
            out.push(c(a as f64 / 4.0, b as f64 / 4.0));
        }
    }
    out
}

/// Points near a horizontal line with alternating small offsets; every
/// half-twist disk of neighbours is free of other points.
fn line_points(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| c(1.5 * j as f64, if j % 2 == 0 { 0.25 } else { -0.25 }))
        .collect()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ac1_flatness() -> Outcome {
    let mut systems: Vec<(Arc<LieAlgebra>, Vec<Weight>, i64)> = Vec::new();
    for n in 2..=6 {
        for k in 1..=3 {
            systems.push((alg(Series::A, 1), spins(n), k));
        }
    }
    let w = |v: &[i64]| Weight(v.to_vec());
    systems.push((
        alg(Series::A, 2),
        vec![w(&[1, 0]), w(&[0, 1]), w(&[1, 0]), w(&[0, 1])],
        2,
    ));
    systems.push((alg(Series::G, 2), vec![w(&[1, 0]), w(&[1, 0]), w(&[0, 0])], 1));
    let mut relations = 0;
    for (a, ws, k) in &systems {
        let sys = Arc::new(TensorSystem::new(a.clone(), ws).map_err(err)?);
        let report = KZForm::new(sys, *k).map_err(err)?.flatness_check().map_err(err)?;
        report
            .ensure()
            .map_err(|e| format!("{} {:?} k={k}: {e}", a.label(), ws))?;
        relations += report.full.relations + report.invariant.relations;
    }
    Ok(format!(
        "{} systems, {relations} commutators exactly zero",
        systems.len()
    ))
}

fn ac2_casimir() -> Outcome {
    let algebras = [
        (Series::A, 1),
        (Series::A, 2),
        (Series::A, 3),
        (Series::B, 2),
        (Series::B, 3),
        (Series::C, 3),
        (Series::D, 4),
        (Series::G, 2),
        (Series::F, 4),
        (Series::E, 6),
    ];
    let mut count = 0;
    for (s, r) in algebras {
        let a = alg(s, r);
        for w in small_dominant(r, 2) {
            let dim = a.weyl_dimension(&w).map_err(err)?;
            if dim > 300u32.into() {
                continue;
            }
            let rep = Representation::new(a.clone(), w.clone()).map_err(err)?;
            rep.check_casimir().map_err(err)?;
            rep.check_relations().map_err(err)?;
            let freud: u64 = freudenthal_multiplicities(&a, &w).map_err(err)?.values().sum();
            if dim != rep.dim().into() || freud != rep.dim() as u64 {
                return Err(format!(
                    "{} V{w}: constructed {}, Weyl {dim}, Freudenthal {freud}",
                    a.label(),
                    rep.dim()
                ));
            }
            count += 1;
        }
    }
    Ok(format!("{count} irreps over {} algebras", algebras.len()))
}

fn small_dominant(rank: usize, max_sum: i64) -> Vec<Weight> {
    let mut out = vec![Weight(vec![0; rank])];
    let mut frontier = out.clone();
    for _ in 0..max_sum {
        let mut next = Vec::new();
        for w in &frontier {
            for i in 0..rank {
                let mut v = w.0.clone();
                v[i] += 1;
                let v = Weight(v);
                if !out.contains(&v) && !next.contains(&v) {
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Weight multisets `0 ≤ λ₁ ≤ … ≤ λₙ ≤ k`.
fn multisets(n: usize, k: i64) -> Vec<Vec<i64>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in multisets(n - 1, k) {
        let lo = rest.last().copied().unwrap_or(0);
        for x in lo..=k {
            let mut v = rest.clone();
            v.push(x);
            out.push(v);
        }
    }
    out
}

fn ac3_oracle(rng: &mut StdRng) -> Outcome {
    let a = alg(Series::A, 1);
    let mut jobs = Vec::new();
    for k in 1..=3 {
        for n in 1..=6 {
            for labels in multisets(n, k) {
                let configs: Vec<Vec<Complex64>> = (0..3).map(|_| random_points(rng, n)).collect();
                jobs.push((k, labels, configs));
            }
        }
    }
    let rings: Vec<FusionRing> = (1..=3)
        .map(|k| FusionRing::new(a.clone(), k))
        .collect::<Result<_>>()
        .map_err(err)?;
    jobs.par_iter()
        .try_for_each(|(k, labels, configs)| -> std::result::Result<(), String> {
            let ring = &rings[(*k - 1) as usize];
            let ws: Vec<Weight> = labels.iter().map(|l| Weight(vec![*l])).collect();
            let sys = Arc::new(TensorSystem::new(a.clone(), &ws).map_err(err)?);
            let fusion = ring.block_dim(&ws).map_err(err)?;
            for z in configs {
                let b = BlockSpace::new(sys.clone(), ring, &finite(z))
                    .map_err(|e| format!("{labels:?} k={k} at {z:?}: {e}"))?;
                if b.dim() as u64 != fusion {
                    return Err(format!("{labels:?} k={k}: blocks {} fusion {fusion}", b.dim()));
                }
            }
            Ok(())
        })?;
    let cases = jobs.len();
    let configs = 3 * cases;
    let known = |k: i64| -> Result<usize> {
        let sys = Arc::new(TensorSystem::new(a.clone(), &spins(4))?);
        let ring = FusionRing::new(a.clone(), k)?;
        Ok(BlockSpace::new(sys, &ring, &finite(&line_points(4)))?.dim())
    };
    let targets = (known(1).map_err(err)?, known(2).map_err(err)?);
    if targets != (1, 2) {
        return Err(format!("(ω₁)⁴ block dimensions {targets:?}, expected (1, 2)"));
    }
    Ok(format!("{cases} weight multisets, {configs} configurations"))
}

fn ac4_rotation() -> Outcome {
    let a = alg(Series::A, 1);
    let sys = Arc::new(TensorSystem::new(a, &spins(4)).map_err(err)?);
    let form = KZForm::new(sys, 2).map_err(err)?;
    let predicted = form.rotation_monodromy().map_err(err)?.predicted;
    let z = [c(0.0, 0.0), c(1.0, 0.25), c(2.5, -0.5), c(4.0, 0.5)];
    let r =
        transport::transport(&form, &Path::rotation(&z).map_err(err)?, &TransportOptions::default()).map_err(err)?;
    let want = c(0.0, -1.0);
    let dev = (&r.matrix - CMatrix::identity(2, 2) * want).norm();
    if (predicted - want).norm() > 1e-14 || dev > EXACT_TOL {
        return Err(format!("predicted {predicted}, transport deviation {dev:.3e}"));
    }
    Ok(format!("−i reproduced, deviation {dev:.2e}"))
}

struct TransportCase {
    form: KZForm,
    block: BlockSpace,
    label: String,
}

fn transport_cases() -> Result<Vec<TransportCase>> {
    let mut specs: Vec<(Arc<LieAlgebra>, Vec<Weight>, i64)> = Vec::new();
    for (n, k) in [(4, 1), (4, 2), (4, 3), (6, 2), (6, 3)] {
        specs.push((alg(Series::A, 1), spins(n), k));
    }
    specs.push((alg(Series::A, 2), vec![Weight(vec![1, 0]); 3], 1));
    specs.push((alg(Series::A, 2), vec![Weight(vec![1, 0]); 3], 2));
    let mut out = Vec::new();
    for (a, ws, k) in specs {
        let sys = Arc::new(TensorSystem::new(a.clone(), &ws)?);
        let ring = FusionRing::new(a.clone(), k)?;
        let block = BlockSpace::new(sys.clone(), &ring, &finite(&line_points(ws.len())))?;
        out.push(TransportCase {
            form: KZForm::new(sys, k)?,
            block,
            label: format!("{} n={} k={k}", a.label(), ws.len()),
        });
    }
    Ok(out)
}

fn ac5_subbundle(cases: &[TransportCase]) -> Outcome {
    let opts = TransportOptions::default();
    let mut worst = 0.0f64;
    let mut count = 0;
    for case in cases {
        for i in 0..case.form.system().n() - 1 {
            for inverse in [false, true] {
                let r = transport::braid_generator(&case.form, &case.block, i, inverse, &opts)
                    .map_err(|e| format!("{} σ{}: {e}", case.label, i + 1))?;
                worst = worst.max(r.block_residual.unwrap_or(f64::INFINITY));
                count += 1;
            }
        }
    }
    // pure twist on distinct weights
    let a = alg(Series::A, 2);
    let ws = vec![
        Weight(vec![1, 0]),
        Weight(vec![0, 1]),
        Weight(vec![1, 0]),
        Weight(vec![0, 1]),
    ];
    let sys = Arc::new(TensorSystem::new(a.clone(), &ws).map_err(err)?);
    let ring = FusionRing::new(a, 2).map_err(err)?;
    let block = BlockSpace::new(sys.clone(), &ring, &finite(&line_points(4))).map_err(err)?;
    let form = KZForm::new(sys, 2).map_err(err)?;
    for i in 0..3 {
        let r = transport::pure_twist(&form, &block, i, &opts).map_err(err)?;
        worst = worst.max(r.block_residual.unwrap_or(f64::INFINITY));
        count += 1;
    }
    if worst < EXACT_TOL {
        Ok(format!("{count} transports, max residual {worst:.2e}"))
    } else {
        Err(format!("max residual {worst:.3e}"))
    }
}

fn ac6_braid(cases: &[TransportCase]) -> Outcome {
    let opts = TransportOptions::default();
    let mut worst_braid = 0.0f64;
    let mut worst_far = 0.0f64;
    for case in cases {
        let n = case.form.system().n();
        let word = |s: &str| -> std::result::Result<CMatrix, String> {
            let w = transport::parse_braid_word(s, n).map_err(err)?;
            Ok(transport::braid_word(&case.form, &case.block, &w, &opts)
                .map_err(|e| format!("{} {s}: {e}", case.label))?
                .matrix)
        };
        for i in 1..n - 1 {
            let (a, b) = (
                word(&format!("{i} {} {i}", i + 1))?,
                word(&format!("{} {i} {}", i + 1, i + 1))?,
            );
            worst_braid = worst_braid.max(projective_compare(&a, &b).map_err(err)?.1);
        }
        for i in 1..n - 1 {
            for j in i + 2..n {
                let (a, b) = (word(&format!("{i} {j}"))?, word(&format!("{j} {i}"))?);
                worst_far = worst_far.max((&a - &b).norm());
            }
        }
    }
    if worst_braid < EXACT_TOL && worst_far < EXACT_TOL {
        Ok(format!("braid {worst_braid:.2e}, far commutativity {worst_far:.2e}"))
    } else {
        Err(format!("braid {worst_braid:.3e}, far commutativity {worst_far:.3e}"))
    }
}

fn ac6b_homotopy(cases: &[TransportCase]) -> Outcome {
    let mut worst = 0.0f64;
    for case in cases.iter().take(3) {
        let circle =
            transport::braid_generator(&case.form, &case.block, 1, false, &TransportOptions::default()).map_err(err)?;
        let opts = TransportOptions {
            aspect: 0.5,
            ..Default::default()
        };
        let ellipse = transport::braid_generator(&case.form, &case.block, 1, false, &opts).map_err(err)?;
        worst = worst.max((circle.matrix - ellipse.matrix).norm());
    }
    if worst < HOMOTOPY_TOL {
        Ok(format!("circle vs ellipse {worst:.2e}"))
    } else {
        Err(format!("circle vs ellipse {worst:.3e}"))
    }
}

fn ac7_codim() -> Outcome {
    let b = codim_bound(3, 2, 1, 6).map_err(err)?;
    if b != 1 {
        return Err(format!("codim_bound(3,2,1,6) = {b}"));
    }
    let all = [
        (Series::A, 1),
        (Series::A, 2),
        (Series::A, 3),
        (Series::A, 4),
        (Series::B, 2),
        (Series::B, 3),
        (Series::C, 3),
        (Series::C, 4),
        (Series::D, 4),
        (Series::D, 5),
        (Series::E, 6),
        (Series::E, 7),
        (Series::E, 8),
        (Series::F, 4),
        (Series::G, 2),
    ];
    for (s, r) in all {
        let a = alg(s, r);
        for n in [2, 4, 6, 8, 10] {
            let p = a.metaplectic_parity(n).map_err(err)?;
            if !p.descends || !p.n_even {
                return Err(format!("{} n={n}: {p:?}", a.label()));
            }
        }
    }
    Ok(format!("bound 1; even n descends on {} algebras", all.len()))
}

fn ac8_bbw() -> Outcome {
    for m in 0..=6 {
        let r = bbw_check(alg(Series::A, 1), m).map_err(err)?;
        if r.solution_dim != 1 {
            return Err(format!("m={m}: solution space {}", r.solution_dim));
        }
    }
    Ok("m = 0..6, solution spaces of dimension 1".into())
}

fn ac9_performance() -> Outcome {
    let start = Instant::now();
    let a = alg(Series::A, 1);
    let sys = Arc::new(TensorSystem::new(a.clone(), &spins(6)).map_err(err)?);
    let ring = FusionRing::new(a, 2).map_err(err)?;
    let block = BlockSpace::new(sys.clone(), &ring, &finite(&line_points(6))).map_err(err)?;
    let form = KZForm::new(sys.clone(), 2).map_err(err)?;
    let r = transport::braid_generator(&form, &block, 2, false, &TransportOptions::default()).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    let dense = sys.dim() * sys.dim();
    let mut nnz = 0;
    for (i, j) in sys.pairs() {
        nnz = nnz.max(sys.omega_full(i, j).map_err(err)?.nnz());
    }
    if secs < 60.0 && nnz < dense / 4 && r.block_residual.unwrap_or(1.0) < EXACT_TOL {
        Ok(format!("{secs:.2}s, Ω nonzeros {nnz} of {dense}"))
    } else {
        Err(format!("{secs:.2}s, Ω nonzeros {nnz} of {dense}"))
    }
}

fn main() -> ExitCode {
    let mut rng = StdRng::seed_from_u64(0x6b7a);
    let mut failed = 0;
    let mut report = |name: &str, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d} [{secs:.1}s]");
            }
        }
    };
    report("AC1 exact flatness", &mut ac1_flatness);
    report("AC2 Casimir and Weyl dimension", &mut ac2_casimir);
    report("AC3 block dimension = fusion", &mut || ac3_oracle(&mut rng));
    report("AC4 rotation monodromy", &mut ac4_rotation);
    let cases = transport_cases().map_err(err);
    let with = |f: fn(&[TransportCase]) -> Outcome| {
        let cases = &cases;
        move || match cases {
            Ok(c) => f(c),
            Err(e) => Err(e.clone()),
        }
    };
    report("AC5 subbundle preservation", &mut with(ac5_subbundle));
    report("AC6 projective braid relations", &mut with(ac6_braid));
    report("AC6 homotopy invariance", &mut with(ac6b_homotopy));
    report("AC7 codimension and parity", &mut ac7_codim);
    report("AC8 BBW rank one", &mut ac8_bbw);
    report("AC9 performance", &mut ac9_performance);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
