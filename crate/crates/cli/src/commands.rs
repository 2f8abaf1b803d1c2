use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use kzmono::bbw::bbw_check;
use kzmono::blocks::BlockSpace;
use kzmono::exact::{q, SparseMatrix, Q};
use kzmono::fusion::FusionRing;
use kzmono::kz::{kohno_check, KZForm};
use kzmono::lie::{codim_bound as bound, MetaplecticParity};
use kzmono::ode::CMatrix;
use kzmono::tensor::TensorSystem;
use kzmono::transport::{self, Path as KzPath, TransportOptions};
use kzmono::{Error, Representation, Result, Weight};

use crate::manifest::RunManifest;

fn write_json<T: Serialize>(out: Option<&Path>, name: &str, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            std::fs::write(&path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn system(m: &RunManifest) -> Result<Arc<TensorSystem>> {
    Ok(Arc::new(TensorSystem::new(m.algebra()?, &m.weights())?))
}

fn options(m: &RunManifest) -> TransportOptions {
    TransportOptions {
        tol: m.tolerances.transport,
        block_tol: m.tolerances.block,
        method: m.method,
        ..Default::default()
    }
}

pub fn blocks(m: &RunManifest, out: Option<&Path>) -> Result<u8> {
    let sys = system(m)?;
    let ring = FusionRing::new(sys.algebra().clone(), m.level)?;
    let fusion = ring.block_dim(&m.weights())?;
    let block = BlockSpace::new(sys.clone(), &ring, &m.points())?;
    println!(
        "invariants={} blocks={} fusion={}",
        sys.invariant_dim(),
        block.dim(),
        fusion
    );
    if out.is_some() {
        write_json(out, "blocks.json", &block.to_document())?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct Check {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Default, Serialize)]
struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, name: impl Into<String>, outcome: Result<String>) {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(e) => (false, e.to_string()),
        };
        let name = name.into();
        println!(
            "{} {name}{}",
            if passed { "PASS" } else { "FAIL" },
            if detail.is_empty() {
                String::new()
            } else {
                format!(": {detail}")
            }
        );
        self.checks.push(Check { name, passed, detail });
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn within(name: &str, value: f64, tol: f64) -> Result<String> {
    if value <= tol {
        Ok(format!("{value:.3e} <= {tol:e}"))
    } else {
        Err(Error::IdentityFailure(format!("{name} {value:.3e} exceeds {tol:e}")))
    }
}

pub fn verify(m: &RunManifest, out: Option<&Path>) -> Result<u8> {
    let alg = m.algebra()?;
    let sys = system(m)?;
    let mut suite = Suite::default();

    let distinct: BTreeMap<Weight, ()> = m.weights().into_iter().map(|w| (w, ())).collect();
    for w in distinct.keys() {
        let rep = Representation::new(alg.clone(), w.clone())?;
        suite.record(
            format!("casimir V{w}"),
            rep.check_casimir().map(|_| format!("dim {}", rep.dim())),
        );
        suite.record(format!("relations V{w}"), rep.check_relations().map(|_| String::new()));
    }
    suite.record(
        "casimir sum on invariants",
        sys.check_casimir_sum().map(|_| String::new()),
    );
    suite.record(
        "invariance",
        sys.check_invariance().map(|_| format!("dim {}", sys.invariant_dim())),
    );

    let mut full = BTreeMap::new();
    let mut inv = BTreeMap::new();
    for (i, j) in sys.pairs() {
        full.insert((i, j), sys.omega_full(i, j)?.clone());
        inv.insert((i, j), sys.omega_pair(i, j)?.clone());
    }
    if let Some(f) = &m.fault {
        let [a, b] = f.negate_omega;
        if a == 0 || b == 0 || a == b || a.max(b) > sys.n() {
            return Err(Error::InvalidSlots { i: a, j: b, n: sys.n() });
        }
        let key = (a.min(b) - 1, a.max(b) - 1);
        let minus = |x: &SparseMatrix<Q>| x.scale(&q(-1));
        full.insert(key, minus(&full[&key]));
        inv.insert(key, minus(&inv[&key]));
    }
    for (label, map) in [("full space", &full), ("invariants", &inv)] {
        let r = kohno_check(sys.n(), map);
        let outcome = if r.holds() {
            Ok(format!("{} relations", r.relations))
        } else {
            Err(Error::IdentityFailure(format!(
                "{} of {} fail, max deviation {}: {}",
                r.failures.len(),
                r.relations,
                r.max_deviation,
                r.failures.join(", ")
            )))
        };
        suite.record(format!("kohno relations ({label})"), outcome);
    }

    if sys.invariant_dim() > 0 {
        let form = KZForm::new(sys.clone(), m.level)?;
        let rot = form.rotation_monodromy()?;
        suite.record(
            format!("rotation exponential = {:.6}", rot.predicted),
            within("deviation", rot.deviation, m.tolerances.compare),
        );
        let path = KzPath::rotation(&m.finite_points())?;
        let outcome = transport::transport(&form, &path, &options(m)).and_then(|t| {
            let d = t.matrix.nrows();
            within(
                "deviation",
                (&t.matrix - CMatrix::identity(d, d) * rot.predicted).norm(),
                m.tolerances.compare,
            )
        });
        suite.record("rotation transport", outcome);
    }

    for k in 0..=m.bbw_max_m {
        let a1 = Arc::new(kzmono::LieAlgebra::new(kzmono::Series::A, 1)?);
        suite.record(
            format!("bbw m={k}"),
            bbw_check(a1, k).map(|r| format!("solution space dim {}", r.solution_dim)),
        );
    }

    if out.is_some() {
        write_json(out, "verify.json", &suite)?;
    }
    Ok(if suite.passed() { 0 } else { 1 })
}

#[derive(Serialize)]
struct Comparison {
    word: Vec<i64>,
    scalar: [f64; 2],
    residual: f64,
}

#[derive(Serialize)]
struct BraidReport<'a> {
    manifest: &'a RunManifest,
    monodromy: transport::MonodromyDocument,
    singular_values: Vec<f64>,
    comparison: Option<Comparison>,
}

pub fn braid(m: &RunManifest, out: Option<&Path>) -> Result<u8> {
    let spec = m
        .braid
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("manifest has no braid section".into()))?;
    let n = m.weights.len();
    let word = transport::parse_braid_word(&spec.word, n)?;
    let other = spec
        .compare
        .as_deref()
        .map(|w| transport::parse_braid_word(w, n))
        .transpose()?;
    let sys = system(m)?;
    let ring = FusionRing::new(sys.algebra().clone(), m.level)?;
    let block = BlockSpace::new(sys.clone(), &ring, &m.points())?;
    let form = KZForm::new(sys, m.level)?;
    let opts = options(m);
    let res = transport::braid_word(&form, &block, &word, &opts)?;
    let mut code = 0;
    let comparison = match other {
        Some(w2) => {
            let res2 = transport::braid_word(&form, &block, &w2, &opts)?;
            let (c, residual) = transport::projective_compare(&res.matrix, &res2.matrix)?;
            eprintln!("projective residual {residual:.3e} (scalar {c:.6})");
            if residual > m.tolerances.compare {
                code = 1;
            }
            Some(Comparison {
                word: w2,
                scalar: [c.re, c.im],
                residual,
            })
        }
        None => None,
    };
    eprintln!(
        "blocks={} est_error={:.3e} block_residual={:.3e}",
        block.dim(),
        res.est_error,
        res.block_residual.unwrap_or(0.0)
    );
    if res.est_error > m.tolerances.compare {
        eprintln!(
            "error: estimated error {:.3e} exceeds {:e}",
            res.est_error, m.tolerances.compare
        );
        code = 1;
    }
    let report = BraidReport {
        manifest: m,
        monodromy: res.to_document(&word),
        singular_values: transport::singular_values(&res.matrix),
        comparison,
    };
    write_json(out, "monodromy.json", &report)?;
    Ok(code)
}

pub fn fusion_table(m: &RunManifest, out: Option<&Path>) -> Result<u8> {
    let ring = FusionRing::new(m.algebra()?, m.level)?;
    ring.check()?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
            let path = dir.join("fusion.csv");
            let file = std::fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            ring.write_csv(file)?;
        }
        None => ring.write_csv(std::io::stdout().lock())?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct CodimReport {
    dim_g: i64,
    dim_p: i64,
    dim_zp: i64,
    n: i64,
    bound: i64,
    algebra: String,
    parity: MetaplecticParity,
}

pub fn codim_bound(m: &RunManifest, out: Option<&Path>) -> Result<u8> {
    let c = m
        .codim
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("manifest has no codim section".into()))?;
    let alg = m.algebra()?;
    let report = CodimReport {
        dim_g: c.dim_g,
        dim_p: c.dim_p,
        dim_zp: c.dim_zp,
        n: c.n,
        bound: bound(c.dim_g, c.dim_p, c.dim_zp, c.n)?,
        algebra: alg.label(),
        parity: alg.metaplectic_parity(c.n)?,
    };
    write_json(out, "codim.json", &report)?;
    Ok(0)
}

pub fn export_rep(m: &RunManifest, out: Option<&Path>) -> Result<u8> {
    let alg = m.algebra()?;
    let sys = system(m)?;
    let Some(dir) = out else {
        let reps = sys.factors().iter().map(|r| r.to_document()).collect::<Vec<_>>();
        write_json(None, "", &reps)?;
        return Ok(0);
    };
    write_json(Some(dir), "algebra.json", &alg.to_document())?;
    let mut seen = BTreeMap::new();
    for r in sys.factors() {
        seen.entry(r.highest_weight().clone()).or_insert_with(|| r.clone());
    }
    for (w, r) in &seen {
        let tag = w.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("_");
        write_json(Some(dir), &format!("rep_{tag}.json"), &r.to_document())?;
    }
    for (i, j) in sys.pairs() {
        write_json(
            Some(dir),
            &format!("omega_{}_{}.json", i + 1, j + 1),
            &sys.omega_document(i, j)?,
        )?;
    }
    Ok(0)
}
