use std::sync::Arc;

use num_complex::Complex64;

use kzmono::blocks::{BlockSpace, Point};
use kzmono::fusion::FusionRing;
use kzmono::kz::KZForm;
use kzmono::ode::{CMatrix, Method};
use kzmono::tensor::TensorSystem;
use kzmono::transport::{self, Path, TransportOptions};
use kzmono::{LieAlgebra, Series, Weight};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn form(n: usize, k: i64) -> KZForm {
    let alg = Arc::new(LieAlgebra::new(Series::A, 1).unwrap());
    let sys = Arc::new(TensorSystem::new(alg, &vec![Weight(vec![1]); n]).unwrap());
    KZForm::new(sys, k).unwrap()
}

fn base() -> Vec<Complex64> {
    vec![c(0.0, 0.0), c(1.0, 0.25), c(2.5, -0.5), c(4.0, 0.5)]
}

#[test]
fn concatenation_is_multiplicative() {
    let f = form(4, 2);
    let z0 = base();
    let z1: Vec<Complex64> = z0.iter().map(|z| z * c(0.9, 0.4) + c(0.3, -0.2)).collect();
    let z2: Vec<Complex64> = z1.iter().enumerate().map(|(j, z)| z + c(0.0, 0.3 * j as f64)).collect();
    let (g1, g2) = (Path::linear(&z0, &z1).unwrap(), Path::linear(&z1, &z2).unwrap());
    let opts = TransportOptions::default();
    let t1 = transport::transport(&f, &g1, &opts).unwrap();
    let t2 = transport::transport(&f, &g2, &opts).unwrap();
    let t12 = transport::transport(&f, &g1.clone().then(g2).unwrap(), &opts).unwrap();
    let dev = (&t12.matrix - &t2.matrix * &t1.matrix).norm();
    assert!(dev < t1.est_error + t2.est_error + t12.est_error + 1e-12, "{dev}");
}

#[test]
fn mismatched_concatenation_rejected() {
    let z0 = base();
    let z1: Vec<Complex64> = z0.iter().map(|z| z + c(0.5, 0.0)).collect();
    let g = Path::linear(&z0, &z1).unwrap();
    assert!(g.clone().then(g).is_err());
}

#[test]
fn reverse_is_inverse() {
    let f = form(4, 3);
    let g = Path::half_twist(&base(), 1, false).unwrap();
    let opts = TransportOptions::default();
    let fwd = transport::transport(&f, &g, &opts).unwrap();
    let back = transport::transport(&f, &g.reversed(), &opts).unwrap();
    let id = CMatrix::identity(2, 2);
    assert!((&back.matrix * &fwd.matrix - id).norm() < 1e-9);
    // the inverse half-twist from the swapped configuration retraces the path
    let inv = Path::half_twist(&g.end(), 1, true).unwrap();
    let t = transport::transport(&f, &inv, &opts).unwrap();
    assert!((&t.matrix - &back.matrix).norm() < 1e-9);
}

#[test]
fn estimates_track_errors() {
    let f = form(4, 2);
    let rot = Path::rotation(&base()).unwrap();
    let exact = CMatrix::identity(2, 2) * c(0.0, -1.0);
    for method in [Method::Dopri5, Method::Magnus4] {
        let mut errors = Vec::new();
        for tol in [1e-6, 1e-8, 1e-10] {
            let opts = TransportOptions {
                tol,
                method,
                ..Default::default()
            };
            let r = transport::transport(&f, &rot, &opts).unwrap();
            let e = (&r.matrix - &exact).norm();
            assert!(
                e <= 10.0 * r.est_error.max(1e-13),
                "{method:?} tol {tol}: error {e} estimate {}",
                r.est_error
            );
            errors.push(e);
        }
        match method {
            // tightening tol by 1e4 gains at least two digits
            Method::Dopri5 => assert!(errors[2] < errors[0] * 1e-2, "{errors:?}"),
            // the generator is constant along the rotation, so one Magnus
            // step is already exact
            Method::Magnus4 => assert!(errors.iter().all(|e| *e < 1e-12), "{errors:?}"),
        }
    }
}

#[test]
fn infinity_chart_blocks_transport() {
    // a point at infinity becomes a finite chart point; generators away from
    // it still respect the block bundle
    let alg = Arc::new(LieAlgebra::new(Series::A, 1).unwrap());
    let sys = Arc::new(TensorSystem::new(alg.clone(), &vec![Weight(vec![1]); 4]).unwrap());
    let ring = FusionRing::new(alg, 2).unwrap();
    let pts = vec![
        Point::Finite(c(0.0, 0.0)),
        Point::Finite(c(1.0, 0.5)),
        Point::Finite(c(2.0, -0.5)),
        Point::Infinity,
    ];
    let block = BlockSpace::new(sys.clone(), &ring, &pts).unwrap();
    let f = KZForm::new(sys, 2).unwrap();
    let r = transport::braid_generator(&f, &block, 0, false, &TransportOptions::default()).unwrap();
    assert!(r.block_residual.unwrap() < 1e-8);
}
