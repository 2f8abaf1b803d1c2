//! Linear matrix ODEs `Y′ = A(t) Y` and the matrix exponential.
//!
//! Two adaptive integrators are provided: the Dormand–Prince 5(4) embedded
//! pair, and a fourth-order Magnus method (two-point Gauss rule) with step
//! doubling for error control. The Magnus step applies an exact exponential,
//! so it preserves the group structure of the flow.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// `exp(a)` by scaling and squaring with the diagonal (6,6) Padé approximant.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm of a non-square matrix");
    if n == 0 {
        return a.clone();
    }
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = a.scale(0.5f64.powi(s));
    // c_k = (2p−k)! p! / ((2p)! k! (p−k)!) with p = 6
    const C: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let id = CMatrix::identity(n, n);
    let mut num = id.clone();
    let mut den = id.clone();
    let mut pow = id.clone();
    for (k, c) in C.iter().enumerate().skip(1) {
        pow = &pow * &x;
        let term = pow.scale(*c);
        num += &term;
        if k % 2 == 0 {
            den += &term;
        } else {
            den -= &term;
        }
    }
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is invertible for small arguments");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Dopri5,
    Magnus4,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub method: Method,
    /// Relative and absolute local error tolerance per step.
    pub tol: f64,
    pub max_steps: usize,
    /// Solve columns of the initial value independently in parallel.
    pub parallel_columns: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            method: Method::Dopri5,
            tol: 1e-10,
            max_steps: 1_000_000,
            parallel_columns: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub y: CMatrix,
    pub steps: usize,
    pub rejected: usize,
    /// Sum of the accepted local error estimates (max norm).
    pub est_error: f64,
}

/// Integrates `Y′ = A(t) Y` from `t0` to `t1`.
pub fn solve<F>(a: &F, y0: &CMatrix, t0: f64, t1: f64, opts: &OdeOptions) -> Result<OdeSolution>
where
    F: Fn(f64) -> CMatrix + Sync,
{
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if !opts.parallel_columns || y0.ncols() <= 1 {
        return solve_block(a, y0.clone(), t0, t1, opts);
    }
    let cols: Vec<Result<OdeSolution>> = (0..y0.ncols())
        .into_par_iter()
        .map(|j| solve_block(a, y0.columns(j, 1).into_owned(), t0, t1, opts))
        .collect();
    let mut y = CMatrix::zeros(y0.nrows(), y0.ncols());
    let (mut steps, mut rejected, mut est) = (0, 0, 0.0f64);
    for (j, c) in cols.into_iter().enumerate() {
        let c = c?;
        y.set_column(j, &c.y.column(0));
        steps = steps.max(c.steps);
        rejected += c.rejected;
        est = est.max(c.est_error);
    }
    Ok(OdeSolution {
        y,
        steps,
        rejected,
        est_error: est,
    })
}

fn scaled_error(err: &CMatrix, y: &CMatrix, y_new: &CMatrix, tol: f64) -> f64 {
    err.iter()
        .zip(y.iter().zip(y_new.iter()))
        .map(|(e, (a, b))| e.norm() / (tol * (1.0 + a.norm().max(b.norm()))))
        .fold(0.0, f64::max)
}

fn max_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Step {
    y: CMatrix,
    err: CMatrix,
}

/// `y + h Σ cᵢ kᵢ`
fn combine(y: &CMatrix, h: f64, terms: &[(f64, &CMatrix)]) -> CMatrix {
    let mut out = y.clone();
    for (c, k) in terms {
        out.zip_apply(k, |o, x| *o += x * (h * c));
    }
    out
}

fn dopri_step<F: Fn(f64) -> CMatrix>(a: &F, t: f64, y: &CMatrix, h: f64) -> Step {
    let f = |s: f64, v: &CMatrix| a(s) * v;
    let k1 = f(t, y);
    let k2 = f(t + C2 * h, &combine(y, h, &[(A21, &k1)]));
    let k3 = f(t + C3 * h, &combine(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &combine(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        t + C5 * h,
        &combine(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &combine(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y_new = combine(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y_new);
    let zero = CMatrix::zeros(y.nrows(), y.ncols());
    let err = combine(
        &zero,
        h,
        &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
    );
    Step { y: y_new, err }
}

fn magnus_single<F: Fn(f64) -> CMatrix>(a: &F, t: f64, y: &CMatrix, h: f64) -> CMatrix {
    let d = 3f64.sqrt() / 6.0;
    let a1 = a(t + h * (0.5 - d));
    let a2 = a(t + h * (0.5 + d));
    let comm = &a2 * &a1 - &a1 * &a2;
    let omega = (&a1 + &a2) * Complex64::new(h / 2.0, 0.0) + comm * Complex64::new(3f64.sqrt() / 12.0 * h * h, 0.0);
    expm(&omega) * y
}

fn magnus_step<F: Fn(f64) -> CMatrix>(a: &F, t: f64, y: &CMatrix, h: f64) -> Step {
    let coarse = magnus_single(a, t, y, h);
    let half = magnus_single(a, t, y, h / 2.0);
    let fine = magnus_single(a, t + h / 2.0, &half, h / 2.0);
    let err = (&fine - &coarse) / Complex64::new(15.0, 0.0);
    Step { y: fine, err }
}

fn solve_block<F: Fn(f64) -> CMatrix>(a: &F, y0: CMatrix, t0: f64, t1: f64, opts: &OdeOptions) -> Result<OdeSolution> {
    let span = t1 - t0;
    let mut y = y0;
    let mut t = t0;
    let (mut steps, mut rejected, mut est) = (0usize, 0usize, 0.0f64);
    if span == 0.0 {
        return Ok(OdeSolution {
            y,
            steps,
            rejected,
            est_error: est,
        });
    }
    let dir = span.signum();
    // both local error estimates are of fifth order in h
    let order = 5.0;
    // initial step from the size of A
    let norm_a = a(t0).iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-8);
    let mut h = (opts.tol.powf(1.0 / order) / norm_a).min(span.abs()) * 0.1 * dir;
    loop {
        if (t1 - t) * dir <= 0.0 {
            break;
        }
        if steps + rejected >= opts.max_steps {
            return Err(Error::StepBudget {
                steps: opts.max_steps,
                t,
            });
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        if h.abs() < 1e-14 * t.abs().max(span.abs()) {
            return Err(Error::StepUnderflow { t });
        }
        let step = match opts.method {
            Method::Dopri5 => dopri_step(a, t, &y, h),
            Method::Magnus4 => magnus_step(a, t, &y, h),
        };
        let err = scaled_error(&step.err, &y, &step.y, opts.tol);
        if !err.is_finite() || step.y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            rejected += 1;
            h *= 0.2;
            continue;
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-1.0 / order)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            t = if (t + h - t1) * dir >= 0.0 { t1 } else { t + h };
            est += max_norm(&step.err);
            y = step.y;
            steps += 1;
            h *= fac;
        } else {
            rejected += 1;
            h *= fac.min(1.0);
        }
    }
    Ok(OdeSolution {
        y,
        steps,
        rejected,
        est_error: est,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn expm_of_rotation_generator() {
        let theta = 2.7;
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-theta, 0.0), c(theta, 0.0), c(0.0, 0.0)]);
        let e = expm(&a);
        let want = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(theta.cos(), 0.0),
                c(-theta.sin(), 0.0),
                c(theta.sin(), 0.0),
                c(theta.cos(), 0.0),
            ],
        );
        assert!((e - want).norm() < 1e-13);
    }

    #[test]
    fn expm_nilpotent_and_large() {
        let n = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(3.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let want = CMatrix::identity(2, 2) + &n;
        assert!((expm(&n) - want).norm() < 1e-14);
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(10.0, 3.0), c(-4.0, 0.5)]));
        let e = expm(&d);
        assert!((e[(0, 0)] - c(10.0, 3.0).exp()).norm() / c(10.0, 3.0).exp().norm() < 1e-12);
        assert!((e[(1, 1)] - c(-4.0, 0.5).exp()).norm() < 1e-14);
    }

    /// Y′ = (i cos t) Y has Y(t) = exp(i sin t).
    fn scalar_problem(method: Method, tol: f64) -> f64 {
        let a = |t: f64| CMatrix::from_element(1, 1, c(0.0, t.cos()));
        let opts = OdeOptions {
            method,
            tol,
            ..Default::default()
        };
        let sol = solve(&a, &CMatrix::identity(1, 1), 0.0, 3.0, &opts).unwrap();
        (sol.y[(0, 0)] - c(0.0, 3f64.sin()).exp()).norm()
    }

    #[test]
    fn both_methods_converge() {
        for m in [Method::Dopri5, Method::Magnus4] {
            let coarse = scalar_problem(m, 1e-6);
            let fine = scalar_problem(m, 1e-11);
            assert!(fine < 1e-9, "{m:?}: {fine}");
            assert!(fine < coarse, "{m:?}");
        }
    }

    #[test]
    fn noncommuting_coefficients() {
        // A(t) = [[0, t], [−t, 0]] commutes with itself at all times, so the
        // flow is the rotation by t²/2
        let a = |t: f64| CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(t, 0.0), c(-t, 0.0), c(0.0, 0.0)]);
        let y0 = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0), c(1.0, -1.0)]);
        for parallel in [false, true] {
            let opts = OdeOptions {
                parallel_columns: parallel,
                ..Default::default()
            };
            let sol = solve(&a, &y0, 0.0, 2.0, &opts).unwrap();
            let r = CMatrix::from_row_slice(
                2,
                2,
                &[
                    c(2f64.cos(), 0.0),
                    c(2f64.sin(), 0.0),
                    c(-2f64.sin(), 0.0),
                    c(2f64.cos(), 0.0),
                ],
            );
            assert!((sol.y - r * &y0).norm() < 1e-8);
        }
    }

    #[test]
    fn budget_and_bad_tolerance() {
        let a = |_: f64| CMatrix::from_element(1, 1, c(0.0, 50.0));
        let opts = OdeOptions {
            max_steps: 5,
            ..Default::default()
        };
        assert!(matches!(
            solve(&a, &CMatrix::identity(1, 1), 0.0, 10.0, &opts),
            Err(Error::StepBudget { .. })
        ));
        let opts = OdeOptions {
            tol: 0.0,
            ..Default::default()
        };
        assert!(solve(&a, &CMatrix::identity(1, 1), 0.0, 1.0, &opts).is_err());
    }

    #[test]
    fn pole_underflows() {
        // A(t) = 1/(1 − t)² blows up at t = 1
        let a = |t: f64| CMatrix::from_element(1, 1, c(1.0 / ((1.0 - t) * (1.0 - t)), 0.0));
        let r = solve(&a, &CMatrix::identity(1, 1), 0.0, 2.0, &OdeOptions::default());
        assert!(
            matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::StepBudget { .. })),
            "{r:?}"
        );
    }
}
