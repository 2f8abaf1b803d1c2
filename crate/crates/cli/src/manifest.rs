use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use kzmono::blocks::Point;
use kzmono::ode::Method;
use kzmono::{Error, LieAlgebra, Result, Series, Weight};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub series: Series,
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// integrator tolerance
    pub transport: f64,
    /// numerical comparisons against exact predictions
    pub compare: f64,
    /// largest accepted component leaving the block space
    pub block: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            transport: 1e-10,
            compare: 1e-8,
            block: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BraidSpec {
    pub word: String,
    /// second word, compared projectively with the first
    #[serde(default)]
    pub compare: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodimSpec {
    pub dim_g: i64,
    pub dim_p: i64,
    pub dim_zp: i64,
    pub n: i64,
}

/// Test fixture: deliberately corrupt one input of the exact suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    /// 1-based slots whose Ωⁱʲ is negated before the Kohno check
    pub negate_omega: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub algebra: AlgebraSpec,
    pub level: i64,
    pub weights: Vec<Vec<i64>>,
    /// `[re, im]` per marked point, `null` for the point at infinity
    #[serde(default)]
    pub points: Vec<Option<[f64; 2]>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub braid: Option<BraidSpec>,
    #[serde(default)]
    pub codim: Option<CodimSpec>,
    #[serde(default = "default_bbw")]
    pub bbw_max_m: usize,
    #[serde(default)]
    pub fault: Option<FaultSpec>,
}

fn default_bbw() -> usize {
    6
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let m: RunManifest =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("manifest: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let alg = self.algebra()?;
        if self.weights.is_empty() {
            return Err(Error::InvalidArgument("manifest lists no weights".into()));
        }
        for w in &self.weights {
            if w.len() != alg.rank() {
                return Err(Error::DimensionMismatch {
                    expected: alg.rank(),
                    got: w.len(),
                });
            }
            let w = Weight(w.clone());
            if !w.is_dominant() {
                return Err(Error::NotDominant { weight: w.to_string() });
            }
        }
        if !self.points.is_empty() && self.points.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: self.points.len(),
            });
        }
        let t = &self.tolerances;
        for (name, v) in [("transport", t.transport), ("compare", t.compare), ("block", t.block)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> Result<Arc<LieAlgebra>> {
        Ok(Arc::new(LieAlgebra::new(self.algebra.series, self.algebra.rank)?))
    }

    pub fn weights(&self) -> Vec<Weight> {
        self.weights.iter().map(|w| Weight(w.clone())).collect()
    }

    /// The marked points; generic defaults `zⱼ = j + (−1)ʲ i/4` when none
    /// are given.
    pub fn points(&self) -> Vec<Point> {
        if self.points.is_empty() {
            return default_points(self.weights.len())
                .into_iter()
                .map(Point::Finite)
                .collect();
        }
        self.points
            .iter()
            .map(|p| match p {
                Some([re, im]) => Point::Finite(Complex64::new(*re, *im)),
                None => Point::Infinity,
            })
            .collect()
    }

    /// Finite points for loops in the plane; defaults replace a point at
    /// infinity.
    pub fn finite_points(&self) -> Vec<Complex64> {
        let pts = self.points();
        if pts.iter().all(|p| matches!(p, Point::Finite(_))) {
            return pts
                .into_iter()
                .map(|p| match p {
                    Point::Finite(z) => z,
                    Point::Infinity => unreachable!(),
                })
                .collect();
        }
        default_points(self.weights.len())
    }
}

pub fn default_points(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::new(j as f64, if j % 2 == 0 { 0.25 } else { -0.25 }))
        .collect()
}
