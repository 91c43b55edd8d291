//! The `sweep` subcommand: one quantity evaluated over a parameter grid,
//! next to an exact or closed-form oracle where one exists.
//!
//! Descriptor (JSON):
//!
//! ```json
//! {
//!   "parameter": "gamma",
//!   "values": [1e-2, 1e-3, 1e-4],
//!   "quantity": "gamma_divergence",
//!   "p1": {"gaussian": {"mu": [0.0], "sigma": [[1.0]]}},
//!   "p2": {"gaussian": {"mu": [1.0], "sigma": [[2.0]]}}
//! }
//! ```
//!
//! Optional fields: `mean` (default `geometric`), `alpha` (0.5), `gamma`,
//! `samples` (100000), `seed` (0), `chunk_size` (4096). Discrete inputs are
//! written `{"discrete": [0.2, 0.8]}`. All values are in nats.

use std::io::Write;
use std::path::Path;

use geojsd::discrete as dd;
use geojsd::estimate::{self, Categorical, EstimatorConfig, Normal1d, Proposal, ScaledPoint};
use geojsd::expfam::GaussianFamily;
use geojsd::gaussian as ga;
use geojsd::means::{MeanKind, MeanSpec};
use geojsd::quadrature::Quadrature;
use geojsd::{Density, DivergenceError, Gaussian, LogBase};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::input;

const NATS: LogBase = LogBase::Nats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Gamma,
    Samples,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    GammaDivergence,
    JsMGamma,
    EstimateZ,
    JsMExtended,
    Bhattacharyya,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensitySpec {
    Discrete(Vec<f64>),
    Gaussian(Gaussian),
}

fn default_mean() -> String {
    "geometric".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: Parameter,
    pub values: Vec<f64>,
    pub quantity: Quantity,
    pub p1: DensitySpec,
    pub p2: DensitySpec,
    #[serde(default = "default_mean")]
    pub mean: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub chunk_size: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub param: f64,
    pub value: f64,
    pub std_error: Option<f64>,
    pub oracle: Option<f64>,
    pub abs_error: Option<f64>,
}

pub const HEADER: [&str; 5] = ["param", "value", "std_error", "oracle", "abs_error"];

enum Pair {
    Discrete(Density, Density),
    Gaussian(Gaussian, Gaussian),
}

/// Values for one grid point.
struct Point {
    mean: MeanSpec<f64>,
    gamma: Option<f64>,
    config: EstimatorConfig,
}

impl Point {
    fn gamma(&self) -> Result<f64> {
        self.gamma
            .ok_or_else(|| CliError::Usage("quantity needs `gamma` (field or parameter)".into()))
    }

    fn is_geometric(&self) -> bool {
        matches!(self.mean.kind(), MeanKind::Geometric)
    }
}

pub fn load(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        msg: e.to_string(),
    })
}

fn pair(spec: &SweepSpec) -> Result<Pair> {
    let usage = |e: DivergenceError| CliError::Usage(format!("sweep densities: {e}"));
    match (&spec.p1, &spec.p2) {
        (DensitySpec::Discrete(a), DensitySpec::Discrete(b)) => Ok(Pair::Discrete(
            Density::normalized(a.clone()).map_err(usage)?,
            Density::normalized(b.clone()).map_err(usage)?,
        )),
        (DensitySpec::Gaussian(a), DensitySpec::Gaussian(b)) if a.dim() == b.dim() => {
            Ok(Pair::Gaussian(a.clone(), b.clone()))
        }
        _ => Err(CliError::Usage(
            "p1 and p2 must both be discrete or both Gaussian of one dimension".into(),
        )),
    }
}

fn point(spec: &SweepSpec, v: f64) -> Result<Point> {
    let alpha = match spec.parameter {
        Parameter::Alpha => v,
        _ => spec.alpha.unwrap_or(0.5),
    };
    let gamma = match spec.parameter {
        Parameter::Gamma => Some(v),
        _ => spec.gamma,
    };
    let samples = match spec.parameter {
        Parameter::Samples if v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => v as u64,
        Parameter::Samples => {
            return Err(CliError::Usage(format!("sample count {v} is not a positive integer")))
        }
        _ => spec.samples.unwrap_or(100_000),
    };
    let mut config = EstimatorConfig::new(samples, spec.seed.unwrap_or(0));
    if let Some(c) = spec.chunk_size {
        config = config.with_chunk_size(c);
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Point {
        mean: input::mean(&spec.mean, alpha)?,
        gamma,
        config,
    })
}

fn univariate(g: &Gaussian) -> (f64, f64) {
    (g.mu()[0], g.sigma()[(0, 0)].sqrt())
}

fn row(pair: &Pair, q: Quantity, pt: &Point) -> Result<(f64, Option<f64>, Option<f64>)> {
    let m = &pt.mean;
    let a = m.alpha();
    Ok(match (q, pair) {
        (Quantity::GammaDivergence, Pair::Discrete(p1, p2)) => (
            estimate::gamma_divergence_discrete(p1, p2, pt.gamma()?, NATS)?,
            None,
            Some(dd::kl(p1, p2, NATS)?),
        ),
        (Quantity::GammaDivergence, Pair::Gaussian(g1, g2)) => {
            let fam = GaussianFamily::new(g1.dim());
            let v = estimate::gamma_divergence_ef(
                &fam,
                &ScaledPoint::normalized(fam.natural(g1)?),
                &ScaledPoint::normalized(fam.natural(g2)?),
                pt.gamma()?,
            )?;
            (v, None, Some(ga::kl_gaussian(g1, g2)?))
        }
        (Quantity::JsMGamma, Pair::Discrete(p1, p2)) => (
            estimate::js_m_gamma_discrete(p1, p2, m, pt.gamma()?, NATS)?,
            None,
            Some(dd::js_m(p1, p2, m, 0.5, NATS)?),
        ),
        (Quantity::JsMGamma, Pair::Gaussian(g1, g2)) if pt.is_geometric() => {
            let fam = GaussianFamily::new(g1.dim());
            let v = estimate::js_g_gamma_ef(&fam, &fam.natural(g1)?, &fam.natural(g2)?, a, pt.gamma()?)?;
            (v, None, Some(ga::gjsd_gaussian(g1, g2, a, 0.5)?))
        }
        (Quantity::JsMGamma, Pair::Gaussian(g1, g2)) if g1.dim() == 1 => {
            let ((m1, s1), (m2, s2)) = (univariate(g1), univariate(g2));
            let q = Quadrature::for_normals(m1, s1, m2, s2);
            let (n1, n2) = (Normal1d::new(m1, s1)?, Normal1d::new(m2, s2)?);
            (estimate::js_m_gamma(&n1, &n2, m, pt.gamma()?, &q)?, None, None)
        }
        (Quantity::EstimateZ, Pair::Discrete(p1, p2)) => {
            let (c1, c2) = (Categorical::new(p1)?, Categorical::new(p2)?);
            let e = estimate::estimate_z(&c1, &c2, m, Proposal::FirstArgument, &pt.config)?;
            (e.value, Some(e.std_error), Some(dd::m_mixture(p1, p2, m, false)?.1))
        }
        (Quantity::EstimateZ, Pair::Gaussian(g1, g2)) => {
            let e = estimate::estimate_z(g1, g2, m, Proposal::FirstArgument, &pt.config)?;
            let oracle = match m.kind() {
                MeanKind::Geometric => Some((-ga::bhattacharyya_gaussian(g1, g2, a)?).exp()),
                MeanKind::Arithmetic => Some(1.0),
                _ => None,
            };
            (e.value, Some(e.std_error), oracle)
        }
        (Quantity::JsMExtended, Pair::Discrete(p1, p2)) => {
            let (c1, c2) = (Categorical::new(p1)?, Categorical::new(p2)?);
            let e = estimate::estimate_js_m_extended(&c1, &c2, m, &pt.config)?;
            (e.value, Some(e.std_error), Some(dd::js_m_extended(p1, p2, m, 0.5, NATS)?))
        }
        (Quantity::JsMExtended, Pair::Gaussian(g1, g2)) => {
            let e = estimate::estimate_js_m_extended(g1, g2, m, &pt.config)?;
            let oracle = if pt.is_geometric() {
                Some(ga::gjsd_extended_gaussian_skew(g1, g2, a, 0.5)?)
            } else {
                None
            };
            (e.value, Some(e.std_error), oracle)
        }
        (Quantity::Bhattacharyya, Pair::Discrete(p1, p2)) => {
            (dd::bhattacharyya(p1, p2, a, NATS)?, None, None)
        }
        (Quantity::Bhattacharyya, Pair::Gaussian(g1, g2)) => {
            let v = ga::bhattacharyya_gaussian(g1, g2, a)?;
            let oracle = if g1.dim() == 1 {
                let ((m1, s1), (m2, s2)) = (univariate(g1), univariate(g2));
                let (l1, l2) = (estimate::normal_log_density(m1, s1), estimate::normal_log_density(m2, s2));
                let q = Quadrature::for_normals(m1, s1, m2, s2);
                Some(-q.integrate(|x| (a * l1(&x) + (1.0 - a) * l2(&x)).exp())?.ln())
            } else {
                None
            };
            (v, None, oracle)
        }
        (Quantity::JsMGamma, Pair::Gaussian(..)) => {
            return Err(CliError::Usage(
                "js_m_gamma for Gaussians needs the geometric mean or d = 1".into(),
            ))
        }
    })
}

pub fn run(spec: &SweepSpec) -> Result<Vec<Row>> {
    let pair = pair(spec)?;
    spec.values
        .iter()
        .map(|&v| {
            let (value, std_error, oracle) = row(&pair, spec.quantity, &point(spec, v)?)?;
            Ok(Row {
                param: v,
                value,
                std_error,
                oracle,
                abs_error: oracle.map(|o| (value - o).abs()),
            })
        })
        .collect()
}

pub fn write_csv(rows: &[Row], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(json: &str) -> SweepSpec {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn gamma_sweep_error_decreases() {
        let s = spec(
            r#"{"parameter": "gamma", "values": [1e-2, 1e-3, 1e-4], "quantity": "gamma_divergence",
                "p1": {"gaussian": {"mu": [0.0], "sigma": [[1.0]]}},
                "p2": {"gaussian": {"mu": [1.0], "sigma": [[2.0]]}}}"#,
        );
        let rows = run(&s).unwrap();
        let errs: Vec<f64> = rows.iter().map(|r| r.abs_error.unwrap()).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn empty_grid_writes_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "param,value,std_error,oracle,abs_error\n");
    }

    #[test]
    fn rejects_mixed_inputs_and_bad_samples() {
        let s = spec(
            r#"{"parameter": "alpha", "values": [0.5], "quantity": "bhattacharyya",
                "p1": {"discrete": [0.5, 0.5]}, "p2": {"gaussian": {"mu": [0.0], "sigma": [[1.0]]}}}"#,
        );
        assert!(matches!(run(&s), Err(CliError::Usage(_))));
        let s = spec(
            r#"{"parameter": "samples", "values": [10.5], "quantity": "estimate_z",
                "p1": {"discrete": [0.5, 0.5]}, "p2": {"discrete": [0.2, 0.8]}}"#,
        );
        assert!(matches!(run(&s), Err(CliError::Usage(_))));
    }
}
