//! The `compute` subcommand.

use clap::ValueEnum;
use geojsd::discrete::{self as dd, CHERNOFF_TOL};
use geojsd::estimate::{self, Categorical, EstimatorConfig, MonteCarlo, Normal1d, ScaledPoint};
use geojsd::expfam::GaussianFamily;
use geojsd::gaussian as ga;
use geojsd::means::{MeanKind, MeanSpec};
use geojsd::quadrature::Quadrature;
use geojsd::{Density, DivergenceResult, Gaussian, LogBase, Method};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Divergence {
    Kl,
    KlPlus,
    Js,
    JsM,
    JsMPlus,
    /// `js_m` with the geometric mean.
    Gjsd,
    /// `js_m_plus` with the geometric mean.
    GjsdPlus,
    Jeffreys,
    Bhattacharyya,
    Bc,
    Chernoff,
    Tv,
    Taneja,
    KlMixtures,
    Gamma,
    JsMGamma,
}

pub enum Inputs {
    Discrete(Density, Density),
    Gaussian(Gaussian, Gaussian),
}

pub struct ComputeRequest {
    pub divergence: Divergence,
    pub mean: MeanSpec<f64>,
    /// Source mean of `kl_mixtures`.
    pub from_mean: MeanSpec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
    pub base: LogBase,
    pub inputs: Inputs,
    pub estimator: Option<EstimatorConfig>,
}

fn unsupported(div: Divergence, why: &str) -> CliError {
    CliError::Usage(format!("{div:?} {why}"))
}

impl ComputeRequest {
    fn gamma(&self) -> Result<f64> {
        self.gamma
            .ok_or_else(|| CliError::Usage(format!("{:?} requires --gamma", self.divergence)))
    }

    fn mean(&self) -> MeanSpec<f64> {
        match self.divergence {
            Divergence::Gjsd | Divergence::GjsdPlus => {
                MeanSpec::new(MeanKind::Geometric, self.mean.alpha()).expect("alpha already validated")
            }
            _ => self.mean,
        }
    }

    pub fn run(&self) -> Result<DivergenceResult> {
        match &self.inputs {
            Inputs::Discrete(p1, p2) => self.discrete(p1, p2),
            Inputs::Gaussian(g1, g2) => self.gaussian(g1, g2),
        }
    }

    fn discrete(&self, p1: &Density, p2: &Density) -> Result<DivergenceResult> {
        use Divergence::*;
        let (b, m) = (self.base, self.mean());
        if let (Some(cfg), JsMPlus | GjsdPlus) = (&self.estimator, self.divergence) {
            check_balanced(self.beta)?;
            let (c1, c2) = (Categorical::new(p1)?, Categorical::new(p2)?);
            return Ok(estimate::estimate_js_m_extended(&c1, &c2, &m, cfg)?.to_result(b));
        }
        let value = match self.divergence {
            Kl => dd::kl(p1, p2, b)?,
            KlPlus => dd::kl_extended(p1, p2, b)?,
            Js => dd::js(p1, p2, b)?,
            JsM | Gjsd => dd::js_m(p1, p2, &m, self.beta, b)?,
            JsMPlus | GjsdPlus => dd::js_m_extended(p1, p2, &m, self.beta, b)?,
            Jeffreys => dd::jeffreys(p1, p2, b)?,
            Bhattacharyya => dd::bhattacharyya(p1, p2, self.alpha, b)?,
            Bc => dd::bhattacharyya_coefficient(p1, p2)?,
            Chernoff => {
                let c = dd::chernoff(p1, p2, CHERNOFF_TOL, b)?;
                return Ok(DivergenceResult::new(c.value, b, Method::Exact).with_alpha_star(c.alpha_star));
            }
            Tv => dd::total_variation(p1, p2)?,
            Taneja => dd::taneja_t(p1, p2, b)?,
            KlMixtures => dd::kl_between_mixtures(p1, p2, &self.from_mean, &m, b)?,
            Gamma => estimate::gamma_divergence_discrete(p1, p2, self.gamma()?, b)?,
            JsMGamma => estimate::js_m_gamma_discrete(p1, p2, &m, self.gamma()?, b)?,
        };
        Ok(DivergenceResult::new(value, b, Method::Exact))
    }

    fn gaussian(&self, g1: &Gaussian, g2: &Gaussian) -> Result<DivergenceResult> {
        use Divergence::*;
        if g1.dim() != g2.dim() {
            return Err(geojsd::DivergenceError::DimensionMismatch {
                expected: g1.dim(),
                got: g2.dim(),
            }
            .into());
        }
        let (b, m, div) = (self.base, self.mean(), self.divergence);
        let geometric = matches!(m.kind(), MeanKind::Geometric);
        let closed = |v: f64| Ok(DivergenceResult::new(b.from_nats(v), b, Method::ClosedForm));

        if let Some(cfg) = &self.estimator {
            if matches!(div, Js | JsMPlus | GjsdPlus) {
                check_balanced(self.beta)?;
                let m = if div == Js { MeanSpec::arithmetic() } else { m };
                return Ok(estimate::estimate_js_m_extended(g1, g2, &m, cfg)?.to_result(b));
            }
        }
        let fam = GaussianFamily::new(g1.dim());
        match div {
            Kl | KlPlus => closed(ga::kl_gaussian(g1, g2)?),
            Jeffreys => closed(ga::jeffreys_gaussian(g1, g2)?),
            Bhattacharyya => closed(ga::bhattacharyya_gaussian(g1, g2, self.alpha)?),
            Bc => Ok(DivergenceResult::new(
                (-ga::bhattacharyya_gaussian(g1, g2, 0.5)?).exp(),
                b,
                Method::ClosedForm,
            )),
            JsM | Gjsd if geometric => closed(ga::gjsd_gaussian(g1, g2, m.alpha(), self.beta)?),
            JsMPlus | GjsdPlus if geometric => {
                closed(ga::gjsd_extended_gaussian_skew(g1, g2, m.alpha(), self.beta)?)
            }
            Tv => {
                if g1.dim() != 1 {
                    return Err(unsupported(div, "for Gaussians is only available in one dimension"));
                }
                let (m1, s1, m2, s2) = univariate(g1, g2);
                Ok(DivergenceResult::new(ga::tv_gaussian_1d(m1, s1, m2, s2)?, b, Method::ClosedForm))
            }
            Gamma => {
                let (t1, t2) = (fam.natural(g1)?, fam.natural(g2)?);
                let v = estimate::gamma_divergence_ef(
                    &fam,
                    &ScaledPoint::normalized(t1),
                    &ScaledPoint::normalized(t2),
                    self.gamma()?,
                )?;
                closed(v)
            }
            JsMGamma if geometric => {
                let (t1, t2) = (fam.natural(g1)?, fam.natural(g2)?);
                closed(estimate::js_g_gamma_ef(&fam, &t1, &t2, m.alpha(), self.gamma()?)?)
            }
            JsMGamma if g1.dim() == 1 => {
                let (m1, s1, m2, s2) = univariate(g1, g2);
                let (n1, n2) = (Normal1d::new(m1, s1)?, Normal1d::new(m2, s2)?);
                let q = Quadrature::for_normals(m1, s1, m2, s2);
                let v = estimate::js_m_gamma(&n1, &n2, &m, self.gamma()?, &q)?;
                Ok(DivergenceResult::new(b.from_nats(v), b, Method::Quadrature))
            }
            JsMGamma => match &self.estimator {
                Some(cfg) => {
                    let mc = MonteCarlo {
                        proposal: g1,
                        config: *cfg,
                    };
                    let v = estimate::js_m_gamma(g1, g2, &m, self.gamma()?, &mc)?;
                    Ok(DivergenceResult::new(b.from_nats(v), b, Method::MonteCarlo))
                }
                None => Err(unsupported(div, "with a non-geometric mean in d > 1 needs --samples")),
            },
            Js | JsMPlus | GjsdPlus => Err(unsupported(div, "for Gaussians needs --samples")),
            Chernoff | Taneja | KlMixtures | JsM | Gjsd => {
                Err(unsupported(div, "has no Gaussian implementation for this mean"))
            }
        }
    }
}

fn univariate(g1: &Gaussian, g2: &Gaussian) -> (f64, f64, f64, f64) {
    (
        g1.mu()[0],
        g1.sigma()[(0, 0)].sqrt(),
        g2.mu()[0],
        g2.sigma()[(0, 0)].sqrt(),
    )
}

fn check_balanced(beta: f64) -> Result<()> {
    if beta == 0.5 {
        Ok(())
    } else {
        Err(CliError::Usage("Monte Carlo estimation supports --beta 0.5 only".into()))
    }
}
