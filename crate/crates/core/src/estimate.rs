//! Stochastic and projective estimators for cases without closed forms.
//!
//! Monte Carlo estimators draw `samples` points in chunks of `chunk_size`.
//! Chunk `c` gets its own ChaCha8 stream (`seed`, stream id `c`), so the
//! per-chunk results do not depend on which thread runs them. Chunk
//! accumulators are merged in chunk order, which makes every estimate
//! bit-identical across thread counts.
//!
//! Densities enter through [`SampledDensity`]: a log-density, possibly
//! unnormalized, plus an optional sampler.
//!
//! The γ-divergence
//!
//! ```text
//! D̃_γ(q1, q2) = log I(q1,q1)/(γ(1+γ)) − log I(q1,q2)/γ + log I(q2,q2)/(1+γ),
//! I(a, b) = ∫ a b^γ
//! ```
//!
//! is invariant under rescaling either argument and tends to `KL(q1, q2)` as
//! `γ → 0` for normalized inputs. That makes it usable with unnormalized
//! mixtures whose normalizer is unknown. The integrals `I` are evaluated in
//! log space by one of several [`Integrator`]s, or in closed form within an
//! exponential family.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base::LogBase;
use crate::discrete::DiscreteDensity;
use crate::error::{DivergenceError, Result};
use crate::expfam::{self, ExpFamily};
use crate::gaussian::GaussianParams;
use crate::means::{MeanKind, MeanSpec};
use crate::quadrature::Quadrature;
use crate::result::{DivergenceResult, Method};
use crate::scalar::Scalar;
use crate::special::normal_log_pdf;

/// Sampling configuration. Identical configurations give bit-identical
/// estimates regardless of `threads`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub threads: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            chunk_size: 4096,
            threads: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(DivergenceError::InvalidConfig("samples must be at least 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(DivergenceError::InvalidConfig("chunk_size must be at least 1".into()));
        }
        Ok(())
    }

    fn chunks(&self) -> u64 {
        self.samples.div_ceil(self.chunk_size)
    }
}

/// A log-density over points of type `P`, possibly unnormalized, with an
/// optional sampler. Proposals must be normalized and samplable.
pub trait SampledDensity<P>: Sync {
    fn log_density(&self, x: &P) -> f64;

    /// One draw, or `None` when the density cannot be sampled.
    fn sample(&self, _rng: &mut ChaCha8Rng) -> Option<P> {
        None
    }
}

/// Log-density given by a closure; not samplable.
pub struct FnDensity<F>(pub F);

impl<P, F: Fn(&P) -> f64 + Sync> SampledDensity<P> for FnDensity<F> {
    fn log_density(&self, x: &P) -> f64 {
        (self.0)(x)
    }
}

/// `N(mean, sd²)` on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal1d {
    mean: f64,
    sd: f64,
}

impl Normal1d {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(DivergenceError::NonPositiveInput(sd));
        }
        if !mean.is_finite() {
            return Err(DivergenceError::InvalidParameter("mean".into()));
        }
        Ok(Self { mean, sd })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }
}

impl SampledDensity<f64> for Normal1d {
    fn log_density(&self, x: &f64) -> f64 {
        normal_log_pdf(*x, self.mean, self.sd)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Option<f64> {
        let z: f64 = StandardNormal.sample(rng);
        Some(self.mean + self.sd * z)
    }
}

impl SampledDensity<Vec<f64>> for GaussianParams<f64> {
    fn log_density(&self, x: &Vec<f64>) -> f64 {
        self.log_pdf(x)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
        let z: Vec<f64> = (0..self.dim()).map(|_| StandardNormal.sample(rng)).collect();
        let l = self.cholesky().factor();
        Some(
            (0..self.dim())
                .map(|i| self.mu()[i] + (0..=i).map(|k| l[(i, k)] * z[k]).sum::<f64>())
                .collect(),
        )
    }
}

/// Discrete density on `0..n`. Samplable only when normalized.
#[derive(Debug, Clone)]
pub struct Categorical {
    log_weights: Vec<f64>,
    sampler: Option<WeightedIndex<f64>>,
}

impl Categorical {
    pub fn new(p: &DiscreteDensity<f64>) -> Result<Self> {
        let sampler = if p.is_normalized() {
            Some(
                WeightedIndex::new(p.weights())
                    .map_err(|e| DivergenceError::InvalidParameter(e.to_string()))?,
            )
        } else {
            None
        };
        Ok(Self {
            log_weights: p.weights().iter().map(|w| w.ln()).collect(),
            sampler,
        })
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }
}

impl SampledDensity<usize> for Categorical {
    fn log_density(&self, x: &usize) -> f64 {
        self.log_weights.get(*x).copied().unwrap_or(f64::NEG_INFINITY)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Option<usize> {
        self.sampler.as_ref().map(|s| s.sample(rng))
    }
}

/// Two-component mixture `w·a + (1−w)·b`. Its log-density is computed with
/// the same code path as the weighted arithmetic mean, so that an arithmetic
/// M-mixture divided by this proposal is exactly 1.
pub struct Mixture<'a, P> {
    a: &'a dyn SampledDensity<P>,
    b: &'a dyn SampledDensity<P>,
    mean: MeanSpec<f64>,
}

impl<'a, P> Mixture<'a, P> {
    pub fn new(a: &'a dyn SampledDensity<P>, b: &'a dyn SampledDensity<P>, weight: f64) -> Result<Self> {
        Ok(Self {
            a,
            b,
            mean: MeanSpec::new(MeanKind::Arithmetic, weight)?,
        })
    }
}

impl<P> SampledDensity<P> for Mixture<'_, P> {
    fn log_density(&self, x: &P) -> f64 {
        self.mean
            .evaluate_log(self.a.log_density(x), self.b.log_density(x))
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Option<P> {
        if rng.gen::<f64>() < self.mean.alpha() {
            self.a.sample(rng)
        } else {
            self.b.sample(rng)
        }
    }
}

/// `λ·q` for `log λ = log_scale`. Not samplable, since the sampler would
/// not match the unnormalized density.
pub struct Scaled<'a, P> {
    pub inner: &'a dyn SampledDensity<P>,
    pub log_scale: f64,
}

impl<P> SampledDensity<P> for Scaled<'_, P> {
    fn log_density(&self, x: &P) -> f64 {
        self.inner.log_density(x) + self.log_scale
    }
}

/// The unnormalized M-mixture `M_α(p1, p2)` as a log-density.
pub struct MMixture<'a, P> {
    pub p1: &'a dyn SampledDensity<P>,
    pub p2: &'a dyn SampledDensity<P>,
    pub mean: MeanSpec<f64>,
}

impl<P> SampledDensity<P> for MMixture<'_, P> {
    fn log_density(&self, x: &P) -> f64 {
        self.mean
            .evaluate_log(self.p1.log_density(x), self.p2.log_density(x))
    }
}

/// Importance-sampling proposal.
pub enum Proposal<'a, P> {
    FirstArgument,
    SecondArgument,
    Custom(&'a dyn SampledDensity<P>),
}

impl<P> Clone for Proposal<'_, P> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<P> Copy for Proposal<'_, P> {}

impl<'a, P> Proposal<'a, P> {
    fn resolve(
        self,
        p1: &'a dyn SampledDensity<P>,
        p2: &'a dyn SampledDensity<P>,
    ) -> &'a dyn SampledDensity<P> {
        match self {
            Proposal::FirstArgument => p1,
            Proposal::SecondArgument => p2,
            Proposal::Custom(r) => r,
        }
    }
}

/// A Monte Carlo estimate in nats with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn to_result(&self, base: LogBase) -> DivergenceResult {
        DivergenceResult::new(base.from_nats(self.value), base, Method::MonteCarlo)
            .with_std_error(base.from_nats(self.std_error))
    }
}

/// Running mean and centered second moment; merged with Chan's formula.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    infinite: bool,
}

impl Moments {
    fn push(&mut self, v: f64) {
        if v == f64::INFINITY {
            self.infinite = true;
            return;
        }
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if other.n == 0 {
            return Self {
                infinite: self.infinite || other.infinite,
                ..self
            };
        }
        if self.n == 0 {
            return Self {
                infinite: self.infinite || other.infinite,
                ..other
            };
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        Self {
            n,
            mean: self.mean + delta * nb / n as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n as f64,
            infinite: self.infinite || other.infinite,
        }
    }

    fn estimate(&self, samples: u64) -> Estimate {
        if self.infinite {
            return Estimate {
                value: f64::INFINITY,
                std_error: f64::INFINITY,
                samples,
            };
        }
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        Estimate {
            value: self.mean,
            std_error: (var / self.n as f64).sqrt(),
            samples,
        }
    }
}

/// Streaming `log Σ exp(v_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LogSum {
    max: f64,
    sum: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

impl LogSum {
    fn push(&mut self, v: f64) {
        self.merge_in(v, 1.0);
    }

    fn merge_in(&mut self, max: f64, sum: f64) {
        if max == f64::NEG_INFINITY {
            return;
        }
        if max > self.max {
            self.sum = self.sum * (self.max - max).exp() + sum;
            self.max = max;
        } else {
            self.sum += sum * (max - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Runs `f(rng, n)` on every chunk and returns the results in chunk order.
fn run_chunks<A, F>(cfg: &EstimatorConfig, stream_base: u64, f: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> Result<A> + Sync,
{
    cfg.validate()?;
    let job = || {
        (0..cfg.chunks())
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(stream_base + c);
                let n = cfg.chunk_size.min(cfg.samples - c * cfg.chunk_size);
                f(&mut rng, n)
            })
            .collect::<Result<Vec<A>>>()
    };
    if cfg.threads == 0 {
        job()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| DivergenceError::InvalidConfig(e.to_string()))?
            .install(job)
    }
}

fn draw<P>(r: &dyn SampledDensity<P>, rng: &mut ChaCha8Rng) -> Result<P> {
    r.sample(rng)
        .ok_or_else(|| DivergenceError::InvalidConfig("proposal has no sampler".into()))
}

/// Mean of a per-sample statistic under draws from `r`.
fn mc_mean<P, F>(cfg: &EstimatorConfig, stream_base: u64, r: &dyn SampledDensity<P>, stat: F) -> Result<Estimate>
where
    F: Fn(&P) -> Result<f64> + Sync,
{
    let parts = run_chunks(cfg, stream_base, |rng, n| {
        let mut acc = Moments::default();
        for _ in 0..n {
            let x = draw(r, rng)?;
            acc.push(stat(&x)?);
        }
        Ok(acc)
    })?;
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(total.estimate(cfg.samples))
}

/// Importance-sampling estimate of `Z_M = ∫ M_α(p1, p2)` with proposal `r`:
/// the mean of `M_α(p1(x), p2(x)) / r(x)`.
pub fn estimate_z<P>(
    p1: &dyn SampledDensity<P>,
    p2: &dyn SampledDensity<P>,
    m: &MeanSpec<f64>,
    proposal: Proposal<'_, P>,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    let r = proposal.resolve(p1, p2);
    mc_mean(cfg, 0, r, |x| {
        let lm = m.evaluate_log(p1.log_density(x), p2.log_density(x));
        let lr = r.log_density(x);
        if lm == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        if !(lr > f64::NEG_INFINITY) {
            return Err(DivergenceError::ProposalSupportViolation);
        }
        Ok((lm - lr).exp())
    })
}

/// Per-sample extended-KL term `(q1/r)·log(q1/M̃) + M̃/r − q1/r`, written as
/// `(q1/r)·(e^d − 1 − d)` with `d = log M̃ − log q1` so that it stays
/// nonnegative when `r = q1`.
fn kl_plus_term(l1: f64, lm: f64, lr: f64) -> Result<f64> {
    if l1 == f64::NEG_INFINITY {
        if lm == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        if !(lr > f64::NEG_INFINITY) {
            return Err(DivergenceError::ProposalSupportViolation);
        }
        return Ok((lm - lr).exp());
    }
    if !(lr > f64::NEG_INFINITY) {
        return Err(DivergenceError::ProposalSupportViolation);
    }
    if lm == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    let d = lm - l1;
    Ok((l1 - lr).exp() * (d.exp_m1() - d))
}

fn kl_extended_stream<P>(
    p1: &dyn SampledDensity<P>,
    p2: &dyn SampledDensity<P>,
    m: &MeanSpec<f64>,
    r: &dyn SampledDensity<P>,
    cfg: &EstimatorConfig,
    stream_base: u64,
) -> Result<Estimate> {
    mc_mean(cfg, stream_base, r, |x| {
        let (l1, l2) = (p1.log_density(x), p2.log_density(x));
        kl_plus_term(l1, m.evaluate_log(l1, l2), r.log_density(x))
    })
}

/// Estimate of `KL⁺(p1, M_α(p1, p2))` against the unnormalized mixture.
/// Finite-sample estimates may dip below zero for custom proposals and are
/// reported as they are.
pub fn estimate_kl_extended<P>(
    p1: &dyn SampledDensity<P>,
    p2: &dyn SampledDensity<P>,
    m: &MeanSpec<f64>,
    proposal: Proposal<'_, P>,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    kl_extended_stream(p1, p2, m, proposal.resolve(p1, p2), cfg, 0)
}

/// Streams for the second half of [`estimate_js_m_extended`] start here.
const SECOND_HALF_STREAM: u64 = 1 << 40;

/// `½(KL⁺(p1, M̃) + KL⁺(p2, M̃))`, each term sampled from its own first
/// argument. Standard errors combine in quadrature.
pub fn estimate_js_m_extended<P>(
    p1: &dyn SampledDensity<P>,
    p2: &dyn SampledDensity<P>,
    m: &MeanSpec<f64>,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    let a = kl_extended_stream(p1, p2, m, p1, cfg, 0)?;
    let swapped = m.swapped();
    let b = kl_extended_stream(p2, p1, &swapped, p2, cfg, SECOND_HALF_STREAM)?;
    Ok(Estimate {
        value: 0.5 * (a.value + b.value),
        std_error: 0.5 * a.std_error.hypot(b.std_error),
        samples: a.samples + b.samples,
    })
}

/// Evaluates `log ∫ exp(g_k)` for several log-integrands at once.
pub trait Integrator<P> {
    fn log_integrals(&self, gs: &[&(dyn Fn(&P) -> f64 + Sync)]) -> Result<Vec<f64>>;
}

impl Integrator<f64> for Quadrature {
    fn log_integrals(&self, gs: &[&(dyn Fn(&f64) -> f64 + Sync)]) -> Result<Vec<f64>> {
        gs.iter().map(|g| self.integrate_log(|x| g(&x))).collect()
    }
}

/// Exact summation over the support `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Summation {
    pub n: usize,
}

impl Integrator<usize> for Summation {
    fn log_integrals(&self, gs: &[&(dyn Fn(&usize) -> f64 + Sync)]) -> Result<Vec<f64>> {
        Ok(gs
            .iter()
            .map(|g| {
                let mut acc = LogSum::default();
                for i in 0..self.n {
                    acc.push(g(&i));
                }
                acc.value()
            })
            .collect())
    }
}

/// Importance sampling with common draws from `proposal` for all integrands.
pub struct MonteCarlo<'a, P> {
    pub proposal: &'a dyn SampledDensity<P>,
    pub config: EstimatorConfig,
}

impl<P> Integrator<P> for MonteCarlo<'_, P> {
    fn log_integrals(&self, gs: &[&(dyn Fn(&P) -> f64 + Sync)]) -> Result<Vec<f64>> {
        let r = self.proposal;
        let parts = run_chunks(&self.config, 0, |rng, n| {
            let mut acc = vec![LogSum::default(); gs.len()];
            for _ in 0..n {
                let x = draw(r, rng)?;
                let lr = r.log_density(&x);
                for (a, g) in acc.iter_mut().zip(gs) {
                    let v = g(&x);
                    if v == f64::NEG_INFINITY {
                        continue;
                    }
                    if !(lr > f64::NEG_INFINITY) {
                        return Err(DivergenceError::ProposalSupportViolation);
                    }
                    a.push(v - lr);
                }
            }
            Ok(acc)
        })?;
        let mut total = vec![LogSum::default(); gs.len()];
        for part in parts {
            for (t, p) in total.iter_mut().zip(part) {
                t.merge_in(p.max, p.sum);
            }
        }
        let ln_n = (self.config.samples as f64).ln();
        Ok(total.iter().map(|t| t.value() - ln_n).collect())
    }
}

fn check_gamma<T: Scalar>(gamma: T) -> Result<()> {
    if gamma > T::zero() && gamma.is_finite() {
        Ok(())
    } else {
        Err(DivergenceError::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )))
    }
}

/// Combines `log I(q1,q1)`, `log I(q1,q2)`, `log I(q2,q2)`.
fn gamma_combine<T: Scalar>(gamma: T, l11: T, l12: T, l22: T) -> Result<T> {
    if [l11, l12, l22].iter().any(|&l| l == T::infinity() || l.is_nan()) {
        return Err(DivergenceError::DivergentIntegral);
    }
    if l11 == T::neg_infinity() || l22 == T::neg_infinity() {
        return Err(DivergenceError::ZeroDensity);
    }
    if l12 == T::neg_infinity() {
        return Ok(T::infinity());
    }
    let one = T::one();
    let v = l11 / (gamma * (one + gamma)) - l12 / gamma + l22 / (one + gamma);
    Ok(v.max(T::zero()))
}

/// Projective γ-divergence with the integrals from `integ`.
pub fn gamma_divergence<P>(
    q1: &dyn SampledDensity<P>,
    q2: &dyn SampledDensity<P>,
    gamma: f64,
    integ: &dyn Integrator<P>,
) -> Result<f64> {
    check_gamma(gamma)?;
    let g = 1.0 + gamma;
    let i11 = |x: &P| g * q1.log_density(x);
    let i12 = |x: &P| q1.log_density(x) + gamma * q2.log_density(x);
    let i22 = |x: &P| g * q2.log_density(x);
    let l = integ.log_integrals(&[&i11, &i12, &i22])?;
    gamma_combine(gamma, l[0], l[1], l[2])
}

/// Projective M-JSD `½[D̃_γ(p1, M̃) + D̃_γ(p2, M̃)]` with the unnormalized
/// M-mixture `M̃ = M_α(p1, p2)`.
pub fn js_m_gamma<P>(
    p1: &dyn SampledDensity<P>,
    p2: &dyn SampledDensity<P>,
    m: &MeanSpec<f64>,
    gamma: f64,
    integ: &dyn Integrator<P>,
) -> Result<f64> {
    check_gamma(gamma)?;
    let g = 1.0 + gamma;
    let lm = |x: &P| m.evaluate_log(p1.log_density(x), p2.log_density(x));
    let i11 = |x: &P| g * p1.log_density(x);
    let i22 = |x: &P| g * p2.log_density(x);
    let imm = |x: &P| g * lm(x);
    let i1m = |x: &P| p1.log_density(x) + gamma * lm(x);
    let i2m = |x: &P| p2.log_density(x) + gamma * lm(x);
    let l = integ.log_integrals(&[&i11, &i22, &imm, &i1m, &i2m])?;
    let d1 = gamma_combine(gamma, l[0], l[3], l[2])?;
    let d2 = gamma_combine(gamma, l[1], l[4], l[2])?;
    Ok(0.5 * (d1 + d2))
}

fn log_sum<T: Scalar>(terms: impl Iterator<Item = T>) -> T {
    let v: Vec<T> = terms.collect();
    let m = v.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
    if m == T::neg_infinity() {
        return m;
    }
    m + v.iter().fold(T::zero(), |acc, &x| acc + (x - m).exp()).ln()
}

fn ln_or_neg_inf<T: Scalar>(w: T) -> T {
    if w > T::zero() {
        w.ln()
    } else {
        T::neg_infinity()
    }
}

/// γ-divergence between positive measures on a finite support, by exact
/// summation. Generic over the scalar type.
pub fn gamma_divergence_discrete<T: Scalar>(
    q1: &DiscreteDensity<T>,
    q2: &DiscreteDensity<T>,
    gamma: T,
    base: LogBase,
) -> Result<T> {
    check_gamma(gamma)?;
    if q1.len() != q2.len() {
        return Err(DivergenceError::LengthMismatch {
            left: q1.len(),
            right: q2.len(),
        });
    }
    let l1: Vec<T> = q1.weights().iter().map(|&w| ln_or_neg_inf(w)).collect();
    let l2: Vec<T> = q2.weights().iter().map(|&w| ln_or_neg_inf(w)).collect();
    let g = T::one() + gamma;
    let v = gamma_combine(
        gamma,
        log_sum(l1.iter().map(|&a| g * a)),
        log_sum(l1.iter().zip(&l2).map(|(&a, &b)| a + gamma * b)),
        log_sum(l2.iter().map(|&b| g * b)),
    )?;
    Ok(base.from_nats(v))
}

/// Projective M-JSD on a finite support.
pub fn js_m_gamma_discrete<T: Scalar>(
    p1: &DiscreteDensity<T>,
    p2: &DiscreteDensity<T>,
    m: &MeanSpec<T>,
    gamma: T,
    base: LogBase,
) -> Result<T> {
    check_gamma(gamma)?;
    let (mix, _) = crate::discrete::m_mixture(p1, p2, m, false)?;
    let a = gamma_divergence_discrete(p1, &mix, gamma, base)?;
    let b = gamma_divergence_discrete(p2, &mix, gamma, base)?;
    Ok(T::half() * (a + b))
}

/// Member `exp(log_scale) · p_θ` of an exponential family.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPoint<T> {
    pub theta: Vec<T>,
    pub log_scale: T,
}

impl<T: Scalar> ScaledPoint<T> {
    pub fn normalized(theta: Vec<T>) -> Self {
        Self {
            theta,
            log_scale: T::zero(),
        }
    }
}

/// `log ∫ q_a q_b^γ = s_a + γ s_b + F(θ_a + γθ_b) − F(θ_a) − γF(θ_b)`.
fn log_i_ef<T: Scalar, F: ExpFamily<T> + ?Sized>(
    fam: &F,
    a: &ScaledPoint<T>,
    b: &ScaledPoint<T>,
    gamma: T,
) -> Result<T> {
    let sum: Vec<T> = a.theta.iter().zip(&b.theta).map(|(&x, &y)| x + gamma * y).collect();
    if !fam.in_domain(&sum) {
        return Err(DivergenceError::DivergentIntegral);
    }
    Ok(a.log_scale + gamma * b.log_scale + fam.cumulant(&sum)?
        - fam.cumulant(&a.theta)?
        - gamma * fam.cumulant(&b.theta)?)
}

/// Closed-form γ-divergence between scaled members of one exponential
/// family, in nats.
pub fn gamma_divergence_ef<T: Scalar, F: ExpFamily<T> + ?Sized>(
    fam: &F,
    q1: &ScaledPoint<T>,
    q2: &ScaledPoint<T>,
    gamma: T,
) -> Result<T> {
    check_gamma(gamma)?;
    for q in [q1, q2] {
        if !fam.in_domain(&q.theta) {
            return Err(DivergenceError::DomainViolation);
        }
    }
    gamma_combine(
        gamma,
        log_i_ef(fam, q1, q1, gamma)?,
        log_i_ef(fam, q1, q2, gamma)?,
        log_i_ef(fam, q2, q2, gamma)?,
    )
}

/// Closed-form projective G-JSD within an exponential family, using the
/// unnormalized geometric mixture `exp(−J_{F,α}) · p_{αθ1+(1−α)θ2}`.
pub fn js_g_gamma_ef<T: Scalar, F: ExpFamily<T> + ?Sized>(
    fam: &F,
    t1: &[T],
    t2: &[T],
    alpha: T,
    gamma: T,
) -> Result<T> {
    let (theta, log_scale) = expfam::geometric_mixture_ef(fam, t1, t2, alpha)?;
    let mix = ScaledPoint { theta, log_scale };
    let a = gamma_divergence_ef(fam, &ScaledPoint::normalized(t1.to_vec()), &mix, gamma)?;
    let b = gamma_divergence_ef(fam, &ScaledPoint::normalized(t2.to_vec()), &mix, gamma)?;
    Ok(T::half() * (a + b))
}

/// Log-density of `N(mean, sd²)` as a closure-friendly helper.
pub fn normal_log_density(mean: f64, sd: f64) -> impl Fn(&f64) -> f64 + Sync {
    move |x| normal_log_pdf(*x, mean, sd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete;
    use crate::expfam::{GaussianFamily, PolynomialFamily};
    use crate::gaussian;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn log_mean_exp(values: &[f64]) -> f64 {
        use crate::means::log_add_exp;
        let ls = values.iter().fold(f64::NEG_INFINITY, |acc, &v| log_add_exp(acc, v));
        ls - (values.len() as f64).ln()
    }

    fn within(e: &Estimate, target: f64) -> bool {
        (e.value - target).abs() <= 4.0 * e.std_error
    }

    fn n(m: f64, s: f64) -> Normal1d {
        Normal1d::new(m, s).unwrap()
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut seq = Moments::default();
        xs.iter().for_each(|&x| seq.push(x));
        let merged = xs
            .chunks(64)
            .map(|c| {
                let mut m = Moments::default();
                c.iter().for_each(|&x| m.push(x));
                m
            })
            .fold(Moments::default(), Moments::merge);
        assert_eq!(merged.n, seq.n);
        assert_relative_eq!(merged.mean, seq.mean, max_relative = 1e-13);
        assert_relative_eq!(merged.m2, seq.m2, max_relative = 1e-12);
        assert_relative_eq!(log_mean_exp(&[0.0, 2f64.ln()]), 1.5f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn config_validation() {
        let p = n(0.0, 1.0);
        let g = MeanSpec::geometric();
        let bad = EstimatorConfig::new(0, 1);
        assert!(estimate_z(&p, &p, &g, Proposal::FirstArgument, &bad).is_err());
        let bad = EstimatorConfig::new(10, 1).with_chunk_size(0);
        assert!(estimate_z(&p, &p, &g, Proposal::FirstArgument, &bad).is_err());
        let unsampled = FnDensity(normal_log_density(0.0, 1.0));
        let ok = EstimatorConfig::new(10, 1);
        assert!(matches!(
            estimate_z(&unsampled, &p, &g, Proposal::FirstArgument, &ok),
            Err(DivergenceError::InvalidConfig(_))
        ));
    }

    #[test]
    fn identical_densities_give_unit_z() {
        let p = n(0.3, 1.4);
        let cfg = EstimatorConfig::new(5000, 7);
        for m in [MeanSpec::geometric(), MeanSpec::min(), MeanSpec::power(2.0).unwrap()] {
            let e = estimate_z(&p, &p, &m, Proposal::FirstArgument, &cfg).unwrap();
            assert_eq!(e.value, 1.0);
            assert_eq!(e.std_error, 0.0);
            let k = estimate_kl_extended(&p, &p, &m, Proposal::FirstArgument, &cfg).unwrap();
            assert_eq!(k.value, 0.0);
        }
    }

    #[test]
    fn arithmetic_mixture_proposal_has_zero_variance() {
        let (p1, p2) = (n(0.0, 1.0), n(2.0, 0.5));
        let r = Mixture::new(&p1, &p2, 0.3).unwrap();
        let m = MeanSpec::new(MeanKind::Arithmetic, 0.3).unwrap();
        let e = estimate_z(&p1, &p2, &m, Proposal::Custom(&r), &EstimatorConfig::new(20_000, 3)).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn geometric_z_matches_bhattacharyya() {
        let (p1, p2) = (n(0.0, 1.0), n(1.0, 1.0));
        let e = estimate_z(&p1, &p2, &MeanSpec::geometric(), Proposal::FirstArgument, &EstimatorConfig::new(200_000, 11))
            .unwrap();
        assert!(within(&e, (-0.125f64).exp()), "{e:?}");
    }

    #[test]
    fn kl_extended_matches_closed_form() {
        let (p1, p2) = (n(0.0, 1.0), n(1.0, 2f64.sqrt()));
        let (g1, g2) = (
            GaussianParams::univariate(0.0, 1.0).unwrap(),
            GaussianParams::univariate(1.0, 2.0).unwrap(),
        );
        let oracle = gaussian::kl_extended_to_geometric(&g1, &g2, 0.5).unwrap();
        let e = estimate_kl_extended(&p1, &p2, &MeanSpec::geometric(), Proposal::FirstArgument, &EstimatorConfig::new(200_000, 5))
            .unwrap();
        assert!(within(&e, oracle), "{e:?} vs {oracle}");
        // the multivariate sampler agrees with the univariate one
        let e2 = estimate_kl_extended(&g1, &g2, &MeanSpec::geometric(), Proposal::FirstArgument, &EstimatorConfig::new(200_000, 5))
            .unwrap();
        assert!(within(&e2, oracle), "{e2:?} vs {oracle}");
    }

    #[test]
    fn quadrupling_samples_halves_std_error() {
        let (p1, p2) = (n(0.0, 1.0), n(1.0, 1.0));
        let g = MeanSpec::geometric();
        let se = |s| {
            estimate_kl_extended(&p1, &p2, &g, Proposal::FirstArgument, &EstimatorConfig::new(s, 9))
                .unwrap()
                .std_error
        };
        let ratio = se(20_000) / se(80_000);
        assert!((ratio - 2.0).abs() <= 0.4, "{ratio}");
    }

    #[test]
    fn discrete_pair_as_categoricals() {
        let d1 = DiscreteDensity::normalized(vec![0.1, 0.4, 0.2, 0.3]).unwrap();
        let d2 = DiscreteDensity::normalized(vec![0.3, 0.1, 0.5, 0.1]).unwrap();
        let (c1, c2) = (Categorical::new(&d1).unwrap(), Categorical::new(&d2).unwrap());
        let g = MeanSpec::geometric();
        let exact = discrete::js_m_extended(&d1, &d2, &g, 0.5, LogBase::Nats).unwrap();
        let e = estimate_js_m_extended(&c1, &c2, &g, &EstimatorConfig::new(100_000, 2)).unwrap();
        assert!(within(&e, exact), "{e:?} vs {exact}");
        let z = estimate_z(&c1, &c2, &g, Proposal::SecondArgument, &EstimatorConfig::new(50_000, 2)).unwrap();
        let bc = discrete::bhattacharyya_coefficient(&d1, &d2).unwrap();
        assert!(within(&z, bc));
        let unnorm = Categorical::new(&DiscreteDensity::positive(vec![1.0, 2.0]).unwrap()).unwrap();
        assert!(unnorm.sample(&mut ChaCha8Rng::seed_from_u64(0)).is_none());
    }

    #[test]
    fn deterministic_across_threads() {
        let (p1, p2) = (n(0.0, 1.0), n(1.0, 1.0));
        let g = MeanSpec::geometric();
        let cfg = EstimatorConfig::new(30_000, 42).with_chunk_size(1000);
        let one = estimate_js_m_extended(&p1, &p2, &g, &cfg.with_threads(1)).unwrap();
        let eight = estimate_js_m_extended(&p1, &p2, &g, &cfg.with_threads(8)).unwrap();
        assert_eq!(one.value.to_bits(), eight.value.to_bits());
        assert_eq!(one.std_error.to_bits(), eight.std_error.to_bits());
        let other = estimate_js_m_extended(&p1, &p2, &g, &EstimatorConfig::new(30_000, 43)).unwrap();
        assert_ne!(one.value, other.value);
    }

    struct Truncated;

    impl SampledDensity<f64> for Truncated {
        fn log_density(&self, x: &f64) -> f64 {
            if *x < 0.0 {
                f64::NEG_INFINITY
            } else {
                normal_log_pdf(*x, 0.0, 1.0) + 2f64.ln()
            }
        }

        fn sample(&self, rng: &mut ChaCha8Rng) -> Option<f64> {
            Some(StandardNormal.sample(rng))
        }
    }

    #[test]
    fn proposal_support_violation() {
        let p = n(0.0, 1.0);
        let err = estimate_kl_extended(&p, &p, &MeanSpec::geometric(), Proposal::Custom(&Truncated), &EstimatorConfig::new(100, 1))
            .unwrap_err();
        assert_eq!(err, DivergenceError::ProposalSupportViolation);
    }

    fn gauss_points() -> (GaussianFamily, Vec<f64>, Vec<f64>) {
        let fam = GaussianFamily::univariate();
        let t1 = fam.natural(&GaussianParams::univariate(0.0, 1.0).unwrap()).unwrap();
        let t2 = fam.natural(&GaussianParams::univariate(1.0, 2.0).unwrap()).unwrap();
        (fam, t1, t2)
    }

    #[test]
    fn gamma_divergence_is_projective() {
        let (fam, t1, t2) = gauss_points();
        let a = ScaledPoint::normalized(t1.clone());
        let b = ScaledPoint::normalized(t2.clone());
        let base = gamma_divergence_ef(&fam, &a, &b, 0.5).unwrap();
        let scaled = gamma_divergence_ef(
            &fam,
            &ScaledPoint { log_scale: 2f64.ln(), ..a.clone() },
            &ScaledPoint { log_scale: 3f64.ln(), ..b.clone() },
            0.5,
        )
        .unwrap();
        assert_abs_diff_eq!(base, scaled, epsilon = 1e-10);
        assert_abs_diff_eq!(gamma_divergence_ef(&fam, &a, &a, 0.5).unwrap(), 0.0, epsilon = 1e-12);

        let (q1, q2) = (n(0.0, 1.0), n(1.0, 2f64.sqrt()));
        let quad = Quadrature::for_normals(0.0, 1.0, 1.0, 2f64.sqrt());
        let plain = gamma_divergence(&q1, &q2, 0.5, &quad).unwrap();
        assert_abs_diff_eq!(plain, base, epsilon = 1e-8);
        let s1 = Scaled { inner: &q1, log_scale: 2f64.ln() };
        let s2 = Scaled { inner: &q2, log_scale: 3f64.ln() };
        assert_abs_diff_eq!(gamma_divergence(&s1, &s2, 0.5, &quad).unwrap(), plain, epsilon = 1e-10);

        let d1 = DiscreteDensity::<f64>::normalized(vec![0.2, 0.5, 0.3]).unwrap();
        let d2 = DiscreteDensity::normalized(vec![0.6, 0.1, 0.3]).unwrap();
        let x = gamma_divergence_discrete(&d1, &d2, 0.7, LogBase::Nats).unwrap();
        let y = gamma_divergence_discrete(&d1.scaled(2.0).unwrap(), &d2.scaled(3.0).unwrap(), 0.7, LogBase::Nats)
            .unwrap();
        assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        let (c1, c2) = (Categorical::new(&d1).unwrap(), Categorical::new(&d2).unwrap());
        let z = gamma_divergence(&c1, &c2, 0.7, &Summation { n: 3 }).unwrap();
        assert_abs_diff_eq!(x, z, epsilon = 1e-12);
    }

    #[test]
    fn gamma_to_zero_recovers_kl() {
        let (fam, t1, t2) = gauss_points();
        let (g1, g2) = (
            GaussianParams::univariate(0.0, 1.0).unwrap(),
            GaussianParams::univariate(1.0, 2.0).unwrap(),
        );
        let kl = gaussian::kl_gaussian(&g1, &g2).unwrap();
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&g| {
                let d = gamma_divergence_ef(
                    &fam,
                    &ScaledPoint::normalized(t1.clone()),
                    &ScaledPoint::normalized(t2.clone()),
                    g,
                )
                .unwrap();
                (d - kl).abs()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[1] < 1e-3);
    }

    #[test]
    fn projective_js_approximates_js_m() {
        let d1 = DiscreteDensity::<f64>::normalized(vec![0.2, 0.5, 0.3]).unwrap();
        let d2 = DiscreteDensity::normalized(vec![0.6, 0.1, 0.3]).unwrap();
        let g = MeanSpec::geometric();
        let exact = discrete::js_m(&d1, &d2, &g, 0.5, LogBase::Nats).unwrap();
        let approx = js_m_gamma_discrete(&d1, &d2, &g, 1e-3, LogBase::Nats).unwrap();
        assert!((approx - exact).abs() < 5e-3);
        assert_abs_diff_eq!(js_m_gamma_discrete(&d1, &d1, &g, 1e-3, LogBase::Nats).unwrap(), 0.0, epsilon = 1e-12);

        let (g1, g2) = (
            GaussianParams::univariate(0.0, 1.0).unwrap(),
            GaussianParams::univariate(1.0, 2.0).unwrap(),
        );
        let target = gaussian::gjsd_gaussian(&g1, &g2, 0.5, 0.5).unwrap();
        let (q1, q2) = (n(0.0, 1.0), n(1.0, 2f64.sqrt()));
        let quad = Quadrature::for_normals(0.0, 1.0, 1.0, 2f64.sqrt());
        let v = js_m_gamma(&q1, &q2, &g, 1e-3, &quad).unwrap();
        assert!((v - target).abs() < 5e-3, "{v} vs {target}");
        let (fam, t1, t2) = gauss_points();
        let w = js_g_gamma_ef(&fam, &t1, &t2, 0.5, 1e-3).unwrap();
        assert_abs_diff_eq!(v, w, epsilon = 1e-6);

        let mix = Mixture::new(&q1, &q2, 0.5).unwrap();
        let mc = MonteCarlo {
            proposal: &mix,
            config: EstimatorConfig::new(200_000, 4),
        };
        let u = js_m_gamma(&q1, &q2, &g, 0.1, &mc).unwrap();
        let exact_u = js_g_gamma_ef(&fam, &t1, &t2, 0.5, 0.1).unwrap();
        assert!((u - exact_u).abs() < 5e-3, "{u} vs {exact_u}");
    }

    #[test]
    fn polynomial_family_through_quadrature() {
        let fam = PolynomialFamily::new(4).unwrap();
        let th1 = [0.3, -0.5, 0.1, -0.2];
        let th2 = [-0.2, -0.8, 0.0, -0.1];
        let q1 = FnDensity(move |x: &f64| fam.log_unnormalized(&th1, *x));
        let q2 = FnDensity(move |x: &f64| fam.log_unnormalized(&th2, *x));
        let quad = Quadrature::new(-12.0, 12.0);
        let d = gamma_divergence(&q1, &q2, 0.2, &quad).unwrap();
        assert!(d > 0.0);
        assert_abs_diff_eq!(gamma_divergence(&q1, &q1, 0.2, &quad).unwrap(), 0.0, epsilon = 1e-10);
        let s = Scaled { inner: &q1, log_scale: -5.0 };
        assert_abs_diff_eq!(gamma_divergence(&s, &q2, 0.2, &quad).unwrap(), d, epsilon = 1e-10);
        let g = MeanSpec::geometric();
        assert!(js_m_gamma(&q1, &q2, &g, 0.2, &quad).unwrap() > 0.0);
    }

    #[test]
    fn divergent_exp_family_integral() {
        let fam = crate::expfam::CategoricalFamily::new(3).unwrap();
        let a = ScaledPoint::normalized(vec![0.1, -0.2]);
        let b = ScaledPoint::normalized(vec![0.5, 0.4]);
        assert!(gamma_divergence_ef(&fam, &a, &b, 0.3).unwrap() > 0.0);
        assert!(gamma_divergence_ef(&fam, &a, &b, -0.3).is_err());
    }
}
