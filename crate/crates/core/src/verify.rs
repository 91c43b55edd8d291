//! Self-check suites over random and fixed inputs.
//!
//! Each suite returns a [`SuiteReport`] with one [`Check`] per property.
//! A check records the number of cases, the worst observed residual or
//! violation, and the tolerance it was held to. Reports serialize to JSON.
//!
//! | Suite | Contents |
//! |-------|----------|
//! | `identities` | gap, Jeffreys–Bhattacharyya forms, regularization, cross-entropy, f-divergence form, Chernoff equalizer |
//! | `bounds` | total-variation bounds on `Z`, ordering of divergences, information monotonicity |
//! | `counterexamples` | triangle-inequality failures of the square-rooted divergences |
//! | `gaussian_oracle` | closed forms against quadrature, two-route agreement, affine invariance |
//! | `mc_convergence` | Monte Carlo accuracy, `1/√s` rate, determinism, γ-approximation |
//!
//! Gap and identity residuals are always computed in nats.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

use crate::base::LogBase;
use crate::discrete::{self as dd, DiscreteDensity, FGenerator};
use crate::error::{DivergenceError, Result};
use crate::estimate::{self, EstimatorConfig, Normal1d, ScaledPoint};
use crate::expfam::{bregman, skew_jensen, GaussianFamily};
use crate::gaussian::{self as ga, GaussianParams};
use crate::linalg::Matrix;
use crate::means::{MeanKind, MeanSpec};
use crate::quadrature::Quadrature;

const NATS: LogBase = LogBase::Nats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Bounds,
    Counterexamples,
    GaussianOracle,
    McConvergence,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 5] = [
        Suite::Identities,
        Suite::Bounds,
        Suite::Counterexamples,
        Suite::GaussianOracle,
        Suite::McConvergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Bounds => "bounds",
            Suite::Counterexamples => "counterexamples",
            Suite::GaussianOracle => "gaussian_oracle",
            Suite::McConvergence => "mc_convergence",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = DivergenceError;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        [Suite::All]
            .into_iter()
            .chain(Suite::INDIVIDUAL)
            .find(|x| x.name() == norm)
            .ok_or_else(|| DivergenceError::InvalidParameter(format!("unknown suite `{s}`")))
    }
}

/// Case counts and seeds for the suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub pairs: usize,
    pub coarse_cases: usize,
    pub chernoff_cases: usize,
    pub gaussian_cases: usize,
    pub mc_samples: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            pairs: 1000,
            coarse_cases: 500,
            chernoff_cases: 100,
            gaussian_cases: 20,
            mc_samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// Largest residual, or most negative slack for inequalities.
    pub worst: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    /// Wall-clock time; left out of the JSON so reports are reproducible.
    #[serde(skip)]
    pub elapsed_ms: f64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Accumulates the worst residual of an equality check.
struct Residual {
    name: &'static str,
    tol: f64,
    worst: f64,
    cases: usize,
    detail: String,
}

impl Residual {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            worst: 0.0,
            cases: 0,
            detail: String::new(),
        }
    }

    fn record(&mut self, got: f64, want: f64, ctx: impl FnOnce() -> String) {
        self.cases += 1;
        let r = if got == want { 0.0 } else { (got - want).abs() };
        if !(r <= self.worst) {
            self.worst = if r.is_nan() { f64::INFINITY } else { r };
            if !(r <= self.tol) {
                self.detail = format!("{}: got {got}, want {want}", ctx());
            }
        }
    }

    fn finish(self) -> Check {
        Check {
            name: self.name.into(),
            passed: self.worst <= self.tol,
            cases: self.cases,
            worst: self.worst,
            tolerance: self.tol,
            detail: self.detail,
        }
    }
}

/// Accumulates the most negative slack of an inequality `lhs ≤ rhs`.
struct Slack {
    name: &'static str,
    tol: f64,
    worst: f64,
    cases: usize,
    detail: String,
}

impl Slack {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            worst: f64::INFINITY,
            cases: 0,
            detail: String::new(),
        }
    }

    fn le(&mut self, lhs: f64, rhs: f64, ctx: impl FnOnce() -> String) {
        self.cases += 1;
        let s = rhs - lhs;
        let s = if s.is_nan() { f64::NEG_INFINITY } else { s };
        if s < self.worst {
            self.worst = s;
            if s < -self.tol {
                self.detail = format!("{}: {lhs} > {rhs}", ctx());
            }
        }
    }

    fn finish(self) -> Check {
        let worst = if self.cases == 0 { 0.0 } else { self.worst };
        Check {
            name: self.name.into(),
            passed: worst >= -self.tol,
            cases: self.cases,
            worst,
            tolerance: self.tol,
            detail: self.detail,
        }
    }
}

fn error_check(name: &str, e: DivergenceError) -> Check {
    Check {
        name: name.into(),
        passed: false,
        cases: 0,
        worst: f64::INFINITY,
        tolerance: 0.0,
        detail: e.to_string(),
    }
}

/// Random normalized density with Dirichlet(1) weights.
pub fn random_density(rng: &mut impl Rng, n: usize) -> DiscreteDensity<f64> {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    DiscreteDensity::normalize(w).expect("positive weights")
}

fn random_pair(rng: &mut impl Rng) -> (DiscreteDensity<f64>, DiscreteDensity<f64>) {
    let n = rng.gen_range(2..=64);
    (random_density(rng, n), random_density(rng, n))
}

/// The mean kinds exercised by the discrete suites, all balanced.
pub fn mean_corpus() -> Vec<MeanSpec<f64>> {
    let mut v = vec![MeanSpec::arithmetic(), MeanSpec::geometric()];
    for g in [-2.0, -0.5, 0.5, 2.0] {
        v.push(MeanSpec::power(g).expect("finite exponent"));
    }
    v.push(MeanSpec::min());
    v.push(MeanSpec::max());
    v
}

/// Surjective random map from `n` atoms onto `k < n` bins.
pub fn random_binmap(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    let mut map: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
    map.shuffle(rng);
    map
}

pub fn run(suite: Suite, cfg: &VerifyConfig) -> Vec<SuiteReport> {
    match suite {
        Suite::All => Suite::INDIVIDUAL.iter().map(|&s| run_one(s, cfg)).collect(),
        s => vec![run_one(s, cfg)],
    }
}

fn run_one(suite: Suite, cfg: &VerifyConfig) -> SuiteReport {
    let start = Instant::now();
    let checks = match suite {
        Suite::Identities => identities(cfg),
        Suite::Bounds => bounds(cfg),
        Suite::Counterexamples => counterexamples(),
        Suite::GaussianOracle => gaussian_oracle(cfg),
        Suite::McConvergence => mc_convergence(cfg),
        Suite::All => unreachable!("expanded by run"),
    };
    SuiteReport {
        suite,
        passed: checks.iter().all(|c| c.passed),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        checks,
    }
}

fn identities(cfg: &VerifyConfig) -> Vec<Check> {
    match identities_inner(cfg) {
        Ok(c) => c,
        Err(e) => vec![error_check("identities", e)],
    }
}

fn identities_inner(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let means = mean_corpus();
    let g = MeanSpec::geometric();
    let a = MeanSpec::arithmetic();
    let tol = 1e-12;
    let mut gap = Residual::new("gap: JS+_M - JS_M = Z - ln Z - 1", tol);
    let mut jb = Residual::new("JS_G = J/4 - B", tol);
    let mut jbc = Residual::new("JS+_G = J/4 + BC - 1", tol);
    let mut reg = Residual::new("JS_M = JS + KL(A, M)", tol);
    let mut ce = Residual::new("H(p, m) = H(p) + KL(p, m)", tol);
    let mut fgen = Residual::new("I_f[extended G-JSD] = JS+_G", tol);
    let mut taneja = Residual::new("KL(A, G) = T + ln Z_G", tol);
    for case in 0..cfg.pairs {
        let (p1, p2) = random_pair(&mut rng);
        let ctx = || format!("pair {case} (n = {})", p1.len());
        let js = dd::js(&p1, &p2, NATS)?;
        for m in &means {
            let plain = dd::js_m(&p1, &p2, m, 0.5, NATS)?;
            let ext = dd::js_m_extended(&p1, &p2, m, 0.5, NATS)?;
            let (mix, z) = dd::m_mixture(&p1, &p2, m, true)?;
            gap.record(ext - plain, z - z.ln() - 1.0, || format!("{} {m}", ctx()));
            reg.record(plain, js + dd::kl_between_mixtures(&p1, &p2, &a, m, NATS)?, || {
                format!("{} {m}", ctx())
            });
            ce.record(
                dd::cross_entropy(&p1, &mix, NATS)?,
                dd::entropy(&p1, NATS) + dd::kl(&p1, &mix, NATS)?,
                || format!("{} {m}", ctx()),
            );
        }
        let j = dd::jeffreys(&p1, &p2, NATS)?;
        let b = dd::bhattacharyya(&p1, &p2, 0.5, NATS)?;
        let bc = dd::bhattacharyya_coefficient(&p1, &p2)?;
        let jsg = dd::js_m(&p1, &p2, &g, 0.5, NATS)?;
        let jsg_ext = dd::js_m_extended(&p1, &p2, &g, 0.5, NATS)?;
        jb.record(jsg, 0.25 * j - b, ctx);
        jbc.record(jsg_ext, 0.25 * j + bc - 1.0, ctx);
        fgen.record(dd::f_divergence(&p1, &p2, FGenerator::ExtendedGjs, NATS)?, jsg_ext, ctx);
        let (_, zg) = dd::m_mixture(&p1, &p2, &g, false)?;
        taneja.record(
            dd::kl_between_mixtures(&p1, &p2, &a, &g, NATS)?,
            dd::taneja_t(&p1, &p2, NATS)? + zg.ln(),
            ctx,
        );
    }
    let mut checks: Vec<Check> = [gap, jb, jbc, reg, ce, fgen, taneja]
        .into_iter()
        .map(Residual::finish)
        .collect();
    checks.extend(chernoff_equalizer(cfg)?);
    Ok(checks)
}

/// `KL(m_α, p)` for the normalized skew geometric mixture `m_α`.
fn kl_from_geometric(p1: &DiscreteDensity<f64>, p2: &DiscreteDensity<f64>, alpha: f64, p: &DiscreteDensity<f64>) -> Result<f64> {
    let m = MeanSpec::new(MeanKind::Geometric, alpha)?;
    let (mix, _) = dd::m_mixture(p1, p2, &m, true)?;
    dd::kl(&mix, p, NATS)
}

fn chernoff_equalizer(cfg: &VerifyConfig) -> Result<[Check; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xC4E2);
    let mut eq = Residual::new("Chernoff: KL(m*, p1) = KL(m*, p2)", 1e-8);
    let mut opt = Slack::new("Chernoff: B_a* >= B_a on a 1e-3 grid", 1e-12);
    for case in 0..cfg.chernoff_cases {
        let (p1, p2) = random_pair(&mut rng);
        let c = dd::chernoff(&p1, &p2, dd::CHERNOFF_TOL, NATS)?;
        eq.record(
            kl_from_geometric(&p1, &p2, c.alpha_star, &p1)?,
            kl_from_geometric(&p1, &p2, c.alpha_star, &p2)?,
            || format!("pair {case}, alpha* = {}", c.alpha_star),
        );
        let mut best = f64::NEG_INFINITY;
        for k in 1..1000 {
            best = best.max(dd::bhattacharyya(&p1, &p2, k as f64 * 1e-3, NATS)?);
        }
        opt.le(best, c.value, || format!("pair {case}"));
    }
    Ok([eq.finish(), opt.finish()])
}

fn bounds(cfg: &VerifyConfig) -> Vec<Check> {
    match bounds_inner(cfg) {
        Ok(c) => c,
        Err(e) => vec![error_check("bounds", e)],
    }
}

fn bounds_inner(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let means = mean_corpus();
    let tol = 1e-12;
    let mut z_lo = Slack::new("1 - TV <= Z_M", tol);
    let mut z_hi = Slack::new("Z_M <= 1 + TV", tol);
    let mut js_order = Slack::new("JS <= JS_M", tol);
    let mut max_tv = Slack::new("JS+_max <= TV", tol);
    let mut min_j = Slack::new("J/4 - TV <= JS+_min", tol);
    let mut gap = Slack::new("gap >= 0", tol);
    let mut bc = Slack::new("I_f[sqrt] <= 1", tol);
    let (mn, mx) = (MeanSpec::min(), MeanSpec::max());
    for case in 0..cfg.pairs {
        let (p1, p2) = random_pair(&mut rng);
        let ctx = || format!("pair {case} (n = {})", p1.len());
        let tv = dd::total_variation(&p1, &p2)?;
        let js = dd::js(&p1, &p2, NATS)?;
        for m in &means {
            let (_, z) = dd::m_mixture(&p1, &p2, m, false)?;
            z_lo.le(1.0 - tv, z, || format!("{} {m}", ctx()));
            z_hi.le(z, 1.0 + tv, || format!("{} {m}", ctx()));
            js_order.le(js, dd::js_m(&p1, &p2, m, 0.5, NATS)?, || format!("{} {m}", ctx()));
            gap.le(0.0, z - z.ln() - 1.0, || format!("{} {m}", ctx()));
        }
        max_tv.le(dd::js_m_extended(&p1, &p2, &mx, 0.5, NATS)?, tv, ctx);
        let j = dd::jeffreys(&p1, &p2, NATS)?;
        if j.is_finite() {
            min_j.le(0.25 * j - tv, dd::js_m_extended(&p1, &p2, &mn, 0.5, NATS)?, ctx);
        }
        bc.le(dd::f_divergence(&p1, &p2, FGenerator::BhattacharyyaCoeff, NATS)?, 1.0, ctx);
    }
    let mut checks: Vec<Check> = [z_lo, z_hi, js_order, max_tv, min_j, gap, bc]
        .into_iter()
        .map(Slack::finish)
        .collect();
    checks.push(monotonicity(cfg)?);
    Ok(checks)
}

fn monotonicity(cfg: &VerifyConfig) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x3017);
    let mut slack = Slack::new("I_f non-increasing under coarse-graining", 1e-12);
    let gens = [FGenerator::Js, FGenerator::ExtendedGjs, FGenerator::Jeffreys, FGenerator::TanejaT];
    for case in 0..cfg.coarse_cases {
        let n = rng.gen_range(3..=64);
        let k = rng.gen_range(2..n);
        let (p1, p2) = (random_density(&mut rng, n), random_density(&mut rng, n));
        let map = random_binmap(&mut rng, n, k);
        let (c1, c2) = (dd::coarse_grain(&p1, &map)?, dd::coarse_grain(&p2, &map)?);
        for f in gens {
            let fine = dd::f_divergence(&p1, &p2, f, NATS)?;
            let coarse = dd::f_divergence(&c1, &c2, f, NATS)?;
            slack.le(coarse, fine, || format!("case {case}, {f:?}, {n} -> {k} bins"));
        }
    }
    Ok(slack.finish())
}

/// The three densities of the triangle-inequality counterexample.
pub fn counterexample_triple() -> [DiscreteDensity<f64>; 3] {
    [
        DiscreteDensity::normalized(vec![0.55, 0.45]).expect("normalized"),
        DiscreteDensity::normalized(vec![0.002, 0.998]).expect("normalized"),
        DiscreteDensity::normalized(vec![0.045, 0.955]).expect("normalized"),
    ]
}

/// Square roots of `d(p1,p2)`, `d(p1,p3)`, `d(p3,p2)` and the triangle
/// defect `√d(p1,p2) − √d(p1,p3) − √d(p3,p2)`.
pub fn triangle_defect<F>(d: F) -> Result<[f64; 4]>
where
    F: Fn(&DiscreteDensity<f64>, &DiscreteDensity<f64>) -> Result<f64>,
{
    let [p1, p2, p3] = counterexample_triple();
    let a = d(&p1, &p2)?.sqrt();
    let b = d(&p1, &p3)?.sqrt();
    let c = d(&p3, &p2)?.sqrt();
    Ok([a, b, c, a - b - c])
}

/// Reference triples: square roots of `2·JS_G`, `2·JS⁺_G` (the unhalved
/// sums of the two KL terms) and of `KL(A, G)`, with their defects.
pub const COUNTEREXAMPLE_GJSD: [f64; 4] = [1.0263227, 0.63852342, 0.19794622, 0.1898531];
pub const COUNTEREXAMPLE_GJSD_EXTENDED: [f64; 4] = [1.0788275, 0.6691922, 0.1984633, 0.2111719];
pub const COUNTEREXAMPLE_KL_AG: [f64; 4] = [0.5374165, 0.1759400, 0.08485931, 0.2766171];

type DivergenceFn<'a> = Box<dyn Fn(&DiscreteDensity<f64>, &DiscreteDensity<f64>) -> Result<f64> + 'a>;

fn counterexamples() -> Vec<Check> {
    let g = MeanSpec::geometric();
    let a = MeanSpec::arithmetic();
    let cases: [(&'static str, [f64; 4], DivergenceFn); 3] = [
        (
            "sqrt(2 JS_G) triangle defect",
            COUNTEREXAMPLE_GJSD,
            Box::new(|p: &DiscreteDensity<f64>, q: &DiscreteDensity<f64>| Ok(2.0 * dd::js_m(p, q, &g, 0.5, NATS)?)),
        ),
        (
            "sqrt(2 JS+_G) triangle defect",
            COUNTEREXAMPLE_GJSD_EXTENDED,
            Box::new(|p: &DiscreteDensity<f64>, q: &DiscreteDensity<f64>| {
                Ok(2.0 * dd::js_m_extended(p, q, &g, 0.5, NATS)?)
            }),
        ),
        (
            "sqrt(KL(A, G)) triangle defect",
            COUNTEREXAMPLE_KL_AG,
            Box::new(|p: &DiscreteDensity<f64>, q: &DiscreteDensity<f64>| dd::kl_between_mixtures(p, q, &a, &g, NATS)),
        ),
    ];
    let mut out = Vec::new();
    for (name, want, d) in cases {
        match triangle_defect(|p, q| d(p, q)) {
            Ok(got) => {
                let mut r = Residual::new(name, 1e-6);
                for (x, y) in got.iter().zip(&want) {
                    r.record(*x, *y, || format!("{got:?}"));
                }
                out.push(r.finish());
            }
            Err(e) => out.push(error_check(name, e)),
        }
    }
    // The halved definitions violate the triangle inequality as well.
    let mut halved = Slack::new("halved JS_G and JS+_G also violate the triangle inequality", 0.0);
    for ext in [false, true] {
        let d = |p: &DiscreteDensity<f64>, q: &DiscreteDensity<f64>| {
            if ext {
                dd::js_m_extended(p, q, &g, 0.5, NATS)
            } else {
                dd::js_m(p, q, &g, 0.5, NATS)
            }
        };
        match triangle_defect(d) {
            Ok(v) => halved.le(0.0, v[3], || format!("extended = {ext}")),
            Err(e) => return vec![error_check("counterexamples", e)],
        }
    }
    out.push(halved.finish());
    out
}

fn random_gaussian(rng: &mut impl Rng, d: usize) -> Result<GaussianParams<f64>> {
    let mu: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    if d == 1 {
        let sd: f64 = rng.gen_range(0.5..2.0);
        return GaussianParams::univariate(mu[0], sd * sd);
    }
    let a = Matrix::from_row_major(d, (0..d * d).map(|_| 0.7 * rng.sample::<f64, _>(StandardNormal)).collect())?;
    GaussianParams::new(mu, a.matmul(&a.transpose()).add(&Matrix::identity(d).scale(0.5)))
}

fn random_affine(rng: &mut impl Rng, d: usize) -> Result<(Matrix<f64>, Vec<f64>)> {
    let mut a = Matrix::from_row_major(d, (0..d * d).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    for i in 0..d {
        a[(i, i)] += 2.0;
    }
    Ok((a, (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect()))
}

/// Quadrature values of KL, J, B_½, JS_G, JS⁺_G and TV for two univariate
/// normals.
pub fn gaussian_quadrature_oracle(m1: f64, s1: f64, m2: f64, s2: f64) -> Result<[f64; 6]> {
    let q = Quadrature::for_normals(m1, s1, m2, s2);
    let l1 = estimate::normal_log_density(m1, s1);
    let l2 = estimate::normal_log_density(m2, s2);
    let kl12 = q.integrate(|x| l1(&x).exp() * (l1(&x) - l2(&x)))?;
    let kl21 = q.integrate(|x| l2(&x).exp() * (l2(&x) - l1(&x)))?;
    let bc = q.integrate(|x| (0.5 * (l1(&x) + l2(&x))).exp())?;
    let lz = bc.ln();
    let lm = |x: f64| 0.5 * (l1(&x) + l2(&x)) - lz;
    let jsg = q.integrate(|x| 0.5 * l1(&x).exp() * (l1(&x) - lm(x)) + 0.5 * l2(&x).exp() * (l2(&x) - lm(x)))?;
    // extended KL against the unnormalized √(p1 p2)
    let lg = |x: f64| 0.5 * (l1(&x) + l2(&x));
    let ext = q.integrate(|x| {
        let (a, b, g) = (l1(&x).exp(), l2(&x).exp(), lg(x).exp());
        0.5 * (a * (l1(&x) - lg(x)) + g - a) + 0.5 * (b * (l2(&x) - lg(x)) + g - b)
    })?;
    let tv = q.integrate(|x| 0.5 * (l1(&x).exp() - l2(&x).exp()).abs())?;
    Ok([kl12, kl12 + kl21, -bc.ln(), jsg, ext, tv])
}

fn gaussian_oracle(cfg: &VerifyConfig) -> Vec<Check> {
    match gaussian_oracle_inner(cfg) {
        Ok(c) => c,
        Err(e) => vec![error_check("gaussian_oracle", e)],
    }
}

fn gaussian_oracle_inner(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6A55);
    let mut quad = Residual::new("d=1 closed forms vs quadrature (KL, J, B, JS_G, JS+_G, TV)", 1e-6);
    for case in 0..cfg.gaussian_cases {
        let (g1, g2) = (random_gaussian(&mut rng, 1)?, random_gaussian(&mut rng, 1)?);
        let (m1, s1, m2, s2) = (g1.mu()[0], g1.sigma()[(0, 0)].sqrt(), g2.mu()[0], g2.sigma()[(0, 0)].sqrt());
        let oracle = gaussian_quadrature_oracle(m1, s1, m2, s2)?;
        let closed = [
            ga::kl_gaussian(&g1, &g2)?,
            ga::jeffreys_gaussian(&g1, &g2)?,
            ga::bhattacharyya_gaussian(&g1, &g2, 0.5)?,
            ga::gjsd_gaussian(&g1, &g2, 0.5, 0.5)?,
            ga::gjsd_extended_gaussian(&g1, &g2)?,
            ga::tv_gaussian_1d(m1, s1, m2, s2)?,
        ];
        for (k, (c, o)) in closed.iter().zip(&oracle).enumerate() {
            quad.record(*c, *o, || format!("case {case}, quantity {k}"));
        }
    }
    let mut routes = Residual::new("d in {2,3}: two-route agreement", 1e-10);
    let mut affine = Residual::new("affine invariance", 1e-9);
    for case in 0..cfg.gaussian_cases {
        let d = 2 + case % 2;
        let (g1, g2) = (random_gaussian(&mut rng, d)?, random_gaussian(&mut rng, d)?);
        let ctx = || format!("case {case}, d = {d}");
        routes.record(ga::gjsd_gaussian(&g1, &g2, 0.5, 0.5)?, ga::gjsd_gaussian_identity(&g1, &g2)?, ctx);
        for alpha in [0.25, 0.5, 0.8] {
            routes.record(
                ga::bhattacharyya_gaussian(&g1, &g2, alpha)?,
                ga::bhattacharyya_gaussian_barycentric(&g1, &g2, alpha)?,
                ctx,
            );
        }
        let fam = GaussianFamily::new(d);
        let (t1, t2) = (fam.natural(&g1)?, fam.natural(&g2)?);
        routes.record(bregman(&fam, &t2, &t1)?, ga::kl_gaussian(&g1, &g2)?, ctx);
        for alpha in [0.25, 0.5, 0.8] {
            routes.record(
                skew_jensen(&fam, &t1, &t2, alpha)?,
                ga::bhattacharyya_gaussian(&g1, &g2, alpha)?,
                ctx,
            );
        }
        let (a, b) = random_affine(&mut rng, d)?;
        let (h1, h2) = (g1.affine(&a, &b)?, g2.affine(&a, &b)?);
        let pairs = [
            (ga::kl_gaussian(&g1, &g2)?, ga::kl_gaussian(&h1, &h2)?),
            (ga::jeffreys_gaussian(&g1, &g2)?, ga::jeffreys_gaussian(&h1, &h2)?),
            (ga::bhattacharyya_gaussian(&g1, &g2, 0.5)?, ga::bhattacharyya_gaussian(&h1, &h2, 0.5)?),
            (ga::gjsd_gaussian(&g1, &g2, 0.5, 0.5)?, ga::gjsd_gaussian(&h1, &h2, 0.5, 0.5)?),
            (ga::gjsd_extended_gaussian(&g1, &g2)?, ga::gjsd_extended_gaussian(&h1, &h2)?),
        ];
        for (x, y) in pairs {
            affine.record(x, y, ctx);
        }
    }
    Ok(vec![quad.finish(), routes.finish(), affine.finish()])
}

fn mc_convergence(cfg: &VerifyConfig) -> Vec<Check> {
    match mc_convergence_inner(cfg) {
        Ok(c) => c,
        Err(e) => vec![error_check("mc_convergence", e)],
    }
}

/// Least-squares slope of `y` on `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn mc_convergence_inner(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let (p1, p2) = (Normal1d::new(0.0, 1.0)?, Normal1d::new(1.0, 1.0)?);
    let (g1, g2) = (GaussianParams::univariate(0.0, 1.0)?, GaussianParams::univariate(1.0, 1.0)?);
    let g = MeanSpec::geometric();
    let oracle = ga::gjsd_extended_gaussian(&g1, &g2)?;
    let est = estimate::estimate_js_m_extended(&p1, &p2, &g, &EstimatorConfig::new(cfg.mc_samples, cfg.seed))?;
    let mut out = vec![Check {
        name: format!("MC JS+_G within 4 std_error (s = {})", cfg.mc_samples),
        passed: (est.value - oracle).abs() <= 4.0 * est.std_error,
        cases: 1,
        worst: (est.value - oracle).abs(),
        tolerance: 4.0 * est.std_error,
        detail: format!("estimate {} ± {}, closed form {oracle}", est.value, est.std_error),
    }];

    let sizes: Vec<u64> = [1_000u64, 10_000, 100_000, 1_000_000]
        .into_iter()
        .filter(|&s| s <= cfg.mc_samples.max(1_000))
        .collect();
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for &s in &sizes {
        let e = estimate::estimate_js_m_extended(&p1, &p2, &g, &EstimatorConfig::new(s, cfg.seed + 1))?;
        lx.push((s as f64).ln());
        ly.push(e.std_error.ln());
    }
    let slope = if sizes.len() >= 2 { ls_slope(&lx, &ly) } else { -0.5 };
    out.push(Check {
        name: "log std_error vs log s slope = -0.5 +- 0.1".into(),
        passed: (slope + 0.5).abs() <= 0.1,
        cases: sizes.len(),
        worst: (slope + 0.5).abs(),
        tolerance: 0.1,
        detail: format!("slope {slope}"),
    });

    let det_cfg = EstimatorConfig::new(cfg.mc_samples.min(200_000), cfg.seed).with_chunk_size(1024);
    let one = estimate::estimate_js_m_extended(&p1, &p2, &g, &det_cfg.with_threads(1))?;
    let eight = estimate::estimate_js_m_extended(&p1, &p2, &g, &det_cfg.with_threads(8))?;
    let z1 = estimate::estimate_z(&p1, &p2, &g, estimate::Proposal::FirstArgument, &det_cfg.with_threads(1))?;
    let z8 = estimate::estimate_z(&p1, &p2, &g, estimate::Proposal::FirstArgument, &det_cfg.with_threads(8))?;
    let same = one.value.to_bits() == eight.value.to_bits()
        && one.std_error.to_bits() == eight.std_error.to_bits()
        && z1.value.to_bits() == z8.value.to_bits();
    out.push(Check {
        name: "bit-identical estimates at 1 and 8 threads".into(),
        passed: same,
        cases: 2,
        worst: (one.value - eight.value).abs().max((z1.value - z8.value).abs()),
        tolerance: 0.0,
        detail: String::new(),
    });

    out.push(gamma_approximation()?);
    Ok(out)
}

/// `|D̃_γ − KL|` decreases along γ ∈ {1e-2, 1e-3, 1e-4} and is below 5e-3
/// at γ = 1e-3, for a discrete and a Gaussian pair.
pub fn gamma_errors() -> Result<[[f64; 3]; 2]> {
    let gammas = [1e-2f64, 1e-3, 1e-4];
    let d1 = DiscreteDensity::<f64>::normalized(vec![0.5, 0.3, 0.2])?;
    let d2 = DiscreteDensity::normalized(vec![0.2, 0.2, 0.6])?;
    let kl_d = dd::kl(&d1, &d2, NATS)?;
    let (g1, g2) = (GaussianParams::<f64>::univariate(0.0, 1.0)?, GaussianParams::univariate(1.0, 2.0)?);
    let kl_g = ga::kl_gaussian(&g1, &g2)?;
    let fam = GaussianFamily::univariate();
    let (t1, t2) = (ScaledPoint::normalized(fam.natural(&g1)?), ScaledPoint::normalized(fam.natural(&g2)?));
    let mut out = [[0.0; 3]; 2];
    for (k, &gm) in gammas.iter().enumerate() {
        out[0][k] = (estimate::gamma_divergence_discrete(&d1, &d2, gm, NATS)? - kl_d).abs();
        out[1][k] = (estimate::gamma_divergence_ef(&fam, &t1, &t2, gm)? - kl_g).abs();
    }
    Ok(out)
}

fn gamma_approximation() -> Result<Check> {
    let errs = gamma_errors()?;
    let monotone = errs.iter().all(|e| e[0] > e[1] && e[1] > e[2]);
    let at_mid = errs[0][1].max(errs[1][1]);
    Ok(Check {
        name: "gamma-divergence -> KL monotonically, within 5e-3 at gamma = 1e-3".into(),
        passed: monotone && at_mid < 5e-3,
        cases: 6,
        worst: at_mid,
        tolerance: 5e-3,
        detail: format!("errors {errs:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig {
            pairs: 60,
            coarse_cases: 40,
            chernoff_cases: 5,
            gaussian_cases: 4,
            mc_samples: 100_000,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn suites_pass_on_small_corpus() {
        for report in run(Suite::All, &small()) {
            for c in &report.checks {
                assert!(c.passed, "{}: {c:?}", report.suite);
                assert!(c.cases > 0, "{}: {}", report.suite, c.name);
            }
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::INDIVIDUAL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("gaussian-oracle".parse::<Suite>().unwrap(), Suite::GaussianOracle);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn residual_tracking_flags_failures() {
        let mut r = Residual::new("x", 1e-3);
        r.record(1.0, 1.0005, String::new);
        assert!(r.finish().passed);
        let mut r = Residual::new("x", 1e-3);
        r.record(1.0, f64::NAN, || "nan".into());
        assert!(!r.finish().passed);
        let mut s = Slack::new("y", 0.0);
        s.le(2.0, 1.0, || "bad".into());
        let c = s.finish();
        assert!(!c.passed);
        assert_eq!(c.detail, "bad: 2 > 1");
    }

    #[test]
    fn binmap_is_onto() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let map = random_binmap(&mut rng, 10, 4);
            for b in 0..4 {
                assert!(map.contains(&b));
            }
        }
    }
}
