//! Exact divergences between finite-support densities.
//!
//! All sums use the conventions `0·log(0/x) = 0` and `0·log(0/0) = 0`.
//! A positive weight facing a zero weight inside a logarithm yields `+∞`,
//! returned in-band rather than as an error.

use serde::{Deserialize, Serialize};

use crate::base::LogBase;
use crate::error::{DivergenceError, Result};
use crate::means::MeanSpec;
use crate::scalar::Scalar;

/// Golden-section search bracket margin for the Chernoff optimizer.
pub const CHERNOFF_EPS: f64 = 1e-9;
pub const CHERNOFF_TOL: f64 = 1e-10;
pub const CHERNOFF_MAX_ITER: usize = 200;

/// Nonnegative weights on a finite support, optionally normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDensity<T> {
    weights: Vec<T>,
    normalized: bool,
    renormalized: bool,
}

impl<T: Scalar> DiscreteDensity<T> {
    /// A probability vector. Sums off by at most the type's renormalization
    /// tolerance are rescaled, and [`was_renormalized`](Self::was_renormalized)
    /// reports it.
    pub fn normalized(weights: Vec<T>) -> Result<Self> {
        validate(&weights)?;
        let sum = kahan_sum(weights.iter().copied());
        let err = (sum - T::one()).abs();
        if err <= T::lit(T::NORMALIZATION_TOL) {
            Ok(Self {
                weights,
                normalized: true,
                renormalized: false,
            })
        } else if err <= T::lit(T::RENORMALIZE_TOL) {
            Ok(Self {
                weights: weights.into_iter().map(|w| w / sum).collect(),
                normalized: true,
                renormalized: true,
            })
        } else {
            Err(DivergenceError::NotNormalized { sum: sum.as_f64() })
        }
    }

    /// Divides arbitrary nonnegative weights by their sum.
    pub fn normalize(weights: Vec<T>) -> Result<Self> {
        validate(&weights)?;
        let sum = kahan_sum(weights.iter().copied());
        Ok(Self {
            weights: weights.into_iter().map(|w| w / sum).collect(),
            normalized: true,
            renormalized: false,
        })
    }

    /// A positive (unnormalized) measure.
    pub fn positive(weights: Vec<T>) -> Result<Self> {
        validate(&weights)?;
        Ok(Self {
            weights,
            normalized: false,
            renormalized: false,
        })
    }

    pub(crate) fn from_parts(weights: Vec<T>, normalized: bool) -> Self {
        Self {
            weights,
            normalized,
            renormalized: false,
        }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn was_renormalized(&self) -> bool {
        self.renormalized
    }

    pub fn total_mass(&self) -> T {
        kahan_sum(self.weights.iter().copied())
    }

    /// `λ·q` as a positive measure.
    pub fn scaled(&self, lambda: T) -> Result<Self> {
        Self::positive(self.weights.iter().map(|&w| w * lambda).collect())
    }
}

fn validate<T: Scalar>(weights: &[T]) -> Result<()> {
    for (index, &w) in weights.iter().enumerate() {
        if !(w >= T::zero() && w.is_finite()) {
            return Err(DivergenceError::InvalidWeight {
                index,
                value: w.as_f64(),
            });
        }
    }
    if weights.iter().all(|&w| w == T::zero()) {
        return Err(DivergenceError::ZeroDensity);
    }
    Ok(())
}

fn kahan_sum<T: Scalar>(it: impl Iterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut c = T::zero();
    for x in it {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

fn same_len<T>(a: &DiscreteDensity<T>, b: &DiscreteDensity<T>) -> Result<()> {
    if a.weights.len() == b.weights.len() {
        Ok(())
    } else {
        Err(DivergenceError::LengthMismatch {
            left: a.weights.len(),
            right: b.weights.len(),
        })
    }
}

fn require_normalized<T>(ps: &[&DiscreteDensity<T>]) -> Result<()> {
    if ps.iter().all(|p| p.normalized) {
        Ok(())
    } else {
        Err(DivergenceError::RequiresNormalized)
    }
}

fn check_unit_interval<T: Scalar>(x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(DivergenceError::InvalidAlpha(x.as_f64()))
    }
}

/// `p log_b(p/q)` with the zero conventions.
#[inline]
fn rel_ent<T: Scalar>(p: T, q: T, base: LogBase) -> T {
    if p == T::zero() {
        T::zero()
    } else if q == T::zero() {
        T::infinity()
    } else {
        p * base.log(p / q)
    }
}

/// `q1 log(q1/q2) + q2 − q1`, the pointwise extended-KL integrand.
#[inline]
fn rel_ent_ext<T: Scalar>(q1: T, q2: T, base: LogBase) -> T {
    if q1 == T::zero() {
        q2
    } else if q2 == T::zero() {
        T::infinity()
    } else {
        q1 * base.log(q1 / q2) + q2 - q1
    }
}

fn kl_raw<T: Scalar>(p: &[T], q: &[T], base: LogBase) -> T {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| rel_ent(a, b, base))
        .fold(T::zero(), |acc, t| acc + t)
}

fn kl_ext_raw<T: Scalar>(p: &[T], q: &[T], base: LogBase) -> T {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| rel_ent_ext(a, b, base))
        .fold(T::zero(), |acc, t| acc + t)
}

/// Kullback–Leibler divergence `Σ p1 log(p1/p2)`.
pub fn kl<T: Scalar>(p1: &DiscreteDensity<T>, p2: &DiscreteDensity<T>, base: LogBase) -> Result<T> {
    same_len(p1, p2)?;
    require_normalized(&[p1, p2])?;
    Ok(kl_raw(&p1.weights, &p2.weights, base))
}

/// Extended KL divergence `Σ [q1 log(q1/q2) + q2 − q1]` between positive
/// measures. Nonnegative even when the arguments are not normalized.
pub fn kl_extended<T: Scalar>(
    q1: &DiscreteDensity<T>,
    q2: &DiscreteDensity<T>,
    base: LogBase,
) -> Result<T> {
    same_len(q1, q2)?;
    Ok(kl_ext_raw(&q1.weights, &q2.weights, base))
}

/// Shannon entropy `−Σ p log p`.
pub fn entropy<T: Scalar>(p: &DiscreteDensity<T>, base: LogBase) -> T {
    p.weights
        .iter()
        .map(|&w| if w == T::zero() { T::zero() } else { -w * base.log(w) })
        .fold(T::zero(), |acc, t| acc + t)
}

/// Cross-entropy `−Σ p log q`.
pub fn cross_entropy<T: Scalar>(
    p: &DiscreteDensity<T>,
    q: &DiscreteDensity<T>,
    base: LogBase,
) -> Result<T> {
    same_len(p, q)?;
    Ok(p.weights
        .iter()
        .zip(&q.weights)
        .map(|(&a, &b)| {
            if a == T::zero() {
                T::zero()
            } else if b == T::zero() {
                T::infinity()
            } else {
                -a * base.log(b)
            }
        })
        .fold(T::zero(), |acc, t| acc + t))
}

/// Pointwise `M_α(p1, p2)` and its total mass `Z`. With `normalize`, the
/// weights are divided by `Z`.
pub fn m_mixture<T: Scalar>(
    p1: &DiscreteDensity<T>,
    p2: &DiscreteDensity<T>,
    m: &MeanSpec<T>,
    normalize: bool,
) -> Result<(DiscreteDensity<T>, T)> {
    same_len(p1, p2)?;
    let raw: Vec<T> = p1
        .weights
        .iter()
        .zip(&p2.weights)
        .map(|(&a, &b)| m.eval_unchecked(a, b))
        .collect();
    let z = kahan_sum(raw.iter().copied());
    if z <= T::zero() {
        return Err(DivergenceError::DisjointSupport);
    }
    if normalize {
        Ok((
            DiscreteDensity::from_parts(raw.into_iter().map(|w| w / z).collect(), true),
            z,
        ))
    } else {
        Ok((DiscreteDensity::from_parts(raw, false), z))
    }
}

/// Jensen–Shannon divergence. Finite and at most `log 2` for any pair.
pub fn js<T: Scalar>(p1: &DiscreteDensity<T>, p2: &DiscreteDensity<T>, base: LogBase) -> Result<T> {
    same_len(p1, p2)?;
    require_normalized(&[p1, p2])?;
    let half = T::half();
    let sum = p1
        .weights
        .iter()
        .zip(&p2.weights)
        .map(|(&a, &b)| {
            let mid = half * (a + b);
            rel_ent(a, mid, base) + rel_ent(b, mid, base)
        })
        .fold(T::zero(), |acc, t| acc + t);
    Ok(half * sum)
}

/// Skew M-Jensen–Shannon divergence
/// `β KL(p1, (p1p2)_M) + (1−β) KL(p2, (p1p2)_M)` with the normalized
/// M-mixture.
pub fn js_m<T: Scalar>(
    p1: &DiscreteDensity<T>,
    p2: &DiscreteDensity<T>,
    m: &MeanSpec<T>,
    beta: T,
    base: LogBase,
) -> Result<T> {
    require_normalized(&[p1, p2])?;
    check_unit_interval(beta)?;
    let (mix, _) = m_mixture(p1, p2, m, true)?;
    Ok(beta * kl_raw(&p1.weights, &mix.weights, base)
        + (T::one() - beta) * kl_raw(&p2.weights, &mix.weights, base))
}

/// Extended M-JSD: the unnormalized M-mixture compared with the extended KL.
/// Defined for positive measures.
pub fn js_m_extended<T: Scalar>(
    q1: &DiscreteDensity<T>,
    q2: &DiscreteDensity<T>,
    m: &MeanSpec<T>,
    beta: T,
    base: LogBase,
) -> Result<T> {
    check_unit_interval(beta)?;
    let (mix, _) = m_mixture(q1, q2, m, false)?;
    Ok(beta * kl_ext_raw(&q1.weights, &mix.weights, base)
        + (T::one() - beta) * kl_ext_raw(&q2.weights, &mix.weights, base))
}

/// Jeffreys divergence `KL(p1,p2) + KL(p2,p1)`.
pub fn jeffreys<T: Scalar>(
    p1: &DiscreteDensity<T>,
    p2: &DiscreteDensity<T>,
    base: LogBase,
) -> Result<T> {
    same_len(p1, p2)?;
    require_normalized(&[p1, p2])?;
    Ok(p1
        .weights
        .iter()
        .zip(&p2.weights)
        .map(|(&a, &b)| {
            if a == b {
                T::zero()
            } else if a == T::zero() || b == T::zero() {
                T::infinity()
            } else {
                (a - b) * base.log(a / b)
            }
        })
        .fold(T::zero(), |acc, t| acc + t))
}

/// `Σ p1^α p2^{1−α}`, the skew Bhattacharyya coefficient.
fn skew_coefficient<T: Scalar>(p1: &[T], p2: &[T], alpha: T) -> T {
    let g = MeanSpec::new(crate::means::MeanKind::Geometric, alpha).expect("validated alpha");
    kahan_sum(p1.iter().zip(p2).map(|(&a, &b)| g.eval_unchecked(a, b)))
}

/// Bhattacharyya coefficient `Σ √(p1 p2)`, a similarity in `[0, 1]`.
pub fn bhattacharyya_coefficient<T: Scalar>(
    p1: &DiscreteDensity<T>,
    p2: &DiscreteDensity<T>,
) -> Result<T> {
    same_len(p1, p2)?;
    require_normalized(&[p1, p2])?;
    Ok(skew_coefficient(&p1.weights, &p2.weights, T::half()))
}

/// Skew Bhattacharyya distance `−log Σ p1^α p2^{1−α}`; `+∞` for disjoint
/// supports.
pub fn bhattacharyya<T: Scalar>(
    p1: &DiscreteDensity<T>,
    p2: &DiscreteDensity<T>,
    alpha: T,
    base: LogBase,
) -> Result<T> {
    same_len(p1, p2)?;
    require_normalized(&[p1, p2])?;
    check_unit_interval(alpha)?;
    let c = skew_coefficient(&p1.weights, &p2.weights, alpha);
    if c <= T::zero() {
        return Ok(T::infinity());
    }
    Ok(-base.log(c))
}

/// Chernoff information and its optimal skew.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chernoff<T> {
    pub value: T,
    pub alpha_star: T,
}

/// `d/dα B_α = Σ m_α log(p2/p1)`, which equals
/// `KL(m_α, p1) − KL(m_α, p2)` for the normalized skew geometric mixture.
fn chernoff_slope<T: Scalar>(p1: &[T], p2: &[T], alpha: T) -> T {
    let mut z = T::zero();
    let mut acc = T::zero();
    for (&a, &b) in p1.iter().zip(p2) {
        if a > T::zero() && b > T::zero() {
            let w = (alpha * a.ln() + (T::one() - alpha) * b.ln()).exp();
            z = z + w;
            acc = acc + w * (b.ln() - a.ln());
        }
    }
    acc / z
}

/// Chernoff information `max_α B_α(p1, p2)` with its maximizer.
///
/// Golden-section search on `B_α` over `[ε, 1−ε]`, followed by a bisection
/// polish on the slope so that the maximizer equalizes
/// `KL(m_α*, p1) = KL(m_α*, p2)` to working precision.
pub fn chernoff<T: Scalar>(
    p1: &DiscreteDensity<T>,
    p2: &DiscreteDensity<T>,
    tol: T,
    base: LogBase,
) -> Result<Chernoff<T>> {
    same_len(p1, p2)?;
    require_normalized(&[p1, p2])?;
    if !(tol > T::zero()) {
        return Err(DivergenceError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if p1.weights == p2.weights {
        return Ok(Chernoff {
            value: T::zero(),
            alpha_star: T::half(),
        });
    }
    let (w1, w2) = (&p1.weights, &p2.weights);
    if skew_coefficient(w1, w2, T::half()) <= T::zero() {
        return Err(DivergenceError::DisjointSupport);
    }
    let b = |a: T| -skew_coefficient(w1, w2, a).ln();

    let eps = T::lit(CHERNOFF_EPS);
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let (mut lo, mut hi) = (eps, T::one() - eps);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (b(x1), b(x2));
    let mut iterations = 0;
    while hi - lo > tol {
        if iterations >= CHERNOFF_MAX_ITER {
            return Err(DivergenceError::NoConvergence { iterations });
        }
        iterations += 1;
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = b(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = b(x1);
        }
    }
    let mut alpha = T::half() * (lo + hi);

    // Polish: the slope is decreasing in α (B_α is concave), so bisect on its
    // sign inside a bracket grown around the golden-section estimate.
    let slope = |a: T| chernoff_slope(w1, w2, a);
    let mut width = (hi - lo).max(tol);
    let (mut a_lo, mut a_hi) = ((alpha - width).max(eps), (alpha + width).min(T::one() - eps));
    while slope(a_lo) < T::zero() && a_lo > eps {
        width = width * T::two();
        a_lo = (alpha - width).max(eps);
    }
    while slope(a_hi) > T::zero() && a_hi < T::one() - eps {
        width = width * T::two();
        a_hi = (alpha + width).min(T::one() - eps);
    }
    if slope(a_lo) >= T::zero() && slope(a_hi) <= T::zero() {
        for _ in 0..CHERNOFF_MAX_ITER {
            let mid = T::half() * (a_lo + a_hi);
            if mid <= a_lo || mid >= a_hi {
                break;
            }
            let s = slope(mid);
            if s == T::zero() {
                a_lo = mid;
                a_hi = mid;
                break;
            } else if s > T::zero() {
                a_lo = mid;
            } else {
                a_hi = mid;
            }
        }
        alpha = T::half() * (a_lo + a_hi);
    }
    let value = b(alpha);
    Ok(Chernoff {
        value: base.from_nats(value),
        alpha_star: alpha,
    })
}

/// Total variation distance `½ Σ |p1 − p2|`.
pub fn total_variation<T: Scalar>(p1: &DiscreteDensity<T>, p2: &DiscreteDensity<T>) -> Result<T> {
    same_len(p1, p2)?;
    require_normalized(&[p1, p2])?;
    Ok(T::half()
        * kahan_sum(p1.weights.iter().zip(&p2.weights).map(|(&a, &b)| (a - b).abs())))
}

/// Additional convex generators outside the paper's named families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CustomGenerator {
    /// `½|u − 1|`
    TotalVariation,
    /// `(√u − 1)²`
    SquaredHellinger,
    /// `(u − 1)²`
    PearsonChiSquared,
    /// `u log u`, giving `KL(p2, p1)`.
    ReverseKl,
}

/// Generator `f` of an f-divergence `I_f(p1, p2) = Σ p1 f(p2/p1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FGenerator {
    /// `−log u`
    Kl,
    /// `½[u log u − (1+u) log((1+u)/2)]`
    Js,
    /// `¼(u − 1) log u + √u − 1`, the extended geometric JSD.
    ExtendedGjs,
    /// `(u − 1) log u`
    Jeffreys,
    /// `((1+u)/2) log((1+u)/(2√u))`
    TanejaT,
    /// `√u`: a concave f-coefficient (a similarity, with `f(1) = 1`).
    BhattacharyyaCoeff,
    Custom(CustomGenerator),
}

impl FGenerator {
    /// `f(u)` for `u > 0`; logarithms in `base`.
    pub fn eval<T: Scalar>(self, u: T, base: LogBase) -> T {
        let one = T::one();
        let half = T::half();
        let xlogx = |x: T| if x == T::zero() { T::zero() } else { x * base.log(x) };
        match self {
            FGenerator::Kl => -base.log(u),
            FGenerator::Js => half * (xlogx(u) - (one + u) * base.log(half * (one + u))),
            FGenerator::ExtendedGjs => T::lit(0.25) * (u - one) * base.log(u) + u.sqrt() - one,
            FGenerator::Jeffreys => (u - one) * base.log(u),
            FGenerator::TanejaT => half * (one + u) * base.log((one + u) / (T::two() * u.sqrt())),
            FGenerator::BhattacharyyaCoeff => u.sqrt(),
            FGenerator::Custom(CustomGenerator::TotalVariation) => half * (u - one).abs(),
            FGenerator::Custom(CustomGenerator::SquaredHellinger) => (u.sqrt() - one).powi(2),
            FGenerator::Custom(CustomGenerator::PearsonChiSquared) => (u - one).powi(2),
            FGenerator::Custom(CustomGenerator::ReverseKl) => xlogx(u),
        }
    }

    /// `f(0⁺)`, used where `p2 = 0 < p1`.
    pub fn at_zero<T: Scalar>(self, base: LogBase) -> T {
        match self {
            FGenerator::Js => T::half() * base.log(T::two()),
            FGenerator::BhattacharyyaCoeff | FGenerator::Custom(CustomGenerator::ReverseKl) => {
                T::zero()
            }
            FGenerator::Custom(CustomGenerator::TotalVariation) => T::half(),
            FGenerator::Custom(CustomGenerator::SquaredHellinger)
            | FGenerator::Custom(CustomGenerator::PearsonChiSquared) => T::one(),
            FGenerator::Kl | FGenerator::ExtendedGjs | FGenerator::Jeffreys | FGenerator::TanejaT => {
                T::infinity()
            }
        }
    }

    /// `lim_{u→∞} f(u)/u`, used where `p1 = 0 < p2`.
    pub fn slope_at_infinity<T: Scalar>(self, base: LogBase) -> T {
        match self {
            FGenerator::Kl | FGenerator::BhattacharyyaCoeff => T::zero(),
            FGenerator::Js => T::half() * base.log(T::two()),
            FGenerator::Custom(CustomGenerator::TotalVariation) => T::half(),
            FGenerator::Custom(CustomGenerator::SquaredHellinger) => T::one(),
            FGenerator::ExtendedGjs
            | FGenerator::Jeffreys
            | FGenerator::TanejaT
            | FGenerator::Custom(CustomGenerator::PearsonChiSquared)
            | FGenerator::Custom(CustomGenerator::ReverseKl) => T::infinity(),
        }
    }

    /// False for the Bhattacharyya coefficient, which is a similarity.
    pub fn is_divergence(self) -> bool {
        !matches!(self, FGenerator::BhattacharyyaCoeff)
    }
}

/// `I_f(p1, p2) = Σ p1 f(p2/p1)` with the limit conventions at zero.
pub fn f_divergence<T: Scalar>(
    p1: &DiscreteDensity<T>,
    p2: &DiscreteDensity<T>,
    f: FGenerator,
    base: LogBase,
) -> Result<T> {
    same_len(p1, p2)?;
    require_normalized(&[p1, p2])?;
    Ok(p1
        .weights
        .iter()
        .zip(&p2.weights)
        .map(|(&a, &b)| {
            if a == T::zero() {
                if b == T::zero() {
                    T::zero()
                } else {
                    b * f.slope_at_infinity(base)
                }
            } else if b == T::zero() {
                a * f.at_zero(base)
            } else {
                a * f.eval(b / a, base)
            }
        })
        .fold(T::zero(), |acc, t| acc + t))
}

/// `KL((p1p2)_{M1}, (p1p2)_{M2})` between two normalized mixtures. Symmetric
/// in `(p1, p2)` when both means are balanced.
pub fn kl_between_mixtures<T: Scalar>(
    p1: &DiscreteDensity<T>,
    p2: &DiscreteDensity<T>,
    m1: &MeanSpec<T>,
    m2: &MeanSpec<T>,
    base: LogBase,
) -> Result<T> {
    require_normalized(&[p1, p2])?;
    let (a, _) = m_mixture(p1, p2, m1, true)?;
    let (b, _) = m_mixture(p1, p2, m2, true)?;
    Ok(kl_raw(&a.weights, &b.weights, base))
}

/// Taneja T-divergence `Σ A log(A/G)` with `A` and `G` the pointwise
/// arithmetic and geometric means.
pub fn taneja_t<T: Scalar>(
    p1: &DiscreteDensity<T>,
    p2: &DiscreteDensity<T>,
    base: LogBase,
) -> Result<T> {
    same_len(p1, p2)?;
    require_normalized(&[p1, p2])?;
    Ok(p1
        .weights
        .iter()
        .zip(&p2.weights)
        .map(|(&a, &b)| {
            let arith = T::half() * (a + b);
            rel_ent(arith, (a * b).sqrt(), base)
        })
        .fold(T::zero(), |acc, t| acc + t))
}

/// Merges atoms: output bin `binmap[i]` receives `p[i]`. The map must be
/// onto `0..=max(binmap)`.
pub fn coarse_grain<T: Scalar>(p: &DiscreteDensity<T>, binmap: &[usize]) -> Result<DiscreteDensity<T>> {
    if binmap.len() != p.len() {
        return Err(DivergenceError::LengthMismatch {
            left: p.len(),
            right: binmap.len(),
        });
    }
    let bins = binmap.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![T::zero(); bins];
    let mut hit = vec![false; bins];
    for (&w, &b) in p.weights.iter().zip(binmap) {
        out[b] = out[b] + w;
        hit[b] = true;
    }
    if let Some(missing) = hit.iter().position(|h| !h) {
        return Err(DivergenceError::InvalidBinMap(format!("bin {missing} receives no atom")));
    }
    Ok(DiscreteDensity::from_parts(out, p.normalized))
}
