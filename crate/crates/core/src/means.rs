//! Weighted bivariate scalar means `M_α(a, b)`.
//!
//! Every mean here is a weighted mean in the usual sense: it lies between
//! `min(a, b)` and `max(a, b)`, returns `a` when `a = b`, and satisfies the
//! weight symmetry `M_α(a, b) = M_{1−α}(b, a)`. Pointwise application to two
//! densities yields the (unnormalized) M-mixture used throughout the crate.

use serde::{Deserialize, Serialize};

use crate::error::{DivergenceError, Result};
use crate::scalar::Scalar;

/// Below this `|γ|` a power mean is evaluated as the geometric mean.
pub const POWER_GEOMETRIC_THRESHOLD: f64 = 1e-8;

/// Generator `φ` of a quasi-arithmetic mean `φ⁻¹(αφ(a) + (1−α)φ(b))`.
///
/// The registry is closed so that `φ` is always invertible on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "generator", content = "exponent")]
pub enum QuasiGenerator<T> {
    /// `φ(u) = log u`, the geometric mean.
    Log,
    /// `φ(u) = u^p`, the power mean of exponent `p`.
    Power(T),
    /// `φ(u) = exp(u)`, the log-sum-exp mean.
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "param")]
pub enum MeanKind<T> {
    Arithmetic,
    Geometric,
    /// Power mean `(αa^γ + (1−α)b^γ)^{1/γ}`; `γ = 0` is the geometric mean.
    Power(T),
    QuasiArithmetic(QuasiGenerator<T>),
    Min,
    Max,
}

/// A weighted mean: a mean family plus the skew weight `α ∈ (0, 1)` on the
/// first argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSpec<T> {
    kind: MeanKind<T>,
    alpha: T,
}

impl<T: Scalar> MeanSpec<T> {
    pub fn new(kind: MeanKind<T>, alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(DivergenceError::InvalidAlpha(alpha.as_f64()));
        }
        if let MeanKind::Power(g) | MeanKind::QuasiArithmetic(QuasiGenerator::Power(g)) = kind {
            if !g.is_finite() {
                return Err(DivergenceError::InvalidParameter(format!(
                    "power exponent must be finite, got {g}"
                )));
            }
        }
        Ok(Self { kind, alpha })
    }

    /// The balanced (`α = ½`) mean of the given kind.
    pub fn balanced(kind: MeanKind<T>) -> Self {
        Self::new(kind, T::half()).expect("finite balanced mean")
    }

    pub fn arithmetic() -> Self {
        Self::balanced(MeanKind::Arithmetic)
    }

    pub fn geometric() -> Self {
        Self::balanced(MeanKind::Geometric)
    }

    pub fn power(gamma: T) -> Result<Self> {
        Self::new(MeanKind::Power(gamma), T::half())
    }

    pub fn min() -> Self {
        Self::balanced(MeanKind::Min)
    }

    pub fn max() -> Self {
        Self::balanced(MeanKind::Max)
    }

    pub fn kind(&self) -> MeanKind<T> {
        self.kind
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn with_alpha(self, alpha: T) -> Result<Self> {
        Self::new(self.kind, alpha)
    }

    /// The same mean with arguments swapped: `M_{1−α}`.
    pub fn swapped(self) -> Self {
        Self {
            kind: self.kind,
            alpha: T::one() - self.alpha,
        }
    }

    /// Whether `M(a, a) = a` makes the mixture of identical densities
    /// identical to them. True for all supported kinds.
    pub fn is_idempotent(&self) -> bool {
        true
    }

    /// `M_α(a, b)` for `a, b ≥ 0`.
    pub fn evaluate(&self, a: T, b: T) -> Result<T> {
        check_arg(a)?;
        check_arg(b)?;
        Ok(self.eval_unchecked(a, b))
    }

    pub(crate) fn eval_unchecked(&self, a: T, b: T) -> T {
        if a == b {
            return a;
        }
        let alpha = self.alpha;
        match self.kind {
            MeanKind::Arithmetic => alpha * a + (T::one() - alpha) * b,
            MeanKind::Geometric | MeanKind::QuasiArithmetic(QuasiGenerator::Log) => {
                geometric(a, b, alpha)
            }
            MeanKind::Power(g) | MeanKind::QuasiArithmetic(QuasiGenerator::Power(g)) => {
                power(a, b, alpha, g)
            }
            MeanKind::QuasiArithmetic(QuasiGenerator::Exp) => {
                let m = a.max(b);
                m + (alpha * (a - m).exp() + (T::one() - alpha) * (b - m).exp()).ln()
            }
            MeanKind::Min => a.min(b),
            MeanKind::Max => a.max(b),
        }
    }

    /// `log M_α(e^{la}, e^{lb})`, evaluated without leaving log space where
    /// the mean family allows it. Inputs may be `-∞` (zero density).
    pub fn evaluate_log(&self, la: T, lb: T) -> T {
        if la == lb {
            return la;
        }
        let alpha = self.alpha;
        let (lw1, lw2) = (alpha.ln(), (T::one() - alpha).ln());
        match self.kind {
            MeanKind::Arithmetic => log_add_exp(lw1 + la, lw2 + lb),
            MeanKind::Geometric | MeanKind::QuasiArithmetic(QuasiGenerator::Log) => {
                log_geometric(la, lb, alpha)
            }
            MeanKind::Power(g) | MeanKind::QuasiArithmetic(QuasiGenerator::Power(g)) => {
                if g.abs() < T::lit(POWER_GEOMETRIC_THRESHOLD) {
                    log_geometric(la, lb, alpha)
                } else if g < T::zero() && (la == T::neg_infinity() || lb == T::neg_infinity()) {
                    T::neg_infinity()
                } else {
                    log_add_exp(lw1 + g * la, lw2 + g * lb) / g
                }
            }
            MeanKind::QuasiArithmetic(QuasiGenerator::Exp) => {
                self.eval_unchecked(la.exp(), lb.exp()).ln()
            }
            MeanKind::Min => la.min(lb),
            MeanKind::Max => la.max(lb),
        }
    }
}

impl<T: Scalar> Default for MeanSpec<T> {
    fn default() -> Self {
        Self::arithmetic()
    }
}

impl<T: Scalar> std::fmt::Display for MeanSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            MeanKind::Arithmetic => write!(f, "arithmetic")?,
            MeanKind::Geometric => write!(f, "geometric")?,
            MeanKind::Power(g) => write!(f, "power({g})")?,
            MeanKind::QuasiArithmetic(QuasiGenerator::Log) => write!(f, "quasi(log)")?,
            MeanKind::QuasiArithmetic(QuasiGenerator::Power(p)) => write!(f, "quasi(power {p})")?,
            MeanKind::QuasiArithmetic(QuasiGenerator::Exp) => write!(f, "quasi(exp)")?,
            MeanKind::Min => write!(f, "min")?,
            MeanKind::Max => write!(f, "max")?,
        }
        write!(f, "[α={}]", self.alpha)
    }
}

fn check_arg<T: Scalar>(x: T) -> Result<()> {
    if x >= T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(DivergenceError::NonPositiveInput(x.as_f64()))
    }
}

fn geometric<T: Scalar>(a: T, b: T, alpha: T) -> T {
    if a == T::zero() || b == T::zero() {
        return T::zero();
    }
    (alpha * a.ln() + (T::one() - alpha) * b.ln()).exp()
}

fn log_geometric<T: Scalar>(la: T, lb: T, alpha: T) -> T {
    if la == T::neg_infinity() || lb == T::neg_infinity() {
        return T::neg_infinity();
    }
    alpha * la + (T::one() - alpha) * lb
}

// Scaled by the dominant argument so that large |γ| neither overflows nor
// underflows: max(a,b) for γ > 0, min(a,b) for γ < 0.
fn power<T: Scalar>(a: T, b: T, alpha: T, gamma: T) -> T {
    if gamma.abs() < T::lit(POWER_GEOMETRIC_THRESHOLD) {
        return geometric(a, b, alpha);
    }
    let scale = if gamma > T::zero() {
        a.max(b)
    } else {
        let m = a.min(b);
        if m == T::zero() {
            return T::zero();
        }
        m
    };
    let s = alpha * (a / scale).powf(gamma) + (T::one() - alpha) * (b / scale).powf(gamma);
    scale * s.powf(gamma.recip())
}

/// `log(e^x + e^y)` with `-∞` handled.
pub(crate) fn log_add_exp<T: Scalar>(x: T, y: T) -> T {
    let m = x.max(y);
    if m == T::neg_infinity() {
        return m;
    }
    m + ((x - m).exp() + (y - m).exp()).ln()
}

/// Balanced power means `P_γ(a, b)` for a sequence of exponents.
pub fn power_limit_check<T: Scalar>(gammas: &[T], a: T, b: T) -> Result<Vec<T>> {
    gammas
        .iter()
        .map(|&g| MeanSpec::power(g)?.evaluate(a, b))
        .collect()
}
