//! Exponential families `p_θ(x) = exp(⟨θ, t(x)⟩ − F(θ))`.
//!
//! Within one family the divergences of this crate reduce to expressions in
//! the cumulant `F`:
//!
//! | Quantity | Form |
//! |----------|------|
//! | `B_α(p_θ1, p_θ2)` | skew Jensen `J_{F,α}(θ1, θ2)` |
//! | `KL(p_θ2, p_θ1)` | Bregman `B_F(θ1, θ2)` |
//! | G-JSD | `¼⟨θ2−θ1, ∇F(θ2)−∇F(θ1)⟩ − J_F(θ1, θ2)` |
//! | extended G-JSD | `¼⟨θ2−θ1, ∇F(θ2)−∇F(θ1)⟩ + exp(−J_F) − 1` |
//!
//! The unnormalized geometric mixture `p_θ1^α p_θ2^{1−α}` is
//! `exp(−J_{F,α}) · p_{αθ1+(1−α)θ2}`.
//!
//! Parameters are flat slices. Each family documents its packing. Leaving
//! the natural domain is an error rather than an infinity.

use crate::base::LogBase;
use crate::discrete::DiscreteDensity;
use crate::error::{DivergenceError, Result};
use crate::gaussian::{self, GaussianNatural, GaussianParams};
use crate::linalg::{axpby, dot};
use crate::scalar::Scalar;

pub trait ExpFamily<T: Scalar>: Send + Sync {
    /// Length of the natural parameter vector.
    fn dim(&self) -> usize;

    fn in_domain(&self, theta: &[T]) -> bool;

    /// Log-normalizer `F(θ)`.
    fn cumulant(&self, theta: &[T]) -> Result<T>;

    fn cumulant_gradient(&self, theta: &[T]) -> Result<Vec<T>>;
}

/// Multivariate normals in packed natural coordinates (see
/// [`GaussianNatural::pack`]). `d = 1` is the univariate family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianFamily {
    d: usize,
}

impl GaussianFamily {
    pub fn new(d: usize) -> Self {
        Self { d }
    }

    pub fn univariate() -> Self {
        Self { d: 1 }
    }

    pub fn natural<T: Scalar>(&self, g: &GaussianParams<T>) -> Result<Vec<T>> {
        if g.dim() != self.d {
            return Err(DivergenceError::DimensionMismatch {
                expected: self.d,
                got: g.dim(),
            });
        }
        Ok(gaussian::to_natural(g).pack())
    }

    pub fn params<T: Scalar>(&self, theta: &[T]) -> Result<GaussianParams<T>> {
        gaussian::from_natural(&self.unpack(theta)?)
    }

    fn unpack<T: Scalar>(&self, theta: &[T]) -> Result<GaussianNatural<T>> {
        let n = GaussianNatural::unpack(self.d, theta)?;
        if n.theta_m.cholesky().is_err() {
            return Err(DivergenceError::DomainViolation);
        }
        Ok(n)
    }
}

impl<T: Scalar> ExpFamily<T> for GaussianFamily {
    fn dim(&self) -> usize {
        gaussian::packed_len(self.d)
    }

    fn in_domain(&self, theta: &[T]) -> bool {
        theta.iter().all(|x| x.is_finite()) && self.unpack(theta).is_ok()
    }

    fn cumulant(&self, theta: &[T]) -> Result<T> {
        gaussian::cumulant(&self.unpack(theta)?)
    }

    fn cumulant_gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        gaussian::cumulant_gradient(&self.unpack(theta)?)
    }
}

/// Unit-covariance normals `N(θ, I)`: `F(θ) = ½‖θ‖² + (d/2) log 2π`.
/// The Bregman divergence is half the squared Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianLocationFamily {
    d: usize,
}

impl GaussianLocationFamily {
    pub fn new(d: usize) -> Self {
        Self { d }
    }
}

impl<T: Scalar> ExpFamily<T> for GaussianLocationFamily {
    fn dim(&self) -> usize {
        self.d
    }

    fn in_domain(&self, theta: &[T]) -> bool {
        theta.len() == self.d && theta.iter().all(|x| x.is_finite())
    }

    fn cumulant(&self, theta: &[T]) -> Result<T> {
        check_domain(self, theta)?;
        let d = T::from_usize(self.d).unwrap();
        Ok(T::half() * (dot(theta, theta) + d * (T::two() * T::PI()).ln()))
    }

    fn cumulant_gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        check_domain(self, theta)?;
        Ok(theta.to_vec())
    }
}

/// Categorical distributions on `k` atoms with `θ_i = log(p_i/p_k)`,
/// `i < k`, and `F(θ) = log(1 + Σ e^{θ_i})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CategoricalFamily {
    k: usize,
}

impl CategoricalFamily {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(DivergenceError::InvalidParameter(
                "categorical family needs at least two atoms".into(),
            ));
        }
        Ok(Self { k })
    }

    /// Natural parameters of a fully supported density.
    pub fn natural<T: Scalar>(&self, p: &DiscreteDensity<T>) -> Result<Vec<T>> {
        if p.len() != self.k {
            return Err(DivergenceError::DimensionMismatch {
                expected: self.k,
                got: p.len(),
            });
        }
        if !p.is_normalized() {
            return Err(DivergenceError::RequiresNormalized);
        }
        let w = p.weights();
        if w.iter().any(|&x| x <= T::zero()) {
            return Err(DivergenceError::DomainViolation);
        }
        let last = w[self.k - 1].ln();
        Ok(w[..self.k - 1].iter().map(|&x| x.ln() - last).collect())
    }

    pub fn density<T: Scalar>(&self, theta: &[T]) -> Result<DiscreteDensity<T>> {
        let f = ExpFamily::<T>::cumulant(self, theta)?;
        let mut w: Vec<T> = theta.iter().map(|&t| (t - f).exp()).collect();
        w.push((-f).exp());
        DiscreteDensity::normalized(w)
    }
}

impl<T: Scalar> ExpFamily<T> for CategoricalFamily {
    fn dim(&self) -> usize {
        self.k - 1
    }

    fn in_domain(&self, theta: &[T]) -> bool {
        theta.len() == self.k - 1 && theta.iter().all(|x| x.is_finite())
    }

    fn cumulant(&self, theta: &[T]) -> Result<T> {
        check_domain(self, theta)?;
        let m = theta.iter().fold(T::zero(), |m, &t| m.max(t));
        let s = theta.iter().fold((-m).exp(), |acc, &t| acc + (t - m).exp());
        Ok(m + s.ln())
    }

    fn cumulant_gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        let f = self.cumulant(theta)?;
        Ok(theta.iter().map(|&t| (t - f).exp()).collect())
    }
}

/// Univariate polynomial family `q_θ(x) = exp(Σ_{i=1}^m θ_i x^i)`.
///
/// The log-normalizer has no closed form, so [`ExpFamily::cumulant`]
/// returns [`DivergenceError::CumulantUnavailable`]. Densities are used
/// unnormalized through [`PolynomialFamily::log_unnormalized`], which is
/// all the projective γ-divergence needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolynomialFamily {
    degree: usize,
}

impl PolynomialFamily {
    pub fn new(degree: usize) -> Result<Self> {
        if degree < 2 || !degree.is_multiple_of(2) {
            return Err(DivergenceError::InvalidParameter(
                "polynomial family degree must be even and at least 2".into(),
            ));
        }
        Ok(Self { degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `Σ θ_i x^i` by Horner's rule.
    pub fn log_unnormalized<T: Scalar>(&self, theta: &[T], x: T) -> T {
        theta.iter().rev().fold(T::zero(), |acc, &t| (acc + t) * x)
    }
}

impl<T: Scalar> ExpFamily<T> for PolynomialFamily {
    fn dim(&self) -> usize {
        self.degree
    }

    /// Integrable iff the leading coefficient is negative.
    fn in_domain(&self, theta: &[T]) -> bool {
        theta.len() == self.degree
            && theta.iter().all(|x| x.is_finite())
            && theta[self.degree - 1] < T::zero()
    }

    fn cumulant(&self, _theta: &[T]) -> Result<T> {
        Err(DivergenceError::CumulantUnavailable)
    }

    fn cumulant_gradient(&self, _theta: &[T]) -> Result<Vec<T>> {
        Err(DivergenceError::CumulantUnavailable)
    }
}

fn check_domain<T: Scalar, F: ExpFamily<T> + ?Sized>(fam: &F, theta: &[T]) -> Result<()> {
    if theta.len() != fam.dim() {
        return Err(DivergenceError::DimensionMismatch {
            expected: fam.dim(),
            got: theta.len(),
        });
    }
    if fam.in_domain(theta) {
        Ok(())
    } else {
        Err(DivergenceError::DomainViolation)
    }
}

fn check_weight<T: Scalar>(alpha: T) -> Result<()> {
    if alpha >= T::zero() && alpha <= T::one() {
        Ok(())
    } else {
        Err(DivergenceError::InvalidAlpha(alpha.as_f64()))
    }
}

/// `αθ1 + (1−α)θ2`.
pub fn interpolate<T: Scalar>(t1: &[T], t2: &[T], alpha: T) -> Vec<T> {
    axpby(alpha, t1, T::one() - alpha, t2)
}

/// `J_{F,α}(θ1, θ2) = αF(θ1) + (1−α)F(θ2) − F(αθ1 + (1−α)θ2)`.
pub fn skew_jensen<T: Scalar, F: ExpFamily<T> + ?Sized>(
    fam: &F,
    t1: &[T],
    t2: &[T],
    alpha: T,
) -> Result<T> {
    check_weight(alpha)?;
    check_domain(fam, t1)?;
    check_domain(fam, t2)?;
    if t1 == t2 {
        return Ok(T::zero());
    }
    let mid = interpolate(t1, t2, alpha);
    check_domain(fam, &mid)?;
    let v = alpha * fam.cumulant(t1)? + (T::one() - alpha) * fam.cumulant(t2)? - fam.cumulant(&mid)?;
    Ok(v.max(T::zero()))
}

/// `B_F(θ1, θ2) = F(θ1) − F(θ2) − ⟨∇F(θ2), θ1 − θ2⟩ = KL(p_θ2, p_θ1)`.
pub fn bregman<T: Scalar, F: ExpFamily<T> + ?Sized>(fam: &F, t1: &[T], t2: &[T]) -> Result<T> {
    check_domain(fam, t1)?;
    check_domain(fam, t2)?;
    if t1 == t2 {
        return Ok(T::zero());
    }
    let diff = axpby(T::one(), t1, -T::one(), t2);
    let v = fam.cumulant(t1)? - fam.cumulant(t2)? - dot(&fam.cumulant_gradient(t2)?, &diff);
    Ok(v.max(T::zero()))
}

/// `¼⟨θ2−θ1, ∇F(θ2)−∇F(θ1)⟩`, a quarter of the Jeffreys divergence.
fn quarter_jeffreys<T: Scalar, F: ExpFamily<T> + ?Sized>(fam: &F, t1: &[T], t2: &[T]) -> Result<T> {
    let dt = axpby(T::one(), t2, -T::one(), t1);
    let dg = axpby(T::one(), &fam.cumulant_gradient(t2)?, -T::one(), &fam.cumulant_gradient(t1)?);
    Ok(T::lit(0.25) * dot(&dt, &dg))
}

/// Balanced G-JSD `¼⟨θ2−θ1, ∇F(θ2)−∇F(θ1)⟩ − J_F(θ1, θ2)`.
pub fn gjsd_ef<T: Scalar, F: ExpFamily<T> + ?Sized>(
    fam: &F,
    t1: &[T],
    t2: &[T],
    base: LogBase,
) -> Result<T> {
    let j = skew_jensen(fam, t1, t2, T::half())?;
    if t1 == t2 {
        return Ok(T::zero());
    }
    let v = quarter_jeffreys(fam, t1, t2)? - j;
    Ok(base.from_nats(v.max(T::zero())))
}

/// Balanced extended G-JSD `¼⟨θ2−θ1, ∇F(θ2)−∇F(θ1)⟩ + exp(−J_F) − 1`, nats.
pub fn gjsd_extended_ef<T: Scalar, F: ExpFamily<T> + ?Sized>(
    fam: &F,
    t1: &[T],
    t2: &[T],
) -> Result<T> {
    let j = skew_jensen(fam, t1, t2, T::half())?;
    if t1 == t2 {
        return Ok(T::zero());
    }
    Ok(quarter_jeffreys(fam, t1, t2)? + (-j).exp_m1())
}

/// Dual skew G-JSD, i.e. the reverse-KL form, which equals `J_{F,α}`.
pub fn dual_gjsd_ef<T: Scalar, F: ExpFamily<T> + ?Sized>(
    fam: &F,
    t1: &[T],
    t2: &[T],
    alpha: T,
) -> Result<T> {
    skew_jensen(fam, t1, t2, alpha)
}

/// Gap `Z − log Z − 1` between the extended and normalized G-JSD, with
/// `Z = exp(−J_F)`. Nonnegative, nats.
pub fn gap_ef<T: Scalar, F: ExpFamily<T> + ?Sized>(fam: &F, t1: &[T], t2: &[T]) -> Result<T> {
    let j = skew_jensen(fam, t1, t2, T::half())?;
    Ok(j + (-j).exp_m1())
}

/// Natural parameter and log-scale of the unnormalized geometric mixture:
/// `p_θ1^α p_θ2^{1−α} = exp(log_scale) · p_θα`.
pub fn geometric_mixture_ef<T: Scalar, F: ExpFamily<T> + ?Sized>(
    fam: &F,
    t1: &[T],
    t2: &[T],
    alpha: T,
) -> Result<(Vec<T>, T)> {
    let j = skew_jensen(fam, t1, t2, alpha)?;
    Ok((interpolate(t1, t2, alpha), -j))
}
