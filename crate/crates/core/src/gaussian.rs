//! Closed forms for multivariate normal densities.
//!
//! Natural parameters use `θ_v = Σ⁻¹μ` and `θ_M = ½Σ⁻¹` with sufficient
//! statistic `t(x) = (x, −xxᵀ)`, so that `θ_M` is itself positive definite
//! and the log-normalizer is
//!
//! ```text
//! F(θ) = ½ (d log π − log|θ_M| + ½ θ_vᵀ θ_M⁻¹ θ_v)
//! ```
//!
//! With this convention `∇_{θ_v} F = μ` and `∇_{θ_M} F = −(Σ + μμᵀ)`.
//!
//! All matrix work goes through Cholesky factors. Explicit inverses appear
//! only where the result is itself a matrix (the harmonic barycenter `Σ_α`).
//!
//! The skewed geometric mixture `p1^α p2^{1−α}/Z` of two normals is the
//! normal with precision `αΣ1⁻¹ + (1−α)Σ2⁻¹`, see
//! [`geometric_mixture_params`]. Its normalizer is `Z = exp(−B_α)`.

use serde::{Deserialize, Serialize};

use crate::error::{DivergenceError, Result};
use crate::linalg::{axpby, Cholesky, Matrix};
use crate::scalar::Scalar;
use crate::special::{erf, erfc};

/// Mean vector and covariance of a `d`-variate normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGaussian<T>", into = "RawGaussian<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct GaussianParams<T: Scalar> {
    mu: Vec<T>,
    sigma: Matrix<T>,
    chol: Cholesky<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawGaussian<T> {
    mu: Vec<T>,
    sigma: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<RawGaussian<T>> for GaussianParams<T> {
    type Error = DivergenceError;
    fn try_from(raw: RawGaussian<T>) -> Result<Self> {
        Self::new(raw.mu, Matrix::from_rows(raw.sigma)?)
    }
}

impl<T: Scalar> From<GaussianParams<T>> for RawGaussian<T> {
    fn from(g: GaussianParams<T>) -> Self {
        Self {
            mu: g.mu,
            sigma: g.sigma.rows(),
        }
    }
}

impl<T: Scalar> GaussianParams<T> {
    pub fn new(mu: Vec<T>, sigma: Matrix<T>) -> Result<Self> {
        if sigma.dim() != mu.len() {
            return Err(DivergenceError::DimensionMismatch {
                expected: mu.len(),
                got: sigma.dim(),
            });
        }
        if mu.is_empty() || mu.iter().any(|m| !m.is_finite()) {
            return Err(DivergenceError::InvalidParameter("mean vector".into()));
        }
        if !sigma.is_symmetric(T::lit(T::SYMMETRY_TOL)) {
            return Err(DivergenceError::NotSymmetric);
        }
        let sigma = sigma.symmetrized();
        let chol = sigma.cholesky()?;
        Ok(Self { mu, sigma, chol })
    }

    /// `N(mean, variance)` in one dimension.
    pub fn univariate(mean: T, variance: T) -> Result<Self> {
        Self::new(vec![mean], Matrix::diagonal(&[variance]))
    }

    pub fn standard(d: usize) -> Self {
        Self::new(vec![T::zero(); d], Matrix::identity(d)).expect("identity covariance")
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn sigma(&self) -> &Matrix<T> {
        &self.sigma
    }

    pub fn cholesky(&self) -> &Cholesky<T> {
        &self.chol
    }

    pub fn log_det(&self) -> T {
        self.chol.log_det()
    }

    /// `log N(x; μ, Σ)`.
    pub fn log_pdf(&self, x: &[T]) -> T {
        let d = T::from_usize(self.dim()).unwrap();
        let diff = axpby(T::one(), x, -T::one(), &self.mu);
        -T::half() * (d * (T::two() * T::PI()).ln() + self.log_det() + self.chol.quad_form(&diff))
    }

    /// Law of `Ax + b` for `x ~ self`.
    pub fn affine(&self, a: &Matrix<T>, b: &[T]) -> Result<Self> {
        if a.dim() != self.dim() || b.len() != self.dim() {
            return Err(DivergenceError::DimensionMismatch {
                expected: self.dim(),
                got: a.dim(),
            });
        }
        let mu = axpby(T::one(), &a.matvec(&self.mu), T::one(), b);
        let sigma = a.matmul(&self.sigma).matmul(&a.transpose()).symmetrized();
        Self::new(mu, sigma)
    }
}

/// Natural parameters `(θ_v, θ_M) = (Σ⁻¹μ, ½Σ⁻¹)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct GaussianNatural<T: Scalar> {
    pub theta_v: Vec<T>,
    pub theta_m: Matrix<T>,
}

impl<T: Scalar> GaussianNatural<T> {
    pub fn dim(&self) -> usize {
        self.theta_v.len()
    }

    /// `a·self + b·other`, coordinate-wise.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        Self {
            theta_v: axpby(a, &self.theta_v, b, &other.theta_v),
            theta_m: self.theta_m.scale(a).add(&other.theta_m.scale(b)),
        }
    }

    /// `θ_v` followed by the row-major upper triangle of `θ_M`.
    pub fn pack(&self) -> Vec<T> {
        let d = self.dim();
        let mut out = self.theta_v.clone();
        for i in 0..d {
            for j in i..d {
                out.push(self.theta_m[(i, j)]);
            }
        }
        out
    }

    pub fn unpack(d: usize, packed: &[T]) -> Result<Self> {
        let expected = packed_len(d);
        if packed.len() != expected {
            return Err(DivergenceError::DimensionMismatch {
                expected,
                got: packed.len(),
            });
        }
        let mut theta_m = Matrix::zeros(d);
        let mut k = d;
        for i in 0..d {
            for j in i..d {
                theta_m[(i, j)] = packed[k];
                theta_m[(j, i)] = packed[k];
                k += 1;
            }
        }
        Ok(Self {
            theta_v: packed[..d].to_vec(),
            theta_m,
        })
    }
}

/// Length of a packed natural parameter for dimension `d`.
pub fn packed_len(d: usize) -> usize {
    d + d * (d + 1) / 2
}

pub fn to_natural<T: Scalar>(g: &GaussianParams<T>) -> GaussianNatural<T> {
    GaussianNatural {
        theta_v: g.chol.solve(&g.mu),
        theta_m: g.chol.inverse().scale(T::half()),
    }
}

pub fn from_natural<T: Scalar>(n: &GaussianNatural<T>) -> Result<GaussianParams<T>> {
    let ch = n.theta_m.cholesky()?;
    let mu = ch.solve(&n.theta_v).into_iter().map(|x| x * T::half()).collect();
    GaussianParams::new(mu, ch.inverse().scale(T::half()))
}

/// Log-normalizer `F(θ)` in natural coordinates.
pub fn cumulant<T: Scalar>(n: &GaussianNatural<T>) -> Result<T> {
    let ch = n.theta_m.cholesky()?;
    let d = T::from_usize(n.dim()).unwrap();
    Ok(T::half() * (d * T::PI().ln() - ch.log_det() + T::half() * ch.quad_form(&n.theta_v)))
}

/// The same log-normalizer from ordinary parameters:
/// `½(μᵀΣ⁻¹μ + log|Σ| + d log 2π)`.
pub fn cumulant_ordinary<T: Scalar>(g: &GaussianParams<T>) -> T {
    let d = T::from_usize(g.dim()).unwrap();
    T::half() * (g.chol.quad_form(&g.mu) + g.log_det() + d * (T::two() * T::PI()).ln())
}

/// `∇F` in packed coordinates. Off-diagonal `θ_M` entries appear once in
/// the packing but twice in the matrix, so their partials are doubled.
pub fn cumulant_gradient<T: Scalar>(n: &GaussianNatural<T>) -> Result<Vec<T>> {
    let g = from_natural(n)?;
    let d = g.dim();
    let mut out = g.mu.clone();
    for i in 0..d {
        for j in i..d {
            let second = g.sigma[(i, j)] + g.mu[i] * g.mu[j];
            let w = if i == j { T::one() } else { T::two() };
            out.push(-w * second);
        }
    }
    Ok(out)
}

fn same_dim<T: Scalar>(g1: &GaussianParams<T>, g2: &GaussianParams<T>) -> Result<()> {
    if g1.dim() == g2.dim() {
        Ok(())
    } else {
        Err(DivergenceError::DimensionMismatch {
            expected: g1.dim(),
            got: g2.dim(),
        })
    }
}

fn check_open_unit<T: Scalar>(x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(DivergenceError::InvalidAlpha(x.as_f64()))
    }
}

/// `tr(Σ2⁻¹ Σ1)` without forming the inverse.
fn trace_solve<T: Scalar>(g2: &GaussianParams<T>, g1: &GaussianParams<T>) -> T {
    g2.chol.solve_matrix(&g1.sigma).trace()
}

/// `KL(N1 ‖ N2)` in nats.
pub fn kl_gaussian<T: Scalar>(g1: &GaussianParams<T>, g2: &GaussianParams<T>) -> Result<T> {
    same_dim(g1, g2)?;
    let d = T::from_usize(g1.dim()).unwrap();
    let diff = axpby(T::one(), &g2.mu, -T::one(), &g1.mu);
    let v = T::half()
        * (trace_solve(g2, g1) + g2.chol.quad_form(&diff) - d + g2.log_det() - g1.log_det());
    Ok(v.max(T::zero()))
}

/// Jeffreys divergence `KL(N1‖N2) + KL(N2‖N1)`, in one pass.
pub fn jeffreys_gaussian<T: Scalar>(g1: &GaussianParams<T>, g2: &GaussianParams<T>) -> Result<T> {
    same_dim(g1, g2)?;
    let d = T::from_usize(g1.dim()).unwrap();
    let diff = axpby(T::one(), &g1.mu, -T::one(), &g2.mu);
    let v = T::half()
        * (trace_solve(g2, g1) + trace_solve(g1, g2) + g1.chol.quad_form(&diff)
            + g2.chol.quad_form(&diff)
            - T::two() * d);
    Ok(v.max(T::zero()))
}

/// Skew Bhattacharyya distance `B_α = −log ∫ p1^α p2^{1−α}` in nats.
///
/// With `S = (1−α)Σ1 + αΣ2`:
/// `B_α = α(1−α)/2 · ΔμᵀS⁻¹Δμ + ½ log(|S| / (|Σ1|^{1−α} |Σ2|^α))`.
pub fn bhattacharyya_gaussian<T: Scalar>(
    g1: &GaussianParams<T>,
    g2: &GaussianParams<T>,
    alpha: T,
) -> Result<T> {
    same_dim(g1, g2)?;
    check_open_unit(alpha)?;
    let beta = T::one() - alpha;
    let s = g1.sigma.scale(beta).add(&g2.sigma.scale(alpha)).cholesky()?;
    let diff = axpby(T::one(), &g1.mu, -T::one(), &g2.mu);
    let v = alpha * beta * T::half() * s.quad_form(&diff)
        + T::half() * (s.log_det() - beta * g1.log_det() - alpha * g2.log_det());
    Ok(v.max(T::zero()))
}

struct Barycenter<T: Scalar> {
    precision: Cholesky<T>,
    /// `αΣ1⁻¹μ1 + (1−α)Σ2⁻¹μ2`
    h: Vec<T>,
}

fn barycenter<T: Scalar>(
    g1: &GaussianParams<T>,
    g2: &GaussianParams<T>,
    alpha: T,
) -> Result<Barycenter<T>> {
    same_dim(g1, g2)?;
    check_open_unit(alpha)?;
    let beta = T::one() - alpha;
    let p = g1
        .chol
        .inverse()
        .scale(alpha)
        .add(&g2.chol.inverse().scale(beta))
        .symmetrized();
    let h = axpby(alpha, &g1.chol.solve(&g1.mu), beta, &g2.chol.solve(&g2.mu));
    Ok(Barycenter {
        precision: p.cholesky()?,
        h,
    })
}

/// Parameters of the normalized geometric mixture `p1^α p2^{1−α}/Z`:
/// `Σ_α = (αΣ1⁻¹ + (1−α)Σ2⁻¹)⁻¹`, `μ_α = Σ_α(αΣ1⁻¹μ1 + (1−α)Σ2⁻¹μ2)`.
pub fn geometric_mixture_params<T: Scalar>(
    g1: &GaussianParams<T>,
    g2: &GaussianParams<T>,
    alpha: T,
) -> Result<GaussianParams<T>> {
    let b = barycenter(g1, g2, alpha)?;
    GaussianParams::new(b.precision.solve(&b.h), b.precision.inverse())
}

/// `B_α` through the skew Jensen gap of the cumulant, written with the
/// harmonic barycenter:
/// `½(αμ1ᵀΣ1⁻¹μ1 + (1−α)μ2ᵀΣ2⁻¹μ2 − μ_αᵀΣ_α⁻¹μ_α + log(|Σ1|^α|Σ2|^{1−α}/|Σ_α|))`.
///
/// Agrees with [`bhattacharyya_gaussian`]; kept as an independent route.
pub fn bhattacharyya_gaussian_barycentric<T: Scalar>(
    g1: &GaussianParams<T>,
    g2: &GaussianParams<T>,
    alpha: T,
) -> Result<T> {
    let b = barycenter(g1, g2, alpha)?;
    let beta = T::one() - alpha;
    // log|Σ_α| = −log|P|
    let v = T::half()
        * (alpha * g1.chol.quad_form(&g1.mu) + beta * g2.chol.quad_form(&g2.mu)
            - b.precision.quad_form(&b.h)
            + alpha * g1.log_det()
            + beta * g2.log_det()
            + b.precision.log_det());
    Ok(v.max(T::zero()))
}

/// Skew G-JSD `β KL(p1, G_α) + (1−β) KL(p2, G_α)` with `G_α` the normalized
/// geometric mixture.
pub fn gjsd_gaussian<T: Scalar>(
    g1: &GaussianParams<T>,
    g2: &GaussianParams<T>,
    alpha: T,
    beta: T,
) -> Result<T> {
    check_open_unit(beta)?;
    let mix = geometric_mixture_params(g1, g2, alpha)?;
    Ok(beta * kl_gaussian(g1, &mix)? + (T::one() - beta) * kl_gaussian(g2, &mix)?)
}

/// Balanced G-JSD through `¼J − B`.
pub fn gjsd_gaussian_identity<T: Scalar>(
    g1: &GaussianParams<T>,
    g2: &GaussianParams<T>,
) -> Result<T> {
    let j = jeffreys_gaussian(g1, g2)?;
    let b = bhattacharyya_gaussian(g1, g2, T::half())?;
    Ok((T::lit(0.25) * j - b).max(T::zero()))
}

/// Extended G-JSD with the unnormalized geometric mixture, balanced:
/// `¼J + exp(−B) − 1`.
pub fn gjsd_extended_gaussian<T: Scalar>(
    g1: &GaussianParams<T>,
    g2: &GaussianParams<T>,
) -> Result<T> {
    let j = jeffreys_gaussian(g1, g2)?;
    let b = bhattacharyya_gaussian(g1, g2, T::half())?;
    Ok(T::lit(0.25) * j + (-b).exp_m1())
}

/// Skewed extended G-JSD. Exceeds [`gjsd_gaussian`] by `Z − log Z − 1`
/// with `Z = exp(−B_α)`.
pub fn gjsd_extended_gaussian_skew<T: Scalar>(
    g1: &GaussianParams<T>,
    g2: &GaussianParams<T>,
    alpha: T,
    beta: T,
) -> Result<T> {
    let b = bhattacharyya_gaussian(g1, g2, alpha)?;
    Ok(gjsd_gaussian(g1, g2, alpha, beta)? + b + (-b).exp_m1())
}

/// `KL⁺(p1, p1^α p2^{1−α}) = (1−α) KL(p1, p2) + exp(−B_α) − 1`.
pub fn kl_extended_to_geometric<T: Scalar>(
    g1: &GaussianParams<T>,
    g2: &GaussianParams<T>,
    alpha: T,
) -> Result<T> {
    let b = bhattacharyya_gaussian(g1, g2, alpha)?;
    Ok((T::one() - alpha) * kl_gaussian(g1, g2)? + (-b).exp_m1())
}

/// Relative threshold below which two standard deviations count as equal.
pub const TV_EQUAL_SIGMA_TOL: f64 = 1e-12;

fn check_sd<T: Scalar>(s: T) -> Result<()> {
    if s > T::zero() && s.is_finite() {
        Ok(())
    } else {
        Err(DivergenceError::NonPositiveInput(s.as_f64()))
    }
}

/// `erf(a) − erf(b)`, switching to `erfc` when both arguments sit in the
/// same tail.
fn erf_diff<T: Scalar>(a: T, b: T) -> T {
    if a > T::zero() && b > T::zero() {
        erfc(b) - erfc(a)
    } else if a < T::zero() && b < T::zero() {
        erfc(-a) - erfc(-b)
    } else {
        erf(a) - erf(b)
    }
}

/// The two points where `N(m1, s1²)` and `N(m2, s2²)` densities cross.
///
/// Roots of `ax² + bx + c` from `log p1 = log p2`:
/// `a = 1/s1² − 1/s2²`, `b = 2(m2/s2² − m1/s1²)`,
/// `c = m1²/s1² − m2²/s2² − 2 log(s2/s1)`.
pub fn crossover_points<T: Scalar>(m1: T, s1: T, m2: T, s2: T) -> Result<(T, T)> {
    check_sd(s1)?;
    check_sd(s2)?;
    if (s1 - s2).abs() <= T::lit(TV_EQUAL_SIGMA_TOL) * s1.max(s2) {
        return Err(DivergenceError::DegenerateQuadratic);
    }
    let (v1, v2) = (s1 * s1, s2 * s2);
    let a = v1.recip() - v2.recip();
    let b = T::two() * (m2 / v2 - m1 / v1);
    let c = m1 * m1 / v1 - m2 * m2 / v2 - T::two() * (s2 / s1).ln();
    let disc = (b * b - T::lit(4.0) * a * c).max(T::zero());
    let sign = if b < T::zero() { -T::one() } else { T::one() };
    let q = -T::half() * (b + sign * disc.sqrt());
    if q == T::zero() {
        return Err(DivergenceError::DegenerateQuadratic);
    }
    let (r1, r2) = (q / a, c / q);
    Ok((r1.min(r2), r1.max(r2)))
}

/// Total variation `½∫|p1 − p2|` between `N(m1, s1²)` and `N(m2, s2²)`.
/// `s1`, `s2` are standard deviations.
///
/// Equal spreads use the single crossover `x* = (m1+m2)/2`, which gives
/// `|Φ(x*; m2) − Φ(x*; m1)| = erf(|m1−m2| / (2√2 s))`. Otherwise
/// `TV = ½ Σ_k |erf((x_k−m1)/(√2 s1)) − erf((x_k−m2)/(√2 s2))|` over both
/// crossover points.
pub fn tv_gaussian_1d<T: Scalar>(m1: T, s1: T, m2: T, s2: T) -> Result<T> {
    check_sd(s1)?;
    check_sd(s2)?;
    if !m1.is_finite() || !m2.is_finite() {
        return Err(DivergenceError::InvalidParameter("mean".into()));
    }
    let tv = match crossover_points(m1, s1, m2, s2) {
        Err(DivergenceError::DegenerateQuadratic) => {
            if m1 == m2 {
                return Ok(T::zero());
            }
            let s = T::half() * (s1 + s2);
            erf((m1 - m2).abs() / (T::two() * T::SQRT_2() * s))
        }
        Err(e) => return Err(e),
        Ok((x1, x2)) => {
            let (r1, r2) = (T::SQRT_2() * s1, T::SQRT_2() * s2);
            let term = |x: T| erf_diff((x - m1) / r1, (x - m2) / r2).abs();
            T::half() * (term(x1) + term(x2))
        }
    };
    Ok(tv.max(T::zero()).min(T::one()))
}
