//! Error function and normal CDF.

use crate::scalar::Scalar;

pub fn erf<T: Scalar>(x: T) -> T {
    T::lit(libm::erf(x.as_f64()))
}

pub fn erfc<T: Scalar>(x: T) -> T {
    T::lit(libm::erfc(x.as_f64()))
}

/// `Φ((x − μ)/σ)`, via `erfc` so the lower tail keeps relative precision.
pub fn normal_cdf<T: Scalar>(x: T, mu: T, sigma: T) -> T {
    let z = (x - mu) / (sigma * T::SQRT_2());
    T::half() * erfc(-z)
}

/// `log N(x; μ, σ²)`.
pub fn normal_log_pdf<T: Scalar>(x: T, mu: T, sigma: T) -> T {
    let z = (x - mu) / sigma;
    -T::half() * z * z - sigma.ln() - T::half() * (T::two() * T::PI()).ln()
}
