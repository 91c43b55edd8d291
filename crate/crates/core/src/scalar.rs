//! Floating-point scalar abstraction shared by the exact and closed-form code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the divergence code is generic over (`f32` or `f64`).
///
/// Tolerances are per-type: an `f32` density cannot be normalized to 1e-12.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Maximum `|Σw − 1|` accepted as already normalized.
    const NORMALIZATION_TOL: f64;
    /// Maximum `|Σw − 1|` silently repaired by renormalization.
    const RENORMALIZE_TOL: f64;
    /// Relative asymmetry accepted in a covariance matrix.
    const SYMMETRY_TOL: f64;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Scalar for f64 {
    const NORMALIZATION_TOL: f64 = 1e-12;
    const RENORMALIZE_TOL: f64 = 1e-9;
    const SYMMETRY_TOL: f64 = 1e-12;
}

impl Scalar for f32 {
    const NORMALIZATION_TOL: f64 = 1e-6;
    const RENORMALIZE_TOL: f64 = 1e-4;
    const SYMMETRY_TOL: f64 = 1e-6;
}
