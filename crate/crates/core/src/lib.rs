//! # geojsd
//!
//! Jensen–Shannon-type divergences built on generalized mixtures.
//!
//! The ordinary Jensen–Shannon divergence compares two densities with their
//! arithmetic mixture. Replacing the arithmetic mean with another weighted
//! mean `M_α` (geometric, power, min, max, ...) gives the M-JSD. Two variants
//! are provided:
//!
//! | Variant | Mixture | Divergence | Name here |
//! |---------|---------|------------|-----------|
//! | normalized | `M_α(p1,p2)/Z` | KL | [`discrete::js_m`] |
//! | extended | `M_α(p1,p2)` (no `Z`) | extended KL | [`discrete::js_m_extended`] |
//!
//! For normalized inputs they differ by the gap `Z − log Z − 1 ≥ 0` (nats).
//! With the geometric mean, both reduce to Jeffreys and Bhattacharyya terms:
//! `JS_G = ¼J − B` and `JS⁺_G = ¼J + BC − 1`.
//!
//! ## Modules
//!
//! - [`means`]: weighted scalar means and their log-domain evaluation.
//! - [`discrete`]: exact sums over finite supports, f-divergences, Chernoff
//!   information, coarse graining.
//! - [`expfam`]: cumulant-based forms for exponential families.
//! - [`gaussian`]: multivariate normal closed forms and univariate total
//!   variation.
//! - [`estimate`]: Monte Carlo estimators and projective γ-divergences for
//!   cases without closed forms.
//! - [`verify`]: self-check suites (identities, bounds, counterexamples).
//!
//! The exact and closed-form code is generic over [`Scalar`] (`f32`/`f64`);
//! the aliases below fix it to `f64`. Stochastic estimators work in `f64`.
//!
//! ```
//! use geojsd::{Density, Mean, LogBase, discrete};
//!
//! let p = Density::normalized(vec![0.5, 0.5]).unwrap();
//! let q = Density::normalized(vec![0.25, 0.75]).unwrap();
//! let g = discrete::js_m(&p, &q, &Mean::geometric(), 0.5, LogBase::Nats).unwrap();
//! let j = discrete::jeffreys(&p, &q, LogBase::Nats).unwrap();
//! let b = discrete::bhattacharyya(&p, &q, 0.5, LogBase::Nats).unwrap();
//! assert!((g - (0.25 * j - b)).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base;
pub mod discrete;
pub mod error;
pub mod estimate;
pub mod expfam;
pub mod gaussian;
pub mod linalg;
pub mod means;
pub mod quadrature;
pub mod result;
pub mod scalar;
pub mod special;
pub mod verify;

pub use base::LogBase;
pub use error::{DivergenceError, Result};
pub use result::{DivergenceResult, Method};
pub use scalar::Scalar;

pub type Density = discrete::DiscreteDensity<f64>;
pub type Density32 = discrete::DiscreteDensity<f32>;
pub type Mean = means::MeanSpec<f64>;
pub type Mean32 = means::MeanSpec<f32>;
pub type Gaussian = gaussian::GaussianParams<f64>;
pub type Gaussian32 = gaussian::GaussianParams<f32>;
pub type Natural = gaussian::GaussianNatural<f64>;
pub type Matrix = linalg::Matrix<f64>;
