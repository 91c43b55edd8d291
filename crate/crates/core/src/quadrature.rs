//! Adaptive Simpson integration on a finite interval.
//!
//! Used for one-dimensional oracles and the γ-divergence quadrature route.
//! [`integrate_log`] integrates `exp(g)` for a log-integrand `g` after
//! shifting by its maximum on a coarse grid, so that tiny integrals are
//! returned as logarithms instead of underflowing.

use crate::error::{DivergenceError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub lo: f64,
    pub hi: f64,
    /// Absolute tolerance.
    pub tol: f64,
    pub max_depth: u32,
}

impl Quadrature {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            tol: 1e-9,
            max_depth: 50,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Interval `[min μ − 12 max σ, max μ + 12 max σ]` covering two normals.
    pub fn for_normals(m1: f64, s1: f64, m2: f64, s2: f64) -> Self {
        let s = s1.max(s2);
        Self::new(m1.min(m2) - 12.0 * s, m1.max(m2) + 12.0 * s)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(DivergenceError::InvalidParameter(format!(
                "quadrature interval [{}, {}]",
                self.lo, self.hi
            )));
        }
        // A few panels up front so narrow peaks are not missed by the first
        // Simpson estimate.
        const PANELS: usize = 64;
        let h = (self.hi - self.lo) / PANELS as f64;
        let tol = self.tol / PANELS as f64;
        let mut total = 0.0;
        for k in 0..PANELS {
            let a = self.lo + h * k as f64;
            let b = if k + 1 == PANELS { self.hi } else { a + h };
            let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
            let whole = simpson(a, b, fa, fm, fb);
            total += adapt(&f, a, b, fa, fm, fb, whole, tol, self.max_depth)?;
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(DivergenceError::DivergentIntegral)
        }
    }

    /// `log ∫ exp(g(x)) dx`.
    pub fn integrate_log<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        const GRID: usize = 2048;
        let h = (self.hi - self.lo) / GRID as f64;
        let shift = (0..=GRID)
            .map(|k| g(self.lo + h * k as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        if !shift.is_finite() {
            return Err(DivergenceError::DivergentIntegral);
        }
        let rel = Self {
            tol: self.tol * 1e-3,
            ..*self
        };
        let v = rel.integrate(|x| (g(x) - shift).exp())?;
        Ok(shift + v.ln())
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(DivergenceError::DivergentIntegral);
    }
    if delta.abs() <= 15.0 * tol || (b - a) < 1e-12 {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(DivergenceError::NoConvergence { iterations: 0 });
    }
    Ok(adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}
