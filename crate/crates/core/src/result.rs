use serde::Serialize;

use crate::base::LogBase;

/// How a reported value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Finite summation over a discrete support.
    Exact,
    ClosedForm,
    MonteCarlo,
    Quadrature,
}

/// A divergence value together with the metadata needed to interpret it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceResult {
    pub value: f64,
    pub base: LogBase,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_star: Option<f64>,
}

impl DivergenceResult {
    pub fn new(value: f64, base: LogBase, method: Method) -> Self {
        Self {
            value,
            base,
            method,
            std_error: None,
            alpha_star: None,
        }
    }

    pub fn with_std_error(mut self, std_error: f64) -> Self {
        self.std_error = Some(std_error);
        self
    }

    pub fn with_alpha_star(mut self, alpha_star: f64) -> Self {
        self.alpha_star = Some(alpha_star);
        self
    }
}
