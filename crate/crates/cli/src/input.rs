//! Density files and mean descriptors.
//!
//! Discrete densities are whitespace-separated decimals with `#` comments.
//! Gaussians are JSON objects `{"mu": [...], "sigma": [[...]]}`.

use std::fs;
use std::path::Path;

use geojsd::means::{MeanKind, MeanSpec, QuasiGenerator};
use geojsd::{Density, DivergenceError, Gaussian, Matrix};
use serde::Deserialize;

use crate::error::{CliError, Result};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn parse_weights(text: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| format!("line {}: `{tok}` is not a number", lineno + 1))?;
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err("no weights".into());
    }
    Ok(out)
}

/// Reads a discrete density. Weights summing to one (within tolerance) give
/// a probability vector; other sums give a positive measure unless
/// `normalize` is set, in which case the weights are divided by their sum.
pub fn discrete(path: &Path, normalize: bool) -> Result<Density> {
    let w = parse_weights(&read(path)?).map_err(|msg| CliError::Parse {
        path: path.to_owned(),
        msg,
    })?;
    let parsed = if normalize {
        Density::normalize(w)
    } else {
        match Density::normalized(w.clone()) {
            Err(DivergenceError::NotNormalized { .. }) => Density::positive(w),
            other => other,
        }
    };
    parsed.map_err(|e| CliError::Parse {
        path: path.to_owned(),
        msg: e.to_string(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGaussian {
    mu: Vec<f64>,
    sigma: Vec<Vec<f64>>,
}

/// Reads a Gaussian. Malformed JSON is an input error; a covariance that is
/// not positive definite is reported as a mathematical error.
pub fn gaussian(path: &Path) -> Result<Gaussian> {
    let raw: RawGaussian = serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        msg: e.to_string(),
    })?;
    let sigma = Matrix::from_rows(raw.sigma).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        msg: e.to_string(),
    })?;
    match Gaussian::new(raw.mu, sigma) {
        Err(e @ DivergenceError::NotPositiveDefinite) => Err(e.into()),
        other => other.map_err(|e| CliError::Parse {
            path: path.to_owned(),
            msg: e.to_string(),
        }),
    }
}

/// Parses `arithmetic`, `geometric`, `harmonic`, `power:<p>`, `exp`, `min`
/// or `max` (single-letter `a`/`g`/`h` also accepted) with skew weight
/// `alpha` on the first argument.
pub fn mean(desc: &str, alpha: f64) -> Result<MeanSpec<f64>> {
    let d = desc.trim().to_ascii_lowercase();
    let kind = match d.as_str() {
        "a" | "arithmetic" => MeanKind::Arithmetic,
        "g" | "geometric" => MeanKind::Geometric,
        "h" | "harmonic" => MeanKind::Power(-1.0),
        "exp" | "log-sum-exp" => MeanKind::QuasiArithmetic(QuasiGenerator::Exp),
        "min" => MeanKind::Min,
        "max" => MeanKind::Max,
        _ => match d.strip_prefix("power:") {
            Some(p) => MeanKind::Power(
                p.parse()
                    .map_err(|_| CliError::Usage(format!("bad power exponent in `{desc}`")))?,
            ),
            None => return Err(CliError::Usage(format!("unknown mean `{desc}`"))),
        },
    };
    MeanSpec::new(kind, alpha).map_err(|e| CliError::Usage(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_skip_comments_and_blank_lines() {
        let w = parse_weights("# header\n0.25 0.25\n\n0.5 # tail\n").unwrap();
        assert_eq!(w, vec![0.25, 0.25, 0.5]);
        assert!(parse_weights("# nothing").is_err());
        assert!(parse_weights("0.5 x").unwrap_err().contains("line 1"));
    }

    #[test]
    fn mean_descriptors() {
        assert_eq!(mean("G", 0.5).unwrap(), MeanSpec::geometric());
        assert_eq!(mean("power:2", 0.5).unwrap(), MeanSpec::power(2.0).unwrap());
        assert!(mean("power:x", 0.5).is_err());
        assert!(mean("median", 0.5).is_err());
        assert!(mean("min", 1.5).is_err());
    }
}
