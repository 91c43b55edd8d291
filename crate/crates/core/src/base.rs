use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Unit in which information quantities are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    /// Natural logarithm.
    #[default]
    Nats,
    /// Base-2 logarithm.
    Bits,
}

impl LogBase {
    /// `log_b(x)`.
    #[inline]
    pub fn log<T: Scalar>(self, x: T) -> T {
        match self {
            LogBase::Nats => x.ln(),
            LogBase::Bits => x.log2(),
        }
    }

    /// Rescales a value expressed in nats.
    #[inline]
    pub fn from_nats<T: Scalar>(self, nats: T) -> T {
        match self {
            LogBase::Nats => nats,
            LogBase::Bits => nats / T::LN_2(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::Nats => "nats",
            LogBase::Bits => "bits",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nats" | "nat" | "e" => Ok(LogBase::Nats),
            "bits" | "bit" | "2" => Ok(LogBase::Bits),
            other => Err(format!("unknown log base `{other}` (expected nats or bits)")),
        }
    }
}
