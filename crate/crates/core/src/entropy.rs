//! Shannon entropy over discrete distributions.

use alloc::format;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution handed to [`entropy`].
pub const SUM_TOLERANCE: f64 = 1e-6;

/// Logarithm base used when reporting an entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LogBase {
    #[default]
    Nats,
    Bits,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Nats => libm::log(x),
            LogBase::Bits => libm::log2(x),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::Nats => "nats",
            LogBase::Bits => "bits",
        }
    }
}

impl core::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nats" => Ok(LogBase::Nats),
            "bits" => Ok(LogBase::Bits),
            other => Err(Error::InvalidRecord(format!("unknown entropy base `{other}`"))),
        }
    }
}

/// Checks that `p` is a probability vector: entries in `[0, 1]` summing to
/// one within [`SUM_TOLERANCE`].
pub fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty vector".into()));
    }
    if let Some(x) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidDistribution(format!("entry {x} outside [0, 1]")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
    }
    Ok(())
}

/// `-sum p_i log p_i` with `0 log 0 = 0`.
pub fn entropy(p: &[f64], base: LogBase) -> Result<f64> {
    check_distribution(p)?;
    Ok(entropy_unchecked(p, base))
}

/// Entropy without validating `p`. The result is clamped at zero so rounding
/// never produces `-0.0` or tiny negatives.
pub(crate) fn entropy_unchecked(p: &[f64], base: LogBase) -> f64 {
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * base.log(x)).sum();
    h.max(0.0)
}
