use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{AuctionError, Result};

/// Bid prior on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BidDistribution {
    UniformUnit,
    TruncatedExponential { rate: f64 },
    TruncatedGaussian { mean: f64, std_dev: f64 },
}

impl BidDistribution {
    pub fn exponential() -> Self {
        BidDistribution::TruncatedExponential { rate: 1.0 }
    }

    pub fn gaussian() -> Self {
        BidDistribution::TruncatedGaussian { mean: 0.5, std_dev: 0.2 }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BidDistribution::UniformUnit => "uniform",
            BidDistribution::TruncatedExponential { .. } => "exponential",
            BidDistribution::TruncatedGaussian { .. } => "gaussian",
        }
    }

    pub fn check(&self) -> Result<()> {
        let ok = match *self {
            BidDistribution::UniformUnit => true,
            BidDistribution::TruncatedExponential { rate } => rate.is_finite() && rate > 0.0,
            BidDistribution::TruncatedGaussian { mean, std_dev } => {
                mean.is_finite() && std_dev.is_finite() && std_dev > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(AuctionError::Config(format!("invalid distribution parameters {self:?}")))
        }
    }

    fn standard() -> Normal {
        Normal::new(0.0, 1.0).expect("standard normal")
    }

    pub fn cdf(&self, b: f64) -> f64 {
        let b = b.clamp(0.0, 1.0);
        match *self {
            BidDistribution::UniformUnit => b,
            BidDistribution::TruncatedExponential { rate } => {
                (-(-rate * b).exp_m1()) / (-(-rate).exp_m1())
            }
            BidDistribution::TruncatedGaussian { mean, std_dev } => {
                let n = Self::standard();
                let lo = n.cdf(-mean / std_dev);
                let z = n.cdf((1.0 - mean) / std_dev) - lo;
                (n.cdf((b - mean) / std_dev) - lo) / z
            }
        }
    }

    pub fn pdf(&self, b: f64) -> f64 {
        if !(0.0..=1.0).contains(&b) {
            return 0.0;
        }
        match *self {
            BidDistribution::UniformUnit => 1.0,
            BidDistribution::TruncatedExponential { rate } => {
                rate * (-rate * b).exp() / (-(-rate).exp_m1())
            }
            BidDistribution::TruncatedGaussian { mean, std_dev } => {
                let n = Self::standard();
                let z = n.cdf((1.0 - mean) / std_dev) - n.cdf(-mean / std_dev);
                n.pdf((b - mean) / std_dev) / (std_dev * z)
            }
        }
    }

    /// `φ(b) = b − (1 − F(b)) / f(b)`.
    pub fn virtual_bid(&self, b: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&b) {
            return Err(AuctionError::OutsideSupport(b));
        }
        Ok(self.virtual_unchecked(b))
    }

    fn virtual_unchecked(&self, b: f64) -> f64 {
        match *self {
            BidDistribution::UniformUnit => 2.0 * b - 1.0,
            BidDistribution::TruncatedExponential { rate } => b + (-rate * (1.0 - b)).exp_m1() / rate,
            BidDistribution::TruncatedGaussian { mean, std_dev } => {
                let n = Self::standard();
                let zb = (b - mean) / std_dev;
                let tail = n.sf(zb) - n.sf((1.0 - mean) / std_dev);
                b - std_dev * tail / n.pdf(zb)
            }
        }
    }

    /// `[φ(0), φ(1)]`.
    pub fn virtual_range(&self) -> (f64, f64) {
        (self.virtual_unchecked(0.0), self.virtual_unchecked(1.0))
    }

    /// The bid whose virtual value is `value`, by bisection on the
    /// increasing map `φ`.
    pub fn inverse_virtual_bid(&self, value: f64) -> Result<f64> {
        let (lo_v, hi_v) = self.virtual_range();
        let slack = 1e-12;
        if !value.is_finite() || value < lo_v - slack || value > hi_v + slack {
            return Err(AuctionError::OutsideRange { value, lo: lo_v, hi: hi_v });
        }
        if let BidDistribution::UniformUnit = self {
            return Ok(((value + 1.0) / 2.0).clamp(0.0, 1.0));
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if self.virtual_unchecked(mid) < value {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Inverse-cdf sample.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.gen();
        match *self {
            BidDistribution::UniformUnit => u,
            BidDistribution::TruncatedExponential { rate } => {
                -(u * (-rate).exp_m1()).ln_1p() / rate
            }
            BidDistribution::TruncatedGaussian { mean, std_dev } => {
                let n = Self::standard();
                let lo = n.cdf(-mean / std_dev);
                let hi = n.cdf((1.0 - mean) / std_dev);
                (mean + std_dev * n.inverse_cdf(lo + u * (hi - lo))).clamp(0.0, 1.0)
            }
        }
    }
}

impl FromStr for BidDistribution {
    type Err = AuctionError;

    /// Named defaults: `uniform`, `exponential` (λ = 1), `gaussian`
    /// (μ = 0.5, σ = 0.2).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(BidDistribution::UniformUnit),
            "exponential" => Ok(BidDistribution::exponential()),
            "gaussian" => Ok(BidDistribution::gaussian()),
            other => Err(AuctionError::Config(format!("unknown distribution `{other}`"))),
        }
    }
}
