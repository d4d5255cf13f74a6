//! Pareto per-MS traffic demand.
//!
//! Rates are spectral efficiencies in nats; bit-valued inputs are converted
//! with `ln 2` on construction.

use std::f64::consts::LN_2;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficLaw {
    pub theta: f64,
    /// Minimum rate in nats.
    pub rho_min: f64,
}

impl TrafficLaw {
    pub fn new(theta: f64, rho_min: f64) -> Result<Self> {
        if !(theta > 1.0 && theta <= 2.0) {
            return Err(Error::config("theta", format!("tail index must lie in (1,2], got {theta}")));
        }
        if !(rho_min > 0.0) || !rho_min.is_finite() {
            return Err(Error::config("rho_min", format!("minimum rate must be positive, got {rho_min}")));
        }
        Ok(Self { theta, rho_min })
    }

    /// Law with the minimum rate given in bits.
    pub fn from_bits(theta: f64, rho_min_bits: f64) -> Result<Self> {
        Self::new(theta, rho_min_bits * LN_2)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        pareto_pdf(x, self)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.ccdf(x)
    }

    pub fn ccdf(&self, x: f64) -> f64 {
        if x <= self.rho_min {
            1.0
        } else {
            (self.rho_min / x).powf(self.theta)
        }
    }

    pub fn mean(&self) -> f64 {
        self.theta * self.rho_min / (self.theta - 1.0)
    }

    /// `E[ρ · 1{ρ < t}]`.
    pub fn truncated_mean(&self, t: f64) -> f64 {
        if t <= self.rho_min {
            return 0.0;
        }
        self.mean() * (1.0 - (self.rho_min / t).powf(self.theta - 1.0))
    }

    /// Inverse CDF at `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.rho_min * (1.0 - u).powf(-1.0 / self.theta)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_rate(self, rng)
    }
}

pub fn pareto_pdf(x: f64, law: &TrafficLaw) -> f64 {
    if x < law.rho_min {
        0.0
    } else {
        law.theta * law.rho_min.powf(law.theta) / x.powf(law.theta + 1.0)
    }
}

/// Mean traffic of the typical cell, `(λ_M/λ_B) θ ρ_min / (θ - 1)`.
pub fn mean_cell_traffic(law: &TrafficLaw, lambda_m: f64, lambda_b: f64) -> Result<f64> {
    if !(lambda_m >= 0.0 && lambda_b > 0.0) {
        return Err(Error::domain("mean_cell_traffic", "intensities must be non-negative with lambda_b > 0"));
    }
    Ok(lambda_m / lambda_b * law.mean())
}

pub fn sample_rate<R: Rng + ?Sized>(law: &TrafficLaw, rng: &mut R) -> f64 {
    law.quantile(rng.random::<f64>())
}
