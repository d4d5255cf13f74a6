//! Scenario parameters shared by both allocation schemes.

use std::f64::consts::PI;

use crate::channel::FadingParams;
use crate::energy::{NumeratorExponent, PowerModel};
use crate::error::{Error, Result};
use crate::interference::{stable_scale, InterfererModel, StableLaw};
use crate::traffic::TrafficLaw;

/// Noise level used as the water-filling floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaterfillNoise {
    /// The interference power drawn for each MS.
    Interference,
    /// A fixed level in W.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    /// BS intensity, per m².
    pub lambda_b: f64,
    /// MS intensity, per m².
    pub lambda_m: f64,
    /// Interfering-BS intensity, per m².
    pub lambda_inf: f64,
    pub sigma: f64,
    pub fading: FadingParams,
    pub traffic: TrafficLaw,
    pub power: PowerModel,
    /// `E{P_T^α}` of interfering BSs, W^α.
    pub tx_power_moment: f64,
    pub bandwidth: f64,
    pub numerator: NumeratorExponent,
    pub waterfill_noise: WaterfillNoise,
}

/// Parameter names accepted by [`NetworkConfig::with_param`].
pub const PARAMS: &[&str] = &[
    "lambda_ratio",
    "lambda_b_per_m2",
    "lambda_m_per_m2",
    "lambda_inf_per_m2",
    "lambda_inf_fraction",
    "pathloss_exponent",
    "nakagami_m",
    "shadowing_sigma_db",
    "nt",
    "nr",
    "tail_index",
    "rho_min_bits",
    "eta",
    "p_dyn_watt",
    "p_sta_watt",
    "p_max_watt",
    "tx_power_moment_w_alpha",
    "bandwidth",
];

impl NetworkConfig {
    /// The evaluation scenario: 800 m mean cell radius, 30 MSs per cell,
    /// 90% of BSs interfering, σ = 4, 8×4 antennas, m = 1, 6 dB shadowing.
    pub fn baseline() -> Self {
        let lambda_b = 1.0 / (PI * 800.0 * 800.0);
        Self {
            lambda_b,
            lambda_m: 30.0 * lambda_b,
            lambda_inf: 0.9 * lambda_b,
            sigma: 4.0,
            fading: FadingParams::new(1.0, 6.0, 8, 4).expect("valid defaults"),
            traffic: TrafficLaw::from_bits(1.8, 2.5).expect("valid defaults"),
            power: PowerModel::new(0.38, 83.0, 45.5, 40.0).expect("valid defaults"),
            tx_power_moment: 1e-2,
            bandwidth: 1.0,
            numerator: NumeratorExponent::Squared,
            waterfill_noise: WaterfillNoise::Interference,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_b > 0.0) || !self.lambda_b.is_finite() {
            return Err(Error::config("lambda_b_per_m2", "BS intensity must be positive"));
        }
        if !(self.lambda_m >= 0.0) || !self.lambda_m.is_finite() {
            return Err(Error::config("lambda_m_per_m2", "MS intensity must be >= 0"));
        }
        if !(self.lambda_inf >= 0.0 && self.lambda_inf <= self.lambda_b * (1.0 + 1e-12)) {
            return Err(Error::config("lambda_inf_per_m2", "interferer intensity must lie in [0, lambda_b]"));
        }
        if !(self.sigma > 2.0) || !self.sigma.is_finite() {
            return Err(Error::config("pathloss_exponent", format!("sigma must exceed 2, got {}", self.sigma)));
        }
        if !(self.tx_power_moment > 0.0) {
            return Err(Error::config("tx_power_moment_w_alpha", "must be positive"));
        }
        if !(self.bandwidth > 0.0) || !self.bandwidth.is_finite() {
            return Err(Error::config("bandwidth", "must be positive"));
        }
        if let WaterfillNoise::Fixed(n) = self.waterfill_noise {
            if !(n > 0.0) {
                return Err(Error::config("waterfill_noise_watt", "fixed noise must be positive"));
            }
        }
        // re-run constructor checks in case fields were edited directly
        FadingParams::new(self.fading.m, self.fading.sigma_db, self.fading.nt, self.fading.nr)?;
        TrafficLaw::new(self.traffic.theta, self.traffic.rho_min)?;
        PowerModel::new(self.power.eta, self.power.p_dyn, self.power.p_sta, self.power.p_max)?;
        Ok(())
    }

    /// Stability index `2/σ`.
    pub fn alpha(&self) -> f64 {
        2.0 / self.sigma
    }

    /// Mean number of MSs per cell, `λ_M / λ_B`.
    pub fn load_ratio(&self) -> f64 {
        self.lambda_m / self.lambda_b
    }

    pub fn interferer_model(&self) -> Result<InterfererModel> {
        InterfererModel::new(self.lambda_inf, self.tx_power_moment, self.fading)
    }

    /// Stable law of the interference power at an MS.
    pub fn interference_law(&self) -> Result<StableLaw> {
        stable_scale(&self.interferer_model()?, self.sigma)
    }

    /// Mean cell traffic in nats per unit bandwidth multiplier.
    pub fn mean_cell_traffic(&self) -> Result<f64> {
        Ok(self.bandwidth * crate::traffic::mean_cell_traffic(&self.traffic, self.lambda_m, self.lambda_b)?)
    }

    /// Copy with one named parameter replaced; see [`PARAMS`].
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut c = *self;
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 && v <= 1024.0 {
                Ok(v as usize)
            } else {
                Err(Error::config(name, format!("antenna count must be a positive integer, got {v}")))
            }
        };
        let f = c.fading;
        match name {
            "lambda_ratio" => c.lambda_m = value * c.lambda_b,
            "lambda_b_per_m2" => c.lambda_b = value,
            "lambda_m_per_m2" => c.lambda_m = value,
            "lambda_inf_per_m2" => c.lambda_inf = value,
            "lambda_inf_fraction" => c.lambda_inf = value * c.lambda_b,
            "pathloss_exponent" => c.sigma = value,
            "nakagami_m" => c.fading = FadingParams::new(value, f.sigma_db, f.nt, f.nr)?,
            "shadowing_sigma_db" => c.fading = FadingParams::new(f.m, value, f.nt, f.nr)?,
            "nt" => c.fading = FadingParams::new(f.m, f.sigma_db, count(value)?, f.nr)?,
            "nr" => c.fading = FadingParams::new(f.m, f.sigma_db, f.nt, count(value)?)?,
            "tail_index" => c.traffic = TrafficLaw::new(value, c.traffic.rho_min)?,
            "rho_min_bits" => c.traffic = TrafficLaw::from_bits(c.traffic.theta, value)?,
            "eta" => c.power.eta = value,
            "p_dyn_watt" => c.power.p_dyn = value,
            "p_sta_watt" => c.power.p_sta = value,
            "p_max_watt" => c.power.p_max = value,
            "tx_power_moment_w_alpha" => c.tx_power_moment = value,
            "bandwidth" => c.bandwidth = value,
            _ => {
                return Err(Error::config(
                    name,
                    format!("unknown parameter; expected one of {}", PARAMS.join(", ")),
                ))
            }
        }
        c.validate()?;
        Ok(c)
    }

    /// Current value of a named parameter.
    pub fn param(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "lambda_ratio" => self.load_ratio(),
            "lambda_b_per_m2" => self.lambda_b,
            "lambda_m_per_m2" => self.lambda_m,
            "lambda_inf_per_m2" => self.lambda_inf,
            "lambda_inf_fraction" => self.lambda_inf / self.lambda_b,
            "pathloss_exponent" => self.sigma,
            "nakagami_m" => self.fading.m,
            "shadowing_sigma_db" => self.fading.sigma_db,
            "nt" => self.fading.nt as f64,
            "nr" => self.fading.nr as f64,
            "tail_index" => self.traffic.theta,
            "rho_min_bits" => self.traffic.rho_min / std::f64::consts::LN_2,
            "eta" => self.power.eta,
            "p_dyn_watt" => self.power.p_dyn,
            "p_sta_watt" => self.power.p_sta,
            "p_max_watt" => self.power.p_max,
            "tx_power_moment_w_alpha" => self.tx_power_moment,
            "bandwidth" => self.bandwidth,
            _ => return Err(Error::config(name, "unknown parameter")),
        })
    }
}
