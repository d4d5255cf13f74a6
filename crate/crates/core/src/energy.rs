//! BS power consumption and energy-efficiency assembly.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub eta: f64,
    pub p_dyn: f64,
    pub p_sta: f64,
    pub p_max: f64,
}

impl PowerModel {
    pub fn new(eta: f64, p_dyn: f64, p_sta: f64, p_max: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::config("eta", format!("amplifier efficiency must lie in (0,1], got {eta}")));
        }
        if !(p_dyn >= 0.0) {
            return Err(Error::config("p_dyn_watt", "must be >= 0"));
        }
        if !(p_sta >= 0.0) {
            return Err(Error::config("p_sta_watt", "must be >= 0"));
        }
        if !(p_max > 0.0) {
            return Err(Error::config("p_max_watt", "must be positive"));
        }
        Ok(Self {
            eta,
            p_dyn,
            p_sta,
            p_max,
        })
    }

    /// Power drawn by the circuitry regardless of load, `N_t P_dyn + P_sta`.
    pub fn fixed_power(&self, nt: usize) -> f64 {
        nt as f64 * self.p_dyn + self.p_sta
    }
}

/// Total BS consumption `P/η + N_t P_dyn + P_sta`.
pub fn bs_power(transmit: f64, nt: usize, model: &PowerModel) -> f64 {
    transmit / model.eta + model.fixed_power(nt)
}

/// Which allocation produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Average,
    Waterfill,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Average => "average",
            Scheme::Waterfill => "waterfill",
        })
    }
}

/// How many non-outage factors multiply the traffic in the numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumeratorExponent {
    /// Delivered traffic `E{Γ}·F`.
    Single,
    /// `E{Γ}·F²`, the form used by both allocation schemes.
    Squared,
}

impl NumeratorExponent {
    pub fn power(self) -> i32 {
        match self {
            NumeratorExponent::Single => 1,
            NumeratorExponent::Squared => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// nat/Joule (per unit bandwidth multiplier).
    pub ee: f64,
    pub mean_traffic: f64,
    /// Truncated mean `E[P · 1{P <= P_max}]`, W.
    pub mean_real_power: f64,
    pub non_outage: f64,
    pub scheme: Scheme,
    /// Standard error of `ee` when estimated by simulation.
    pub ee_stderr: Option<f64>,
}

/// `EE = Γ̄ F^e / ((1/η) P̄ + (N_t P_dyn + P_sta) F)`.
pub fn assemble_ee(
    mean_traffic: f64,
    non_outage: f64,
    mean_real_power: f64,
    nt: usize,
    model: &PowerModel,
    exponent: NumeratorExponent,
    scheme: Scheme,
) -> Result<EnergyReport> {
    if !(mean_traffic.is_finite() && non_outage.is_finite() && mean_real_power.is_finite()) {
        return Err(Error::domain("assemble_ee", "ingredients must be finite"));
    }
    if !(0.0..=1.0 + 1e-12).contains(&non_outage) {
        return Err(Error::domain("assemble_ee", format!("non-outage {non_outage} is not a probability")));
    }
    let denom = mean_real_power / model.eta + model.fixed_power(nt) * non_outage;
    let ee = if mean_traffic == 0.0 || non_outage == 0.0 {
        0.0
    } else {
        mean_traffic * non_outage.powi(exponent.power()) / denom
    };
    Ok(EnergyReport {
        ee,
        mean_traffic,
        mean_real_power,
        non_outage,
        scheme,
        ee_stderr: None,
    })
}
