//! TOML scenario files. Every dimensional key carries its unit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::FadingParams;
use crate::energy::{NumeratorExponent, PowerModel};
use crate::error::{Error, Result};
use crate::harness::SchemeSelection;
use crate::network::{NetworkConfig, WaterfillNoise};
use crate::traffic::TrafficLaw;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub lambda_b_per_m2: f64,
    pub lambda_m_per_m2: f64,
    pub lambda_inf_per_m2: f64,
    pub pathloss_exponent: f64,
    pub tx_power_moment_w_alpha: f64,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingSection {
    pub nakagami_m: f64,
    pub shadowing_sigma_db: f64,
    pub nt: usize,
    pub nr: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    pub tail_index: f64,
    pub rho_min_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    pub eta: f64,
    pub p_dyn_watt: f64,
    pub p_sta_watt: f64,
    pub p_max_watt: f64,
    #[serde(default = "default_numerator")]
    pub numerator: NumeratorExponent,
    /// Fixed water-filling floor; the drawn interference when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waterfill_noise_watt: Option<f64>,
}

fn default_numerator() -> NumeratorExponent {
    NumeratorExponent::Squared
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub replications: usize,
    pub seed: u64,
    pub scheme: SchemeSelection,
    /// Simulation disc radius in units of `1/sqrt(πλ_B)`.
    pub window_multiple: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            replications: 50_000,
            seed: 1,
            scheme: SchemeSelection::Both,
            window_multiple: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub network: NetworkSection,
    pub fading: FadingSection,
    pub traffic: TrafficSection,
    pub power: PowerSection,
    #[serde(default)]
    pub simulation: SimulationSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "config".to_string());
            Error::config(field, msg)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn from_network(cfg: &NetworkConfig, simulation: SimulationSection) -> Self {
        Self {
            network: NetworkSection {
                lambda_b_per_m2: cfg.lambda_b,
                lambda_m_per_m2: cfg.lambda_m,
                lambda_inf_per_m2: cfg.lambda_inf,
                pathloss_exponent: cfg.sigma,
                tx_power_moment_w_alpha: cfg.tx_power_moment,
                bandwidth: cfg.bandwidth,
            },
            fading: FadingSection {
                nakagami_m: cfg.fading.m,
                shadowing_sigma_db: cfg.fading.sigma_db,
                nt: cfg.fading.nt,
                nr: cfg.fading.nr,
            },
            traffic: TrafficSection {
                tail_index: cfg.traffic.theta,
                rho_min_bits: cfg.traffic.rho_min / std::f64::consts::LN_2,
            },
            power: PowerSection {
                eta: cfg.power.eta,
                p_dyn_watt: cfg.power.p_dyn,
                p_sta_watt: cfg.power.p_sta,
                p_max_watt: cfg.power.p_max,
                numerator: cfg.numerator,
                waterfill_noise_watt: match cfg.waterfill_noise {
                    WaterfillNoise::Interference => None,
                    WaterfillNoise::Fixed(n) => Some(n),
                },
            },
            simulation,
        }
    }

    /// Validated network parameters.
    pub fn network(&self) -> Result<NetworkConfig> {
        let n = &self.network;
        let f = &self.fading;
        let p = &self.power;
        let cfg = NetworkConfig {
            lambda_b: n.lambda_b_per_m2,
            lambda_m: n.lambda_m_per_m2,
            lambda_inf: n.lambda_inf_per_m2,
            sigma: n.pathloss_exponent,
            fading: FadingParams::new(f.nakagami_m, f.shadowing_sigma_db, f.nt, f.nr)?,
            traffic: TrafficLaw::from_bits(self.traffic.tail_index, self.traffic.rho_min_bits)?,
            power: PowerModel::new(p.eta, p.p_dyn_watt, p.p_sta_watt, p.p_max_watt)?,
            tx_power_moment: n.tx_power_moment_w_alpha,
            bandwidth: n.bandwidth,
            numerator: p.numerator,
            waterfill_noise: match p.waterfill_noise_watt {
                None => WaterfillNoise::Interference,
                Some(w) => WaterfillNoise::Fixed(w),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<NetworkConfig> {
        let s = &self.simulation;
        if s.replications == 0 {
            return Err(Error::config("replications", "must be positive"));
        }
        if !(s.window_multiple >= 3.0) {
            return Err(Error::config("window_multiple", "must be at least 3"));
        }
        self.network()
    }
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self::from_network(&NetworkConfig::baseline(), SimulationSection::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ConfigFile::default();
        let text = c.to_toml();
        let back = ConfigFile::parse(&text).unwrap();
        assert_eq!(back, c);
        let net = back.validate().unwrap();
        assert_eq!(net, NetworkConfig::baseline().with_param("rho_min_bits", 2.5).unwrap());
        assert!(text.contains("p_dyn_watt = 83.0"));
    }

    #[test]
    fn missing_field_is_named() {
        let text = ConfigFile::default().to_toml().replace("eta = 0.38\n", "");
        match ConfigFile::parse(&text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "eta"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_rejected() {
        let text = ConfigFile::default().to_toml().replace("eta = 0.38", "eta = 0.38\np_dyn = 3.0");
        let e = ConfigFile::parse(&text).unwrap_err();
        assert!(e.to_string().contains("p_dyn"), "{e}");
    }

    #[test]
    fn validation_names_the_problem() {
        let mut c = ConfigFile::default();
        c.network.pathloss_exponent = 2.0;
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("sigma must exceed 2"), "{e}");
        let mut c = ConfigFile::default();
        c.traffic.tail_index = 2.5;
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("tail index must lie in (1,2]"), "{e}");
    }

    #[test]
    fn optional_fields() {
        let mut c = ConfigFile::default();
        c.power.waterfill_noise_watt = Some(1e-12);
        let back = ConfigFile::parse(&c.to_toml()).unwrap();
        assert_eq!(back.network().unwrap().waterfill_noise, WaterfillNoise::Fixed(1e-12));
        let text = ConfigFile::default().to_toml();
        let cut = text.split("[simulation]").next().unwrap();
        assert_eq!(ConfigFile::parse(cut).unwrap().simulation, SimulationSection::default());
    }
}
