//! Scenario and sweep orchestration with CSV output.
//!
//! All points of a sweep share the per-replication streams of one seed, so
//! differences between points are not swamped by independent noise.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distribution::{log_grid, TabulatedDistribution};
use crate::energy::{EnergyReport, Scheme};
use crate::error::{Error, Result};
use crate::network::NetworkConfig;
use crate::par::Exec;
use crate::power_average::{ee_average, ee_average_loads, invert_cell_power, mc_cell_power_average};
use crate::power_waterfill::{ee_waterfill_loads, mc_cell_power_wf};

/// Relative EE standard error above which a point is flagged.
pub const CONVERGENCE_TARGET: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeSelection {
    Both,
    Average,
    Waterfill,
}

impl SchemeSelection {
    pub fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeSelection::Both => vec![Scheme::Waterfill, Scheme::Average],
            SchemeSelection::Average => vec![Scheme::Average],
            SchemeSelection::Waterfill => vec![Scheme::Waterfill],
        }
    }
}

impl FromStr for SchemeSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(SchemeSelection::Both),
            "average" => Ok(SchemeSelection::Average),
            "waterfill" => Ok(SchemeSelection::Waterfill),
            _ => Err(Error::config("scheme", format!("expected both, average or waterfill, got {s}"))),
        }
    }
}

impl fmt::Display for SchemeSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeSelection::Both => "both",
            SchemeSelection::Average => "average",
            SchemeSelection::Waterfill => "waterfill",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub replications: usize,
    pub seed: u64,
    pub schemes: SchemeSelection,
    pub exec: Exec,
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 1000 {
            return Err(Error::config("replications", "must be at least 1000"));
        }
        Ok(())
    }
}

/// One scheme's result at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// Label of the fixed series parameters, e.g. `nt=4`.
    pub series: String,
    pub parameter: String,
    pub value: f64,
    pub scheme: Scheme,
    pub ee_nat_per_joule: f64,
    /// Empty for analytic points.
    pub ee_stderr: Option<f64>,
    pub mean_real_power_watt: f64,
    pub non_outage: f64,
    pub mean_traffic_nat: f64,
    pub seed: u64,
    pub replications: usize,
    pub converged: bool,
}

impl SweepRow {
    fn new(series: &str, parameter: &str, value: f64, r: &EnergyReport, settings: &RunSettings) -> Self {
        let converged = match r.ee_stderr {
            Some(se) => r.ee == 0.0 || se <= CONVERGENCE_TARGET * r.ee,
            None => true,
        };
        Self {
            series: series.to_string(),
            parameter: parameter.to_string(),
            value,
            scheme: r.scheme,
            ee_nat_per_joule: r.ee,
            ee_stderr: r.ee_stderr,
            mean_real_power_watt: r.mean_real_power,
            non_outage: r.non_outage,
            mean_traffic_nat: r.mean_traffic,
            seed: settings.seed,
            replications: settings.replications,
            converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
    pub base: NetworkConfig,
    pub series: String,
}

impl SweepSpec {
    pub fn new(parameter: &str, values: Vec<f64>, base: NetworkConfig) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config(parameter, "sweep needs at least one value"));
        }
        base.param(parameter)?;
        Ok(Self {
            parameter: parameter.to_string(),
            values,
            base,
            series: String::new(),
        })
    }

    pub fn with_series(mut self, label: impl Into<String>) -> Self {
        self.series = label.into();
        self
    }
}

/// Rows that completed, plus the points that failed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<(f64, Scheme, Error)>,
}

impl SweepOutcome {
    pub fn unconverged(&self) -> usize {
        self.rows.iter().filter(|r| !r.converged).count()
    }

    fn extend(&mut self, other: SweepOutcome) {
        self.rows.extend(other.rows);
        self.failures.extend(other.failures);
    }
}

/// Runs every value of the sweep for each selected scheme. A failing point
/// is recorded and the remaining points still run.
pub fn run_sweep(spec: &SweepSpec, settings: &RunSettings) -> Result<SweepOutcome> {
    settings.validate()?;
    let mut out = SweepOutcome::default();
    for scheme in settings.schemes.schemes() {
        let reports: Vec<(f64, Result<EnergyReport>)> = if spec.parameter == "lambda_ratio" {
            let batch = match scheme {
                Scheme::Average => ee_average_loads(&spec.base, &spec.values),
                Scheme::Waterfill => ee_waterfill_loads(
                    &spec.base,
                    &spec.values,
                    settings.replications,
                    settings.seed,
                    settings.exec,
                ),
            };
            match batch {
                Ok(v) => spec.values.iter().copied().zip(v.into_iter().map(Ok)).collect(),
                Err(e) => spec.values.iter().map(|&x| (x, Err(e.clone()))).collect(),
            }
        } else {
            spec.values
                .iter()
                .map(|&x| (x, point_report(&spec.base, &spec.parameter, x, scheme, settings)))
                .collect()
        };
        for (x, r) in reports {
            match r {
                Ok(r) => out.rows.push(SweepRow::new(&spec.series, &spec.parameter, x, &r, settings)),
                Err(e) => out.failures.push((x, scheme, e)),
            }
        }
    }
    Ok(out)
}

fn point_report(
    base: &NetworkConfig,
    parameter: &str,
    value: f64,
    scheme: Scheme,
    settings: &RunSettings,
) -> Result<EnergyReport> {
    let cfg = base.with_param(parameter, value)?;
    match scheme {
        Scheme::Average => ee_average(&cfg),
        Scheme::Waterfill => Ok(ee_waterfill_loads(
            &cfg,
            &[cfg.load_ratio()],
            settings.replications,
            settings.seed,
            settings.exec,
        )?
        .remove(0)),
    }
}

/// Result of [`run_scenario`].
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub reports: Vec<EnergyReport>,
    /// Cell-power law per scheme: analytic for average, empirical for
    /// water-filling.
    pub distributions: Vec<(Scheme, TabulatedDistribution)>,
    /// Sup distance between the analytic and simulated average-scheme CDFs.
    pub average_check: Option<f64>,
}

/// Default tabulation grid for cell powers, W.
pub fn power_grid() -> Vec<f64> {
    log_grid(1e-3, 1e5, 81)
}

pub fn run_scenario(cfg: &NetworkConfig, settings: &RunSettings) -> Result<ScenarioResult> {
    settings.validate()?;
    let grid = power_grid();
    let mut result = ScenarioResult {
        reports: Vec::new(),
        distributions: Vec::new(),
        average_check: None,
    };
    let load = [cfg.load_ratio()];
    for scheme in settings.schemes.schemes() {
        match scheme {
            Scheme::Average => {
                result.reports.push(ee_average(cfg)?);
                let analytic = invert_cell_power(cfg, &grid)?;
                let mc = mc_cell_power_average(cfg, &load, settings.replications, settings.seed, settings.exec)?;
                let empirical = mc[0].tabulate(grid.clone())?;
                result.average_check = Some(analytic.sup_distance(&empirical));
                result.distributions.push((scheme, analytic));
            }
            Scheme::Waterfill => {
                result.reports.extend(ee_waterfill_loads(
                    cfg,
                    &load,
                    settings.replications,
                    settings.seed,
                    settings.exec,
                )?);
                let mc = mc_cell_power_wf(cfg, &load, settings.replications, settings.seed, settings.exec)?;
                result.distributions.push((scheme, mc[0].tabulate(grid.clone())?));
            }
        }
    }
    Ok(result)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// One tabulated cell-power law in a long-format distribution file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionRow {
    pub series: String,
    pub scheme: Scheme,
    pub power_watt: f64,
    pub cdf: f64,
    pub density_per_watt: f64,
    pub seed: u64,
    pub replications: usize,
}

pub fn write_distribution_csv(rows: &[DistributionRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn distribution_rows(
    series: &str,
    scheme: Scheme,
    d: &TabulatedDistribution,
    settings: &RunSettings,
) -> Vec<DistributionRow> {
    d.grid
        .iter()
        .zip(&d.cdf)
        .zip(&d.pdf)
        .map(|((&x, &c), &p)| DistributionRow {
            series: series.to_string(),
            scheme,
            power_watt: x,
            cdf: c,
            density_per_watt: p,
            seed: settings.seed,
            replications: settings.replications,
        })
        .collect()
}

/// Mean-population grid of the EE figures: 20 points from 5 to 60.
pub fn load_grid() -> Vec<f64> {
    (0..20).map(|i| 5.0 + 55.0 * i as f64 / 19.0).collect()
}

fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Files written by [`figure_suite`] and points that missed the
/// convergence target.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteOutcome {
    pub outputs: Vec<PathBuf>,
    pub unconverged: usize,
    pub failures: Vec<String>,
}

/// Writes the six figure data sets to `out_dir`:
/// cell-power laws across path-loss exponents (fig4) and loads (fig5), and
/// EE against load across antenna counts (fig6), path-loss exponents
/// (fig7), traffic laws (fig8) and interferer densities (fig9).
pub fn figure_suite(base: &NetworkConfig, settings: &RunSettings, out_dir: &Path) -> Result<SuiteOutcome> {
    settings.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let mut suite = SuiteOutcome::default();

    let distribution_figure = |name: &str, param: &str, values: &[f64], suite: &mut SuiteOutcome| -> Result<()> {
        let mut rows = Vec::new();
        for &v in values {
            let cfg = base.with_param(param, v)?;
            let label = format!("{param}={}", format_value(v));
            let r = run_scenario(&cfg, settings)?;
            for (scheme, d) in &r.distributions {
                rows.extend(distribution_rows(&label, *scheme, d, settings));
            }
        }
        let path = out_dir.join(name);
        write_distribution_csv(&rows, &path)?;
        suite.outputs.push(path);
        Ok(())
    };
    distribution_figure("fig4.csv", "pathloss_exponent", &[3.5, 4.0, 4.5], &mut suite)?;
    distribution_figure("fig5.csv", "lambda_ratio", &[20.0, 30.0, 40.0], &mut suite)?;

    let ee_figure = |name: &str, series: &[Vec<(&str, f64)>], suite: &mut SuiteOutcome| -> Result<()> {
        let mut all = SweepOutcome::default();
        for s in series {
            let mut cfg = *base;
            let mut label = Vec::new();
            for &(p, v) in s {
                cfg = cfg.with_param(p, v)?;
                label.push(format!("{p}={}", format_value(v)));
            }
            let spec = SweepSpec::new("lambda_ratio", load_grid(), cfg)?.with_series(label.join(";"));
            all.extend(run_sweep(&spec, settings)?);
        }
        let path = out_dir.join(name);
        write_sweep_csv(&all.rows, &path)?;
        suite.outputs.push(path);
        suite.unconverged += all.unconverged();
        suite
            .failures
            .extend(all.failures.iter().map(|(x, s, e)| format!("{name} {s} at {x}: {e}")));
        Ok(())
    };
    ee_figure("fig6.csv", &[vec![("nt", 2.0)], vec![("nt", 4.0)], vec![("nt", 8.0)]], &mut suite)?;
    ee_figure(
        "fig7.csv",
        &[
            vec![("pathloss_exponent", 3.5)],
            vec![("pathloss_exponent", 4.0)],
            vec![("pathloss_exponent", 4.5)],
        ],
        &mut suite,
    )?;
    ee_figure(
        "fig8.csv",
        &[
            vec![("tail_index", 1.5), ("rho_min_bits", 2.5)],
            vec![("tail_index", 1.8), ("rho_min_bits", 2.5)],
            vec![("tail_index", 1.8), ("rho_min_bits", 2.0)],
        ],
        &mut suite,
    )?;
    ee_figure(
        "fig9.csv",
        &[
            vec![("lambda_inf_fraction", 0.5)],
            vec![("lambda_inf_fraction", 0.7)],
            vec![("lambda_inf_fraction", 0.9)],
        ],
        &mut suite,
    )?;
    Ok(suite)
}
