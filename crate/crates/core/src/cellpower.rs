//! Monte-Carlo cell powers: Poisson MS populations, per-cell sums and the
//! outage-truncated summaries that feed the energy-efficiency formula.

use rand::Rng;

use crate::distribution::TabulatedDistribution;
use crate::energy::{assemble_ee, EnergyReport, NumeratorExponent, PowerModel, Scheme};
use crate::error::Result;
use crate::par::Exec;
use crate::rng::{stream, tag, StreamRng};

/// Poisson(`mean`) variate by inversion of a uniform `u`. For fixed `u` the
/// count is non-decreasing in `mean`, which couples populations across a
/// load sweep.
pub fn poisson_from_uniform(mean: f64, u: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let mut k = 0usize;
    let mut ln_p = -mean;
    let mut cdf = ln_p.exp();
    while cdf < u {
        k += 1;
        ln_p += mean.ln() - (k as f64).ln();
        cdf += ln_p.exp();
        if k as f64 > mean + 50.0 * mean.sqrt() + 100.0 {
            break;
        }
    }
    k
}

/// Required transmit powers of simulated cells, W (`inf` when unbounded).
#[derive(Debug, Clone, PartialEq)]
pub struct CellPowerSample {
    pub powers: Vec<f64>,
    pub seed: u64,
}

/// Outage-truncated moments of a cell-power sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPowerSummary {
    pub replications: usize,
    /// `P(P_C0 <= P_max)`.
    pub non_outage: f64,
    pub non_outage_stderr: f64,
    /// `E[P_C0 · 1{P_C0 <= P_max}]`, W.
    pub mean_real_power: f64,
    pub mean_real_power_stderr: f64,
    /// Sample covariance of the indicator and the truncated power, per draw.
    pub covariance: f64,
}

impl CellPowerSample {
    pub fn summary(&self, p_max: f64) -> CellPowerSummary {
        let n = self.powers.len() as f64;
        let (mut s1, mut s2, mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &p in &self.powers {
            let (i, e) = if p <= p_max { (1.0, p) } else { (0.0, 0.0) };
            s1 += i;
            s2 += e;
            s11 += i * i;
            s22 += e * e;
            s12 += i * e;
        }
        let (m1, m2) = (s1 / n, s2 / n);
        let dof = (n - 1.0).max(1.0);
        let v1 = (s11 - n * m1 * m1) / dof;
        let v2 = (s22 - n * m2 * m2) / dof;
        let c12 = (s12 - n * m1 * m2) / dof;
        CellPowerSummary {
            replications: self.powers.len(),
            non_outage: m1,
            non_outage_stderr: (v1.max(0.0) / n).sqrt(),
            mean_real_power: m2,
            mean_real_power_stderr: (v2.max(0.0) / n).sqrt(),
            covariance: c12,
        }
    }

    pub fn sorted(&self) -> Vec<f64> {
        crate::stats::sorted(self.powers.clone())
    }

    pub fn tabulate(&self, grid: Vec<f64>) -> Result<TabulatedDistribution> {
        TabulatedDistribution::from_samples(&self.powers, grid)
    }
}

/// Energy efficiency from simulated ingredients, with a delta-method
/// standard error.
pub fn ee_from_summary(
    s: &CellPowerSummary,
    mean_traffic: f64,
    nt: usize,
    model: &PowerModel,
    exponent: NumeratorExponent,
    scheme: Scheme,
) -> Result<EnergyReport> {
    let mut report = assemble_ee(mean_traffic, s.non_outage, s.mean_real_power, nt, model, exponent, scheme)?;
    let f = s.non_outage;
    let c = model.fixed_power(nt);
    let den = s.mean_real_power / model.eta + c * f;
    let stderr = if report.ee > 0.0 && den > 0.0 {
        let e = exponent.power() as f64;
        let num = mean_traffic * f.powf(e);
        let d_f = mean_traffic * e * f.powf(e - 1.0) / den - num * c / (den * den);
        let d_p = -num / (model.eta * den * den);
        let n = s.replications as f64;
        let var = d_f * d_f * s.non_outage_stderr.powi(2)
            + d_p * d_p * s.mean_real_power_stderr.powi(2)
            + 2.0 * d_f * d_p * s.covariance / n;
        var.max(0.0).sqrt()
    } else {
        0.0
    };
    report.ee_stderr = Some(stderr);
    Ok(report)
}

/// Simulates `replications` cells for every mean population in `loads`.
///
/// Each replication owns one uniform for its population count and one RNG
/// stream per MS slot, so the populations at different loads are nested and
/// share their per-MS draws. `per_ms` returns the power one MS requires.
pub fn simulate_cells<F>(
    loads: &[f64],
    replications: usize,
    seed: u64,
    exec: Exec,
    per_ms: F,
) -> Vec<CellPowerSample>
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    let per_rep = exec.map_range(replications, |rep| {
        let u: f64 = stream(seed, &[tag::CELL, rep as u64]).random();
        let counts: Vec<usize> = loads.iter().map(|&l| poisson_from_uniform(l, u)).collect();
        let n_max = counts.iter().copied().max().unwrap_or(0);
        let mut prefix = Vec::with_capacity(n_max + 1);
        prefix.push(0.0);
        for j in 0..n_max {
            let mut rng = stream(seed, &[tag::MS, rep as u64, j as u64]);
            let p = per_ms(&mut rng);
            prefix.push(prefix[j] + p);
        }
        counts.into_iter().map(|k| prefix[k]).collect::<Vec<f64>>()
    });
    (0..loads.len())
        .map(|i| CellPowerSample {
            powers: per_rep.iter().map(|v| v[i]).collect(),
            seed,
        })
        .collect()
}
