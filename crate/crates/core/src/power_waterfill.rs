//! Water-filling allocation over the eigen-subchannels of the direct link.
//!
//! Channel `l` gets `P_l = (ν − N₀/λ_l)₊`. Each MS needs the smallest total
//! power whose rate `B Σ ln(1 + P_l λ_l / P_I)` reaches its demand. With
//! `N₀ = P_I` and the strongest `k` channels active that power is closed
//! form; a bisection on the total covers a fixed `N₀`.

use crate::cellpower::{ee_from_summary, simulate_cells, CellPowerSample};
use crate::channel::FadingSampler;
use crate::energy::{EnergyReport, Scheme};
use crate::error::{Error, Result};
use crate::geometry::nearest_distance_from_uniform;
use crate::interference::StableLaw;
use crate::network::{NetworkConfig, WaterfillNoise};
use crate::par::Exec;
use crate::rng::StreamRng;
use crate::traffic::TrafficLaw;

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterfillConfig {
    pub noise: WaterfillNoise,
    pub p_max: f64,
    /// Relative bracket width at which bisection stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl WaterfillConfig {
    pub fn new(noise: WaterfillNoise, p_max: f64, tolerance: f64, max_iterations: usize) -> Result<Self> {
        if let WaterfillNoise::Fixed(n) = noise {
            if !(n >= 0.0) {
                return Err(Error::config("waterfill_noise_watt", "must be >= 0"));
            }
        }
        if !(p_max > 0.0) {
            return Err(Error::config("p_max_watt", "must be positive"));
        }
        if !(tolerance > 0.0) {
            return Err(Error::config("tolerance", "must be positive"));
        }
        if max_iterations == 0 {
            return Err(Error::config("max_iterations", "must be positive"));
        }
        Ok(Self {
            noise,
            p_max,
            tolerance,
            max_iterations,
        })
    }

    pub fn from_network(cfg: &NetworkConfig) -> Self {
        Self {
            noise: cfg.waterfill_noise,
            p_max: cfg.power.p_max,
            tolerance: 1e-9,
            max_iterations: 200,
        }
    }

    fn floor(&self, p_interference: f64) -> f64 {
        match self.noise {
            WaterfillNoise::Interference => p_interference,
            WaterfillNoise::Fixed(n) => n,
        }
    }
}

/// Per-channel powers `(ν − N₀/λ_l)₊` summing to `total`, in input order.
/// Zero eigenvalues never receive power.
pub fn waterfill(eigenvalues: &[f64], total: f64, noise: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..eigenvalues.len()).filter(|&i| eigenvalues[i] > 0.0).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    let mut out = vec![0.0; eigenvalues.len()];
    if order.is_empty() || !(total > 0.0) {
        return out;
    }
    let floors: Vec<f64> = order.iter().map(|&i| noise / eigenvalues[i]).collect();
    let mut k = order.len();
    let mut level;
    loop {
        level = (total + floors[..k].iter().sum::<f64>()) / k as f64;
        if level > floors[k - 1] || k == 1 {
            break;
        }
        k -= 1;
    }
    for (j, &i) in order[..k].iter().enumerate() {
        out[i] = (level - floors[j]).max(0.0);
    }
    // absorb rounding so the allocations sum exactly
    let sum: f64 = out.iter().sum();
    if sum > 0.0 {
        let s = total / sum;
        out.iter_mut().for_each(|p| *p *= s);
    }
    out
}

/// `B Σ ln(1 + P_l λ_l / P_I)` in nats.
pub fn wf_rate(eigenvalues: &[f64], allocations: &[f64], p_interference: f64, bandwidth: f64) -> f64 {
    bandwidth
        * eigenvalues
            .iter()
            .zip(allocations)
            .map(|(&l, &p)| (p * l / p_interference).ln_1p())
            .sum::<f64>()
}

/// Required total power for one MS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Balance {
    /// W; `inf` when no finite power meets the demand.
    pub power: f64,
    pub outage: bool,
}

/// Smallest total power whose water-filled rate reaches `rho`, by bisection.
pub fn solve_balance(
    rho: f64,
    eigenvalues: &[f64],
    p_interference: f64,
    bandwidth: f64,
    config: &WaterfillConfig,
) -> Result<Balance> {
    if !(rho > 0.0) {
        return Err(Error::domain("solve_balance", "rate must be positive"));
    }
    let noise = config.floor(p_interference);
    let rate = |p: f64| wf_rate(eigenvalues, &waterfill(eigenvalues, p, noise), p_interference, bandwidth);
    let mut hi = 10.0 * config.p_max;
    while rate(hi) < rho {
        hi *= 2.0;
        if !hi.is_finite() {
            return Ok(Balance {
                power: f64::INFINITY,
                outage: true,
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..config.max_iterations {
        if hi - lo <= config.tolerance * hi {
            let power = 0.5 * (lo + hi);
            return Ok(Balance {
                power,
                outage: power > config.p_max,
            });
        }
        let mid = 0.5 * (lo + hi);
        if rate(mid) < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        what: "solve_balance",
        estimate: 0.5 * (lo + hi),
        achieved: (hi - lo) / hi,
        requested: config.tolerance,
    })
}

/// Required total power when the floor equals the interference, in closed
/// form: with the strongest `k` channels active `ν = exp((ρ/B − Σ ln g_l)/k)`
/// and `P = Σ (ν − 1/g_l)`, where `g_l = λ_l / P_I`.
pub fn required_power_closed_form(rho: f64, eigenvalues: &[f64], p_interference: f64, bandwidth: f64) -> f64 {
    let mut ev: Vec<f64> = eigenvalues.iter().copied().filter(|&l| l > 0.0).collect();
    if ev.is_empty() {
        return f64::INFINITY;
    }
    ev.sort_by(|a, b| b.total_cmp(a));
    let q = rho / bandwidth;
    for k in 1..=ev.len() {
        // x_l = ln ν + ln g_l = (q + Σ_j ln(λ_l/λ_j)) / k, built from ratios
        // so a nearly empty water level keeps its relative accuracy
        let x = |l: f64| (q + ev[..k].iter().map(|&lj| (l / lj).ln()).sum::<f64>()) / k as f64;
        if k == ev.len() || x(ev[k]) <= 0.0 {
            return ev[..k]
                .iter()
                .map(|&l| p_interference / l * x(l).exp_m1())
                .sum();
        }
    }
    unreachable!("the last active set always qualifies")
}

/// One simulated MS of the water-filling scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillDraw {
    pub p_interference: f64,
    pub r0: f64,
    pub eigenvalues: Vec<f64>,
    pub rho: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct WaterfillSampler {
    interference: StableLaw,
    fading: FadingSampler,
    traffic: TrafficLaw,
    config: WaterfillConfig,
    lambda_b: f64,
    sigma: f64,
    bandwidth: f64,
}

impl WaterfillSampler {
    pub fn new(cfg: &NetworkConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            interference: cfg.interference_law()?,
            fading: FadingSampler::new(&cfg.fading),
            traffic: cfg.traffic,
            config: WaterfillConfig::from_network(cfg),
            lambda_b: cfg.lambda_b,
            sigma: cfg.sigma,
            bandwidth: cfg.bandwidth,
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<WaterfillDraw> {
        let p_interference = self.interference.sample(rng);
        let r0 = nearest_distance_from_uniform(rng.random::<f64>(), self.lambda_b);
        let eigenvalues = self.fading.direct_channel(r0, self.sigma, rng).eigenvalues();
        let rho = self.traffic.sample(rng);
        let power = match self.config.noise {
            WaterfillNoise::Interference => {
                required_power_closed_form(rho, &eigenvalues, p_interference, self.bandwidth)
            }
            WaterfillNoise::Fixed(_) => {
                solve_balance(rho, &eigenvalues, p_interference, self.bandwidth, &self.config)?.power
            }
        };
        Ok(WaterfillDraw {
            p_interference,
            r0,
            eigenvalues,
            rho,
            power,
        })
    }
}

/// Cell powers of the water-filling scheme for every mean population in
/// `loads`.
pub fn mc_cell_power_wf(
    cfg: &NetworkConfig,
    loads: &[f64],
    replications: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<CellPowerSample>> {
    let sampler = WaterfillSampler::new(cfg)?;
    let failed = std::sync::Mutex::new(None);
    let out = simulate_cells(loads, replications, seed, exec, |rng: &mut StreamRng| {
        match sampler.draw(rng) {
            Ok(d) => d.power,
            Err(e) => {
                failed.lock().expect("poisoned").get_or_insert(e);
                f64::NAN
            }
        }
    });
    match failed.into_inner().expect("poisoned") {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Energy efficiency of the water-filling scheme at each load in `loads`.
pub fn ee_waterfill_loads(
    cfg: &NetworkConfig,
    loads: &[f64],
    replications: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<EnergyReport>> {
    let samples = mc_cell_power_wf(cfg, loads, replications, seed, exec)?;
    loads
        .iter()
        .zip(&samples)
        .map(|(&l, s)| {
            let cfg_l = NetworkConfig {
                lambda_m: l * cfg.lambda_b,
                ..*cfg
            };
            ee_from_summary(
                &s.summary(cfg.power.p_max),
                cfg_l.mean_cell_traffic()?,
                cfg.fading.nt,
                &cfg.power,
                cfg.numerator,
                Scheme::Waterfill,
            )
        })
        .collect()
}

pub fn ee_waterfill(cfg: &NetworkConfig, replications: usize, seed: u64, exec: Exec) -> Result<EnergyReport> {
    let mut v = ee_waterfill_loads(cfg, &[cfg.load_ratio()], replications, seed, exec)?;
    Ok(v.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::stats::{quantile, sorted};
    use proptest::prelude::*;

    fn wf_cfg() -> WaterfillConfig {
        WaterfillConfig::new(WaterfillNoise::Interference, 40.0, 1e-12, 400).unwrap()
    }

    #[test]
    fn two_channel_examples() {
        let p = waterfill(&[1.0, 4.0], 1.0, 1.0);
        assert!((p[0] - 0.125).abs() < 1e-15 && (p[1] - 0.875).abs() < 1e-15);
        assert!((p[0] + 1.0 / 1.0 - 1.125).abs() < 1e-15);
        let p = waterfill(&[1.0, 4.0], 0.1, 1.0);
        assert_eq!(p[0], 0.0);
        assert!((p[1] - 0.1).abs() < 1e-15);
        let p = waterfill(&[2.0; 4], 3.0, 0.7);
        assert!(p.iter().all(|&x| (x - 0.75).abs() < 1e-15));
        let p = waterfill(&[3.0, 0.0], 2.0, 1.0);
        assert_eq!(p, vec![2.0, 0.0]);
    }

    #[test]
    fn rate_edge_cases() {
        assert_eq!(wf_rate(&[1.0, 2.0], &[0.0, 0.0], 1.0, 1.0), 0.0);
        let single = wf_rate(&[3.0], &[2.0], 0.5, 2.0);
        assert!((single - 2.0 * (1.0 + 2.0 * 3.0 / 0.5f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn balance_small_and_monotone() {
        let ev = [2.0, 0.5, 0.1];
        let c = wf_cfg();
        let tiny = solve_balance(1e-9, &ev, 1.0, 1.0, &c).unwrap();
        assert!(tiny.power < 1e-8);
        let a = solve_balance(1.0, &ev, 1.0, 1.0, &c).unwrap().power;
        let b = solve_balance(2.0, &ev, 1.0, 1.0, &c).unwrap().power;
        assert!(b > a);
        let big = solve_balance(1e4, &ev, 1.0, 1.0, &c).unwrap();
        assert!(big.outage && big.power.is_infinite());
        assert!(solve_balance(0.0, &ev, 1.0, 1.0, &c).is_err());
    }

    #[test]
    fn fixed_noise_changes_the_floor_only() {
        let ev = [2.0, 0.5];
        let fixed = WaterfillConfig::new(WaterfillNoise::Fixed(1e-3), 40.0, 1e-12, 400).unwrap();
        let a = solve_balance(1.5, &ev, 1.0, 1.0, &fixed).unwrap().power;
        let p = waterfill(&ev, a, 1e-3);
        assert!((wf_rate(&ev, &p, 1.0, 1.0) - 1.5).abs() < 1e-9);
        assert!(WaterfillConfig::new(WaterfillNoise::Fixed(-1.0), 1.0, 1e-9, 10).is_err());
        assert!(WaterfillConfig::new(WaterfillNoise::Interference, 0.0, 1e-9, 10).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn kkt_conditions(
            ev in prop::collection::vec(1e-4f64..1e3, 1..9),
            total in 1e-4f64..1e3,
            noise in 1e-3f64..10.0,
        ) {
            let p = waterfill(&ev, total, noise);
            let sum: f64 = p.iter().sum();
            prop_assert!((sum / total - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            let levels: Vec<f64> = p.iter().zip(&ev).filter(|(&x, _)| x > 0.0).map(|(&x, &l)| x + noise / l).collect();
            let (lo, hi) = levels.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            prop_assert!(hi - lo <= 1e-10 * hi.max(1.0));
            for (&x, &l) in p.iter().zip(&ev) {
                if x == 0.0 {
                    prop_assert!(noise / l >= hi * (1.0 - 1e-12));
                }
            }
            let equal = vec![total / ev.len() as f64; ev.len()];
            prop_assert!(wf_rate(&ev, &p, noise, 1.0) >= wf_rate(&ev, &equal, noise, 1.0) - 1e-12);
        }

        #[test]
        fn rate_increasing_and_concave(
            ev in prop::collection::vec(1e-2f64..1e2, 1..6),
            p in 0.01f64..100.0,
        ) {
            let r = |x: f64| wf_rate(&ev, &waterfill(&ev, x, 1.0), 1.0, 1.0);
            let h = 1e-3 * p;
            let (a, b, c) = (r(p - h), r(p), r(p + h));
            prop_assert!(c > b && b > a);
            prop_assert!(c - 2.0 * b + a <= 1e-9 * b.abs().max(1.0));
        }

        #[test]
        fn balance_round_trip_and_closed_form(
            ev in prop::collection::vec(1e-3f64..1e3, 1..9),
            p0 in 1e-3f64..1e3,
            pi in 1e-3f64..10.0,
        ) {
            let rho = wf_rate(&ev, &waterfill(&ev, p0, pi), pi, 1.0);
            prop_assume!(rho > 1e-9);
            let c = WaterfillConfig::new(WaterfillNoise::Interference, 40.0, 1e-11, 400).unwrap();
            let got = solve_balance(rho, &ev, pi, 1.0, &c).unwrap().power;
            prop_assert!((got / p0 - 1.0).abs() <= 1e-9);
            let closed = required_power_closed_form(rho, &ev, pi, 1.0);
            prop_assert!((closed / p0 - 1.0).abs() <= 1e-9, "{} vs {}", closed, p0);
        }
    }

    #[test]
    fn closed_form_overflow_is_outage() {
        assert!(required_power_closed_form(1e4, &[1.0], 1.0, 1.0).is_infinite());
        assert!(required_power_closed_form(1.0, &[0.0, 0.0], 1.0, 1.0).is_infinite());
    }

    #[test]
    fn sampler_satisfies_rate_target() {
        let s = WaterfillSampler::new(&NetworkConfig::baseline()).unwrap();
        let mut rng = stream(8, &[]);
        for _ in 0..2000 {
            let d = s.draw(&mut rng).unwrap();
            assert_eq!(d.eigenvalues.len(), 4);
            if d.power.is_finite() && d.power > 0.0 {
                let p = waterfill(&d.eigenvalues, d.power, d.p_interference);
                let r = wf_rate(&d.eigenvalues, &p, d.p_interference, 1.0);
                assert!((r / d.rho - 1.0).abs() < 1e-9, "{r} vs {}", d.rho);
            }
        }
    }

    #[test]
    fn empty_cells_use_no_power() {
        let c = NetworkConfig::baseline();
        let s = mc_cell_power_wf(&c, &[1e-12], 2000, 3, Exec::Parallel).unwrap();
        assert!(s[0].powers.iter().all(|&p| p == 0.0));
        let r = ee_waterfill(&c.with_param("lambda_ratio", 0.0).unwrap(), 2000, 3, Exec::Parallel).unwrap();
        assert_eq!(r.ee, 0.0);
        assert_eq!(r.non_outage, 1.0);
    }

    #[test]
    fn mass_shifts_right_with_load() {
        let c = NetworkConfig::baseline();
        let s = mc_cell_power_wf(&c, &[20.0, 30.0, 40.0], 5000, 9, Exec::Parallel).unwrap();
        let deciles = |v: &CellPowerSample| {
            let x = sorted(v.powers.clone());
            (1..10).map(|i| quantile(&x, i as f64 / 10.0)).collect::<Vec<_>>()
        };
        let (a, b, d) = (deciles(&s[0]), deciles(&s[1]), deciles(&s[2]));
        for i in 0..9 {
            assert!(a[i] <= b[i] && b[i] <= d[i]);
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let c = NetworkConfig::baseline();
        let a = mc_cell_power_wf(&c, &[30.0], 300, 4, Exec::Parallel).unwrap();
        let b = mc_cell_power_wf(&c, &[30.0], 300, 4, Exec::Sequential).unwrap();
        assert_eq!(a, b);
    }
}
