//! Average (equal per-antenna) power allocation.
//!
//! Per MS the required power is `P₀ = P_I N_t R₀^σ τ / H₀`, where the SIR
//! demand `τ = e^{ρ/B} − 1` follows from the Pareto rate. Conditioning on
//! `τ` and `H₀` and integrating `R₀` out analytically gives the per-MS
//! transform
//!
//! `E[e^{-sP₀}] = E_{τ,H}[ πλ_B / (πλ_B + D s^α (N_t τ / H)^α) ]`
//!
//! with `D` the Laplace scale of the stable interference law. A Poisson
//! number of MSs per cell compounds it, and the cell-power law is recovered
//! by Talbot inversion with the empty-cell atom removed first.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::cellpower::{simulate_cells, CellPowerSample};
use crate::channel::FadingSampler;
use crate::distribution::TabulatedDistribution;
use crate::energy::{assemble_ee, EnergyReport, Scheme};
use crate::error::{Error, Result};
use crate::geometry::{nearest_distance_from_uniform, sample_ppp, Window};
use crate::interference::{far_field_mean, InterfererModel, StableLaw};
use crate::inversion::{Talbot, TalbotNode};
use crate::network::NetworkConfig;
use crate::par::Exec;
use crate::rng::StreamRng;
use crate::specfun::{integrate, integrate_semi_infinite, kronrod_rule, QuadratureSpec};
use crate::traffic::TrafficLaw;

use rand::Rng;

/// Law of the SIR demand `τ` induced by the Pareto rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirDemandLaw {
    pub traffic: TrafficLaw,
    pub bandwidth: f64,
}

impl SirDemandLaw {
    pub fn new(traffic: TrafficLaw, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) {
            return Err(Error::config("bandwidth", "must be positive"));
        }
        Ok(Self { traffic, bandwidth })
    }

    /// Smallest demand, `e^{ρ_min/B} − 1`.
    pub fn z0(&self) -> f64 {
        (self.traffic.rho_min / self.bandwidth).exp_m1()
    }

    pub fn pdf(&self, z: f64) -> f64 {
        tau_pdf(z, self)
    }

    pub fn cdf(&self, z: f64) -> f64 {
        if z <= self.z0() {
            return 0.0;
        }
        self.traffic.cdf(self.bandwidth * z.ln_1p())
    }

    /// `ln τ` for rate `rho`, finite even when `τ` overflows.
    pub fn ln_tau(&self, rho: f64) -> f64 {
        ln_expm1(rho / self.bandwidth)
    }
}

fn ln_expm1(q: f64) -> f64 {
    if q < 30.0 {
        q.exp_m1().ln()
    } else {
        q + (-(-q).exp()).ln_1p()
    }
}

/// Density of `τ`.
pub fn tau_pdf(z: f64, law: &SirDemandLaw) -> f64 {
    if z <= law.z0() {
        return 0.0;
    }
    let rho = law.bandwidth * z.ln_1p();
    law.traffic.pdf(rho) * law.bandwidth / (1.0 + z)
}

/// `P_I · N_t · R₀^σ · τ / H₀`.
pub fn required_power_sample(p_interference: f64, r0_sigma: f64, h0: f64, z: f64, nt: usize) -> f64 {
    p_interference * nt as f64 * r0_sigma * z / h0
}

/// One simulated MS of the average scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageDraw {
    pub p_interference: f64,
    pub r0: f64,
    pub h0: f64,
    pub rho: f64,
    pub power: f64,
}

/// Draws the factors of the per-MS power.
#[derive(Debug, Clone, Copy)]
pub struct AverageSampler {
    interference: StableLaw,
    fading: FadingSampler,
    demand: SirDemandLaw,
    lambda_b: f64,
    sigma: f64,
    nt: usize,
}

impl AverageSampler {
    pub fn new(cfg: &NetworkConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            interference: cfg.interference_law()?,
            fading: FadingSampler::new(&cfg.fading),
            demand: SirDemandLaw::new(cfg.traffic, cfg.bandwidth)?,
            lambda_b: cfg.lambda_b,
            sigma: cfg.sigma,
            nt: cfg.fading.nt,
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> AverageDraw {
        let p_interference = self.interference.sample(rng);
        let r0 = nearest_distance_from_uniform(rng.random::<f64>(), self.lambda_b);
        let h0 = self.fading.gain(rng);
        let rho = self.demand.traffic.sample(rng);
        let ln_p = p_interference.ln() + (self.nt as f64).ln() + self.sigma * r0.ln()
            + self.demand.ln_tau(rho)
            - h0.ln();
        AverageDraw {
            p_interference,
            r0,
            h0,
            rho,
            power: ln_p.exp(),
        }
    }
}

/// How the serving distance relates to the realised interferer pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Interferers from the pattern, serving distance drawn independently
    /// from the nearest-distance law (the analytic model's assumption).
    Independent,
    /// The nearest BS of the pattern serves and is not an interferer.
    SharedPattern,
}

/// Draws the per-MS power from a realised BS pattern around the MS. The
/// retained BSs interfere after thinning and the mean contribution beyond
/// the window is added back.
#[derive(Debug, Clone, Copy)]
pub struct SpatialAverageSampler {
    geometry: Geometry,
    model: InterfererModel,
    fading: FadingSampler,
    demand: SirDemandLaw,
    window: Window,
    lambda_b: f64,
    sigma: f64,
    tx_power: f64,
    far_field: f64,
    nt: usize,
}

impl SpatialAverageSampler {
    /// `window_multiple` sets the disc radius in units of `1/sqrt(πλ_B)`.
    pub fn new(cfg: &NetworkConfig, window_multiple: f64, geometry: Geometry) -> Result<Self> {
        cfg.validate()?;
        let model = cfg.interferer_model()?;
        let window = Window::for_intensity(cfg.lambda_b, window_multiple)?;
        Ok(Self {
            geometry,
            model,
            fading: FadingSampler::new(&cfg.fading),
            demand: SirDemandLaw::new(cfg.traffic, cfg.bandwidth)?,
            window,
            lambda_b: cfg.lambda_b,
            sigma: cfg.sigma,
            tx_power: model.tx_power(cfg.alpha()),
            far_field: far_field_mean(&model, cfg.sigma, window.radius)?,
            nt: cfg.fading.nt,
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<AverageDraw> {
        let pattern = sample_ppp(self.lambda_b, self.window, rng)?;
        let (serving, r0) = match self.geometry {
            Geometry::Independent => (None, nearest_distance_from_uniform(rng.random::<f64>(), self.lambda_b)),
            Geometry::SharedPattern => {
                let (i, r) = pattern
                    .nearest_to([0.0, 0.0])
                    .ok_or_else(|| Error::domain("spatial sampler", "window holds no BS"))?;
                (Some(i), r)
            }
        };
        let keep = self.model.intensity_inf / self.lambda_b;
        let mut p_interference = self.far_field;
        for (i, r) in pattern.distances_from_origin().enumerate() {
            if serving != Some(i) && rng.random::<f64>() < keep {
                p_interference += self.tx_power * self.fading.gain(rng) * r.powf(-self.sigma);
            }
        }
        let h0 = self.fading.gain(rng);
        let rho = self.demand.traffic.sample(rng);
        let ln_p = p_interference.ln() + (self.nt as f64).ln() + self.sigma * r0.ln()
            + self.demand.ln_tau(rho)
            - h0.ln();
        Ok(AverageDraw {
            p_interference,
            r0,
            h0,
            rho,
            power: ln_p.exp(),
        })
    }
}

/// Rule for `E[g(τ)]` as weights on `q = ρ/B`, with the mass beyond the last
/// panel returned separately.
fn demand_rule(law: &SirDemandLaw) -> (Vec<(f64, f64)>, f64) {
    let q_min = law.traffic.rho_min / law.bandwidth;
    let q_law = TrafficLaw {
        theta: law.traffic.theta,
        rho_min: q_min,
    };
    let mut nodes = Vec::new();
    let mut a = q_min;
    let mut width = 1.0;
    let end = q_min + 300.0;
    while a < end {
        if a >= q_min + 40.0 {
            width *= 2.0;
        }
        let b = (a + width).min(end);
        for (q, w) in kronrod_rule(a, b) {
            nodes.push((q, w * q_law.pdf(q)));
        }
        a = b;
    }
    (nodes, q_law.ccdf(end))
}

/// Per-MS power transform on a precomputed tensor rule over `(τ, H)`.
#[derive(Debug, Clone)]
pub struct AveragePerMs {
    alpha: f64,
    /// `D N_t^α / (πλ_B)`.
    kernel_scale: f64,
    /// `((τ/H)^α, weight)`.
    nodes: Arc<Vec<(f64, f64)>>,
}

impl AveragePerMs {
    pub fn new(cfg: &NetworkConfig) -> Result<Self> {
        cfg.validate()?;
        let alpha = cfg.alpha();
        let law = cfg.interference_law()?;
        let demand = SirDemandLaw::new(cfg.traffic, cfg.bandwidth)?;
        let (tau_nodes, _) = demand_rule(&demand);
        let h_nodes = cfg.fading.kg().expectation_rule_with(0.5, 1e-16);
        let mut nodes = Vec::with_capacity(tau_nodes.len() * h_nodes.len());
        for &(q, wq) in &tau_nodes {
            let ln_tau = ln_expm1(q);
            for &(h, wh) in &h_nodes {
                let y = (alpha * (ln_tau - h.ln())).exp();
                if y.is_finite() && wq * wh > 0.0 {
                    nodes.push((y, wq * wh));
                }
            }
        }
        let kernel_scale =
            law.laplace_scale() * (cfg.fading.nt as f64).powf(alpha) / (PI * cfg.lambda_b);
        Ok(Self {
            alpha,
            kernel_scale,
            nodes: Arc::new(nodes),
        })
    }

    /// `E[e^{-sP₀}]`.
    pub fn laplace(&self, s: Complex64) -> Complex64 {
        if s == Complex64::new(0.0, 0.0) {
            return Complex64::new(1.0, 0.0);
        }
        let a = s.powf(self.alpha) * self.kernel_scale;
        let (ar, ai) = (a.re, a.im);
        let (mut re, mut im) = (0.0, 0.0);
        for &(y, w) in self.nodes.iter() {
            let dr = 1.0 + ar * y;
            let di = ai * y;
            let k = w / (dr * dr + di * di);
            re += dr * k;
            im -= di * k;
        }
        Complex64::new(re, im)
    }

    /// `E[e^{jωP₀}]`.
    pub fn cf(&self, omega: f64) -> Complex64 {
        self.laplace(Complex64::new(0.0, -omega))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Per-MS transform values on the Talbot contour for one inversion point.
#[derive(Debug, Clone)]
pub struct ContourValues {
    pub t: f64,
    pub nodes: Vec<TalbotNode>,
    pub per_ms: Vec<Complex64>,
}

/// Analytic cell-power law of the average scheme.
#[derive(Debug, Clone)]
pub struct AverageCellPower {
    pub per_ms: AveragePerMs,
    pub load: f64,
    pub talbot: Talbot,
}

impl AverageCellPower {
    pub fn new(cfg: &NetworkConfig) -> Result<Self> {
        Ok(Self {
            per_ms: AveragePerMs::new(cfg)?,
            load: cfg.load_ratio(),
            talbot: Talbot::default(),
        })
    }

    /// Same per-MS law with a different mean population.
    pub fn with_load(&self, load: f64) -> Self {
        Self {
            load,
            ..self.clone()
        }
    }

    /// Probability of an empty cell, `e^{-λ_M/λ_B}`.
    pub fn atom(&self) -> f64 {
        (-self.load).exp()
    }

    pub fn laplace(&self, s: Complex64) -> Complex64 {
        self.compound(self.per_ms.laplace(s))
    }

    pub fn cf(&self, omega: f64) -> Complex64 {
        self.laplace(Complex64::new(0.0, -omega))
    }

    fn compound(&self, per_ms: Complex64) -> Complex64 {
        ((per_ms - 1.0) * self.load).exp()
    }

    pub fn contour(&self, t: f64) -> ContourValues {
        let nodes = self.talbot.nodes(t);
        let per_ms = nodes.iter().map(|n| self.per_ms.laplace(n.s)).collect();
        ContourValues { t, nodes, per_ms }
    }

    /// Inverts `(L - atom) / s^k` at the contour's point.
    fn invert_continuous(&self, c: &ContourValues, k: i32) -> f64 {
        let p0 = self.atom();
        let vals: Vec<Complex64> = c
            .nodes
            .iter()
            .zip(&c.per_ms)
            .map(|(n, &v)| (self.compound(v) - p0) / n.s.powi(k))
            .collect();
        self.talbot.combine(&c.nodes, &vals)
    }

    pub fn pdf_at(&self, c: &ContourValues) -> f64 {
        self.invert_continuous(c, 0)
    }

    pub fn cdf_at(&self, c: &ContourValues) -> f64 {
        (self.atom() + self.invert_continuous(c, 1)).clamp(0.0, 1.0)
    }

    /// `∫₀^t F(x) dx`.
    pub fn integrated_cdf_at(&self, c: &ContourValues) -> f64 {
        self.atom() * c.t + self.invert_continuous(c, 2)
    }

    pub fn pdf(&self, t: f64) -> f64 {
        self.pdf_at(&self.contour(t))
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.cdf_at(&self.contour(t))
    }

    /// Non-outage probability and truncated mean `E[P · 1{P <= t}]`.
    pub fn outage_ingredients(&self, c: &ContourValues) -> (f64, f64) {
        let f = self.cdf_at(c);
        let integrated = self.integrated_cdf_at(c);
        (f, (c.t * f - integrated).max(0.0))
    }

    pub fn tabulate(&self, grid: &[f64]) -> Result<TabulatedDistribution> {
        if grid.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::domain("invert_cell_power", "grid must be positive"));
        }
        let mut pdf = Vec::with_capacity(grid.len());
        let mut cdf = Vec::with_capacity(grid.len());
        for &x in grid {
            let c = self.contour(x);
            pdf.push(self.pdf_at(&c).max(0.0));
            cdf.push(self.cdf_at(&c));
        }
        // monotone envelope against inversion noise
        for i in 1..cdf.len() {
            cdf[i] = cdf[i].max(cdf[i - 1]);
        }
        TabulatedDistribution::new(grid.to_vec(), pdf, cdf, self.atom())
    }
}

pub fn cf_per_ms_power(omega: f64, cfg: &NetworkConfig) -> Result<Complex64> {
    Ok(AveragePerMs::new(cfg)?.cf(omega))
}

pub fn cf_cell_power(omega: f64, cfg: &NetworkConfig) -> Result<Complex64> {
    Ok(AverageCellPower::new(cfg)?.cf(omega))
}

pub fn invert_cell_power(cfg: &NetworkConfig, grid: &[f64]) -> Result<TabulatedDistribution> {
    AverageCellPower::new(cfg)?.tabulate(grid)
}

fn report(cfg: &NetworkConfig, law: &AverageCellPower, c: &ContourValues) -> Result<EnergyReport> {
    let (f, mean_real) = law.outage_ingredients(c);
    let traffic = cfg.bandwidth * law.load * cfg.traffic.mean();
    assemble_ee(traffic, f, mean_real, cfg.fading.nt, &cfg.power, cfg.numerator, Scheme::Average)
}

/// Energy efficiency of the average scheme from the analytic cell-power law.
pub fn ee_average(cfg: &NetworkConfig) -> Result<EnergyReport> {
    let law = AverageCellPower::new(cfg)?;
    let c = law.contour(cfg.power.p_max);
    report(cfg, &law, &c)
}

/// [`ee_average`] over several mean populations, sharing one set of
/// per-MS transform evaluations.
pub fn ee_average_loads(cfg: &NetworkConfig, loads: &[f64]) -> Result<Vec<EnergyReport>> {
    let base = AverageCellPower::new(cfg)?;
    let c = base.contour(cfg.power.p_max);
    loads
        .iter()
        .map(|&l| {
            let cfg_l = NetworkConfig {
                lambda_m: l * cfg.lambda_b,
                ..*cfg
            };
            report(&cfg_l, &base.with_load(l), &c)
        })
        .collect()
}

/// Cell powers of the average scheme by direct simulation.
pub fn mc_cell_power_average(
    cfg: &NetworkConfig,
    loads: &[f64],
    replications: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<CellPowerSample>> {
    let sampler = AverageSampler::new(cfg)?;
    Ok(simulate_cells(loads, replications, seed, exec, |rng: &mut StreamRng| {
        sampler.draw(rng).power
    }))
}

/// Cell powers of the average scheme with interference and serving distance
/// taken from a realised BS pattern for every MS.
pub fn mc_cell_power_average_spatial(
    cfg: &NetworkConfig,
    loads: &[f64],
    replications: usize,
    seed: u64,
    window_multiple: f64,
    geometry: Geometry,
    exec: Exec,
) -> Result<Vec<CellPowerSample>> {
    let sampler = SpatialAverageSampler::new(cfg, window_multiple, geometry)?;
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

/// Per-MS characteristic function by nested adaptive quadrature over the
/// K_G density and the Pareto rate, independent of the tensor rule.
pub fn cf_per_ms_power_nested(omega: f64, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<Complex64> {
    let alpha = cfg.alpha();
    let law = cfg.interference_law()?;
    let g = law.delta
        * omega.abs().powf(alpha)
        * Complex64::new(1.0, -omega.signum() * (PI * alpha / 2.0).tan())
        * (cfg.fading.nt as f64).powf(alpha);
    let c = PI * cfg.lambda_b;
    let kg = cfg.fading.kg();
    let demand = SirDemandLaw::new(cfg.traffic, cfg.bandwidth)?;
    let inner = |ln_h: f64| -> Complex64 {
        let f = |rho: f64| {
            let y = (alpha * (demand.ln_tau(rho) - ln_h)).exp();
            let k = if y.is_finite() { c / (g * y + c) } else { Complex64::new(0.0, 0.0) };
            k * cfg.traffic.pdf(rho)
        };
        integrate_semi_infinite(f, cfg.traffic.rho_min, spec).value
    };
    let centre = kg.mean_log();
    let outer = |s: f64| inner(s) * kg.log_space_pdf(s);
    let left = integrate(outer, centre - 60.0, centre, spec);
    let right = integrate(outer, centre, centre + 15.0, spec);
    Ok(left.value + right.value)
}
