//! Composite Gamma-shadowing × Nakagami-m channel.
//!
//! The per-link gain summed over all `Nt·Nr` antenna pairs is
//! `H = w · Σ|z|²`, with one shadowing factor `w ~ Gamma(λ, Ω/λ)` shared by
//! every pair and unit-mean Nakagami powers `|z|² ~ Gamma(m, 1/m)`. Its law
//! is the K_G density with shape product `Nt·Nr·m`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::specfun::{kronrod_rule, ln_bessel_k, ln_gamma};

/// Shadowing spread in dB to (Gamma shape λ, scale factor Ω).
pub fn shadowing_params(sigma_db: f64) -> Result<(f64, f64)> {
    if !(sigma_db > 0.0) {
        return Err(Error::domain("shadowing", "sigma_db must be positive"));
    }
    let ratio = sigma_db / 8.686;
    let lambda = 1.0 / (ratio * ratio).exp_m1().powi(2);
    let omega = ((lambda + 1.0) / lambda).sqrt();
    Ok((lambda, omega))
}

/// Fading model parameters with the derived shadowing constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams {
    pub m: f64,
    pub sigma_db: f64,
    pub lambda_shape: f64,
    pub omega: f64,
    pub nt: usize,
    pub nr: usize,
}

impl FadingParams {
    pub fn new(m: f64, sigma_db: f64, nt: usize, nr: usize) -> Result<Self> {
        if !(m >= 0.5) {
            return Err(Error::config("m", format!("Nakagami shape must be >= 0.5, got {m}")));
        }
        if !(sigma_db > 0.0) {
            return Err(Error::config("sigma_db", "shadowing spread must be positive"));
        }
        if nt == 0 || nr == 0 {
            return Err(Error::config("nt/nr", "antenna counts must be at least 1"));
        }
        let (lambda_shape, omega) = shadowing_params(sigma_db)?;
        Ok(Self {
            m,
            sigma_db,
            lambda_shape,
            omega,
            nt,
            nr,
        })
    }

    /// Shape of the summed multipath power, `Nt·Nr·m`.
    pub fn multipath_shape(&self) -> f64 {
        (self.nt * self.nr) as f64 * self.m
    }

    /// Rate constant `mλ/Ω` of the K_G kernel.
    pub fn kernel_rate(&self) -> f64 {
        self.m * self.lambda_shape / self.omega
    }

    /// Rank of the direct MIMO channel, `min(Nt, Nr)`.
    pub fn rank(&self) -> usize {
        self.nt.min(self.nr)
    }

    pub fn kg(&self) -> KgLaw {
        KgLaw::new(self)
    }
}

/// Pre-computed constants of the K_G density.
#[derive(Debug, Clone, Copy)]
pub struct KgLaw {
    shape: f64,
    lambda: f64,
    rate: f64,
    ln_norm: f64,
}

impl KgLaw {
    pub fn new(p: &FadingParams) -> Self {
        let shape = p.multipath_shape();
        let lambda = p.lambda_shape;
        let rate = p.kernel_rate();
        let ln_norm = std::f64::consts::LN_2 + 0.5 * (shape + lambda) * rate.ln()
            - ln_gamma(shape).expect("positive shape")
            - ln_gamma(lambda).expect("positive shape");
        Self {
            shape,
            lambda,
            rate,
            ln_norm,
        }
    }

    /// `ln f_H(y)`.
    pub fn ln_pdf(&self, y: f64) -> f64 {
        let arg = 2.0 * (self.rate * y).sqrt();
        self.ln_norm
            + 0.5 * (self.shape + self.lambda - 2.0) * y.ln()
            + ln_bessel_k(self.lambda - self.shape, arg).expect("positive argument")
    }

    /// Density of `ln H` at `s`: `f_H(e^s) e^s`.
    pub fn log_space_pdf(&self, s: f64) -> f64 {
        let y = s.exp();
        if y <= 0.0 || !y.is_finite() {
            return 0.0;
        }
        (self.ln_pdf(y) + s).exp()
    }

    /// `E[ln H]`, the centre of the log-space density.
    pub fn mean_log(&self) -> f64 {
        digamma(self.shape) + digamma(self.lambda) - self.rate.ln()
    }

    /// `E[H^α]` in closed form, valid for `α > -min(Nt Nr m, λ)`.
    pub fn fractional_moment(&self, alpha: f64) -> Result<f64> {
        if !(alpha > -self.shape.min(self.lambda)) {
            return Err(Error::domain("kg_fractional_moment", format!("order {alpha} outside the moment domain")));
        }
        Ok((-alpha * self.rate.ln() + ln_gamma(self.lambda + alpha)? + ln_gamma(self.shape + alpha)?
            - ln_gamma(self.shape)?
            - ln_gamma(self.lambda)?)
        .exp())
    }

    /// Quadrature rule `(y_i, w_i)` with `Σ w_i g(y_i) ≈ E[g(H)]` for
    /// functions smooth in `ln y`. Panels of width 0.25 in `ln y` carry a
    /// 21-point Kronrod rule; the range extends until the log-space density
    /// falls below 1e-22 of its largest sampled value.
    pub fn expectation_rule(&self) -> Vec<(f64, f64)> {
        self.expectation_rule_with(0.25, 1e-22)
    }

    /// [`Self::expectation_rule`] with a chosen panel width and cutoff.
    pub fn expectation_rule_with(&self, width: f64, cutoff: f64) -> Vec<(f64, f64)> {
        let centre = self.mean_log();
        let mut nodes = Vec::new();
        let mut peak: f64 = self.log_space_pdf(centre);
        for dir in [-1.0, 1.0] {
            let mut k = 0.0;
            loop {
                let (a, b) = if dir < 0.0 {
                    (centre - (k + 1.0) * width, centre - k * width)
                } else {
                    (centre + k * width, centre + (k + 1.0) * width)
                };
                let mut panel_max: f64 = 0.0;
                for (s, w) in kronrod_rule(a, b) {
                    let g = self.log_space_pdf(s);
                    panel_max = panel_max.max(g);
                    if g > 0.0 {
                        nodes.push((s.exp(), w * g));
                    }
                }
                peak = peak.max(panel_max);
                k += 1.0;
                if panel_max < cutoff * peak || k > 4000.0 {
                    break;
                }
            }
        }
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        nodes
    }
}

/// Digamma via recurrence and the asymptotic series.
fn digamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 8.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + x.ln() - 0.5 * inv
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)))
}

/// K_G density of the composite gain `H`.
pub fn kg_pdf(y: f64, params: &FadingParams) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain("kg_pdf", format!("gain must be positive, got {y}")));
    }
    Ok(params.kg().ln_pdf(y).exp())
}

/// `E[H^α]` for the K_G law.
pub fn kg_fractional_moment(alpha: f64, params: &FadingParams) -> Result<f64> {
    params.kg().fractional_moment(alpha)
}

/// Samplers for the two Gamma factors of the composite gain.
#[derive(Debug, Clone, Copy)]
pub struct FadingSampler {
    params: FadingParams,
    shadowing: Gamma<f64>,
    entry: Gamma<f64>,
    summed: Gamma<f64>,
}

impl FadingSampler {
    pub fn new(params: &FadingParams) -> Self {
        let p = *params;
        Self {
            params: p,
            shadowing: Gamma::new(p.lambda_shape, p.omega / p.lambda_shape).expect("valid shadowing"),
            entry: Gamma::new(p.m, 1.0 / p.m).expect("valid Nakagami"),
            summed: Gamma::new(p.multipath_shape(), 1.0 / p.m).expect("valid Nakagami sum"),
        }
    }

    pub fn params(&self) -> &FadingParams {
        &self.params
    }

    /// Shadowing factor `w` (mean Ω).
    pub fn shadowing<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.shadowing.sample(rng)
    }

    /// One Nakagami power `|z|²` (unit mean).
    pub fn entry_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.entry.sample(rng)
    }

    /// Composite gain `H = w Σ|z|²`.
    pub fn gain<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.shadowing(rng) * self.summed.sample(rng)
    }

    /// Draws the direct `Nr × Nt` channel: common shadowing, Nakagami-m
    /// magnitudes with uniform phases, scaled by `r0^-σ`.
    pub fn direct_channel<R: Rng + ?Sized>(&self, r0: f64, sigma: f64, rng: &mut R) -> DirectChannel {
        let (nr, nt) = (self.params.nr, self.params.nt);
        let w0 = self.shadowing(rng);
        let scale = w0 * r0.powf(-sigma);
        let matrix = DMatrix::from_fn(nr, nt, |_, _| {
            let amp = (scale * self.entry_power(rng)).sqrt();
            let phase = 2.0 * PI * rng.random::<f64>();
            Complex64::from_polar(amp, phase)
        });
        DirectChannel {
            matrix,
            shadowing: w0,
            pathloss: r0.powf(sigma),
        }
    }
}

/// A realised direct channel matrix.
#[derive(Debug, Clone)]
pub struct DirectChannel {
    pub matrix: DMatrix<Complex64>,
    pub shadowing: f64,
    /// `r0^σ`.
    pub pathloss: f64,
}

impl DirectChannel {
    /// Nonzero eigenvalues of `HᴴH`, descending (`min(Nt, Nr)` of them).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = &self.matrix;
        let gram = if h.nrows() <= h.ncols() {
            h * h.adjoint()
        } else {
            h.adjoint() * h
        };
        let mut ev: Vec<f64> = gram
            .symmetric_eigenvalues()
            .iter()
            .map(|&v| v.max(0.0))
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Draws `H` (see [`FadingSampler::gain`]).
pub fn sample_h<R: Rng + ?Sized>(params: &FadingParams, rng: &mut R) -> f64 {
    FadingSampler::new(params).gain(rng)
}

/// Draws the eigenvalues of `H00ᴴH00` for a serving distance `r0`.
pub fn sample_direct_eigenvalues<R: Rng + ?Sized>(
    params: &FadingParams,
    r0: f64,
    sigma: f64,
    rng: &mut R,
) -> Vec<f64> {
    FadingSampler::new(params).direct_channel(r0, sigma, rng).eigenvalues()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::specfun::{integrate, integrate_semi_infinite, QuadratureSpec};
    use crate::stats::{ks_critical_1pct, ks_statistic, quantile, sorted};
    use statrs::distribution::{ChiSquared, ContinuousCDF, Gamma as SGamma};

    fn defaults() -> FadingParams {
        FadingParams::new(1.0, 6.0, 8, 4).unwrap()
    }

    /// ∫ g(s) over the bulk of the log-space density, split at the log-mean.
    /// The left tail decays like e^{min(k,λ)s} and the right tail
    /// doubly exponentially, so the truncation error is far below 1e-10.
    fn log_space_integral<F: Fn(f64) -> f64>(law: &KgLaw, g: F, spec: &QuadratureSpec) -> f64 {
        let c = law.mean_log();
        integrate(&g, c - 200.0, c, spec).value + integrate(&g, c, c + 15.0, spec).value
    }

    #[test]
    fn shadowing_at_six_db() {
        let (l, o) = shadowing_params(6.0).unwrap();
        // (6/8.686)^2 = 0.4771638..., λ = 1/(e^that - 1)^2
        let r: f64 = 6.0 / 8.686;
        let lam = 1.0 / ((r * r).exp() - 1.0).powi(2);
        assert!((l - lam).abs() < 1e-12);
        assert!((l - 2.6742).abs() < 1e-3, "{l}");
        assert!((o - 1.1722).abs() < 1e-3, "{o}");
        assert!(shadowing_params(0.0).is_err());
    }

    #[test]
    fn shadowing_shape_decreases_and_diverges() {
        let mut prev = f64::INFINITY;
        for i in 1..=1200 {
            let (l, _) = shadowing_params(i as f64 * 0.01).unwrap();
            assert!(l < prev);
            prev = l;
        }
        assert!(shadowing_params(1e-3).unwrap().0 > 1e10);
    }

    #[test]
    fn kg_pdf_domain() {
        assert!(kg_pdf(0.0, &defaults()).is_err());
        assert!(kg_pdf(-1.0, &defaults()).is_err());
        assert!(kg_pdf(30.0, &defaults()).unwrap() > 0.0);
    }

    #[test]
    fn kg_pdf_normalises_across_grid() {
        let spec = QuadratureSpec::new(1e-11, 1e-14, 4000).unwrap();
        for m in [0.5, 1.0, 2.0] {
            for sdb in [3.0, 6.0, 9.0] {
                for (nt, nr) in [(1, 1), (2, 2), (8, 4)] {
                    let p = FadingParams::new(m, sdb, nt, nr).unwrap();
                    let law = p.kg();
                    let mass = log_space_integral(&law, |s| law.log_space_pdf(s), &spec);
                    assert!((mass - 1.0).abs() < 1e-6, "m={m} sdb={sdb} nt={nt} nr={nr}: {mass}");
                }
            }
        }
    }

    #[test]
    fn mean_matches_first_moment_and_product_construction() {
        let p = defaults();
        let law = p.kg();
        let spec = QuadratureSpec::new(1e-11, 1e-14, 4000).unwrap();
        let mean = log_space_integral(&law, |s| s.exp() * law.log_space_pdf(s), &spec);
        let closed = law.fractional_moment(1.0).unwrap();
        assert!((mean / closed - 1.0).abs() < 1e-8);
        // E[w]E[Σ|z|²] = Ω · Nt Nr
        assert!((closed - p.omega * 32.0).abs() < 1e-9);
    }

    #[test]
    fn fractional_moment_limits() {
        let p = defaults();
        assert!((kg_fractional_moment(1e-12, &p).unwrap() - 1.0).abs() < 1e-10);
        assert!(kg_fractional_moment(-50.0, &p).is_err());
    }

    #[test]
    fn fractional_moment_matches_monte_carlo() {
        let p = defaults();
        let s = FadingSampler::new(&p);
        let mut rng = stream(17, &[]);
        let n = 2_000_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let v = s.gain(&mut rng).sqrt();
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        let closed = kg_fractional_moment(0.5, &p).unwrap();
        assert!((mean / closed - 1.0).abs() < 0.005);
        assert!((mean - closed).abs() < 4.0 * se);
    }

    #[test]
    fn sampled_gain_matches_kg_pdf() {
        let p = defaults();
        let law = p.kg();
        let s = FadingSampler::new(&p);
        let mut rng = stream(23, &[]);
        let draws = sorted((0..1_000_000).map(|_| s.gain(&mut rng)).collect());

        // CDF oracle: cumulative quadrature of kg_pdf on a fine log grid
        let lo = (quantile(&draws, 0.0) * 0.5).ln();
        let hi = (quantile(&draws, 1.0) * 2.0).ln();
        let n_grid = 4000;
        let step = (hi - lo) / n_grid as f64;
        let spec = QuadratureSpec::new(1e-12, 1e-16, 200).unwrap();
        let head = integrate_semi_infinite(|t| law.log_space_pdf(lo - t), 0.0, &spec).value;
        let mut grid = vec![(lo, head)];
        for i in 0..n_grid {
            let a = lo + i as f64 * step;
            let q = integrate(|s| law.log_space_pdf(s), a, a + step, &spec).value;
            grid.push((a + step, grid.last().unwrap().1 + q));
        }
        let cdf = |y: f64| {
            let s = y.ln();
            let k = (((s - lo) / step).floor() as usize).min(n_grid - 1);
            let (s0, c0) = grid[k];
            let (s1, c1) = grid[k + 1];
            c0 + (c1 - c0) * (s - s0) / (s1 - s0)
        };
        let ks = ks_statistic(&draws, cdf);
        assert!(ks < ks_critical_1pct(draws.len()), "ks {ks}");

        // tail probability at the median
        let med = quantile(&draws, 0.5);
        let tail_mc = 1.0 - crate::stats::empirical_cdf(&draws, med);
        assert!(((1.0 - cdf(med)) / tail_mc - 1.0).abs() < 0.01);
        let (mean, _) = crate::stats::mean_stderr(&draws);
        assert!((mean / law.fractional_moment(1.0).unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn rayleigh_single_antenna_without_shadowing_is_exponential() {
        // σ_dB → 0 makes w degenerate at Ω → 1
        let p = FadingParams::new(1.0, 1e-3, 1, 1).unwrap();
        let s = FadingSampler::new(&p);
        let mut rng = stream(5, &[]);
        let draws = sorted((0..200_000).map(|_| s.gain(&mut rng)).collect());
        let ks = ks_statistic(&draws, |y| 1.0 - (-y).exp());
        assert!(ks < ks_critical_1pct(draws.len()));
    }

    #[test]
    fn expectation_rule_reproduces_moments() {
        for (m, sdb, nt, nr) in [(1.0, 6.0, 8, 4), (0.5, 9.0, 1, 1), (2.0, 3.0, 2, 2)] {
            let p = FadingParams::new(m, sdb, nt, nr).unwrap();
            let law = p.kg();
            let rule = law.expectation_rule();
            let mass: f64 = rule.iter().map(|(_, w)| w).sum();
            assert!((mass - 1.0).abs() < 1e-10, "mass {mass}");
            for alpha in [0.1, 0.3, 0.5, 1.0] {
                let q: f64 = rule.iter().map(|(y, w)| w * y.powf(alpha)).sum();
                let c = law.fractional_moment(alpha).unwrap();
                assert!((q / c - 1.0).abs() < 1e-9, "alpha {alpha}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn single_antenna_eigenvalue_is_channel_power() {
        let p = FadingParams::new(1.0, 6.0, 1, 1).unwrap();
        let s = FadingSampler::new(&p);
        let ch = s.direct_channel(500.0, 4.0, &mut stream(1, &[]));
        let ev = ch.eigenvalues();
        assert_eq!(ev.len(), 1);
        assert!((ev[0] / ch.matrix[(0, 0)].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_sum_is_frobenius_norm() {
        let mut rng = stream(9, &[]);
        for (nt, nr) in [(8, 4), (2, 4), (3, 3)] {
            let p = FadingParams::new(1.5, 6.0, nt, nr).unwrap();
            let s = FadingSampler::new(&p);
            for _ in 0..100 {
                let ch = s.direct_channel(300.0, 3.5, &mut rng);
                let ev = ch.eigenvalues();
                assert_eq!(ev.len(), nt.min(nr));
                assert!(ev.windows(2).all(|w| w[0] >= w[1]));
                let sum: f64 = ev.iter().sum();
                assert!((sum / ch.frobenius_sq() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalised_eigenvalue_sum_has_mean_nt_nr() {
        let p = defaults();
        let s = FadingSampler::new(&p);
        let mut rng = stream(31, &[]);
        let n = 200_000;
        let vals: Vec<f64> = (0..n)
            .map(|_| {
                let ch = s.direct_channel(700.0, 4.0, &mut rng);
                ch.frobenius_sq() * ch.pathloss / ch.shadowing
            })
            .collect();
        let (mean, se) = crate::stats::mean_stderr(&vals);
        assert!((mean - 32.0).abs() < 4.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn nakagami_entries_have_uniform_phase_and_gamma_power() {
        let p = FadingParams::new(2.0, 6.0, 4, 4).unwrap();
        let s = FadingSampler::new(&p);
        let mut rng = stream(41, &[]);
        let mut phases = Vec::new();
        let mut powers = Vec::new();
        for _ in 0..5000 {
            let ch = s.direct_channel(1.0, 4.0, &mut rng);
            for z in ch.matrix.iter() {
                phases.push(z.arg());
                powers.push(z.norm_sqr() / ch.shadowing);
            }
        }
        let bins = 32;
        let mut counts = vec![0usize; bins];
        for ph in &phases {
            let k = (((ph + PI) / (2.0 * PI)) * bins as f64).floor() as usize;
            counts[k.min(bins - 1)] += 1;
        }
        let e = phases.len() as f64 / bins as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(chi2 < ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99));

        let g = SGamma::new(2.0, 2.0).unwrap(); // shape m, rate m
        let powers = sorted(powers);
        let ks = ks_statistic(&powers, |x| g.cdf(x));
        assert!(ks < ks_critical_1pct(powers.len()));
    }
}
