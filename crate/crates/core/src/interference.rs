//! One-sided alpha-stable aggregate interference at the typical MS.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use statrs::function::erf::erfc;

use crate::channel::{FadingParams, FadingSampler};
use crate::distribution::TabulatedDistribution;
use crate::error::{Error, Result};
use crate::geometry::PointPattern;
use crate::inversion::Talbot;
use crate::specfun::{gamma_fn, integrate, QuadratureSpec};

/// Stable law with skew `beta = 1` and location `mu = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableLaw {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
}

impl StableLaw {
    /// Totally skewed law on `[0, ∞)`; `delta = 0` is the point mass at 0.
    pub fn one_sided(alpha: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain("stable law", format!("alpha must lie in (0,1), got {alpha}")));
        }
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::domain("stable law", format!("scale must be finite and >= 0, got {delta}")));
        }
        Ok(Self {
            alpha,
            beta: 1.0,
            delta,
            mu: 0.0,
        })
    }

    /// `D` in the Laplace transform `exp(-D s^α)`.
    pub fn laplace_scale(&self) -> f64 {
        self.delta / (PI * self.alpha / 2.0).cos()
    }

    pub fn cf(&self, omega: f64) -> Complex64 {
        stable_cf(self, omega)
    }

    /// `E[e^{-sX}]`, continued analytically off the positive axis.
    pub fn laplace(&self, s: Complex64) -> Complex64 {
        (-self.laplace_scale() * s.powf(self.alpha)).exp()
    }

    fn check_nondegenerate(&self) -> Result<()> {
        if self.delta > 0.0 {
            Ok(())
        } else {
            Err(Error::domain("stable law", "degenerate law has no density"))
        }
    }

    /// Density at `x` from the integral representation
    /// `f(x) = α/((1-α)π) x^{-1/(1-α)} ∫₀^π A(u) exp(-A(u) x^{-α/(1-α)}) du`
    /// of the standard law, rescaled.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.check_nondegenerate()?;
        if x <= 0.0 {
            return Ok(0.0);
        }
        let a = self.alpha;
        let k = self.laplace_scale().powf(1.0 / a);
        let z = x / k;
        let ln_y = -a / (1.0 - a) * z.ln();
        let q = integrate(|u| (kanter_ln_a(a, u) + ln_y - (kanter_ln_a(a, u) + ln_y).exp()).exp(), 0.0, PI, &zolotarev_spec())
            .check("stable pdf", &zolotarev_spec())?;
        // ∫ A e^{-Ay} du = (1/y) ∫ (Ay) e^{-Ay} du
        Ok(a / ((1.0 - a) * PI) * q / (z * k))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.check_nondegenerate()?;
        if x <= 0.0 {
            return Ok(0.0);
        }
        let a = self.alpha;
        let z = x / self.laplace_scale().powf(1.0 / a);
        let ln_y = -a / (1.0 - a) * z.ln();
        let q = integrate(|u| (-(kanter_ln_a(a, u) + ln_y).exp()).exp(), 0.0, PI, &zolotarev_spec())
            .check("stable cdf", &zolotarev_spec())?;
        Ok((q / PI).clamp(0.0, 1.0))
    }

    /// Density by Talbot inversion of the Laplace transform. The continued
    /// transform stays bounded on the contour only for `alpha <= 1/2`.
    pub fn pdf_by_inversion(&self, x: f64) -> Result<f64> {
        self.check_nondegenerate()?;
        if self.alpha > 0.5 {
            return Err(Error::domain("stable inversion", "Talbot contour requires alpha <= 1/2"));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        Ok(Talbot::default().invert(|s| self.laplace(s), x))
    }

    /// The law of `k·X`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            delta: self.delta * k.powf(self.alpha),
            ..*self
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_stable(self, rng)
    }
}

fn zolotarev_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-10,
        abs_tol: 1e-300,
        max_subdivisions: 2000,
    }
}

/// `ln A(u)` with `A(u) = (sin αu / sin u)^{1/(1-α)} sin((1-α)u) / sin αu`.
fn kanter_ln_a(a: f64, u: f64) -> f64 {
    let (sa, s1, sb) = ((a * u).sin(), u.sin(), ((1.0 - a) * u).sin());
    if u <= 0.0 {
        return a / (1.0 - a) * a.ln() + (1.0 - a).ln();
    }
    (sa.ln() - s1.ln()) / (1.0 - a) + sb.ln() - sa.ln()
}

/// Density of the Lévy law with scale `c`.
pub fn levy_pdf(x: f64, c: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (c / (2.0 * PI)).sqrt() * (-c / (2.0 * x)).exp() * x.powf(-1.5)
}

pub fn levy_cdf(x: f64, c: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    erfc((c / (2.0 * x)).sqrt())
}

/// Interfering BS population and its transmit-power and fading laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfererModel {
    pub intensity_inf: f64,
    pub tx_power_moment: f64,
    pub fading: FadingParams,
}

impl InterfererModel {
    pub fn new(intensity_inf: f64, tx_power_moment: f64, fading: FadingParams) -> Result<Self> {
        if !(intensity_inf >= 0.0) {
            return Err(Error::config("lambda_inf", "interferer intensity must be >= 0"));
        }
        if !(tx_power_moment > 0.0) {
            return Err(Error::config("tx_power_moment_w_alpha", "fractional power moment must be positive"));
        }
        Ok(Self {
            intensity_inf,
            tx_power_moment,
            fading,
        })
    }

    /// Deterministic transmit power honouring the fractional moment at `alpha`.
    pub fn tx_power(&self, alpha: f64) -> f64 {
        self.tx_power_moment.powf(1.0 / alpha)
    }
}

fn stability_index(sigma: f64) -> Result<f64> {
    if !(sigma > 2.0) {
        return Err(Error::domain("stable_scale", format!("sigma must exceed 2, got {sigma}")));
    }
    Ok(2.0 / sigma)
}

/// Stable law of the aggregate interference for path-loss exponent `sigma`.
pub fn stable_scale(model: &InterfererModel, sigma: f64) -> Result<StableLaw> {
    let alpha = stability_index(sigma)?;
    let h_moment = model.fading.kg().fractional_moment(alpha)?;
    let delta = model.intensity_inf * PI * gamma_fn(2.0 - alpha)? * (PI * alpha / 2.0).cos()
        / (1.0 - alpha)
        * model.tx_power_moment
        * h_moment;
    StableLaw::one_sided(alpha, delta)
}

pub fn stable_cf(law: &StableLaw, omega: f64) -> Complex64 {
    let a = law.delta * omega.abs().powf(law.alpha);
    let skew = law.beta * omega.signum() * (PI * law.alpha / 2.0).tan();
    (Complex64::new(-a, a * skew) + Complex64::new(0.0, law.mu * omega)).exp()
}

/// Density and CDF of `law` on `grid`.
pub fn stable_pdf(law: &StableLaw, grid: &[f64]) -> Result<TabulatedDistribution> {
    law.check_nondegenerate()?;
    if grid.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::domain("stable_pdf", "grid must be positive"));
    }
    let pdf = grid.iter().map(|&x| law.pdf(x)).collect::<Result<Vec<_>>>()?;
    let cdf = grid.iter().map(|&x| law.cdf(x)).collect::<Result<Vec<_>>>()?;
    TabulatedDistribution::new(grid.to_vec(), pdf, cdf, 0.0)
}

/// Draws from a one-sided stable law by Kanter's representation of the
/// standard law `exp(-s^α)`, rescaled by `D^{1/α}`.
pub fn sample_stable<R: Rng + ?Sized>(law: &StableLaw, rng: &mut R) -> f64 {
    if law.delta == 0.0 {
        return 0.0;
    }
    let a = law.alpha;
    let u = PI * (1.0 - rng.random::<f64>());
    let e = -(1.0 - rng.random::<f64>()).ln();
    let standard = (a * u).sin() / u.sin().powf(1.0 / a) * ((((1.0 - a) * u).sin()) / e).powf((1.0 - a) / a);
    law.laplace_scale().powf(1.0 / a) * standard
}

/// Mean interference from interferers beyond `radius`, which a finite
/// window omits.
pub fn far_field_mean(model: &InterfererModel, sigma: f64, radius: f64) -> Result<f64> {
    let alpha = stability_index(sigma)?;
    let mean_h = model.fading.kg().fractional_moment(1.0)?;
    Ok(model.intensity_inf * model.tx_power(alpha) * mean_h * 2.0 * PI * radius.powf(2.0 - sigma)
        / (sigma - 2.0))
}

/// Per-BS interference terms `P·H/R^σ` at the origin; thinned-out BSs
/// contribute 0. Thinning keeps each BS with probability
/// `intensity_inf / pattern.intensity`.
pub fn interference_terms<R: Rng + ?Sized>(
    pattern: &PointPattern,
    model: &InterfererModel,
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let alpha = stability_index(sigma)?;
    let keep = model.intensity_inf / pattern.intensity;
    if keep > 1.0 + 1e-12 {
        return Err(Error::config("lambda_inf", "interferer intensity exceeds BS intensity"));
    }
    let p = model.tx_power(alpha);
    let fading = FadingSampler::new(&model.fading);
    Ok(pattern
        .distances_from_origin()
        .map(|r| {
            if rng.random::<f64>() < keep {
                p * fading.gain(rng) * r.powf(-sigma)
            } else {
                0.0
            }
        })
        .collect())
}

/// Aggregate interference over a realised BS pattern, with the far-field
/// mean beyond the window added back.
pub fn mc_aggregate_interference<R: Rng + ?Sized>(
    pattern: &PointPattern,
    model: &InterfererModel,
    sigma: f64,
    rng: &mut R,
) -> Result<f64> {
    let near: f64 = interference_terms(pattern, model, sigma, rng)?.iter().sum();
    Ok(near + far_field_mean(model, sigma, pattern.window.radius)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::log_grid;
    use crate::geometry::{sample_ppp, Window};
    use crate::inversion::fourier_density;
    use crate::rng::stream;
    use crate::stats::{ks_critical_1pct, ks_statistic, ks_two_sample, sorted};
    use statrs::function::erf::erfc_inv;

    const LAMBDA_B: f64 = 1.0 / (PI * 800.0 * 800.0);

    fn default_model(frac: f64) -> InterfererModel {
        InterfererModel::new(frac * LAMBDA_B, 1e-2, FadingParams::new(1.0, 6.0, 8, 4).unwrap()).unwrap()
    }

    fn levy_quantile(p: f64, c: f64) -> f64 {
        let e = erfc_inv(p);
        c / (2.0 * e * e)
    }

    #[test]
    fn scale_vanishes_and_is_linear_in_intensity() {
        assert_eq!(stable_scale(&default_model(0.0), 4.0).unwrap().delta, 0.0);
        let a = stable_scale(&default_model(0.3), 4.0).unwrap().delta;
        let b = stable_scale(&default_model(0.6), 4.0).unwrap().delta;
        assert!((b / a - 2.0).abs() < 1e-12);
        assert!(stable_scale(&default_model(0.9), 2.0).is_err());
    }

    #[test]
    fn default_scale_by_hand() {
        let law = stable_scale(&default_model(0.9), 4.0).unwrap();
        // Γ(1.5) = √π/2, cos(π/4) = 1/√2, 1/(1-α) = 2
        let (lam, omega) = crate::channel::shadowing_params(6.0).unwrap();
        let b = lam / omega;
        let eh = b.powf(-0.5) * statrs::function::gamma::gamma(lam + 0.5) * statrs::function::gamma::gamma(32.5)
            / (statrs::function::gamma::gamma(32.0) * statrs::function::gamma::gamma(lam));
        let hand = 0.9 * LAMBDA_B * PI * (PI.sqrt() / 2.0) * (0.5f64).sqrt() * 2.0 * 1e-2 * eh;
        assert!((law.delta / hand - 1.0).abs() < 1e-12);
        assert_eq!(law.alpha, 0.5);
        assert!(law.delta > 0.0);
    }

    #[test]
    fn scale_monotone_in_inputs() {
        let base = stable_scale(&default_model(0.5), 4.0).unwrap().delta;
        let mut m = default_model(0.5);
        m.tx_power_moment = 2e-2;
        assert!(stable_scale(&m, 4.0).unwrap().delta > base);
        let mut m = default_model(0.5);
        m.fading = FadingParams::new(1.0, 6.0, 8, 8).unwrap(); // larger E[H^α]
        assert!(stable_scale(&m, 4.0).unwrap().delta > base);
    }

    #[test]
    fn cf_basics() {
        let law = StableLaw::one_sided(0.5, 1.0).unwrap();
        assert_eq!(stable_cf(&law, 0.0), Complex64::new(1.0, 0.0));
        let p = stable_cf(&law, 1.7);
        let m = stable_cf(&law, -1.7);
        assert!((p - m.conj()).norm() < 1e-15);
        let want = (-Complex64::new(1.0, -1.0)).exp();
        assert!((stable_cf(&law, 1.0) - want).norm() < 1e-15);
        for l in [law, StableLaw::one_sided(0.3, 2.0).unwrap(), StableLaw::one_sided(0.8, 0.1).unwrap()] {
            let mut prev = 1.0;
            for i in 1..200 {
                let v = l.cf(i as f64 * 0.05).norm();
                assert!(v <= 1.0 && v < prev);
                prev = v;
            }
        }
    }

    #[test]
    fn cf_is_laplace_on_imaginary_axis() {
        let law = StableLaw::one_sided(0.7, 0.4).unwrap();
        for w in [-3.0, -0.2, 0.5, 4.0] {
            let a = law.laplace(Complex64::new(0.0, -w));
            assert!((a - law.cf(w)).norm() < 1e-13);
        }
    }

    #[test]
    fn levy_case_inverts_to_closed_form() {
        let delta = 0.37;
        let law = StableLaw::one_sided(0.5, delta).unwrap();
        let c = delta * delta;
        let (lo, hi) = (levy_quantile(0.01, c), levy_quantile(0.99, c));
        let grid = log_grid(lo, hi, 200);
        let tab = stable_pdf(&law, &grid).unwrap();
        for (i, &x) in grid.iter().enumerate() {
            assert!((tab.pdf[i] / levy_pdf(x, c) - 1.0).abs() < 1e-4, "x={x}");
            assert!((tab.cdf[i] - levy_cdf(x, c)).abs() < 1e-6, "x={x}");
            let inv = law.pdf_by_inversion(x).unwrap();
            assert!((inv / levy_pdf(x, c) - 1.0).abs() < 1e-4, "x={x}");
        }
        assert!(StableLaw::one_sided(0.6, 1.0).unwrap().pdf_by_inversion(1.0).is_err());
    }

    #[test]
    fn density_mass_and_tail_slope() {
        for alpha in [0.5, 0.7] {
            let law = StableLaw::one_sided(alpha, 1.0).unwrap();
            let grid = log_grid(1e-3, 1e9, 3000);
            let tab = stable_pdf(&law, &grid).unwrap();
            let lower = tab.cdf[0];
            let upper = 1.0 - tab.cdf[grid.len() - 1];
            let mass = tab.total_mass() + lower + upper;
            assert!((mass - 1.0).abs() < 1e-4, "alpha {alpha}: {mass}");
            let tail: Vec<(f64, f64)> = grid
                .iter()
                .zip(&tab.pdf)
                .filter(|(x, _)| **x > 1e5 && **x < 1e8)
                .map(|(x, f)| (x.ln(), f.ln()))
                .collect();
            let n = tail.len() as f64;
            let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
            let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
            let slope = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
                / tail.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            assert!((slope / -(1.0 + alpha) - 1.0).abs() < 0.05, "slope {slope}");
        }
    }

    #[test]
    fn integral_form_agrees_with_fourier_route() {
        let law = StableLaw::one_sided(0.7, 1.0).unwrap();
        let spec = QuadratureSpec::new(1e-10, 1e-13, 2000).unwrap();
        // |Φ| = exp(-ω^0.7) is below 1e-16 once ω^0.7 > 37
        let cutoff = 37f64.powf(1.0 / 0.7);
        for x in [0.5, 1.0, 3.0, 10.0] {
            let four = fourier_density(|w| law.cf(w), x, cutoff, &spec).unwrap();
            let zol = law.pdf(x).unwrap();
            assert!((four / zol - 1.0).abs() < 1e-6, "x={x}: {four} vs {zol}");
        }
    }

    #[test]
    fn sampler_matches_levy_and_cf() {
        let delta = 2.0;
        let law = StableLaw::one_sided(0.5, delta).unwrap();
        let mut rng = stream(3, &[]);
        let draws: Vec<f64> = (0..1_000_000).map(|_| law.sample(&mut rng)).collect();
        for w in [0.5, 1.0, 2.0] {
            let n = draws.len() as f64;
            let (mut re, mut im, mut re2, mut im2) = (0.0, 0.0, 0.0, 0.0);
            for &x in &draws {
                let (s, c) = (w * x).sin_cos();
                re += c;
                im += s;
                re2 += c * c;
                im2 += s * s;
            }
            let (re, im) = (re / n, im / n);
            let se_re = ((re2 / n - re * re) / n).sqrt();
            let se_im = ((im2 / n - im * im) / n).sqrt();
            let want = law.cf(w);
            assert!((re - want.re).abs() < 3.0 * se_re, "w={w} re");
            assert!((im - want.im).abs() < 3.0 * se_im, "w={w} im");
        }
        let s = sorted(draws);
        let ks = ks_statistic(&s, |x| levy_cdf(x, delta * delta));
        assert!(ks < ks_critical_1pct(s.len()), "ks {ks}");
    }

    #[test]
    fn sampler_obeys_scaling_law() {
        let alpha = 0.6;
        let base = StableLaw::one_sided(alpha, 0.8).unwrap();
        let doubled = StableLaw::one_sided(alpha, 1.6).unwrap();
        let n = 200_000;
        let mut r1 = stream(11, &[]);
        let mut r2 = stream(12, &[]);
        let a = sorted((0..n).map(|_| 2f64.powf(1.0 / alpha) * base.sample(&mut r1)).collect());
        let b = sorted((0..n).map(|_| doubled.sample(&mut r2)).collect());
        let d = ks_two_sample(&a, &b);
        assert!(d < 1.6276 * (2.0 / n as f64).sqrt(), "two-sample ks {d}");
        let ks = ks_statistic(&b, |x| doubled.cdf(x).unwrap());
        assert!(ks < ks_critical_1pct(n));
    }

    #[test]
    fn no_interferers_means_no_interference() {
        let model = default_model(0.0);
        let window = Window::for_intensity(LAMBDA_B, 10.0).unwrap();
        let mut rng = stream(1, &[]);
        let pattern = sample_ppp(LAMBDA_B, window, &mut rng).unwrap();
        assert_eq!(mc_aggregate_interference(&pattern, &model, 4.0, &mut rng).unwrap(), 0.0);
        let empty = PointPattern {
            points: vec![],
            intensity: LAMBDA_B,
            window,
        };
        assert_eq!(interference_terms(&empty, &default_model(0.9), 4.0, &mut rng).unwrap(), Vec::<f64>::new());
    }

    #[test]
    fn doubling_distances_divides_terms_by_sixteen() {
        let model = default_model(0.9);
        let window = Window::for_intensity(LAMBDA_B, 10.0).unwrap();
        let pattern = sample_ppp(LAMBDA_B, window, &mut stream(2, &[])).unwrap();
        let mut far = pattern.clone();
        for p in &mut far.points {
            p[0] *= 2.0;
            p[1] *= 2.0;
        }
        let a = interference_terms(&pattern, &model, 4.0, &mut stream(5, &[])).unwrap();
        let b = interference_terms(&far, &model, 4.0, &mut stream(5, &[])).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - 16.0 * y).abs() <= 1e-12 * x.abs());
        }
    }

    #[test]
    fn aggregate_matches_stable_law_small_run() {
        let model = default_model(0.9);
        let law = stable_scale(&model, 4.0).unwrap();
        let window = Window::for_intensity(LAMBDA_B, 10.0).unwrap();
        let n = 20_000;
        let draws: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = stream(77, &[i as u64]);
                let pattern = sample_ppp(LAMBDA_B, window, &mut rng).unwrap();
                mc_aggregate_interference(&pattern, &model, 4.0, &mut rng).unwrap()
            })
            .collect();
        let s = sorted(draws);
        let c = law.delta * law.delta;
        let ks = crate::stats::ks_statistic_between(&s, |x| levy_cdf(x, c), levy_quantile(0.025, c), levy_quantile(0.975, c));
        assert!(ks < ks_critical_1pct(n), "ks {ks}");
    }
}
