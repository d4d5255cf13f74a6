//! Numerical inversion of Laplace and Fourier transforms.
//!
//! One-sided laws here have explicit Laplace transforms with a branch cut on
//! the negative real axis, which is the setting the fixed Talbot contour is
//! built for. The real-line Fourier integral is kept as an independent
//! route for cross-checks in the bulk of a distribution.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{integrate, QuadratureSpec};

/// Fixed Talbot contour with `terms` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Talbot {
    pub terms: usize,
}

impl Default for Talbot {
    fn default() -> Self {
        Self { terms: 24 }
    }
}

/// One contour node: `f(t) ≈ Σ Re(weight · F(s))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TalbotNode {
    pub s: Complex64,
    pub weight: Complex64,
}

impl Talbot {
    pub fn new(terms: usize) -> Result<Self> {
        if !(4..=60).contains(&terms) {
            return Err(Error::config("talbot_terms", format!("must lie in [4, 60], got {terms}")));
        }
        Ok(Self { terms })
    }

    /// Contour nodes for inverting at `t > 0`.
    pub fn nodes(&self, t: f64) -> Vec<TalbotNode> {
        let m = self.terms as f64;
        let r = 2.0 * m / (5.0 * t);
        let mut out = Vec::with_capacity(self.terms);
        out.push(TalbotNode {
            s: Complex64::new(r, 0.0),
            weight: Complex64::new(0.5 * r / m * (r * t).exp(), 0.0),
        });
        for k in 1..self.terms {
            let theta = k as f64 * PI / m;
            let cot = theta.cos() / theta.sin();
            let s = Complex64::new(r * theta * cot, r * theta);
            let sigma = theta + (theta * cot - 1.0) * cot;
            let weight = (s * t).exp() * Complex64::new(1.0, sigma) * (r / m);
            out.push(TalbotNode { s, weight });
        }
        out
    }

    /// Inverts `F` at `t`.
    pub fn invert<F: Fn(Complex64) -> Complex64>(&self, f: F, t: f64) -> f64 {
        self.nodes(t).iter().map(|n| (n.weight * f(n.s)).re).sum()
    }

    /// Inverts from transform values already evaluated at `self.nodes(t)`.
    pub fn combine(&self, nodes: &[TalbotNode], values: &[Complex64]) -> f64 {
        nodes.iter().zip(values).map(|(n, v)| (n.weight * v).re).sum()
    }
}

/// Density from a characteristic function by the real-line inversion
/// `f(x) = (1/π) ∫₀^W Re[Φ(ω) e^{-jωx}] dω`, integrated one oscillation
/// period at a time. `upper` is the cutoff `W`, beyond which `|Φ|` must be
/// negligible.
pub fn fourier_density<F>(cf: F, x: f64, upper: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> Complex64,
{
    if !(upper > 0.0) {
        return Err(Error::domain("fourier_density", "cutoff must be positive"));
    }
    let integrand = |w: f64| (cf(w) * Complex64::from_polar(1.0, -w * x)).re;
    let period = if x.abs() > 0.0 {
        (2.0 * PI / x.abs()).min(upper)
    } else {
        upper
    };
    let panels = (upper / period).ceil() as usize;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut converged = true;
    for i in 0..panels {
        let a = i as f64 * period;
        let b = ((i + 1) as f64 * period).min(upper);
        let q = integrate(integrand, a, b, spec);
        total += q.value;
        err += q.abs_error;
        converged &= q.converged;
    }
    if !converged {
        return Err(Error::Convergence {
            what: "fourier_density",
            estimate: total / PI,
            achieved: err / PI,
            requested: spec.rel_tol,
        });
    }
    Ok(total / PI)
}
