//! Special functions and quadrature used by the analytical formulas.

mod bessel;
mod quad;

pub use bessel::{bessel_k, bessel_k_scaled, ln_bessel_k};
pub use quad::{
    integrate, integrate_semi_infinite, kronrod_rule, QuadValue, Quadrature, QuadratureSpec,
};

use crate::error::{Error, Result};

/// Γ(x) for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("gamma", format!("argument must be positive, got {x}")));
    }
    let g = statrs::function::gamma::gamma(x);
    if !g.is_finite() {
        return Err(Error::Overflow("gamma"));
    }
    Ok(g)
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("ln_gamma", format!("argument must be positive, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}
