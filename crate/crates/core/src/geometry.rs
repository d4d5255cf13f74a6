//! Poisson point patterns, nearest-BS association and the distance laws of
//! the serving link under the Palm convention (typical MS at the origin).

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

/// Simulation disc with an outer guard annulus.
///
/// Points in the annulus `radius - guard_width < |x| <= radius` take part in
/// interference sums but are excluded from per-point statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub radius: f64,
    pub guard_width: f64,
}

impl Window {
    pub fn new(radius: f64, guard_width: f64) -> Result<Self> {
        if !(radius > guard_width && guard_width > 0.0) {
            return Err(Error::domain(
                "window",
                format!("need radius > guard > 0, got radius={radius}, guard={guard_width}"),
            ));
        }
        Ok(Self {
            radius,
            guard_width,
        })
    }

    /// Disc of `multiple / sqrt(π λ)` metres with a 20% guard annulus.
    pub fn for_intensity(intensity: f64, multiple: f64) -> Result<Self> {
        if !(intensity > 0.0) {
            return Err(Error::domain("window", "intensity must be positive"));
        }
        let radius = multiple / (PI * intensity).sqrt();
        Self::new(radius, 0.2 * radius)
    }

    pub fn interior_radius(&self) -> f64 {
        self.radius - self.guard_width
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

/// A realised homogeneous Poisson point process in a [`Window`].
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    pub points: Vec<[f64; 2]>,
    pub intensity: f64,
    pub window: Window,
}

impl PointPattern {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points outside the guard annulus.
    pub fn interior(&self) -> impl Iterator<Item = &[f64; 2]> {
        let r2 = self.window.interior_radius().powi(2);
        self.points.iter().filter(move |p| p[0] * p[0] + p[1] * p[1] <= r2)
    }

    /// Index and distance of the point closest to `at`.
    pub fn nearest_to(&self, at: [f64; 2]) -> Option<(usize, f64)> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p[0] - at[0]).hypot(p[1] - at[1])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Distances from the origin, in point order.
    pub fn distances_from_origin(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p[0].hypot(p[1]))
    }

    /// Writes `x,y` rows (metres).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "x_m,y_m")?;
        for p in &self.points {
            writeln!(f, "{},{}", p[0], p[1])?;
        }
        f.flush()?;
        Ok(())
    }
}

/// Realises a PPP of `intensity` points per m² on `window`.
pub fn sample_ppp<R: Rng + ?Sized>(
    intensity: f64,
    window: Window,
    rng: &mut R,
) -> Result<PointPattern> {
    if !(intensity > 0.0) {
        return Err(Error::domain("sample_ppp", "intensity must be positive"));
    }
    let mean = intensity * window.area();
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::domain("sample_ppp", e.to_string()))?
            .sample(rng) as usize
    } else {
        0
    };
    let points = (0..count)
        .map(|_| {
            let r = window.radius * rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            [r * theta.cos(), r * theta.sin()]
        })
        .collect();
    Ok(PointPattern {
        points,
        intensity,
        window,
    })
}

/// Density of the distance to the nearest BS: `2πλ r exp(-πλ r²)`.
pub fn nearest_distance_pdf(r: f64, bs_intensity: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    2.0 * PI * bs_intensity * r * (-PI * bs_intensity * r * r).exp()
}

pub fn nearest_distance_cdf(r: f64, bs_intensity: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    -(-PI * bs_intensity * r * r).exp_m1()
}

/// Mean distance to the nearest BS, `1 / (2 sqrt λ)`.
pub fn nearest_distance_mean(bs_intensity: f64) -> f64 {
    0.5 / bs_intensity.sqrt()
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 2.0) {
        return Err(Error::domain(
            "path loss",
            format!("sigma must exceed 2, got {sigma}"),
        ));
    }
    Ok(())
}

/// Density of `R0^σ`, the path-loss-weighted serving distance.
pub fn pathloss_distance_pdf(v: f64, bs_intensity: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if v <= 0.0 || v.is_infinite() {
        return Ok(0.0);
    }
    let a = 2.0 / sigma;
    let ln = (a - 1.0) * v.ln() + (2.0 * PI * bs_intensity / sigma).ln() - PI * bs_intensity * v.powf(a);
    Ok(ln.exp())
}

pub fn pathloss_distance_cdf(v: f64, bs_intensity: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(nearest_distance_cdf(v.max(0.0).powf(1.0 / sigma), bs_intensity))
}

/// Inverse-CDF map from a uniform variate to the nearest-BS distance.
pub fn nearest_distance_from_uniform(u: f64, bs_intensity: f64) -> f64 {
    (-(-u).ln_1p() / (PI * bs_intensity)).sqrt()
}

/// Draws the distance from the typical MS to its serving BS.
pub fn sample_nearest_distance<R: Rng + ?Sized>(bs_intensity: f64, rng: &mut R) -> f64 {
    nearest_distance_from_uniform(rng.random::<f64>(), bs_intensity)
}
