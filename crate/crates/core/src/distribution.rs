//! Numeric distributions tabulated on a grid.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// A distribution on `[0, ∞)` tabulated on an increasing grid, with an
/// optional point mass at zero. `cdf` includes the atom.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDistribution {
    pub grid: Vec<f64>,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
    pub atom_at_zero: f64,
}

impl TabulatedDistribution {
    pub fn new(grid: Vec<f64>, pdf: Vec<f64>, cdf: Vec<f64>, atom_at_zero: f64) -> Result<Self> {
        if grid.is_empty() || grid.len() != pdf.len() || grid.len() != cdf.len() {
            return Err(Error::domain("tabulated distribution", "grid, pdf and cdf lengths differ"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("tabulated distribution", "grid must be strictly increasing"));
        }
        if !(0.0..=1.0).contains(&atom_at_zero) {
            return Err(Error::domain("tabulated distribution", "atom must be a probability"));
        }
        Ok(Self {
            grid,
            pdf,
            cdf,
            atom_at_zero,
        })
    }

    /// Empirical distribution of `samples` evaluated on `grid`. The pdf is a
    /// histogram between neighbouring grid points, reported at cell centres
    /// mapped back onto the grid (left-continuous), and exact zeros form the
    /// atom.
    pub fn from_samples(samples: &[f64], grid: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("empirical distribution", "no samples"));
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        let zeros = s.partition_point(|&x| x <= 0.0);
        let cdf: Vec<f64> = grid
            .iter()
            .map(|&g| s.partition_point(|&x| x <= g) as f64 / n)
            .collect();
        let mut pdf = vec![0.0; grid.len()];
        for i in 1..grid.len() {
            pdf[i] = (cdf[i] - cdf[i - 1]) / (grid[i] - grid[i - 1]);
        }
        if grid.len() > 1 {
            pdf[0] = pdf[1];
        }
        Self::new(grid, pdf, cdf, zeros as f64 / n)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// CDF at `x` by linear interpolation, clamped to the tabulated range.
    pub fn cdf_at(&self, x: f64) -> f64 {
        interpolate(&self.grid, &self.cdf, x)
    }

    pub fn pdf_at(&self, x: f64) -> f64 {
        interpolate(&self.grid, &self.pdf, x)
    }

    /// Smallest grid-interpolated `x` with `cdf(x) >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < p);
        if k == 0 {
            return self.grid[0];
        }
        if k >= self.grid.len() {
            return *self.grid.last().unwrap();
        }
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let (x0, x1) = (self.grid[k - 1], self.grid[k]);
        if c1 <= c0 {
            x1
        } else {
            x0 + (x1 - x0) * (p - c0) / (c1 - c0)
        }
    }

    /// Largest CDF discrepancy over the grid points of both tables.
    pub fn sup_distance(&self, other: &TabulatedDistribution) -> f64 {
        self.grid
            .iter()
            .chain(other.grid.iter())
            .map(|&x| (self.cdf_at(x) - other.cdf_at(x)).abs())
            .fold(0.0, f64::max)
    }

    /// Trapezoid mass of the continuous part plus the atom.
    pub fn total_mass(&self) -> f64 {
        let cont: f64 = self
            .grid
            .windows(2)
            .zip(self.pdf.windows(2))
            .map(|(g, p)| 0.5 * (g[1] - g[0]) * (p[0] + p[1]))
            .sum();
        cont + self.atom_at_zero
    }

    /// Two-column CSV `value,density`.
    pub fn write_density_csv(&self, path: &Path) -> Result<()> {
        self.write_columns(path, "density", &self.pdf)
    }

    /// Two-column CSV `value,cdf`.
    pub fn write_cdf_csv(&self, path: &Path) -> Result<()> {
        self.write_columns(path, "cdf", &self.cdf)
    }

    fn write_columns(&self, path: &Path, name: &str, col: &[f64]) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "value,{name}")?;
        for (x, y) in self.grid.iter().zip(col) {
            writeln!(w, "{x:e},{y:e}")?;
        }
        w.flush()?;
        Ok(())
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let k = xs.partition_point(|&g| g < x);
    if k >= xs.len() {
        return *ys.last().unwrap();
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    ys[k - 1] + (ys[k] - ys[k - 1]) * (x - x0) / (x1 - x0)
}

/// `n` points spaced evenly in log between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_tables() {
        assert!(TabulatedDistribution::new(vec![1.0, 1.0], vec![0.0; 2], vec![0.0; 2], 0.0).is_err());
        assert!(TabulatedDistribution::new(vec![1.0], vec![0.0; 2], vec![0.0], 0.0).is_err());
        assert!(TabulatedDistribution::new(vec![1.0], vec![0.0], vec![0.0], 1.5).is_err());
    }

    #[test]
    fn empirical_table_of_uniform_samples() {
        let samples: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let grid: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let t = TabulatedDistribution::from_samples(&samples, grid).unwrap();
        for (x, c) in t.grid.iter().zip(&t.cdf) {
            assert!((c - x).abs() < 1e-9);
        }
        assert!((t.pdf[5] - 1.0).abs() < 1e-9);
        assert!((t.quantile(0.25) - 0.25).abs() < 1e-9);
        assert_eq!(t.atom_at_zero, 0.0);
    }

    #[test]
    fn zeros_form_the_atom() {
        let t = TabulatedDistribution::from_samples(&[0.0, 0.0, 1.0, 2.0], vec![0.5, 1.5, 2.5]).unwrap();
        assert_eq!(t.atom_at_zero, 0.5);
        assert_eq!(t.cdf, vec![0.5, 0.75, 1.0]);
    }

    #[test]
    fn sup_distance_and_csv() {
        let a = TabulatedDistribution::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![0.0, 1.0], 0.0).unwrap();
        let b = TabulatedDistribution::new(vec![0.0, 0.5, 1.0], vec![1.0; 3], vec![0.0, 0.7, 1.0], 0.0).unwrap();
        assert!((a.sup_distance(&b) - 0.2).abs() < 1e-12);
        assert!((a.total_mass() - 1.0).abs() < 1e-12);
        let dir = std::env::temp_dir().join(format!("tab-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("cdf.csv");
        b.write_cdf_csv(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("value,cdf\n"));
        assert_eq!(text.lines().count(), 4);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 7);
        assert!((g[0] - 1e-3).abs() < 1e-15);
        assert!((g[6] / 1e3 - 1.0).abs() < 1e-12);
        assert!((g[3] - 1.0).abs() < 1e-12);
    }
}
