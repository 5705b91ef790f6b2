//! Local-time field estimation from sampled paths: piecewise-constant
//! occupation densities on a uniform spatial grid, the occupation square
//! functional α = ∫(L^x)² dx, and the L² modulus J_h = ∫(L^{x+h} − L^x)² dx.
//!
//! The estimator is deliberately primitive: each step contributes its full dt
//! to the bin of its left endpoint, values are occupation time divided by bin
//! width, and the field is zero off the grid. J_h is only defined for h an
//! exact multiple of the bin width; nothing is interpolated, so every
//! estimate is a pure function of (path, grid) with exact shift equivariance
//! under whole-bin translations.

use crate::error::{Error, Result};
use crate::simulate::SamplePath;

/// Uniform spatial grid: bins [x_min + i·eps, x_min + (i+1)·eps) for
/// i = 0..n_bins.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub eps: f64,
    pub n_bins: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, eps: f64, n_bins: usize) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite() && x_min.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid needs finite x_min and positive eps, got x_min={x_min}, eps={eps}"
            )));
        }
        if n_bins == 0 {
            return Err(Error::InvalidArgument("grid needs at least one bin".into()));
        }
        Ok(GridSpec { x_min, eps, n_bins })
    }

    /// Default policy: cover [lo, hi] padded by two bins on each side.
    pub fn cover(lo: f64, hi: f64, eps: f64) -> Result<Self> {
        if !(hi >= lo) {
            return Err(Error::InvalidArgument(format!(
                "cover needs lo ≤ hi, got [{lo}, {hi}]"
            )));
        }
        let n = ((hi - lo + 4.0 * eps) / eps).ceil() as usize;
        GridSpec::new(lo - 2.0 * eps, eps, n.max(1))
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.n_bins as f64 * self.eps
    }

    fn bin(&self, x: f64) -> Option<usize> {
        let u = (x - self.x_min) / self.eps;
        if u >= 0.0 && u < self.n_bins as f64 {
            Some(u as usize)
        } else {
            None
        }
    }
}

/// Estimated local-time field at the path horizon. `coverage` is the
/// fraction of occupation time that landed inside the grid; anything below
/// 1.0 means the grid clipped the path and downstream functionals see a
/// truncated field.
#[derive(Clone, Debug)]
pub struct LocalTimeField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub t: f64,
    pub coverage: f64,
}

/// Occupation-density estimate: values[i] = (time spent with left endpoint in
/// bin i) / eps.
pub fn estimate_local_time(path: &SamplePath, grid: GridSpec) -> LocalTimeField {
    let n_steps = path.positions.len() - 1;
    let mut values = vec![0.0; grid.n_bins];
    let mut covered = 0usize;
    for &x in &path.positions[..n_steps] {
        if let Some(i) = grid.bin(x) {
            values[i] += 1.0;
            covered += 1;
        }
    }
    let scale = path.dt / grid.eps;
    for v in &mut values {
        *v *= scale;
    }
    LocalTimeField {
        grid,
        values,
        t: n_steps as f64 * path.dt,
        coverage: covered as f64 / n_steps as f64,
    }
}

impl LocalTimeField {
    /// ∫ L dx over the grid; equals t·coverage by construction.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.eps
    }

    /// α = ∫ L² dx.
    pub fn alpha(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.eps
    }

    /// J_h = ∫ (L(x+h) − L(x))² dx with the field extended by zero off the
    /// grid. h must be an integer multiple of eps; the i + k ≥ n terms and
    /// the k entering terms are the off-grid edge squares.
    pub fn l2_modulus(&self, h: f64) -> Result<f64> {
        let ratio = h / self.grid.eps;
        let k = ratio.round();
        if !(k >= 1.0) || (ratio - k).abs() > 1e-9 * k.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "h = {h} is not a positive integer multiple of eps = {}",
                self.grid.eps
            )));
        }
        let k = k as usize;
        let n = self.values.len();
        let mut j = 0.0;
        for i in 0..n {
            let upper = if i + k < n { self.values[i + k] } else { 0.0 };
            let d = upper - self.values[i];
            j += d * d;
        }
        for i in 0..k.min(n) {
            j += self.values[i] * self.values[i];
        }
        Ok(j * self.grid.eps)
    }
}
