use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use std::f64::consts::PI;

/// Uniform periodic 1D grid centred on the origin.
///
/// Points sit at `x_i = (i - n/2)·dx`, so `x_min = -x_max - dx` and the
/// origin is the sample with index `n/2`. The reflection `i -> (n - i) mod n`
/// maps `x` to `-x` exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
    dx: f64,
}

impl Grid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 4 || !n_points.is_power_of_two() {
            return config(format!(
                "grid size must be a power of two >= 4, got {n_points}"
            ));
        }
        if !(length.is_finite() && length > 0.0) {
            return config(format!("grid length must be positive, got {length}"));
        }
        Ok(Self {
            n_points,
            dx: length / n_points as f64,
        })
    }

    /// Grid covering `sites` lattice periods π/k of a lattice with wavenumber `k`.
    pub fn lattice(n_points: usize, sites: usize, wavenumber: f64) -> Result<Self> {
        if sites == 0 || !n_points.is_multiple_of(sites) {
            return config(format!(
                "{n_points} points cannot be split evenly over {sites} lattice sites"
            ));
        }
        Self::new(n_points, sites as f64 * PI / wavenumber)
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.dx * self.n_points as f64
    }

    pub fn x_min(&self) -> f64 {
        self.x(0)
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.n_points - 1)
    }

    pub fn center_index(&self) -> usize {
        self.n_points / 2
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.n_points / 2) as f64) * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Momentum spacing 2π/(n·dx).
    pub fn dp(&self) -> f64 {
        2.0 * PI / self.length()
    }

    /// The conjugate grid of the discrete Fourier transform.
    pub fn reciprocal(&self) -> Self {
        Self {
            n_points: self.n_points,
            dx: self.dp(),
        }
    }

    /// Momenta in FFT storage order (0, dp, ..., -dp).
    pub fn fft_momenta(&self) -> Vec<f64> {
        let n = self.n_points;
        let dp = self.dp();
        (0..n)
            .map(|k| {
                if k < n / 2 {
                    k as f64 * dp
                } else {
                    (k as f64 - n as f64) * dp
                }
            })
            .collect()
    }

    #[inline]
    pub fn mirror_index(&self, i: usize) -> usize {
        (self.n_points - i) % self.n_points
    }

    /// Wraps a displacement into `[-L/2, L/2)`.
    #[inline]
    pub fn wrap(&self, d: f64) -> f64 {
        let l = self.length();
        d - l * ((d + 0.5 * l) / l).floor()
    }

    /// Sub-grid with the same spacing and `n_window` points, centred on the origin.
    pub fn window(&self, n_window: usize) -> Result<Self> {
        if n_window > self.n_points || n_window < 4 || !n_window.is_power_of_two() {
            return config(format!(
                "window of {n_window} points does not fit a {}-point grid",
                self.n_points
            ));
        }
        Ok(Self {
            n_points: n_window,
            dx: self.dx,
        })
    }

    /// Index offset of a centred window of `n_window` points inside this grid.
    pub fn window_offset(&self, n_window: usize) -> usize {
        self.n_points / 2 - n_window / 2
    }
}
