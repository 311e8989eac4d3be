//! Trap models, their spectra and time-dependent spin-resolved schedules.

mod schedule;

pub use schedule::{
    level_phases, make_displacement_trajectory, make_parity_schedule, phi0_integral, DepthSchedule,
    Spin, TrapTrajectory,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::eigen::{self, Eigenstate};
use crate::error::{config, Error, Result};
use crate::grid::Grid;
use crate::units::GroundStateScales;

/// Depth below which the first-order lattice spectrum is unreliable (in E_rec).
pub const PERTURBATIVE_MIN_DEPTH_EREC: f64 = 50.0;

/// Shape of a trap; all shapes are attractive wells of depth U₀ at their centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrapShape {
    /// -U₀ + U₀(kx)², the harmonic expansion of a lattice with wavenumber k,
    /// so that ω = k√(2U₀/m) tracks the depth.
    Harmonic { wavenumber: f64 },
    /// -U₀cos²(kx) with k = 2π/λ.
    Lattice { wavenumber: f64 },
    /// -U₀exp(-2x²/w²).
    Tweezer { waist: f64 },
}

impl TrapShape {
    /// Harmonic trap whose frequency equals `omega` at depth `depth`.
    pub fn harmonic_with_frequency(omega: f64, depth: f64) -> Result<Self> {
        if !(omega > 0.0 && depth > 0.0) {
            return config("harmonic trap needs positive frequency and depth");
        }
        Ok(TrapShape::Harmonic {
            wavenumber: omega / (2.0 * depth).sqrt(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            TrapShape::Harmonic { wavenumber } => ("harmonic wavenumber", wavenumber),
            TrapShape::Lattice { wavenumber } => ("lattice wavenumber", wavenumber),
            TrapShape::Tweezer { waist } => ("tweezer waist", waist),
        };
        if !(v.is_finite() && v > 0.0) {
            return config(format!("{name} must be positive, got {v}"));
        }
        Ok(())
    }

    /// Small-oscillation frequency at depth U₀ (m = ħ = 1).
    pub fn omega(&self, depth: f64) -> f64 {
        match *self {
            TrapShape::Harmonic { wavenumber } | TrapShape::Lattice { wavenumber } => {
                wavenumber * (2.0 * depth).sqrt()
            }
            TrapShape::Tweezer { waist } => 2.0 * depth.sqrt() / waist,
        }
    }

    /// Potential at signed distance `d` from the trap centre. For the lattice
    /// `d` may be anything; other shapes expect a minimum-image distance.
    #[inline]
    pub fn value(&self, depth: f64, d: f64) -> f64 {
        match *self {
            TrapShape::Harmonic { wavenumber } => {
                let kd = wavenumber * d;
                depth * (kd * kd - 1.0)
            }
            TrapShape::Lattice { wavenumber } => {
                let c = (wavenumber * d).cos();
                -depth * c * c
            }
            TrapShape::Tweezer { waist } => -depth * (-2.0 * d * d / (waist * waist)).exp(),
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, TrapShape::Lattice { .. })
    }

    /// Number of lattice sites spanned by `grid` (lattice only).
    pub fn sites_on(&self, grid: &Grid) -> Result<usize> {
        let TrapShape::Lattice { wavenumber } = *self else {
            return config("only lattice traps have sites");
        };
        let sites = grid.length() * wavenumber / PI;
        let rounded = sites.round();
        if rounded < 1.0 || (sites - rounded).abs() > 1e-9 {
            return config(format!(
                "grid length spans {sites:.6} lattice sites; it must be a whole number"
            ));
        }
        Ok(rounded as usize)
    }

    /// Samples of the trap centred at `center` on `grid`. Non-periodic shapes
    /// use the minimum-image distance on the periodic grid.
    pub fn sample(&self, depth: f64, grid: &Grid, center: f64) -> Vec<f64> {
        (0..grid.len())
            .map(|i| {
                let d = grid.x(i) - center;
                let d = if self.is_periodic() { d } else { grid.wrap(d) };
                self.value(depth, d)
            })
            .collect()
    }

    /// Window used for diagonalisation: one site for a lattice, half the
    /// simulation grid otherwise.
    pub fn eigen_window(&self, grid: &Grid) -> Result<Grid> {
        match self {
            TrapShape::Lattice { .. } => {
                let sites = self.sites_on(grid)?;
                if !grid.len().is_multiple_of(sites) {
                    return config("grid points cannot be split evenly over lattice sites");
                }
                grid.window(grid.len() / sites)
            }
            _ => grid.window(grid.len() / 2),
        }
    }

    /// Half-width of the region counted as "inside the trap" for leakage.
    pub fn cell_half_width(&self, grid: &Grid) -> Result<f64> {
        Ok(0.5 * self.eigen_window(grid)?.length())
    }

    /// Lowest `count` energy levels at depth U₀. Exact for the harmonic
    /// shape; obtained by diagonalisation on the eigen window otherwise.
    pub fn levels(&self, depth: f64, grid: &Grid, count: usize) -> Result<Vec<f64>> {
        match *self {
            TrapShape::Harmonic { .. } => {
                let w = self.omega(depth);
                Ok((0..count).map(|n| harmonic_spectrum(n, w, depth)).collect())
            }
            _ => {
                let win = self.eigen_window(grid)?;
                eigen::eigenvalues(&win, &self.sample(depth, &win, 0.0), count)
            }
        }
    }
}

/// A trap shape at a fixed depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    pub shape: TrapShape,
    pub depth: f64,
}

impl PotentialModel {
    pub fn new(shape: TrapShape, depth: f64) -> Result<Self> {
        shape.validate()?;
        if !(depth.is_finite() && depth > 0.0) {
            return config(format!("trap depth must be positive, got {depth}"));
        }
        Ok(Self { shape, depth })
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.shape.value(self.depth, x)
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        self.shape.sample(self.depth, grid, 0.0)
    }

    pub fn omega(&self) -> f64 {
        self.shape.omega(self.depth)
    }

    pub fn scales(&self) -> Result<GroundStateScales> {
        GroundStateScales::from_omega(self.omega())
    }

    /// Stationary states of one trap cell embedded into `grid`.
    pub fn stationary_states(&self, grid: &Grid, count: usize) -> Result<Vec<Eigenstate>> {
        let win = self.shape.eigen_window(grid)?;
        let states =
            eigen::stationary_states(&win, &self.shape.sample(self.depth, &win, 0.0), count)?;
        states
            .into_iter()
            .map(|s| {
                Ok(Eigenstate {
                    energy: s.energy,
                    state: eigen::embed(&s.state, grid)?,
                })
            })
            .collect()
    }
}

/// E⁽ᴴᴼ⁾(n) = ħω(n + 1/2) - U₀.
pub fn harmonic_spectrum(n: usize, omega: f64, depth: f64) -> f64 {
    omega * (n as f64 + 0.5) - depth
}

/// [2n(n+1)+1], the level dependence shared by both first-order corrections.
fn quartic_factor(n: usize) -> f64 {
    let n = n as f64;
    2.0 * n * (n + 1.0) + 1.0
}

/// First-order lattice spectrum E⁽ᴴᴼ⁾(n) - [2n(n+1)+1]/4·E_rec with
/// ω = k√(2U₀/m) and E_rec = k²/2 in internal units.
pub fn lattice_spectrum_perturbative(n: usize, depth: f64, wavenumber: f64) -> f64 {
    let omega = wavenumber * (2.0 * depth).sqrt();
    let recoil = 0.5 * wavenumber * wavenumber;
    harmonic_spectrum(n, omega, depth) - quartic_factor(n) / 4.0 * recoil
}

/// Whether the first-order lattice spectrum is expected to hold.
pub fn lattice_perturbative_regime(depth: f64, wavenumber: f64) -> bool {
    depth / (0.5 * wavenumber * wavenumber) >= PERTURBATIVE_MIN_DEPTH_EREC
}

/// First-order tweezer spectrum E⁽ᴴᴼ⁾(n) - 3[2n(n+1)+1]ħ²/(8mw²), ω = 2√(U₀/m)/w.
pub fn tweezer_spectrum_perturbative(n: usize, depth: f64, waist: f64) -> f64 {
    let omega = 2.0 * depth.sqrt() / waist;
    harmonic_spectrum(n, omega, depth) - tweezer_correction(n, waist)
}

fn tweezer_correction(n: usize, waist: f64) -> f64 {
    3.0 * quartic_factor(n) / (8.0 * waist * waist)
}

/// Differential energy E↑(n) - E↓(n) and its harmonic companion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DifferentialShift {
    pub n: usize,
    /// From the exact (diagonalised) spectra.
    pub exact: f64,
    /// ħΔω·n + ΔE₀ with ΔE₀ = -U↑ + U↓ + ħΔω/2.
    pub harmonic: f64,
    /// ħω of the deeper state, used to express deviations.
    pub omega: f64,
}

impl DifferentialShift {
    pub fn relative_deviation(&self) -> f64 {
        (self.exact - self.harmonic) / self.omega
    }
}

/// ΔE(n) for n = 0..count at depths U↑, U↓.
pub fn differential_shift(
    shape: &TrapShape,
    depth_up: f64,
    depth_down: f64,
    grid: &Grid,
    count: usize,
) -> Result<Vec<DifferentialShift>> {
    PotentialModel::new(*shape, depth_up)?;
    PotentialModel::new(*shape, depth_down)?;
    let up = shape.levels(depth_up, grid, count)?;
    let down = if depth_up == depth_down {
        up.clone()
    } else {
        shape.levels(depth_down, grid, count)?
    };
    if up.len() < count || down.len() < count {
        return Err(Error::Numerical("fewer levels than requested".into()));
    }
    let (wu, wd) = (shape.omega(depth_up), shape.omega(depth_down));
    let dw = wu - wd;
    let de0 = -depth_up + depth_down + 0.5 * dw;
    Ok((0..count)
        .map(|n| DifferentialShift {
            n,
            exact: up[n] - down[n],
            harmonic: dw * n as f64 + de0,
            omega: wu.max(wd),
        })
        .collect())
}
