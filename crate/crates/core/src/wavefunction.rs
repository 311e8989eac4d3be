use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::plans;

/// Which conjugate variable the amplitudes are sampled in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Position,
    Momentum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ToMomentum,
    ToPosition,
}

/// Complex amplitudes on a uniform grid.
///
/// In momentum space the grid is the reciprocal grid with the same centred
/// layout, `p_k = (k - n/2)·dp`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    space: Space,
    amps: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::Config(format!(
                "{} amplitudes for a {}-point grid",
                amps.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            space: Space::Position,
            amps,
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            space: Space::Position,
            amps: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let amps = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self {
            grid,
            space: Space::Position,
            amps,
        }
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Σ|ψ|²·dx.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Numerical(format!(
                "cannot normalise a state with squared norm {n}"
            )));
        }
        self.scale(Complex64::new(1.0 / n.sqrt(), 0.0));
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.grid, other.grid);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    /// |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩).
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_normalized(&self, what: &str) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "{what} requires a normalised state, got squared norm {n}"
            )));
        }
        Ok(())
    }

    pub(crate) fn require_position(&self, what: &str) -> Result<()> {
        if self.space != Space::Position {
            return Err(Error::Config(format!(
                "{what} requires a position-space wavefunction"
            )));
        }
        Ok(())
    }
}

/// Unitary change of representation between position and momentum space.
///
/// φ(p) = dx/√(2π) Σ ψ(x) e^{-ipx}, with both grids centred on zero. The
/// centring phases reduce to alternating signs on a power-of-two grid.
pub fn transform(psi: &WaveFunction, direction: Direction) -> Result<WaveFunction> {
    let (from, to) = match direction {
        Direction::ToMomentum => (Space::Position, Space::Momentum),
        Direction::ToPosition => (Space::Momentum, Space::Position),
    };
    if psi.space != from {
        return Err(Error::Config(format!(
            "cannot transform {:?} to {to:?}: state is in {:?} space",
            direction, psi.space
        )));
    }
    let n = psi.grid.len();
    if !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "transform needs a power-of-two grid, got {n}"
        )));
    }
    let fft = plans(n);
    let mut data: Vec<Complex64> = psi
        .amps
        .iter()
        .enumerate()
        .map(|(j, a)| if j % 2 == 1 { -a } else { *a })
        .collect();
    match direction {
        Direction::ToMomentum => fft.forward.process(&mut data),
        Direction::ToPosition => fft.inverse.process(&mut data),
    }
    let half_sign = if (n / 2) % 2 == 1 { -1.0 } else { 1.0 };
    let scale = half_sign * psi.grid.dx() / (2.0 * std::f64::consts::PI).sqrt();
    for (k, c) in data.iter_mut().enumerate() {
        *c *= if k % 2 == 1 { -scale } else { scale };
    }
    Ok(WaveFunction {
        grid: psi.grid.reciprocal(),
        space: to,
        amps: data,
    })
}

/// Two-component state with spin ↑ and spin ↓ sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorState {
    pub up: WaveFunction,
    pub down: WaveFunction,
}

impl SpinorState {
    /// Motional state `psi` in the internal state |↓⟩.
    pub fn spin_down(psi: WaveFunction) -> Self {
        let up = WaveFunction::zeros(*psi.grid());
        Self { up, down: psi }
    }

    pub fn grid(&self) -> &Grid {
        self.up.grid()
    }

    pub fn population_up(&self) -> f64 {
        self.up.norm_sqr()
    }

    pub fn population_down(&self) -> f64 {
        self.down.norm_sqr()
    }

    pub fn total_norm(&self) -> f64 {
        self.population_up() + self.population_down()
    }
}
