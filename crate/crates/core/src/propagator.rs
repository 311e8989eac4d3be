//! Strang split-step propagation under time-dependent potentials.
//!
//! One step of length h is
//! `e^{-iV(t+h/2)h/2} · F⁻¹ e^{-ip²h/2} F · e^{-iV(t+h/2)h/2}`; adjacent
//! potential half-steps are fused into a single pointwise phase.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potentials::{DepthSchedule, Spin, TrapShape, TrapTrajectory};
use crate::spectral::{plans, FftPair};
use crate::wavefunction::{SpinorState, WaveFunction};

pub use crate::operators::to_comoving;

/// Default number of steps per trap period.
pub const STEPS_PER_PERIOD: f64 = 500.0;

const NORM_CHECK_INTERVAL: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionSpec {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Step boundaries fall on `anchor + k·dt`; partial steps fill the ends.
    pub anchor: f64,
}

impl EvolutionSpec {
    pub fn new(dt: f64, t_start: f64, t_end: f64) -> Result<Self> {
        Self::anchored(dt, t_start, t_end, t_start)
    }

    /// Like [`EvolutionSpec::new`] but on a step grid shared with other
    /// intervals, so that splitting an evolution at arbitrary instants only
    /// splits individual steps.
    pub fn anchored(dt: f64, t_start: f64, t_end: f64, anchor: f64) -> Result<Self> {
        let s = Self {
            dt,
            t_start,
            t_end,
            anchor,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= self.t_start
            && self.t_start.is_finite()
            && self.t_end.is_finite()
            && self.anchor.is_finite())
        {
            return Err(Error::Config(format!(
                "invalid time interval [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }

    /// (start, length) of each step: whole steps of length `dt` on the
    /// anchored grid, with partial steps at either end where needed.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let eps = 1e-9 * self.dt;
        let grid_time = |k: f64| self.anchor + k * self.dt;
        // first grid point not before t_start (within rounding)
        let mut k = ((self.t_start - self.anchor) / self.dt).ceil();
        if grid_time(k - 1.0) > self.t_start - eps {
            k -= 1.0;
        }
        let mut out = Vec::new();
        let mut t = self.t_start;
        let first = grid_time(k);
        if first - t > eps && first < self.t_end - eps {
            out.push((t, first - t));
            t = first;
        } else if first - t > eps {
            if self.t_end - t > eps {
                out.push((t, self.t_end - t));
            }
            return out;
        }
        let full = ((self.t_end - t) / self.dt * (1.0 + 1e-12)).floor() as usize;
        out.extend((0..full).map(|j| (t + j as f64 * self.dt, self.dt)));
        let t_full = t + full as f64 * self.dt;
        if self.t_end - t_full > eps {
            out.push((t_full, self.t_end - t_full));
        }
        out
    }
}

/// A time-dependent potential sampled on the grid.
pub trait Potential: Sync {
    fn fill(&self, t: f64, out: &mut [f64]);
}

impl<F> Potential for F
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    fn fill(&self, t: f64, out: &mut [f64]) {
        self(t, out)
    }
}

/// A potential resolved by internal state.
pub trait SpinPotential: Sync {
    fn fill(&self, spin: Spin, t: f64, out: &mut [f64]);
}

/// Restriction of a [`SpinPotential`] to one spin.
pub struct ForSpin<'a, P: ?Sized>(pub &'a P, pub Spin);

impl<P: SpinPotential + ?Sized> Potential for ForSpin<'_, P> {
    fn fill(&self, t: f64, out: &mut [f64]) {
        self.0.fill(self.1, t, out)
    }
}

/// A trap of fixed shape whose depth follows a [`DepthSchedule`] and whose
/// centre follows a [`TrapTrajectory`].
#[derive(Clone, Debug)]
pub struct ScheduledTrap {
    pub shape: TrapShape,
    pub schedule: DepthSchedule,
    pub trajectory: TrapTrajectory,
    grid: Grid,
    // cos(2kx), sin(2kx) for the lattice fast path
    harmonics: Option<(Vec<f64>, Vec<f64>)>,
}

impl ScheduledTrap {
    pub fn new(
        grid: Grid,
        shape: TrapShape,
        schedule: DepthSchedule,
        trajectory: TrapTrajectory,
    ) -> Result<Self> {
        shape.validate()?;
        schedule.validate()?;
        let harmonics = match shape {
            TrapShape::Lattice { wavenumber } => {
                shape.sites_on(&grid)?;
                let (c, s) = (0..grid.len())
                    .map(|i| {
                        let a = 2.0 * wavenumber * grid.x(i);
                        (a.cos(), a.sin())
                    })
                    .unzip();
                Some((c, s))
            }
            _ => None,
        };
        Ok(Self {
            shape,
            schedule,
            trajectory,
            grid,
            harmonics,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

impl SpinPotential for ScheduledTrap {
    fn fill(&self, spin: Spin, t: f64, out: &mut [f64]) {
        let depth = self.schedule.depth(spin, t);
        let center = self.trajectory.position(t);
        match (&self.harmonics, self.shape) {
            (Some((c, s)), TrapShape::Lattice { wavenumber }) => {
                // -U cos²(k(x-c)) = -U/2 (1 + cos 2k(x-c))
                let (sc, cc) = (2.0 * wavenumber * center).sin_cos();
                let h = -0.5 * depth;
                for ((o, cj), sj) in out.iter_mut().zip(c).zip(s) {
                    *o = h * (1.0 + cj * cc + sj * sc);
                }
            }
            _ => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = self
                        .shape
                        .value(depth, self.grid.wrap(self.grid.x(i) - center));
                }
            }
        }
    }
}

/// Reusable split-step workspace for one grid.
pub struct Propagator {
    grid: Grid,
    fft: FftPair,
    momenta_sq: Vec<f64>,
    kinetic: Vec<Complex64>,
    kinetic_dt: f64,
    scratch: Vec<Complex64>,
    v_now: Vec<f64>,
    v_next: Vec<f64>,
}

impl Propagator {
    pub fn new(grid: Grid) -> Self {
        let fft = plans(grid.len());
        let scratch = vec![Complex64::new(0.0, 0.0); fft.scratch_len()];
        let momenta_sq = grid.fft_momenta().iter().map(|p| 0.5 * p * p).collect();
        Self {
            grid,
            fft,
            momenta_sq,
            kinetic: vec![Complex64::new(0.0, 0.0); grid.len()],
            kinetic_dt: f64::NAN,
            scratch,
            v_now: vec![0.0; grid.len()],
            v_next: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn kinetic_phase(&mut self, h: f64) {
        if self.kinetic_dt == h {
            return;
        }
        let scale = 1.0 / self.grid.len() as f64;
        for (k, t) in self.kinetic.iter_mut().zip(&self.momenta_sq) {
            *k = Complex64::from_polar(scale, -t * h);
        }
        self.kinetic_dt = h;
    }

    /// Evolves `amps` in place from `spec.t_start` to `spec.t_end`.
    pub fn evolve_in_place(
        &mut self,
        amps: &mut [Complex64],
        spec: &EvolutionSpec,
        potential: &(impl Potential + ?Sized),
    ) -> Result<()> {
        spec.validate()?;
        if amps.len() != self.grid.len() {
            return Err(Error::Config("state does not match propagator grid".into()));
        }
        let steps = spec.steps();
        if steps.is_empty() {
            return Ok(());
        }
        let (t0, h0) = steps[0];
        potential.fill(t0 + 0.5 * h0, &mut self.v_now);
        apply_potential(amps, &self.v_now, 0.5 * h0, None);

        for (k, &(t, h)) in steps.iter().enumerate() {
            self.kinetic_phase(h);
            self.fft
                .forward
                .process_with_scratch(amps, &mut self.scratch);
            for (a, kin) in amps.iter_mut().zip(&self.kinetic) {
                *a *= kin;
            }
            self.fft
                .inverse
                .process_with_scratch(amps, &mut self.scratch);

            if let Some(&(tn, hn)) = steps.get(k + 1) {
                potential.fill(tn + 0.5 * hn, &mut self.v_next);
                apply_potential(amps, &self.v_now, 0.5 * h, Some((&self.v_next, 0.5 * hn)));
                std::mem::swap(&mut self.v_now, &mut self.v_next);
            } else {
                apply_potential(amps, &self.v_now, 0.5 * h, None);
            }

            if (k + 1) % NORM_CHECK_INTERVAL == 0 || k + 1 == steps.len() {
                let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                if !n.is_finite() {
                    return Err(Error::Numerical(format!(
                        "non-finite amplitudes after step {} (t = {})",
                        k + 1,
                        t + h
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn evolve(
        &mut self,
        psi: &WaveFunction,
        spec: &EvolutionSpec,
        potential: &(impl Potential + ?Sized),
    ) -> Result<WaveFunction> {
        psi.require_position("evolve")?;
        let mut amps = psi.amplitudes().to_vec();
        self.evolve_in_place(&mut amps, spec, potential)?;
        WaveFunction::new(*psi.grid(), amps)
    }

    /// Evolves both components, each under its own spin's potential.
    pub fn evolve_spinor(
        &mut self,
        state: &SpinorState,
        spec: &EvolutionSpec,
        potential: &(impl SpinPotential + ?Sized),
    ) -> Result<SpinorState> {
        let mut out = state.clone();
        self.evolve_spinor_in_place(&mut out, spec, potential)?;
        Ok(out)
    }

    pub fn evolve_spinor_in_place(
        &mut self,
        state: &mut SpinorState,
        spec: &EvolutionSpec,
        potential: &(impl SpinPotential + ?Sized),
    ) -> Result<()> {
        for (spin, comp) in [(Spin::Up, &mut state.up), (Spin::Down, &mut state.down)] {
            if comp
                .amplitudes()
                .iter()
                .all(|a| *a == Complex64::new(0.0, 0.0))
            {
                continue;
            }
            self.evolve_in_place(comp.amplitudes_mut(), spec, &ForSpin(potential, spin))?;
        }
        Ok(())
    }
}

#[inline]
fn apply_potential(amps: &mut [Complex64], v: &[f64], h: f64, next: Option<(&[f64], f64)>) {
    match next {
        Some((vn, hn)) => {
            for ((a, v), vn) in amps.iter_mut().zip(v).zip(vn) {
                *a *= Complex64::from_polar(1.0, -(v * h + vn * hn));
            }
        }
        None => {
            for (a, v) in amps.iter_mut().zip(v) {
                *a *= Complex64::from_polar(1.0, -v * h);
            }
        }
    }
}

/// Convenience wrapper around a one-off [`Propagator`].
pub fn evolve(
    psi: &WaveFunction,
    spec: &EvolutionSpec,
    potential: &(impl Potential + ?Sized),
) -> Result<WaveFunction> {
    Propagator::new(*psi.grid()).evolve(psi, spec, potential)
}

pub fn evolve_spinor(
    state: &SpinorState,
    spec: &EvolutionSpec,
    potential: &(impl SpinPotential + ?Sized),
) -> Result<SpinorState> {
    Propagator::new(*state.grid()).evolve_spinor(state, spec, potential)
}

/// Probability outside `[center - half_width, center + half_width)` on the periodic grid.
pub fn leakage(psi: &WaveFunction, center: f64, half_width: f64) -> f64 {
    let g = psi.grid();
    let outside: f64 = psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let d = g.wrap(g.x(*i) - center);
            d < -half_width || d >= half_width
        })
        .map(|(_, a)| a.norm_sqr())
        .sum();
    outside * g.dx() / psi.norm_sqr()
}
