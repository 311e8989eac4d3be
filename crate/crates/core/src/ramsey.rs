//! The Ramsey sequence: π/2 pulses around a spin-dependent, displaced trap
//! evolution, read out as the signed fringe contrast w = P↓ - P↑.
//!
//! With the second pulse phase set to φ₁ - Φ₀ + π the contrast of a
//! parity-symmetric state equals its parity, so a single population
//! measurement gives C(x, p) = πħ·W(x, p).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operators::{parity_overlap, shift_and_kick};
use crate::parallel::map_indexed;
use crate::potentials::{
    make_displacement_trajectory, make_parity_schedule, DepthSchedule, PotentialModel, Spin,
    TrapShape, TrapTrajectory,
};
use crate::propagator::{leakage, EvolutionSpec, ForSpin, Propagator, ScheduledTrap};
use crate::units::{GroundStateScales, UnitSystem};
use crate::wavefunction::{SpinorState, WaveFunction};

/// Largest |C| accepted before a measurement is flagged as unphysical.
pub const CONTRAST_BOUND_TOLERANCE: f64 = 1e-6;

/// Instantaneous spin rotation by `theta` about an equatorial axis at phase `phi`:
///
/// ψ↑ → cos(θ/2)ψ↑ - i e^{iφ} sin(θ/2)ψ↓,
/// ψ↓ → -i e^{-iφ} sin(θ/2)ψ↑ + cos(θ/2)ψ↓.
pub fn pulse(state: &SpinorState, theta: f64, phi: f64) -> SpinorState {
    let mut out = state.clone();
    pulse_in_place(&mut out, theta, phi);
    out
}

pub fn pulse_in_place(state: &mut SpinorState, theta: f64, phi: f64) {
    let (s, c) = (0.5 * theta).sin_cos();
    let i = Complex64::i();
    let to_up = -i * Complex64::from_polar(s, phi);
    let to_down = -i * Complex64::from_polar(s, -phi);
    let SpinorState { up, down } = state;
    for (u, d) in up
        .amplitudes_mut()
        .iter_mut()
        .zip(down.amplitudes_mut().iter_mut())
    {
        let (a, b) = (*u, *d);
        *u = a * c + to_up * b;
        *d = to_down * a + b * c;
    }
}

/// A phase-space point in internal units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

/// Complete description of one Ramsey sequence.
///
/// Times are absolute: the state is prepared at t = 0, the first π/2 pulse
/// fires at `first_pulse`, the trap starts its displacement at
/// `displacement_time`, the depth schedule runs from `schedule.start` to
/// `schedule.end()`, and the second pulse fires at `second_pulse`, where the
/// populations are read out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub grid: Grid,
    pub shape: TrapShape,
    pub schedule: DepthSchedule,
    pub first_pulse: f64,
    pub displacement_time: f64,
    pub switch_duration: f64,
    pub second_pulse: f64,
    pub target: PhasePoint,
    pub phase_first: f64,
    /// Extra phase added to the compensated second pulse (fringe scans).
    pub phase_offset: f64,
    /// Φ₀ cancelled by the second pulse; `None` disables compensation.
    pub phi0: Option<f64>,
    pub dt: f64,
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        self.schedule.validate()?;
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.dt > 0.0) {
            return bad(format!("time step must be positive, got {}", self.dt));
        }
        if !(self.switch_duration > 0.0) {
            return bad("switch duration must be positive".into());
        }
        if self.first_pulse < 0.0 || self.displacement_time < 0.0 {
            return bad("pulse and displacement times must not precede preparation".into());
        }
        let switch_end = self.displacement_time + self.switch_duration;
        if self.schedule.start < switch_end {
            return bad(format!(
                "depth modulation starts at {} before the displacement ends at {switch_end}",
                self.schedule.start
            ));
        }
        if self.first_pulse > self.schedule.start {
            return bad("first pulse must precede the depth imbalance".into());
        }
        if self.first_pulse > self.displacement_time && self.first_pulse < switch_end {
            return bad("first pulse must not fall inside the displacement switch".into());
        }
        if self.schedule.end() > self.second_pulse {
            return bad(format!(
                "depth modulation ends at {} after the second pulse at {}",
                self.schedule.end(),
                self.second_pulse
            ));
        }
        Ok(())
    }

    /// Ground-state scales at the initial (base) depth.
    pub fn scales(&self) -> Result<GroundStateScales> {
        GroundStateScales::from_omega(self.shape.omega(self.schedule.base))
    }

    pub fn trajectory(&self) -> Result<TrapTrajectory> {
        make_displacement_trajectory(
            self.target.x,
            self.target.p,
            self.displacement_time,
            self.switch_duration,
        )
    }

    /// Copy probing `(x, p)` given in units of (Δx₀, Δp₀).
    pub fn at_scaled(&self, x_over_dx0: f64, p_over_dp0: f64) -> Result<Self> {
        let s = self.scales()?;
        Ok(self.at(PhasePoint {
            x: x_over_dx0 * s.dx0,
            p: p_over_dp0 * s.dp0,
        }))
    }

    pub fn at(&self, target: PhasePoint) -> Self {
        Self {
            target,
            ..self.clone()
        }
    }

    pub fn with_hold(&self, hold: f64) -> Self {
        let schedule = self.schedule.with_hold(hold);
        let second_pulse = self.second_pulse + (hold - self.schedule.hold);
        Self {
            schedule,
            second_pulse,
            ..self.clone()
        }
    }

    /// φ₂ = φ₁ - Φ₀ + π + offset.
    pub fn phase_second(&self) -> f64 {
        self.phase_first - self.phi0.unwrap_or(0.0) + PI + self.phase_offset
    }

    /// Stable fingerprint of everything except the probed point.
    pub fn schedule_hash(&self) -> String {
        let s = &self.schedule;
        let mut h = Fnv::default();
        for v in [
            s.start,
            s.base,
            s.peak_up,
            s.peak_down,
            s.ramp,
            s.hold,
            self.first_pulse,
            self.displacement_time,
            self.switch_duration,
            self.second_pulse,
            self.phase_first,
            self.phase_offset,
            self.phi0.unwrap_or(f64::NAN),
            self.dt,
            self.grid.dx(),
            self.grid.len() as f64,
        ] {
            h.write(&v.to_bits().to_le_bytes());
        }
        h.write(format!("{:?}", self.shape).as_bytes());
        format!("{:016x}", h.0)
    }
}

#[derive(Clone, Copy)]
struct Fnv(u64);

impl Default for Fnv {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv {
    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= *b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Probability outside the trap cell around the trap centre at τ₂.
    pub leakage: f64,
    pub population_up: f64,
    pub population_down: f64,
    /// |P↑ + P↓ - 1| before readout.
    pub norm_drift: f64,
    /// 2|⟨ψ↓|ψ↑⟩| before the second pulse, the fringe visibility.
    pub visibility: f64,
    /// |⟨Πψ↓|ψ↑⟩|² / (P↑P↓) about the trap centre, 1 for an ideal parity map.
    pub mirror_fidelity: f64,
    pub phase_second: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceOutcome {
    /// Signed contrast w = P↓ - P↑ after the second pulse.
    pub w: f64,
    pub diagnostics: Diagnostics,
}

/// Evolves `psi` (prepared in |↓⟩) up to the instant of the second pulse.
pub fn state_before_readout(psi: &WaveFunction, spec: &SequenceSpec) -> Result<SpinorState> {
    if psi.grid() != &spec.grid {
        return Err(Error::Config(
            "input state does not live on the sequence grid".into(),
        ));
    }
    Ok(hold_sweep(psi, spec, &[spec.schedule.hold])?.remove(0))
}

/// States just before the second pulse for several hold times, sharing the
/// evolution common to all of them. Output order follows `holds`.
///
/// Time steps restart at the start of the depth schedule and at the end of
/// each hold, so the step grid seen by the spin-dependent part of the
/// evolution does not depend on when the first pulse fired.
pub fn hold_sweep(
    psi: &WaveFunction,
    spec: &SequenceSpec,
    holds: &[f64],
) -> Result<Vec<SpinorState>> {
    if holds.is_empty() {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..holds.len()).collect();
    order.sort_by(|&a, &b| holds[a].total_cmp(&holds[b]));
    let longest = spec.with_hold(holds[order[holds.len() - 1]]);
    for &h in holds {
        spec.with_hold(h).validate()?;
    }
    psi.check_normalized("hold_sweep")?;
    if psi.grid() != &spec.grid {
        return Err(Error::Config(
            "input state does not live on the sequence grid".into(),
        ));
    }
    let trajectory = spec.trajectory()?;
    let shared = ScheduledTrap::new(spec.grid, spec.shape, longest.schedule, trajectory)?;
    let mut prop = Propagator::new(spec.grid);
    let mut state = SpinorState::spin_down(psi.clone());
    // one step grid from t = 0 up to the schedule start, wherever the pulse falls
    prop.evolve_spinor_in_place(
        &mut state,
        &EvolutionSpec::anchored(spec.dt, 0.0, spec.first_pulse, 0.0)?,
        &shared,
    )?;
    pulse_in_place(&mut state, FRAC_PI_2, spec.phase_first);
    let start = spec.schedule.start;
    prop.evolve_spinor_in_place(
        &mut state,
        &EvolutionSpec::anchored(spec.dt, spec.first_pulse, start, 0.0)?,
        &shared,
    )?;
    let mut t = start;
    let mut out = vec![None; holds.len()];
    for &k in &order {
        let branch_spec = spec.with_hold(holds[k]);
        let branch_at = branch_spec.schedule.start + branch_spec.schedule.ramp + holds[k];
        if branch_at > t {
            prop.evolve_spinor_in_place(
                &mut state,
                &EvolutionSpec::anchored(spec.dt, t, branch_at, start)?,
                &shared,
            )?;
            t = branch_at;
        }
        let trap = ScheduledTrap::new(spec.grid, spec.shape, branch_spec.schedule, trajectory)?;
        let mut branch = state.clone();
        prop.evolve_spinor_in_place(
            &mut branch,
            &EvolutionSpec::new(spec.dt, t, branch_spec.second_pulse)?,
            &trap,
        )?;
        out[k] = Some(branch);
    }
    Ok(out
        .into_iter()
        .map(|s| s.expect("every hold visited"))
        .collect())
}

/// The motional state at the displacement instant τ_W, before the trap
/// moves: the state the measurement refers to.
pub fn state_at_displacement(psi: &WaveFunction, spec: &SequenceSpec) -> Result<WaveFunction> {
    spec.validate()?;
    let trap = ScheduledTrap::new(
        spec.grid,
        spec.shape,
        spec.schedule,
        TrapTrajectory::stationary(),
    )?;
    let mut prop = Propagator::new(spec.grid);
    prop.evolve(
        psi,
        &EvolutionSpec::new(spec.dt, 0.0, spec.displacement_time)?,
        &ForSpin(&trap, Spin::Down),
    )
}

/// Applies the second pulse at phase `phase` and returns w = P↓ - P↑.
pub fn readout(state: &SpinorState, phase: f64) -> f64 {
    let out = pulse(state, FRAC_PI_2, phase);
    out.population_down() - out.population_up()
}

fn diagnostics(state: &SpinorState, spec: &SequenceSpec) -> Result<Diagnostics> {
    let traj = spec.trajectory()?;
    let center = traj.position(spec.second_pulse);
    let half = spec.shape.cell_half_width(&spec.grid)?;
    let (pu, pd) = (state.population_up(), state.population_down());
    let total: Vec<Complex64> = state
        .up
        .density()
        .iter()
        .zip(state.down.density())
        .map(|(a, b)| Complex64::new((a + b).sqrt(), 0.0))
        .collect();
    let leak = leakage(&WaveFunction::new(spec.grid, total)?, center, half);
    let overlap = state.down.inner(&state.up).norm();
    // mirror about the trap's phase-space point
    let v = traj.velocity_at(spec.second_pulse);
    let shifted_up = shift_and_kick(&state.up, -center, -v);
    let shifted_down = shift_and_kick(&state.down, -center, -v);
    let mirror =
        parity_overlap(&shifted_down, &shifted_up).norm_sqr() / (pu * pd).max(f64::MIN_POSITIVE);
    Ok(Diagnostics {
        leakage: leak,
        population_up: pu,
        population_down: pd,
        norm_drift: (pu + pd - 1.0).abs(),
        visibility: 2.0 * overlap,
        mirror_fidelity: mirror,
        phase_second: spec.phase_second(),
    })
}

/// Runs the full sequence on `psi` and reads out the signed contrast.
pub fn run_sequence(psi: &WaveFunction, spec: &SequenceSpec) -> Result<SequenceOutcome> {
    let state = state_before_readout(psi, spec)?;
    let w = readout(&state, spec.phase_second());
    if !w.is_finite() {
        return Err(Error::Numerical("non-finite readout".into()));
    }
    Ok(SequenceOutcome {
        w,
        diagnostics: diagnostics(&state, spec)?,
    })
}

/// C(x, p) for a point given in internal units; W = C/(πħ).
pub fn measure_wigner_point(
    psi: &WaveFunction,
    x: f64,
    p: f64,
    template: &SequenceSpec,
) -> Result<f64> {
    let out = run_sequence(psi, &template.at(PhasePoint { x, p }))?;
    if out.w.abs() > 1.0 + CONTRAST_BOUND_TOLERANCE {
        return Err(Error::Invariant(format!(
            "signed contrast {} exceeds unity at (x, p) = ({x}, {p})",
            out.w
        )));
    }
    Ok(out.w)
}

/// Scan axes and signed contrast values; axes are in units of Δx₀ and Δp₀.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Row-major in x: `values[ix * p.len() + ip]`.
    pub values: Vec<f64>,
    pub metadata: GridMetadata,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    /// How values relate to W; always "contrast = pi*hbar*W".
    pub units: String,
    pub schedule_hash: String,
    pub source: String,
}

pub const CONTRAST_UNITS: &str = "contrast = pi*hbar*W; axes x/dx0, p/dp0";

impl WignerGrid {
    pub fn new(x: Vec<f64>, p: Vec<f64>, values: Vec<f64>, metadata: GridMetadata) -> Result<Self> {
        if values.len() != x.len() * p.len() {
            return Err(Error::Config(format!(
                "{} values for a {}x{} grid",
                values.len(),
                x.len(),
                p.len()
            )));
        }
        for axis in [&x, &p] {
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Config(
                    "grid axes must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self {
            x,
            p,
            values,
            metadata,
        })
    }

    pub fn get(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.p.len() + ip]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x.len(), self.p.len())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub ix: usize,
    pub ip: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WignerScan {
    /// Failed points hold NaN.
    pub grid: WignerGrid,
    pub failures: Vec<PointFailure>,
    pub max_leakage: f64,
}

/// Measures C on every (x, p) of the axes (in Δx₀, Δp₀ units), using up to
/// `jobs` threads. Results are independent of `jobs`.
pub fn scan_wigner(
    psi: &WaveFunction,
    x_axis: &[f64],
    p_axis: &[f64],
    template: &SequenceSpec,
    jobs: usize,
) -> Result<WignerScan> {
    template.validate()?;
    let np = p_axis.len();
    let results = map_indexed(x_axis.len() * np, jobs, |k| {
        let (ix, ip) = (k / np, k % np);
        let spec = template.at_scaled(x_axis[ix], p_axis[ip])?;
        let out = run_sequence(psi, &spec)?;
        if out.w.abs() > 1.0 + CONTRAST_BOUND_TOLERANCE {
            return Err(Error::Invariant(format!(
                "signed contrast {} exceeds unity",
                out.w
            )));
        }
        Ok(out)
    });
    let mut values = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut max_leakage: f64 = 0.0;
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => {
                values.push(o.w);
                max_leakage = max_leakage.max(o.diagnostics.leakage);
            }
            Err(e) => {
                values.push(f64::NAN);
                failures.push(PointFailure {
                    ix: k / np,
                    ip: k % np,
                    message: e.to_string(),
                });
            }
        }
    }
    let grid = WignerGrid::new(
        x_axis.to_vec(),
        p_axis.to_vec(),
        values,
        GridMetadata {
            units: CONTRAST_UNITS.into(),
            schedule_hash: template.schedule_hash(),
            source: "ramsey".into(),
        },
    )?;
    Ok(WignerScan {
        grid,
        failures,
        max_leakage,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityPoint {
    pub n: usize,
    pub w: f64,
    pub leakage: f64,
    pub visibility: f64,
}

/// Fock states 0..=n_max of the trap at its base depth, embedded in the grid.
pub fn fock_states(template: &SequenceSpec, n_max: usize) -> Result<Vec<WaveFunction>> {
    let model = PotentialModel::new(template.shape, template.schedule.base)?;
    Ok(model
        .stationary_states(&template.grid, n_max + 1)?
        .into_iter()
        .map(|s| s.state)
        .collect())
}

/// w(n) at the origin of phase space for Fock states n = 0..=n_max.
pub fn parity_scan(n_max: usize, template: &SequenceSpec, jobs: usize) -> Result<Vec<ParityPoint>> {
    let origin = template.at(PhasePoint::default());
    origin.validate()?;
    let states = fock_states(&origin, n_max)?;
    map_indexed(states.len(), jobs, |n| {
        let out = run_sequence(&states[n], &origin)?;
        Ok(ParityPoint {
            n,
            w: out.w,
            leakage: out.diagnostics.leakage,
            visibility: out.diagnostics.visibility,
        })
    })
    .into_iter()
    .collect()
}

/// Trap geometry in laboratory units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrapKind {
    /// Standing-wave lattice at the unit system's wavelength.
    Lattice,
    /// Harmonic approximation of that lattice (same ω at every depth).
    Harmonic,
    /// Gaussian tweezer with the given 1/e² waist in metres.
    Tweezer { waist: f64 },
}

/// Sequence parameters in SI units (kelvin for depths, seconds for times).
///
/// Times are measured from state preparation. The depth ramps start `settle`
/// after the displacement switch ends and the second pulse fires `tail` after
/// the last ramp ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub units: UnitSystem,
    pub trap: TrapKind,
    pub base_depth: f64,
    pub peak_up: f64,
    pub peak_down: f64,
    pub ramp: f64,
    pub switch_duration: f64,
    pub first_pulse: f64,
    pub displacement_time: f64,
    pub settle: f64,
    pub tail: f64,
    /// Fire the first pulse after the displacement instead of before it.
    pub pulse_after_displacement: bool,
    pub phase_first: f64,
    pub steps_per_period: f64,
    pub grid_points: usize,
    /// Grid length in lattice periods λ/2.
    pub sites: usize,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            units: UnitSystem::caesium_866(),
            trap: TrapKind::Lattice,
            base_depth: 18e-6,
            peak_up: 27e-6,
            peak_down: 22e-6,
            ramp: 15e-6,
            switch_duration: 300e-9,
            first_pulse: 0.2e-6,
            displacement_time: 0.5e-6,
            settle: 0.5e-6,
            tail: 0.2e-6,
            pulse_after_displacement: false,
            phase_first: 0.0,
            steps_per_period: crate::propagator::STEPS_PER_PERIOD,
            grid_points: 1024,
            sites: 4,
        }
    }
}

impl Protocol {
    pub fn shape(&self) -> Result<TrapShape> {
        let k = 1.0; // lengths are in units of 1/k
        let shape = match self.trap {
            TrapKind::Lattice => TrapShape::Lattice { wavenumber: k },
            TrapKind::Harmonic => TrapShape::Harmonic { wavenumber: k },
            TrapKind::Tweezer { waist } => TrapShape::Tweezer {
                waist: self.units.length_to_internal(waist),
            },
        };
        shape.validate()?;
        Ok(shape)
    }

    /// Sequence template at the origin with zero hold and no Φ₀ compensation.
    pub fn sequence(&self) -> Result<SequenceSpec> {
        let u = &self.units;
        let t = |s: f64| u.time_to_internal(s);
        let e = |k: f64| u.kelvin_to_internal(k);
        if !(self.steps_per_period > 0.0) {
            return Err(Error::Config("steps per period must be positive".into()));
        }
        for (name, v) in [
            ("settle", self.settle),
            ("tail", self.tail),
            ("first pulse time", self.first_pulse),
            ("displacement time", self.displacement_time),
        ] {
            if !(v >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        let shape = self.shape()?;
        let grid = Grid::lattice(self.grid_points, self.sites, 1.0)?;
        let switch_end = t(self.displacement_time + self.switch_duration);
        let ramp_start = switch_end + t(self.settle);
        let first_pulse = if self.pulse_after_displacement {
            switch_end + 0.5 * t(self.settle)
        } else {
            t(self.first_pulse)
        };
        let schedule = make_parity_schedule(
            t(self.ramp),
            0.0,
            e(self.base_depth),
            (e(self.peak_up), e(self.peak_down)),
        )?
        .starting_at(ramp_start);
        let period = GroundStateScales::from_omega(shape.omega(schedule.base))?.period();
        let spec = SequenceSpec {
            grid,
            shape,
            schedule,
            first_pulse,
            displacement_time: t(self.displacement_time),
            switch_duration: t(self.switch_duration),
            second_pulse: schedule.end() + t(self.tail),
            target: PhasePoint::default(),
            phase_first: self.phase_first,
            phase_offset: 0.0,
            phi0: None,
            dt: period / self.steps_per_period,
        };
        spec.validate()?;
        Ok(spec)
    }
}
