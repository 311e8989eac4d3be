//! Subcommand implementations. Each writes its artifacts, a copy of the
//! resolved configuration and a `<command>.record.json` into the output dir.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use ramsey_wigner::calibration::{
    contrast_vs_hold, find_collapse, reference_contrast, revival_amplitude, spectral_hold,
    CalibrationMethod, HoldCalibration,
};
use ramsey_wigner::operators::{edge_probability, parity_expectation};
use ramsey_wigner::potentials::{
    differential_shift, harmonic_spectrum, lattice_perturbative_regime,
    lattice_spectrum_perturbative, level_phases, tweezer_spectrum_perturbative,
};
use ramsey_wigner::ramsey::{
    fock_states, parity_scan, scan_wigner, state_at_displacement, SequenceSpec, WignerGrid,
};
use ramsey_wigner::wigner::{compare, symmetric_axis, wigner_parity_sum, wigner_transform};
use ramsey_wigner::{PotentialModel, TrapShape, UnitSystem};

use crate::config::{CalibrationMethodName, Config, OracleMethod};
use crate::error::CliError;
use crate::output::{self, grid_to_csv, grid_to_pgm, table_csv};
use crate::record::{sha256_hex, Artifact, CalibrationSummary, Diagnostics, RunRecord};
use crate::{Command, Format};

/// Largest window half-width (in ground-state widths) the 4-site grid is
/// meant to cover.
pub const WINDOW_WARNING: f64 = 4.0;

struct Run {
    config: Config,
    out: PathBuf,
    jobs: usize,
    format: Format,
    units: UnitSystem,
    artifacts: Vec<Artifact>,
    calibration: Option<CalibrationSummary>,
    diagnostics: Diagnostics,
}

impl Run {
    fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        output::write(&self.out.join(name), bytes)?;
        self.artifacts.push(Artifact {
            path: name.into(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    fn emit_grid(&mut self, stem: &str, grid: &WignerGrid) -> Result<(), CliError> {
        if self.format.csv() {
            self.emit(&format!("{stem}.csv"), grid_to_csv(grid).as_bytes())?;
        }
        if self.format.pgm() {
            let (pgm, side) = grid_to_pgm(grid);
            self.emit(&format!("{stem}.pgm"), &pgm)?;
            let json = serde_json::to_string_pretty(&side).expect("sidecar serialises");
            self.emit(&format!("{stem}.pgm.json"), json.as_bytes())?;
        }
        Ok(())
    }

    fn value(&mut self, key: &str, v: Value) {
        self.diagnostics.values.insert(key.into(), v);
    }

    fn base_spec(&self) -> Result<SequenceSpec, CliError> {
        Ok(self.config.protocol()?.sequence()?)
    }

    fn summarize(&mut self, cal: &HoldCalibration, method: &str) {
        self.calibration = Some(CalibrationSummary {
            method: method.into(),
            hold_us: self.units.time_to_si(cal.hold) * 1e6,
            phi0: cal.phi0,
        });
    }

    /// Hold time and Φ₀ for parity and Wigner scans: fixed values from the
    /// config, otherwise the configured calibration route.
    fn calibrate(&mut self, spec: &SequenceSpec) -> Result<HoldCalibration, CliError> {
        if let Some(hold) = self.config.fixed_hold()? {
            let hold = self.units.time_to_internal(hold);
            let phi0 = match self.config.calibration.phi0 {
                Some(p) => p,
                None => {
                    level_phases(&spec.schedule.with_hold(hold), &spec.shape, &spec.grid, 1)?[0]
                }
            };
            let cal = HoldCalibration {
                hold,
                phi0,
                method: CalibrationMethod::Spectral,
            };
            self.summarize(&cal, "fixed");
            return Ok(cal);
        }
        let cal = match self.config.calibration.method {
            CalibrationMethodName::Spectral => spectral_hold(spec)?,
            CalibrationMethodName::Collapse => {
                let c = &self.config.calibration;
                let holds = self.internal_holds()?;
                let curve =
                    contrast_vs_hold(&self.config.ensemble()?, &holds, spec, c.phases, self.jobs)?;
                let hold = find_collapse(&curve)?;
                HoldCalibration {
                    hold,
                    phi0: level_phases(&spec.schedule.with_hold(hold), &spec.shape, &spec.grid, 1)?
                        [0],
                    method: CalibrationMethod::Collapse,
                }
            }
        };
        let name = match cal.method {
            CalibrationMethod::Spectral => "spectral",
            CalibrationMethod::Collapse => "collapse",
        };
        self.summarize(&cal, name);
        Ok(cal)
    }

    fn internal_holds(&self) -> Result<Vec<f64>, CliError> {
        Ok(self
            .config
            .hold_axis()?
            .into_iter()
            .map(|h| self.units.time_to_internal(h))
            .collect())
    }

    fn window(&self) -> (Vec<f64>, Vec<f64>) {
        let s = &self.config.scan;
        if s.x_half > WINDOW_WARNING || s.p_half > WINDOW_WARNING {
            eprintln!(
                "warning: window ±({}, {}) extends beyond ±{WINDOW_WARNING} ground-state widths; \
                 expect leakage and grid-edge effects",
                s.x_half, s.p_half
            );
        }
        (
            symmetric_axis(s.x_half, s.points),
            symmetric_axis(s.p_half, s.points),
        )
    }

    fn scanned_state(&self, spec: &SequenceSpec) -> Result<ramsey_wigner::WaveFunction, CliError> {
        let n = self.config.scan.state;
        Ok(fock_states(spec, n)?.swap_remove(n))
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn execute(
    command: &Command,
    config: Config,
    out: &Path,
    jobs: usize,
    format: Format,
) -> Result<RunRecord, CliError> {
    let started = Instant::now();
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let units = config.units()?;
    let mut run = Run {
        config,
        out: out.to_path_buf(),
        jobs,
        format,
        units,
        artifacts: Vec::new(),
        calibration: None,
        diagnostics: Diagnostics::default(),
    };
    let name = command.name();
    let toml = run.config.to_toml();
    run.emit(&format!("{name}.config.toml"), toml.as_bytes())?;
    let status = match command {
        Command::Spectrum => spectrum(&mut run),
        Command::Fock => fock(&mut run),
        Command::Calibrate => calibrate(&mut run),
        Command::ParityScan => parity(&mut run),
        Command::WignerScan => wigner_scan(&mut run),
        Command::Oracle => oracle(&mut run),
        Command::Compare { a, b } => compare_files(&mut run, a, b),
    };
    if let Err(e) = &status {
        run.diagnostics.failures.push(e.to_string());
    }
    let record = RunRecord {
        command: name.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        jobs,
        config: run.config,
        calibration: run.calibration,
        diagnostics: run.diagnostics,
        wall_seconds: started.elapsed().as_secs_f64(),
        artifacts: run.artifacts,
    };
    let json = serde_json::to_string_pretty(&record).expect("record serialises");
    output::write(&out.join(format!("{name}.record.json")), json.as_bytes())?;
    status.map(|_| record)
}

fn spectrum(run: &mut Run) -> Result<(), CliError> {
    let spec = run.base_spec()?;
    let (shape, grid) = (spec.shape, spec.grid);
    let (depth, up, down) = (
        spec.schedule.base,
        spec.schedule.peak_up,
        spec.schedule.peak_down,
    );
    let count = run.config.spectrum.levels;
    let omega = shape.omega(depth);
    let exact = shape.levels(depth, &grid, count)?;
    let shifts = differential_shift(&shape, up, down, &grid, count)?;
    let perturbative = |n: usize| match shape {
        TrapShape::Lattice { wavenumber } => lattice_spectrum_perturbative(n, depth, wavenumber),
        TrapShape::Tweezer { waist } => tweezer_spectrum_perturbative(n, depth, waist),
        TrapShape::Harmonic { .. } => harmonic_spectrum(n, omega, depth),
    };
    if let TrapShape::Lattice { wavenumber } = shape {
        if !lattice_perturbative_regime(depth, wavenumber) {
            eprintln!("warning: trap is too shallow for the first-order lattice spectrum");
        }
    }
    let mut rows = Vec::new();
    let (mut worst_pert, mut worst_diff) = (0.0f64, 0.0f64);
    for n in 0..count {
        let pert = perturbative(n);
        let dev = (pert - exact[n]) / omega;
        let d = &shifts[n];
        worst_pert = worst_pert.max(dev.abs());
        worst_diff = worst_diff.max(d.relative_deviation().abs());
        rows.push(vec![
            n.to_string(),
            fmt(exact[n] / omega),
            fmt(harmonic_spectrum(n, omega, depth) / omega),
            fmt(pert / omega),
            fmt(dev),
            fmt(d.exact / d.omega),
            fmt(d.harmonic / d.omega),
            fmt(d.relative_deviation()),
        ]);
    }
    let header = [
        "n",
        "diagonalized_hw",
        "harmonic_hw",
        "perturbative_hw",
        "perturbative_minus_diagonalized_hw",
        "delta_e_exact_hw",
        "delta_e_harmonic_hw",
        "delta_e_deviation_hw",
    ];
    run.emit("spectrum.csv", table_csv(&header, &rows).as_bytes())?;
    let recoil = 0.5; // E_rec in internal units
    run.value("depth_erec", json!(depth / recoil));
    run.value("hbar_omega_erec", json!(omega / recoil));
    run.value("max_perturbative_deviation_hw", json!(worst_pert));
    run.value("max_differential_deviation_hw", json!(worst_diff));
    Ok(())
}

fn fock(run: &mut Run) -> Result<(), CliError> {
    let spec = run.base_spec()?;
    let model = PotentialModel::new(spec.shape, spec.schedule.base)?;
    let omega = model.omega();
    let states = model.stationary_states(&spec.grid, run.config.scan.n_max + 1)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (n, s) in states.iter().enumerate() {
        let parity = parity_expectation(&s.state)?;
        let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
        worst = worst.max((parity - expected).abs());
        rows.push(vec![
            n.to_string(),
            fmt(s.energy / omega),
            fmt(parity),
            fmt(s.state.norm_sqr()),
            fmt(edge_probability(&s.state)),
        ]);
    }
    let header = ["n", "energy_hw", "parity", "norm", "edge_probability"];
    run.emit("fock.csv", table_csv(&header, &rows).as_bytes())?;
    run.value("max_parity_error", json!(worst));
    Ok(())
}

fn calibrate(run: &mut Run) -> Result<(), CliError> {
    let spec = run.base_spec()?;
    let ensemble = run.config.ensemble()?;
    let phases = run.config.calibration.phases;
    let holds = run.internal_holds()?;
    let curve = contrast_vs_hold(&ensemble, &holds, &spec, phases, run.jobs)?;
    let rows: Vec<Vec<String>> = curve
        .hold_times
        .iter()
        .zip(&curve.contrast)
        .map(|(t, c)| vec![fmt(run.units.time_to_si(*t) * 1e6), fmt(*c)])
        .collect();
    run.emit(
        "calibration.csv",
        table_csv(&["hold_us", "contrast"], &rows).as_bytes(),
    )?;
    for (i, msg) in &curve.failures {
        run.diagnostics
            .failures
            .push(format!("hold index {i}: {msg}"));
    }
    match spectral_hold(&spec) {
        Ok(s) => {
            let us = run.units.time_to_si(s.hold) * 1e6;
            run.value("spectral_hold_us", json!(us));
        }
        Err(e) => run.value("spectral_hold_error", json!(e.to_string())),
    }
    let reference = reference_contrast(&ensemble, &spec, phases, run.jobs)?;
    run.value("initial_contrast", json!(reference));
    let hold = find_collapse(&curve)?;
    let cal = HoldCalibration {
        hold,
        phi0: level_phases(&spec.schedule.with_hold(hold), &spec.shape, &spec.grid, 1)?[0],
        method: CalibrationMethod::Collapse,
    };
    run.summarize(&cal, "collapse");
    match revival_amplitude(&curve) {
        Ok(r) => run.value("revival_amplitude", json!(r)),
        Err(e) => run.value("revival_error", json!(e.to_string())),
    }
    if !curve.failures.is_empty() {
        return Err(CliError::Numerical(format!(
            "{} fringe fits failed",
            curve.failures.len()
        )));
    }
    Ok(())
}

fn parity(run: &mut Run) -> Result<(), CliError> {
    let base = run.base_spec()?;
    let spec = run.calibrate(&base)?.apply(&base);
    let points = parity_scan(run.config.scan.n_max, &spec, run.jobs)?;
    let mut rows = Vec::new();
    let mut leak = 0.0f64;
    for p in &points {
        let expected = if p.n % 2 == 0 { 1.0 } else { -1.0 };
        leak = leak.max(p.leakage);
        rows.push(vec![
            p.n.to_string(),
            fmt(p.w),
            fmt(expected),
            fmt((p.w - expected).abs()),
            fmt(p.leakage),
            fmt(p.visibility),
        ]);
    }
    let header = ["n", "w", "expected", "abs_error", "leakage", "visibility"];
    run.emit("parity.csv", table_csv(&header, &rows).as_bytes())?;
    run.diagnostics.max_leakage = Some(leak);
    Ok(())
}

fn wigner_scan(run: &mut Run) -> Result<(), CliError> {
    let base = run.base_spec()?;
    let spec = run.calibrate(&base)?.apply(&base);
    let psi = run.scanned_state(&spec)?;
    let (xs, ps) = run.window();
    let scan = scan_wigner(&psi, &xs, &ps, &spec, run.jobs)?;
    run.emit_grid("wigner", &scan.grid)?;
    run.diagnostics.max_leakage = Some(scan.max_leakage);
    run.value("schedule_hash", json!(scan.grid.metadata.schedule_hash));
    for f in &scan.failures {
        let msg = format!("point ({}, {}): {}", xs[f.ix], ps[f.ip], f.message);
        run.diagnostics.failures.push(msg);
    }
    if !scan.failures.is_empty() {
        return Err(CliError::Numerical(format!(
            "{} scan points failed",
            scan.failures.len()
        )));
    }
    Ok(())
}

fn oracle(run: &mut Run) -> Result<(), CliError> {
    let spec = run.base_spec()?;
    let psi = state_at_displacement(&run.scanned_state(&spec)?, &spec)?;
    let (xs, ps) = run.window();
    let scales = spec.scales()?;
    let grid = match run.config.oracle.method {
        OracleMethod::IntegralTransform => wigner_transform(&psi, &xs, &ps, &scales, run.jobs)?,
        OracleMethod::ParitySum => {
            let r = wigner_parity_sum(
                &psi,
                &xs,
                &ps,
                &scales,
                run.config.oracle.fock_cutoff,
                run.jobs,
            )?;
            run.value("truncation_error", json!(r.truncation_error));
            r.grid
        }
    };
    run.emit_grid("oracle", &grid)?;
    Ok(())
}

fn compare_files(run: &mut Run, a: &Path, b: &Path) -> Result<(), CliError> {
    let load =
        |p: &Path| output::grid_from_csv(&output::read_to_string(p)?, &p.display().to_string());
    let (ga, gb) = (load(a)?, load(b)?);
    let c = compare(&ga, &gb)?;
    run.emit_grid("compare", &c.difference)?;
    run.value("max_abs", json!(c.max_abs));
    run.value("rms", json!(c.rms));
    run.value("skipped", json!(c.skipped));
    Ok(())
}
