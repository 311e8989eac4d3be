//! Run configuration: a TOML file with unit-suffixed quantities, optionally
//! overridden by `RAMSEY_WIGNER_<SECTION>__<KEY>` environment variables.

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use ramsey_wigner::calibration::ThermalEnsemble;
use ramsey_wigner::ramsey::{Protocol, TrapKind};
use ramsey_wigner::UnitSystem;

use crate::error::CliError;
use crate::quantity::{parse, Dimension};

pub const ENV_PREFIX: &str = "RAMSEY_WIGNER_";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub atom: Atom,
    pub trap: Trap,
    pub sequence: Sequence,
    pub grid: GridSection,
    pub calibration: Calibration,
    pub scan: Scan,
    pub oracle: Oracle,
    pub spectrum: Spectrum,
    pub run: Run,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Atom {
    pub mass: String,
    pub wavelength: String,
}

impl Default for Atom {
    fn default() -> Self {
        Self {
            mass: "132.905451961 u".into(),
            wavelength: "866 nm".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrapKindName {
    Lattice,
    Harmonic,
    Tweezer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Trap {
    pub kind: TrapKindName,
    /// 1/e² waist, tweezer only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waist: Option<String>,
    pub base_depth: String,
    pub peak_up: String,
    pub peak_down: String,
}

impl Default for Trap {
    fn default() -> Self {
        Self {
            kind: TrapKindName::Lattice,
            waist: None,
            base_depth: "18 uK".into(),
            peak_up: "27 uK".into(),
            peak_down: "22 uK".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sequence {
    pub ramp: String,
    pub switch: String,
    pub first_pulse: String,
    pub displacement: String,
    pub settle: String,
    pub tail: String,
    pub pulse_after_displacement: bool,
    /// Phase of the first pulse in radians.
    pub phase_first: f64,
    pub steps_per_period: f64,
}

impl Default for Sequence {
    fn default() -> Self {
        Self {
            ramp: "15 us".into(),
            switch: "300 ns".into(),
            first_pulse: "0.2 us".into(),
            displacement: "0.5 us".into(),
            settle: "0.5 us".into(),
            tail: "0.2 us".into(),
            pulse_after_displacement: false,
            phase_first: 0.0,
            steps_per_period: 500.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub points: usize,
    /// Grid length in lattice periods.
    pub sites: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            points: 1024,
            sites: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationMethodName {
    Spectral,
    Collapse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Calibration {
    pub method: CalibrationMethodName,
    /// Fixed hold time; skips the calibration when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hold: Option<String>,
    /// Fixed Φ₀ in radians; computed from the spectrum when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
    pub ground_fraction: f64,
    pub n_max: usize,
    pub hold_start: String,
    pub hold_stop: String,
    pub hold_points: usize,
    pub phases: usize,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            method: CalibrationMethodName::Spectral,
            hold: None,
            phi0: None,
            ground_fraction: 0.5,
            n_max: 12,
            hold_start: "0 us".into(),
            hold_stop: "160 us".into(),
            hold_points: 65,
            phases: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scan {
    /// Fock state scanned by `wigner-scan` and `oracle`.
    pub state: usize,
    /// Half-widths of the window in units of Δx₀ and Δp₀.
    pub x_half: f64,
    pub p_half: f64,
    pub points: usize,
    /// Highest Fock state of `parity-scan` and `fock`.
    pub n_max: usize,
}

impl Default for Scan {
    fn default() -> Self {
        Self {
            state: 0,
            x_half: 3.0,
            p_half: 3.0,
            points: 21,
            n_max: 9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    IntegralTransform,
    ParitySum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Oracle {
    pub method: OracleMethod,
    pub fock_cutoff: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            method: OracleMethod::IntegralTransform,
            fock_cutoff: ramsey_wigner::wigner::DEFAULT_FOCK_CUTOFF,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Spectrum {
    pub levels: usize,
}

impl Default for Spectrum {
    fn default() -> Self {
        Self { levels: 10 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Run {
    /// Reserved; every pipeline is deterministic.
    pub seed: u64,
}

impl Config {
    /// Parses TOML text, applies environment overrides and validates.
    pub fn from_toml(
        text: &str,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, CliError> {
        let mut table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        apply_env(&mut table, env)?;
        let cfg: Config = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn units(&self) -> Result<UnitSystem, CliError> {
        let mass = quantity("atom.mass", &self.atom.mass, Dimension::Mass, None)?;
        let wavelength = quantity(
            "atom.wavelength",
            &self.atom.wavelength,
            Dimension::Length,
            None,
        )?;
        UnitSystem::new(mass, wavelength).map_err(|e| CliError::Config(format!("atom: {e}")))
    }

    /// The laboratory-unit protocol described by this configuration.
    pub fn protocol(&self) -> Result<Protocol, CliError> {
        let units = self.units()?;
        let energy = |key: &str, v: &str| quantity(key, v, Dimension::Energy, Some(&units));
        let time = |key: &str, v: &str| quantity(key, v, Dimension::Time, None);
        let trap = match (self.trap.kind, &self.trap.waist) {
            (TrapKindName::Lattice, None) => TrapKind::Lattice,
            (TrapKindName::Harmonic, None) => TrapKind::Harmonic,
            (TrapKindName::Tweezer, Some(w)) => TrapKind::Tweezer {
                waist: quantity("trap.waist", w, Dimension::Length, None)?,
            },
            (TrapKindName::Tweezer, None) => {
                return Err(CliError::Config(
                    "trap.waist: required for a tweezer".into(),
                ))
            }
            (_, Some(_)) => {
                return Err(CliError::Config(
                    "trap.waist: only valid for a tweezer".into(),
                ))
            }
        };
        let s = &self.sequence;
        Ok(Protocol {
            units,
            trap,
            base_depth: energy("trap.base_depth", &self.trap.base_depth)?,
            peak_up: energy("trap.peak_up", &self.trap.peak_up)?,
            peak_down: energy("trap.peak_down", &self.trap.peak_down)?,
            ramp: time("sequence.ramp", &s.ramp)?,
            switch_duration: time("sequence.switch", &s.switch)?,
            first_pulse: time("sequence.first_pulse", &s.first_pulse)?,
            displacement_time: time("sequence.displacement", &s.displacement)?,
            settle: time("sequence.settle", &s.settle)?,
            tail: time("sequence.tail", &s.tail)?,
            pulse_after_displacement: s.pulse_after_displacement,
            phase_first: s.phase_first,
            steps_per_period: s.steps_per_period,
            grid_points: self.grid.points,
            sites: self.grid.sites,
        })
    }

    /// Fixed hold time in seconds, if configured.
    pub fn fixed_hold(&self) -> Result<Option<f64>, CliError> {
        self.calibration
            .hold
            .as_deref()
            .map(|h| quantity("calibration.hold", h, Dimension::Time, None))
            .transpose()
    }

    /// Hold-time axis of the calibration scan in seconds.
    pub fn hold_axis(&self) -> Result<Vec<f64>, CliError> {
        let c = &self.calibration;
        let a = quantity(
            "calibration.hold_start",
            &c.hold_start,
            Dimension::Time,
            None,
        )?;
        let b = quantity("calibration.hold_stop", &c.hold_stop, Dimension::Time, None)?;
        let n = c.hold_points;
        Ok((0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect())
    }

    pub fn ensemble(&self) -> Result<ThermalEnsemble, CliError> {
        ThermalEnsemble::new(self.calibration.ground_fraction, self.calibration.n_max)
            .map_err(|e| CliError::Config(format!("calibration: {e}")))
    }

    /// Checks everything that does not need the physics crate; the rest is
    /// validated when the protocol is built.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |key: &str, msg: &str| Err(CliError::Config(format!("{key}: {msg}")));
        let p = self.protocol()?;
        p.sequence()
            .map_err(|e| CliError::Config(format!("sequence: {e}")))?;
        if !self.sequence.phase_first.is_finite() {
            return fail("sequence.phase_first", "must be finite");
        }
        let c = &self.calibration;
        if c.hold_points < 3 {
            return fail("calibration.hold_points", "needs at least 3 points");
        }
        let axis = self.hold_axis()?;
        if !(axis[0] >= 0.0 && axis[axis.len() - 1] > axis[0]) {
            return fail(
                "calibration.hold_stop",
                "must exceed a non-negative hold_start",
            );
        }
        if self.fixed_hold()?.is_some_and(|h| h < 0.0) {
            return fail("calibration.hold", "must be non-negative");
        }
        if c.phi0.is_some() && c.hold.is_none() {
            return fail("calibration.phi0", "needs calibration.hold as well");
        }
        if c.phi0.is_some_and(|v| !v.is_finite()) {
            return fail("calibration.phi0", "must be finite");
        }
        if c.phases < ramsey_wigner::calibration::MIN_FRINGE_PHASES {
            return fail("calibration.phases", "needs at least 8 fringe phases");
        }
        self.ensemble()?;
        let s = &self.scan;
        if s.points == 0 {
            return fail("scan.points", "must be positive");
        }
        for (key, v) in [("scan.x_half", s.x_half), ("scan.p_half", s.p_half)] {
            if !(v.is_finite() && v >= 0.0) {
                return fail(key, "must be a non-negative number");
            }
        }
        if self.spectrum.levels == 0 {
            return fail("spectrum.levels", "must be positive");
        }
        if self.oracle.fock_cutoff == 0 {
            return fail("oracle.fock_cutoff", "must be positive");
        }
        Ok(())
    }
}

fn quantity(
    key: &str,
    text: &str,
    dim: Dimension,
    units: Option<&UnitSystem>,
) -> Result<f64, CliError> {
    parse(text, dim, units).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{key}: {m}")),
        other => other,
    })
}

/// Parses an override value as a TOML literal, falling back to a string.
fn env_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `RAMSEY_WIGNER_SECTION__KEY=value` overrides to the raw table.
pub fn apply_env(
    table: &mut Table,
    env: impl IntoIterator<Item = (String, String)>,
) -> Result<(), CliError> {
    let mut overrides: Vec<(String, String)> = env
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    overrides.sort();
    for (name, raw) in overrides {
        let path = name[ENV_PREFIX.len()..].to_ascii_lowercase();
        let Some((section, key)) = path.split_once("__") else {
            return Err(CliError::Config(format!(
                "{name}: expected {ENV_PREFIX}<SECTION>__<KEY>"
            )));
        };
        let entry = table
            .entry(section.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        let Value::Table(sub) = entry else {
            return Err(CliError::Config(format!(
                "{name}: {section} is not a section"
            )));
        };
        sub.insert(key.to_string(), env_value(&raw));
    }
    Ok(())
}
