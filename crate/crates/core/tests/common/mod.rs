#![allow(dead_code)]

use ramsey_wigner::calibration::spectral_hold;
use ramsey_wigner::ramsey::{Protocol, SequenceSpec, TrapKind};
use ramsey_wigner::{Grid, GroundStateScales, PotentialModel, TrapShape, WaveFunction};

/// Depth of the default 18 µK trap in internal units.
pub fn depth() -> f64 {
    ramsey_wigner::UnitSystem::caesium_866().kelvin_to_internal(18e-6)
}

pub fn grid() -> Grid {
    Grid::lattice(1024, 4, 1.0).unwrap()
}

pub fn harmonic() -> TrapShape {
    TrapShape::Harmonic { wavenumber: 1.0 }
}

pub fn scales() -> GroundStateScales {
    GroundStateScales::from_omega(harmonic().omega(depth())).unwrap()
}

pub fn fock(shape: TrapShape, n: usize) -> WaveFunction {
    PotentialModel::new(shape, depth())
        .unwrap()
        .stationary_states(&grid(), n + 1)
        .unwrap()
        .remove(n)
        .state
}

pub fn calibrated(trap: TrapKind) -> SequenceSpec {
    let spec = Protocol {
        trap,
        ..Protocol::default()
    }
    .sequence()
    .unwrap();
    spectral_hold(&spec).unwrap().apply(&spec)
}

/// Phase wrapped to (-π, π].
pub fn wrap_phase(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = a.rem_euclid(t);
    if r > std::f64::consts::PI {
        r - t
    } else {
        r
    }
}
