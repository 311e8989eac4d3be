//! Physical constants and the internal unit system.
//!
//! Internally ħ = 1, m = 1 and lengths are measured in 1/k_λ, so the recoil
//! energy is 1/2. The energy unit is therefore ħ²k_λ²/m = 2 E_rec and the
//! time unit is m/(ħk_λ²).

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of caesium-133 in kg.
pub const CS133_MASS: f64 = 132.905_451_961 * ATOMIC_MASS_UNIT;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// Atomic mass in kg.
    pub mass: f64,
    /// Lattice laser wavelength in m.
    pub wavelength: f64,
}

impl UnitSystem {
    pub fn new(mass: f64, wavelength: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return config(format!("mass must be positive, got {mass}"));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return config(format!("wavelength must be positive, got {wavelength}"));
        }
        Ok(Self { mass, wavelength })
    }

    /// Caesium-133 in an 866 nm lattice.
    pub fn caesium_866() -> Self {
        Self {
            mass: CS133_MASS,
            wavelength: 866e-9,
        }
    }

    /// k_λ = 2π/λ in 1/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// E_rec = (ħk_λ)²/(2m) in J.
    pub fn recoil_energy(&self) -> f64 {
        let hk = HBAR * self.wavenumber();
        hk * hk / (2.0 * self.mass)
    }

    pub fn length_unit(&self) -> f64 {
        1.0 / self.wavenumber()
    }

    pub fn time_unit(&self) -> f64 {
        let k = self.wavenumber();
        self.mass / (HBAR * k * k)
    }

    pub fn energy_unit(&self) -> f64 {
        2.0 * self.recoil_energy()
    }

    pub fn momentum_unit(&self) -> f64 {
        HBAR * self.wavenumber()
    }

    pub fn length_to_internal(&self, metres: f64) -> f64 {
        metres / self.length_unit()
    }

    pub fn length_to_si(&self, internal: f64) -> f64 {
        internal * self.length_unit()
    }

    pub fn time_to_internal(&self, seconds: f64) -> f64 {
        seconds / self.time_unit()
    }

    pub fn time_to_si(&self, internal: f64) -> f64 {
        internal * self.time_unit()
    }

    pub fn energy_to_internal(&self, joules: f64) -> f64 {
        joules / self.energy_unit()
    }

    pub fn energy_to_si(&self, internal: f64) -> f64 {
        internal * self.energy_unit()
    }

    /// Converts a temperature-equivalent depth k_B·T (T in kelvin) to internal energy.
    pub fn kelvin_to_internal(&self, kelvin: f64) -> f64 {
        self.energy_to_internal(BOLTZMANN * kelvin)
    }

    pub fn internal_to_kelvin(&self, internal: f64) -> f64 {
        self.energy_to_si(internal) / BOLTZMANN
    }

    pub fn momentum_to_internal(&self, si: f64) -> f64 {
        si / self.momentum_unit()
    }

    pub fn momentum_to_si(&self, internal: f64) -> f64 {
        internal * self.momentum_unit()
    }
}

/// Oscillator scales of the motional ground state, in internal units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateScales {
    pub omega: f64,
    pub dx0: f64,
    pub dp0: f64,
}

impl GroundStateScales {
    /// Δx₀ = √(ħ/(2mω)), Δp₀ = ħ/(2Δx₀) with ħ = m = 1.
    pub fn from_omega(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return config(format!("trap frequency must be positive, got {omega}"));
        }
        let dx0 = (0.5 / omega).sqrt();
        Ok(Self {
            omega,
            dx0,
            dp0: 0.5 / dx0,
        })
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caesium_recoil_and_depth() {
        let u = UnitSystem::caesium_866();
        let erec_kelvin = u.recoil_energy() / BOLTZMANN;
        // 18 µK is close to 190 recoil energies
        let ratio = 18e-6 / erec_kelvin;
        assert!((ratio - 187.4).abs() < 0.5, "{ratio}");
        assert!((u.energy_to_internal(u.recoil_energy()) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn round_trip_conversions() {
        let u = UnitSystem::new(1.3e-25, 532e-9).unwrap();
        for v in [1e-9, 3.7e-6, 0.25] {
            let t = u.time_to_si(u.time_to_internal(v));
            assert!(((t - v) / v).abs() < 1e-12);
            let l = u.length_to_si(u.length_to_internal(v));
            assert!(((l - v) / v).abs() < 1e-12);
            let e = u.energy_to_si(u.energy_to_internal(v * 1e-28));
            assert!(((e - v * 1e-28) / (v * 1e-28)).abs() < 1e-12);
            let p = u.momentum_to_si(u.momentum_to_internal(v * 1e-27));
            assert!(((p - v * 1e-27) / (v * 1e-27)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive_inputs() {
        assert!(UnitSystem::new(0.0, 1e-6).is_err());
        assert!(UnitSystem::new(1e-25, -1.0).is_err());
        assert!(GroundStateScales::from_omega(0.0).is_err());
    }

    #[test]
    fn uncertainty_product_is_minimal() {
        let s = GroundStateScales::from_omega(13.7).unwrap();
        assert!((s.dx0 * s.dp0 - 0.5).abs() <= f64::EPSILON);
    }

    #[test]
    fn trap_period_at_18_microkelvin() {
        let u = UnitSystem::caesium_866();
        let depth = u.kelvin_to_internal(18e-6);
        // ω = k√(2U/m) with k = 1, m = 1
        let omega = (2.0 * depth).sqrt();
        let period_us = u.time_to_si(2.0 * std::f64::consts::PI / omega) * 1e6;
        assert!((period_us - 18.2).abs() < 0.2, "{period_us}");
    }
}
