//! Parity, displacement and expectation values on position-space states.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::translate;
use crate::wavefunction::{transform, Direction, WaveFunction};

/// Probability allowed in the outer grid margins after a translation.
pub const SUPPORT_TOLERANCE: f64 = 1e-10;

/// Mirror image ψ(-x) about the grid origin.
pub fn reflect(psi: &WaveFunction) -> WaveFunction {
    let g = *psi.grid();
    let a = psi.amplitudes();
    let amps = (0..g.len()).map(|i| a[g.mirror_index(i)]).collect();
    WaveFunction::new(g, amps).expect("same grid")
}

/// Re⟨ψ(x)|ψ(-x)⟩ of a normalised state.
pub fn parity_expectation(psi: &WaveFunction) -> Result<f64> {
    psi.require_position("parity_expectation")?;
    psi.check_normalized("parity_expectation")?;
    Ok(parity_overlap(psi, psi).re)
}

/// ⟨a|Π|b⟩ without any normalisation requirement.
pub fn parity_overlap(a: &WaveFunction, b: &WaveFunction) -> Complex64 {
    let g = *a.grid();
    let (aa, ba) = (a.amplitudes(), b.amplitudes());
    (0..g.len())
        .map(|i| aa[i].conj() * ba[g.mirror_index(i)])
        .sum::<Complex64>()
        * g.dx()
}

/// Probability in the outer sixteenth of the grid on either side.
pub fn edge_probability(psi: &WaveFunction) -> f64 {
    let n = psi.grid().len();
    let band = (n / 16).max(1);
    let a = psi.amplitudes();
    let s: f64 = a[..band]
        .iter()
        .chain(&a[n - band..])
        .map(|c| c.norm_sqr())
        .sum();
    s * psi.grid().dx()
}

fn check_support(psi: &WaveFunction, what: &str) -> Result<()> {
    let edge = edge_probability(psi);
    if edge > SUPPORT_TOLERANCE * psi.norm_sqr().max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(format!(
            "{what}: probability {edge:.3e} reaches the grid boundary"
        )));
    }
    Ok(())
}

/// Translation and momentum kick without support checks:
/// ψ'(x) = ψ(x - shift)·e^{i·kick·x}.
pub fn shift_and_kick(psi: &WaveFunction, shift: f64, kick: f64) -> WaveFunction {
    let g = *psi.grid();
    let mut amps = psi.amplitudes().to_vec();
    translate(&g, &mut amps, shift);
    if kick != 0.0 {
        for (i, a) in amps.iter_mut().enumerate() {
            *a *= Complex64::from_polar(1.0, kick * g.x(i));
        }
    }
    WaveFunction::new(g, amps).expect("same grid")
}

/// D(x₀, p₀)ψ with the convention ψ'(x) = ψ(x - x₀)·e^{ip₀x/ħ}.
pub fn displace_state(psi: &WaveFunction, x0: f64, p0: f64) -> Result<WaveFunction> {
    psi.require_position("displace_state")?;
    let out = shift_and_kick(psi, x0, p0);
    check_support(&out, "displace_state")?;
    Ok(out)
}

/// Representation in a frame moving with the trap centre `x_c` at velocity `v`:
/// ψ'(x) = ψ(x + x_c)·e^{-imvx/ħ}.
pub fn to_comoving(psi: &WaveFunction, x_c: f64, v: f64) -> Result<WaveFunction> {
    psi.require_position("to_comoving")?;
    let out = shift_and_kick(psi, -x_c, -v);
    check_support(&out, "to_comoving")?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Expectations {
    pub position: f64,
    pub momentum: f64,
    pub energy: f64,
}

/// ⟨x⟩, ⟨p⟩ and ⟨H⟩ with the kinetic term evaluated spectrally.
pub fn expectations(psi: &WaveFunction, potential: &[f64]) -> Result<Expectations> {
    psi.require_position("expectations")?;
    let g = *psi.grid();
    if potential.len() != g.len() {
        return Err(Error::Config(format!(
            "potential has {} samples for a {}-point grid",
            potential.len(),
            g.len()
        )));
    }
    let norm = psi.norm_sqr();
    let dens = psi.density();
    let dx = g.dx();
    let position = (0..g.len()).map(|i| g.x(i) * dens[i]).sum::<f64>() * dx / norm;
    let v = dens.iter().zip(potential).map(|(d, v)| d * v).sum::<f64>() * dx / norm;

    let phi = transform(psi, Direction::ToMomentum)?;
    let pg = *phi.grid();
    let pd = phi.density();
    let dp = pg.dx();
    let momentum = (0..pg.len()).map(|k| pg.x(k) * pd[k]).sum::<f64>() * dp / norm;
    let kinetic = (0..pg.len())
        .map(|k| 0.5 * pg.x(k) * pg.x(k) * pd[k])
        .sum::<f64>()
        * dp
        / norm;
    Ok(Expectations {
        position,
        momentum,
        energy: kinetic + v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    /// Harmonic-oscillator eigenfunction via the Hermite recurrence (ω = 1, ħ = m = 1).
    pub(crate) fn hermite_function(n: usize, x: f64) -> f64 {
        let pi4 = std::f64::consts::PI.powf(-0.25);
        let mut h_prev = pi4 * (-0.5 * x * x).exp();
        if n == 0 {
            return h_prev;
        }
        let mut h = 2f64.sqrt() * x * h_prev;
        for k in 1..n {
            let next = (2.0 / (k as f64 + 1.0)).sqrt() * x * h
                - (k as f64 / (k as f64 + 1.0)).sqrt() * h_prev;
            h_prev = h;
            h = next;
        }
        h
    }

    fn fock(grid: Grid, n: usize) -> WaveFunction {
        WaveFunction::from_fn(grid, |x| Complex64::new(hermite_function(n, x), 0.0))
            .normalized()
            .unwrap()
    }

    /// Σ(-1)ⁿ e^{-|α|²}|α|^{2n}/n!, summed term by term.
    fn poisson_parity(alpha_sq: f64) -> f64 {
        let mut term = (-alpha_sq).exp();
        let mut sum = 0.0;
        for n in 0..200 {
            sum += if n % 2 == 0 { term } else { -term };
            term *= alpha_sq / (n as f64 + 1.0);
        }
        sum
    }

    fn grid() -> Grid {
        Grid::new(512, 40.0).unwrap()
    }

    #[test]
    fn fock_states_have_definite_parity() {
        for n in 0..8 {
            let p = parity_expectation(&fock(grid(), n)).unwrap();
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((p - expected).abs() < 1e-6, "n={n}: {p}");
        }
    }

    #[test]
    fn superposition_of_opposite_parity_has_zero_parity() {
        let g = grid();
        let (a, b) = (fock(g, 0), fock(g, 1));
        let amps = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x + y) / 2f64.sqrt())
            .collect();
        let psi = WaveFunction::new(g, amps).unwrap();
        assert!(parity_expectation(&psi).unwrap().abs() < 1e-6);
    }

    #[test]
    fn coherent_state_parity_matches_poisson_sum() {
        // ground state width Δx₀ = 1/√2 for ω = 1; |α|² = (x₀/2Δx₀)² + (p₀/2Δp₀)²
        let oracle_half = poisson_parity(0.5);
        assert!((oracle_half - (-1.0f64).exp()).abs() < 1e-14);
        let dx0 = 0.5f64.sqrt();
        let psi = displace_state(&fock(grid(), 0), 2.0 * dx0 * 0.5f64.sqrt(), 0.0).unwrap();
        assert!((parity_expectation(&psi).unwrap() - oracle_half).abs() < 1e-9);

        let oracle_one = poisson_parity(1.0);
        let psi = displace_state(&fock(grid(), 0), 2.0 * dx0, 0.0).unwrap();
        assert!((parity_expectation(&psi).unwrap() - oracle_one).abs() < 1e-9);
        assert!((oracle_one - 0.135_335_283_236_612_7).abs() < 1e-12);
    }

    #[test]
    fn zero_displacement_is_identity() {
        let psi = fock(grid(), 3);
        let out = displace_state(&psi, 0.0, 0.0).unwrap();
        assert!(out.max_abs_diff(&psi) < 1e-15);
        let co = to_comoving(&psi, 0.0, 0.0).unwrap();
        assert!(co.max_abs_diff(&psi) < 1e-15);
    }

    #[test]
    fn displacement_off_grid_is_a_domain_error() {
        let psi = fock(grid(), 0);
        assert!(matches!(
            displace_state(&psi, 19.0, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn displaced_ground_state_expectations() {
        let g = grid();
        let v: Vec<f64> = (0..g.len()).map(|i| 0.5 * g.x(i).powi(2)).collect();
        let e0 = expectations(&fock(g, 0), &v).unwrap();
        assert!(e0.position.abs() < 1e-12 && e0.momentum.abs() < 1e-12);
        assert!((e0.energy - 0.5).abs() < 1e-10);
        let psi = displace_state(&fock(g, 0), 1.5, -0.7).unwrap();
        let e = expectations(&psi, &v).unwrap();
        assert!((e.position - 1.5).abs() < 1e-9);
        assert!((e.momentum + 0.7).abs() < 1e-9);
        assert!((e.energy - (0.5 + 0.5 * 1.5f64.powi(2) + 0.5 * 0.7f64.powi(2))).abs() < 1e-8);
    }

    #[test]
    fn reflection_is_an_involution() {
        let psi = displace_state(&fock(grid(), 2), 0.8, 0.3).unwrap();
        assert!(reflect(&reflect(&psi)).max_abs_diff(&psi) == 0.0);
    }

    proptest! {
        #[test]
        fn displacement_inverse_restores_state(
            x in -3.0f64..3.0, p in -3.0f64..3.0, n in 0usize..5
        ) {
            let psi = fock(grid(), n);
            let there = displace_state(&psi, x, p).unwrap();
            prop_assert!((there.norm_sqr() - 1.0).abs() < 1e-12);
            let back = displace_state(&there, -x, -p).unwrap();
            prop_assert!((back.fidelity(&psi) - 1.0).abs() < 1e-10);
        }

        #[test]
        fn displacement_commutes_with_global_phase(theta in 0.0f64..std::f64::consts::TAU, x in -2.0f64..2.0) {
            let psi = fock(grid(), 1);
            let mut rotated = psi.clone();
            rotated.scale(Complex64::from_polar(1.0, theta));
            let a = displace_state(&rotated, x, 0.4).unwrap();
            let mut b = displace_state(&psi, x, 0.4).unwrap();
            b.scale(Complex64::from_polar(1.0, theta));
            prop_assert!(a.max_abs_diff(&b) < 1e-12);
        }

        #[test]
        fn real_even_states_have_unit_parity(w in 0.3f64..2.0, c in 0.0f64..1.0) {
            let g = grid();
            let psi = WaveFunction::from_fn(g, |x| {
                Complex64::new((-x * x / w).exp() + c * (-(x * x) / (3.0 * w)).exp() * x * x, 0.0)
            }).normalized().unwrap();
            prop_assert!((parity_expectation(&psi).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
