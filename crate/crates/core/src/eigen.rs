//! Stationary states of a 1D Hamiltonian by dense diagonalisation.
//!
//! The kinetic operator is exact in the Fourier basis of a periodic window,
//! which makes it a dense real symmetric Toeplitz-circulant matrix in the
//! position basis. Adding the potential on the diagonal and diagonalising
//! gives the stationary states of the window with periodic boundaries.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::wavefunction::WaveFunction;

/// Largest residual ‖Hψ - Eψ‖ (relative to the spectral scale) accepted.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Eigenstate {
    pub energy: f64,
    pub state: WaveFunction,
}

/// First row of the periodic kinetic matrix, `t_d = (1/n) Σ_k (p_k²/2) cos(p_k·d·dx)`.
fn kinetic_row(grid: &Grid) -> Vec<f64> {
    let n = grid.len();
    let momenta = grid.fft_momenta();
    let dx = grid.dx();
    (0..n)
        .map(|d| {
            momenta
                .iter()
                .map(|p| 0.5 * p * p * (p * d as f64 * dx).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

fn hamiltonian(grid: &Grid, potential: &[f64]) -> Result<DMatrix<f64>> {
    let n = grid.len();
    if potential.len() != n {
        return Err(Error::Config(format!(
            "potential has {} samples for a {n}-point window",
            potential.len()
        )));
    }
    if let Some(v) = potential.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "potential is not bounded on the window ({v})"
        )));
    }
    let t = kinetic_row(grid);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let d = i.abs_diff(j);
        let k = t[d];
        if i == j {
            k + potential[i]
        } else {
            k
        }
    }))
}

/// Lowest eigenvalues only, ascending.
pub fn eigenvalues(grid: &Grid, potential: &[f64], count: usize) -> Result<Vec<f64>> {
    let h = hamiltonian(grid, potential)?;
    let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "eigenvalue solver returned non-finite values".into(),
        ));
    }
    vals.sort_by(f64::total_cmp);
    vals.truncate(count);
    Ok(vals)
}

/// Lowest `count` eigenpairs of the window Hamiltonian, normalised on the
/// window, ascending in energy.
///
/// Signs are fixed so that even states are positive at the origin and odd
/// states have positive slope there.
pub fn stationary_states(grid: &Grid, potential: &[f64], count: usize) -> Result<Vec<Eigenstate>> {
    let n = grid.len();
    if count == 0 || count > n {
        return Err(Error::Config(format!(
            "cannot request {count} states from a {n}-point window"
        )));
    }
    let h = hamiltonian(grid, potential)?;
    let eig = SymmetricEigen::try_new(h.clone(), 1e-14, 0).ok_or_else(|| {
        Error::Numerical(format!("symmetric eigensolver did not converge (n = {n})"))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let scale = h.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let c = grid.center_index();
    let mut out = Vec::with_capacity(count);
    for &idx in order.iter().take(count) {
        let energy = eig.eigenvalues[idx];
        let v = eig.eigenvectors.column(idx).into_owned();
        let residual = (&h * &v - &v * energy).norm() / v.norm();
        if !(residual <= RESIDUAL_TOLERANCE * scale) {
            return Err(Error::Numerical(format!(
                "eigenpair {} has residual {residual:.3e} (energy {energy})",
                out.len()
            )));
        }
        let mut values: Vec<f64> = v.iter().copied().collect();
        let mirror: f64 = (0..n)
            .map(|i| values[i] * values[grid.mirror_index(i)])
            .sum();
        let mut key = if mirror >= 0.0 {
            values[c]
        } else {
            values[c + 1] - values[c - 1]
        };
        if key.abs() < 1e-12 {
            key = values
                .iter()
                .copied()
                .fold(0.0, |m: f64, x| if x.abs() > m.abs() { x } else { m });
        }
        let sign = key.signum();
        if sign < 0.0 {
            values.iter_mut().for_each(|x| *x = -*x);
        }
        let state = WaveFunction::from_real(*grid, &values)?.normalized()?;
        out.push(Eigenstate { energy, state });
    }
    Ok(out)
}

/// Places a window state into the centre of a larger grid with the same
/// spacing. The window's first sample (at -L_w/2) is mirrored to +L_w/2 so
/// that reflection symmetry survives the embedding; the result is renormalised.
pub fn embed(window_state: &WaveFunction, target: &Grid) -> Result<WaveFunction> {
    let w = *window_state.grid();
    if (w.dx() - target.dx()).abs() > 1e-12 * target.dx() || w.len() > target.len() {
        return Err(Error::Config(
            "window grid is not compatible with the target grid".into(),
        ));
    }
    if w.len() == target.len() {
        return Ok(window_state.clone());
    }
    let off = target.window_offset(w.len());
    let mut amps = vec![Complex64::new(0.0, 0.0); target.len()];
    let src = window_state.amplitudes();
    amps[off..off + w.len()].copy_from_slice(src);
    amps[off + w.len()] = src[0];
    WaveFunction::new(*target, amps)?.normalized()
}
