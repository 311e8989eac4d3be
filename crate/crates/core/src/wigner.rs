//! Reference Wigner functions computed directly from a wavefunction.
//!
//! Values are reported as the dimensionless contrast C = πħ·W, the quantity a
//! Ramsey measurement returns, on axes in units of (Δx₀, Δp₀). Two
//! independent routes are provided: the Wigner integral transform, and the
//! displaced-parity sum C = Σ(-1)ⁿ|⟨n|D†ψ⟩|² over an oscillator Fock basis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operators::shift_and_kick;
use crate::parallel::map_indexed;
use crate::ramsey::{GridMetadata, WignerGrid, CONTRAST_UNITS};
use crate::spectral::plans;
use crate::units::GroundStateScales;
use crate::wavefunction::{transform, Direction, WaveFunction};

/// Default Fock cutoff of the parity-sum oracle. A displaced n = 5 state at
/// the corner of a ±3(Δx₀, Δp₀) window still has ~1e-4 of its population
/// above n = 30.
pub const DEFAULT_FOCK_CUTOFF: usize = 40;

/// Largest population the parity sum may leave outside its Fock basis.
pub const MAX_TRUNCATION: f64 = 1e-4;

/// Largest imaginary part tolerated in the transform before it is dropped.
pub const REALNESS_TOLERANCE: f64 = 1e-10;

/// Relative mismatch tolerated between the axes of compared grids.
const AXIS_TOLERANCE: f64 = 1e-12;

fn physical_axes(x: &[f64], p: &[f64], scales: &GroundStateScales) -> (Vec<f64>, Vec<f64>) {
    (
        x.iter().map(|v| v * scales.dx0).collect(),
        p.iter().map(|v| v * scales.dp0).collect(),
    )
}

fn make_grid(x: &[f64], p: &[f64], values: Vec<f64>, source: &str) -> Result<WignerGrid> {
    WignerGrid::new(
        x.to_vec(),
        p.to_vec(),
        values,
        GridMetadata {
            units: CONTRAST_UNITS.into(),
            schedule_hash: String::new(),
            source: source.into(),
        },
    )
}

/// C(x, p) = ∫ψ*(x+y)ψ(x-y)e^{2ipy/ħ} dy on the requested axes.
///
/// For each x the state is translated spectrally so that x sits on a grid
/// point, and the y integral becomes an exact sum over grid samples.
pub fn wigner_transform(
    psi: &WaveFunction,
    x_axis: &[f64],
    p_axis: &[f64],
    scales: &GroundStateScales,
    jobs: usize,
) -> Result<WignerGrid> {
    psi.require_position("wigner_transform")?;
    psi.check_normalized("wigner_transform")?;
    let (xs, ps) = physical_axes(x_axis, p_axis, scales);
    let g = *psi.grid();
    // e^{2ipy} must be resolved by the y sampling
    let p_limit = 0.5 * PI / g.dx();
    if let Some(p) = ps.iter().find(|p| p.abs() >= p_limit) {
        return Err(Error::Domain(format!(
            "momentum {p} beyond the grid limit {p_limit}"
        )));
    }
    if let Some(x) = xs.iter().find(|x| x.abs() > 0.5 * g.length()) {
        return Err(Error::Domain(format!("position {x} outside the grid")));
    }
    let rows = map_indexed(xs.len(), jobs, |ix| -> Result<Vec<f64>> {
        // φ(s) = ψ(s + x)
        let phi = shift_and_kick(psi, -xs[ix], 0.0);
        let a = phi.amplitudes();
        let f: Vec<(f64, Complex64)> = (0..g.len())
            .map(|j| (g.x(j), a[j].conj() * a[g.mirror_index(j)]))
            .collect();
        ps.iter()
            .map(|&p| {
                let c = f
                    .iter()
                    .map(|(y, v)| v * Complex64::from_polar(1.0, 2.0 * p * y))
                    .sum::<Complex64>()
                    * g.dx();
                if c.im.abs() > REALNESS_TOLERANCE {
                    return Err(Error::Numerical(format!(
                        "Wigner transform has imaginary part {:e}",
                        c.im
                    )));
                }
                Ok(c.re)
            })
            .collect()
    });
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?.concat();
    make_grid(x_axis, p_axis, values, "integral-transform")
}

/// Normalised oscillator eigenfunctions n = 0..=n_max of frequency `omega`
/// (ħ = m = 1), centred on the grid origin.
#[allow(clippy::needless_range_loop)] // fills one column of every row per grid point
pub fn fock_basis(grid: &Grid, omega: f64, n_max: usize) -> Result<Vec<WaveFunction>> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Config(format!(
            "oscillator frequency must be positive, got {omega}"
        )));
    }
    let s = omega.sqrt();
    let mut rows = vec![vec![0.0; grid.len()]; n_max + 1];
    for i in 0..grid.len() {
        let u = s * grid.x(i);
        let mut prev = (omega / PI).powf(0.25) * (-0.5 * u * u).exp();
        rows[0][i] = prev;
        if n_max == 0 {
            continue;
        }
        let mut cur = 2f64.sqrt() * u * prev;
        rows[1][i] = cur;
        for k in 1..n_max {
            let k = k as f64;
            let next = (2.0 / (k + 1.0)).sqrt() * u * cur - (k / (k + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            rows[k as usize + 1][i] = cur;
        }
    }
    rows.iter()
        .map(|r| WaveFunction::from_real(*grid, r))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParitySumResult {
    pub grid: WignerGrid,
    /// Σₙ Qₙ per point, the population captured by the truncated basis.
    pub captured: Vec<f64>,
    /// Largest 1 - Σₙ Qₙ over the grid, a bound on the truncation error.
    pub truncation_error: f64,
}

/// C(x, p) = Σₙ(-1)ⁿ|⟨n|D†(x,p)ψ⟩|² for n ≤ n_max, with the Fock basis of the
/// oscillator defined by `scales`. Fails if any point leaves more than
/// [`MAX_TRUNCATION`] of the population outside the basis.
pub fn wigner_parity_sum(
    psi: &WaveFunction,
    x_axis: &[f64],
    p_axis: &[f64],
    scales: &GroundStateScales,
    n_max: usize,
    jobs: usize,
) -> Result<ParitySumResult> {
    psi.require_position("wigner_parity_sum")?;
    psi.check_normalized("wigner_parity_sum")?;
    let g = *psi.grid();
    let basis = fock_basis(&g, scales.omega, n_max)?;
    let (xs, ps) = physical_axes(x_axis, p_axis, scales);
    let np = ps.len();
    let norm = psi.norm_sqr();
    let points = map_indexed(xs.len() * np, jobs, |k| {
        let moved = shift_and_kick(psi, -xs[k / np], -ps[k % np]);
        let mut c = 0.0;
        let mut captured = 0.0;
        for (n, b) in basis.iter().enumerate() {
            let q = b.inner(&moved).norm_sqr();
            captured += q;
            c += if n % 2 == 0 { q } else { -q };
        }
        (c, captured)
    });
    let (values, captured): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
    let truncation_error = captured.iter().map(|c| norm - c).fold(0.0, f64::max);
    if truncation_error > MAX_TRUNCATION {
        return Err(Error::Numerical(format!(
            "Fock cutoff {n_max} leaves {truncation_error:.2e} of the population uncaptured"
        )));
    }
    Ok(ParitySumResult {
        grid: make_grid(x_axis, p_axis, values, "parity-sum")?,
        captured,
        truncation_error,
    })
}

/// W(x, p) (not scaled by πħ) on the natural discrete phase-space grid of
/// the state: every grid x and momenta spaced π/L, computed with one FFT per
/// row on a zero-padded copy so that no periodic ghost image appears.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceDensity {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Row-major in x.
    pub w: Vec<f64>,
    pub dx: f64,
    pub dp: f64,
}

pub fn wigner_full(psi: &WaveFunction) -> Result<PhaseSpaceDensity> {
    psi.require_position("wigner_full")?;
    let g = *psi.grid();
    let n = g.len();
    let m = 2 * n;
    let offset = n / 2;
    let mut padded = vec![Complex64::default(); m];
    padded[offset..offset + n].copy_from_slice(psi.amplitudes());
    let dp = PI / (m as f64 * g.dx());
    let fft = plans(m);
    let mut scratch = vec![Complex64::default(); fft.scratch_len()];
    let mut w = Vec::with_capacity(n * m);
    for i in 0..n {
        let c = i + offset;
        // f[j] = ψ*(x+y_j)ψ(x-y_j), y_j = j·dx with j taken modulo m
        let mut f: Vec<Complex64> = (0..m)
            .map(|j| padded[(c + j) % m].conj() * padded[(c + m - j) % m])
            .collect();
        // Σ_j f_j e^{+2πi kj/m}
        fft.inverse.process_with_scratch(&mut f, &mut scratch);
        // order k = -m/2..m/2
        for k in 0..m {
            let idx = (k + m / 2) % m;
            w.push(f[idx].re * g.dx() / PI);
        }
    }
    let x = (0..n).map(|i| g.x(i)).collect();
    let p = (0..m).map(|k| (k as f64 - (m / 2) as f64) * dp).collect();
    Ok(PhaseSpaceDensity {
        x,
        p,
        w,
        dx: g.dx(),
        dp,
    })
}

/// Global checks of a discretised Wigner function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerChecks {
    /// |∫∫W dx dp - 1|.
    pub normalization_error: f64,
    /// max |∫W dp - |ψ(x)|²|.
    pub position_marginal_error: f64,
    /// max |∫W dx - |φ(p)|²| on the momentum-grid points.
    pub momentum_marginal_error: f64,
    /// max |W|·πħ; at most 1.
    pub max_contrast: f64,
    /// ∫∫W² dx dp, 1/(2πħ) for a pure state.
    pub purity_integral: f64,
}

pub fn wigner_checks(psi: &WaveFunction) -> Result<WignerChecks> {
    let d = wigner_full(psi)?;
    let np = d.p.len();
    let total: f64 = d.w.iter().sum::<f64>() * d.dx * d.dp;
    let density = psi.density();
    let position_marginal_error =
        d.w.chunks(np)
            .zip(&density)
            .map(|(row, rho)| (row.iter().sum::<f64>() * d.dp - rho).abs())
            .fold(0.0, f64::max);
    // even p indices coincide with the FFT momenta k·2π/L
    let mom = transform(psi, Direction::ToMomentum)?;
    let pg = *mom.grid();
    let mut momentum_marginal_error: f64 = 0.0;
    for (k, m_density) in mom.density().iter().enumerate() {
        let pk = pg.x(k);
        let idx = (pk / d.dp).round() as isize + (np / 2) as isize;
        if idx < 0 || idx as usize >= np {
            continue;
        }
        let col: f64 = (0..d.x.len())
            .map(|i| d.w[i * np + idx as usize])
            .sum::<f64>()
            * d.dx;
        momentum_marginal_error = momentum_marginal_error.max((col - m_density).abs());
    }
    let max_contrast = d.w.iter().fold(0.0f64, |m, v| m.max(v.abs())) * PI;
    let purity_integral = d.w.iter().map(|v| v * v).sum::<f64>() * d.dx * d.dp;
    Ok(WignerChecks {
        normalization_error: (total - 1.0).abs(),
        position_marginal_error,
        momentum_marginal_error,
        max_contrast,
        purity_integral,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub max_abs: f64,
    pub rms: f64,
    /// a - b on the shared axes.
    pub difference: WignerGrid,
    /// Points skipped because either value is NaN.
    pub skipped: usize,
}

/// Difference metrics of two grids on identical axes.
pub fn compare(a: &WignerGrid, b: &WignerGrid) -> Result<Comparison> {
    let same = |u: &[f64], v: &[f64]| {
        u.len() == v.len()
            && u.iter()
                .zip(v)
                .all(|(x, y)| (x - y).abs() <= AXIS_TOLERANCE * (1.0 + x.abs()))
    };
    if !same(&a.x, &b.x) || !same(&a.p, &b.p) {
        return Err(Error::Config("compared grids have different axes".into()));
    }
    let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(u, v)| u - v).collect();
    let finite: Vec<f64> = diff.iter().copied().filter(|d| d.is_finite()).collect();
    let skipped = diff.len() - finite.len();
    if finite.is_empty() {
        return Err(Error::Numerical("no comparable points".into()));
    }
    let max_abs = finite.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let rms = (finite.iter().map(|d| d * d).sum::<f64>() / finite.len() as f64).sqrt();
    let difference = WignerGrid::new(
        a.x.clone(),
        a.p.clone(),
        diff,
        GridMetadata {
            units: CONTRAST_UNITS.into(),
            schedule_hash: String::new(),
            source: format!("{} - {}", a.metadata.source, b.metadata.source),
        },
    )?;
    Ok(Comparison {
        max_abs,
        rms,
        difference,
        skipped,
    })
}

/// Evenly spaced axis of `count` points over [-half, half].
pub fn symmetric_axis(half: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|i| -half + 2.0 * half * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OMEGA: f64 = 4.0;

    fn setup() -> (Grid, GroundStateScales) {
        (
            Grid::new(256, 16.0).unwrap(),
            GroundStateScales::from_omega(OMEGA).unwrap(),
        )
    }

    fn laguerre(n: usize, x: f64) -> f64 {
        let (mut a, mut b) = (1.0, 1.0 - x);
        if n == 0 {
            return a;
        }
        for k in 1..n {
            let k = k as f64;
            let c = ((2.0 * k + 1.0 - x) * b - k * a) / (k + 1.0);
            a = b;
            b = c;
        }
        b
    }

    /// πW of Fock state n: (-1)ⁿ e^{-r²} Lₙ(2r²), r² = (x/Δx₀)²/2 + (p/Δp₀)²/2 … in scaled units.
    fn fock_contrast(n: usize, xs: f64, ps: f64) -> f64 {
        let r2 = 0.5 * (xs * xs + ps * ps);
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * (-r2).exp() * laguerre(n, 2.0 * r2)
    }

    #[test]
    fn fock_basis_is_orthonormal() {
        let (g, _) = setup();
        let b = fock_basis(&g, OMEGA, 10).unwrap();
        for i in 0..b.len() {
            for j in 0..b.len() {
                let v = b[i].inner(&b[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).norm() < 1e-12, "{i} {j} {v}");
            }
        }
    }

    #[test]
    fn transform_matches_laguerre_form() {
        let (g, s) = setup();
        let b = fock_basis(&g, OMEGA, 3).unwrap();
        let ax = symmetric_axis(3.0, 7);
        for n in [0, 1, 3] {
            let w = wigner_transform(&b[n], &ax, &ax, &s, 1).unwrap();
            for (ix, x) in ax.iter().enumerate() {
                for (ip, p) in ax.iter().enumerate() {
                    let want = fock_contrast(n, *x, *p);
                    assert!((w.get(ix, ip) - want).abs() < 1e-10, "n={n} {x} {p}");
                }
            }
        }
    }

    #[test]
    fn oracles_agree_on_coherent_superposition() {
        let (g, s) = setup();
        let b = fock_basis(&g, OMEGA, 2).unwrap();
        let amps: Vec<Complex64> = b[0]
            .amplitudes()
            .iter()
            .zip(b[2].amplitudes())
            .map(|(u, v)| u * 0.6 + v * Complex64::new(0.0, 0.8))
            .collect();
        let psi = WaveFunction::new(g, amps).unwrap();
        let ax = symmetric_axis(2.0, 5);
        let t = wigner_transform(&psi, &ax, &ax, &s, 2).unwrap();
        let q = wigner_parity_sum(&psi, &ax, &ax, &s, 40, 2).unwrap();
        assert!(q.truncation_error < 1e-10);
        assert!(compare(&t, &q.grid).unwrap().max_abs < 1e-9);
    }

    #[test]
    fn full_grid_checks_on_fock_state() {
        let (g, _) = setup();
        let psi = fock_basis(&g, OMEGA, 4).unwrap().remove(4);
        let c = wigner_checks(&psi).unwrap();
        assert!(c.normalization_error < 1e-10);
        assert!(c.position_marginal_error < 1e-10);
        assert!(c.momentum_marginal_error < 1e-10);
        assert!(c.max_contrast <= 1.0 + 1e-10);
        assert!((c.purity_integral - 0.5 / PI).abs() < 1e-10);
    }

    #[test]
    fn compare_rejects_mismatched_axes() {
        let m = GridMetadata::default();
        let a = WignerGrid::new(vec![0.0, 1.0], vec![0.0], vec![0.0, 0.0], m.clone()).unwrap();
        let b = WignerGrid::new(vec![0.0, 1.5], vec![0.0], vec![0.0, 0.0], m).unwrap();
        assert!(matches!(compare(&a, &b), Err(Error::Config(_))));
    }
}
