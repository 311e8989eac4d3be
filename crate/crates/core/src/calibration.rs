//! Hold-time calibration: choose T_hold so that neighbouring Fock states pick
//! up a differential phase of π, and Φ₀ so the ground state reads w = +1.
//!
//! Two routes are provided. [`spectral_hold`] solves the phase condition
//! directly from the instantaneous spectrum. [`contrast_vs_hold`] and
//! [`find_collapse`] reproduce the experimental procedure: the Ramsey
//! contrast of a thermal ensemble collapses when opposite-parity states are
//! maximally dephased.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::parallel::map_indexed;
use crate::potentials::{level_phases, DepthSchedule};
use crate::ramsey::{fock_states, hold_sweep, readout, SequenceSpec};

/// Minimum number of second-pulse phases in a fringe scan.
pub const MIN_FRINGE_PHASES: usize = 8;

/// RMS deviation from a pure sinusoid above which a fringe fit is rejected.
pub const FIT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnsemble {
    pub ground_fraction: f64,
    pub n_max: usize,
    pub weights: Vec<f64>,
}

impl ThermalEnsemble {
    pub fn new(ground_fraction: f64, n_max: usize) -> Result<Self> {
        Ok(Self {
            ground_fraction,
            n_max,
            weights: thermal_weights(ground_fraction, n_max)?,
        })
    }
}

/// Geometric populations pₙ = P₀(1 - P₀)ⁿ for n ≤ n_max, renormalised.
pub fn thermal_weights(ground_fraction: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(ground_fraction > 0.0 && ground_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "ground-state fraction must lie in (0, 1], got {ground_fraction}"
        )));
    }
    let q = 1.0 - ground_fraction;
    let raw: Vec<f64> = (0..=n_max)
        .map(|n| ground_fraction * q.powi(n as i32))
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|p| p / total).collect())
}

/// Least-squares fit of w(φ) = a + b·cos φ + c·sin φ on equally spaced phases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub offset: f64,
    pub contrast: f64,
    /// Fringe phase: w ≈ offset + contrast·cos(φ - phase).
    pub phase: f64,
    pub rms_residual: f64,
}

pub fn fit_fringe(samples: &[f64]) -> Result<FringeFit> {
    let k = samples.len();
    if k < MIN_FRINGE_PHASES {
        return Err(Error::Config(format!(
            "fringe scan needs at least {MIN_FRINGE_PHASES} phases, got {k}"
        )));
    }
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for (j, w) in samples.iter().enumerate() {
        let phi = TAU * j as f64 / k as f64;
        a += w;
        b += w * phi.cos();
        c += w * phi.sin();
    }
    let scale = 2.0 / k as f64;
    let (a, b, c) = (a / k as f64, b * scale, c * scale);
    let rms = (samples
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let phi = TAU * j as f64 / k as f64;
            (w - a - b * phi.cos() - c * phi.sin()).powi(2)
        })
        .sum::<f64>()
        / k as f64)
        .sqrt();
    if !rms.is_finite() || rms > FIT_TOLERANCE {
        return Err(Error::Numerical(format!(
            "fringe is not sinusoidal (rms residual {rms:e})"
        )));
    }
    Ok(FringeFit {
        offset: a,
        contrast: b.hypot(c),
        phase: c.atan2(b),
        rms_residual: rms,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastCurve {
    pub hold_times: Vec<f64>,
    /// NaN where the fit failed.
    pub contrast: Vec<f64>,
    pub failures: Vec<(usize, String)>,
}

/// Ensemble-averaged fringes for each hold time: `fringes[h][j]` is w̄ at
/// second-pulse phase offset 2πj/phases.
pub fn ensemble_fringes(
    ensemble: &ThermalEnsemble,
    hold_times: &[f64],
    spec: &SequenceSpec,
    phases: usize,
    jobs: usize,
) -> Result<Vec<Vec<f64>>> {
    let states = fock_states(spec, ensemble.n_max)?;
    let base = spec.phase_second();
    let per_state = map_indexed(states.len(), jobs, |n| -> Result<Vec<Vec<f64>>> {
        if ensemble.weights[n] == 0.0 {
            return Ok(vec![vec![0.0; phases]; hold_times.len()]);
        }
        let pre = hold_sweep(&states[n], spec, hold_times)?;
        Ok(pre
            .iter()
            .map(|s| {
                (0..phases)
                    .map(|j| readout(s, base + TAU * j as f64 / phases as f64))
                    .collect()
            })
            .collect())
    });
    let mut total = vec![vec![0.0; phases]; hold_times.len()];
    for (n, r) in per_state.into_iter().enumerate() {
        let p = ensemble.weights[n];
        for (acc, row) in total.iter_mut().zip(r?) {
            for (a, w) in acc.iter_mut().zip(row) {
                *a += p * w;
            }
        }
    }
    Ok(total)
}

/// Ramsey contrast of the thermal ensemble versus hold time, from a fit over
/// `phases` (≥ 8) second-pulse phases.
///
/// Calibration normally runs with the displacement at zero; the target of
/// `spec` is honoured so that the insensitivity to it can be checked.
pub fn contrast_vs_hold(
    ensemble: &ThermalEnsemble,
    hold_times: &[f64],
    spec: &SequenceSpec,
    phases: usize,
    jobs: usize,
) -> Result<ContrastCurve> {
    if phases < MIN_FRINGE_PHASES {
        return Err(Error::Config(format!(
            "fringe scan needs at least {MIN_FRINGE_PHASES} phases, got {phases}"
        )));
    }
    let fringes = ensemble_fringes(ensemble, hold_times, spec, phases, jobs)?;
    let mut contrast = Vec::with_capacity(hold_times.len());
    let mut failures = Vec::new();
    for (i, f) in fringes.iter().enumerate() {
        match fit_fringe(f) {
            Ok(fit) => contrast.push(fit.contrast),
            Err(e) => {
                contrast.push(f64::NAN);
                failures.push((i, e.to_string()));
            }
        }
    }
    Ok(ContrastCurve {
        hold_times: hold_times.to_vec(),
        contrast,
        failures,
    })
}

/// Contrast of the same ensemble with the imbalance switched off, i.e. with
/// no differential phase accumulated: the level the curve starts from.
pub fn reference_contrast(
    ensemble: &ThermalEnsemble,
    spec: &SequenceSpec,
    phases: usize,
    jobs: usize,
) -> Result<f64> {
    let s = &spec.schedule;
    let balanced = SequenceSpec {
        schedule: DepthSchedule {
            peak_up: s.peak_down,
            ..*s
        },
        phi0: None,
        ..spec.clone()
    };
    let f = ensemble_fringes(ensemble, &[s.hold], &balanced, phases, jobs)?;
    Ok(fit_fringe(&f[0])?.contrast)
}

fn finite_points(curve: &ContrastCurve) -> Vec<(f64, f64)> {
    curve
        .hold_times
        .iter()
        .zip(&curve.contrast)
        .filter(|(t, c)| t.is_finite() && c.is_finite())
        .map(|(t, c)| (*t, *c))
        .collect()
}

fn first_minimum(pts: &[(f64, f64)]) -> Result<usize> {
    (1..pts.len().saturating_sub(1))
        .find(|&i| pts[i].1 < pts[i - 1].1 && pts[i].1 <= pts[i + 1].1)
        .ok_or_else(|| Error::Calibration("contrast curve has no interior minimum".into()))
}

/// Vertex of the parabola through three points, clamped to their span.
fn parabola_vertex((t0, c0): (f64, f64), (t1, c1): (f64, f64), (t2, c2): (f64, f64)) -> (f64, f64) {
    let num = (t1 - t0).powi(2) * (c1 - c2) - (t1 - t2).powi(2) * (c1 - c0);
    let den = (t1 - t0) * (c1 - c2) - (t1 - t2) * (c1 - c0);
    if den == 0.0 {
        return (t1, c1);
    }
    let t = (t1 - 0.5 * num / den).clamp(t0, t2);
    // Lagrange form evaluated at the vertex
    let l0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2));
    let l1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2));
    let l2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1));
    (t, c0 * l0 + c1 * l1 + c2 * l2)
}

/// Hold time of the first local minimum of the curve, refined by a parabola
/// through the minimum and its two neighbours.
pub fn find_collapse(curve: &ContrastCurve) -> Result<f64> {
    let pts = finite_points(curve);
    let i = first_minimum(&pts)?;
    Ok(parabola_vertex(pts[i - 1], pts[i], pts[i + 1]).0)
}

/// Peak contrast after the first collapse: the first local maximum that
/// follows it, refined by a parabola through its neighbours.
pub fn revival_amplitude(curve: &ContrastCurve) -> Result<f64> {
    let pts = finite_points(curve);
    let collapse = first_minimum(&pts)?;
    let i = (collapse + 1..pts.len().saturating_sub(1))
        .find(|&i| pts[i].1 > pts[i - 1].1 && pts[i].1 >= pts[i + 1].1)
        .ok_or_else(|| Error::Calibration("contrast curve shows no revival".into()))?;
    Ok(parabola_vertex(pts[i - 1], pts[i], pts[i + 1])
        .1
        .max(pts[i].1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CalibrationMethod {
    Spectral,
    Collapse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoldCalibration {
    pub hold: f64,
    pub phi0: f64,
    pub method: CalibrationMethod,
}

impl HoldCalibration {
    /// The template with this hold time and Φ₀ compensation applied.
    pub fn apply(&self, spec: &SequenceSpec) -> SequenceSpec {
        SequenceSpec {
            phi0: Some(self.phi0),
            ..spec.with_hold(self.hold)
        }
    }
}

fn phi0_for(spec: &SequenceSpec, hold: f64) -> Result<f64> {
    Ok(level_phases(&spec.schedule.with_hold(hold), &spec.shape, &spec.grid, 1)?[0])
}

/// Hold time giving Φ(1) - Φ(0) = ±π from the exact spectrum, ramps included.
pub fn spectral_hold(spec: &SequenceSpec) -> Result<HoldCalibration> {
    let s = &spec.schedule;
    if s.is_balanced() {
        return Err(Error::Calibration(
            "balanced trap accumulates no differential phase".into(),
        ));
    }
    let ramps = level_phases(&s.with_hold(0.0), &spec.shape, &spec.grid, 2)?;
    let ramp_gap = ramps[1] - ramps[0];
    let up = spec.shape.levels(s.peak_up, &spec.grid, 2)?;
    let down = spec.shape.levels(s.peak_down, &spec.grid, 2)?;
    let peak_gap = (up[1] - up[0]) - (down[1] - down[0]);
    let target = PI.copysign(peak_gap);
    let hold = (target - ramp_gap) / peak_gap;
    if !(hold >= 0.0) {
        return Err(Error::Calibration(format!(
            "ramps alone accumulate {ramp_gap} rad; shorten them or reduce the imbalance"
        )));
    }
    Ok(HoldCalibration {
        hold,
        phi0: phi0_for(spec, hold)?,
        method: CalibrationMethod::Spectral,
    })
}

/// The experimental route: scan the hold time, locate the first collapse of
/// the thermal-ensemble contrast and take Φ₀ at that hold.
pub fn collapse_hold(
    ensemble: &ThermalEnsemble,
    hold_times: &[f64],
    spec: &SequenceSpec,
    phases: usize,
    jobs: usize,
) -> Result<(ContrastCurve, HoldCalibration)> {
    let curve = contrast_vs_hold(ensemble, hold_times, spec, phases, jobs)?;
    let hold = find_collapse(&curve)?;
    let cal = HoldCalibration {
        hold,
        phi0: phi0_for(spec, hold)?,
        method: CalibrationMethod::Collapse,
    };
    Ok((curve, cal))
}
