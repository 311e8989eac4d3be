use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::TrapShape;
use crate::error::{config, Error, Result};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

/// Spin-resolved trap depth: both depths rise from a common base to their
/// peaks with raised-cosine ramps, hold, and ramp back down.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthSchedule {
    /// Time at which the ramp up begins.
    pub start: f64,
    pub base: f64,
    pub peak_up: f64,
    pub peak_down: f64,
    pub ramp: f64,
    pub hold: f64,
}

/// Builds a schedule starting at t = 0; see [`DepthSchedule::starting_at`].
pub fn make_parity_schedule(
    ramp: f64,
    hold: f64,
    base: f64,
    peaks: (f64, f64),
) -> Result<DepthSchedule> {
    let s = DepthSchedule {
        start: 0.0,
        base,
        peak_up: peaks.0,
        peak_down: peaks.1,
        ramp,
        hold,
    };
    s.validate()?;
    Ok(s)
}

impl DepthSchedule {
    /// Constant depth with no imbalance.
    pub fn constant(depth: f64) -> Self {
        Self {
            start: 0.0,
            base: depth,
            peak_up: depth,
            peak_down: depth,
            ramp: 0.0,
            hold: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ramp >= 0.0 && self.hold >= 0.0) {
            return config(format!(
                "schedule durations must be non-negative (ramp {}, hold {})",
                self.ramp, self.hold
            ));
        }
        if !(self.base > 0.0) {
            return config(format!("base depth must be positive, got {}", self.base));
        }
        if self.peak_up < self.base || self.peak_down < self.base {
            return config("peak depths must not be below the base depth");
        }
        if self.ramp == 0.0 && (self.peak_up != self.base || self.peak_down != self.base) {
            return config("a depth imbalance needs a non-zero ramp duration");
        }
        Ok(())
    }

    pub fn starting_at(mut self, start: f64) -> Self {
        self.start = start;
        self
    }

    pub fn with_hold(mut self, hold: f64) -> Self {
        self.hold = hold;
        self
    }

    pub fn end(&self) -> f64 {
        self.start + 2.0 * self.ramp + self.hold
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.ramp + self.hold
    }

    pub fn peak(&self, spin: Spin) -> f64 {
        match spin {
            Spin::Up => self.peak_up,
            Spin::Down => self.peak_down,
        }
    }

    pub fn is_balanced(&self) -> bool {
        self.peak_up == self.peak_down
    }

    /// Ramp envelope in [0, 1].
    #[inline]
    pub fn envelope(&self, t: f64) -> f64 {
        let s = t - self.start;
        if s <= 0.0 || s >= self.duration() {
            return 0.0;
        }
        if s < self.ramp {
            raised_cosine(s / self.ramp)
        } else if s <= self.ramp + self.hold {
            1.0
        } else {
            raised_cosine((self.duration() - s) / self.ramp)
        }
    }

    #[inline]
    pub fn depth(&self, spin: Spin, t: f64) -> f64 {
        self.base + (self.peak(spin) - self.base) * self.envelope(t)
    }
}

#[inline]
fn raised_cosine(u: f64) -> f64 {
    0.5 - 0.5 * (PI * u).cos()
}

/// Trap centre trajectory realising a displacement by `offset` followed by
/// uniform motion at `velocity`.
///
/// During the switch the position offset follows a smoothstep while the
/// velocity ramps up with the same profile; afterwards the motion is exactly
/// `offset + velocity·(t - switch_time - switch_duration/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapTrajectory {
    pub switch_time: f64,
    pub switch_duration: f64,
    pub offset: f64,
    pub velocity: f64,
}

pub fn make_displacement_trajectory(
    offset: f64,
    velocity: f64,
    switch_time: f64,
    switch_duration: f64,
) -> Result<TrapTrajectory> {
    if !(switch_duration > 0.0 && switch_duration.is_finite()) {
        return config(format!(
            "switch duration must be positive, got {switch_duration}"
        ));
    }
    if !(offset.is_finite() && velocity.is_finite() && switch_time.is_finite()) {
        return config("trajectory parameters must be finite");
    }
    Ok(TrapTrajectory {
        switch_time,
        switch_duration,
        offset,
        velocity,
    })
}

impl TrapTrajectory {
    pub fn stationary() -> Self {
        Self {
            switch_time: 0.0,
            switch_duration: 1.0,
            offset: 0.0,
            velocity: 0.0,
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.offset == 0.0 && self.velocity == 0.0
    }

    pub fn switch_end(&self) -> f64 {
        self.switch_time + self.switch_duration
    }

    #[inline]
    pub fn position(&self, t: f64) -> f64 {
        let u = (t - self.switch_time) / self.switch_duration;
        if u <= 0.0 {
            0.0
        } else if u < 1.0 {
            let step = u * u * (3.0 - 2.0 * u);
            let ramp = u * u * u * (1.0 - 0.5 * u);
            self.offset * step + self.velocity * self.switch_duration * ramp
        } else {
            self.offset + self.velocity * (t - self.switch_time - 0.5 * self.switch_duration)
        }
    }

    #[inline]
    pub fn velocity_at(&self, t: f64) -> f64 {
        let u = (t - self.switch_time) / self.switch_duration;
        if u <= 0.0 {
            0.0
        } else if u < 1.0 {
            let dstep = 6.0 * u * (1.0 - u) / self.switch_duration;
            let dramp = u * u * (3.0 - 2.0 * u);
            self.offset * dstep + self.velocity * dramp
        } else {
            self.velocity
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn ramp_integral(
    schedule: &DepthSchedule,
    shape: &TrapShape,
    grid: &Grid,
    count: usize,
    order: usize,
) -> Result<Vec<f64>> {
    let (nodes, weights) = gauss_legendre(order);
    let mut acc = vec![0.0; count];
    for (x, w) in nodes.iter().zip(&weights) {
        let env = raised_cosine(0.5 * (x + 1.0));
        let up = shape.levels(
            schedule.base + (schedule.peak_up - schedule.base) * env,
            grid,
            count,
        )?;
        let down = shape.levels(
            schedule.base + (schedule.peak_down - schedule.base) * env,
            grid,
            count,
        )?;
        for n in 0..count {
            acc[n] += w * 0.5 * schedule.ramp * (up[n] - down[n]);
        }
    }
    Ok(acc)
}

/// Differential phases Φ(n) = ∫ΔE(n,t)/ħ dt over the schedule for
/// n = 0..count, using the instantaneous exact spectrum.
///
/// The ramps are integrated by Gauss–Legendre quadrature at two orders; a
/// disagreement beyond 1e-9 rad is reported as non-convergence. The hold
/// contributes ΔE(n, peak)·T_hold.
pub fn level_phases(
    schedule: &DepthSchedule,
    shape: &TrapShape,
    grid: &Grid,
    count: usize,
) -> Result<Vec<f64>> {
    schedule.validate()?;
    if schedule.is_balanced() || count == 0 {
        return Ok(vec![0.0; count]);
    }
    let coarse = ramp_integral(schedule, shape, grid, count, 16)?;
    let fine = ramp_integral(schedule, shape, grid, count, 24)?;
    for (a, b) in coarse.iter().zip(&fine) {
        if (a - b).abs() > 1e-9 * (1.0 + b.abs()) {
            return Err(Error::Numerical(format!(
                "ramp phase quadrature did not converge ({a} vs {b})"
            )));
        }
    }
    let up = shape.levels(schedule.peak_up, grid, count)?;
    let down = shape.levels(schedule.peak_down, grid, count)?;
    // ramp down mirrors ramp up
    Ok((0..count)
        .map(|n| 2.0 * fine[n] + schedule.hold * (up[n] - down[n]))
        .collect())
}

/// Φ₀ = ∫ΔE(0,t)/ħ dt from the exact ground-state differential energy.
pub fn phi0_integral(schedule: &DepthSchedule, shape: &TrapShape, grid: &Grid) -> Result<f64> {
    Ok(level_phases(schedule, shape, grid, 1)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(10);
        let c: f64 = x.iter().zip(&w).map(|(x, w)| w * (2.0 * x).cos()).sum();
        assert!((c - 2f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn schedule_shape_and_continuity() {
        let s = make_parity_schedule(2.0, 3.0, 10.0, (15.0, 12.0))
            .unwrap()
            .starting_at(1.0);
        assert_eq!(s.depth(Spin::Up, 0.5), 10.0);
        assert_eq!(s.depth(Spin::Up, 4.0), 15.0);
        assert_eq!(s.depth(Spin::Down, 4.0), 12.0);
        assert_eq!(s.depth(Spin::Up, s.end() + 0.1), 10.0);
        // C¹ at each boundary: finite differences vanish like h²
        for t in [1.0, 3.0, 6.0, 8.0] {
            let h = 1e-5;
            let left = (s.depth(Spin::Up, t) - s.depth(Spin::Up, t - h)) / h;
            let right = (s.depth(Spin::Up, t + h) - s.depth(Spin::Up, t)) / h;
            assert!(left.abs() < 1e-3 && right.abs() < 1e-3, "t={t}");
        }
        let mut t = 0.0;
        while t < 10.0 {
            assert!(s.depth(Spin::Up, t) >= 10.0 && s.depth(Spin::Down, t) >= 10.0);
            t += 0.01;
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(make_parity_schedule(-1.0, 1.0, 1.0, (2.0, 2.0)).is_err());
        assert!(make_parity_schedule(1.0, -1.0, 1.0, (2.0, 2.0)).is_err());
        assert!(make_parity_schedule(1.0, 1.0, 3.0, (2.0, 4.0)).is_err());
    }

    #[test]
    fn trajectory_examples() {
        let still = make_displacement_trajectory(0.0, 0.0, 1.0, 0.3).unwrap();
        for t in [0.0, 1.1, 5.0] {
            assert_eq!(still.position(t), 0.0);
        }
        let shift = make_displacement_trajectory(0.7, 0.0, 1.0, 0.3).unwrap();
        assert_eq!(shift.position(0.9), 0.0);
        assert_eq!(shift.position(10.0), 0.7);
        assert_eq!(shift.velocity_at(10.0), 0.0);

        let v = 2.5;
        let moving = make_displacement_trajectory(0.0, v, 1.0, 0.3).unwrap();
        let slope = (moving.position(20.0) - moving.position(10.0)) / 10.0;
        assert!(((slope - v) / v).abs() < 1e-12);
        assert!((moving.position(5.0) - v * (5.0 - 1.0 - 0.15)).abs() < 1e-12);
        assert!(make_displacement_trajectory(0.1, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn trajectory_is_c1() {
        let tr = make_displacement_trajectory(0.4, -1.3, 2.0, 0.5).unwrap();
        for t in [2.0, 2.5] {
            let h = 1e-7;
            for side in [-1.0, 1.0] {
                let fd = (tr.position(t + side * h) - tr.position(t)) / (side * h);
                assert!((fd - tr.velocity_at(t)).abs() < 1e-5, "t={t}");
            }
            assert!((tr.position(t + 1e-9) - tr.position(t - 1e-9)).abs() < 1e-8);
        }
    }

    #[test]
    fn balanced_schedule_has_no_phase() {
        let g = Grid::lattice(256, 4, 1.0).unwrap();
        let s = make_parity_schedule(1.0, 2.0, 50.0, (60.0, 60.0)).unwrap();
        let shape = TrapShape::Lattice { wavenumber: 1.0 };
        assert_eq!(phi0_integral(&s, &shape, &g).unwrap(), 0.0);
    }

    #[test]
    fn harmonic_phi0_over_hold_is_rectangle() {
        // with negligible ramps Φ₀ → ΔE₀·T
        let g = Grid::new(256, 20.0).unwrap();
        let shape = TrapShape::Harmonic { wavenumber: 1.0 };
        let (up, down) = (60.0, 50.0);
        let s = make_parity_schedule(1e-9, 3.0, 50.0, (up, down)).unwrap();
        let dw = shape.omega(up) - shape.omega(down);
        let de0 = -up + down + 0.5 * dw;
        assert!((phi0_integral(&s, &shape, &g).unwrap() - de0 * 3.0).abs() < 1e-6);

        // ramps add the envelope-weighted integral; check against trapezoid sums
        let s = make_parity_schedule(1.0, 3.0, 50.0, (up, down)).unwrap();
        let de = |t: f64| {
            let (u, d) = (s.depth(Spin::Up, t), s.depth(Spin::Down, t));
            (shape.omega(u) / 2.0 - u) - (shape.omega(d) / 2.0 - d)
        };
        let n = 200_000;
        let h = s.end() / n as f64;
        let trap: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * de(i as f64 * h)
            })
            .sum::<f64>()
            * h;
        assert!((phi0_integral(&s, &shape, &g).unwrap() - trap).abs() < 1e-6);
    }
}
