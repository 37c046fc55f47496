//! The complex initial value problem for φ(w) on the positive real axis and
//! extraction of the far-field wave.

use crate::error::{Error, Result};
use crate::forcing::{CPoint, Forcing, ForcingSpec};
use crate::recurrence::fmt15;
use crate::rk::{self, Tolerance};
use std::f64::consts::PI;
use std::io::Write;

pub const DEFAULT_W0: f64 = 1e-5;
const NEAR_ZERO: f64 = 1e-14;
/// Residuals below this are indistinguishable from round-off.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, CPoint)>,
    pub epsilon: f64,
    pub spec: ForcingSpec,
    pub w0: f64,
    pub w_end: f64,
    pub tol: f64,
}

/// Background series of φ used when isolating the wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Background {
    /// q² + ε·2i q⁴q′ (the second term is imaginary on the real axis).
    TwoTerm,
    /// Adds ε²(−12 q⁶q′² − 2 q⁷q″).
    ThreeTerm,
}

/// max(10, 20·a) with a the largest singularity offset.
pub fn default_w_end(spec: &ForcingSpec, epsilon: f64) -> f64 {
    let a = spec.factors(epsilon).iter().map(|f| f.0).fold(0.0, f64::max);
    (20.0 * a).max(10.0)
}

fn output_grid(w0: f64, w_end: f64, epsilon: f64) -> Vec<f64> {
    let dw = 2.0 * PI * epsilon / 48.0;
    let n = (((w_end - w0) / dw).ceil() as usize).max(1000);
    (1..=n).map(|i| if i == n { w_end } else { w0 + (w_end - w0) * i as f64 / n as f64 }).collect()
}

/// Solves dφ/dw = (φ − q_s²)/(iε q_s φ) from φ(w0) = q_s² + 2iε q_s⁴ q_s′.
pub fn integrate_phi(spec: &ForcingSpec, epsilon: f64, w0: f64, w_end: f64, tol: f64) -> Result<Trajectory> {
    if !(w0 > 0.0 && w_end > w0) {
        return Err(Error::DomainError("need 0 < w0 < w_end".into()));
    }
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::DomainError(format!("tol {tol:e} outside [1e-13, 1e-6]")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::DomainError("epsilon must be positive".into()));
    }
    let forcing = Forcing::new(*spec, epsilon);
    let (q0, dq0, _) = forcing.q_all(CPoint::new(w0, 0.0))?;
    let phi0 = q0 * q0 + 2.0 * CPoint::i() * epsilon * q0.powu(4) * dq0;
    let ieps = CPoint::new(0.0, epsilon);
    let rhs = |w: f64, phi: CPoint| -> Result<CPoint> {
        let q = forcing.q(CPoint::new(w, 0.0))?;
        if phi.norm() < NEAR_ZERO || q.norm() < NEAR_ZERO {
            return Err(Error::DivisionNearZero { w, floor: NEAR_ZERO });
        }
        Ok((phi - q * q) / (ieps * q * phi))
    };
    let grid = output_grid(w0, w_end, epsilon);
    let (ys, _) = rk::integrate(rhs, w0, phi0, &grid, Tolerance { rtol: tol, atol: tol })?;
    let mut samples = Vec::with_capacity(grid.len() + 1);
    samples.push((w0, phi0));
    samples.extend(grid.into_iter().zip(ys));
    Ok(Trajectory { samples, epsilon, spec: *spec, w0, w_end, tol })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveMeasurement {
    pub amplitude: f64,
    pub wavelength: f64,
    pub window: (f64, f64),
    pub peaks: usize,
    pub troughs: usize,
}

/// Background value of φ at real w.
pub fn background(forcing: &Forcing, w: f64, order: Background) -> Result<CPoint> {
    let (q, dq, d2q) = forcing.q_all(CPoint::new(w, 0.0))?;
    let eps = forcing.epsilon;
    let mut b = q * q + 2.0 * CPoint::i() * eps * q.powu(4) * dq;
    if order == Background::ThreeTerm {
        b += eps * eps * (-12.0 * q.powu(6) * dq * dq - 2.0 * q.powu(7) * d2q);
    }
    Ok(b)
}

/// Default window: the last 40% of the trajectory.
pub fn default_window(traj: &Trajectory) -> (f64, f64) {
    (traj.w_end - 0.4 * (traj.w_end - traj.w0), traj.w_end)
}

pub fn measure_wave(traj: &Trajectory, window: (f64, f64)) -> Result<WaveMeasurement> {
    measure_wave_with(traj, window, Background::ThreeTerm)
}

/// Half the mean peak-to-trough height of Re φ − background over the window,
/// with extrema refined by parabolic interpolation.
pub fn measure_wave_with(traj: &Trajectory, window: (f64, f64), order: Background) -> Result<WaveMeasurement> {
    let (lo, hi) = window;
    if !(lo >= traj.w0 && hi <= traj.w_end && hi > lo) {
        return Err(Error::DomainError("window outside the trajectory".into()));
    }
    if hi - lo < 6.0 * PI * traj.epsilon {
        return Err(Error::WindowTooShort { found: 0 });
    }
    let forcing = Forcing::new(traj.spec, traj.epsilon);
    let mut pts = Vec::new();
    for &(w, phi) in traj.samples.iter().filter(|s| s.0 >= lo && s.0 <= hi) {
        pts.push((w, phi.re - background(&forcing, w, order)?.re));
    }
    let peak_residual = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let floor = NOISE_FLOOR;
    if peak_residual < floor {
        return Err(Error::NoWaveDetected { residual: peak_residual, floor });
    }
    let mut peaks = Vec::new();
    let mut troughs = Vec::new();
    for i in 1..pts.len().saturating_sub(1) {
        let (y0, y1, y2) = (pts[i - 1].1, pts[i].1, pts[i + 1].1);
        let is_max = y1 > y0 && y1 >= y2;
        let is_min = y1 < y0 && y1 <= y2;
        if !(is_max || is_min) {
            continue;
        }
        let h = pts[i + 1].0 - pts[i].0;
        let curv = y2 - 2.0 * y1 + y0;
        let (dx, val) = if curv != 0.0 {
            let dx = 0.5 * (y0 - y2) / curv;
            (dx, y1 - 0.25 * (y0 - y2) * dx)
        } else {
            (0.0, y1)
        };
        let at = (pts[i].0 + dx * h, val);
        if is_max {
            peaks.push(at);
        } else {
            troughs.push(at);
        }
    }
    if peaks.len() + troughs.len() < 3 || peaks.len() < 2 || troughs.is_empty() {
        return Err(Error::WindowTooShort { found: peaks.len() + troughs.len() });
    }
    let mean = |v: &[(f64, f64)]| v.iter().map(|p| p.1).sum::<f64>() / v.len() as f64;
    let amplitude = 0.5 * (mean(&peaks) - mean(&troughs));
    let wavelength = (peaks[peaks.len() - 1].0 - peaks[0].0) / (peaks.len() - 1) as f64;
    Ok(WaveMeasurement { amplitude, wavelength, window, peaks: peaks.len(), troughs: troughs.len() })
}

/// Writes `w,re_phi,im_phi`.
pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["w", "re_phi", "im_phi"])?;
    for &(x, phi) in &traj.samples {
        w.write_record([fmt15(x), fmt15(phi.re), fmt15(phi.im)])?;
    }
    w.flush()?;
    Ok(())
}
