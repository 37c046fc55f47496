//! Adaptive explicit Runge–Kutta (Dormand–Prince 8(5,3)) for a complex scalar ODE.

mod tableau;

use crate::error::{Error, Result};
use num_complex::Complex64;
use tableau::{A, B, C, E3, E5};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ORDER: f64 = 7.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Weighted RMS norm over the real and imaginary parts.
fn norm(v: Complex64, scale: f64) -> f64 {
    ((v.re / scale).powi(2) + (v.im / scale).powi(2)).sqrt() / std::f64::consts::SQRT_2
}

struct Stepper<'a, F> {
    f: &'a mut F,
    tol: Tolerance,
    stats: Stats,
}

impl<F> Stepper<'_, F>
where
    F: FnMut(f64, Complex64) -> Result<Complex64>,
{
    fn eval(&mut self, t: f64, y: Complex64) -> Result<Complex64> {
        self.stats.evaluations += 1;
        (self.f)(t, y)
    }

    fn initial_step(&mut self, t: f64, y: Complex64, f0: Complex64, dir: f64) -> Result<f64> {
        let scale = self.tol.atol + y.norm() * self.tol.rtol;
        let d0 = norm(y, scale);
        let d1 = norm(f0, scale);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = y + dir * h0 * f0;
        let f1 = self.eval(t + dir * h0, y1)?;
        let d2 = norm(f1 - f0, scale) / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / (ORDER + 1.0))
        };
        Ok((100.0 * h0).min(h1))
    }

    /// One attempted step; returns (y_new, f_new, error norm).
    fn attempt(&mut self, t: f64, y: Complex64, k0: Complex64, h: f64) -> Result<(Complex64, Complex64, f64)> {
        let mut k = [Complex64::new(0.0, 0.0); 13];
        k[0] = k0;
        for s in 1..12 {
            let mut dy = Complex64::new(0.0, 0.0);
            for j in 0..s {
                dy += A[s][j] * k[j];
            }
            k[s] = self.eval(t + C[s] * h, y + h * dy)?;
        }
        let mut dy = Complex64::new(0.0, 0.0);
        for j in 0..12 {
            dy += B[j] * k[j];
        }
        let y_new = y + h * dy;
        k[12] = self.eval(t + h, y_new)?;
        let mut e5 = Complex64::new(0.0, 0.0);
        let mut e3 = Complex64::new(0.0, 0.0);
        for j in 0..13 {
            e5 += E5[j] * k[j];
            e3 += E3[j] * k[j];
        }
        let scale = self.tol.atol + y.norm().max(y_new.norm()) * self.tol.rtol;
        let n5 = norm(e5, scale).powi(2);
        let n3 = norm(e3, scale).powi(2);
        let err = if n5 == 0.0 && n3 == 0.0 { 0.0 } else { h.abs() * n5 / (n5 + 0.01 * n3).sqrt() };
        Ok((y_new, k[12], err))
    }
}

/// Integrates y' = f(t, y) from `t0` and records y at every entry of `outputs`
/// (which must be increasing and start after `t0`). Steps are shortened to
/// land on each output time exactly.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: Complex64,
    outputs: &[f64],
    tol: Tolerance,
) -> Result<(Vec<Complex64>, Stats)>
where
    F: FnMut(f64, Complex64) -> Result<Complex64>,
{
    let mut st = Stepper { f: &mut f, tol, stats: Stats::default() };
    let mut t = t0;
    let mut y = y0;
    let mut k0 = st.eval(t, y)?;
    let mut h = match outputs.first() {
        Some(&t1) => st.initial_step(t, y, k0, 1.0)?.min(t1 - t0),
        None => return Ok((Vec::new(), st.stats)),
    };
    let mut out = Vec::with_capacity(outputs.len());
    for &target in outputs {
        while t < target {
            let remaining = target - t;
            let clamped = h >= remaining;
            let step = if clamped { remaining } else { h };
            if step < 1e-14 * t.abs().max(1.0) && !clamped {
                return Err(Error::StepFailure { w: t });
            }
            let (y_new, k_new, err) = st.attempt(t, y, k0, step)?;
            if err <= 1.0 {
                st.stats.accepted += 1;
                t = if clamped { target } else { t + step };
                y = y_new;
                k0 = k_new;
                let factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-1.0 / (ORDER + 1.0))).min(MAX_FACTOR) };
                // a clamped step says nothing about the natural size
                h = if clamped { h.max(step * factor) } else { step * factor };
            } else {
                st.stats.rejected += 1;
                let factor = (SAFETY * err.powf(-1.0 / (ORDER + 1.0))).max(MIN_FACTOR);
                h = step * factor;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepFailure { w: t });
                }
            }
        }
        out.push(y);
    }
    Ok((out, st.stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_consistency() {
        for s in 1..13 {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-12, "row {s}");
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(E5.iter().sum::<f64>().abs() < 1e-14);
        assert!(E3.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn oscillator_exact() {
        // y' = i y, y(0) = 1
        let ts: Vec<f64> = (1..=50).map(|k| k as f64 * 0.4).collect();
        let tol = Tolerance { rtol: 1e-12, atol: 1e-12 };
        let (ys, stats) = integrate(|_, y| Ok(Complex64::i() * y), 0.0, Complex64::new(1.0, 0.0), &ts, tol).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y - Complex64::new(0.0, *t).exp()).norm() < 1e-10);
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn eighth_order_polynomial_is_exact() {
        let tol = Tolerance { rtol: 1e-6, atol: 1e-6 };
        let (ys, _) = integrate(|t, _| Ok(Complex64::new(7.0 * t.powi(6), 0.0)), 0.0, Complex64::new(0.0, 0.0), &[1.5], tol).unwrap();
        assert!((ys[0].re - 1.5f64.powi(7)).abs() < 1e-11);
    }

    #[test]
    fn error_propagates() {
        let tol = Tolerance { rtol: 1e-8, atol: 1e-8 };
        let r = integrate(
            |t, y| if t > 0.5 { Err(Error::DivisionNearZero { w: t, floor: 1e-14 }) } else { Ok(y) },
            0.0,
            Complex64::new(1.0, 0.0),
            &[1.0],
            tol,
        );
        assert!(matches!(r, Err(Error::DivisionNearZero { .. })));
    }

    #[test]
    fn blow_up_reports_step_failure() {
        // y' = y², y(0) = 1 blows up at t = 1
        let tol = Tolerance { rtol: 1e-10, atol: 1e-10 };
        let r = integrate(|_, y| Ok(y * y), 0.0, Complex64::new(1.0, 0.0), &[2.0], tol);
        assert!(r.is_err());
    }
}
