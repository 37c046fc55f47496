//! Adaptive Gauss–Kronrod (7/15) quadrature along straight complex segments.

use crate::error::{Error, Result};
use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

const MAX_INTERVALS: usize = 4000;

/// One G7K15 panel of ∫ f(z) dz over [z0, z1]: (Kronrod value, error estimate).
fn panel<F>(f: &mut F, z0: Complex64, z1: Complex64) -> Result<(Complex64, f64)>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let mid = 0.5 * (z0 + z1);
    let half = 0.5 * (z1 - z0);
    let fc = f(mid)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let d = half * XGK[j];
        let s = f(mid - d)? + f(mid + d)?;
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    Ok((k * half, ((k - g) * half).norm()))
}

/// ∫ f(z) dz along the straight segment from z0 to z1 to absolute accuracy `tol`.
pub fn segment<F>(mut f: F, z0: Complex64, z1: Complex64, tol: f64) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    if z0 == z1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (v, e) = panel(&mut f, z0, z1)?;
    let mut parts = vec![(z0, z1, v, e)];
    loop {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        if total_err <= tol {
            return Ok(parts.iter().map(|p| p.2).sum());
        }
        if parts.len() >= MAX_INTERVALS || !total_err.is_finite() {
            return Err(Error::QuadratureFailure { estimate: total_err });
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .unwrap();
        let (a, b, _, _) = parts.swap_remove(i);
        let m = 0.5 * (a + b);
        let (v1, e1) = panel(&mut f, a, m)?;
        let (v2, e2) = panel(&mut f, m, b)?;
        parts.push((a, m, v1, e1));
        parts.push((m, b, v2, e2));
    }
}

/// ∫ along the polyline through `points`.
pub fn polyline<F>(mut f: F, points: &[Complex64], tol: f64) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let n = points.len().saturating_sub(1).max(1) as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for w in points.windows(2) {
        acc += segment(&mut f, w[0], w[1], tol / n)?;
    }
    Ok(acc)
}
