//! Straightforward reimplementations of the coefficient recurrences in plain
//! complex arithmetic, used as oracles for small n.

use num_complex::Complex64;
use std::f64::consts::PI;

pub fn toy(n_max: usize) -> Vec<f64> {
    let mut a = vec![0.0; n_max + 1];
    a[1] = 1.0;
    a[2] = 1.0;
    for n in 3..=n_max {
        let h = n as f64 / 2.0;
        a[n] = (h - 1.0) * a[n - 2] + (h - 1.5) * a[n - 3];
    }
    a
}

pub fn separated(sigma: f64, n_max: usize) -> Vec<f64> {
    let s = 2.0 * sigma / (1.0 + 3.0 * sigma);
    let mut a = vec![1.0];
    for n in 1..=n_max {
        let mut acc = 0.0;
        for j in 0..n {
            acc += (j as f64 + s) * a[j] * a[n - 1 - j];
        }
        a.push(acc);
    }
    a
}

/// Taylor coefficients of (1 + x)^{−s1}(1 − x)^{−s2} by direct convolution.
pub fn series(s1: f64, s2: f64, n: usize) -> Vec<f64> {
    let binom = |s: f64, sign: f64| {
        let mut b = vec![1.0];
        for i in 0..n {
            let prev = b[i];
            b.push(prev * sign * (s + i as f64) / (i + 1) as f64);
        }
        b
    };
    let b1 = binom(s1, -1.0);
    let b2 = binom(s2, 1.0);
    (0..=n).map(|k| (0..=k).map(|i| b1[i] * b2[k - i]).sum()).collect()
}

pub fn coalescing(s1: f64, s2: f64, a: f64, beta: f64, ell: usize, m: usize, n_max: usize) -> Vec<Complex64> {
    let sig = s1 + s2;
    let x = Complex64::i() * Complex64::from_polar(1.0, -3.0 * PI * sig) / (a.powf(3.0 * sig) * (1.0 + 3.0 * sig));
    let f = series(s1, s2, n_max / ell);
    let zero = Complex64::new(0.0, 0.0);
    let e: Vec<Complex64> = (0..=n_max)
        .map(|n| {
            if n % ell != 0 {
                zero
            } else if n == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                beta.powi((n / ell) as i32) * x.powf(n as f64 / m as f64) * f[n / ell]
            }
        })
        .collect();
    let w0 = 2.0 * sig * ell as f64;
    let mut aa: Vec<Complex64> = vec![];
    for n in 0..=n_max {
        if n == 0 {
            aa.push(Complex64::new(1.0, 0.0));
            continue;
        }
        let mut acc = zero;
        for j in 0..=n {
            acc += e[j] * e[n - j];
        }
        if n >= m {
            for k in 0..=n - m {
                let p = n - m - k;
                let mut c = zero;
                for j in 0..=p {
                    c += (j as f64 + w0) / m as f64 * aa[j] * aa[p - j];
                }
                acc += e[k] * c;
            }
        }
        aa.push(acc);
    }
    aa
}
