//! Complex numbers with a separate binary exponent, for sequences whose
//! magnitude leaves the f64 range.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul};

const HI: f64 = 1e150;
const LO: f64 = 1e-150;

/// value = mant · 2^exp2
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mant: Complex64,
    pub exp2: i64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mant: Complex64 { re: 0.0, im: 0.0 }, exp2: 0 };

    pub fn new(z: Complex64) -> Self {
        Scaled { mant: z, exp2: 0 }.renorm()
    }

    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    fn renorm(self) -> Self {
        let s = self.mant.re.abs().max(self.mant.im.abs());
        if s == 0.0 || (LO..=HI).contains(&s) {
            return self;
        }
        let k = s.log2().floor() as i64;
        // split the shift so subnormal inputs do not need 2^1074 in one factor
        let h = -k / 2;
        let m = self.mant * (h as f64).exp2() * ((-k - h) as f64).exp2();
        Scaled { mant: m, exp2: self.exp2 + k }
    }

    pub fn scale(self, x: f64) -> Self {
        Scaled { mant: self.mant * x, exp2: self.exp2 }.renorm()
    }

    /// Value as f64 pair, or `None` if it overflows.
    pub fn to_complex(&self) -> Option<Complex64> {
        if self.is_zero() {
            return Some(self.mant);
        }
        if self.exp2 > 1023 || self.exp2 < -1100 {
            return if self.exp2 < 0 { Some(Complex64::new(0.0, 0.0)) } else { None };
        }
        let v = self.mant * (self.exp2 as f64).exp2();
        (v.re.is_finite() && v.im.is_finite()).then_some(v)
    }

    /// Principal complex logarithm, ln|v| + i Arg v.
    pub fn ln(&self) -> Complex64 {
        self.mant.ln() + Complex64::new(self.exp2 as f64 * std::f64::consts::LN_2, 0.0)
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, o: Scaled) -> Scaled {
        Scaled { mant: self.mant * o.mant, exp2: self.exp2 + o.exp2 }.renorm()
    }
}

impl Add for Scaled {
    type Output = Scaled;
    fn add(self, o: Scaled) -> Scaled {
        if o.is_zero() {
            return self;
        }
        if self.is_zero() {
            return o;
        }
        let (big, small) = if self.exp2 >= o.exp2 { (self, o) } else { (o, self) };
        let d = small.exp2 - big.exp2;
        if d < -1200 {
            return big;
        }
        let sm = if d == 0 { small.mant } else { small.mant * (d as f64).exp2() };
        Scaled { mant: big.mant + sm, exp2: big.exp2 }.renorm()
    }
}

impl AddAssign for Scaled {
    fn add_assign(&mut self, o: Scaled) {
        *self = *self + o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values_are_plain_arithmetic() {
        let a = Scaled::new(Complex64::new(1.5, -0.25));
        let b = Scaled::new(Complex64::new(0.3, 2.0));
        let p = a * b + a;
        let direct = Complex64::new(1.5, -0.25) * Complex64::new(0.3, 2.0) + Complex64::new(1.5, -0.25);
        assert_eq!(p.to_complex().unwrap(), direct);
        assert_eq!(p.exp2, 0);
    }

    #[test]
    fn huge_products_keep_log() {
        let mut x = Scaled::new(Complex64::new(1e100, 1e100));
        for _ in 0..20 {
            x = x * x.scale(1.0);
            x = Scaled { mant: x.mant, exp2: x.exp2 / 2 };
        }
        assert!(x.ln().re.is_finite());
        let y = Scaled::new(Complex64::new(1e300, 0.0)) * Scaled::new(Complex64::new(1e300, 0.0));
        assert!(y.to_complex().is_none());
        assert!((y.ln().re - 600.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn subnormal_inputs_normalise() {
        let t = Scaled::new(Complex64::new(1e-320, 0.0));
        assert!(t.mant.re.is_finite() && t.mant.re >= 1.0 && t.mant.re < 2.0);
        let p = t * t;
        assert!((p.ln().re + 640.0 * 10f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn addition_aligns_exponents() {
        let big = Scaled::new(Complex64::new(1e200, 0.0)) * Scaled::new(Complex64::new(1e200, 0.0));
        let s = big + Scaled::new(Complex64::new(1.0, 0.0));
        assert_eq!(s.ln(), big.ln());
        let t = big + big;
        assert!((t.ln().re - big.ln().re - 2f64.ln()).abs() < 1e-12);
    }
}
