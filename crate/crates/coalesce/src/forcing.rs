//! Forcing functions q_s(w), their local data and series coefficients.
//!
//! Every complex power is principal, so each factor (w + a_k)^σ has its cut
//! on the negative real axis to the left of its own singularity. A point that
//! lies exactly on a cut is read from the upper side.

use crate::error::{Error, Result};
use num_complex::Complex64;
use num_rational::Rational64;
use std::f64::consts::PI;

pub type CPoint = Complex64;
pub type Sigma = Rational64;

/// Default exclusion radius around singular points.
pub const EXCLUSION_RADIUS: f64 = 1e-12;

pub fn sigma_f64(s: Sigma) -> f64 {
    *s.numer() as f64 / *s.denom() as f64
}

/// Parse `p/q` or an integer.
pub fn parse_sigma(text: &str) -> Result<Sigma> {
    let t = text.trim();
    let bad = || Error::InvalidSpec(format!("cannot parse rational '{t}'"));
    match t.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Sigma::new(p, q))
        }
        None => t.parse::<i64>().map(Sigma::from_integer).map_err(|_| bad()),
    }
}

/// Maps a signed-zero imaginary part to +0 so cut points read from above.
#[inline]
pub(crate) fn upper(z: CPoint) -> CPoint {
    CPoint::new(z.re, z.im + 0.0)
}

#[inline]
pub(crate) fn cpow(z: CPoint, s: f64) -> CPoint {
    let z = upper(z);
    if z == CPoint::new(0.0, 0.0) {
        return CPoint::new(0.0, 0.0);
    }
    (s * z.ln()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForcingSpec {
    Single { a: f64, sigma: Sigma },
    Separated { a1: f64, a2: f64, sigma1: Sigma, sigma2: Sigma },
    Coalescing { a: f64, beta: f64, sigma1: Sigma, sigma2: Sigma, ell: u32, m: u32 },
}

fn check_sigma(s: Sigma) -> Result<()> {
    if s <= Sigma::from_integer(0) || s >= Sigma::from_integer(1) {
        return Err(Error::InvalidSpec(format!("sigma {s} outside (0, 1)")));
    }
    Ok(())
}

/// ℓ/m = 1/(1 + 3σ) in lowest terms.
pub fn ell_m(sigma: Sigma) -> (u32, u32) {
    let r = Sigma::from_integer(1) / (Sigma::from_integer(1) + Sigma::from_integer(3) * sigma);
    (*r.numer() as u32, *r.denom() as u32)
}

impl ForcingSpec {
    pub fn single(a: f64, sigma: Sigma) -> Result<Self> {
        check_sigma(sigma)?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidSpec("a must be positive".into()));
        }
        Ok(ForcingSpec::Single { a, sigma })
    }

    pub fn separated(a1: f64, a2: f64, sigma1: Sigma, sigma2: Sigma) -> Result<Self> {
        check_sigma(sigma1)?;
        check_sigma(sigma2)?;
        if !(a2 > 0.0 && a1 > a2 && a1.is_finite()) {
            return Err(Error::InvalidSpec("need 0 < a2 < a1".into()));
        }
        Ok(ForcingSpec::Separated { a1, a2, sigma1, sigma2 })
    }

    /// Coalescing pair at −a ∓ ε^{ℓ/m}β; ℓ and m follow from σ1 + σ2.
    pub fn coalescing(a: f64, beta: f64, sigma1: Sigma, sigma2: Sigma) -> Result<Self> {
        check_sigma(sigma1)?;
        check_sigma(sigma2)?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidSpec("a must be positive".into()));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidSpec("beta must be non-negative".into()));
        }
        let (ell, m) = ell_m(sigma1 + sigma2);
        Ok(ForcingSpec::Coalescing { a, beta, sigma1, sigma2, ell, m })
    }

    /// Total exponent σ of the numerator w^σ.
    pub fn sigma_total(&self) -> Sigma {
        match *self {
            ForcingSpec::Single { sigma, .. } => sigma,
            ForcingSpec::Separated { sigma1, sigma2, .. }
            | ForcingSpec::Coalescing { sigma1, sigma2, .. } => sigma1 + sigma2,
        }
    }

    /// Singular points as (a_k, σ_k), with the singularity at w = −a_k.
    pub fn factors(&self, epsilon: f64) -> Vec<(f64, f64)> {
        match *self {
            ForcingSpec::Single { a, sigma } => vec![(a, sigma_f64(sigma))],
            ForcingSpec::Separated { a1, a2, sigma1, sigma2 } => {
                vec![(a1, sigma_f64(sigma1)), (a2, sigma_f64(sigma2))]
            }
            ForcingSpec::Coalescing { a, beta, sigma1, sigma2, ell, m } => {
                let d = epsilon.powf(ell as f64 / m as f64) * beta;
                vec![(a + d, sigma_f64(sigma1)), (a - d, sigma_f64(sigma2))]
            }
        }
    }
}

/// Evaluator with the factor list resolved once.
#[derive(Debug, Clone)]
pub struct Forcing {
    pub spec: ForcingSpec,
    pub epsilon: f64,
    pub radius: f64,
    total: f64,
    factors: Vec<(f64, f64)>,
}

impl Forcing {
    pub fn new(spec: ForcingSpec, epsilon: f64) -> Self {
        let factors = spec.factors(epsilon);
        let total = factors.iter().map(|f| f.1).sum();
        Forcing { spec, epsilon, radius: EXCLUSION_RADIUS, total, factors }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn factors(&self) -> &[(f64, f64)] {
        &self.factors
    }

    fn guard(&self, w: CPoint) -> Result<()> {
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::DomainError("non-finite w".into()));
        }
        for &(ak, _) in &self.factors {
            if (w + ak).norm() < self.radius {
                return Err(Error::SingularityHit { re: w.re, im: w.im });
            }
        }
        Ok(())
    }

    pub fn q(&self, w: CPoint) -> Result<CPoint> {
        self.guard(w)?;
        Ok(self.q_unchecked(w))
    }

    pub(crate) fn q_unchecked(&self, w: CPoint) -> CPoint {
        let w = upper(w);
        if w == CPoint::new(0.0, 0.0) {
            return w;
        }
        let mut l = self.total * w.ln();
        for &(ak, sk) in &self.factors {
            l -= sk * upper(w + ak).ln();
        }
        l.exp()
    }

    /// q'/q.
    fn log_derivative(&self, w: CPoint) -> (CPoint, CPoint) {
        let mut l = self.total / w;
        let mut lp = -self.total / (w * w);
        for &(ak, sk) in &self.factors {
            let d = w + ak;
            l -= sk / d;
            lp += sk / (d * d);
        }
        (l, lp)
    }

    fn guard_zero(&self, w: CPoint) -> Result<()> {
        if w.norm() < self.radius {
            return Err(Error::SingularityHit { re: w.re, im: w.im });
        }
        Ok(())
    }

    pub fn dq(&self, w: CPoint) -> Result<CPoint> {
        self.guard(w)?;
        self.guard_zero(w)?;
        Ok(self.q_unchecked(w) * self.log_derivative(w).0)
    }

    pub fn d2q(&self, w: CPoint) -> Result<CPoint> {
        self.guard(w)?;
        self.guard_zero(w)?;
        let (l, lp) = self.log_derivative(w);
        Ok(self.q_unchecked(w) * (l * l + lp))
    }

    /// (q, q', q'') in one pass.
    pub fn q_all(&self, w: CPoint) -> Result<(CPoint, CPoint, CPoint)> {
        self.guard(w)?;
        self.guard_zero(w)?;
        let q = self.q_unchecked(w);
        let (l, lp) = self.log_derivative(w);
        Ok((q, q * l, q * (l * l + lp)))
    }

    /// Coefficient c_k of q_s ~ c_k (w + a_k)^{−σ_k}, continued from the upper half-plane.
    pub fn local_coefficient(&self, k: usize) -> CPoint {
        let (ak, _) = self.factors[k];
        let mut c = cpow(CPoint::new(-ak, 0.0), self.total);
        for (j, &(aj, sj)) in self.factors.iter().enumerate() {
            if j != k {
                c /= cpow(CPoint::new(aj - ak, 0.0), sj);
            }
        }
        c
    }
}

pub fn eval_qs(spec: &ForcingSpec, w: CPoint, epsilon: f64) -> Result<CPoint> {
    Forcing::new(*spec, epsilon).q(w)
}

pub fn eval_dqs(spec: &ForcingSpec, w: CPoint, epsilon: f64) -> Result<CPoint> {
    Forcing::new(*spec, epsilon).dq(w)
}

/// Pochhammer ratios (s)_k / k! for k = 0..=n.
fn rising_over_factorial(s: f64, n: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    for k in 1..=n {
        let prev = p[k - 1];
        p.push(prev * (s + k as f64 - 1.0) / k as f64);
    }
    p
}

/// f_0..=f_n of (1 + x)^{−σ1}(1 − x)^{−σ2} = Σ f_n x^n.
pub fn series_f_table(n: usize, sigma1: Sigma, sigma2: Sigma) -> Vec<f64> {
    let p1 = rising_over_factorial(sigma_f64(sigma1), n);
    let p2 = rising_over_factorial(sigma_f64(sigma2), n);
    (0..=n)
        .map(|k| {
            // pair k with n−k so symmetric inputs cancel exactly
            let mut acc = 0.0;
            let mut i = 0;
            while i < k - i {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                let t = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
                acc += s * p1[i] * p2[k - i] + t * p1[k - i] * p2[i];
                i += 1;
            }
            if i == k - i {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                acc += s * p1[i] * p2[i];
            }
            acc
        })
        .collect()
}

pub fn series_f(n: usize, sigma1: Sigma, sigma2: Sigma) -> f64 {
    series_f_table(n, sigma1, sigma2)[n]
}

fn coalescing_parts(spec: &ForcingSpec) -> Result<(f64, f64, Sigma, Sigma, u32, u32)> {
    match *spec {
        ForcingSpec::Coalescing { a, beta, sigma1, sigma2, ell, m } => Ok((a, beta, sigma1, sigma2, ell, m)),
        _ => Err(Error::InvalidSpec("coalescing spec required".into())),
    }
}

/// e_n = (β/(w+a))^n f_n.
pub fn eval_e(n: usize, w: CPoint, spec: &ForcingSpec) -> Result<CPoint> {
    let (a, beta, s1, s2, _, _) = coalescing_parts(spec)?;
    if (w + a).norm() < EXCLUSION_RADIUS {
        return Err(Error::SingularityHit { re: w.re, im: w.im });
    }
    Ok((beta / (w + a)).powu(n as u32) * series_f(n, s1, s2))
}

/// c = (−a)^σ with Arg(−a) = π.
pub fn merged_c(a: f64, sigma: f64) -> CPoint {
    CPoint::from_polar(a.powf(sigma), PI * sigma)
}

/// X = i / (c³ (1 + 3σ)).
pub fn merged_x(a: f64, sigma: Sigma) -> CPoint {
    let s = sigma_f64(sigma);
    CPoint::i() / (merged_c(a, s).powu(3) * (1.0 + 3.0 * s))
}

/// ê_0..=ê_n for a coalescing spec.
pub fn ehat_table(n: usize, spec: &ForcingSpec) -> Result<Vec<CPoint>> {
    let (a, beta, s1, s2, ell, m) = coalescing_parts(spec)?;
    let ell = ell as usize;
    let f = series_f_table(n / ell, s1, s2);
    let lx = merged_x(a, s1 + s2).ln();
    Ok((0..=n)
        .map(|k| {
            if k % ell != 0 {
                return CPoint::new(0.0, 0.0);
            }
            let j = k / ell;
            let xpow = if k == 0 { CPoint::new(1.0, 0.0) } else { (lx * (k as f64 / m as f64)).exp() };
            beta.powi(j as i32) * xpow * f[j]
        })
        .collect())
}

pub fn eval_ehat(n: usize, spec: &ForcingSpec) -> Result<CPoint> {
    Ok(ehat_table(n, spec)?[n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(p: i64, q: i64) -> Sigma {
        Sigma::new(p, q)
    }

    #[test]
    fn single_on_real_axis() {
        let s = ForcingSpec::single(1.0, r(1, 3)).unwrap();
        let q = eval_qs(&s, CPoint::new(1.0, 0.0), 0.1).unwrap();
        assert!((q.re - 0.5f64.powf(1.0 / 3.0)).abs() < 1e-15 && q.im.abs() < 1e-15);
        assert!((q.re - 0.793_700_525_984_1).abs() < 1e-12);
    }

    #[test]
    fn far_field_limit() {
        let s = ForcingSpec::separated(0.8, 0.2, r(1, 4), r(1, 4)).unwrap();
        let q = eval_qs(&s, CPoint::new(1e9, 0.0), 0.1).unwrap();
        assert!((q - 1.0).norm() < 1e-8);
        let c = ForcingSpec::coalescing(0.5, 1.0, r(1, 6), r(1, 6)).unwrap();
        let q = eval_qs(&c, CPoint::new(1e9, 0.0), 0.075).unwrap();
        assert!((q - 1.0).norm() < 1e-8);
    }

    #[test]
    fn singularity_rejected() {
        let s = ForcingSpec::single(0.5, r(1, 3)).unwrap();
        let e = eval_qs(&s, CPoint::new(-0.5, 1e-13), 0.1).unwrap_err();
        assert!(matches!(e, Error::SingularityHit { .. }));
    }

    #[test]
    fn lowest_terms_ell_m() {
        assert_eq!(ell_m(r(1, 3)), (1, 2));
        assert_eq!(ell_m(r(1, 2)), (2, 5));
        assert_eq!(ell_m(r(1, 4)), (4, 7));
        let c = ForcingSpec::coalescing(1.0, 1.0, r(3, 24), r(5, 24)).unwrap();
        assert!(matches!(c, ForcingSpec::Coalescing { ell: 1, m: 2, .. }));
    }

    #[test]
    fn product_matches_series() {
        let spec = ForcingSpec::coalescing(0.5, 1.0, r(1, 6), r(1, 6)).unwrap();
        let eps = 0.075;
        let w = CPoint::new(0.5, 0.0);
        let exact = eval_qs(&spec, w, eps).unwrap();
        let q0 = cpow(w / (w + 0.5), 1.0 / 3.0);
        let mut sum = CPoint::new(0.0, 0.0);
        for n in 0..10 {
            sum += eps.powf(n as f64 / 2.0) * eval_e(n, w, &spec).unwrap();
        }
        let rel = (q0 * sum - exact).norm() / exact.norm();
        assert!(rel < 1e-6, "rel {rel}");
    }

    #[test]
    fn series_f_closed_forms() {
        assert_eq!(series_f(0, r(1, 6), r(1, 6)), 1.0);
        assert_eq!(series_f(1, r(1, 6), r(1, 6)), 0.0);
        assert!((series_f(2, r(1, 6), r(1, 6)) - 1.0 / 6.0).abs() < 1e-15);
        assert!((series_f(2, r(3, 24), r(5, 24)) - 49.0 / 288.0).abs() < 1e-15);
        assert!((series_f(1, r(3, 24), r(5, 24)) - 2.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn series_f_matches_taylor_coefficients() {
        // coefficients of (1+x)^{-s1}(1-x)^{-s2} from a Cauchy integral on |x| = 1/2
        let (s1, s2) = (0.3, 0.15);
        let f = series_f_table(8, r(3, 10), r(3, 20));
        let npts = 256;
        for (n, &fv) in f.iter().enumerate() {
            let mut acc = CPoint::new(0.0, 0.0);
            for j in 0..npts {
                let th = 2.0 * PI * j as f64 / npts as f64;
                let x = CPoint::from_polar(0.5, th);
                let g = cpow(1.0 + x, -s1) * cpow(1.0 - x, -s2);
                acc += g * CPoint::from_polar(2f64.powi(n as i32), -(n as f64) * th);
            }
            acc /= npts as f64;
            assert!((acc.re - fv).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn e_and_ehat_examples() {
        let spec = ForcingSpec::coalescing(0.5, 1.0, r(1, 6), r(1, 6)).unwrap();
        assert_eq!(eval_e(0, CPoint::new(0.3, 0.2), &spec).unwrap(), CPoint::new(1.0, 0.0));
        assert_eq!(eval_e(1, CPoint::new(0.3, 0.2), &spec).unwrap().norm(), 0.0);
        let e2 = eval_e(2, CPoint::new(0.0, 0.0), &spec).unwrap();
        assert!((e2 - 2.0 / 3.0).norm() < 1e-15);
        assert!(eval_e(2, CPoint::new(-0.5, 0.0), &spec).is_err());
        assert_eq!(eval_ehat(0, &spec).unwrap(), CPoint::new(1.0, 0.0));
        assert_eq!(eval_ehat(1, &spec).unwrap().norm(), 0.0);
        let eh2 = eval_ehat(2, &spec).unwrap();
        assert!((eh2 - CPoint::new(0.0, -1.0 / 6.0)).norm() < 1e-15, "{eh2}");
    }

    #[test]
    fn merged_x_value() {
        let x = merged_x(0.5, r(1, 3));
        assert!((x - CPoint::new(0.0, -1.0)).norm() < 1e-15);
        let c = merged_c(0.5, 1.0 / 3.0);
        assert!((c.arg() - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ehat_skips_non_multiples_of_ell() {
        let spec = ForcingSpec::coalescing(0.5, 1.0, r(1, 4), r(1, 4)).unwrap();
        let t = ehat_table(10, &spec).unwrap();
        for (k, v) in t.iter().enumerate() {
            if k % 2 == 1 {
                assert_eq!(v.norm(), 0.0);
            }
        }
        assert!(t[2].norm() > 0.0 || series_f(1, r(1, 4), r(1, 4)) == 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let spec = ForcingSpec::separated(0.75, 0.25, r(1, 6), r(1, 6)).unwrap();
        let f = Forcing::new(spec, 0.1);
        let w = CPoint::new(0.7, 0.3);
        let h = 1e-5;
        let (_, d1, d2) = f.q_all(w).unwrap();
        let fd1 = (f.q(w + h).unwrap() - f.q(w - h).unwrap()) / (2.0 * h);
        let fd2 = (f.dq(w + h).unwrap() - f.dq(w - h).unwrap()) / (2.0 * h);
        assert!((d1 - fd1).norm() < 1e-9);
        assert!((d2 - fd2).norm() < 1e-8);
    }

    #[test]
    fn local_coefficient_single() {
        let f = Forcing::new(ForcingSpec::single(0.5, r(1, 3)).unwrap(), 0.1);
        let c = f.local_coefficient(0);
        assert!((c - merged_c(0.5, 1.0 / 3.0)).norm() < 1e-15);
        // q ~ c (w + a)^{-σ} approached from above
        let d = CPoint::new(1e-7, 1e-7);
        let q = f.q(CPoint::new(-0.5, 0.0) + d).unwrap();
        assert!((q / cpow(d, -1.0 / 3.0) - c).norm() < 1e-5);
    }

    proptest! {
        #[test]
        fn f_reflection_symmetry(p1 in 1i64..23, p2 in 1i64..23, n in 0usize..13) {
            let s1 = r(p1, 24);
            let s2 = r(p2, 24);
            let a = series_f(n, s1, s2);
            let b = series_f(n, s2, s1);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a - sign * b).abs() <= 1e-14 * (1.0 + a.abs()));
        }

        #[test]
        fn series_converges_away_from_pair(x in 0.05f64..3.0, y in 0.0f64..2.0) {
            let spec = ForcingSpec::coalescing(0.5, 1.0, r(1, 6), r(1, 6)).unwrap();
            let eps: f64 = 0.01;
            let w = CPoint::new(x, y);
            let delta = eps.sqrt();
            prop_assume!((w + 0.5).norm() > 5.0 * delta);
            let exact = eval_qs(&spec, w, eps).unwrap();
            let q0 = cpow(w / (w + 0.5), 1.0 / 3.0);
            let mut sum = CPoint::new(0.0, 0.0);
            for n in 0..=15 {
                sum += eps.powf(n as f64 / 2.0) * eval_e(n, w, &spec).unwrap();
            }
            prop_assert!((q0 * sum - exact).norm() < 1e-8);
        }

        #[test]
        fn arg_continuous_in_upper_half_plane(x in -2.0f64..2.0, y in 0.01f64..2.0) {
            let f = Forcing::new(ForcingSpec::separated(0.8, 0.2, r(1, 4), r(1, 4)).unwrap(), 0.1);
            let w = CPoint::new(x, y);
            let h = CPoint::new(1e-6, 1e-6);
            let a = f.q(w).unwrap();
            let b = f.q(w + h).unwrap();
            prop_assert!((b / a).arg().abs() < 1e-3);
        }
    }
}
