use coalesce::gamma::ln_gamma_real;
use coalesce::recurrence::*;
use coalesce::{CPoint, Sigma};
use std::f64::consts::PI;

fn s(n: i64, d: i64) -> Sigma {
    Sigma::new(n, d)
}

#[test]
fn toy_normalised_by_gamma_half_n_settles() {
    let seq = toy_recurrence(800).unwrap();
    let h = |n: usize| (seq.ln(n).unwrap().re - ln_gamma_real(n as f64 / 2.0) - (2.0 * n as f64).sqrt()).exp();
    let drift = (h(800) / h(400) - 1.0).abs();
    assert!(drift < 1e-3, "drift {drift}");
}

#[test]
fn toy_growth_exponents_from_fit() {
    let seq = toy_recurrence(2000).unwrap();
    let fit = fit_divergence(&seq, 2, (1000, 2000)).unwrap();
    assert!((fit.mu[0].re - 2f64.sqrt()).abs() < 1e-3, "{:?}", fit.mu);
    assert!((fit.gamma.re + 1.0).abs() < 5e-3, "{}", fit.gamma);
}

#[test]
fn omega_values() {
    let o3 = omega_separated(s(1, 3)).unwrap();
    assert!((o3.omega - 0.351).abs() < 0.005);
    assert!(o3.error < 1e-6);
    let o6 = omega_separated(s(1, 6)).unwrap();
    assert!((o6.omega - 0.2529).abs() < 1e-3, "{o6:?}");
}

#[test]
fn set_a_fit_recovers_analytic_constants() {
    let seq = inner_coalescing(s(3, 24), s(5, 24), 1.0, 1.0, 1, 2, 2000).unwrap();
    let fit = fit_divergence(&seq, 2, (1000, 2000)).unwrap();
    let (_, g) = analytic_mu_gamma(s(3, 24), s(5, 24), 1.0, 1.0).unwrap();
    assert!((fit.mu[0] - CPoint::from_polar(0.25, -PI / 4.0)).norm() < 1e-3);
    assert!((fit.gamma - g).norm() < 1e-3);
    assert!(fit.mu[0].re > 0.0);
    assert!(!fit.alternating_sign);
}

#[test]
fn set_b_needs_the_alternating_ansatz() {
    let seq = inner_coalescing(s(6, 24), s(2, 24), 1.0, 1.0, 1, 2, 2000).unwrap();
    let fit = fit_divergence(&seq, 2, (1000, 2000)).unwrap();
    assert!(fit.alternating_sign);
    let (mu, g) = analytic_mu_gamma(s(6, 24), s(2, 24), 1.0, 1.0).unwrap();
    assert!((fit.mu[0] - mu).norm() < 1e-3, "{:?} {mu}", fit.mu);
    assert!((fit.gamma - g).norm() < 1e-3);
    let cc = omega_cc(s(6, 24), s(2, 24), 1.0, 1.0, 1, 2, OmegaCcOptions::default()).unwrap();
    assert!(cc.alternating_sign);
    assert!((cc.omega - fit.omega).abs() < 1e-2 * cc.omega);
}

#[test]
fn omega_cc_small_beta_approaches_single() {
    let cc = omega_cc(s(1, 6), s(1, 6), 0.5, 0.1, 1, 2, OmegaCcOptions::default()).unwrap();
    let single = omega_separated(s(1, 3)).unwrap().omega;
    assert!((cc.omega - single).abs() < 0.03 * single);
    assert_eq!(cc.class_limits[1], None);
}

#[test]
fn omega_cc_large_beta_matching() {
    let om16 = omega_separated(s(1, 6)).unwrap().omega;
    let mut last = f64::INFINITY;
    for b2 in [2.0f64, 3.0, 4.0] {
        let beta = b2.sqrt();
        let cc = omega_cc(s(1, 6), s(1, 6), 0.5, beta, 1, 2, OmegaCcOptions::default()).unwrap();
        let law = 2.0 * (0.5 / (9.0 * b2)).powf(1.0 / 3.0) * (PI * b2 / 4.0).exp() * om16;
        let d = (cc.omega / law - 1.0).abs();
        assert!(d < last);
        last = d;
    }
    assert!(last < 0.05);
}

#[test]
fn omega_cc_without_enough_terms_reports_nonconvergence() {
    let r = omega_cc(s(3, 24), s(5, 24), 1.0, 1.0, 1, 2, OmegaCcOptions { n_max: 1000, ..Default::default() });
    assert!(matches!(r, Err(coalesce::Error::NonConvergence { .. })), "{r:?}");
}

#[test]
fn general_m_sequence_and_fit() {
    // σ1 + σ2 = 1/2 gives ℓ/m = 2/5; the classes grow at different algebraic
    // rates, which a single shared γ cannot represent
    let seq = inner_coalescing(s(1, 4), s(1, 4), 0.5, 0.5, 2, 5, 2000).unwrap();
    assert!(seq.ln(2000).unwrap().re.is_finite());
    let r = fit_divergence(&seq, 5, (1000, 2000));
    assert!(matches!(r, Err(coalesce::Error::NonConvergence { .. })), "{r:?}");
}
