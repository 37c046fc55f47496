//! The acceptance criteria, each reported as one pass/fail line.

use super::config::ConfigMap;
use super::naive;
use super::sweep::{self, amplitude_row, matching_law, Experiment, OmegaTable, SweepConfig};
use crate::error::Result;
use crate::forcing::{sigma_f64, CPoint, ForcingSpec, Sigma};
use crate::gamma::ln_gamma_real;
use crate::recurrence::{self, OmegaCcOptions};
use crate::{ode, singulant};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

/// Targets and numerical settings. The defaults are the published values.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceConfig {
    pub omega13_target: f64,
    pub omega13_tol: f64,
    /// End of the integration interval for ODE-backed criteria.
    pub w_end: f64,
    pub ode_tol: f64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig { omega13_target: 0.351, omega13_tol: 0.005, w_end: 40.0, ode_tol: 1e-12 }
    }
}

impl AcceptanceConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let d = Self::default();
        Ok(AcceptanceConfig {
            omega13_target: map.get_or("omega13_target", d.omega13_target)?,
            omega13_tol: map.get_or("omega13_tol", d.omega13_tol)?,
            w_end: map.get_or("w_end", d.w_end)?,
            ode_tol: map.get_or("tol", d.ode_tol)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub tags: &'static [&'static str],
    pub limit: Duration,
    run: fn(&AcceptanceConfig) -> Result<Outcome>,
}

impl Criterion {
    pub fn matches(&self, filter: &str) -> bool {
        let f = filter.to_ascii_lowercase();
        if f.parse::<u32>().is_ok() {
            return f == self.id.to_string();
        }
        self.name.contains(&f) || self.tags.iter().any(|t| *t == f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportLine {
    pub id: u32,
    pub name: &'static str,
    pub outcome: Outcome,
    pub elapsed: Duration,
}

impl std::fmt::Display for ReportLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.outcome.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{:>2}] {}: {} ({:.2} s)", self.id, self.name, self.outcome.detail, self.elapsed.as_secs_f64())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub lines: Vec<ReportLine>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(|l| l.outcome.pass)
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "omega-third", tags: &["omega", "recurrence"], limit: secs(5), run: omega_third },
        Criterion { id: 2, name: "toy-divergence", tags: &["recurrence"], limit: secs(1), run: toy_divergence },
        Criterion { id: 3, name: "fit-vs-analytic", tags: &["fit", "recurrence"], limit: secs(10), run: fit_vs_analytic },
        Criterion { id: 4, name: "branch-structure", tags: &["fit", "recurrence"], limit: secs(60), run: branch_structure },
        Criterion { id: 5, name: "beta-zero-matching", tags: &["omega", "recurrence"], limit: secs(60), run: beta_zero },
        Criterion { id: 6, name: "beta-infinity-matching", tags: &["omega", "recurrence"], limit: secs(60), run: beta_infinity },
        Criterion { id: 7, name: "fig3-separated", tags: &["ode", "amplitude"], limit: secs(120), run: fig3 },
        Criterion { id: 8, name: "fig10-coalescing", tags: &["ode", "amplitude"], limit: secs(300), run: fig10 },
        Criterion { id: 9, name: "singulant-oracle", tags: &["singulant"], limit: secs(60), run: singulant_oracle },
        Criterion { id: 10, name: "stokes-geometry", tags: &["singulant", "stokes"], limit: secs(60), run: stokes_geometry },
        Criterion { id: 11, name: "wavelength", tags: &["ode"], limit: secs(60), run: wavelength },
        Criterion { id: 12, name: "oracle-equivalence", tags: &["recurrence"], limit: secs(10), run: oracle_equivalence },
    ]
}

/// Runs every criterion matching `filter` (id, name fragment or tag), or all of them.
pub fn run_acceptance(cfg: &AcceptanceConfig, filter: Option<&str>, mut on_line: impl FnMut(&ReportLine)) -> Report {
    let mut report = Report::default();
    for c in criteria() {
        if let Some(f) = filter {
            if !c.matches(f) {
                continue;
            }
        }
        let t = Instant::now();
        let mut outcome = (c.run)(cfg).unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let elapsed = t.elapsed();
        if elapsed > c.limit {
            outcome.pass = false;
            outcome.detail += &format!("; exceeded {} s", c.limit.as_secs());
        }
        let line = ReportLine { id: c.id, name: c.name, outcome, elapsed };
        on_line(&line);
        report.lines.push(line);
    }
    report
}

fn s(n: i64, d: i64) -> Sigma {
    Sigma::new(n, d)
}

fn omega_third(cfg: &AcceptanceConfig) -> Result<Outcome> {
    let est = recurrence::omega_separated_with(s(1, 3), 2000, 1e-3)?;
    let pass = (est.omega - cfg.omega13_target).abs() <= cfg.omega13_tol;
    Ok(Outcome::new(pass, format!("Ω(1/3) = {:.7} ± {:.1e}, target {} ± {}", est.omega, est.error, cfg.omega13_target, cfg.omega13_tol)))
}

fn toy_divergence(_: &AcceptanceConfig) -> Result<Outcome> {
    let seq = recurrence::toy_recurrence(800)?;
    let h = |n: usize| -> f64 {
        let ln = seq.ln(n).expect("toy terms are nonzero");
        (ln.re - ln_gamma_real(n as f64 / 2.0) - (2.0 * n as f64).sqrt()).exp()
    };
    let drift = (h(800) / h(400) - 1.0).abs();
    Ok(Outcome::new(drift < 1e-3, format!("A_n/(Γ(n/2)e^√(2n)) drift 400→800 = {drift:.3e} (limit 1e-3)")))
}

fn fit_vs_analytic(_: &AcceptanceConfig) -> Result<Outcome> {
    let (s1, s2) = (s(3, 24), s(5, 24));
    let seq = recurrence::inner_coalescing(s1, s2, 1.0, 1.0, 1, 2, 2000)?;
    let fit = recurrence::fit_divergence(&seq, 2, (1000, 2000))?;
    let mu_target = CPoint::from_polar(0.25, -PI / 4.0);
    let (_, g_target) = recurrence::analytic_mu_gamma(s1, s2, 1.0, 1.0)?;
    let dmu = (fit.mu[0] - mu_target).norm();
    let dg = (fit.gamma - g_target).norm();
    Ok(Outcome::new(
        dmu < 1e-3 && dg < 1e-3,
        format!("μ₁ = {:.6}, |Δμ₁| = {dmu:.2e}; γ = {:.6}, |Δγ| = {dg:.2e}", fit.mu[0], fit.gamma),
    ))
}

fn branch_structure(_: &AcceptanceConfig) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, s1, s2) in [("a", s(3, 24), s(5, 24)), ("b", s(6, 24), s(2, 24))] {
        let seq = recurrence::inner_coalescing(s1, s2, 1.0, 1.0, 1, 2, 1000)?;
        let (mu, g) = recurrence::analytic_mu_gamma(s1, s2, 1.0, 1.0)?;
        let alt = recurrence::needs_alternating(s1, s2, 1.0, 1.0);
        let mut branches = 0;
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            let hs: Vec<CPoint> = (500..=1000)
                .filter(|n| n % 2 == r)
                .filter_map(|n| recurrence::h_value(&seq, n, 2, g, &[mu], alt))
                .collect();
            if hs.is_empty() {
                continue;
            }
            branches += 1;
            let mags: Vec<f64> = hs.iter().map(|h| h.norm()).collect();
            let args: Vec<f64> = hs.iter().map(|h| h.arg()).collect();
            let spread = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
            let mean = mags.iter().sum::<f64>() / mags.len() as f64;
            worst = worst.max(spread(&mags) / mean).max(spread(&args));
        }
        let ok = branches == 2 && worst < 1e-2;
        pass &= ok;
        parts.push(format!("set ({label}): {branches} branches, tail variation {worst:.2e}"));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn beta_zero(_: &AcceptanceConfig) -> Result<Outcome> {
    let cc = recurrence::omega_cc(s(1, 6), s(1, 6), 0.5, 0.1, 1, 2, OmegaCcOptions::default())?;
    let single = recurrence::omega_separated(s(1, 3))?.omega;
    let rel = (cc.omega - single).abs() / single;
    Ok(Outcome::new(rel < 0.03, format!("Ω^cc(β=0.1) = {:.6}, Ω(1/3) = {single:.6}, rel {rel:.2e} (limit 3%)", cc.omega)))
}

fn beta_infinity(_: &AcceptanceConfig) -> Result<Outcome> {
    let om16 = recurrence::omega_separated(s(1, 6))?.omega;
    let mut ratios = Vec::new();
    for b2 in [2.0f64, 3.0, 4.0] {
        let beta = b2.sqrt();
        let cc = recurrence::omega_cc(s(1, 6), s(1, 6), 0.5, beta, 1, 2, OmegaCcOptions::default())?;
        ratios.push(cc.omega / matching_law(0.5, beta, om16));
    }
    let d: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    let monotone = d[0] > d[1] && d[1] > d[2];
    let pass = d[2] < 0.05 && monotone;
    Ok(Outcome::new(pass, format!("ratios at β² = 2,3,4: {:.4}, {:.4}, {:.4}", ratios[0], ratios[1], ratios[2])))
}

fn ode_cfg(experiment: Experiment, cfg: &AcceptanceConfig) -> SweepConfig {
    SweepConfig { w_end: cfg.w_end, tol: cfg.ode_tol, ..SweepConfig::preset(experiment) }
}

fn errors(sc: &SweepConfig, om: &OmegaTable, a1s: &[f64], column: &str) -> Vec<(f64, Option<f64>)> {
    use rayon::prelude::*;
    let idx = sweep::AMPLITUDE_HEADERS.iter().position(|h| *h == column).unwrap() - 1;
    a1s.par_iter().map(|&a1| (a1, amplitude_row(sc, om, a1).values[idx])).collect()
}

fn fmt_errs(v: &[(f64, Option<f64>)]) -> String {
    v.iter()
        .map(|(a, e)| match e {
            Some(e) => format!("{a:.2}:{:.0}%", 100.0 * e),
            None => format!("{a:.2}:n/a"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn fig3(cfg: &AcceptanceConfig) -> Result<Outcome> {
    let sc = ode_cfg(Experiment::Fig3, cfg);
    let om = OmegaTable::new(sc.sigma1, sc.sigma2)?;
    let good = errors(&sc, &om, &[0.7, 0.75, 0.8, 0.85, 0.9, 0.95], "err_separated");
    let bad = errors(&sc, &om, &[0.52, 0.54], "err_separated");
    let pass = good.iter().all(|(_, e)| e.is_some_and(|e| e < 0.2)) && bad.iter().all(|(_, e)| e.is_some_and(|e| e > 1.0));
    Ok(Outcome::new(pass, format!("separated error [{}] (< 20%); breakdown [{}] (> 100%)", fmt_errs(&good), fmt_errs(&bad))))
}

fn fig10(cfg: &AcceptanceConfig) -> Result<Outcome> {
    let sc = ode_cfg(Experiment::Fig10, cfg);
    let om = OmegaTable::new(sc.sigma1, sc.sigma2)?;
    let close = errors(&sc, &om, &[0.5, 0.52, 0.54, 0.56], "err_coalescing");
    let far = errors(&sc, &om, &[0.75, 0.8, 0.85, 0.9, 0.95], "err_separated");
    let pass = close.iter().all(|(_, e)| e.is_some_and(|e| e < 0.25)) && far.iter().all(|(_, e)| e.is_some_and(|e| e < 0.2));
    Ok(Outcome::new(pass, format!("coalescing error [{}] (< 25%); separated error [{}] (< 20%)", fmt_errs(&close), fmt_errs(&far))))
}

fn singulant_oracle(_: &AcceptanceConfig) -> Result<Outcome> {
    let a = 0.5;
    let spec = ForcingSpec::single(a, s(1, 3))?;
    let mut worst: f64 = 0.0;
    for x in [-0.9, -0.3, 0.2, 0.8, 1.5] {
        for y in [0.1, 0.4, 0.9, 1.6] {
            let w = CPoint::new(x, y);
            let d = (singulant::chi_default(&spec, 0.1, 0, w)? - singulant::chi_merged(w, a)?).norm();
            worst = worst.max(d);
        }
    }
    let mut re_worst: f64 = 0.0;
    for x in [0.05, 0.3, 1.0, 4.0, 20.0] {
        let c = singulant::chi_default(&spec, 0.1, 0, CPoint::new(x, 0.0))?;
        re_worst = re_worst.max((c.re - PI * a).abs());
    }
    Ok(Outcome::new(
        worst <= 1e-8 && re_worst <= 1e-10,
        format!("max |χ_num − χ_closed| = {worst:.2e} on 20 points; max |Re χ − πa| = {re_worst:.2e}"),
    ))
}

fn stokes_geometry(_: &AcceptanceConfig) -> Result<Outcome> {
    let sep = ForcingSpec::separated(0.75, 0.35, s(1, 4), s(1, 4))?;
    let c1 = singulant::trace_stokes_line(&sep, 0.1, 0, 2e-3, 50.0)?.crossing();
    let c2 = singulant::trace_stokes_line(&sep, 0.1, 1, 2e-3, 50.0)?.crossing();
    let merged = ForcingSpec::single(0.5, s(1, 2))?;
    let cm = singulant::trace_stokes_line(&merged, 0.1, 0, 2e-3, 50.0)?.crossing();
    let show = |c: Option<f64>| c.map_or("none".to_string(), |x| format!("{x:.6}"));
    let detail = format!("crossings: from −0.75 {}, from −0.35 {}, merged {}", show(c1), show(c2), show(cm));
    let pass = match (c1, c2, cm) {
        (Some(x1), Some(x2), Some(xm)) => x1 > 0.0 && x2 > 0.0 && x1.min(x2) <= xm && xm <= x1.max(x2),
        _ => false,
    };
    Ok(Outcome::new(pass, detail))
}

fn wavelength(cfg: &AcceptanceConfig) -> Result<Outcome> {
    let spec = ForcingSpec::single(0.5, s(1, 3))?;
    let mut pass = true;
    let mut parts = Vec::new();
    for eps in [0.075, 0.15] {
        let traj = ode::integrate_phi(&spec, eps, ode::DEFAULT_W0, cfg.w_end, cfg.ode_tol)?;
        let m = ode::measure_wave(&traj, ode::default_window(&traj))?;
        let ratio = m.wavelength / (2.0 * PI * eps);
        pass &= (ratio - 1.0).abs() < 0.05;
        parts.push(format!("ε={eps}: λ/2πε = {ratio:.4}"));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn oracle_equivalence(_: &AcceptanceConfig) -> Result<Outcome> {
    let n = 30;
    let rel = |x: CPoint, y: CPoint| if y == CPoint::new(0.0, 0.0) { x.norm() } else { (x - y).norm() / y.norm() };
    let mut worst = [0.0f64; 4];
    let toy = recurrence::toy_recurrence(n)?;
    for (k, v) in naive::toy(n).iter().enumerate() {
        worst[0] = worst[0].max(rel(toy.value(k)?, CPoint::new(*v, 0.0)));
    }
    let sep = recurrence::inner_separated(s(1, 4), n)?;
    for (k, v) in naive::separated(0.25, n).iter().enumerate() {
        worst[1] = worst[1].max(rel(sep.value(k)?, CPoint::new(*v, 0.0)));
    }
    let cases = [(s(3, 24), s(5, 24), 1.0, 1.0, 1, 2), (s(1, 4), s(1, 4), 0.7, 0.8, 2, 5)];
    for (i, &(s1, s2, a, b, l, m)) in cases.iter().enumerate() {
        let seq = recurrence::inner_coalescing(s1, s2, a, b, l, m, n)?;
        let nv = naive::coalescing(sigma_f64(s1), sigma_f64(s2), a, b, l as usize, m as usize, n);
        for (k, v) in nv.iter().enumerate() {
            worst[2 + i] = worst[2 + i].max(rel(seq.value(k)?, *v));
        }
    }
    let pass = worst.iter().all(|w| *w <= 1e-14);
    Ok(Outcome::new(
        pass,
        format!(
            "max rel diff toy {:.1e}, separated {:.1e}, coalescing m=2 {:.1e}, coalescing m=5 {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    ))
}
