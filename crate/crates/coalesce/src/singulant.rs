//! Singulants χ_k(w) = ∫_{−a_k}^{w} i/q_s³ and the Stokes lines on which
//! Im χ_k = 0, Re χ_k ≥ 0.

use crate::error::{Error, Result};
use crate::forcing::{CPoint, Forcing, ForcingSpec};
use crate::quadrature;
use crate::recurrence::fmt15;
use std::f64::consts::PI;
use std::io::Write;

pub const PATH_CLEARANCE: f64 = 1e-6;
pub const QUAD_TOL: f64 = 1e-12;

fn integrand(f: &Forcing) -> impl Fn(CPoint) -> Result<CPoint> + '_ {
    move |z| Ok(CPoint::i() / f.q_unchecked(z).powu(3))
}

fn segment_distance(p0: CPoint, p1: CPoint, s: CPoint) -> f64 {
    let d = p1 - p0;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (s - p0).norm();
    }
    let t = (((s - p0) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p0 + t * d - s).norm()
}

/// Checks clearance from singular points and that no segment crosses the
/// negative real axis. The path may start at its own singularity.
fn check_path(f: &Forcing, pts: &[CPoint]) -> Result<()> {
    let mut singular: Vec<CPoint> = f.factors().iter().map(|&(a, _)| CPoint::new(-a, 0.0)).collect();
    singular.push(CPoint::new(0.0, 0.0));
    for (i, seg) in pts.windows(2).enumerate() {
        let (p0, p1) = (seg[0], seg[1]);
        for &s in &singular {
            if i == 0 && p0 == s {
                // leaving the origin singularity: only the far end matters
                if (p1 - s).norm() < PATH_CLEARANCE && p1 != p0 {
                    return Err(Error::PathTooClose { clearance: PATH_CLEARANCE });
                }
                continue;
            }
            if segment_distance(p0, p1, s) < PATH_CLEARANCE {
                return Err(Error::PathTooClose { clearance: PATH_CLEARANCE });
            }
        }
        if (p0.im > 0.0 && p1.im < 0.0) || (p0.im < 0.0 && p1.im > 0.0) {
            let t = p0.im / (p0.im - p1.im);
            let x = p0.re + t * (p1.re - p0.re);
            if x < PATH_CLEARANCE {
                return Err(Error::PathTooClose { clearance: PATH_CLEARANCE });
            }
        }
    }
    Ok(())
}

/// Default route −a_k → −a_k + ih → w + ih → w through the upper half-plane.
pub fn default_waypoints(w: CPoint) -> Vec<CPoint> {
    let h = (w.im + 0.25).max(0.5);
    vec![CPoint::new(f64::NAN, h), CPoint::new(w.re, h)]
}

/// χ_k(w) by quadrature along −a_k → waypoints → w. An empty waypoint list
/// means the straight segment.
pub fn chi_numeric(spec: &ForcingSpec, epsilon: f64, k: usize, w: CPoint, waypoints: &[CPoint]) -> Result<CPoint> {
    let f = Forcing::new(*spec, epsilon);
    let start = CPoint::new(-f.factors().get(k).ok_or_else(|| Error::DomainError(format!("no singularity {k}")))?.0, 0.0);
    let mut pts = vec![start];
    for &p in waypoints {
        // NaN real part means "directly above the start"
        pts.push(if p.re.is_nan() { CPoint::new(start.re, p.im) } else { p });
    }
    pts.push(w);
    pts.dedup();
    if pts.len() == 1 {
        return Ok(CPoint::new(0.0, 0.0));
    }
    check_path(&f, &pts)?;
    quadrature::polyline(integrand(&f), &pts, QUAD_TOL)
}

/// χ_k(w) along the default upper-half-plane route.
pub fn chi_default(spec: &ForcingSpec, epsilon: f64, k: usize, w: CPoint) -> Result<CPoint> {
    chi_numeric(spec, epsilon, k, w, &default_waypoints(w))
}

/// Closed form χ = aπ + i[(w + a) + a log(w/a)] for the merged σ = 1/3 forcing.
pub fn chi_merged(w: CPoint, a: f64) -> Result<CPoint> {
    if w.im == 0.0 && w.re <= 0.0 {
        return Err(Error::BranchCutHit);
    }
    Ok(a * PI + CPoint::i() * ((w + a) + a * (w / a).ln()))
}

/// Re χ₂ on w > 0 for the split pair a ± √ε β with σ1 = σ2 = 1/6.
pub fn re_chi2_separated(a: f64, beta: f64, epsilon: f64) -> Result<f64> {
    let s = epsilon * (beta / a).powi(2);
    if !(s < 1.0) || a <= 0.0 {
        return Err(Error::DomainError(format!("eps (beta/a)^2 = {s} must be below 1")));
    }
    Ok(PI * a * (1.0 - s).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    CrossedRealAxis,
    MaxLength,
    LeftDomain,
    ReachedSingularity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StokesPath {
    pub origin: CPoint,
    pub points: Vec<CPoint>,
    pub chi: Vec<CPoint>,
    pub terminated_by: Termination,
}

impl StokesPath {
    /// Where the line meets the positive real axis, if it does.
    pub fn crossing(&self) -> Option<f64> {
        (self.terminated_by == Termination::CrossedRealAxis).then(|| self.points.last().unwrap().re)
    }
}

/// Initial directions θ ∈ [0, π) along which the local singulant
/// K (w + a_k)^{1+3σ_k} is real and positive.
pub fn seed_directions(f: &Forcing, k: usize) -> Vec<f64> {
    let (_, sk) = f.factors()[k];
    let c = f.local_coefficient(k);
    let kc = CPoint::i() / (c.powu(3) * (1.0 + 3.0 * sk));
    let p = 1.0 + 3.0 * sk;
    let mut out = Vec::new();
    for j in -4..=4 {
        let th = (2.0 * PI * j as f64 - kc.arg()) / p;
        let th = if th.abs() < 1e-12 { 0.0 } else { th };
        if (0.0..PI - 1e-9).contains(&th) {
            out.push(th);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

struct Tracer<'a> {
    f: &'a Forcing,
    singular: Vec<CPoint>,
    origin: CPoint,
}

impl Tracer<'_> {
    fn g(&self, w: CPoint) -> CPoint {
        CPoint::i() / self.f.q_unchecked(w).powu(3)
    }

    fn dir(&self, w: CPoint) -> CPoint {
        let g = self.g(w);
        g.conj() / g.norm()
    }

    fn chi_step(&self, from: CPoint, chi0: CPoint, to: CPoint) -> Result<CPoint> {
        Ok(chi0 + quadrature::segment(integrand(self.f), from, to, 1e-14)?)
    }

    /// Newton steps normal to the line until Im χ vanishes.
    fn correct(&self, from: CPoint, chi0: CPoint, mut next: CPoint, step: f64) -> Result<(CPoint, CPoint)> {
        let mut chi_next = self.chi_step(from, chi0, next)?;
        if Self::on_cut(next) {
            return Ok((next, chi_next));
        }
        for _ in 0..8 {
            let im = chi_next.im;
            if im.abs() < 1e-12 * (1.0 + chi_next.re.abs()) {
                return Ok((next, chi_next));
            }
            let delta = -im / self.g(next).norm();
            if !delta.is_finite() || delta.abs() > step {
                return Err(Error::CorrectorDivergence { re: next.re, im: next.im });
            }
            next += CPoint::i() * self.dir(next) * delta;
            chi_next = self.chi_step(from, chi0, next)?;
        }
        if chi_next.im.abs() > 1e-9 {
            return Err(Error::CorrectorDivergence { re: next.re, im: next.im });
        }
        Ok((next, chi_next))
    }

    fn on_cut(w: CPoint) -> bool {
        w.im == 0.0 && w.re < 0.0
    }

    fn trace(&self, theta: f64, step: f64, max_arc: f64, bound: f64) -> Result<StokesPath> {
        let mut w = self.origin + CPoint::from_polar(step, theta);
        if theta == 0.0 {
            w.im = 0.0;
        }
        let (w, mut chi) = self.correct(self.origin, CPoint::new(0.0, 0.0), w, step)?;
        let mut w = w;
        let mut points = vec![self.origin, w];
        let mut chis = vec![CPoint::new(0.0, 0.0), chi];
        let mut arc = step;
        let term;
        loop {
            if arc >= max_arc {
                term = Termination::MaxLength;
                break;
            }
            if w.norm() > bound {
                term = Termination::LeftDomain;
                break;
            }
            let along_cut = Self::on_cut(w);
            let d1 = self.dir(w);
            let mid = w + step * d1;
            let d2 = self.dir(if along_cut { CPoint::new(mid.re, 0.0) } else { mid });
            let mut next = w + 0.5 * step * (d1 + d2);
            if along_cut && next.im.abs() < 1e-9 * step.max(1.0) {
                next.im = 0.0;
            }
            if let Some(&s) = self.singular.iter().find(|&&s| s != self.origin && (next - s).norm() < step) {
                let chi_s = self.chi_step(w, chi, s)?;
                points.push(s);
                chis.push(chi_s);
                term = Termination::ReachedSingularity;
                break;
            }
            let (next, chi_next) = self.correct(w, chi, next, step)?;
            if next.im < 0.0 && w.im >= 0.0 {
                let t = w.im / (w.im - next.im);
                let mut cross = CPoint::new(w.re + t * (next.re - w.re), 0.0);
                if cross.re > 0.0 {
                    let mut chi_c = self.chi_step(w, chi, cross)?;
                    for _ in 0..8 {
                        let dx = -chi_c.im / self.g(cross).im;
                        if !dx.is_finite() || dx.abs() > step {
                            break;
                        }
                        cross.re += dx;
                        chi_c = self.chi_step(w, chi, cross)?;
                        if dx.abs() < 1e-15 * cross.re {
                            break;
                        }
                    }
                    points.push(cross);
                    chis.push(chi_c);
                    term = Termination::CrossedRealAxis;
                } else {
                    term = Termination::LeftDomain;
                }
                break;
            }
            arc += (next - w).norm();
            w = next;
            chi = chi_next;
            points.push(w);
            chis.push(chi);
        }
        Ok(StokesPath { origin: self.origin, points, chi: chis, terminated_by: term })
    }
}

/// Traces every admissible Stokes line leaving −a_k into the upper half-plane.
pub fn trace_stokes_lines(spec: &ForcingSpec, epsilon: f64, k: usize, step: f64, max_arc: f64) -> Result<Vec<StokesPath>> {
    let f = Forcing::new(*spec, epsilon);
    let factors = f.factors().to_vec();
    let (ak, _) = *factors.get(k).ok_or_else(|| Error::DomainError(format!("no singularity {k}")))?;
    if !(step > 0.0 && step <= 1e-2 * ak) {
        return Err(Error::DomainError(format!("step must lie in (0, {}]", 1e-2 * ak)));
    }
    let mut singular: Vec<CPoint> = factors.iter().map(|&(a, _)| CPoint::new(-a, 0.0)).collect();
    singular.push(CPoint::new(0.0, 0.0));
    let tracer = Tracer { f: &f, singular, origin: CPoint::new(-ak, 0.0) };
    let bound = 10.0 + 10.0 * factors.iter().map(|x| x.0).fold(0.0, f64::max);
    let seeds = seed_directions(&f, k);
    if seeds.is_empty() {
        return Err(Error::SeedFailure);
    }
    let mut out = Vec::new();
    for th in seeds {
        let p = tracer.trace(th, step, max_arc, bound)?;
        // a seed that immediately leaves through a cut is not physical
        if !(p.terminated_by == Termination::LeftDomain && p.points.len() <= 3) {
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(Error::SeedFailure);
    }
    Ok(out)
}

/// The Stokes line from −a_k, preferring one that meets the positive real axis.
pub fn trace_stokes_line(spec: &ForcingSpec, epsilon: f64, k: usize, step: f64, max_arc: f64) -> Result<StokesPath> {
    let mut lines = trace_stokes_lines(spec, epsilon, k, step, max_arc)?;
    let idx = lines.iter().position(|p| p.terminated_by == Termination::CrossedRealAxis).unwrap_or(0);
    Ok(lines.swap_remove(idx))
}

/// Writes `re_w,im_w,re_chi,im_chi`.
pub fn write_stokes_csv<W: Write>(out: W, paths: &[StokesPath]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["re_w", "im_w", "re_chi", "im_chi"])?;
    for p in paths {
        for (z, c) in p.points.iter().zip(&p.chi) {
            w.write_record([fmt15(z.re), fmt15(z.im), fmt15(c.re), fmt15(c.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}
