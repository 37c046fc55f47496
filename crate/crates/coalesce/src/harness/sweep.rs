//! Parameter sweeps that regenerate the comparison curves as CSV tables.

use super::config::ConfigMap;
use crate::amplitude;
use crate::error::{Error, Result};
use crate::forcing::{ForcingSpec, Sigma};
use crate::ode;
use crate::recurrence::{self, fmt15, OmegaCcOptions};
use crate::singulant;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Fig3,
    Fig8,
    Fig9,
    Fig10,
    StokesMap,
    Custom,
}

impl std::str::FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "fig3" => Experiment::Fig3,
            "fig8" => Experiment::Fig8,
            "fig9" => Experiment::Fig9,
            "fig10" => Experiment::Fig10,
            "stokesmap" | "stokes" | "fig2" => Experiment::StokesMap,
            "custom" => Experiment::Custom,
            _ => return Err(Error::InvalidSpec(format!("unknown experiment {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub experiment: Experiment,
    /// a₁ grid for ODE-backed sweeps.
    pub a1_range: (f64, f64),
    /// a₁ + a₂, fixed at 1 for Fig3 and Fig10.
    pub a_sum: f64,
    /// β grid for Fig8; β² grid for Fig9.
    pub beta_range: (f64, f64),
    pub points: usize,
    pub epsilon: f64,
    /// Merged offset for Fig8/Fig9 and the merged Stokes line.
    pub a: f64,
    /// Singularity offsets for the Stokes map.
    pub a1: f64,
    pub a2: f64,
    pub sigma1: Sigma,
    pub sigma2: Sigma,
    pub tol: f64,
    pub w_end: f64,
    pub n_max: usize,
    pub out: Option<PathBuf>,
}

impl SweepConfig {
    pub fn preset(experiment: Experiment) -> Self {
        let base = SweepConfig {
            experiment,
            a1_range: (0.52, 0.95),
            a_sum: 1.0,
            beta_range: (0.05, 2.0),
            points: 40,
            epsilon: 0.15,
            a: 0.5,
            a1: 0.75,
            a2: 0.35,
            sigma1: Sigma::new(1, 4),
            sigma2: Sigma::new(1, 4),
            tol: 1e-12,
            w_end: 40.0,
            n_max: 2000,
            out: None,
        };
        match experiment {
            Experiment::Fig3 | Experiment::StokesMap | Experiment::Custom => base,
            Experiment::Fig10 => SweepConfig {
                a1_range: (0.5, 0.95),
                epsilon: 0.075,
                sigma1: Sigma::new(1, 6),
                sigma2: Sigma::new(1, 6),
                ..base
            },
            Experiment::Fig8 => SweepConfig { sigma1: Sigma::new(1, 6), sigma2: Sigma::new(1, 6), ..base },
            Experiment::Fig9 => SweepConfig {
                beta_range: (0.25, 4.0),
                sigma1: Sigma::new(1, 6),
                sigma2: Sigma::new(1, 6),
                ..base
            },
        }
    }

    /// Preset for `experiment`, overridden by any keys present in the map.
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let experiment: Experiment = map.get_str("experiment").unwrap_or("custom").parse()?;
        let p = Self::preset(experiment);
        let cfg = SweepConfig {
            experiment,
            a1_range: (map.get_or("a1_min", p.a1_range.0)?, map.get_or("a1_max", p.a1_range.1)?),
            a_sum: map.get_or("a_sum", p.a_sum)?,
            beta_range: (map.get_or("beta_min", p.beta_range.0)?, map.get_or("beta_max", p.beta_range.1)?),
            points: map.get_or("points", p.points)?,
            epsilon: map.get_or("eps", p.epsilon)?,
            a: map.get_or("a", p.a)?,
            a1: map.get_or("a1", p.a1)?,
            a2: map.get_or("a2", p.a2)?,
            sigma1: map.sigma_or("sigma1", p.sigma1)?,
            sigma2: map.sigma_or("sigma2", p.sigma2)?,
            tol: map.get_or("tol", p.tol)?,
            w_end: map.get_or("w_end", p.w_end)?,
            n_max: map.get_or("nmax", p.n_max)?,
            out: map.get_str("out").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::InvalidSpec("points must be positive".into()));
        }
        if matches!(self.experiment, Experiment::Fig3 | Experiment::Fig10) && self.a_sum != 1.0 {
            return Err(Error::InvalidSpec("a1 + a2 = 1 is fixed for this experiment".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidSpec("eps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub values: Vec<Option<f64>>,
    /// First error met while filling the row.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub headers: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name).map(|i| i - 1)
    }

    pub fn value(&self, row: usize, name: &str) -> Option<f64> {
        self.column(name).and_then(|c| self.rows[row].values[c])
    }
}

pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

pub fn rel_err(numeric: Option<f64>, prediction: Option<f64>) -> Option<f64> {
    match (numeric, prediction) {
        (Some(n), Some(p)) if n != 0.0 => Some((n - p).abs() / n.abs()),
        _ => None,
    }
}

/// Ω values needed by the amplitude rows, computed once per sweep.
#[derive(Debug, Clone, Copy)]
pub struct OmegaTable {
    pub sigma1: Sigma,
    pub sigma2: Sigma,
    pub omega1: f64,
    pub omega2: f64,
    pub omega_total: f64,
}

impl OmegaTable {
    pub fn new(sigma1: Sigma, sigma2: Sigma) -> Result<Self> {
        let om = |s| recurrence::omega_separated(s).map(|e| e.omega);
        Ok(OmegaTable {
            sigma1,
            sigma2,
            omega1: om(sigma1)?,
            omega2: if sigma2 == sigma1 { om(sigma1)? } else { om(sigma2)? },
            omega_total: om(sigma1 + sigma2)?,
        })
    }

    pub fn lookup(&self, s: Sigma) -> Result<f64> {
        if s == self.sigma1 {
            Ok(self.omega1)
        } else if s == self.sigma2 {
            Ok(self.omega2)
        } else {
            recurrence::omega_separated(s).map(|e| e.omega)
        }
    }
}

pub const AMPLITUDE_HEADERS: [&str; 10] = [
    "a1",
    "a2",
    "numeric",
    "separated",
    "coalescing",
    "single",
    "err_separated",
    "err_coalescing",
    "err_single",
    "beta",
];

/// One ODE run at a₁ with a₂ = a_sum − a₁, against every applicable prediction.
/// Predictions are evaluated at the midpoint of the measurement window.
pub fn amplitude_row(cfg: &SweepConfig, omegas: &OmegaTable, a1: f64) -> SweepRow {
    let mut error: Option<String> = None;
    let mut note = |e: Error| {
        if error.is_none() {
            error = Some(e.to_string());
        }
    };
    let a2 = cfg.a_sum - a1;
    let (s1, s2, eps) = (cfg.sigma1, cfg.sigma2, cfg.epsilon);
    let a = 0.5 * cfg.a_sum;
    let stotal = s1 + s2;
    let spec = if a1 == a2 && s1 == s2 {
        ForcingSpec::single(a1, stotal)
    } else {
        ForcingSpec::separated(a1, a2, s1, s2)
    };
    let numeric_and_mid = spec.and_then(|spec| {
        let traj = ode::integrate_phi(&spec, eps, ode::DEFAULT_W0, cfg.w_end, cfg.tol)?;
        let win = ode::default_window(&traj);
        let m = ode::measure_wave(&traj, win)?;
        Ok((m.amplitude, 0.5 * (win.0 + win.1)))
    });
    let (numeric, w_mid) = match numeric_and_mid {
        Ok((n, w)) => (Some(n), w),
        Err(e) => {
            note(e);
            (None, 0.8 * cfg.w_end)
        }
    };
    let separated = if a1 > a2 {
        ForcingSpec::separated(a1, a2, s1, s2)
            .and_then(|sp| amplitude::amp_separated_total(&sp, eps, &|s| omegas.lookup(s), Some(w_mid)))
            .map_err(&mut note)
            .ok()
    } else {
        None
    };
    let (ell, m) = crate::forcing::ell_m(stotal);
    let beta = (a1 - a) / eps.powf(ell as f64 / m as f64);
    let coalescing = if stotal == Sigma::new(1, 3) {
        let opts = OmegaCcOptions { n_max: cfg.n_max, ..Default::default() };
        recurrence::omega_cc(s1, s2, a, beta.abs(), ell, m, opts)
            .and_then(|fit| amplitude::amp_coalescing(a, beta.abs(), s1, s2, eps, fit.omega, Some(w_mid)))
            .map(|p| p.amplitude)
            .map_err(&mut note)
            .ok()
    } else {
        None
    };
    let single = amplitude::amp_single(a, stotal, eps, omegas.omega_total, Some(w_mid))
        .map(|p| p.amplitude)
        .map_err(&mut note)
        .ok();
    SweepRow {
        x: a1,
        values: vec![
            Some(a2),
            numeric,
            separated,
            coalescing,
            single,
            rel_err(numeric, separated),
            rel_err(numeric, coalescing),
            rel_err(numeric, single),
            Some(beta),
        ],
        error,
    }
}

fn omega_cc_row(cfg: &SweepConfig, beta: f64) -> Result<f64> {
    let (ell, m) = crate::forcing::ell_m(cfg.sigma1 + cfg.sigma2);
    let opts = OmegaCcOptions { n_max: cfg.n_max, ..Default::default() };
    recurrence::omega_cc(cfg.sigma1, cfg.sigma2, cfg.a, beta, ell, m, opts).map(|f| f.omega)
}

/// Large-β matching value 2(a/9β²)^{1/3} e^{πβ²/8a} Ω(1/6).
pub fn matching_law(a: f64, beta: f64, omega16: f64) -> f64 {
    2.0 * (a / (9.0 * beta * beta)).powf(1.0 / 3.0) * (PI * beta * beta / (8.0 * a)).exp() * omega16
}

fn collect_rows<F>(xs: Vec<f64>, f: F) -> Vec<SweepRow>
where
    F: Fn(f64) -> SweepRow + Sync + Send,
{
    // indexed parallel collect keeps grid order
    xs.into_par_iter().map(f).collect()
}

fn failed_row(x: f64, width: usize, e: Error) -> SweepRow {
    SweepRow { x, values: vec![None; width], error: Some(e.to_string()) }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let headers = |h: &[&str]| h.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match cfg.experiment {
        Experiment::Fig3 | Experiment::Fig10 | Experiment::Custom => {
            let omegas = OmegaTable::new(cfg.sigma1, cfg.sigma2)?;
            let xs = grid(cfg.a1_range.0, cfg.a1_range.1, cfg.points);
            let rows = collect_rows(xs, |a1| amplitude_row(cfg, &omegas, a1));
            Ok(SweepTable { headers: headers(&AMPLITUDE_HEADERS), rows })
        }
        Experiment::Fig8 => {
            let single = recurrence::omega_separated(cfg.sigma1 + cfg.sigma2)?.omega;
            let xs = grid(cfg.beta_range.0, cfg.beta_range.1, cfg.points);
            let rows = collect_rows(xs, |beta| match omega_cc_row(cfg, beta) {
                Ok(om) => SweepRow {
                    x: beta,
                    values: vec![Some(om), Some(single), Some(om / single), rel_err(Some(single), Some(om))],
                    error: None,
                },
                Err(e) => failed_row(beta, 4, e),
            });
            Ok(SweepTable { headers: headers(&["beta", "omega_cc", "omega_single", "ratio", "rel_diff"]), rows })
        }
        Experiment::Fig9 => {
            let om16 = recurrence::omega_separated(cfg.sigma1)?.omega;
            let xs = grid(cfg.beta_range.0, cfg.beta_range.1, cfg.points);
            let rows = collect_rows(xs, |b2| {
                let beta = b2.sqrt();
                match omega_cc_row(cfg, beta) {
                    Ok(om) => {
                        let law = matching_law(cfg.a, beta, om16);
                        SweepRow { x: b2, values: vec![Some(om), Some(law), Some(om / law)], error: None }
                    }
                    Err(e) => failed_row(b2, 3, e),
                }
            });
            Ok(SweepTable { headers: headers(&["beta_sq", "omega_cc", "matching", "ratio"]), rows })
        }
        Experiment::StokesMap => {
            let sep = ForcingSpec::separated(cfg.a1, cfg.a2, cfg.sigma1, cfg.sigma2)?;
            let merged = ForcingSpec::single(cfg.a, cfg.sigma1 + cfg.sigma2)?;
            let jobs = [(sep, 0usize, cfg.a1), (sep, 1, cfg.a2), (merged, 0, cfg.a)];
            let mut rows = Vec::new();
            let mut line = 0usize;
            for (src, (spec, k, ak)) in jobs.iter().enumerate() {
                for p in singulant::trace_stokes_lines(spec, cfg.epsilon, *k, 2e-3 * ak, 50.0)? {
                    for (z, c) in p.points.iter().zip(&p.chi) {
                        rows.push(SweepRow {
                            x: line as f64,
                            values: vec![Some(src as f64), Some(z.re), Some(z.im), Some(c.re), Some(c.im)],
                            error: None,
                        });
                    }
                    line += 1;
                }
            }
            Ok(SweepTable { headers: headers(&["line", "source", "re_w", "im_w", "re_chi", "im_chi"]), rows })
        }
    }
}

/// Comma-separated with a header row, 15 significant digits, blank cells for
/// missing values and a trailing `status` column.
pub fn write_table_csv<W: Write>(out: W, table: &SweepTable) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = table.headers.clone();
    header.push("status".into());
    w.write_record(&header)?;
    for r in &table.rows {
        let mut rec = vec![fmt15(r.x)];
        rec.extend(r.values.iter().map(|v| v.map(fmt15).unwrap_or_default()));
        rec.push(r.error.clone().unwrap_or_else(|| "ok".into()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
