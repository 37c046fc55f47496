use clap::{Args, Parser, Subcommand};
use coalesce::amplitude;
use coalesce::forcing::{ell_m, parse_sigma};
use coalesce::harness::{self, AcceptanceConfig, ConfigMap, SweepConfig};
use coalesce::recurrence::{self, OmegaCcOptions};
use coalesce::{ode, singulant, Error, ForcingSpec, Result, Sigma};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "coalesce", version, about = "Exponentially small waves from singular forcings")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Params {
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Offset of a single or merged singularity.
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    /// Larger offset of a separated pair.
    #[arg(long)]
    a1: Option<f64>,
    /// Smaller offset of a separated pair (default 1 − a1).
    #[arg(long)]
    a2: Option<f64>,
    /// Coalescing pair at −a ∓ ε^{ℓ/m} β.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value = "1/3")]
    sigma1: String,
    #[arg(long)]
    sigma2: Option<String>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Params {
    fn sigmas(&self) -> Result<(Sigma, Option<Sigma>)> {
        Ok((parse_sigma(&self.sigma1)?, self.sigma2.as_deref().map(parse_sigma).transpose()?))
    }

    fn spec(&self) -> Result<ForcingSpec> {
        let (s1, s2) = self.sigmas()?;
        if let Some(beta) = self.beta {
            let s2 = s2.ok_or_else(|| Error::InvalidSpec("--beta needs --sigma2".into()))?;
            ForcingSpec::coalescing(self.a, beta, s1, s2)
        } else if let Some(a1) = self.a1 {
            ForcingSpec::separated(a1, self.a2.unwrap_or(1.0 - a1), s1, s2.unwrap_or(s1))
        } else {
            ForcingSpec::single(self.a, s1)
        }
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        })
    }

    fn config_map(&self) -> Result<ConfigMap> {
        match &self.config {
            Some(p) => ConfigMap::load(p),
            None => Ok(ConfigMap::default()),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the ODE and write the trajectory CSV.
    Solve {
        #[command(flatten)]
        p: Params,
        #[arg(long)]
        w_end: Option<f64>,
        #[arg(long, default_value_t = ode::DEFAULT_W0)]
        w0: f64,
    },
    /// Trace Stokes lines from every singularity.
    Stokes {
        #[command(flatten)]
        p: Params,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = 50.0)]
        max_arc: f64,
    },
    /// Extract Ω(σ), or Ω^cc and τ when --sigma2 is given.
    Omega {
        #[command(flatten)]
        p: Params,
    },
    /// Fit the divergence of a coefficient sequence.
    Fit {
        #[command(flatten)]
        p: Params,
        /// Sequence CSV (columns n, re_A, im_A); generated from the flags when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        lo: Option<usize>,
        #[arg(long)]
        hi: Option<usize>,
    },
    /// Asymptotic amplitude predictions.
    Amp {
        #[command(flatten)]
        p: Params,
        #[arg(long)]
        w: Option<f64>,
    },
    /// Reproduce a figure sweep described by --config.
    Sweep {
        #[command(flatten)]
        p: Params,
        #[arg(long)]
        experiment: Option<String>,
    },
    /// Run the acceptance suite.
    Accept {
        #[command(flatten)]
        p: Params,
        #[arg(long)]
        filter: Option<String>,
    },
}

fn solve(p: &Params, w_end: Option<f64>, w0: f64) -> Result<()> {
    let spec = p.spec()?;
    let w_end = w_end.unwrap_or_else(|| ode::default_w_end(&spec, p.eps));
    let traj = ode::integrate_phi(&spec, p.eps, w0, w_end, p.tol)?;
    ode::write_trajectory_csv(p.output()?, &traj)?;
    match ode::measure_wave(&traj, ode::default_window(&traj)) {
        Ok(m) => eprintln!("amplitude {:.6e}, wavelength {:.6e}", m.amplitude, m.wavelength),
        Err(e) => eprintln!("no wave measured: {e}"),
    }
    Ok(())
}

fn stokes(p: &Params, step: Option<f64>, max_arc: f64) -> Result<()> {
    let spec = p.spec()?;
    let mut paths = Vec::new();
    for (k, (ak, _)) in spec.factors(p.eps).into_iter().enumerate() {
        let lines = singulant::trace_stokes_lines(&spec, p.eps, k, step.unwrap_or(2e-3 * ak), max_arc)?;
        for l in &lines {
            eprintln!("k={k} {:?} crossing {:?}", l.terminated_by, l.crossing());
        }
        paths.extend(lines);
    }
    singulant::write_stokes_csv(p.output()?, &paths)
}

fn omega(p: &Params) -> Result<()> {
    let (s1, s2) = p.sigmas()?;
    match s2 {
        None => {
            let e = recurrence::omega_separated_with(s1, p.nmax.unwrap_or(2000), 1e-3)?;
            println!("omega {:.10} error {:.2e} gamma {}", e.omega, e.error, e.gamma);
        }
        Some(s2) => {
            let (ell, m) = ell_m(s1 + s2);
            let opts = OmegaCcOptions { n_max: p.nmax.unwrap_or(2000), ..Default::default() };
            let f = recurrence::omega_cc(s1, s2, p.a, p.beta.unwrap_or(0.0), ell, m, opts)?;
            println!(
                "omega_cc {:.10} tau {:.10} error {:.2e} gamma {} mu {:?} alternating {}",
                f.omega, f.tau, f.omega_error, f.gamma, f.mu, f.alternating_sign
            );
        }
    }
    Ok(())
}

fn fit(p: &Params, input: Option<&PathBuf>, m: Option<u32>, lo: Option<usize>, hi: Option<usize>) -> Result<()> {
    let (s1, s2) = p.sigmas()?;
    let (seq, m) = match (input, s2) {
        (Some(path), _) => (recurrence::read_sequence_csv(File::open(path)?)?, m.unwrap_or(1)),
        (None, Some(s2)) => {
            let (ell, mm) = ell_m(s1 + s2);
            let n = p.nmax.unwrap_or(2000);
            (recurrence::inner_coalescing(s1, s2, p.a, p.beta.unwrap_or(1.0), ell, mm, n)?, m.unwrap_or(mm))
        }
        (None, None) => (recurrence::inner_separated(s1, p.nmax.unwrap_or(2000))?, m.unwrap_or(1)),
    };
    let hi = hi.unwrap_or(seq.len() - 1);
    let lo = lo.unwrap_or(hi / 2);
    let f = recurrence::fit_divergence(&seq, m, (lo, hi))?;
    println!(
        "m {} gamma {} mu {:?} omega {:.8} tau {:.8} alternating {} residual {:.2e}",
        f.m, f.gamma, f.mu, f.omega, f.tau, f.alternating_sign, f.residual
    );
    if p.out.is_some() {
        recurrence::write_sequence_csv(p.output()?, &seq, m, f.gamma, &f.mu, f.alternating_sign)?;
    }
    Ok(())
}

fn amp(p: &Params, w: Option<f64>) -> Result<()> {
    let spec = p.spec()?;
    let show = |label: &str, a: &amplitude::AmplitudePrediction| {
        println!(
            "{label}: amplitude {:.6e} prefactor {:.6e} rate {:.10} secondary {:.10}",
            a.amplitude, a.prefactor, a.exponent_rate, a.secondary_rate
        )
    };
    match spec {
        ForcingSpec::Single { a, sigma } => {
            let om = recurrence::omega_separated(sigma)?.omega;
            show("single", &amplitude::amp_single(a, sigma, p.eps, om, w)?);
        }
        ForcingSpec::Separated { .. } => {
            let omega = |s: Sigma| recurrence::omega_separated(s).map(|e| e.omega);
            for (k, r) in amplitude::amp_separated(&spec, p.eps, &omega, w)?.iter().enumerate() {
                match r {
                    Ok(a) => show(&format!("separated k={k}"), a),
                    Err(e) => println!("separated k={k}: {e}"),
                }
            }
            println!("separated total: amplitude {:.6e}", amplitude::amp_separated_total(&spec, p.eps, &omega, w)?);
        }
        ForcingSpec::Coalescing { a, beta, sigma1, sigma2, ell, m } => {
            let opts = OmegaCcOptions { n_max: p.nmax.unwrap_or(2000), ..Default::default() };
            let f = recurrence::omega_cc(sigma1, sigma2, a, beta, ell, m, opts)?;
            show("coalescing", &amplitude::amp_coalescing(a, beta, sigma1, sigma2, p.eps, f.omega, w)?);
        }
    }
    Ok(())
}

fn sweep(p: &Params, experiment: Option<&str>) -> Result<()> {
    let mut map = p.config_map()?;
    if let Some(e) = experiment {
        map.set("experiment", e);
    }
    let cfg = SweepConfig::from_map(&map)?;
    let table = harness::run_sweep(&cfg)?;
    let out: Box<dyn Write> = match p.out.as_ref().or(cfg.out.as_ref()) {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    };
    harness::sweep::write_table_csv(out, &table)
}

fn accept(p: &Params, filter: Option<&str>) -> Result<bool> {
    let cfg = AcceptanceConfig::from_map(&p.config_map()?)?;
    let report = harness::run_acceptance(&cfg, filter, |line| println!("{line}"));
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Solve { p, w_end, w0 } => solve(p, *w_end, *w0).map(|_| true),
        Cmd::Stokes { p, step, max_arc } => stokes(p, *step, *max_arc).map(|_| true),
        Cmd::Omega { p } => omega(p).map(|_| true),
        Cmd::Fit { p, input, m, lo, hi } => fit(p, input.as_ref(), *m, *lo, *hi).map(|_| true),
        Cmd::Amp { p, w } => amp(p, *w).map(|_| true),
        Cmd::Sweep { p, experiment } => sweep(p, experiment.as_deref()).map(|_| true),
        Cmd::Accept { p, filter } => accept(p, filter.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code().clamp(1, 255) as u8)
        }
    }
}
