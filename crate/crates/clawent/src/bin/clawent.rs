//! Command-line driver.
//!
//! Exit codes: 0 on success, 1 when a checked property is violated (failed
//! regularity verification, uncovered samples, broken report ordering), 2 on
//! configuration or usage errors. Worker count follows `RAYON_NUM_THREADS`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use clawent::cover::cover_solution_set;
use clawent::entropy::{entropy_scan, sample_pool, BoundReport, ExperimentConfig};
use clawent::flux::{estimate_constants, FluxSpec};
use clawent::lower::{analytic_lower_bound, build_witness_family, verify_regularity, WitnessFamily};
use clawent::riemann::riemann;
use clawent::tracking::evolve;
use clawent::{Error, FluxModel, PiecewiseConstantFn, Result};

#[derive(Parser)]
#[command(
    name = "clawent",
    version,
    about = "Entropy solutions of 1D scalar conservation laws: solve, cover, bound, verify",
    after_help = "Exit codes: 0 success, 1 violation found, 2 configuration error.\n\
                  Set RAYON_NUM_THREADS to control the worker count."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Flux selection shared by the subcommands. Named forms take the working
/// range from `-M`; inline JSON and file forms carry their own `"M"` field,
/// which then wins.
#[derive(Args)]
struct FluxArg {
    /// Name (burgers, cubic, quartic, mixed_quartic, monomial:<m>), inline
    /// JSON, or path to a JSON flux spec
    #[arg(long)]
    flux: String,
    /// Amplitude bound M of the working range [-M, M] (named fluxes only)
    #[arg(short = 'M', long, default_value_t = 1.0)]
    m_bound: f64,
}

impl FluxArg {
    fn build(&self) -> Result<(FluxModel, FluxSpec)> {
        let spec = parse_flux_spec(&self.flux, self.m_bound)?;
        let flux = spec.build()?;
        Ok((flux, spec))
    }
}

fn parse_flux_spec(s: &str, m_bound: f64) -> Result<FluxSpec> {
    let t = s.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| Error::Invalid(format!("flux JSON: {e}")));
    }
    let p = Path::new(t);
    if p.extension().is_some_and(|e| e == "json") || p.exists() {
        let body =
            fs::read_to_string(p).map_err(|e| Error::Invalid(format!("reading {t}: {e}")))?;
        return serde_json::from_str(&body)
            .map_err(|e| Error::Invalid(format!("flux JSON in {t}: {e}")));
    }
    let (name, m) = match t.split_once(':') {
        Some((n, m_str)) => {
            let m = m_str
                .parse::<u32>()
                .map_err(|_| Error::Invalid(format!("bad degeneracy order in \"{t}\"")))?;
            (n.to_string(), Some(m))
        }
        None => (t.to_string(), None),
    };
    Ok(FluxSpec::Named { name, m, m_bound })
}

fn load_pwc(path: &Path) -> Result<PiecewiseConstantFn> {
    let body = fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&body)
        .map_err(|e| Error::Invalid(format!("datum JSON in {}: {e}", path.display())))
}

fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Invalid(format!("serializing output: {e}")))?;
    body.push('\n');
    match out {
        Some(p) => fs::write(p, body)
            .map_err(|e| Error::Invalid(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve an initial datum to time T and print the profile
    Solve {
        #[command(flatten)]
        flux: FluxArg,
        /// Initial datum JSON file: {"breakpoints": [...], "values": [...]}
        #[arg(long)]
        data: PathBuf,
        #[arg(short = 'T', long, default_value_t = 1.0)]
        t_final: f64,
        /// Value-lattice resolution of the wave-front tracker
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a single Riemann problem and print the wave fan
    #[command(allow_negative_numbers = true)]
    Riemann {
        #[command(flatten)]
        flux: FluxArg,
        #[arg(long)]
        left: f64,
        #[arg(long)]
        right: f64,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cover evolved random data at radius eps and report realized counts
    Cover {
        #[command(flatten)]
        flux: FluxArg,
        #[arg(short = 'L', long)]
        l_dom: f64,
        #[arg(short = 'T', long)]
        t_final: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the separated witness family and the closed-form lower bound
    LowerBound {
        #[command(flatten)]
        flux: FluxArg,
        #[arg(short = 'L', long)]
        l_dom: f64,
        #[arg(short = 'T', long)]
        t_final: f64,
        #[arg(long)]
        eps: f64,
        /// Override the automatic cell count
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full sampling/covering/bounds scan over a radius grid
    EntropyScan {
        /// JSON file with an ExperimentConfig; flags below are ignored if set
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        flux: Option<String>,
        #[arg(short = 'M', long, default_value_t = 1.0)]
        m_bound: f64,
        #[arg(short = 'L', long, default_value_t = 1.0)]
        l_dom: f64,
        #[arg(short = 'T', long, default_value_t = 1.0)]
        t_final: f64,
        /// Comma-separated descending radii (default: geometric from ML/8)
        #[arg(long, value_delimiter = ',')]
        eps_grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 24)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        /// CSV destination (stdout when omitted)
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// Full JSON report destination
        #[arg(long)]
        out_json: Option<PathBuf>,
    },
    /// Check a datum against the one-sided class and its evolved regularity
    Verify {
        #[command(flatten)]
        flux: FluxArg,
        /// Datum JSON file to verify
        #[arg(long)]
        data: PathBuf,
        /// Class amplitude h
        #[arg(long)]
        height: f64,
        #[arg(short = 'T', long, default_value_t = 1.0)]
        t_final: f64,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the flux-derived constants
    Constants {
        #[command(flatten)]
        flux: FluxArg,
        /// Grid points per side for the estimates
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct SolveOutput {
    t_final: f64,
    delta: f64,
    mass: f64,
    tv: f64,
    sup_norm: f64,
    profile: PiecewiseConstantFn,
}

#[derive(Serialize)]
struct RiemannOutput {
    left: f64,
    right: f64,
    delta: f64,
    speeds_sorted: bool,
    /// Worst Oleinik slack over shocks; null when the fan has no shock.
    admissibility_slack: Option<f64>,
    fan: clawent::riemann::WaveFan,
}

#[derive(Serialize)]
struct CoverFailure<'a> {
    error: &'a str,
    uncovered: Vec<usize>,
    total: usize,
}

#[derive(Serialize)]
struct LowerBoundOutput {
    analytic_lower: f64,
    family: WitnessFamily,
}

fn scan_rows_consistent(report: &BoundReport) -> std::result::Result<(), String> {
    for row in &report.rows {
        if row.packing_log2 > row.cover_log2 + 1e-9 {
            return Err(format!(
                "eps {}: packing {} exceeds cover {}",
                row.eps, row.packing_log2, row.cover_log2
            ));
        }
        if let Some(w) = row.witness_log2 {
            if w > row.cover_log2 + 1e-9 {
                return Err(format!(
                    "eps {}: witness {} exceeds cover {}",
                    row.eps, w, row.cover_log2
                ));
            }
        }
        if let Some(u) = row.analytic_upper {
            if row.cover_log2 > u + 1e-9 {
                return Err(format!(
                    "eps {}: cover {} exceeds the calibrated upper bound {u}",
                    row.eps, row.cover_log2
                ));
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Solve { flux, data, t_final, delta, out } => {
            let (flux, _) = flux.build()?;
            let u0 = load_pwc(&data)?;
            let profile = evolve(&flux, &u0, t_final, delta)?;
            let report = SolveOutput {
                t_final,
                delta,
                mass: profile.mass(),
                tv: profile.tv(),
                sup_norm: profile.sup_norm(),
                profile,
            };
            emit(&out, &report)?;
            Ok(0)
        }
        Cmd::Riemann { flux, left, right, delta, out } => {
            let (flux, _) = flux.build()?;
            let fan = riemann(&flux, left, right, delta)?;
            let slack = fan.shock_admissibility_slack(&flux, 64);
            let report = RiemannOutput {
                left,
                right,
                delta,
                speeds_sorted: fan.speeds_sorted(),
                admissibility_slack: slack.is_finite().then_some(slack),
                fan,
            };
            emit(&out, &report)?;
            Ok(0)
        }
        Cmd::Cover { flux, l_dom, t_final, eps, samples, seed, delta, out } => {
            let (flux, _) = flux.build()?;
            let data = sample_pool(l_dom, flux.bound(), samples, seed)?;
            let evolved: Vec<PiecewiseConstantFn> = data
                .iter()
                .map(|u0| evolve(&flux, u0, t_final, delta))
                .collect::<Result<_>>()?;
            let constants = estimate_constants(&flux, 2000)?;
            match cover_solution_set(&flux, l_dom, flux.bound(), t_final, eps, &evolved, &constants)
            {
                Ok(report) => {
                    emit(&out, &report)?;
                    Ok(0)
                }
                Err(Error::Coverage { uncovered, total }) => {
                    let diag =
                        CoverFailure { error: "coverage", uncovered: uncovered.clone(), total };
                    emit(&out, &diag)?;
                    eprintln!("cover failed on {} of {total} samples", uncovered.len());
                    Ok(1)
                }
                Err(e) => Err(e),
            }
        }
        Cmd::LowerBound { flux, l_dom, t_final, eps, cells, delta, out } => {
            let (flux, _) = flux.build()?;
            let family =
                build_witness_family(&flux, l_dom, flux.bound(), t_final, eps, delta, cells)?;
            let constants = estimate_constants(&flux, 2000)?;
            let analytic_lower =
                analytic_lower_bound(&flux, l_dom, flux.bound(), t_final, eps, &constants)?;
            emit(&out, &LowerBoundOutput { analytic_lower, family })?;
            Ok(0)
        }
        Cmd::EntropyScan {
            config,
            flux,
            m_bound,
            l_dom,
            t_final,
            eps_grid,
            samples,
            seed,
            delta,
            out_csv,
            out_json,
        } => {
            let mut cfg: ExperimentConfig = match config {
                Some(path) => {
                    let body = fs::read_to_string(&path)
                        .map_err(|e| Error::Invalid(format!("reading {}: {e}", path.display())))?;
                    serde_json::from_str(&body)
                        .map_err(|e| Error::Invalid(format!("config JSON: {e}")))?
                }
                None => {
                    let flux = flux.ok_or_else(|| {
                        Error::Invalid("entropy-scan needs --config or --flux".into())
                    })?;
                    let spec = parse_flux_spec(&flux, m_bound)?;
                    let resolved_m = spec.build()?.bound();
                    ExperimentConfig {
                        flux: spec,
                        l_dom,
                        m_bound: resolved_m,
                        t_final,
                        eps_grid,
                        samples,
                        seed,
                        delta,
                        out_csv: None,
                        out_json: None,
                    }
                }
            };
            if out_csv.is_some() {
                cfg.out_csv = out_csv;
            }
            if out_json.is_some() {
                cfg.out_json = out_json;
            }
            let report = entropy_scan(&cfg)?;
            if cfg.out_csv.is_none() {
                print!("{}", report.to_csv());
            }
            if let Err(msg) = scan_rows_consistent(&report) {
                eprintln!("bound ordering violated: {msg}");
                return Ok(1);
            }
            Ok(0)
        }
        Cmd::Verify { flux, data, height, t_final, delta, tol, out } => {
            let (flux, _) = flux.build()?;
            let u0 = load_pwc(&data)?;
            let report = verify_regularity(&flux, &u0, height, t_final, delta, tol)?;
            let pass = report.pass;
            emit(&out, &report)?;
            if pass {
                Ok(0)
            } else {
                eprintln!(
                    "verification failed: {}",
                    report.violation.as_deref().unwrap_or("evolved profile check")
                );
                Ok(1)
            }
        }
        Cmd::Constants { flux, grid, out } => {
            let (flux, _) = flux.build()?;
            let constants = estimate_constants(&flux, grid)?;
            emit(&out, &constants)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
