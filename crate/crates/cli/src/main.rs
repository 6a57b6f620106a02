use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harmonic_cli::commands;
use harmonic_cli::config::{parse_list, parse_pair};
use harmonic_cli::{exit, CliError, Format, RunConfig};
use serde_json::Value;

/// Infinite harmonic chain: simulation, classification of initial data,
/// limits, and oscillatory-integral bound sweeps.
#[derive(Parser)]
#[command(name = "harmonic-chain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Membership verdict for an initial condition (exit 0/2/3).
    Classify(Flags),
    /// Trajectories q_k(t) as CSV or JSON, with per-index plot files.
    Simulate(Flags),
    /// Limits L+, L- and the offset nu.
    Limits(Flags),
    /// Spectral densities phi+ and phi- on the lambda grid.
    Profile(Flags),
    /// Grid suprema of the oscillatory integrals or of |q_k(t)|.
    Bounds(Flags),
    /// Bessel-integral and alternating-sum tables, or the even-sum identity.
    Bessel(Flags),
    /// Runs the acceptance criteria; exit 0 iff all pass.
    Verify(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// JSON file with defaults; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `sign`, `spike:3`, `constant:2`, `log-decay`, ..., optionally `@window`, or a JSON object.
    #[arg(long)]
    ic: Option<String>,
    #[arg(long)]
    omega: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    report_step: Option<f64>,
    /// ode, spectral, bessel, closed-form, or all (cross-validation).
    #[arg(long)]
    solver: Option<String>,
    /// Comma-separated lattice indices.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    indices: Option<Vec<i64>>,
    /// `lo,hi`
    #[arg(long, value_parser = parse_pair)]
    n_range: Option<[f64; 2]>,
    /// `lo,hi`
    #[arg(long, value_parser = parse_pair)]
    t_range: Option<[f64; 2]>,
    /// Shorthand for `--n-range 0,N` (`1,N` for alternating sums).
    #[arg(long, conflicts_with = "n_range")]
    n_max: Option<f64>,
    /// Shorthand for `--t-range 0,T`.
    #[arg(long, conflicts_with = "t_range")]
    t_max: Option<f64>,
    /// Grid steps `n,t`.
    #[arg(long, value_parser = parse_step)]
    step: Option<[f64; 2]>,
    /// Comma-separated gamma = t/n values.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    #[arg(long)]
    regime: Option<String>,
    /// C or L.
    #[arg(long)]
    quantity: Option<String>,
    #[arg(long)]
    target: Option<String>,
    /// Repeat the sweep at twice the density.
    #[arg(long)]
    refine: bool,
    /// Comma-separated criterion numbers.
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u8>>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_step(s: &str) -> Result<[f64; 2], String> {
    let v = parse_list::<f64>(s)?;
    match v.as_slice() {
        [n, t] if *n > 0.0 && *t >= 0.0 => Ok([*n, *t]),
        _ => Err(format!("expected `n_step,t_step` with n_step > 0, got `{s}`")),
    }
}

impl Flags {
    fn into_config(self, command: &str, alt_sums: bool) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(c) = &base.command {
            if c != command {
                return Err(CliError::usage(format!("config was written by `{c}`, not `{command}`")));
            }
        }
        let ic = self.ic.map(|s| match serde_json::from_str::<Value>(&s) {
            Ok(v @ Value::Object(_)) => v,
            _ => Value::String(s),
        });
        let n_lo = if alt_sums { 1.0 } else { 0.0 };
        let flags = RunConfig {
            command: Some(command.to_string()),
            ic,
            omega: self.omega,
            t_end: self.t_end,
            dt: self.dt,
            report_step: self.report_step,
            solver: self.solver,
            indices: self.indices,
            n_range: self.n_range.or(self.n_max.map(|n| [n_lo, n])),
            t_range: self.t_range.or(self.t_max.map(|t| [0.0, t])),
            step: self.step,
            gamma: self.gamma,
            regime: self.regime,
            quantity: self.quantity,
            target: self.target,
            refine: self.refine.then_some(true),
            criteria: self.criteria,
            format: self.format,
            out: self.out,
        };
        Ok(base.overlay(flags))
    }
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("HARMONIC_BOUND_THREADS") {
        let n: usize =
            v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                CliError::usage(format!("HARMONIC_BOUND_THREADS must be a positive integer, got `{v}`"))
            })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    Ok(())
}

type Handler = fn(&mut RunConfig) -> Result<i32, CliError>;

fn run(cli: Cli) -> Result<i32, CliError> {
    init_threads()?;
    let (name, flags, cmd): (&str, Flags, Handler) = match cli.command {
        Command::Classify(f) => ("classify", f, commands::classify_cmd),
        Command::Simulate(f) => ("simulate", f, commands::simulate_cmd),
        Command::Limits(f) => ("limits", f, commands::limits_cmd),
        Command::Profile(f) => ("profile", f, commands::profile_cmd),
        Command::Bounds(f) => ("bounds", f, commands::bounds_cmd),
        Command::Bessel(f) => ("bessel", f, commands::bessel_cmd),
        Command::Verify(f) => ("verify", f, commands::verify_cmd),
    };
    let alt_sums = flags
        .target
        .as_deref()
        .is_some_and(|t| t.to_ascii_lowercase().contains("alt"));
    let mut cfg = flags.into_config(name, alt_sums)?;
    cmd(&mut cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
