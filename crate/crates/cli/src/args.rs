//! Command-line syntax and dispatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, CertifyConfig, ExportFormat, SimMode, SimulateConfig};
use crate::config::{InitialArg, Number, RunConfig, Tolerances, VariantArg};
use crate::error::CliError;
use crate::report::Report;

#[derive(Debug, Parser)]
#[command(name = "pepkit", version, about = "Worst-case analysis of gradient descent with exact line search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Also write the report as JSON to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the performance-estimation SDP and compare with the analytic rate.
    Solve(PepArgs),
    /// Solve and print the dual multipliers next to their closed forms.
    Duals(PepArgs),
    /// Verify the proof certificates in exact rational arithmetic.
    Certify(CertifyArgs),
    /// Simulate the methods on quadratics.
    Simulate {
        #[command(subcommand)]
        mode: SimulateCommand,
    },
    /// Write the compiled SDP.
    Export {
        #[command(flatten)]
        pep: PepArgs,
        #[arg(long, value_enum, default_value = "sdpa")]
        format: ExportFormat,
        /// Output file; standard output when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct TolArgs {
    #[arg(long, value_name = "TOL", allow_hyphen_values = true)]
    pub tol_gap: Option<f64>,
    #[arg(long, value_name = "TOL", allow_hyphen_values = true)]
    pub tol_feas: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Accepted |optimum - analytic| for `solve`.
    #[arg(long, value_name = "TOL", allow_hyphen_values = true)]
    pub bound_tol: Option<f64>,
}

impl TolArgs {
    fn apply(&self, mut t: Tolerances, duals: bool) -> Result<Tolerances, CliError> {
        for v in [self.tol_gap, self.tol_feas, self.bound_tol].into_iter().flatten() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Input(format!("tolerances must be positive, got {v}")));
            }
        }
        if let Some(g) = self.tol_gap {
            if duals {
                t.duals_gap = g;
            } else {
                t.sdp_gap = g;
            }
        }
        if let Some(f) = self.tol_feas {
            t.sdp_feas = f;
        }
        if let Some(m) = self.max_iter {
            t.sdp_max_iter = m;
        }
        if let Some(b) = self.bound_tol {
            t.bound = b;
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Args)]
pub struct PepArgs {
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub mu: String,
    #[arg(long = "L", default_value = "10", allow_hyphen_values = true)]
    pub l: String,
    #[arg(long = "N", default_value_t = 1)]
    pub n: usize,
    #[arg(long = "R", default_value_t = 1.0, allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long, value_enum, default_value = "exact-ls")]
    pub variant: VariantArg,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    #[arg(long, value_enum, default_value = "function-gap")]
    pub initial: InitialArg,
    #[command(flatten)]
    pub tol: TolArgs,
}

impl PepArgs {
    pub fn config(&self, duals: bool) -> Result<RunConfig, CliError> {
        Ok(RunConfig {
            mu: Number::parse("mu", &self.mu)?,
            l: Number::parse("L", &self.l)?,
            eps: self.eps.as_deref().map(|e| Number::parse("eps", e)).transpose()?,
            n: self.n,
            r: self.r,
            variant: self.variant,
            initial: self.initial,
            tolerances: self.tol.apply(Tolerances::default(), duals)?,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    /// Rational, e.g. `1` or `3/2`.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    #[arg(long = "L", allow_hyphen_values = true)]
    pub l: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    /// Also check the noisy certificate.
    #[arg(long)]
    pub noisy: bool,
    /// Also check the symmetric rewriting of the bound.
    #[arg(long)]
    pub symmetric: bool,
    /// Also check the fixed-step reduction.
    #[arg(long)]
    pub fixed_step: bool,
    /// Check this many seeded random parameter sets instead.
    #[arg(long, value_name = "N")]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value = "1")]
    pub mu: String,
    #[arg(long = "L", default_value = "10")]
    pub l: String,
    #[arg(long, default_value_t = 8)]
    pub iters: usize,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Tight instance for exact line search (and the fixed step).
    Example1 {
        #[command(flatten)]
        common: SimArgs,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Tight instance for the noisy method.
    Example2 {
        #[command(flatten)]
        common: SimArgs,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Random diagonal quadratics with spectrum in [mu, L].
    Random {
        #[command(flatten)]
        common: SimArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also run the noisy method with random directions.
        #[arg(long)]
        eps: Option<String>,
    },
}

fn sim_config(mode: SimMode, c: &SimArgs, eps: Option<&str>, dim: usize, trials: usize, seed: u64) -> Result<SimulateConfig, CliError> {
    Ok(SimulateConfig {
        mode,
        mu: Number::parse("mu", &c.mu)?,
        l: Number::parse("L", &c.l)?,
        eps: eps.map(|e| Number::parse("eps", e)).transpose()?,
        iters: c.iters,
        dim,
        trials,
        seed,
        tolerances: Tolerances::default(),
    })
}

/// Result of a command: the report and, for `export` without `--out`, the
/// exported text.
pub struct Outcome {
    pub report: Report,
    pub payload: Option<String>,
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    let report = match command {
        Command::Solve(a) => commands::cmd_solve(&a.config(false)?)?,
        Command::Duals(a) => commands::cmd_duals(&a.config(true)?)?,
        Command::Certify(a) => {
            let strict = |name: &str, v: &Option<String>| v.as_deref().map(|s| Number::parse_strict(name, s)).transpose();
            commands::cmd_certify(&CertifyConfig {
                mu: strict("mu", &a.mu)?,
                l: strict("L", &a.l)?,
                eps: strict("eps", &a.eps)?,
                noisy: a.noisy,
                symmetric: a.symmetric,
                fixed_step: a.fixed_step,
                random: a.random,
                seed: a.seed,
                tolerances: Tolerances::default(),
            })?
        }
        Command::Simulate { mode } => {
            let cfg = match mode {
                SimulateCommand::Example1 { common, dim } => sim_config(SimMode::Example1, common, None, *dim, 0, 0)?,
                SimulateCommand::Example2 { common, eps, dim } => {
                    sim_config(SimMode::Example2, common, Some(eps), *dim, 0, 0)?
                }
                SimulateCommand::Random {
                    common,
                    trials,
                    seed,
                    eps,
                } => sim_config(SimMode::Random, common, eps.as_deref(), 0, *trials, *seed)?,
            };
            commands::cmd_simulate(&cfg)?
        }
        Command::Export { pep, format, out } => {
            let (report, payload) = commands::cmd_export(&pep.config(false)?, *format, out.as_deref())?;
            return Ok(Outcome { report, payload });
        }
    };
    Ok(Outcome { report, payload: None })
}

/// Runs a parsed command line, prints the results and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(&cli.command) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            match &out.payload {
                Some(text) => {
                    let _ = stdout.write_all(text.as_bytes());
                    eprintln!("{}", out.report);
                }
                None => {
                    let _ = writeln!(stdout, "{}", out.report);
                }
            }
            if let Some(path) = &cli.json {
                let written = out
                    .report
                    .to_json()
                    .map_err(CliError::from)
                    .and_then(|s| {
                        std::fs::write(path, s).map_err(|source| CliError::Io {
                            path: path.display().to_string(),
                            source,
                        })
                    });
                if let Err(e) = written {
                    eprintln!("error: {e}");
                    return e.exit_code();
                }
            }
            out.report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
