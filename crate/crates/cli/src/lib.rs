//! Problem files, reports and the `boxdual` command line.
//!
//! Exit codes depend only on the solver status:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | converged (and, for `check`, every invariant held) |
//! | 1 | `check` found a violated invariant |
//! | 2 | infeasible data |
//! | 3 | input error: bad arguments, unreadable or malformed file |
//! | 4 | no convergence within the budget |

pub mod check;
pub mod format;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use boxdual::markov::{
    build_chain, evenly_spaced_rows, reconstruct_initial, smooth_profile, ChainKind, ReconstructionCase,
};
use boxdual::solver::{solve, solve_noisy};
use boxdual::{Error, SensitivityReport, SolverOptions};
use clap::{Parser, Subcommand, ValueEnum};

use crate::format::{parse_problem, FormatError, ProblemFile};
use crate::report::{Format, Report};

/// Process exit statuses.
pub mod exit {
    /// Converged.
    pub const OK: u8 = 0;
    /// An invariant checked by `check` failed.
    pub const CHECK_FAILED: u8 = 1;
    /// The data lie outside the image of the box.
    pub const INFEASIBLE: u8 = 2;
    /// Bad arguments or input file.
    pub const INPUT: u8 = 3;
    /// Iteration budget exhausted or similar.
    pub const NOT_CONVERGED: u8 = 4;
}

/// Entropy solutions of box-constrained linear inverse problems.
#[derive(Debug, Parser)]
#[command(name = "boxdual", version)]
pub struct Cli {
    /// Sup-norm target for the residual `A x - y`.
    #[arg(long, global = true, default_value_t = SolverOptions::default().tolerance)]
    pub tol: f64,
    /// Iteration budget of the dual ascent.
    #[arg(long = "max-iter", global = true, default_value_t = SolverOptions::default().max_iterations)]
    pub max_iter: usize,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Report layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

/// Chains offered by `demo-markov`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoChain {
    /// Nearest-neighbour walk with reflecting ends.
    Reflecting,
    /// Every state jumps to every state with equal probability.
    Uniform,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file; files with a noise block go to the noisy solver.
    Solve {
        /// Problem file.
        file: PathBuf,
    },
    /// Solve `A x + ε = y` for a file with a noise block.
    SolveNoisy {
        /// Problem file.
        file: PathBuf,
    },
    /// Solve and report the Jacobians with respect to the data.
    Sensitivity {
        /// Problem file.
        file: PathBuf,
    },
    /// Reconstruct a bounded initial observable of a Markov chain.
    DemoMarkov {
        /// Number of states.
        #[arg(long, default_value_t = 50)]
        n: usize,
        /// Number of evenly spaced observed states.
        #[arg(long, default_value_t = 10)]
        m: usize,
        /// Upper bound b of the observable; the lower bound is 0.
        #[arg(long, default_value_t = 1.0)]
        bound: f64,
        /// Transition matrix.
        #[arg(long, value_enum, default_value_t = DemoChain::Reflecting)]
        kind: DemoChain,
    },
    /// Solve, then run the invariant suite and the oracle comparisons.
    Check {
        /// Problem file.
        file: PathBuf,
    },
}

/// Failure of one invocation, with its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Could not read the input or write the report.
    #[error("{path}: {source}")]
    Io {
        /// File involved.
        path: String,
        /// Cause.
        source: std::io::Error,
    },
    /// Rejected problem file.
    #[error("{path}: {source}")]
    Format {
        /// File involved.
        path: String,
        /// Cause.
        source: FormatError,
    },
    /// Bad option values.
    #[error("{0}")]
    Usage(String),
    /// The solver gave up.
    #[error("{0}")]
    Solver(#[from] Error),
}

impl CliError {
    /// Exit status for this failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } | CliError::Usage(_) => exit::INPUT,
            CliError::Solver(e) => solver_exit_code(e),
        }
    }
}

/// Exit status for a core error.
pub fn solver_exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible { .. } => exit::INFEASIBLE,
        Error::MaxIterationsExceeded { .. }
        | Error::NotConverged
        | Error::SingularNormalMatrix { .. }
        | Error::ClosedFormMismatch { .. }
        | Error::NotConvergedOracle { .. } => exit::NOT_CONVERGED,
        _ => exit::INPUT,
    }
}

fn load(path: &Path) -> Result<ProblemFile, CliError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: name.clone(),
        source,
    })?;
    parse_problem(&text).map_err(|source| CliError::Format { path: name, source })
}

fn options(cli: &Cli) -> Result<SolverOptions, CliError> {
    let opts = SolverOptions {
        tolerance: cli.tol,
        max_iterations: cli.max_iter,
        ..SolverOptions::default()
    };
    opts.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(opts)
}

/// Output of a successful invocation.
pub struct Outcome {
    /// The report.
    pub report: String,
    /// Exit status.
    pub code: u8,
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let opts = options(cli)?;
    let mut r = Report::new(cli.format);
    let mut code = exit::OK;
    match &cli.command {
        Command::Solve { file } => match load(file)? {
            ProblemFile::Clean(p) => report::solution(&mut r, &solve(&p, &opts)?),
            ProblemFile::Noisy(p) => report::noisy_solution(&mut r, &solve_noisy(&p, &opts)?),
        },
        Command::SolveNoisy { file } => match load(file)? {
            ProblemFile::Noisy(p) => report::noisy_solution(&mut r, &solve_noisy(&p, &opts)?),
            ProblemFile::Clean(_) => {
                return Err(CliError::Usage(format!("{}: solve-noisy needs a noise block", file.display())))
            }
        },
        Command::Sensitivity { file } => {
            let problem = load(file)?;
            // For noisy files the Jacobians refer to the augmented system.
            let p = match &problem {
                ProblemFile::Clean(p) => p.clone(),
                ProblemFile::Noisy(p) => p.augment()?,
            };
            let s = solve(&p, &opts)?;
            report::solution(&mut r, &s);
            match SensitivityReport::compute(&s, &p) {
                Ok(sens) => report::sensitivity(&mut r, &sens),
                Err(Error::SingularNormalMatrix { condition }) => {
                    r.field("sensitivity", "unavailable");
                    r.real("condition", condition);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::DemoMarkov { n, m, bound, kind } => {
            if *m == 0 || m > n {
                return Err(CliError::Usage(format!("--m must lie in 1..={n}, got {m}")));
            }
            let kind = match kind {
                DemoChain::Reflecting => ChainKind::ReflectingRandomWalk,
                DemoChain::Uniform => ChainKind::UniformSmoother,
            };
            let chain = build_chain(*n, kind)?;
            let case = ReconstructionCase::from_truth(chain, evenly_spaced_rows(*n, *m), *bound, smooth_profile(*n, *bound))?;
            let rec = reconstruct_initial(&case, &opts)?;
            report::markov(&mut r, &case, &rec);
        }
        Command::Check { file } => {
            let problem = load(file)?;
            let p = match &problem {
                ProblemFile::Clean(p) => p.clone(),
                ProblemFile::Noisy(p) => p.augment()?,
            };
            let s = solve(&p, &opts)?;
            let lines = check::run_checks(&p, &s);
            for line in &lines {
                let verdict = match line.passed {
                    Some(true) => "pass",
                    Some(false) => "FAIL",
                    None => "skip",
                };
                r.field(line.name, format!("{verdict} ({})", line.detail));
            }
            if lines.iter().any(|l| l.passed == Some(false)) {
                code = exit::CHECK_FAILED;
            }
        }
    }
    Ok(Outcome {
        report: r.finish(),
        code,
    })
}

/// Parses `args` (program name first), runs, writes the report and any
/// diagnostics, and returns the exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::INPUT } else { exit::OK };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &out.report).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                }),
                None => {
                    print!("{}", out.report);
                    Ok(())
                }
            };
            match written {
                Ok(()) => out.code,
                Err(e) => {
                    eprintln!("boxdual: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            eprintln!("boxdual: {e}");
            e.exit_code()
        }
    }
}
