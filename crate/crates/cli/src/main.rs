//! `gcq`: single solves, convergence studies and identity checks.
//!
//! Exit codes: 0 success, 1 configuration or parse error, 2 I/O error,
//! 3 numerical failure.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gcq_core::harness::{
    checks, emit_csv, emit_pointwise_csv, run_convergence_study, run_solve, write_convergence_csv,
    write_pointwise_csv, ExperimentConfig, KernelSpec, MeshSpec, Mode,
};
use gcq_core::{BackwardIndex, GcqError, SolveOptions, StepperKind};

#[derive(Parser, Debug)]
#[command(
    name = "gcq",
    version,
    about = "Generalized convolution quadrature with variable steps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve once and write pointwise values and errors
    Solve(ProblemArgs),
    /// Run a convergence study over several step counts
    Study {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Step counts, comma separated and strictly increasing
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Fill the seconds column with wall-clock times
        #[arg(long)]
        timing: bool,
    },
    /// Run the identity suites and print one line per suite
    Check,
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Registry name (example1, power:p, rational:a,b/c,d, shifted:a:n) or expression in s
    #[arg(long, default_value = "example1")]
    kernel: String,
    /// Growth exponent of an expression kernel
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Abscissa of analyticity of an expression kernel
    #[arg(long, allow_negative_numbers = true)]
    sigma0: Option<f64>,
    #[arg(long, default_value = "backward")]
    mode: String,
    /// trap, bdf2 or bdf1
    #[arg(long, default_value = "trap")]
    stepper: String,
    /// uniform[:N] or graded:alpha[:N]
    #[arg(long)]
    mesh: String,
    /// Final time
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0)]
    rho: i32,
    /// Number of contour nodes
    #[arg(long)]
    nq: Option<usize>,
    /// Output CSV; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Step index of the previous-value term in the backward trapezoidal solve
    #[arg(long, value_enum, default_value_t = IndexArg::Printed)]
    backward_index: IndexArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum IndexArg {
    Printed,
    Consistent,
}

impl ProblemArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mesh: MeshSpec = self.mesh.parse()?;
        let mut kernel = KernelSpec::new(self.kernel.clone());
        kernel.mu = self.mu;
        kernel.sigma0 = self.sigma0;
        let mut config = ExperimentConfig::new(kernel, mesh);
        config.mode = self.mode.parse::<Mode>()?;
        config.stepper = self.stepper.parse::<StepperKind>()?;
        config.horizon = self.horizon;
        config.rho = self.rho;
        config.nq = self.nq;
        config.options = SolveOptions {
            backward_index: match self.backward_index {
                IndexArg::Printed => BackwardIndex::Printed,
                IndexArg::Consistent => BackwardIndex::Consistent,
            },
            ..SolveOptions::default()
        };
        Ok(config)
    }
}

fn solve(args: &ProblemArgs) -> Result<ExitCode> {
    let config = args.config()?;
    config.validate()?;
    if config.mesh.steps().is_none() {
        return Err(GcqError::Parameter(format!(
            "mesh `{}` needs a step count for solve",
            args.mesh
        ))
        .into());
    }
    let report = run_solve(&config, None)?;
    let rows = report.pointwise();
    match &args.out {
        Some(path) => emit_pointwise_csv(&rows, path)
            .with_context(|| format!("writing {}", path.display()))?,
        None => write_pointwise_csv(&rows, io::stdout().lock())?,
    }
    if let Some(e) = report.max_error() {
        eprintln!(
            "N = {}, N_Q = {}, max error {e:.3e}",
            report.mesh.len(),
            report.node_count
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn study(args: &ProblemArgs, n: &[usize], timing: bool) -> Result<ExitCode> {
    let mut config = args.config()?;
    config.n_list = n.to_vec();
    config.timing = timing;
    let report = run_convergence_study(&config)?;
    match &args.out {
        Some(path) => {
            emit_csv(&report, path).with_context(|| format!("writing {}", path.display()))?
        }
        None => write_convergence_csv(&report, io::stdout().lock())?,
    }
    if let Some((slope, residual)) = report.fitted_slope() {
        eprintln!(
            "{}: fitted slope {slope:.3} (residual {residual:.2e})",
            report.label
        );
    }
    let mut failed = false;
    for row in report.failures() {
        eprintln!(
            "N = {} failed: {}",
            row.n,
            row.diagnostic.as_deref().unwrap_or("")
        );
        failed = true;
    }
    Ok(if failed {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn check() -> Result<ExitCode> {
    let results = checks::run_all()?;
    let mut out = io::stdout().lock();
    for r in &results {
        writeln!(
            out,
            "{:<11} {} ({} cases, worst {:.2e}, tolerance {:.0e})",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.cases,
            r.worst,
            r.tolerance
        )?;
    }
    Ok(if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<GcqError>() {
        if e.is_io() {
            2
        } else if e.is_numerical() {
            3
        } else {
            1
        }
    } else if err.downcast_ref::<io::Error>().is_some() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => solve(args),
        Command::Study { problem, n, timing } => study(problem, n, *timing),
        Command::Check => check(),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
