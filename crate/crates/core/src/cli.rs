//! Command-line front end: `solve`, `benchmark` and `eval`.
//!
//! Exit codes: 0 success, 1 usage error, 2 solver failure, 3 I/O or file
//! format failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    default_grid_size, parse_suite, reference_solution, run_benchmark, run_cell, BenchConfig, Method, RunReport, Solved,
};
use crate::basis::BasisForm;
use crate::error::{Error, Result};
use crate::io::{load_solution, save_solution, write_report, write_summary_csv, write_trajectory_csv, write_trajectory_json};
use crate::metrics::{equidistant_grid, Evaluable};
use crate::problems::{build_benchmark, BenchmarkKind, BenchmarkParams};
use crate::solver::SolverConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rpnn", version, about = "Random projection neural network solver for stiff ODE initial value problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one benchmark problem and write its trajectory and report.
    Solve(SolveArgs),
    /// Run every method on a suite of problems and write a summary table.
    Benchmark(BenchmarkArgs),
    /// Evaluate a stored RPNN solution at chosen points.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rpnn,
    Dp45,
    Sdirk,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rpnn => Method::Rpnn,
            MethodArg::Dp45 => Method::Dp45,
            MethodArg::Sdirk => Method::Sdirk,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Shifted,
    Scaled,
}

impl From<BasisArg> for BasisForm {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Shifted => BasisForm::Shifted,
            BasisArg::Scaled => BasisForm::Scaled,
        }
    }
}

/// RPNN network settings shared by `solve` and `benchmark`.
#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Hidden nodes per component.
    #[arg(long, default_value_t = 40)]
    pub hidden: usize,
    /// Collocation points per segment.
    #[arg(long, default_value_t = 20)]
    pub collocation: usize,
    /// Gauss-Newton iterations per segment.
    #[arg(long, default_value_t = 4)]
    pub maxiter: usize,
    /// Gaussian form: bias as a shift (`shifted`) or as an amplitude (`scaled`).
    #[arg(long, value_enum, default_value_t = BasisArg::Scaled)]
    pub basis: BasisArg,
}

impl NetworkArgs {
    fn config(&self, tol: f64, seed: u64) -> SolverConfig {
        SolverConfig {
            h: self.hidden,
            n: self.collocation,
            maxiter: self.maxiter,
            basis_form: self.basis.into(),
            ..SolverConfig::default()
        }
        .with_tol(tol)
        .with_seed(seed)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// prothero_robinson (pr), van_der_pol (vdp), rober or hires.
    #[arg(long)]
    pub problem: String,
    /// Van der Pol stiffness parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Prothero-Robinson eigenvalue, must be negative.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, env = "RPNN_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Rpnn)]
    pub method: MethodArg,
    /// Timed repetitions of the solve.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Trajectory output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Equidistant output points, both ends included.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    /// JSON run report with error metrics and timings.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Metric grid size; defaults depend on the problem.
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Store the piecewise RPNN solution for later `eval`.
    #[arg(long)]
    pub save_solution: Option<PathBuf>,
    #[command(flatten)]
    pub network: NetworkArgs,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Comma-separated problems, or `all`.
    #[arg(long)]
    pub suite: String,
    /// Van der Pol μ values; one case per value.
    #[arg(long, value_delimiter = ',')]
    pub mu: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, env = "RPNN_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Methods to run; all three by default.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub method: Vec<MethodArg>,
    /// Overrides every problem's metric grid size.
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Directory for the per-cell reports and the summary.
    #[arg(long, default_value = "rpnn-benchmark")]
    pub out: PathBuf,
    /// Summary table format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub network: NetworkArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Solution file written by `solve --save-solution`.
    #[arg(long)]
    pub solution: PathBuf,
    /// Equidistant points over the whole domain, both ends included.
    #[arg(long, conflicts_with = "at")]
    pub points: Option<usize>,
    /// Explicit evaluation point; may be repeated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub at: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) => EXIT_USAGE,
        Error::Numeric(_) | Error::StepUnderflow { .. } | Error::IntegratorFailure { .. } => EXIT_SOLVER,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Format(_) => EXIT_IO,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Benchmark(a) => cmd_benchmark(&a),
        Command::Eval(a) => cmd_eval(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_samples(path: Option<&Path>, format: Format, xs: &[f64], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = open_out(path)?;
    match format {
        Format::Csv => write_trajectory_csv(&mut out, xs, rows)?,
        Format::Json => {
            write_trajectory_json(&mut out, xs, rows)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn sample(sol: &dyn Evaluable, xs: &[f64]) -> Result<Vec<Vec<f64>>> {
    xs.iter().map(|&x| sol.eval_at(x)).collect()
}

pub fn cmd_solve(a: &SolveArgs) -> Result<i32> {
    let kind = BenchmarkKind::parse(&a.problem)?;
    let params = BenchmarkParams {
        mu: a.mu,
        lambda: a.lambda,
    };
    let problem = build_benchmark(kind, params)?;
    let method = Method::from(a.method);
    let cfg = a.network.config(a.tol, a.seed);
    cfg.validate()?;
    if a.repeats == 0 {
        return Err(Error::Argument("repeats must be at least 1".into()));
    }
    if a.save_solution.is_some() && method != Method::Rpnn {
        return Err(Error::Argument("--save-solution needs --method rpnn".into()));
    }
    let grid_n = a.grid_size.unwrap_or_else(|| default_grid_size(kind, params));
    let grid = equidistant_grid(problem.x0(), problem.x_end(), grid_n)?;
    let out_xs = equidistant_grid(problem.x0(), problem.x_end(), a.points)?;

    let reference = reference_solution(&problem)?;
    let (report, solved) = run_cell(&problem, method, &cfg, a.repeats, reference.as_ref(), &grid);
    if let Some(path) = &a.report {
        write_report(path, &report)?;
    }
    let Some(solved) = solved else {
        eprintln!(
            "error: {} failed on {}: {}",
            method,
            problem.name(),
            report.error.as_deref().unwrap_or("unknown failure")
        );
        return Ok(EXIT_SOLVER);
    };

    if let Some(path) = &a.out {
        write_samples(Some(path), a.format, &out_xs, &sample(&solved, &out_xs)?)?;
    }
    if let (Some(path), Solved::Rpnn(sol)) = (&a.save_solution, &solved) {
        save_solution(path, problem.name(), problem.params(), sol)?;
    }
    print_summary(&report);
    Ok(EXIT_OK)
}

fn print_summary(r: &RunReport) {
    let linf = r.metrics.as_ref().map_or(f64::NAN, |m| m.max_linf());
    let mae = r.metrics.as_ref().map_or(f64::NAN, |m| m.max_mae());
    let t = r.times.map_or(f64::NAN, |t| t.median);
    println!(
        "{} {} tol={:e}: points={} segments={} max_linf={:.3e} max_mae={:.3e} median_time={:.3e}s",
        r.problem, r.method, r.tol, r.n_points, r.n_segments, linf, mae, t
    );
}

fn report_file_name(r: &RunReport) -> String {
    let params: String = r.params.iter().map(|(k, v)| format!("_{k}{v}")).collect();
    format!("{}{}_{}_tol{:e}.json", r.problem, params, r.method, r.tol)
}

pub fn cmd_benchmark(a: &BenchmarkArgs) -> Result<i32> {
    let cases = parse_suite(&a.suite, &a.mu, a.lambda)?;
    let methods: Vec<Method> = if a.method.is_empty() {
        Method::ALL.to_vec()
    } else {
        a.method.iter().map(|&m| m.into()).collect()
    };
    let cfg = BenchConfig {
        tol: a.tol,
        seed: a.seed,
        solver: a.network.config(a.tol, a.seed),
        repeats: a.repeats,
        grid_size: a.grid_size,
        methods,
    };
    let reports = run_benchmark(&cases, &cfg)?;
    std::fs::create_dir_all(&a.out)?;
    for r in &reports {
        write_report(&a.out.join(report_file_name(r)), r)?;
        print_summary(r);
    }
    match a.format {
        Format::Csv => write_summary_csv(File::create(a.out.join("summary.csv"))?, &reports)?,
        Format::Json => std::fs::write(a.out.join("summary.json"), serde_json::to_string_pretty(&reports)?)?,
    }
    let failed = reports.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        eprintln!("{failed} of {} cells failed", reports.len());
    }
    Ok(if failed == reports.len() { EXIT_SOLVER } else { EXIT_OK })
}

pub fn cmd_eval(a: &EvalArgs) -> Result<i32> {
    let stored = load_solution(&a.solution)?;
    let sol = &stored.solution;
    let xs = if a.at.is_empty() {
        equidistant_grid(sol.x0(), sol.x_end(), a.points.unwrap_or(1000))?
    } else {
        a.at.clone()
    };
    let rows = sol.eval_many(&xs)?;
    write_samples(a.out.as_deref(), a.format, &xs, &rows)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        // clap prints its own errors uncaptured, so only check that they are errors
        assert!(Cli::try_parse_from(["rpnn"]).unwrap_err().use_stderr());
        assert!(Cli::try_parse_from(["rpnn", "solve"]).unwrap_err().use_stderr());
        assert!(!Cli::try_parse_from(["rpnn", "--help"]).unwrap_err().use_stderr());
        assert_eq!(run(["rpnn", "solve", "--problem", "vdp", "--mu", "-1"]), EXIT_USAGE);
        assert_eq!(run(["rpnn", "solve", "--problem", "lorenz"]), EXIT_USAGE);
        assert_eq!(run(["rpnn", "benchmark", "--suite", ""]), EXIT_USAGE);
    }

    #[test]
    fn negative_lambda_parses() {
        let cli = Cli::try_parse_from(["rpnn", "solve", "--problem", "pr", "--lambda", "-1e5"]).unwrap();
        match cli.command {
            Command::Solve(a) => assert_eq!(a.lambda, Some(-1e5)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Format("x".into())), EXIT_IO);
        assert_eq!(
            exit_code(&Error::IntegratorFailure {
                x: 0.0,
                reason: "x".into()
            }),
            EXIT_SOLVER
        );
    }

    #[test]
    fn report_names_are_distinct_per_cell() {
        let mut names = std::collections::BTreeSet::new();
        for case in parse_suite("all", &[1.0, 1000.0], None).unwrap() {
            let p = case.problem().unwrap();
            for m in Method::ALL {
                let r = RunReport {
                    problem: p.name().into(),
                    params: p.params().clone(),
                    method: m,
                    tol: 1e-3,
                    seed: 0,
                    metrics: None,
                    n_points: 0,
                    n_segments: 0,
                    times: None,
                    status: crate::bench::RunStatus::Failed,
                    error: None,
                };
                names.insert(report_file_name(&r));
            }
        }
        assert_eq!(names.len(), 15);
    }
}
