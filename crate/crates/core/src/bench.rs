//! Benchmark harness: solve each (problem, method) cell, time it over
//! repeats and score it on an equidistant grid against a reference.
//!
//! The reference is the closed-form solution when the problem has one and
//! otherwise an SDIRK run at [`REFERENCE_TOL`]. It is computed once per
//! problem and is not part of any timing.

use std::collections::BTreeMap;
use std::fmt;
use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::metrics::{equidistant_grid, error_metrics, AnalyticSolution, ErrorMetrics, Evaluable};
use crate::problems::{build_benchmark, BenchmarkKind, BenchmarkParams, OdeProblem};
use crate::reference::{dp45_solve, sdirk_solve, StepControl, Trajectory};
use crate::solver::{solve_adaptive, PiecewiseSolution, SolverConfig};

pub const REFERENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rpnn,
    Dp45,
    Sdirk,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Rpnn, Method::Dp45, Method::Sdirk];

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "rpnn" => Ok(Self::Rpnn),
            "dp45" => Ok(Self::Dp45),
            "sdirk" => Ok(Self::Sdirk),
            other => arg_err(format!("unknown method `{other}` (expected rpnn, dp45 or sdirk)")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Rpnn => "rpnn",
            Self::Dp45 => "dp45",
            Self::Sdirk => "sdirk",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Output of any of the three methods.
#[derive(Debug, Clone)]
pub enum Solved {
    Rpnn(PiecewiseSolution),
    Integrator(Trajectory),
}

impl Solved {
    /// Collocation points for RPNN, stored trajectory points for the
    /// integrators.
    pub fn n_points(&self) -> usize {
        match self {
            Solved::Rpnn(s) => s.total_points(),
            Solved::Integrator(t) => t.len(),
        }
    }

    /// Accepted segments for RPNN, accepted steps for the integrators.
    pub fn n_segments(&self) -> usize {
        match self {
            Solved::Rpnn(s) => s.segments().len(),
            Solved::Integrator(t) => t.steps(),
        }
    }

    fn inner(&self) -> &dyn Evaluable {
        match self {
            Solved::Rpnn(s) => s,
            Solved::Integrator(t) => t,
        }
    }
}

impl Evaluable for Solved {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn domain(&self) -> (f64, f64) {
        self.inner().domain()
    }

    fn eval_at(&self, x: f64) -> Result<Vec<f64>> {
        self.inner().eval_at(x)
    }
}

/// Solves `problem` with `method` at the default settings. `tol` is the
/// Gauss-Newton tolerance for RPNN and both the absolute and relative
/// tolerance for the integrators.
pub fn solve_with(problem: &OdeProblem, method: Method, tol: f64, seed: u64) -> Result<Solved> {
    solve_configured(problem, method, &SolverConfig::default().with_tol(tol).with_seed(seed))
}

/// Like [`solve_with`], taking every RPNN setting from `cfg`; the
/// integrators only use `cfg.tol`.
pub fn solve_configured(problem: &OdeProblem, method: Method, cfg: &SolverConfig) -> Result<Solved> {
    match method {
        Method::Rpnn => solve_adaptive(problem, cfg).map(Solved::Rpnn),
        Method::Dp45 => dp45_solve(problem, &StepControl::new(cfg.tol)).map(Solved::Integrator),
        Method::Sdirk => sdirk_solve(problem, &StepControl::new(cfg.tol)).map(Solved::Integrator),
    }
}

/// Wall times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub repeats: usize,
}

impl TimingSummary {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return arg_err("no timing samples");
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) };
        Ok(Self {
            median,
            min: s[0],
            max: s[n - 1],
            repeats: n,
        })
    }
}

fn check_repeats(repeats: usize) -> Result<()> {
    if repeats == 0 {
        return arg_err("repeats must be at least 1");
    }
    Ok(())
}

/// Runs the solve `repeats` times and keeps the last result; all runs are
/// identical at a fixed seed.
pub fn timed_solve(problem: &OdeProblem, method: Method, cfg: &SolverConfig, repeats: usize) -> Result<(Solved, TimingSummary)> {
    check_repeats(repeats)?;
    let mut samples = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let t0 = Instant::now();
        let solved = solve_configured(problem, method, cfg)?;
        samples.push(t0.elapsed().as_secs_f64());
        last = Some(black_box(solved));
    }
    Ok((last.expect("repeats >= 1"), TimingSummary::from_samples(&samples)?))
}

/// Times evaluation of the whole grid, `repeats` times.
pub fn eval_grid_timing(solution: &dyn Evaluable, grid: &[f64], repeats: usize) -> Result<TimingSummary> {
    check_repeats(repeats)?;
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let t0 = Instant::now();
        for &x in grid {
            black_box(solution.eval_at(black_box(x))?);
        }
        samples.push(t0.elapsed().as_secs_f64());
    }
    TimingSummary::from_samples(&samples)
}

/// Closed-form solution if known, else a tight SDIRK run.
pub fn reference_solution(problem: &OdeProblem) -> Result<Box<dyn Evaluable + '_>> {
    if problem.has_exact() {
        Ok(Box::new(AnalyticSolution::new(problem)?))
    } else {
        Ok(Box::new(sdirk_solve(problem, &StepControl::new(REFERENCE_TOL))?))
    }
}

/// Metric grid size used when no override is given.
pub fn default_grid_size(kind: BenchmarkKind, params: BenchmarkParams) -> usize {
    match kind {
        BenchmarkKind::ProtheroRobinson => 3000,
        BenchmarkKind::VanDerPol => {
            let mu = params.mu.unwrap_or(crate::problems::DEFAULT_VDP_MU);
            if mu <= 10.0 {
                15_000
            } else {
                60_000
            }
        }
        BenchmarkKind::Rober => 20_000,
        BenchmarkKind::Hires => 150_000,
    }
}

/// One problem of a suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkCase {
    pub kind: BenchmarkKind,
    pub params: BenchmarkParams,
}

impl BenchmarkCase {
    pub fn problem(&self) -> Result<OdeProblem> {
        build_benchmark(self.kind, self.params)
    }

    pub fn grid_size(&self) -> usize {
        default_grid_size(self.kind, self.params)
    }

    /// File-name friendly label, e.g. `van_der_pol_mu100`.
    pub fn label(&self) -> String {
        match (self.kind, self.params.mu, self.params.lambda) {
            (BenchmarkKind::VanDerPol, Some(mu), _) => format!("{}_mu{mu}", self.kind),
            (BenchmarkKind::ProtheroRobinson, _, Some(l)) => format!("{}_lambda{l}", self.kind),
            _ => self.kind.name().to_string(),
        }
    }
}

/// Parses a comma-separated suite such as `all` or `rober,hires`. Van der
/// Pol expands to one case per entry of `mus` (the default μ when empty).
pub fn parse_suite(spec: &str, mus: &[f64], lambda: Option<f64>) -> Result<Vec<BenchmarkCase>> {
    let mut kinds = Vec::new();
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name.eq_ignore_ascii_case("all") {
            kinds.extend(BenchmarkKind::ALL);
        } else {
            kinds.push(BenchmarkKind::parse(name)?);
        }
    }
    if kinds.is_empty() {
        return arg_err("benchmark suite is empty");
    }
    let mut cases = Vec::new();
    for kind in kinds {
        let expanded: Vec<BenchmarkCase> = match kind {
            BenchmarkKind::VanDerPol if !mus.is_empty() => mus
                .iter()
                .map(|&mu| BenchmarkCase {
                    kind,
                    params: BenchmarkParams::mu(mu),
                })
                .collect(),
            BenchmarkKind::VanDerPol => vec![BenchmarkCase {
                kind,
                params: BenchmarkParams::mu(crate::problems::DEFAULT_VDP_MU),
            }],
            BenchmarkKind::ProtheroRobinson => vec![BenchmarkCase {
                kind,
                params: BenchmarkParams {
                    mu: None,
                    lambda,
                },
            }],
            _ => vec![BenchmarkCase {
                kind,
                params: BenchmarkParams::default(),
            }],
        };
        for case in expanded {
            if !cases.contains(&case) {
                cases.push(case);
            }
        }
    }
    Ok(cases)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// One (problem, method) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub params: BTreeMap<String, f64>,
    pub method: Method,
    pub tol: f64,
    pub seed: u64,
    pub metrics: Option<ErrorMetrics>,
    pub n_points: usize,
    pub n_segments: usize,
    pub times: Option<TimingSummary>,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    fn failed(problem: &OdeProblem, method: Method, tol: f64, seed: u64, error: String) -> Self {
        Self {
            problem: problem.name().to_string(),
            params: problem.params().clone(),
            method,
            tol,
            seed,
            metrics: None,
            n_points: 0,
            n_segments: 0,
            times: None,
            status: RunStatus::Failed,
            error: Some(error),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }
}

/// Settings shared by every cell of a suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub tol: f64,
    pub seed: u64,
    /// RPNN settings other than `tol` and `seed`.
    pub solver: SolverConfig,
    pub repeats: usize,
    /// Overrides every case's default metric grid size.
    pub grid_size: Option<usize>,
    pub methods: Vec<Method>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            seed: 0,
            solver: SolverConfig::default(),
            repeats: 10,
            grid_size: None,
            methods: Method::ALL.to_vec(),
        }
    }
}

/// Solves, times and scores one cell. Failures of the method are reported in
/// the returned record instead of as an error.
pub fn run_cell(
    problem: &OdeProblem,
    method: Method,
    cfg: &SolverConfig,
    repeats: usize,
    reference: &dyn Evaluable,
    grid: &[f64],
) -> (RunReport, Option<Solved>) {
    let (tol, seed) = (cfg.tol, cfg.seed);
    let outcome = timed_solve(problem, method, cfg, repeats).and_then(|(solved, times)| {
        let metrics = error_metrics(&solved, reference, grid)?;
        Ok((solved, times, metrics))
    });
    match outcome {
        Ok((solved, times, metrics)) => (
            RunReport {
                problem: problem.name().to_string(),
                params: problem.params().clone(),
                method,
                tol,
                seed,
                metrics: Some(metrics),
                n_points: solved.n_points(),
                n_segments: solved.n_segments(),
                times: Some(times),
                status: RunStatus::Ok,
                error: None,
            },
            Some(solved),
        ),
        Err(e) => (RunReport::failed(problem, method, tol, seed, e.to_string()), None),
    }
}

/// Runs every method of `cfg` on every case. Only invalid settings are
/// errors; a failing cell or reference is recorded in its report.
pub fn run_benchmark(cases: &[BenchmarkCase], cfg: &BenchConfig) -> Result<Vec<RunReport>> {
    check_repeats(cfg.repeats)?;
    if cases.is_empty() {
        return arg_err("benchmark suite is empty");
    }
    if cfg.methods.is_empty() {
        return arg_err("no methods selected");
    }
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return arg_err(format!("tol must be positive, got {}", cfg.tol));
    }
    let solver = cfg.solver.clone().with_tol(cfg.tol).with_seed(cfg.seed);
    solver.validate()?;
    let mut reports = Vec::new();
    for case in cases {
        let problem = case.problem()?;
        let n = cfg.grid_size.unwrap_or_else(|| case.grid_size());
        let grid = equidistant_grid(problem.x0(), problem.x_end(), n)?;
        let reference = match reference_solution(&problem) {
            Ok(r) => r,
            Err(e) => {
                let msg = format!("reference solution failed: {e}");
                for &m in &cfg.methods {
                    reports.push(RunReport::failed(&problem, m, cfg.tol, cfg.seed, msg.clone()));
                }
                continue;
            }
        };
        for &method in &cfg.methods {
            let (report, _) = run_cell(&problem, method, &solver, cfg.repeats, reference.as_ref(), &grid);
            log::info!("{} {}: {:?}", case.label(), method, report.status);
            reports.push(report);
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        let t = TimingSummary::from_samples(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!((t.median, t.min, t.max, t.repeats), (2.0, 1.0, 3.0, 3));
        let t = TimingSummary::from_samples(&[4.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.median, 2.5);
        assert!(TimingSummary::from_samples(&[]).is_err());
    }

    #[test]
    fn suite_parsing() {
        let all = parse_suite("all", &[], None).unwrap();
        assert_eq!(all.len(), 4);
        let two = parse_suite("vdp", &[1.0, 10.0], None).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[1].params.mu, Some(10.0));
        assert_eq!(two[0].grid_size(), 15_000);
        assert_eq!(parse_suite("rober, rober", &[], None).unwrap().len(), 1);
        assert!(parse_suite("", &[], None).is_err());
        assert!(parse_suite(" , ", &[], None).is_err());
        assert!(parse_suite("lorenz", &[], None).is_err());
    }

    #[test]
    fn default_grids() {
        use BenchmarkKind::*;
        let none = BenchmarkParams::default();
        assert_eq!(default_grid_size(ProtheroRobinson, none), 3000);
        assert_eq!(default_grid_size(VanDerPol, BenchmarkParams::mu(1000.0)), 60_000);
        assert_eq!(default_grid_size(Rober, none), 20_000);
        assert_eq!(default_grid_size(Hires, none), 150_000);
    }

    #[test]
    fn pr_suite_reports_every_method() {
        let cases = parse_suite("prothero_robinson", &[], None).unwrap();
        let cfg = BenchConfig {
            repeats: 3,
            methods: vec![Method::Rpnn, Method::Sdirk],
            ..BenchConfig::default()
        };
        let reports = run_benchmark(&cases, &cfg).unwrap();
        assert_eq!(reports.len(), 2);
        for r in &reports {
            assert!(r.is_ok(), "{r:?}");
            let t = r.times.unwrap();
            assert_eq!(t.repeats, 3);
            assert!(t.min > 0.0 && t.min <= t.median && t.median <= t.max);
            let m = r.metrics.as_ref().unwrap();
            assert_eq!(m.grid_size, 3000);
            for c in &m.per_component {
                assert!(c.linf >= c.mae && c.l2 <= c.linf * (3000f64).sqrt() * (1.0 + 1e-12));
            }
        }
        assert_eq!(reports[0].n_segments, 1);
        assert_eq!(reports[0].n_points, 20);
    }

    #[test]
    fn failing_cell_is_recorded() {
        let problem = build_benchmark(BenchmarkKind::Rober, BenchmarkParams::default()).unwrap();
        let reference = crate::metrics::FnSolution::new(3, (problem.x0(), problem.x_end()), |_| vec![0.0; 3]);
        let mut grid = vec![problem.x0()];
        grid.push(problem.x_end() + 1.0);
        let (report, solved) = run_cell(&problem, Method::Sdirk, &SolverConfig::default(), 1, &reference, &grid);
        assert_eq!(report.status, RunStatus::Failed);
        assert!(report.error.unwrap().contains("outside"));
        assert!(solved.is_none());
    }

    #[test]
    fn grid_timing_is_positive() {
        let f = crate::metrics::FnSolution::new(1, (0.0, 1.0), |x: f64| vec![x]);
        let t = eval_grid_timing(&f, &[0.5], 2).unwrap();
        assert!(t.min >= 0.0 && t.max.is_finite());
        assert!(eval_grid_timing(&f, &[0.5], 0).is_err());
    }
}
