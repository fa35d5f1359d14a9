//! Gauss-Newton training of a segment and the adaptive interval driver.
//!
//! The driver starts with one segment spanning the whole domain. A segment
//! whose Gauss-Newton iteration does not reach `‖F‖₂ ≤ tol` within `maxiter`
//! steps is discarded and retried on half the width with freshly sampled
//! hidden parameters; an accepted segment hands its end value on as the next
//! initial value and the next trial width is doubled.

use log::{debug, warn};

use crate::basis::{sample_basis_with_form, BasisForm};
use crate::collocation::{assemble_residual, assemble_system, make_grid, CollocationGrid};
use crate::error::{arg_err, Error, Result};
use crate::linalg::{truncated_pinv_solve, TruncationRule};
use crate::problems::OdeProblem;
use crate::rng::SeededRng;
use crate::trial::SegmentSolution;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Hidden nodes per component.
    pub h: usize,
    /// Collocation points per segment.
    pub n: usize,
    /// Gauss-Newton stopping tolerance on `‖F‖₂`.
    pub tol: f64,
    pub maxiter: usize,
    /// Smallest admissible segment width relative to `x_end − x0`.
    pub min_width_factor: f64,
    pub seed: u64,
    pub truncation: TruncationRule,
    pub basis_form: BasisForm,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 40,
            n: 20,
            tol: 1e-3,
            maxiter: 4,
            min_width_factor: 2f64.powi(-30),
            seed: 0,
            truncation: TruncationRule::Default,
            basis_form: BasisForm::Scaled,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.h < 2 {
            return arg_err(format!("h must be at least 2, got {}", self.h));
        }
        if self.n < 1 {
            return arg_err("n must be at least 1");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return arg_err(format!("tol must be positive, got {}", self.tol));
        }
        if self.maxiter < 1 {
            return arg_err("maxiter must be at least 1");
        }
        if !(self.min_width_factor > 0.0 && self.min_width_factor < 1.0) {
            return arg_err(format!("min_width_factor must lie in (0, 1), got {}", self.min_width_factor));
        }
        if self.h <= self.n {
            warn!(
                "h = {} <= n = {}: the Gauss-Newton systems are no longer underdetermined",
                self.h, self.n
            );
        }
        Ok(())
    }
}

/// Result of training one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOutcome {
    pub converged: bool,
    pub final_residual_norm: f64,
    pub iterations: usize,
}

/// Gauss-Newton on the segment weights, `W ← W − (∇F)⁺ F`.
///
/// The convergence test follows the training loop literally: the error that
/// decides convergence is `‖F‖₂` of the residual the update was computed
/// from. A segment therefore converges when the residual reaches `tol` within
/// `maxiter − 1` updates; the update taken from that residual is kept, and its
/// own residual must also be within `tol`. A start that already satisfies
/// `tol` returns after zero updates. Non-finite intermediate values end the
/// iteration as non-converged instead of failing.
pub fn gauss_newton_train(
    problem: &OdeProblem,
    seg: &mut SegmentSolution,
    grid: &CollocationGrid,
    tol: f64,
    maxiter: usize,
    rule: TruncationRule,
) -> Result<TrainOutcome> {
    if problem.dim() != seg.components() {
        return arg_err(format!(
            "problem has dimension {} but segment has {} components",
            problem.dim(),
            seg.components()
        ));
    }
    let diverged = |iterations| TrainOutcome {
        converged: false,
        final_residual_norm: f64::INFINITY,
        iterations,
    };

    let mut err = match assemble_residual(problem, seg, grid) {
        Ok(f) => f.norm(),
        Err(Error::Numeric(_)) => return Ok(diverged(0)),
        Err(e) => return Err(e),
    };
    if err <= tol {
        return Ok(TrainOutcome {
            converged: true,
            final_residual_norm: err,
            iterations: 0,
        });
    }
    let mut iterations = 0;
    let mut reached = false;
    while iterations < maxiter {
        let sys = match assemble_system(problem, seg, grid) {
            Ok(s) => s,
            Err(Error::Numeric(_)) => return Ok(diverged(iterations)),
            Err(e) => return Err(e),
        };
        let step = match truncated_pinv_solve(&sys.jacobian, &sys.residual, rule) {
            Ok(s) => s,
            Err(Error::Numeric(_)) => return Ok(diverged(iterations)),
            Err(e) => return Err(e),
        };
        for (w, d) in seg.weight_vector_mut().iter_mut().zip(step.iter()) {
            *w -= d;
        }
        iterations += 1;
        let before = err;
        err = match assemble_residual(problem, seg, grid) {
            Ok(f) => f.norm(),
            Err(Error::Numeric(_)) => return Ok(diverged(iterations)),
            Err(e) => return Err(e),
        };
        if before <= tol {
            reached = true;
            break;
        }
    }
    Ok(TrainOutcome {
        converged: reached && err <= tol,
        final_residual_norm: err,
        iterations,
    })
}

/// An accepted segment with its training record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedSegment {
    pub solution: SegmentSolution,
    pub iterations: usize,
    pub residual_norm: f64,
    pub collocation_points: usize,
}

/// Totals over the whole adaptive run, including rejected attempts.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    pub attempts: usize,
    pub rejected: usize,
    pub gauss_newton_iterations: usize,
}

/// Piecewise RPNN solution on `[x0, x_end]`; segment `k` covers
/// `(x_k, x_{k+1}]` and the first one also owns `x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSolution {
    segments: Vec<TrainedSegment>,
    stats: SolveStats,
}

impl PiecewiseSolution {
    pub fn new(segments: Vec<TrainedSegment>, stats: SolveStats) -> Result<Self> {
        if segments.is_empty() {
            return arg_err("a piecewise solution needs at least one segment");
        }
        let m = segments[0].solution.components();
        for w in segments.windows(2) {
            if w[1].solution.x_start() != w[0].solution.x_stop() {
                return arg_err(format!(
                    "segments do not tile: one stops at {} and the next starts at {}",
                    w[0].solution.x_stop(),
                    w[1].solution.x_start()
                ));
            }
            if w[1].solution.components() != m {
                return arg_err("segments disagree on the number of components");
            }
        }
        Ok(Self { segments, stats })
    }

    pub fn segments(&self) -> &[TrainedSegment] {
        &self.segments
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    pub fn dim(&self) -> usize {
        self.segments[0].solution.components()
    }

    pub fn x0(&self) -> f64 {
        self.segments[0].solution.x_start()
    }

    pub fn x_end(&self) -> f64 {
        self.segments[self.segments.len() - 1].solution.x_stop()
    }

    pub fn knots(&self) -> Vec<f64> {
        std::iter::once(self.x0())
            .chain(self.segments.iter().map(|s| s.solution.x_stop()))
            .collect()
    }

    /// Collocation points of the accepted segments.
    pub fn total_points(&self) -> usize {
        self.segments.iter().map(|s| s.collocation_points).sum()
    }

    pub fn iteration_counts(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.iterations).collect()
    }

    /// Index of the segment owning `x`.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !(x >= self.x0() && x <= self.x_end()) {
            return arg_err(format!(
                "x = {x} outside the solution domain [{}, {}]",
                self.x0(),
                self.x_end()
            ));
        }
        Ok(self.segments.partition_point(|s| s.solution.x_stop() < x))
    }

    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        let k = self.locate(x)?;
        Ok(self.segments[k].solution.eval(x))
    }

    pub fn eval_many(&self, xs: &[f64]) -> Result<Vec<Vec<f64>>> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Adaptive piecewise solve over the problem's whole domain.
pub fn solve_adaptive(problem: &OdeProblem, config: &SolverConfig) -> Result<PiecewiseSolution> {
    config.validate()?;
    let m = problem.dim();
    let x_end = problem.x_end();
    let floor = config.min_width_factor * problem.span();
    let mut rng = SeededRng::new(config.seed);

    let mut x = problem.x0();
    let mut width = problem.span();
    let mut alpha = problem.alpha().to_vec();
    let mut segments = Vec::new();
    let mut stats = SolveStats::default();
    let mut last_residual = f64::NAN;

    while x < x_end {
        let (x_stop, dx) = if width >= x_end - x {
            (x_end, x_end - x)
        } else {
            let stop = x + width;
            (stop, stop - x)
        };
        if !(dx >= floor) {
            return Err(Error::StepUnderflow {
                x,
                width: dx,
                floor,
                last_residual,
            });
        }

        let basis = sample_basis_with_form(config.basis_form, x, dx, config.h, m, &mut rng)?;
        let mut seg = SegmentSolution::with_zero_weights(basis, x_stop, alpha.clone())?;
        let grid = make_grid(x, dx, config.n)?;
        let outcome = gauss_newton_train(problem, &mut seg, &grid, config.tol, config.maxiter, config.truncation)?;
        stats.attempts += 1;
        stats.gauss_newton_iterations += outcome.iterations;

        let end_value = seg.eval(x_stop);
        if outcome.converged && end_value.iter().all(|v| v.is_finite()) {
            debug!(
                "accepted [{x}, {x_stop}] after {} iterations, |F| = {:e}",
                outcome.iterations, outcome.final_residual_norm
            );
            segments.push(TrainedSegment {
                solution: seg,
                iterations: outcome.iterations,
                residual_norm: outcome.final_residual_norm,
                collocation_points: grid.len(),
            });
            alpha = end_value;
            x = x_stop;
            width = 2.0 * dx;
        } else {
            stats.rejected += 1;
            last_residual = outcome.final_residual_norm;
            width = dx / 2.0;
        }
    }

    PiecewiseSolution::new(segments, stats)
}

/// Trains one segment on `[x_start, x_start + width]` from zero weights,
/// without the adaptive retry logic.
pub fn train_single_segment(
    problem: &OdeProblem,
    x_start: f64,
    alpha: Vec<f64>,
    width: f64,
    config: &SolverConfig,
    rng: &mut SeededRng,
) -> Result<(SegmentSolution, TrainOutcome)> {
    config.validate()?;
    let x_stop = x_start + width;
    let dx = x_stop - x_start;
    let basis = sample_basis_with_form(config.basis_form, x_start, dx, config.h, problem.dim(), rng)?;
    let mut seg = SegmentSolution::with_zero_weights(basis, x_stop, alpha)?;
    let grid = make_grid(x_start, dx, config.n)?;
    let outcome = gauss_newton_train(problem, &mut seg, &grid, config.tol, config.maxiter, config.truncation)?;
    Ok((seg, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collocation::assemble_residual;
    use crate::problems::{build_benchmark, BenchmarkKind, BenchmarkParams, OdeSystem};
    use nalgebra::DMatrix;

    struct Linear(f64);

    impl OdeSystem for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _x: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = self.0 * y[0];
        }
        fn jacobian(&self, _x: f64, _y: &[f64], jac: &mut DMatrix<f64>) {
            jac[(0, 0)] = self.0;
        }
        fn exact(&self, x: f64) -> Option<Vec<f64>> {
            Some(vec![(self.0 * x).exp()])
        }
    }

    fn decay() -> OdeProblem {
        OdeProblem::new("decay", 0.0, 1.0, vec![1.0], Linear(-1.0)).unwrap()
    }

    fn vdp() -> OdeProblem {
        build_benchmark(BenchmarkKind::VanDerPol, BenchmarkParams::mu(100.0)).unwrap()
    }

    #[test]
    fn decay_is_accurate() {
        let p = decay();
        let sol = solve_adaptive(&p, &SolverConfig::default().with_tol(1e-6)).unwrap();
        let worst = (0..=200)
            .map(|k| k as f64 / 200.0)
            .map(|x| (sol.eval(x).unwrap()[0] - (-x).exp()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-5, "max error {worst:e}");
        assert_eq!(sol.eval(0.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn constant_solution_needs_no_update() {
        let p = OdeProblem::new("flat", 0.0, 5.0, vec![0.5], Linear(0.0)).unwrap();
        let sol = solve_adaptive(&p, &SolverConfig::default()).unwrap();
        assert_eq!(sol.segments().len(), 1);
        assert_eq!(sol.total_points(), 20);
        assert_eq!(sol.iteration_counts(), vec![0]);
        assert_eq!(sol.eval(3.0).unwrap(), vec![0.5]);
    }

    #[test]
    fn single_update_cannot_converge_from_a_bad_start() {
        let p = decay();
        let cfg = SolverConfig {
            maxiter: 1,
            ..SolverConfig::default()
        };
        let (_, out) = train_single_segment(&p, 0.0, vec![1.0], 0.1, &cfg, &mut SeededRng::new(0)).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 1);
        let cfg = SolverConfig { maxiter: 2, ..cfg };
        let (_, out) = train_single_segment(&p, 0.0, vec![1.0], 0.1, &cfg, &mut SeededRng::new(0)).unwrap();
        assert!(out.converged && out.iterations == 2 && out.final_residual_norm <= cfg.tol);
    }

    #[test]
    fn knots_are_continuous_and_residuals_within_tol() {
        let p = vdp();
        let cfg = SolverConfig::default();
        let sol = solve_adaptive(&p, &cfg).unwrap();
        assert!(sol.segments().len() > 1);
        for w in sol.segments().windows(2) {
            let stop = w[0].solution.x_stop();
            assert_eq!(w[0].solution.eval(stop), w[1].solution.alpha());
            assert_eq!(w[1].solution.eval(stop), w[1].solution.alpha());
        }
        for s in sol.segments() {
            let grid = make_grid(s.solution.x_start(), s.solution.basis().width(), cfg.n).unwrap();
            let f = assemble_residual(&p, &s.solution, &grid).unwrap();
            assert_eq!(f.norm(), s.residual_norm);
            assert!(s.residual_norm <= cfg.tol);
        }
        let knots = sol.knots();
        assert_eq!(knots[0], 0.0);
        assert_eq!(*knots.last().unwrap(), p.x_end());
        assert!(knots.windows(2).all(|k| k[1] > k[0]));
    }

    #[test]
    fn fixed_seed_is_bitwise_deterministic() {
        let p = vdp();
        let a = solve_adaptive(&p, &SolverConfig::default().with_seed(9)).unwrap();
        let b = solve_adaptive(&p, &SolverConfig::default().with_seed(9)).unwrap();
        assert_eq!(a, b);
        let c = solve_adaptive(&p, &SolverConfig::default().with_seed(10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unreachable_tolerance_underflows() {
        let cfg = SolverConfig {
            tol: 1e-300,
            min_width_factor: 2f64.powi(-8),
            ..SolverConfig::default()
        };
        match solve_adaptive(&decay(), &cfg) {
            Err(Error::StepUnderflow { x, width, floor, last_residual }) => {
                assert_eq!(x, 0.0);
                assert!(width < floor);
                assert!(last_residual > 1e-300);
            }
            other => panic!("expected underflow, got {other:?}"),
        }
    }

    #[test]
    fn evaluation_outside_domain_fails() {
        let sol = solve_adaptive(&decay(), &SolverConfig::default()).unwrap();
        assert!(sol.eval(-1e-9).is_err());
        assert!(sol.eval(1.0 + 1e-9).is_err());
        assert!(sol.eval(f64::NAN).is_err());
        assert_eq!(sol.locate(1.0).unwrap(), sol.segments().len() - 1);
    }

    #[test]
    fn invalid_config_rejected() {
        let p = decay();
        for cfg in [
            SolverConfig { h: 1, ..SolverConfig::default() },
            SolverConfig { n: 0, ..SolverConfig::default() },
            SolverConfig { tol: 0.0, ..SolverConfig::default() },
            SolverConfig { maxiter: 0, ..SolverConfig::default() },
            SolverConfig { min_width_factor: 1.5, ..SolverConfig::default() },
        ] {
            assert!(matches!(solve_adaptive(&p, &cfg), Err(Error::Argument(_))));
        }
    }
}
