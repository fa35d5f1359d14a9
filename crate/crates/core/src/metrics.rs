//! Pointwise error norms between two solutions on a common grid.
//!
//! `L2` is the plain vector 2-norm of the sampled errors (not divided by the
//! grid size), `L∞` their maximum and MAE their mean absolute value, each per
//! solution component.

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::problems::OdeProblem;
use crate::reference::Trajectory;
use crate::solver::PiecewiseSolution;

/// Anything that can be evaluated pointwise on its domain.
pub trait Evaluable {
    fn dim(&self) -> usize;

    fn domain(&self) -> (f64, f64);

    fn eval_at(&self, x: f64) -> Result<Vec<f64>>;
}

impl Evaluable for PiecewiseSolution {
    fn dim(&self) -> usize {
        PiecewiseSolution::dim(self)
    }

    fn domain(&self) -> (f64, f64) {
        (self.x0(), self.x_end())
    }

    fn eval_at(&self, x: f64) -> Result<Vec<f64>> {
        self.eval(x)
    }
}

impl Evaluable for Trajectory {
    fn dim(&self) -> usize {
        Trajectory::dim(self)
    }

    fn domain(&self) -> (f64, f64) {
        (self.x0(), self.x_end())
    }

    fn eval_at(&self, x: f64) -> Result<Vec<f64>> {
        self.eval(x)
    }
}

/// Closed-form solution of a problem that has one.
pub struct AnalyticSolution<'a> {
    problem: &'a OdeProblem,
}

impl<'a> AnalyticSolution<'a> {
    pub fn new(problem: &'a OdeProblem) -> Result<Self> {
        if !problem.has_exact() {
            return arg_err(format!("problem {} has no closed-form solution", problem.name()));
        }
        Ok(Self { problem })
    }
}

impl Evaluable for AnalyticSolution<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn domain(&self) -> (f64, f64) {
        (self.problem.x0(), self.problem.x_end())
    }

    fn eval_at(&self, x: f64) -> Result<Vec<f64>> {
        match self.problem.exact(x) {
            Some(y) => Ok(y),
            None => arg_err(format!("no closed-form value at x = {x}")),
        }
    }
}

/// A plain function of `x` with a stated domain; handy for tests and for
/// user-supplied references.
pub struct FnSolution<F> {
    dim: usize,
    domain: (f64, f64),
    f: F,
}

impl<F: Fn(f64) -> Vec<f64>> FnSolution<F> {
    pub fn new(dim: usize, domain: (f64, f64), f: F) -> Self {
        Self { dim, domain, f }
    }
}

impl<F: Fn(f64) -> Vec<f64>> Evaluable for FnSolution<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn eval_at(&self, x: f64) -> Result<Vec<f64>> {
        Ok((self.f)(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentMetrics {
    pub l2: f64,
    pub linf: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub per_component: Vec<ComponentMetrics>,
    pub grid_size: usize,
}

impl ErrorMetrics {
    pub fn max_linf(&self) -> f64 {
        self.per_component.iter().map(|c| c.linf).fold(0.0, f64::max)
    }

    pub fn max_mae(&self) -> f64 {
        self.per_component.iter().map(|c| c.mae).fold(0.0, f64::max)
    }
}

/// `n` equidistant points on `[x0, x_end]`, both ends included exactly.
pub fn equidistant_grid(x0: f64, x_end: f64, n: usize) -> Result<Vec<f64>> {
    if !(x_end > x0) {
        return arg_err(format!("grid interval [{x0}, {x_end}] is empty"));
    }
    match n {
        0 => arg_err("grid needs at least one point"),
        1 => Ok(vec![x0]),
        _ => {
            let step = (x_end - x0) / (n - 1) as f64;
            let mut g: Vec<f64> = (0..n).map(|k| x0 + k as f64 * step).collect();
            g[n - 1] = x_end;
            Ok(g)
        }
    }
}

/// Per-component L2, L∞ and MAE of `candidate − reference` over `grid`.
pub fn error_metrics(candidate: &dyn Evaluable, reference: &dyn Evaluable, grid: &[f64]) -> Result<ErrorMetrics> {
    let m = candidate.dim();
    if reference.dim() != m {
        return arg_err(format!(
            "candidate has {m} components but reference has {}",
            reference.dim()
        ));
    }
    if grid.is_empty() {
        return arg_err("metric grid is empty");
    }
    let mut sq = vec![0.0; m];
    let mut linf = vec![0.0f64; m];
    let mut abs_sum = vec![0.0; m];
    for &x in grid {
        let (u, v) = (candidate.eval_at(x)?, reference.eval_at(x)?);
        for i in 0..m {
            let e = (u[i] - v[i]).abs();
            sq[i] += e * e;
            linf[i] = linf[i].max(e);
            abs_sum[i] += e;
        }
    }
    let n = grid.len() as f64;
    Ok(ErrorMetrics {
        per_component: (0..m)
            .map(|i| ComponentMetrics {
                l2: sq[i].sqrt(),
                linf: linf[i],
                mae: abs_sum[i] / n,
            })
            .collect(),
        grid_size: grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn constant(c: f64) -> FnSolution<impl Fn(f64) -> Vec<f64>> {
        FnSolution::new(1, (0.0, 1.0), move |_| vec![c])
    }

    #[test]
    fn identical_solutions() {
        let f = FnSolution::new(2, (0.0, 1.0), |x: f64| vec![x.sin(), x * x]);
        let grid = equidistant_grid(0.0, 1.0, 50).unwrap();
        let e = error_metrics(&f, &f, &grid).unwrap();
        for c in &e.per_component {
            assert_eq!((c.l2, c.linf, c.mae), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn constant_offset() {
        let grid = equidistant_grid(0.0, 1.0, 100).unwrap();
        let e = error_metrics(&constant(0.1), &constant(0.0), &grid).unwrap();
        let c = e.per_component[0];
        assert_relative_eq!(c.linf, 0.1);
        assert_relative_eq!(c.mae, 0.1, epsilon = 1e-15);
        assert_relative_eq!(c.l2, 1.0, epsilon = 1e-14);
        assert_eq!(e.grid_size, 100);
    }

    #[test]
    fn pythagorean_pair() {
        let cand = FnSolution::new(1, (0.0, 1.0), |x: f64| vec![if x == 0.0 { 3.0 } else { 4.0 }]);
        let e = error_metrics(&cand, &constant(0.0), &[0.0, 1.0]).unwrap();
        let c = e.per_component[0];
        assert_eq!((c.l2, c.linf, c.mae), (5.0, 4.0, 3.5));
    }

    #[test]
    fn grid_includes_both_ends() {
        let g = equidistant_grid(0.0, 2.0 * std::f64::consts::PI, 3000).unwrap();
        assert_eq!(g.len(), 3000);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[2999], 2.0 * std::f64::consts::PI);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dimension_mismatch() {
        let two = FnSolution::new(2, (0.0, 1.0), |_| vec![0.0, 0.0]);
        assert!(error_metrics(&two, &constant(0.0), &[0.5]).is_err());
        assert!(error_metrics(&constant(0.0), &constant(0.0), &[]).is_err());
    }
}
