//! Solving a user-defined stiff system: a linear pair with eigenvalues −1 and
//! −1000, whose exact solution is known.

use nalgebra::DMatrix;
use rpnn::metrics::{equidistant_grid, error_metrics, AnalyticSolution};
use rpnn::problems::{OdeProblem, OdeSystem};
use rpnn::solver::{solve_adaptive, SolverConfig};

struct TwoScale;

impl OdeSystem for TwoScale {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _x: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = -y[0];
        dy[1] = -1000.0 * (y[1] - y[0]) - y[0];
    }

    fn jacobian(&self, _x: f64, _y: &[f64], jac: &mut DMatrix<f64>) {
        jac[(0, 0)] = -1.0;
        jac[(0, 1)] = 0.0;
        jac[(1, 0)] = 999.0;
        jac[(1, 1)] = -1000.0;
    }

    fn exact(&self, x: f64) -> Option<Vec<f64>> {
        // y2 relaxes onto the slow manifold y2 = y1 from y2(0) = 0
        let slow = (-x).exp();
        Some(vec![slow, slow - (-1000.0 * x).exp()])
    }
}

fn main() -> rpnn::error::Result<()> {
    let problem = OdeProblem::new("two_scale", 0.0, 5.0, vec![1.0, 0.0], TwoScale)?;
    let exact = AnalyticSolution::new(&problem)?;
    let grid = equidistant_grid(0.0, 5.0, 5000)?;
    let sol = solve_adaptive(&problem, &SolverConfig::default().with_tol(1e-6))?;
    println!("knots: {:?}", sol.knots());
    for (i, c) in error_metrics(&sol, &exact, &grid)?.per_component.iter().enumerate() {
        println!("y{}: Linf {:.2e}, MAE {:.2e}", i + 1, c.linf, c.mae);
    }
    Ok(())
}
