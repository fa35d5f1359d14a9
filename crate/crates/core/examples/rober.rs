//! Robertson kinetics on [0, 40]: accuracy per species and mass conservation
//! of the trained network.

use rpnn::bench::reference_solution;
use rpnn::metrics::{equidistant_grid, error_metrics};
use rpnn::problems::{make_benchmark, BenchmarkParams};
use rpnn::solver::{solve_adaptive, SolverConfig};

fn main() -> rpnn::error::Result<()> {
    let problem = make_benchmark("rober", BenchmarkParams::default())?;
    let reference = reference_solution(&problem)?;
    let grid = equidistant_grid(problem.x0(), problem.x_end(), 20_000)?;

    for tol in [1e-3, 1e-6] {
        let sol = solve_adaptive(&problem, &SolverConfig::default().with_tol(tol))?;
        let e = error_metrics(&sol, reference.as_ref(), &grid)?;
        let drift = grid
            .iter()
            .map(|&x| sol.eval(x).map(|y| (y.iter().sum::<f64>() - 1.0).abs()))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("tol {tol:e}: {} points, max |y1+y2+y3-1| = {drift:.2e}", sol.total_points());
        for (i, c) in e.per_component.iter().enumerate() {
            println!("  y{}: L2 {:.2e}  Linf {:.2e}  MAE {:.2e}", i + 1, c.l2, c.linf, c.mae);
        }
    }
    Ok(())
}
