//! Prothero-Robinson with λ = −1e5 against its closed form `sin(x)`.

use rpnn::metrics::{equidistant_grid, error_metrics, AnalyticSolution};
use rpnn::problems::{make_benchmark, BenchmarkParams};
use rpnn::solver::{solve_adaptive, SolverConfig};

fn main() -> rpnn::error::Result<()> {
    let problem = make_benchmark("prothero_robinson", BenchmarkParams::lambda(-1e5))?;
    let exact = AnalyticSolution::new(&problem)?;
    let grid = equidistant_grid(problem.x0(), problem.x_end(), 3000)?;

    for tol in [1e-3, 1e-6] {
        let sol = solve_adaptive(&problem, &SolverConfig::default().with_tol(tol))?;
        let e = &error_metrics(&sol, &exact, &grid)?.per_component[0];
        println!(
            "tol {tol:e}: {} segment(s), {} points, L2 {:.2e}, Linf {:.2e}, MAE {:.2e}",
            sol.segments().len(),
            sol.total_points(),
            e.l2,
            e.linf,
            e.mae
        );
    }
    Ok(())
}
