//! Van der Pol relaxation oscillations for increasing μ, scored against a
//! tight SDIRK reference.

use std::time::Instant;

use rpnn::bench::reference_solution;
use rpnn::metrics::{equidistant_grid, error_metrics};
use rpnn::problems::{make_benchmark, BenchmarkParams};
use rpnn::solver::{solve_adaptive, SolverConfig};

fn main() -> rpnn::error::Result<()> {
    let mu: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mu = if mu.is_empty() { vec![1.0, 10.0, 100.0, 1000.0] } else { mu };

    for mu in mu {
        let problem = make_benchmark("van_der_pol", BenchmarkParams::mu(mu))?;
        let reference = reference_solution(&problem)?;
        let grid = equidistant_grid(problem.x0(), problem.x_end(), 15_000)?;
        let t0 = Instant::now();
        let sol = solve_adaptive(&problem, &SolverConfig::default())?;
        let elapsed = t0.elapsed();
        let e = error_metrics(&sol, reference.as_ref(), &grid)?;
        println!(
            "mu {mu:>6}: {:>5} points in {:>4} segments ({} rejected), {:.3}s, MAE y1 {:.2e}, y2 {:.2e}",
            sol.total_points(),
            sol.segments().len(),
            sol.stats().rejected,
            elapsed.as_secs_f64(),
            e.per_component[0].mae,
            e.per_component[1].mae
        );
    }
    Ok(())
}
