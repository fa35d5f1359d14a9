//! The eight-species HIRES system, RPNN next to both reference integrators.

use rpnn::bench::{reference_solution, solve_with, Method};
use rpnn::metrics::{equidistant_grid, error_metrics};
use rpnn::problems::{make_benchmark, BenchmarkParams};

fn main() -> rpnn::error::Result<()> {
    let problem = make_benchmark("hires", BenchmarkParams::default())?;
    let reference = reference_solution(&problem)?;
    let grid = equidistant_grid(problem.x0(), problem.x_end(), 150_000)?;

    for method in Method::ALL {
        match solve_with(&problem, method, 1e-3, 0) {
            Ok(sol) => {
                let e = error_metrics(&sol, reference.as_ref(), &grid)?;
                println!("{method:>5}: {:>6} points, worst Linf {:.2e}", sol.n_points(), e.max_linf());
            }
            Err(err) => println!("{method:>5}: failed ({err})"),
        }
    }
    Ok(())
}
