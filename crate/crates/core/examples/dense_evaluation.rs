//! Train once, store the network, reload it and evaluate anywhere in the
//! domain without re-solving.

use rpnn::bench::eval_grid_timing;
use rpnn::io::{load_solution, save_solution};
use rpnn::metrics::equidistant_grid;
use rpnn::problems::{make_benchmark, BenchmarkParams};
use rpnn::solver::{solve_adaptive, SolverConfig};

fn main() -> rpnn::error::Result<()> {
    let problem = make_benchmark("rober", BenchmarkParams::default())?;
    let sol = solve_adaptive(&problem, &SolverConfig::default().with_tol(1e-6))?;

    let path = std::env::temp_dir().join("rpnn_rober_solution.json");
    save_solution(&path, problem.name(), problem.params(), &sol)?;
    let loaded = load_solution(&path)?;
    println!("stored {} segments in {}", loaded.solution.segments().len(), path.display());

    let grid = equidistant_grid(problem.x0(), problem.x_end(), 1000)?;
    let same = grid.iter().all(|&x| loaded.solution.eval(x).unwrap() == sol.eval(x).unwrap());
    println!("reloaded solution identical on the grid: {same}");

    let t = eval_grid_timing(&loaded.solution, &grid, 10)?;
    println!("1000-point evaluation: median {:.2e}s (min {:.2e}, max {:.2e})", t.median, t.min, t.max);
    for x in [0.0, 1e-3, 1.0, 40.0] {
        println!("y({x}) = {:?}", loaded.solution.eval(x)?);
    }
    Ok(())
}
