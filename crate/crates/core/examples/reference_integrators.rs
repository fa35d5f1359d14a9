//! Explicit Dormand-Prince against L-stable SDIRK on a stiff scalar problem:
//! the explicit method is throttled by stability, not accuracy.

use rpnn::problems::{make_benchmark, BenchmarkParams};
use rpnn::reference::{dp45_solve, sdirk_solve, StepControl};

fn main() -> rpnn::error::Result<()> {
    for lambda in [-1e1, -1e3, -1e5] {
        let problem = make_benchmark("prothero_robinson", BenchmarkParams::lambda(lambda))?;
        let ctrl = StepControl::new(1e-3);
        let dp = dp45_solve(&problem, &ctrl)?;
        let sd = sdirk_solve(&problem, &ctrl)?;
        println!(
            "lambda {lambda:>8e}: dp45 {:>7} steps ({:>5} rejected), sdirk {:>4} steps ({} rejected)",
            dp.steps(),
            dp.rejected(),
            sd.steps(),
            sd.rejected()
        );
    }

    let vdp = make_benchmark("van_der_pol", BenchmarkParams::mu(1.0))?;
    let ctrl = StepControl::new(1e-10);
    let (a, b) = (dp45_solve(&vdp, &ctrl)?, sdirk_solve(&vdp, &ctrl)?);
    let worst = (0..=3000)
        .map(|k| 30.0 * k as f64 / 3000.0)
        .map(|x| {
            let (u, v) = (a.eval(x).unwrap(), b.eval(x).unwrap());
            u.iter().zip(&v).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    println!("van der Pol mu=1 at tol 1e-10: dense outputs agree to {worst:.1e}");
    Ok(())
}
