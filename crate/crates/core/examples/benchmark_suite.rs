//! Runs every method on the whole suite and prints the summary table.

use rpnn::bench::{parse_suite, run_benchmark, BenchConfig};
use rpnn::io::write_summary_csv;

fn main() -> rpnn::error::Result<()> {
    let tol = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1e-3);
    let cases = parse_suite("all", &[1.0, 100.0], None)?;
    let cfg = BenchConfig {
        tol,
        repeats: 3,
        ..BenchConfig::default()
    };
    let reports = run_benchmark(&cases, &cfg)?;
    write_summary_csv(std::io::stdout().lock(), &reports)?;
    Ok(())
}
