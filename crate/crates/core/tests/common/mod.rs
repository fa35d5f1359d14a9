#![allow(dead_code)]

use nalgebra::DMatrix;

use rpnn::basis::{sample_basis_with_form, BasisForm};
use rpnn::collocation::{assemble_residual, assemble_system, make_grid};
use rpnn::problems::{build_benchmark, BenchmarkKind, BenchmarkParams, OdeProblem};
use rpnn::rng::SeededRng;
use rpnn::trial::SegmentSolution;

pub fn benchmark(idx: usize) -> OdeProblem {
    let (kind, params) = match idx % 4 {
        0 => (BenchmarkKind::ProtheroRobinson, BenchmarkParams::default()),
        1 => (BenchmarkKind::VanDerPol, BenchmarkParams::mu(100.0)),
        2 => (BenchmarkKind::Rober, BenchmarkParams::default()),
        _ => (BenchmarkKind::Hires, BenchmarkParams::default()),
    };
    build_benchmark(kind, params).unwrap()
}

/// A segment somewhere inside the problem's domain with random weights of
/// moderate size.
pub fn random_segment(p: &OdeProblem, seed: u64, form: BasisForm) -> SegmentSolution {
    let mut rng = SeededRng::new(seed);
    let x_start = p.x0() + rng.uniform(0.0, 0.5) * p.span();
    // a width that survives the round trip through x_stop exactly
    let x_stop = x_start + rng.uniform(1e-3, 0.4) * p.span();
    let width = x_stop - x_start;
    let (h, m) = (12, p.dim());
    let basis = sample_basis_with_form(form, x_start, width, h, m, &mut rng).unwrap();
    let alpha: Vec<f64> = p.alpha().iter().map(|a| a + rng.uniform(-0.01, 0.01)).collect();
    let weights = DMatrix::from_fn(h, m, |_, _| rng.uniform(-1.0, 1.0) / width.max(1.0) * 1e-2);
    SegmentSolution::new(basis, x_stop, alpha, weights).unwrap()
}

/// Relative Frobenius distance between the assembled Jacobian and central
/// differences of the residual.
pub fn jacobian_fd_error(p: &OdeProblem, seg: &SegmentSolution) -> f64 {
    let grid = make_grid(seg.x_start(), seg.basis().width(), 8).unwrap();
    let sys = assemble_system(p, seg, &grid).unwrap();
    let w0 = seg.weights().clone();
    let mut fd = DMatrix::zeros(sys.jacobian.nrows(), sys.jacobian.ncols());
    for col in 0..w0.len() {
        let step = 1e-6 * w0.as_slice()[col].abs().max(1e-3);
        let eval = |delta: f64| {
            let mut w = w0.clone();
            w.as_mut_slice()[col] += delta;
            let mut s = seg.clone();
            s.set_weights(w).unwrap();
            assemble_residual(p, &s, &grid).unwrap()
        };
        let d = (eval(step) - eval(-step)) / (2.0 * step);
        fd.set_column(col, &d);
    }
    (&sys.jacobian - &fd).norm() / sys.jacobian.norm()
}

/// The assembled-Jacobian check over `count` configurations cycling through
/// the four benchmarks and both basis forms; returns the worst relative error.
pub fn worst_jacobian_fd_error(count: u64) -> f64 {
    (0..count)
        .map(|k| {
            let p = benchmark(k as usize);
            let form = if k % 2 == 0 { BasisForm::Shifted } else { BasisForm::Scaled };
            jacobian_fd_error(&p, &random_segment(&p, 1000 + k, form))
        })
        .fold(0.0, f64::max)
}
