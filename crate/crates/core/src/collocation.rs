//! Collocation residual `F` and its Jacobian with respect to the stacked
//! output weights.
//!
//! Layout (zero-based): residual row `q = l + i·n` holds component `i` at
//! collocation point `l`; Jacobian column `p = j + k·h` is weight `w_jk`.

use nalgebra::{DMatrix, DVector};

use crate::error::{arg_err, Error, Result};
use crate::problems::OdeProblem;
use crate::trial::SegmentSolution;

/// Collocation abscissae of one segment, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    points: Vec<f64>,
}

impl CollocationGrid {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return arg_err("collocation grid needs at least one point");
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) || points.iter().any(|p| !p.is_finite()) {
            return arg_err("collocation points must be finite and strictly increasing");
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `n` equidistant points `x_start + l·Δx/n`, `l = 1..=n`: the left end is
/// excluded (the trial satisfies it by construction) and the right end is
/// included exactly.
pub fn make_grid(x_start: f64, delta_x: f64, n: usize) -> Result<CollocationGrid> {
    if n < 1 {
        return arg_err("need at least one collocation point");
    }
    if !(delta_x > 0.0 && delta_x.is_finite()) {
        return arg_err(format!("grid width must be positive, got {delta_x}"));
    }
    let step = delta_x / n as f64;
    let mut points: Vec<f64> = (1..=n).map(|l| x_start + l as f64 * step).collect();
    points[n - 1] = x_start + delta_x;
    CollocationGrid::from_points(points)
}

/// Residual row index for component `i` at point `l`.
#[inline]
pub fn residual_index(l: usize, i: usize, n: usize) -> usize {
    l + i * n
}

/// Inverse of [`residual_index`]: `(l, i)`.
#[inline]
pub fn residual_coords(q: usize, n: usize) -> (usize, usize) {
    (q % n, q / n)
}

/// Weight column index for node `j` of component `k`.
#[inline]
pub fn weight_index(j: usize, k: usize, h: usize) -> usize {
    j + k * h
}

/// Inverse of [`weight_index`]: `(j, k)`.
#[inline]
pub fn weight_coords(p: usize, h: usize) -> (usize, usize) {
    (p % h, p / h)
}

/// Residual vector and Jacobian assembled at the same weights.
#[derive(Debug, Clone)]
pub struct ResidualSystem {
    pub residual: DVector<f64>,
    pub jacobian: DMatrix<f64>,
}

/// Node values and x-derivatives at one point, plus Ψ and dΨ/dx.
struct PointEval {
    g: DMatrix<f64>,
    dg: DMatrix<f64>,
    psi: Vec<f64>,
    dpsi: Vec<f64>,
}

impl PointEval {
    fn new(h: usize, m: usize) -> Self {
        Self {
            g: DMatrix::zeros(h, m),
            dg: DMatrix::zeros(h, m),
            psi: vec![0.0; m],
            dpsi: vec![0.0; m],
        }
    }

    fn fill(&mut self, seg: &SegmentSolution, x: f64) {
        let basis = seg.basis();
        let w = seg.weights();
        let s = x - seg.x_start();
        for i in 0..seg.components() {
            let (mut n, mut dn) = (0.0, 0.0);
            for j in 0..seg.hidden() {
                let g = basis.value(j, i, x);
                let dg = basis.dx(j, i, x);
                self.g[(j, i)] = g;
                self.dg[(j, i)] = dg;
                n += w[(j, i)] * g;
                dn += w[(j, i)] * dg;
            }
            self.psi[i] = seg.alpha()[i] + s * n;
            self.dpsi[i] = n + s * dn;
        }
    }
}

fn check_dims(problem: &OdeProblem, seg: &SegmentSolution) -> Result<()> {
    if problem.dim() != seg.components() {
        return arg_err(format!(
            "problem has dimension {} but segment has {} components",
            problem.dim(),
            seg.components()
        ));
    }
    Ok(())
}

/// `F_q = dΨ_i/dx (x_l) − f_i(x_l, Ψ(x_l))`.
pub fn assemble_residual(problem: &OdeProblem, seg: &SegmentSolution, grid: &CollocationGrid) -> Result<DVector<f64>> {
    check_dims(problem, seg)?;
    let (n, m, h) = (grid.len(), seg.components(), seg.hidden());
    let mut res = DVector::zeros(n * m);
    let mut pe = PointEval::new(h, m);
    let mut f = vec![0.0; m];
    for (l, &x) in grid.points().iter().enumerate() {
        pe.fill(seg, x);
        problem.rhs_into(x, &pe.psi, &mut f);
        for i in 0..m {
            res[residual_index(l, i, n)] = pe.dpsi[i] - f[i];
        }
    }
    if res.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("collocation residual is not finite".into()));
    }
    Ok(res)
}

/// `∂F_q/∂W_p = δ_ik (G_ji + s G_ji') − (∂f_i/∂y_k) s G_jk` with
/// `s = x_l − x_start`.
pub fn assemble_jacobian(problem: &OdeProblem, seg: &SegmentSolution, grid: &CollocationGrid) -> Result<DMatrix<f64>> {
    Ok(assemble_system(problem, seg, grid)?.jacobian)
}

/// Residual and Jacobian in one pass over the grid.
pub fn assemble_system(problem: &OdeProblem, seg: &SegmentSolution, grid: &CollocationGrid) -> Result<ResidualSystem> {
    check_dims(problem, seg)?;
    let (n, m, h) = (grid.len(), seg.components(), seg.hidden());
    let mut residual = DVector::zeros(n * m);
    let mut jacobian = DMatrix::zeros(n * m, m * h);
    let mut pe = PointEval::new(h, m);
    let mut f = vec![0.0; m];
    let mut jf = DMatrix::zeros(m, m);

    for (l, &x) in grid.points().iter().enumerate() {
        pe.fill(seg, x);
        let s = x - seg.x_start();
        problem.rhs_into(x, &pe.psi, &mut f);
        problem.jacobian_into(x, &pe.psi, &mut jf);
        for i in 0..m {
            let q = residual_index(l, i, n);
            residual[q] = pe.dpsi[i] - f[i];
            for k in 0..m {
                let coupling = jf[(i, k)] * s;
                for j in 0..h {
                    let mut v = -coupling * pe.g[(j, k)];
                    if i == k {
                        v += pe.g[(j, i)] + s * pe.dg[(j, i)];
                    }
                    jacobian[(q, weight_index(j, k, h))] = v;
                }
            }
        }
    }

    if residual.iter().chain(jacobian.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("collocation system is not finite".into()));
    }
    Ok(ResidualSystem { residual, jacobian })
}
