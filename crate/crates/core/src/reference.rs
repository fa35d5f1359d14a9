//! Classical adaptive integrators used as baselines and as reference
//! solutions: an explicit Dormand-Prince 5(4) pair and a stiffly accurate,
//! L-stable SDIRK method of order 4 with an embedded order 3 estimate.
//!
//! Both record every accepted step together with `f` at that point so the
//! trajectory can be evaluated anywhere by cubic Hermite interpolation. The
//! Dormand-Prince run also keeps the quartic correction of its own continuous
//! extension, which brings dense output up to the accuracy of the steps.

use nalgebra::{DMatrix, DVector};

use crate::error::{arg_err, Error, Result};
use crate::problems::OdeProblem;

/// Error control shared by both integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub safety: f64,
    /// Smallest step-size ratio between consecutive attempts.
    pub min_factor: f64,
    /// Largest step-size ratio between consecutive attempts.
    pub max_factor: f64,
    /// First trial step; `None` selects it from the problem.
    pub initial_step: Option<f64>,
    /// Accepted plus rejected steps before giving up.
    pub max_steps: usize,
}

impl StepControl {
    /// Equal absolute and relative tolerance.
    pub fn new(tol: f64) -> Self {
        Self::with_tols(tol, tol)
    }

    pub fn with_tols(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            safety: 0.9,
            min_factor: 0.2,
            max_factor: 5.0,
            initial_step: None,
            max_steps: 20_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return arg_err(format!(
                "tolerances must be positive, got abs {} rel {}",
                self.abs_tol, self.rel_tol
            ));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return arg_err(format!("safety factor must lie in (0, 1], got {}", self.safety));
        }
        if !(self.min_factor > 0.0 && self.min_factor < 1.0 && self.max_factor > 1.0) {
            return arg_err("step factors must satisfy 0 < min < 1 < max");
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0 && h.is_finite()) {
                return arg_err(format!("initial step must be positive, got {h}"));
            }
        }
        if self.max_steps == 0 {
            return arg_err("max_steps must be positive");
        }
        Ok(())
    }

    /// `max_i |e_i| / (abs_tol + rel_tol · max(|y_i|, |y_new_i|))`.
    fn error_norm(&self, err: &[f64], y: &[f64], y_new: &[f64]) -> f64 {
        err.iter()
            .zip(y.iter().zip(y_new))
            .map(|(e, (a, b))| e.abs() / (self.abs_tol + self.rel_tol * a.abs().max(b.abs())))
            .fold(0.0, f64::max)
    }

    fn scaled_norm(&self, v: &[f64], y: &[f64]) -> f64 {
        v.iter()
            .zip(y)
            .map(|(e, a)| e.abs() / (self.abs_tol + self.rel_tol * a.abs()))
            .fold(0.0, f64::max)
    }
}

/// Accepted steps of an integration run; row `k` of the state and derivative
/// tables belongs to `abscissae[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    abscissae: Vec<f64>,
    dim: usize,
    /// Row-major `(len × dim)`.
    states: Vec<f64>,
    derivatives: Vec<f64>,
    /// Row-major `((len − 1) × dim)`; coefficient of `θ²(1 − θ)²` on each
    /// step, empty for plain Hermite output.
    corrections: Vec<f64>,
    steps: usize,
    rejected: usize,
}

impl Trajectory {
    fn start(x0: f64, y0: &[f64], f0: &[f64]) -> Self {
        Self {
            abscissae: vec![x0],
            dim: y0.len(),
            states: y0.to_vec(),
            derivatives: f0.to_vec(),
            corrections: Vec::new(),
            steps: 0,
            rejected: 0,
        }
    }

    fn push(&mut self, x: f64, y: &[f64], f: &[f64]) {
        self.abscissae.push(x);
        self.states.extend_from_slice(y);
        self.derivatives.extend_from_slice(f);
        self.steps += 1;
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn derivative(&self, k: usize) -> &[f64] {
        &self.derivatives[k * self.dim..(k + 1) * self.dim]
    }

    /// `(len × dim)` copy of the stored states.
    pub fn states(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.len(), self.dim, &self.states)
    }

    pub fn derivatives(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.len(), self.dim, &self.derivatives)
    }

    pub fn x0(&self) -> f64 {
        self.abscissae[0]
    }

    pub fn x_end(&self) -> f64 {
        self.abscissae[self.abscissae.len() - 1]
    }

    /// Accepted steps.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        dense_eval(self, x)
    }

    /// True when steps carry the quartic continuous-extension term.
    pub fn has_corrections(&self) -> bool {
        !self.corrections.is_empty()
    }
}

/// Cubic Hermite interpolation on the accepted step bracketing `x`, plus the
/// stored quartic correction when the integrator provides one.
pub fn dense_eval(traj: &Trajectory, x: f64) -> Result<Vec<f64>> {
    if !(x >= traj.x0() && x <= traj.x_end()) {
        return arg_err(format!(
            "x = {x} outside the trajectory span [{}, {}]",
            traj.x0(),
            traj.x_end()
        ));
    }
    let xs = traj.abscissae();
    let k = xs.partition_point(|&a| a < x);
    if xs[k] == x {
        return Ok(traj.state(k).to_vec());
    }
    let (x_a, x_b) = (xs[k - 1], xs[k]);
    let h = x_b - x_a;
    let t = (x - x_a) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let (ya, yb) = (traj.state(k - 1), traj.state(k));
    let (fa, fb) = (traj.derivative(k - 1), traj.derivative(k));
    let mut out: Vec<f64> = (0..traj.dim())
        .map(|i| h00 * ya[i] + h * h10 * fa[i] + h01 * yb[i] + h * h11 * fb[i])
        .collect();
    if traj.has_corrections() {
        let q = t2 * (1.0 - t) * (1.0 - t);
        let d = traj.dim();
        for (o, c) in out.iter_mut().zip(&traj.corrections[(k - 1) * d..k * d]) {
            *o += q * c;
        }
    }
    Ok(out)
}

fn check_problem(problem: &OdeProblem, ctrl: &StepControl) -> Result<()> {
    ctrl.validate()?;
    if !(problem.x_end() > problem.x0()) {
        return arg_err("integration interval must have positive length");
    }
    Ok(())
}

fn rhs(problem: &OdeProblem, x: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
    problem.rhs_into(x, y, out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegratorFailure {
            x,
            reason: "right-hand side is not finite".into(),
        });
    }
    Ok(())
}

/// Starting step from the local scale of the solution and its first two
/// derivatives, for a method of order `order`.
fn initial_step(problem: &OdeProblem, ctrl: &StepControl, f0: &[f64], order: i32) -> Result<f64> {
    let span = problem.span();
    if let Some(h) = ctrl.initial_step {
        return Ok(h.min(span));
    }
    let (x0, y0) = (problem.x0(), problem.alpha());
    let d0 = ctrl.scaled_norm(y0, y0);
    let d1 = ctrl.scaled_norm(f0, y0);
    if d1 == 0.0 {
        // no motion at the start: let the error control find the scale
        return Ok(span);
    }
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    rhs(problem, x0 + h0, &y1, &mut f1)?;
    let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = ctrl.scaled_norm(&df, y0) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / (order + 1) as f64)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

fn underflow(x: f64, h: f64) -> bool {
    h <= 16.0 * f64::EPSILON * x.abs().max(1.0) * 0.5 || !h.is_finite()
}

/// Clips the trial step so it never overshoots `x_end` and absorbs a
/// remainder too small to stand on its own.
fn clip_step(x: f64, h: f64, x_end: f64) -> (f64, bool) {
    let rest = x_end - x;
    if h >= rest || rest - h <= 1e-12 * rest.abs().max(x_end.abs()) {
        (rest, true)
    } else {
        (h, false)
    }
}

const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// `b − b̂`; the fifth-order weights are the last row of `DP_A`.
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Weights of the quartic term of the Dormand-Prince continuous extension.
const DP_D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Explicit Dormand-Prince 5(4) with local extrapolation and FSAL.
pub fn dp45_solve(problem: &OdeProblem, ctrl: &StepControl) -> Result<Trajectory> {
    check_problem(problem, ctrl)?;
    let m = problem.dim();
    let x_end = problem.x_end();
    let mut x = problem.x0();
    let mut y = problem.alpha().to_vec();
    let mut k = vec![vec![0.0; m]; 7];
    rhs(problem, x, &y, &mut k[0])?;
    let mut traj = Trajectory::start(x, &y, &k[0]);
    let mut h = initial_step(problem, ctrl, &k[0], 5)?;
    let mut y_stage = vec![0.0; m];
    let mut err = vec![0.0; m];
    let mut last_rejected = false;

    while x < x_end {
        if traj.steps + traj.rejected >= ctrl.max_steps {
            return Err(Error::IntegratorFailure {
                x,
                reason: format!("exceeded {} steps", ctrl.max_steps),
            });
        }
        let (h_try, last) = clip_step(x, h, x_end);
        if underflow(x, h_try) {
            return Err(Error::IntegratorFailure {
                x,
                reason: format!("step size underflow (h = {h_try:e})"),
            });
        }
        for s in 1..7 {
            for i in 0..m {
                let mut acc = 0.0;
                for (r, a) in DP_A[s][..s].iter().enumerate() {
                    acc += a * k[r][i];
                }
                y_stage[i] = y[i] + h_try * acc;
            }
            let xs = if s == 6 { x + h_try } else { x + DP_C[s] * h_try };
            problem.rhs_into(xs, &y_stage, &mut k[s]);
        }
        // y_stage now holds the fifth-order solution at x + h
        for i in 0..m {
            err[i] = h_try * (0..7).map(|s| DP_E[s] * k[s][i]).sum::<f64>();
        }
        let en = ctrl.error_norm(&err, &y, &y_stage);
        let finite = en.is_finite() && k[6].iter().all(|v| v.is_finite());

        if finite && en <= 1.0 {
            x = if last { x_end } else { x + h_try };
            y.copy_from_slice(&y_stage);
            for i in 0..m {
                traj.corrections.push(h_try * (0..7).map(|s| DP_D[s] * k[s][i]).sum::<f64>());
            }
            let f_new = k[6].clone();
            traj.push(x, &y, &f_new);
            k[0] = f_new;
            let mut fac = if en == 0.0 { ctrl.max_factor } else { ctrl.safety * en.powf(-0.2) };
            fac = fac.clamp(ctrl.min_factor, ctrl.max_factor);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = h_try * fac;
            last_rejected = false;
        } else {
            traj.rejected += 1;
            let fac = if finite {
                (ctrl.safety * en.powf(-0.2)).max(ctrl.min_factor)
            } else {
                ctrl.min_factor
            };
            h = h_try * fac.min(1.0);
            last_rejected = true;
        }
    }
    Ok(traj)
}

/// `γ` of the SDIRK tableau.
pub const SDIRK_GAMMA: f64 = 0.25;
pub const SDIRK_C: [f64; 5] = [0.25, 0.75, 11.0 / 20.0, 0.5, 1.0];
pub const SDIRK_A: [[f64; 5]; 5] = [
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [0.5, 0.25, 0.0, 0.0, 0.0],
    [17.0 / 50.0, -1.0 / 25.0, 0.25, 0.0, 0.0],
    [371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0.0],
    [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25],
];
/// Order 4 weights; equal to the last row of `SDIRK_A` (stiffly accurate).
pub const SDIRK_B: [f64; 5] = SDIRK_A[4];
/// Embedded order 3 weights.
pub const SDIRK_B_HAT: [f64; 5] = [59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0];

const NEWTON_MAX_ITER: usize = 10;
/// Newton stops once the scaled correction drops below this fraction of the
/// step tolerance.
const NEWTON_TOL: f64 = 0.03;

/// Outcome of the stage iterations of one SDIRK step.
enum StageSolve {
    Converged,
    Failed,
}

/// L-stable SDIRK, order 4 with embedded order 3, simplified Newton on each
/// stage with the analytic ODE Jacobian frozen over the step.
pub fn sdirk_solve(problem: &OdeProblem, ctrl: &StepControl) -> Result<Trajectory> {
    check_problem(problem, ctrl)?;
    let m = problem.dim();
    let x_end = problem.x_end();
    let mut x = problem.x0();
    let mut y = problem.alpha().to_vec();
    let mut f0 = vec![0.0; m];
    rhs(problem, x, &y, &mut f0)?;
    let mut traj = Trajectory::start(x, &y, &f0);
    let mut h = initial_step(problem, ctrl, &f0, 4)?;

    let mut jac = DMatrix::zeros(m, m);
    let mut k = vec![vec![0.0; m]; 5];
    let mut stage = vec![0.0; m];
    let mut base = vec![0.0; m];
    let mut f_stage = vec![0.0; m];
    let mut err = vec![0.0; m];
    let mut last_rejected = false;

    while x < x_end {
        if traj.steps + traj.rejected >= ctrl.max_steps {
            return Err(Error::IntegratorFailure {
                x,
                reason: format!("exceeded {} steps", ctrl.max_steps),
            });
        }
        let (h_try, last) = clip_step(x, h, x_end);
        if underflow(x, h_try) {
            return Err(Error::IntegratorFailure {
                x,
                reason: format!("step size underflow (h = {h_try:e})"),
            });
        }

        problem.jacobian_into(x, &y, &mut jac);
        let iteration = DMatrix::identity(m, m) - &jac * (h_try * SDIRK_GAMMA);
        let lu = iteration.lu();
        let outcome = if lu.is_invertible() {
            solve_stages(problem, ctrl, &lu, x, h_try, &y, &f0, &mut k, &mut stage, &mut base, &mut f_stage)
        } else {
            StageSolve::Failed
        };
        if let StageSolve::Failed = outcome {
            traj.rejected += 1;
            h = h_try * 0.25;
            last_rejected = true;
            continue;
        }

        // stiffly accurate: the last stage is the new solution
        let y_new = stage.clone();
        for (i, e) in err.iter_mut().enumerate() {
            *e = h_try * (0..5).map(|s| (SDIRK_B[s] - SDIRK_B_HAT[s]) * k[s][i]).sum::<f64>();
        }
        let en = ctrl.error_norm(&err, &y, &y_new);

        if en.is_finite() && en <= 1.0 {
            x = if last { x_end } else { x + h_try };
            y = y_new;
            rhs(problem, x, &y, &mut f0)?;
            traj.push(x, &y, &f0);
            let mut fac = if en == 0.0 { ctrl.max_factor } else { ctrl.safety * en.powf(-0.25) };
            fac = fac.clamp(ctrl.min_factor, ctrl.max_factor);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = h_try * fac;
            last_rejected = false;
        } else {
            traj.rejected += 1;
            let fac = if en.is_finite() {
                (ctrl.safety * en.powf(-0.25)).max(ctrl.min_factor)
            } else {
                ctrl.min_factor
            };
            h = h_try * fac.min(1.0);
            last_rejected = true;
        }
    }
    Ok(traj)
}

/// Solves the five stage equations `Y_s = base_s + hγ f(x + c_s h, Y_s)` in
/// turn. On success `k[s]` holds the stage derivatives and `stage` the last
/// stage value.
#[allow(clippy::too_many_arguments)]
fn solve_stages(
    problem: &OdeProblem,
    ctrl: &StepControl,
    lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    x: f64,
    h: f64,
    y: &[f64],
    f0: &[f64],
    k: &mut [Vec<f64>],
    stage: &mut [f64],
    base: &mut [f64],
    f_stage: &mut [f64],
) -> StageSolve {
    let m = y.len();
    let hg = h * SDIRK_GAMMA;
    let mut residual = DVector::zeros(m);
    for s in 0..5 {
        for i in 0..m {
            let acc: f64 = (0..s).map(|r| SDIRK_A[s][r] * k[r][i]).sum();
            base[i] = y[i] + h * acc;
            let guess = if s == 0 { f0[i] } else { k[s - 1][i] };
            stage[i] = base[i] + hg * guess;
        }
        let xs = x + SDIRK_C[s] * h;
        let mut prev_norm = f64::INFINITY;
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            problem.rhs_into(xs, stage, f_stage);
            for i in 0..m {
                residual[i] = base[i] + hg * f_stage[i] - stage[i];
            }
            let Some(delta) = lu.solve(&residual) else {
                return StageSolve::Failed;
            };
            for i in 0..m {
                stage[i] += delta[i];
            }
            let norm = ctrl.scaled_norm(delta.as_slice(), stage);
            if !norm.is_finite() {
                return StageSolve::Failed;
            }
            if norm <= NEWTON_TOL {
                converged = true;
                break;
            }
            if norm > prev_norm {
                return StageSolve::Failed;
            }
            prev_norm = norm;
        }
        if !converged {
            return StageSolve::Failed;
        }
        // derivative recovered from the stage equation, not from f, so that
        // stiff components are not amplified by the Newton residual
        for i in 0..m {
            k[s][i] = (stage[i] - base[i]) / hg;
        }
    }
    StageSolve::Converged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_benchmark, BenchmarkParams, OdeSystem};

    struct Linear(f64);
    impl OdeSystem for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _x: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = self.0 * y[0];
        }
        fn jacobian(&self, _x: f64, _y: &[f64], jac: &mut DMatrix<f64>) {
            jac[(0, 0)] = self.0;
        }
    }

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _x: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
        fn jacobian(&self, _x: f64, _y: &[f64], jac: &mut DMatrix<f64>) {
            jac.copy_from_slice(&[0.0, -1.0, 1.0, 0.0]);
        }
    }

    struct Slope;
    impl OdeSystem for Slope {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _x: f64, _y: &[f64], dy: &mut [f64]) {
            dy[0] = 2.0;
        }
        fn jacobian(&self, _x: f64, _y: &[f64], jac: &mut DMatrix<f64>) {
            jac[(0, 0)] = 0.0;
        }
    }

    fn decay() -> OdeProblem {
        OdeProblem::new("decay", 0.0, 1.0, vec![1.0], Linear(-1.0)).unwrap()
    }

    #[test]
    fn dp45_decay() {
        let t = dp45_solve(&decay(), &StepControl::new(1e-10)).unwrap();
        assert!((t.state(t.len() - 1)[0] - (-1.0f64).exp()).abs() <= 1e-8);
        assert_eq!(t.x_end(), 1.0);
        assert_eq!(t.x0(), 0.0);
    }

    #[test]
    fn sdirk_decay() {
        let t = sdirk_solve(&decay(), &StepControl::new(1e-12)).unwrap();
        assert!((t.state(t.len() - 1)[0] - (-1.0f64).exp()).abs() <= 1e-10);
    }

    #[test]
    fn dp45_oscillator_returns() {
        let p = OdeProblem::new("osc", 0.0, 2.0 * std::f64::consts::PI, vec![1.0, 0.0], Oscillator).unwrap();
        let t = dp45_solve(&p, &StepControl::new(1e-10)).unwrap();
        let y = t.state(t.len() - 1);
        assert!((y[0] - 1.0).abs() <= 1e-7 && y[1].abs() <= 1e-7);
    }

    #[test]
    fn zero_rhs_is_constant() {
        let p = OdeProblem::new("const", 0.0, 5.0, vec![3.0], Linear(0.0)).unwrap();
        for t in [
            dp45_solve(&p, &StepControl::new(1e-8)).unwrap(),
            sdirk_solve(&p, &StepControl::new(1e-8)).unwrap(),
        ] {
            assert!(t.steps() <= 3);
            assert!((0..t.len()).all(|k| t.state(k)[0] == 3.0));
        }
    }

    #[test]
    fn dense_output_hits_stored_states() {
        let t = dp45_solve(&decay(), &StepControl::new(1e-8)).unwrap();
        for k in 0..t.len() {
            assert_eq!(dense_eval(&t, t.abscissae()[k]).unwrap(), t.state(k));
        }
    }

    #[test]
    fn dense_output_tracks_decay() {
        for (t, tol) in [
            (sdirk_solve(&decay(), &StepControl::new(1e-8)).unwrap(), 1e-8),
            (dp45_solve(&decay(), &StepControl::new(1e-8)).unwrap(), 1e-8),
        ] {
            for l in 1..=100 {
                let x = l as f64 / 101.0;
                assert!((dense_eval(&t, x).unwrap()[0] - (-x).exp()).abs() <= 10.0 * tol);
            }
        }
    }

    #[test]
    fn dense_output_reproduces_linear() {
        let p = OdeProblem::new("slope", 0.0, 3.0, vec![0.0], Slope).unwrap();
        let t = dp45_solve(&p, &StepControl::new(1e-6)).unwrap();
        for l in 0..=30 {
            let x = 0.1 * l as f64;
            let x = x.min(3.0);
            assert!((dense_eval(&t, x).unwrap()[0] - 2.0 * x).abs() <= 1e-13);
        }
    }

    #[test]
    fn dense_output_outside_span() {
        let t = dp45_solve(&decay(), &StepControl::new(1e-6)).unwrap();
        assert!(dense_eval(&t, -0.1).is_err());
        assert!(dense_eval(&t, 1.1).is_err());
    }

    #[test]
    fn sdirk_order_conditions() {
        let (a, b, bh, c) = (SDIRK_A, SDIRK_B, SDIRK_B_HAT, SDIRK_C);
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
        let ac: Vec<f64> = (0..5).map(|i| dot(&a[i], &c)).collect();
        let ac2: Vec<f64> = (0..5).map(|i| dot(&a[i], &c.map(|v| v * v))).collect();
        let aac: Vec<f64> = (0..5).map(|i| dot(&a[i], &ac)).collect();
        for i in 0..5 {
            assert!((a[i].iter().sum::<f64>() - c[i]).abs() < 1e-14);
        }
        let c2: Vec<f64> = c.iter().map(|v| v * v).collect();
        let c3: Vec<f64> = c.iter().map(|v| v * v * v).collect();
        let cac: Vec<f64> = c.iter().zip(&ac).map(|(p, q)| p * q).collect();
        let order4 = [
            (b.iter().sum::<f64>(), 1.0),
            (dot(&b, &c), 0.5),
            (dot(&b, &c2), 1.0 / 3.0),
            (dot(&b, &ac), 1.0 / 6.0),
            (dot(&b, &c3), 0.25),
            (dot(&b, &cac), 0.125),
            (dot(&b, &ac2), 1.0 / 12.0),
            (dot(&b, &aac), 1.0 / 24.0),
        ];
        for (got, want) in order4 {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
        for (got, want) in [
            (bh.iter().sum::<f64>(), 1.0),
            (dot(&bh, &c), 0.5),
            (dot(&bh, &c2), 1.0 / 3.0),
            (dot(&bh, &ac), 1.0 / 6.0),
        ] {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn dp_tableau_consistent() {
        for s in 1..7 {
            assert!((DP_A[s].iter().sum::<f64>() - DP_C[s]).abs() < 1e-14);
        }
        assert!(DP_E.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn sdirk_rober_conserves_mass() {
        let p = make_benchmark("rober", BenchmarkParams::default()).unwrap();
        let t = sdirk_solve(&p, &StepControl::new(1e-10)).unwrap();
        for k in 0..t.len() {
            let y = t.state(k);
            assert!((y[0] + y[1] + y[2] - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn stiffness_signature_on_prothero_robinson() {
        let p = make_benchmark("pr", BenchmarkParams::default()).unwrap();
        let ctrl = StepControl::new(1e-3);
        let explicit = dp45_solve(&p, &ctrl).unwrap();
        let implicit = sdirk_solve(&p, &ctrl).unwrap();
        assert!(explicit.steps() >= 100 * implicit.steps());
    }

    #[test]
    fn invalid_control_rejected() {
        assert!(dp45_solve(&decay(), &StepControl::new(0.0)).is_err());
        let mut c = StepControl::new(1e-6);
        c.max_steps = 3;
        assert!(matches!(dp45_solve(&decay(), &c), Err(Error::IntegratorFailure { .. })));
    }
}
