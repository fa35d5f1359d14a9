//! Initial value problems and the four stiff benchmark systems.
//!
//! An [`OdeProblem`] couples a right-hand side `f(x, y)` and its analytic
//! Jacobian `∂f/∂y` (through the [`OdeSystem`] trait) with an initial point
//! `(x0, α)` and the end of the integration domain.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{arg_err, Error, Result};

/// Right-hand side of `y' = f(x, y)` together with `∂f/∂y`.
///
/// Implementations write into caller-provided buffers; `y` and `dy` have
/// length [`dim`](OdeSystem::dim) and `jac` is `dim × dim`.
pub trait OdeSystem: Send + Sync {
    fn dim(&self) -> usize;

    fn rhs(&self, x: f64, y: &[f64], dy: &mut [f64]);

    fn jacobian(&self, x: f64, y: &[f64], jac: &mut DMatrix<f64>);

    /// Closed-form solution, when one is known.
    fn exact(&self, _x: f64) -> Option<Vec<f64>> {
        None
    }
}

/// A fully specified IVP on `[x0, x_end]`.
#[derive(Clone)]
pub struct OdeProblem {
    name: String,
    x0: f64,
    x_end: f64,
    alpha: Vec<f64>,
    params: BTreeMap<String, f64>,
    system: Arc<dyn OdeSystem>,
}

impl fmt::Debug for OdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeProblem")
            .field("name", &self.name)
            .field("x0", &self.x0)
            .field("x_end", &self.x_end)
            .field("alpha", &self.alpha)
            .field("params", &self.params)
            .finish()
    }
}

impl OdeProblem {
    pub fn new(
        name: impl Into<String>,
        x0: f64,
        x_end: f64,
        alpha: Vec<f64>,
        system: impl OdeSystem + 'static,
    ) -> Result<Self> {
        if !(x0.is_finite() && x_end.is_finite()) || x_end <= x0 {
            return arg_err(format!("domain must satisfy x0 < x_end, got [{x0}, {x_end}]"));
        }
        if system.dim() == 0 {
            return arg_err("system dimension must be positive");
        }
        if alpha.len() != system.dim() {
            return arg_err(format!(
                "initial value has length {} but the system has dimension {}",
                alpha.len(),
                system.dim()
            ));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return arg_err("initial values must be finite");
        }
        Ok(Self {
            name: name.into(),
            x0,
            x_end,
            alpha,
            params: BTreeMap::new(),
            system: Arc::new(system),
        })
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_owned(), value);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    pub fn span(&self) -> f64 {
        self.x_end - self.x0
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn exact(&self, x: f64) -> Option<Vec<f64>> {
        self.system.exact(x)
    }

    pub fn has_exact(&self) -> bool {
        self.system.exact(self.x0).is_some()
    }

    /// `f(x, y)` with shape and finiteness checks.
    pub fn rhs_eval(&self, x: f64, y: &[f64]) -> Result<DVector<f64>> {
        self.check_dim(y)?;
        let mut dy = DVector::zeros(self.dim());
        self.system.rhs(x, y, dy.as_mut_slice());
        if dy.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "right-hand side of {} is not finite at x = {x}",
                self.name
            )));
        }
        Ok(dy)
    }

    /// `∂f/∂y (x, y)` with shape and finiteness checks.
    pub fn jacobian_eval(&self, x: f64, y: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(y)?;
        let m = self.dim();
        let mut jac = DMatrix::zeros(m, m);
        self.system.jacobian(x, y, &mut jac);
        if jac.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "jacobian of {} is not finite at x = {x}",
                self.name
            )));
        }
        Ok(jac)
    }

    // Unchecked variants for inner loops; callers own the buffers.
    pub(crate) fn rhs_into(&self, x: f64, y: &[f64], dy: &mut [f64]) {
        self.system.rhs(x, y, dy);
    }

    pub(crate) fn jacobian_into(&self, x: f64, y: &[f64], jac: &mut DMatrix<f64>) {
        self.system.jacobian(x, y, jac);
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return arg_err(format!(
                "state has length {} but {} has dimension {}",
                y.len(),
                self.name,
                self.dim()
            ));
        }
        Ok(())
    }
}

/// `y' = λ (y − sin x) + cos x`, `y(0) = 0`; exact solution `sin x`.
#[derive(Debug, Clone, Copy)]
pub struct ProtheroRobinson {
    pub lambda: f64,
}

impl OdeSystem for ProtheroRobinson {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, x: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = self.lambda * (y[0] - x.sin()) + x.cos();
    }

    fn jacobian(&self, _x: f64, _y: &[f64], jac: &mut DMatrix<f64>) {
        jac[(0, 0)] = self.lambda;
    }

    fn exact(&self, x: f64) -> Option<Vec<f64>> {
        Some(vec![x.sin()])
    }
}

/// First-order form of `y'' − μ (1 − y²) y' + y = 0`.
#[derive(Debug, Clone, Copy)]
pub struct VanDerPol {
    pub mu: f64,
}

impl OdeSystem for VanDerPol {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _x: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = self.mu * (1.0 - y[0] * y[0]) * y[1] - y[0];
    }

    fn jacobian(&self, _x: f64, y: &[f64], jac: &mut DMatrix<f64>) {
        jac[(0, 0)] = 0.0;
        jac[(0, 1)] = 1.0;
        jac[(1, 0)] = -2.0 * self.mu * y[0] * y[1] - 1.0;
        jac[(1, 1)] = self.mu * (1.0 - y[0] * y[0]);
    }
}

/// Approximate relaxation-oscillation period `μ (3 − 2 ln 2)` for large μ.
pub fn van_der_pol_period(mu: f64) -> f64 {
    mu * (3.0 - 2.0 * std::f64::consts::LN_2)
}

/// Robertson's autocatalytic reaction kinetics.
#[derive(Debug, Clone, Copy)]
pub struct Rober {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl Default for Rober {
    fn default() -> Self {
        Self {
            k1: 0.04,
            k2: 1.0e4,
            k3: 3.0e7,
        }
    }
}

impl OdeSystem for Rober {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, _x: f64, y: &[f64], dy: &mut [f64]) {
        let r1 = self.k1 * y[0];
        let r2 = self.k2 * y[1] * y[2];
        let r3 = self.k3 * y[1] * y[1];
        dy[0] = -r1 + r2;
        dy[1] = r1 - r2 - r3;
        dy[2] = r3;
    }

    fn jacobian(&self, _x: f64, y: &[f64], jac: &mut DMatrix<f64>) {
        let (k1, k2, k3) = (self.k1, self.k2, self.k3);
        jac[(0, 0)] = -k1;
        jac[(0, 1)] = k2 * y[2];
        jac[(0, 2)] = k2 * y[1];
        jac[(1, 0)] = k1;
        jac[(1, 1)] = -k2 * y[2] - 2.0 * k3 * y[1];
        jac[(1, 2)] = -k2 * y[1];
        jac[(2, 0)] = 0.0;
        jac[(2, 1)] = 2.0 * k3 * y[1];
        jac[(2, 2)] = 0.0;
    }
}

/// High Irradiance RESponse: eight-species plant photomorphogenesis model.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hires;

impl OdeSystem for Hires {
    fn dim(&self) -> usize {
        8
    }

    fn rhs(&self, _x: f64, y: &[f64], dy: &mut [f64]) {
        let k = 280.0 * y[5] * y[7];
        dy[0] = -1.71 * y[0] + 0.43 * y[1] + 8.32 * y[2] + 0.0007;
        dy[1] = 1.71 * y[0] - 8.75 * y[1];
        dy[2] = -10.03 * y[2] + 0.43 * y[3] + 0.035 * y[4];
        dy[3] = 8.32 * y[1] + 1.71 * y[2] - 1.12 * y[3];
        dy[4] = -1.745 * y[4] + 0.43 * y[5] + 0.43 * y[6];
        dy[5] = -k + 0.69 * y[3] + 1.71 * y[4] - 0.43 * y[5] + 0.69 * y[6];
        dy[6] = k - 1.81 * y[6];
        dy[7] = -k + 1.81 * y[6];
    }

    fn jacobian(&self, _x: f64, y: &[f64], jac: &mut DMatrix<f64>) {
        jac.fill(0.0);
        jac[(0, 0)] = -1.71;
        jac[(0, 1)] = 0.43;
        jac[(0, 2)] = 8.32;
        jac[(1, 0)] = 1.71;
        jac[(1, 1)] = -8.75;
        jac[(2, 2)] = -10.03;
        jac[(2, 3)] = 0.43;
        jac[(2, 4)] = 0.035;
        jac[(3, 1)] = 8.32;
        jac[(3, 2)] = 1.71;
        jac[(3, 3)] = -1.12;
        jac[(4, 4)] = -1.745;
        jac[(4, 5)] = 0.43;
        jac[(4, 6)] = 0.43;
        jac[(5, 3)] = 0.69;
        jac[(5, 4)] = 1.71;
        jac[(5, 5)] = -280.0 * y[7] - 0.43;
        jac[(5, 6)] = 0.69;
        jac[(5, 7)] = -280.0 * y[5];
        jac[(6, 5)] = 280.0 * y[7];
        jac[(6, 6)] = -1.81;
        jac[(6, 7)] = 280.0 * y[5];
        jac[(7, 5)] = -280.0 * y[7];
        jac[(7, 6)] = 1.81;
        jac[(7, 7)] = -280.0 * y[5];
    }
}

pub const HIRES_END: f64 = 321.8122;
pub const DEFAULT_PR_LAMBDA: f64 = -1.0e5;
pub const DEFAULT_VDP_MU: f64 = 100.0;

/// The four benchmark families by canonical name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BenchmarkKind {
    ProtheroRobinson,
    VanDerPol,
    Rober,
    Hires,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 4] = [
        BenchmarkKind::ProtheroRobinson,
        BenchmarkKind::VanDerPol,
        BenchmarkKind::Rober,
        BenchmarkKind::Hires,
    ];

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "prothero_robinson" | "pr" => Ok(Self::ProtheroRobinson),
            "van_der_pol" | "vdp" | "vanderpol" => Ok(Self::VanDerPol),
            "rober" | "robertson" => Ok(Self::Rober),
            "hires" => Ok(Self::Hires),
            other => arg_err(format!(
                "unknown problem `{other}` (expected prothero_robinson, van_der_pol, rober or hires)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ProtheroRobinson => "prothero_robinson",
            Self::VanDerPol => "van_der_pol",
            Self::Rober => "rober",
            Self::Hires => "hires",
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Optional overrides for the benchmark parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BenchmarkParams {
    pub mu: Option<f64>,
    pub lambda: Option<f64>,
}

impl BenchmarkParams {
    pub fn mu(mu: f64) -> Self {
        Self {
            mu: Some(mu),
            lambda: None,
        }
    }

    pub fn lambda(lambda: f64) -> Self {
        Self {
            mu: None,
            lambda: Some(lambda),
        }
    }
}

/// Builds one of the benchmark problems by name with its standard domain and
/// initial condition.
pub fn make_benchmark(name: &str, params: BenchmarkParams) -> Result<OdeProblem> {
    build_benchmark(BenchmarkKind::parse(name)?, params)
}

pub fn build_benchmark(kind: BenchmarkKind, params: BenchmarkParams) -> Result<OdeProblem> {
    match kind {
        BenchmarkKind::ProtheroRobinson => {
            let lambda = params.lambda.unwrap_or(DEFAULT_PR_LAMBDA);
            if !lambda.is_finite() || lambda >= 0.0 {
                return arg_err(format!("prothero_robinson needs lambda < 0, got {lambda}"));
            }
            Ok(
                OdeProblem::new(kind.name(), 0.0, 2.0 * PI, vec![0.0], ProtheroRobinson { lambda })?
                    .with_param("lambda", lambda),
            )
        }
        BenchmarkKind::VanDerPol => {
            let mu = params.mu.unwrap_or(DEFAULT_VDP_MU);
            if !mu.is_finite() || mu <= 0.0 {
                return arg_err(format!("van_der_pol needs mu > 0, got {mu}"));
            }
            let x_end = if mu == 1.0 { 30.0 } else { 3.0 * mu };
            Ok(
                OdeProblem::new(kind.name(), 0.0, x_end, vec![2.0, 0.0], VanDerPol { mu })?
                    .with_param("mu", mu),
            )
        }
        BenchmarkKind::Rober => {
            let sys = Rober::default();
            Ok(OdeProblem::new(kind.name(), 0.0, 40.0, vec![1.0, 0.0, 0.0], sys)?
                .with_param("k1", sys.k1)
                .with_param("k2", sys.k2)
                .with_param("k3", sys.k3))
        }
        BenchmarkKind::Hires => {
            let mut alpha = vec![0.0; 8];
            alpha[0] = 1.0;
            alpha[7] = 0.0057;
            OdeProblem::new(kind.name(), 0.0, HIRES_END, alpha, Hires)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vdp_rhs_at_initial_state() {
        let p = make_benchmark("van_der_pol", BenchmarkParams::mu(10.0)).unwrap();
        let dy = p.rhs_eval(0.0, &[2.0, 0.0]).unwrap();
        assert_eq!(dy.as_slice(), &[0.0, -2.0]);
    }

    #[test]
    fn rober_rhs_at_initial_state() {
        let p = make_benchmark("rober", BenchmarkParams::default()).unwrap();
        let dy = p.rhs_eval(0.0, &[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(dy[0], -0.04);
        assert_relative_eq!(dy[1], 0.04);
        assert_eq!(dy[2], 0.0);
    }

    #[test]
    fn hires_rhs_at_initial_state() {
        let p = make_benchmark("hires", BenchmarkParams::default()).unwrap();
        let dy = p.rhs_eval(0.0, p.alpha()).unwrap();
        let expected = [-1.7093, 1.71, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for (a, e) in dy.iter().zip(expected) {
            assert_relative_eq!(*a, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn pr_jacobian_is_lambda() {
        let p = make_benchmark("pr", BenchmarkParams::lambda(-123.0)).unwrap();
        for x in [0.0, 1.0, 4.0] {
            let j = p.jacobian_eval(x, &[0.7]).unwrap();
            assert_eq!(j[(0, 0)], -123.0);
        }
    }

    #[test]
    fn vdp_jacobian_at_initial_state() {
        let p = make_benchmark("vdp", BenchmarkParams::mu(10.0)).unwrap();
        let j = p.jacobian_eval(0.0, &[2.0, 0.0]).unwrap();
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -30.0]));
    }

    #[test]
    fn benchmark_domains_and_initial_values() {
        let v1 = make_benchmark("van_der_pol", BenchmarkParams::mu(1.0)).unwrap();
        assert_eq!((v1.x0(), v1.x_end()), (0.0, 30.0));
        assert_eq!(v1.alpha(), &[2.0, 0.0]);
        for mu in [10.0, 100.0, 1000.0] {
            let v = make_benchmark("van_der_pol", BenchmarkParams::mu(mu)).unwrap();
            assert_eq!(v.x_end(), 3.0 * mu);
            // just under two relaxation periods
            let periods = v.x_end() / van_der_pol_period(mu);
            assert!(periods > 1.8 && periods < 1.9);
        }

        let r = make_benchmark("rober", BenchmarkParams::default()).unwrap();
        assert_eq!(r.params()["k1"], 0.04);
        assert_eq!(r.params()["k2"], 1e4);
        assert_eq!(r.params()["k3"], 3e7);
        assert_eq!(r.alpha(), &[1.0, 0.0, 0.0]);
        assert_eq!(r.x_end(), 40.0);

        let h = make_benchmark("hires", BenchmarkParams::default()).unwrap();
        assert_eq!(h.alpha(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0057]);
        assert_eq!(h.x_end(), 321.8122);

        let pr = make_benchmark("prothero_robinson", BenchmarkParams::default()).unwrap();
        assert_eq!(pr.x_end(), 2.0 * PI);
        assert_eq!(pr.params()["lambda"], -1e5);
        assert_eq!(pr.exact(1.0).unwrap(), vec![1.0f64.sin()]);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(make_benchmark("pollu", BenchmarkParams::default()), Err(Error::Argument(_))));
        assert!(make_benchmark("vdp", BenchmarkParams::mu(-1.0)).is_err());
        assert!(make_benchmark("vdp", BenchmarkParams::mu(0.0)).is_err());
        assert!(make_benchmark("pr", BenchmarkParams::lambda(0.0)).is_err());
        assert!(make_benchmark("pr", BenchmarkParams::lambda(5.0)).is_err());
    }

    #[test]
    fn dimension_mismatch_is_an_argument_error() {
        let p = make_benchmark("rober", BenchmarkParams::default()).unwrap();
        assert!(matches!(p.rhs_eval(0.0, &[1.0, 0.0]), Err(Error::Argument(_))));
        assert!(matches!(p.jacobian_eval(0.0, &[1.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn non_finite_rhs_is_a_numeric_error() {
        let p = make_benchmark("vdp", BenchmarkParams::mu(10.0)).unwrap();
        assert!(matches!(p.rhs_eval(0.0, &[f64::INFINITY, 1.0]), Err(Error::Numeric(_))));
    }

    #[test]
    fn rober_rhs_conserves_mass() {
        let p = make_benchmark("rober", BenchmarkParams::default()).unwrap();
        for y in [[1.0, 0.0, 0.0], [0.9, 3e-5, 0.1], [0.3, 1e-6, 0.7]] {
            let dy = p.rhs_eval(0.0, &y).unwrap();
            let scale = dy.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!((dy[0] + dy[1] + dy[2]).abs() <= 4.0 * f64::EPSILON * scale);
        }
    }
}
