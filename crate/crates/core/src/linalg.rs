//! Minimum-norm least squares through an ε-truncated SVD pseudoinverse.
//!
//! `x = V_r Σ_r⁻¹ U_rᵀ b`, keeping only the singular values above the cutoff.
//! Discarding the tiny ones regularizes the rank-deficient collocation
//! Jacobians produced by overlapping Gaussians.

use nalgebra::{DMatrix, DVector};

use crate::error::{arg_err, Error, Result};

/// How the singular value cutoff is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TruncationRule {
    /// `max(rows, cols) · f64::EPSILON · σ_max`, the usual pseudoinverse
    /// default tolerance.
    #[default]
    Default,
    /// `ε · σ_max`.
    Relative(f64),
    /// `ε`.
    Absolute(f64),
}

impl TruncationRule {
    pub fn cutoff(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        match *self {
            TruncationRule::Default => rows.max(cols) as f64 * f64::EPSILON * sigma_max,
            TruncationRule::Relative(eps) => eps * sigma_max,
            TruncationRule::Absolute(eps) => eps,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TruncationRule::Relative(eps) | TruncationRule::Absolute(eps) if !(eps >= 0.0) => {
                arg_err(format!("truncation epsilon must be nonnegative, got {eps}"))
            }
            _ => Ok(()),
        }
    }
}

/// Thin SVD with the truncation already decided.
pub struct TruncatedSvd {
    /// `rows × k` left singular vectors, `k = min(rows, cols)`.
    u: DMatrix<f64>,
    /// Nonincreasing.
    singular_values: DVector<f64>,
    /// `cols × k` right singular vectors.
    v: DMatrix<f64>,
    cutoff: f64,
}

impl TruncatedSvd {
    pub fn new(a: &DMatrix<f64>, rule: TruncationRule) -> Result<Self> {
        rule.validate()?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("matrix has non-finite entries".into()));
        }
        let (rows, cols) = a.shape();
        if rows == 0 || cols == 0 {
            return arg_err("cannot decompose an empty matrix");
        }
        let fa = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)]);
        let svd = fa
            .thin_svd()
            .map_err(|e| Error::Numeric(format!("SVD did not converge: {e:?}")))?;
        let k = rows.min(cols);
        let (fu, fs, fv) = (svd.U(), svd.S().column_vector(), svd.V());
        let u = DMatrix::from_fn(rows, k, |i, j| fu[(i, j)]);
        let v = DMatrix::from_fn(cols, k, |i, j| fv[(i, j)]);
        let singular_values = DVector::from_fn(k, |i, _| fs[i]);
        let sigma_max = singular_values.iter().copied().fold(0.0, f64::max);
        let cutoff = rule.cutoff(rows, cols, sigma_max);
        Ok(Self {
            u,
            singular_values,
            v,
            cutoff,
        })
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular_values
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    fn kept(&self, sigma: f64) -> bool {
        sigma > 0.0 && sigma >= self.cutoff
    }

    pub fn rank(&self) -> usize {
        self.singular_values.iter().filter(|s| self.kept(**s)).count()
    }

    /// Right singular vectors (as columns) of the retained singular values.
    pub fn retained_right_vectors(&self) -> DMatrix<f64> {
        self.v.columns(0, self.rank()).into_owned()
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        if b.len() != self.u.nrows() {
            return arg_err(format!("rhs has length {} but matrix has {} rows", b.len(), self.u.nrows()));
        }
        let mut x = DVector::zeros(self.v.nrows());
        for (k, &sigma) in self.singular_values.iter().enumerate() {
            if !self.kept(sigma) {
                continue;
            }
            let coef = self.u.column(k).dot(b) / sigma;
            x.axpy(coef, &self.v.column(k), 1.0);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("pseudoinverse solution is not finite".into()));
        }
        Ok(x)
    }
}

/// Minimum-norm solution of the rank-truncated problem `min ‖A x − b‖`.
pub fn truncated_pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>, rule: TruncationRule) -> Result<DVector<f64>> {
    if b.len() != a.nrows() {
        return arg_err(format!("rhs has length {} but matrix has {} rows", b.len(), a.nrows()));
    }
    TruncatedSvd::new(a, rule)?.solve(b)
}

/// Number of singular values at or above the cutoff.
pub fn effective_rank(a: &DMatrix<f64>, rule: TruncationRule) -> Result<usize> {
    Ok(TruncatedSvd::new(a, rule)?.rank())
}
