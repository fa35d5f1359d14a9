//! Per-segment trial solution `Ψ_i(x) = α_i + (x − x_k) N_i(x)` and its
//! derivatives with respect to `x` and the output weights.
//!
//! `N_i(x) = Σ_j w_ji G_ji(x)` is linear in the output weights, which are the
//! only trained parameters. The factor `(x − x_k)` makes `Ψ(x_k) = α`
//! hold exactly for every choice of weights.
//!
//! Indices are zero-based: `j ∈ 0..h` is the hidden node, `i ∈ 0..m` the
//! solution component.

use nalgebra::DMatrix;

use crate::basis::RbfSegmentBasis;
use crate::error::{arg_err, Result};

/// One trained (or in-training) interval of the piecewise solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSolution {
    basis: RbfSegmentBasis,
    x_stop: f64,
    alpha: Vec<f64>,
    /// `h × m`; column `i` holds the weights of sub-network `N_i`.
    weights: DMatrix<f64>,
}

impl SegmentSolution {
    pub fn new(basis: RbfSegmentBasis, x_stop: f64, alpha: Vec<f64>, weights: DMatrix<f64>) -> Result<Self> {
        let (h, m) = (basis.hidden(), basis.components());
        if alpha.len() != m {
            return arg_err(format!("segment has {m} components but alpha has length {}", alpha.len()));
        }
        if weights.shape() != (h, m) {
            return arg_err(format!("weights must be {h}×{m}, got {:?}", weights.shape()));
        }
        if !(x_stop > basis.x_start()) || x_stop - basis.x_start() != basis.width() {
            return arg_err(format!(
                "segment end {x_stop} does not match basis interval [{}, {} + {}]",
                basis.x_start(),
                basis.x_start(),
                basis.width()
            ));
        }
        Ok(Self {
            basis,
            x_stop,
            alpha,
            weights,
        })
    }

    /// Segment with all output weights zero, i.e. `Ψ ≡ α`.
    pub fn with_zero_weights(basis: RbfSegmentBasis, x_stop: f64, alpha: Vec<f64>) -> Result<Self> {
        let w = DMatrix::zeros(basis.hidden(), basis.components());
        Self::new(basis, x_stop, alpha, w)
    }

    pub fn basis(&self) -> &RbfSegmentBasis {
        &self.basis
    }

    pub fn x_start(&self) -> f64 {
        self.basis.x_start()
    }

    pub fn x_stop(&self) -> f64 {
        self.x_stop
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn hidden(&self) -> usize {
        self.basis.hidden()
    }

    pub fn components(&self) -> usize {
        self.basis.components()
    }

    /// Replaces the output weights; the shape must stay `h × m`.
    pub fn set_weights(&mut self, weights: DMatrix<f64>) -> Result<()> {
        if weights.shape() != self.weights.shape() {
            return arg_err(format!(
                "weights must be {:?}, got {:?}",
                self.weights.shape(),
                weights.shape()
            ));
        }
        self.weights = weights;
        Ok(())
    }

    /// Weights flattened as `W[j + i·h]`, the column order of the collocation
    /// Jacobian.
    pub fn weight_vector(&self) -> &[f64] {
        self.weights.as_slice()
    }

    pub(crate) fn weight_vector_mut(&mut self) -> &mut [f64] {
        self.weights.as_mut_slice()
    }

    /// True when `x` lies outside `[x_start, x_stop]`; evaluation there is
    /// allowed but is an extrapolation of the fitted network.
    pub fn is_extrapolation(&self, x: f64) -> bool {
        x < self.x_start() || x > self.x_stop
    }

    /// `N_i(x)`.
    pub fn network(&self, x: f64, i: usize) -> f64 {
        (0..self.hidden()).map(|j| self.weights[(j, i)] * self.basis.value(j, i, x)).sum()
    }

    /// `Ψ(x)`.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.components()];
        self.eval_into(x, &mut out);
        out
    }

    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        let s = x - self.x_start();
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.alpha[i] + s * self.network(x, i);
        }
    }

    /// `dΨ/dx (x) = N_i(x) + (x − x_k) Σ_j w_ji G_ji'(x)`.
    pub fn dx(&self, x: f64) -> Vec<f64> {
        let s = x - self.x_start();
        (0..self.components())
            .map(|i| {
                let (mut n, mut dn) = (0.0, 0.0);
                for j in 0..self.hidden() {
                    let w = self.weights[(j, i)];
                    n += w * self.basis.value(j, i, x);
                    dn += w * self.basis.dx(j, i, x);
                }
                n + s * dn
            })
            .collect()
    }

    /// `∂Ψ_i/∂w_ji (x) = (x − x_k) G_ji(x)`; independent of the weights.
    pub fn dw(&self, x: f64, j: usize, i: usize) -> Result<f64> {
        self.check_index(j, i)?;
        Ok((x - self.x_start()) * self.basis.value(j, i, x))
    }

    /// `∂²Ψ_i/∂x∂w_ji (x) = G_ji(x) + (x − x_k) G_ji'(x)`.
    pub fn dxdw(&self, x: f64, j: usize, i: usize) -> Result<f64> {
        self.check_index(j, i)?;
        Ok(self.basis.value(j, i, x) + (x - self.x_start()) * self.basis.dx(j, i, x))
    }

    fn check_index(&self, j: usize, i: usize) -> Result<()> {
        if j >= self.hidden() || i >= self.components() {
            return arg_err(format!(
                "weight index ({j}, {i}) out of range for {}×{} weights",
                self.hidden(),
                self.components()
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::sample_basis;
    use crate::rng::SeededRng;
    use approx::assert_relative_eq;

    fn unit_segment() -> SegmentSolution {
        // h=1 is below the sampling minimum, so build the basis by hand
        let basis = RbfSegmentBasis::from_parts(
            0.0,
            1.0,
            vec![0.0],
            DMatrix::from_element(1, 1, 0.0),
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        SegmentSolution::new(basis, 1.0, vec![0.0], DMatrix::from_element(1, 1, 1.0)).unwrap()
    }

    fn random_segment(seed: u64) -> SegmentSolution {
        let mut rng = SeededRng::new(seed);
        let basis = sample_basis(0.5, 2.0, 12, 2, &mut rng).unwrap();
        let w = DMatrix::from_fn(12, 2, |_, _| rng.uniform(-1.0, 1.0));
        SegmentSolution::new(basis, 2.5, vec![0.3, -1.2], w).unwrap()
    }

    #[test]
    fn scalar_trial_value() {
        let seg = unit_segment();
        assert_relative_eq!(seg.eval(1.0)[0], (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn initial_condition_is_exact() {
        let seg = random_segment(9);
        assert_eq!(seg.eval(0.5), vec![0.3, -1.2]);
    }

    #[test]
    fn zero_weights_give_constant_alpha() {
        let mut rng = SeededRng::new(1);
        let basis = sample_basis(0.0, 1.0, 8, 2, &mut rng).unwrap();
        let seg = SegmentSolution::with_zero_weights(basis, 1.0, vec![1.0, 2.0]).unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(seg.eval(x), vec![1.0, 2.0]);
            assert_eq!(seg.dx(x), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn dx_at_left_end_is_network() {
        let seg = random_segment(4);
        let d = seg.dx(0.5);
        for i in 0..2 {
            assert_eq!(d[i], seg.network(0.5, i));
        }
    }

    #[test]
    fn weight_derivatives_vanish_at_left_end() {
        let seg = random_segment(5);
        for j in 0..12 {
            for i in 0..2 {
                assert_eq!(seg.dw(0.5, j, i).unwrap(), 0.0);
                assert_eq!(seg.dxdw(0.5, j, i).unwrap(), seg.basis().value(j, i, 0.5));
            }
        }
    }

    #[test]
    fn mixed_derivative_at_gaussian_peak() {
        let basis = RbfSegmentBasis::from_parts(
            0.0,
            2.0,
            vec![0.0, 1.0, 2.0],
            DMatrix::zeros(3, 1),
            DMatrix::from_element(3, 1, 0.8),
        )
        .unwrap();
        let seg = SegmentSolution::with_zero_weights(basis, 2.0, vec![0.0]).unwrap();
        assert_eq!(seg.dxdw(1.0, 1, 0).unwrap(), 1.0);
    }

    #[test]
    fn index_out_of_range() {
        let seg = random_segment(1);
        assert!(seg.dw(1.0, 12, 0).is_err());
        assert!(seg.dxdw(1.0, 0, 2).is_err());
    }

    #[test]
    fn inconsistent_construction_rejected() {
        let mut rng = SeededRng::new(1);
        let basis = sample_basis(0.0, 1.0, 8, 2, &mut rng).unwrap();
        assert!(SegmentSolution::with_zero_weights(basis.clone(), 1.5, vec![0.0, 0.0]).is_err());
        assert!(SegmentSolution::with_zero_weights(basis.clone(), 1.0, vec![0.0]).is_err());
        assert!(SegmentSolution::new(basis, 1.0, vec![0.0, 0.0], DMatrix::zeros(7, 2)).is_err());
    }

    #[test]
    fn extrapolation_flag() {
        let seg = random_segment(2);
        assert!(!seg.is_extrapolation(0.5));
        assert!(!seg.is_extrapolation(2.5));
        assert!(seg.is_extrapolation(2.6));
        assert!(seg.is_extrapolation(0.4));
    }
}
