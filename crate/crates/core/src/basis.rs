//! Gaussian RBF hidden layer with fixed random parameters.
//!
//! Two node shapes are supported, see [`BasisForm`]:
//!
//! * shifted: `G_ji(x) = exp(-(x + b_ji - c_j)^2 / σ_ji^2)`, centers
//!   `c_j = x_start + jΔx/(h-1)` for `j = 0..h`, covering the segment exactly;
//! * scaled (default): `G_ji(x) = exp(-(x - c_j)^2 / σ_ji^2 - b_ji)`, the bias
//!   rescales the amplitude, centers for `j = 1..=h`.
//!
//! Input weights are fixed to one. Biases and inverse square widths are drawn
//! uniformly from ranges that scale with the segment width Δx:
//!
//! * `b_ji ∈ [-Δx/6, 0]`
//! * `1/σ_ji^2 ∈ [3/(8Δx²), 81/(2Δx²)]`
//!
//! The scaled form is the default because the shifted one lets a single wide
//! segment pass the residual test on HIRES while missing the solution by O(1).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::rng::SeededRng;

/// Value of one Gaussian node at `x`.
#[inline]
pub fn rbf_value(c: f64, b: f64, inv_sq_width: f64, x: f64) -> f64 {
    let z = x + b - c;
    (-z * z * inv_sq_width).exp()
}

/// `d/dx` of [`rbf_value`].
#[inline]
pub fn rbf_dx(c: f64, b: f64, inv_sq_width: f64, x: f64) -> f64 {
    let z = x + b - c;
    -2.0 * z * inv_sq_width * (-z * z * inv_sq_width).exp()
}

/// Value of one node of the [`BasisForm::Scaled`] form.
#[inline]
pub fn rbf_value_scaled(c: f64, b: f64, inv_sq_width: f64, x: f64) -> f64 {
    let z = x - c;
    (-z * z * inv_sq_width - b).exp()
}

/// `d/dx` of [`rbf_value_scaled`].
#[inline]
pub fn rbf_dx_scaled(c: f64, b: f64, inv_sq_width: f64, x: f64) -> f64 {
    -2.0 * (x - c) * inv_sq_width * rbf_value_scaled(c, b, inv_sq_width, x)
}

/// Where the bias enters the Gaussian, and the matching center layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisForm {
    /// `exp(-(x + b - c)² / σ²)`, centers on both segment ends.
    Shifted,
    /// `exp(-(x - c)² / σ² - b)`, centers one spacing to the right.
    #[default]
    Scaled,
}

impl BasisForm {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "shifted" => Ok(Self::Shifted),
            "scaled" => Ok(Self::Scaled),
            other => arg_err(format!("unknown basis form `{other}` (expected shifted or scaled)")),
        }
    }
}

/// Sampling range for the biases on a segment of width `delta_x`.
pub fn bias_range(delta_x: f64) -> (f64, f64) {
    (-delta_x / 6.0, 0.0)
}

/// Sampling range for `1/σ²` on a segment of width `delta_x`.
pub fn inv_sq_width_range(delta_x: f64) -> (f64, f64) {
    let d2 = delta_x * delta_x;
    (3.0 / (8.0 * d2), 81.0 / (2.0 * d2))
}

/// Random hidden-layer parameters for one segment: `h` nodes for each of the
/// `m` solution components.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfSegmentBasis {
    x_start: f64,
    width: f64,
    centers: Vec<f64>,
    /// `h × m`, entry `(j, i)` is `b_ji`.
    biases: DMatrix<f64>,
    /// `h × m`, entry `(j, i)` is `1/σ_ji²`.
    inv_sq_widths: DMatrix<f64>,
    form: BasisForm,
}

impl RbfSegmentBasis {
    /// Assembles a basis from explicit parameters (used when loading a stored
    /// solution and in tests).
    pub fn from_parts(
        x_start: f64,
        width: f64,
        centers: Vec<f64>,
        biases: DMatrix<f64>,
        inv_sq_widths: DMatrix<f64>,
    ) -> Result<Self> {
        let h = centers.len();
        if !(width > 0.0 && width.is_finite()) {
            return arg_err(format!("basis width must be positive, got {width}"));
        }
        if h == 0 || biases.nrows() != h || inv_sq_widths.shape() != biases.shape() || biases.ncols() == 0 {
            return arg_err(format!(
                "inconsistent basis shapes: {h} centers, biases {:?}, widths {:?}",
                biases.shape(),
                inv_sq_widths.shape()
            ));
        }
        if inv_sq_widths.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return arg_err("inverse square widths must be positive and finite");
        }
        if centers.iter().chain(biases.iter()).any(|v| !v.is_finite()) {
            return arg_err("basis parameters must be finite");
        }
        Ok(Self {
            x_start,
            width,
            centers,
            biases,
            inv_sq_widths,
            form: BasisForm::Shifted,
        })
    }

    pub fn with_form(mut self, form: BasisForm) -> Self {
        self.form = form;
        self
    }

    pub fn form(&self) -> BasisForm {
        self.form
    }

    pub fn hidden(&self) -> usize {
        self.centers.len()
    }

    pub fn components(&self) -> usize {
        self.biases.ncols()
    }

    pub fn x_start(&self) -> f64 {
        self.x_start
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn biases(&self) -> &DMatrix<f64> {
        &self.biases
    }

    pub fn inv_sq_widths(&self) -> &DMatrix<f64> {
        &self.inv_sq_widths
    }

    /// `G_ji(x)`.
    #[inline]
    pub fn value(&self, j: usize, i: usize, x: f64) -> f64 {
        let (c, b, s) = (self.centers[j], self.biases[(j, i)], self.inv_sq_widths[(j, i)]);
        match self.form {
            BasisForm::Shifted => rbf_value(c, b, s, x),
            BasisForm::Scaled => rbf_value_scaled(c, b, s, x),
        }
    }

    /// `G_ji'(x)`.
    #[inline]
    pub fn dx(&self, j: usize, i: usize, x: f64) -> f64 {
        let (c, b, s) = (self.centers[j], self.biases[(j, i)], self.inv_sq_widths[(j, i)]);
        match self.form {
            BasisForm::Shifted => rbf_dx(c, b, s, x),
            BasisForm::Scaled => rbf_dx_scaled(c, b, s, x),
        }
    }
}

/// Draws a fresh basis for the segment `[x_start, x_start + delta_x]`.
///
/// Centers are `c_j = x_start + j·Δx/(h-1)` for `j = 0..h`, so the first and
/// last centers sit on the segment end points. Biases are drawn first (node
/// major, component minor), then the inverse square widths in the same order.
pub fn sample_basis(
    x_start: f64,
    delta_x: f64,
    h: usize,
    m: usize,
    rng: &mut SeededRng,
) -> Result<RbfSegmentBasis> {
    sample_basis_with_form(BasisForm::Shifted, x_start, delta_x, h, m, rng)
}

/// [`sample_basis`] for either functional form; the random draws are the
/// same, only the center layout and the evaluation differ.
pub fn sample_basis_with_form(
    form: BasisForm,
    x_start: f64,
    delta_x: f64,
    h: usize,
    m: usize,
    rng: &mut SeededRng,
) -> Result<RbfSegmentBasis> {
    if h < 2 {
        return arg_err(format!("need at least 2 hidden nodes to space centers, got {h}"));
    }
    if m == 0 {
        return arg_err("need at least one component");
    }
    if !(delta_x > 0.0 && delta_x.is_finite()) || !x_start.is_finite() {
        return arg_err(format!("segment width must be positive and finite, got {delta_x}"));
    }

    let spacing = delta_x / (h - 1) as f64;
    let centers: Vec<f64> = match form {
        BasisForm::Shifted => {
            let mut c: Vec<f64> = (0..h).map(|j| x_start + j as f64 * spacing).collect();
            c[h - 1] = x_start + delta_x;
            c
        }
        BasisForm::Scaled => (1..=h).map(|j| x_start + j as f64 * spacing).collect(),
    };

    let (b_lo, b_hi) = bias_range(delta_x);
    let (s_lo, s_hi) = inv_sq_width_range(delta_x);
    let mut biases = DMatrix::zeros(h, m);
    let mut inv_sq_widths = DMatrix::zeros(h, m);
    for j in 0..h {
        for i in 0..m {
            biases[(j, i)] = rng.uniform(b_lo, b_hi);
        }
    }
    for j in 0..h {
        for i in 0..m {
            inv_sq_widths[(j, i)] = rng.uniform(s_lo, s_hi);
        }
    }

    Ok(RbfSegmentBasis {
        x_start,
        width: delta_x,
        centers,
        biases,
        inv_sq_widths,
        form,
    })
}
