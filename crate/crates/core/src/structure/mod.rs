//! Spatial-frequency structure of the residual error, `Φe(X, Y) = Y·ξ(X/Y)`:
//! the maps from a 1-D azimuth phase error or residual RCM to the full surface,
//! its Taylor coefficients in `Y − Y0`, and the autofocus necessity limits.

mod limits;
mod mapping;
mod taylor;

pub use limits::{
    classify_profile, necessity_limits, resolution_boundary, LimitKind, LimitReport, NecessityLimits, ProfileLimits,
    Region,
};
pub use mapping::{
    ape_to_rcm, ape_to_surface, ape_to_surface_with, detrend_plane, rcm_to_ape, rcm_to_surface, rcm_to_surface_with,
    surface_from_mu, surface_from_xi, truncated_surface, EdgePolicy,
};
pub use taylor::{quadratic_family, taylor_decompose, taylor_decompose_with_tol, TaylorCoeffs};

use crate::axis::UniformAxis;
use crate::error::{invalid, Result};
use crate::pfa::CartesianGrid;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Azimuth phase error `φ0(X)` in radians on an `X` axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct APEProfile {
    pub x: UniformAxis,
    pub values: Vec<f64>,
}

/// Residual range migration `φ1(X)` in metres on an `X` axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RCMProfile {
    pub x: UniformAxis,
    pub values: Vec<f64>,
}

macro_rules! profile_common {
    ($t:ty) => {
        impl $t {
            pub fn new(x: UniformAxis, values: Vec<f64>) -> Result<Self> {
                if values.len() != x.len {
                    return invalid("profile length does not match its axis");
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return invalid("profile contains non-finite values");
                }
                Ok(Self { x, values })
            }

            pub fn zeros(x: UniformAxis) -> Self {
                Self { values: vec![0.0; x.len], x }
            }

            pub fn from_fn(x: UniformAxis, f: impl Fn(f64) -> f64) -> Self {
                Self { values: x.values().into_iter().map(f).collect(), x }
            }

            pub fn peak_to_peak(&self) -> f64 {
                let hi = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
                if self.values.is_empty() {
                    0.0
                } else {
                    hi - lo
                }
            }

            /// Profile with its least-squares constant and slope removed.
            pub fn without_affine(&self) -> Self {
                let xs = self.x.values();
                Self { x: self.x, values: crate::numeric::fit::remove_line(&xs, &self.values) }
            }

            /// CSV lines `X,value` with a header row.
            pub fn to_csv(&self) -> String {
                let mut s = String::from("x,value\n");
                for (k, v) in self.values.iter().enumerate() {
                    s.push_str(&format!("{:.17e},{:.17e}\n", self.x.value(k), v));
                }
                s
            }
        }
    };
}

profile_common!(APEProfile);
profile_common!(RCMProfile);

/// `Φe(X, Y)` in radians with a validity mask. Masked cells hold zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseErrorSurface {
    pub values: Array2<f64>,
    pub valid: Array2<bool>,
    pub grid: CartesianGrid,
}

impl PhaseErrorSurface {
    pub fn zeros(grid: &CartesianGrid) -> Self {
        let d = grid.dims();
        Self { values: Array2::zeros(d), valid: Array2::from_elem(d, true), grid: grid.clone() }
    }

    /// Surface from a closure over `(X, Y)`, fully valid.
    pub fn from_fn(grid: &CartesianGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let xs = grid.x.values();
        let ys = grid.y.values();
        let values = Array2::from_shape_fn(grid.dims(), |(i, j)| f(xs[i], ys[j]));
        Self { valid: Array2::from_elem(values.dim(), true), values, grid: grid.clone() }
    }

    pub fn masked_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }

    /// Largest `|a − b|` over cells valid in both.
    pub fn max_abs_diff(&self, other: &PhaseErrorSurface) -> f64 {
        ndarray::Zip::from(&self.values)
            .and(&self.valid)
            .and(&other.values)
            .and(&other.valid)
            .fold(0.0f64, |m, a, va, b, vb| if *va && *vb { m.max((a - b).abs()) } else { m })
    }

    /// Cellwise `self − other`, valid where both are.
    pub fn sub(&self, other: &PhaseErrorSurface) -> Result<PhaseErrorSurface> {
        if self.values.dim() != other.values.dim() {
            return invalid("surface dimensions differ");
        }
        let mut out = self.clone();
        ndarray::Zip::from(&mut out.values).and(&mut out.valid).and(&other.values).and(&other.valid).for_each(
            |a, va, b, vb| {
                *va = *va && *vb;
                *a = if *va { *a - b } else { 0.0 };
            },
        );
        Ok(out)
    }

    /// Plane `c0 + cx·X + cy·Y` added on valid cells.
    pub fn add_plane(&self, c0: f64, cx: f64, cy: f64) -> PhaseErrorSurface {
        let mut out = self.clone();
        let xs = self.grid.x.values();
        let ys = self.grid.y.values();
        ndarray::Zip::indexed(&mut out.values).and(&self.valid).for_each(|(i, j), v, ok| {
            if *ok {
                *v += c0 + cx * xs[i] + cy * ys[j];
            }
        });
        out
    }

    pub fn rms(&self) -> f64 {
        let (s, n) = ndarray::Zip::from(&self.values).and(&self.valid).fold((0.0, 0usize), |(s, n), v, ok| {
            if *ok {
                (s + v * v, n + 1)
            } else {
                (s, n)
            }
        });
        if n == 0 {
            0.0
        } else {
            (s / n as f64).sqrt()
        }
    }
}

pub(crate) fn check_axis(profile_x: &UniformAxis, grid: &CartesianGrid) -> Result<()> {
    if !profile_x.matches(&grid.x, 1e-9) {
        return Err(crate::Error::GridMismatch("profile X axis differs from the grid X axis".into()));
    }
    Ok(())
}
