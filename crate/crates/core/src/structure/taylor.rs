use super::{ape_to_surface, APEProfile, PhaseErrorSurface, RCMProfile};
use crate::axis::UniformAxis;
use crate::error::{invalid, Error, Result};
use crate::numeric::diff::{first_derivative, second_derivative};
use crate::pfa::CartesianGrid;

/// Coefficients of `Φe ≈ φ0 + φ1(Y − Y0) + φ2(Y − Y0)²` on the `X` axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCoeffs {
    pub x: UniformAxis,
    pub phi0: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    /// RMS of the second-order reconstruction against the source, over valid cells.
    pub truncation_rms: f64,
    /// RMS of the exact remapping of `φ0` against the source.
    pub structure_rms: f64,
}

impl TaylorCoeffs {
    pub fn ape(&self) -> APEProfile {
        APEProfile { x: self.x, values: self.phi0.clone() }
    }

    pub fn rcm(&self) -> RCMProfile {
        RCMProfile { x: self.x, values: self.phi1.clone() }
    }
}

/// Default structure tolerance in radians (rms).
pub const STRUCTURE_TOL: f64 = 1e-3;

pub fn taylor_decompose(surface: &PhaseErrorSurface) -> Result<TaylorCoeffs> {
    taylor_decompose_with_tol(surface, STRUCTURE_TOL)
}

/// Reads `φ0` off the `Y = Y0` row, differentiates it and checks that
/// remapping `φ0` reproduces the whole surface within `tol` rad rms plus a
/// `1e-6` share of the surface's peak magnitude.
pub fn taylor_decompose_with_tol(surface: &PhaseErrorSurface, tol: f64) -> Result<TaylorCoeffs> {
    let grid = &surface.grid;
    let c = grid.y.center_index;
    if grid.y.center != grid.y0 || c >= grid.y.len {
        return invalid("surface grid has no Y = Y0 row");
    }
    if grid.x.len < 6 {
        return invalid("need at least six X samples");
    }
    if surface.valid.column(c).iter().any(|v| !v) {
        return invalid("Y = Y0 row is not fully valid");
    }
    let phi0: Vec<f64> = surface.values.column(c).to_vec();
    let h = grid.x.step;
    let y0 = grid.y0;
    let d1 = first_derivative(&phi0, h);
    let d2 = second_derivative(&phi0, h);
    let xs = grid.x.values();
    let phi1: Vec<f64> = (0..xs.len()).map(|k| (phi0[k] - xs[k] * d1[k]) / y0).collect();
    let phi2: Vec<f64> = (0..xs.len()).map(|k| xs[k] * xs[k] * d2[k] / (2.0 * y0 * y0)).collect();

    let remap = ape_to_surface(&APEProfile { x: grid.x, values: phi0.clone() }, grid)?;
    let structure_rms = remap.sub(surface)?.rms();
    let peak = surface.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let limit = tol + 1e-6 * peak;
    if structure_rms > limit {
        return Err(Error::StructureMismatch { rms: structure_rms, tol: limit });
    }
    let truncation_rms = truncation_residual(surface, grid, &phi0, &phi1, &phi2);
    Ok(TaylorCoeffs { x: grid.x, phi0, phi1, phi2, truncation_rms, structure_rms })
}

fn truncation_residual(s: &PhaseErrorSurface, g: &CartesianGrid, p0: &[f64], p1: &[f64], p2: &[f64]) -> f64 {
    let ys = g.y.values();
    let (sum, n) =
        s.values.indexed_iter().filter(|(ij, _)| s.valid[*ij]).fold((0.0, 0usize), |(acc, n), ((i, j), v)| {
            let dy = ys[j] - g.y0;
            let r = v - (p0[i] + p1[i] * dy + p2[i] * dy * dy);
            (acc + r * r, n + 1)
        });
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// `(aX², −aX²/Y0, aX²/Y0²)` on the grid's `X` axis.
pub fn quadratic_family(a: f64, grid: &CartesianGrid) -> (APEProfile, RCMProfile, Vec<f64>) {
    let y0 = grid.y0;
    let x = grid.x;
    let phi0 = APEProfile::from_fn(x, |v| a * v * v);
    let phi1 = RCMProfile::from_fn(x, |v| -a * v * v / y0);
    let phi2 = x.values().into_iter().map(|v| a * v * v / (y0 * y0)).collect();
    (phi0, phi1, phi2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SPEED_OF_LIGHT;

    fn grid(n: usize) -> CartesianGrid {
        let y0 = 4.0 * std::f64::consts::PI * 10e9 / SPEED_OF_LIGHT;
        CartesianGrid::synthetic(10e9, 1.0, SPEED_OF_LIGHT, n, 24.0 / n as f64, n, 0.06 * y0 / n as f64)
    }

    #[test]
    fn zero_surface_zero_coeffs() {
        let g = grid(32);
        let t = taylor_decompose(&PhaseErrorSurface::zeros(&g)).unwrap();
        assert!(t.phi0.iter().chain(&t.phi1).chain(&t.phi2).all(|v| *v == 0.0));
    }

    #[test]
    fn quadratic_coefficients() {
        let g = grid(128);
        for a in [1e-4, 1e-3, 1e-2] {
            let (p0, p1, p2) = quadratic_family(a, &g);
            let t = taylor_decompose(&ape_to_surface(&p0, &g).unwrap()).unwrap();
            for k in 0..128 {
                let close = |u: f64, v: f64| (u - v).abs() <= 1e-6 * v.abs().max(1e-300) + 1e-18;
                assert!(close(t.phi0[k], p0.values[k]));
                assert!(close(t.phi1[k], p1.values[k]), "{} {}", t.phi1[k], p1.values[k]);
                assert!(close(t.phi2[k], p2[k]), "{} {}", t.phi2[k], p2[k]);
            }
        }
    }

    #[test]
    fn quadratic_family_relations() {
        let g = grid(16);
        let (p0, p1, p2) = quadratic_family(0.3, &g);
        for k in 0..16 {
            assert!((p1.values[k] + p0.values[k] / g.y0).abs() < 1e-15);
            assert!((p2[k] * g.y0 * g.y0 - p0.values[k]).abs() < 1e-12);
        }
        let (z0, z1, z2) = quadratic_family(0.0, &g);
        assert!(z0.values.iter().chain(&z1.values).chain(&z2).all(|v| *v == 0.0));
    }

    #[test]
    fn non_pfa_surface_is_rejected() {
        let g = grid(64);
        // a pure Y² term is not of the Y·ξ(X/Y) form
        let s = PhaseErrorSurface::from_fn(&g, |x, y| 0.01 * x * x + 5.0 * ((y - g.y0) / 3.0).powi(2));
        assert!(matches!(taylor_decompose(&s), Err(Error::StructureMismatch { .. })));
    }
}
