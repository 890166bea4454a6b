use super::{check_axis, APEProfile, PhaseErrorSurface, RCMProfile};
use crate::axis::UniformAxis;
use crate::error::{invalid, Result};
use crate::numeric::diff::first_derivative;
use crate::numeric::fit::{plane_fit, polyfit};
use crate::numeric::CubicSpline;
use crate::pfa::CartesianGrid;
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// What to do with cells whose scaled abscissa `(Y0/Y)·X` leaves the profile.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EdgePolicy {
    /// Zero and flag the cell.
    #[default]
    Mask,
    /// Continue the profile with a cubic fitted to its outer samples, by up to
    /// `fraction` of the profile length on each side; cells beyond are masked.
    Extend { fraction: f64 },
}

const EXTEND_FIT_DEGREE: usize = 3;

fn extended_spline(x: &UniformAxis, values: &[f64], policy: EdgePolicy) -> Result<CubicSpline> {
    let n = values.len();
    if n < 2 {
        return invalid("profile needs at least two samples");
    }
    let h = x.step;
    match policy {
        EdgePolicy::Mask => Ok(CubicSpline::uniform(x.first(), h, values)),
        EdgePolicy::Extend { fraction } => {
            if !(0.0..=0.5).contains(&fraction) {
                return invalid("extension fraction must lie in [0, 0.5]");
            }
            let pad = (fraction * n as f64).ceil() as usize;
            let fit = (n / 8).clamp(EXTEND_FIT_DEGREE + 1, 32).min(n);
            let left_x: Vec<f64> = (0..fit).map(|k| k as f64).collect();
            let left = polyfit(&left_x, &values[..fit], EXTEND_FIT_DEGREE);
            let right_x: Vec<f64> = (n - fit..n).map(|k| k as f64).collect();
            let right = polyfit(&right_x, &values[n - fit..], EXTEND_FIT_DEGREE);
            let mut ext = Vec::with_capacity(n + 2 * pad);
            ext.extend((1..=pad).rev().map(|k| left.eval(-(k as f64))));
            ext.extend_from_slice(values);
            ext.extend((0..pad).map(|k| right.eval((n + k) as f64)));
            Ok(CubicSpline::uniform(x.first() - pad as f64 * h, h, &ext))
        }
    }
}

/// `Φe(X, Y) = (Y/Y0)·φ0((Y0/Y)·X)`, cells outside the profile masked.
pub fn ape_to_surface(phi0: &APEProfile, grid: &CartesianGrid) -> Result<PhaseErrorSurface> {
    ape_to_surface_with(phi0, grid, EdgePolicy::Mask)
}

pub fn ape_to_surface_with(phi0: &APEProfile, grid: &CartesianGrid, policy: EdgePolicy) -> Result<PhaseErrorSurface> {
    check_axis(&phi0.x, grid)?;
    let spline = extended_spline(&phi0.x, &phi0.values, policy)?;
    let (nx, ny) = grid.dims();
    let xs = grid.x.values();
    let y0 = grid.y0;
    let cols: Vec<(Vec<f64>, Vec<bool>)> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let y = grid.y.value(j);
            let ratio = y0 / y;
            if ratio == 1.0 {
                return (phi0.values.clone(), vec![true; nx]);
            }
            let mut v = vec![0.0; nx];
            let mut ok = vec![false; nx];
            for i in 0..nx {
                if let Some(p) = spline.eval(ratio * xs[i]) {
                    v[i] = p / ratio;
                    ok[i] = true;
                }
            }
            (v, ok)
        })
        .collect();
    Ok(assemble(cols, grid))
}

fn assemble(cols: Vec<(Vec<f64>, Vec<bool>)>, grid: &CartesianGrid) -> PhaseErrorSurface {
    let mut values = Array2::zeros(grid.dims());
    let mut valid = Array2::from_elem(grid.dims(), false);
    for (j, (v, ok)) in cols.into_iter().enumerate() {
        values.column_mut(j).iter_mut().zip(v).for_each(|(d, s)| *d = s);
        valid.column_mut(j).iter_mut().zip(ok).for_each(|(d, s)| *d = s);
    }
    PhaseErrorSurface { values, valid, grid: grid.clone() }
}

fn zero_index(x: &UniformAxis) -> Result<usize> {
    if x.center != 0.0 || x.center_index < 2 || x.center_index + 2 >= x.len {
        return invalid("profile axis must be zero-centred with two samples either side of X = 0");
    }
    Ok(x.center_index)
}

/// `φ1 = (φ0 − X·φ0') / Y0` with fourth-order differences.
pub fn ape_to_rcm(phi0: &APEProfile, y0: f64) -> Result<RCMProfile> {
    if phi0.values.len() < 5 {
        return invalid("profile needs at least five samples");
    }
    let d = first_derivative(&phi0.values, phi0.x.step);
    let values = phi0.values.iter().zip(&d).enumerate().map(|(k, (p, dp))| (p - phi0.x.value(k) * dp) / y0).collect();
    Ok(RCMProfile { x: phi0.x, values })
}

/// APE whose surface matches the RCM-driven surface up to a plane:
/// `ψ0(X) = −X·Y0·∫₀^X φ1(v)/v² dv`, after removing the value and slope of
/// `φ1` at `X = 0`. The integrand at the centre sample is the fourth-order
/// limit from its neighbours.
pub fn rcm_to_ape(phi1: &RCMProfile, y0: f64) -> Result<APEProfile> {
    let x = phi1.x;
    let c = zero_index(&x)?;
    let h = x.step;
    let p = &phi1.values;
    let slope = first_derivative(p, h)[c];
    let p0 = p[c];
    let mut g: Vec<f64> = (0..x.len)
        .map(|k| {
            if k == c {
                return 0.0;
            }
            let xv = x.value(k);
            (p[k] - p0 - slope * xv) / (xv * xv)
        })
        .collect();
    g[c] = (-g[c - 2] + 4.0 * g[c - 1] + 4.0 * g[c + 1] - g[c + 2]) / 6.0;
    let cum = CubicSpline::uniform(x.first(), h, &g).cumulative_integral();
    let base = cum[c];
    let values = (0..x.len).map(|k| -x.value(k) * y0 * (cum[k] - base)).collect();
    Ok(APEProfile { x, values })
}

/// Surface implied by a residual RCM profile, with its plane removed.
pub fn rcm_to_surface(phi1: &RCMProfile, grid: &CartesianGrid) -> Result<PhaseErrorSurface> {
    rcm_to_surface_with(phi1, grid, EdgePolicy::Mask)
}

pub fn rcm_to_surface_with(phi1: &RCMProfile, grid: &CartesianGrid, policy: EdgePolicy) -> Result<PhaseErrorSurface> {
    check_axis(&phi1.x, grid)?;
    let psi = rcm_to_ape(phi1, grid.y0)?;
    let s = ape_to_surface_with(&psi, grid, policy)?;
    Ok(detrend_plane(&s).0)
}

/// Removes the least-squares plane over valid cells; returns `(c0, cX, cY)`.
pub fn detrend_plane(s: &PhaseErrorSurface) -> (PhaseErrorSurface, (f64, f64, f64)) {
    let xs = s.grid.x.values();
    // fit on Y − Y0 for conditioning
    let ys: Vec<f64> = s.grid.y.values().into_iter().map(|y| y - s.grid.y0).collect();
    let samples: Vec<(f64, f64, f64)> =
        s.values.indexed_iter().filter(|(ij, _)| s.valid[*ij]).map(|((i, j), v)| (xs[i], ys[j], *v)).collect();
    let (c0, cx, cy) = plane_fit(&samples);
    let mut out = s.clone();
    ndarray::Zip::indexed(&mut out.values).and(&s.valid).for_each(|(i, j), v, ok| {
        if *ok {
            *v -= c0 + cx * xs[i] + cy * ys[j];
        }
    });
    (out, (c0 - cy * s.grid.y0, cx, cy))
}

/// Order-≤1 Taylor surface `φ0(X) + φ1(X)(Y − Y0)`; `φ1 = None` gives an
/// `X`-only surface.
pub fn truncated_surface(
    phi0: &APEProfile,
    phi1: Option<&RCMProfile>,
    grid: &CartesianGrid,
) -> Result<PhaseErrorSurface> {
    check_axis(&phi0.x, grid)?;
    if let Some(p1) = phi1 {
        check_axis(&p1.x, grid)?;
    }
    let ys = grid.y.values();
    Ok(PhaseErrorSurface::from_fn_indexed(grid, |i, j| {
        phi0.values[i] + phi1.map_or(0.0, |p| p.values[i] * (ys[j] - grid.y0))
    }))
}

/// `Y·ξ(X/Y)` for a caller-supplied `ξ`.
pub fn surface_from_xi(xi: impl Fn(f64) -> f64 + Sync, grid: &CartesianGrid) -> PhaseErrorSurface {
    PhaseErrorSurface::from_fn(grid, |x, y| y * xi(x / y))
}

/// `√(X² + Y²)·μ(X/Y)`, the polar-raster form of the same surface.
pub fn surface_from_mu(mu: impl Fn(f64) -> f64 + Sync, grid: &CartesianGrid) -> PhaseErrorSurface {
    PhaseErrorSurface::from_fn(grid, |x, y| x.hypot(y) * mu(x / y))
}

impl PhaseErrorSurface {
    pub(crate) fn from_fn_indexed(grid: &CartesianGrid, f: impl Fn(usize, usize) -> f64) -> Self {
        let values = Array2::from_shape_fn(grid.dims(), |(i, j)| f(i, j));
        Self { valid: Array2::from_elem(values.dim(), true), values, grid: grid.clone() }
    }
}
