use super::CartesianGrid;
use crate::error::{invalid, Result};
use crate::numeric::MonotoneCubic;
use crate::sim::{FlightGeometry, RangeErrorProfile};
use crate::structure::{APEProfile, PhaseErrorSurface};
use ndarray::Array2;

/// The spatial-frequency error `ξ(u)` that a range error leaves after polar
/// reformatting: `ξ(tanθ(t)) = r_e(t) / (sinφ(t)·cosθ(t))`.
#[derive(Debug, Clone)]
pub struct ErrorTruth {
    interp: MonotoneCubic,
}

impl ErrorTruth {
    pub fn new(geometry: &FlightGeometry, err: &RangeErrorProfile) -> Result<Self> {
        if err.values.len() != geometry.pulse_count() {
            return invalid("range error must be sampled on the geometry's slow-time axis");
        }
        let u: Vec<f64> = geometry.azimuth.iter().map(|a| a.tan()).collect();
        let eps: Vec<f64> =
            (0..u.len()).map(|p| err.values[p] / (geometry.incidence[p].sin() * geometry.azimuth[p].cos())).collect();
        let interp = MonotoneCubic::new(&u, &eps)
            .ok_or_else(|| crate::Error::InvalidInput("azimuth angle must increase strictly".into()))?;
        Ok(Self { interp })
    }

    /// `ξ(u)`; `None` outside the recorded aperture.
    pub fn xi(&self, u: f64) -> Option<f64> {
        self.interp.eval(u)
    }

    /// `φ0(X) = Y0·ξ(X/Y0)` on the grid's `X` axis.
    pub fn ape_profile(&self, grid: &CartesianGrid) -> Result<APEProfile> {
        let values = grid
            .x
            .values()
            .into_iter()
            .map(|x| self.xi(x / grid.y0).map(|v| grid.y0 * v))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| crate::Error::InvalidInput("grid X axis exceeds the recorded aperture".into()))?;
        APEProfile::new(grid.x, values)
    }

    /// `Φe(X, Y) = Y·ξ(X/Y)`, masked where `X/Y` leaves the aperture.
    pub fn surface(&self, grid: &CartesianGrid) -> PhaseErrorSurface {
        let xs = grid.x.values();
        let ys = grid.y.values();
        let mut values = Array2::zeros(grid.dims());
        let mut valid = Array2::from_elem(grid.dims(), false);
        for ((i, j), v) in values.indexed_iter_mut() {
            if let Some(e) = self.xi(xs[i] / ys[j]) {
                *v = ys[j] * e;
                valid[[i, j]] = true;
            }
        }
        PhaseErrorSurface { values, valid, grid: grid.clone() }
    }
}
