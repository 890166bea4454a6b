//! 1-D error estimation: phase gradient autofocus for the azimuth phase error,
//! range-profile alignment for the residual RCM, and the coarse-range
//! preprocessing that keeps PGA valid under large migration.

mod pga;
mod rcm;

pub use pga::estimate_ape_pga;
pub use rcm::estimate_rcm;

use crate::error::{invalid, Result};
use crate::pfa::{form_image, CartesianSpectrum, ComplexImage, Taper};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PgaConfig {
    pub max_iterations: usize,
    /// Lower bound on the first window, pixels.
    pub initial_window: usize,
    pub window_shrink: f64,
    pub min_window: usize,
    /// Peak-to-mean power ratio a range bin needs to be used, dB.
    pub snr_floor: f64,
    /// Most range bins used per iteration.
    pub target_bins: usize,
    /// Stop once the rms phase update falls below this, rad.
    pub tolerance: f64,
}

impl Default for PgaConfig {
    fn default() -> Self {
        Self {
            max_iterations: 12,
            initial_window: 64,
            window_shrink: 0.7,
            min_window: 8,
            snr_floor: 10.0,
            target_bins: 32,
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMode {
    First,
    #[default]
    RunningMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RcmConfig {
    pub reference: ReferenceMode,
    pub upsample: usize,
    pub poly_degree: usize,
    /// Normalized correlation peak below which an azimuth sample counts as unreliable.
    pub sharpness_floor: f64,
    /// Shifts further than this many robust deviations from the fit are dropped and the fit repeated.
    pub outlier_sigma: f64,
}

impl Default for RcmConfig {
    fn default() -> Self {
        Self {
            reference: ReferenceMode::RunningMean,
            upsample: 16,
            poly_degree: 8,
            sharpness_floor: 0.5,
            outlier_sigma: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub pga: PgaConfig,
    pub rcm: RcmConfig,
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        let p = &self.pga;
        if p.max_iterations < 1 {
            return invalid("pga.max_iterations must be at least 1");
        }
        if !(p.window_shrink > 0.0 && p.window_shrink < 1.0) {
            return invalid("pga.window_shrink must lie in (0, 1)");
        }
        if p.min_window < 2 || p.target_bins < 1 {
            return invalid("pga.min_window must be at least 2 and pga.target_bins at least 1");
        }
        if self.rcm.upsample < 4 {
            return invalid("rcm.upsample must be at least 4");
        }
        if !(self.rcm.outlier_sigma > 0.0) {
            return invalid("rcm.outlier_sigma must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EstimateDiagnostics {
    /// RMS phase update per iteration, rad (PGA).
    pub rms_updates: Vec<f64>,
    /// Range bins used in the last iteration (PGA).
    pub selected_bins: Vec<usize>,
    /// Raw per-sample range shifts before smoothing, cells.
    pub shifts: Vec<f64>,
    /// Azimuth samples left out of the polynomial fit (range alignment).
    pub rejected: Vec<usize>,
    /// Normalized correlation peak per azimuth sample (range alignment).
    pub sharpness: Vec<f64>,
    pub converged: bool,
    pub low_confidence: bool,
    /// Peak-to-peak of the smoothed migration before bias removal, cells.
    pub migration_cells: Option<f64>,
}

/// Keeps the central `1/factor` of the `Y` band and forms the coarse image.
pub fn coarse_range_preprocess(spec: &CartesianSpectrum, factor: usize) -> Result<ComplexImage> {
    let ny = spec.grid.y.len;
    if factor == 0 || !ny.is_multiple_of(factor) {
        return invalid("coarsening factor must be positive and divide the Y sample count");
    }
    let len = ny / factor;
    if len < 32 {
        return invalid(format!("coarsening leaves {len} Y samples, fewer than 32"));
    }
    if factor == 1 {
        return Ok(form_image(spec, Taper::None));
    }
    Ok(form_image(&spec.y_band(len)?, Taper::None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfa::CartesianGrid;
    use num_complex::Complex64;

    fn spec(n: usize) -> CartesianSpectrum {
        let g = CartesianGrid::synthetic(10e9, 1.0, crate::sim::SPEED_OF_LIGHT, n, 0.05, n, 0.05);
        CartesianSpectrum::point_targets(&g, &[(3.0, -2.0, Complex64::new(1.0, 0.0))])
    }

    #[test]
    fn factor_one_is_plain_image() {
        let s = spec(64);
        assert_eq!(coarse_range_preprocess(&s, 1).unwrap().data, form_image(&s, Taper::None).data);
    }

    #[test]
    fn too_coarse_rejected() {
        let s = spec(64);
        assert!(coarse_range_preprocess(&s, 4).is_err());
        assert!(coarse_range_preprocess(&s, 3).is_err());
        assert_eq!(coarse_range_preprocess(&s, 2).unwrap().dims(), (64, 32));
    }

    #[test]
    fn config_validation() {
        let mut c = EstimatorConfig::default();
        assert!(c.validate().is_ok());
        c.pga.window_shrink = 1.0;
        assert!(c.validate().is_err());
        let mut c = EstimatorConfig::default();
        c.rcm.upsample = 2;
        assert!(c.validate().is_err());
    }
}
