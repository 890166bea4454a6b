use super::grid::{range_scale, CartesianGrid};
use super::CartesianSpectrum;
use crate::axis::UniformAxis;
use crate::error::{invalid, Result};
use crate::numeric::{MonotoneCubic, SincConfig, SincKernel};
use crate::sim::{FlightGeometry, PhaseHistory, RadarParams};
use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

/// Phase history after the per-pulse range-frequency scaling.
#[derive(Debug, Clone)]
pub struct RangeResampled {
    /// `[pulse, output range frequency]`
    pub data: Array2<Complex64>,
    pub freq: UniformAxis,
    pub coverage: Array2<bool>,
    pub radar: RadarParams,
    pub geometry: FlightGeometry,
}

/// Per pulse, output sample at `f_r` is the input interpolated at
/// `δ_r·f_r + f_c(δ_r − 1)`. Requests outside the recorded band are zeroed and
/// cleared in the coverage mask.
pub fn range_resample(ph: &PhaseHistory, out_freq: &UniformAxis, kernel: &SincKernel) -> Result<RangeResampled> {
    ph.validate()?;
    if out_freq.len == 0 {
        return invalid("empty output frequency axis");
    }
    let radar = ph.radar;
    let geo = &ph.geometry;
    let fin = radar.range_freq_axis();
    let fc = radar.center_frequency;
    let sin_ref = geo.sin_ref();
    let np = geo.pulse_count();
    let nf = out_freq.len;
    let mut data = Array2::<Complex64>::zeros((np, nf));
    let mut coverage = Array2::<bool>::from_elem((np, nf), false);
    data.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(coverage.axis_iter_mut(Axis(0)).into_par_iter())
        .enumerate()
        .for_each(|(p, (mut row, mut cov))| {
            let input = ph.data.row(p);
            let input = input.as_slice().expect("row-major phase history");
            let d = range_scale(sin_ref, geo, p);
            for j in 0..nf {
                let f = out_freq.value(j);
                let q = d * f + fc * (d - 1.0);
                if let Some(v) = kernel.interpolate(input, fin.position(q)) {
                    row[j] = v;
                    cov[j] = true;
                }
            }
        });
    Ok(RangeResampled { data, freq: *out_freq, coverage, radar, geometry: geo.clone() })
}

/// Azimuth pass per range-frequency column: RCM linearization followed by the
/// keystone rescaling, evaluated as one change of variables onto the grid's `X`
/// samples. Slow times outside the aperture are zeroed and masked.
pub fn azimuth_resample(rr: &RangeResampled, grid: &CartesianGrid, kernel: &SincKernel) -> Result<CartesianSpectrum> {
    let (nx, ny) = grid.dims();
    if rr.freq.len != ny {
        return invalid("range-resampled data and grid disagree on the Y sample count");
    }
    let ks = &grid.keystone;
    let inv = MonotoneCubic::new(&ks.tau, &ks.slow_time)
        .ok_or_else(|| crate::Error::InvalidInput("keystone table must be strictly increasing".into()))?;
    let t_axis = rr.geometry.slow_time;
    let fc = grid.center_frequency;
    let scale = grid.y0 * grid.omega;
    let columns: Vec<(Vec<Complex64>, Vec<bool>)> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let col: Vec<Complex64> = rr.data.column(j).to_vec();
            let cov_in = rr.coverage.column(j);
            let f_r = rr.freq.value(j);
            let mut out = vec![Complex64::new(0.0, 0.0); nx];
            let mut cov = vec![false; nx];
            for k in 0..nx {
                let tau = grid.x.value(k) / scale;
                let Some(t) = inv.eval(fc * tau / (fc + f_r)) else {
                    continue;
                };
                let pos = t_axis.position(t);
                let lo = pos.floor().max(0.0) as usize;
                let hi = (pos.ceil() as usize).min(col.len() - 1);
                if !(cov_in[lo] && cov_in[hi]) {
                    continue;
                }
                if let Some(v) = kernel.interpolate(&col, pos) {
                    out[k] = v;
                    cov[k] = true;
                }
            }
            (out, cov)
        })
        .collect();
    let mut data = Array2::<Complex64>::zeros((nx, ny));
    let mut coverage = Array2::<bool>::from_elem((nx, ny), false);
    for (j, (col, cov)) in columns.into_iter().enumerate() {
        data.column_mut(j).iter_mut().zip(col).for_each(|(d, v)| *d = v);
        coverage.column_mut(j).iter_mut().zip(cov).for_each(|(d, v)| *d = v);
    }
    Ok(CartesianSpectrum { data, grid: grid.clone(), coverage })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PfaConfig {
    pub nx: usize,
    pub ny: usize,
    pub interpolator: SincConfig,
}

impl Default for PfaConfig {
    fn default() -> Self {
        Self { nx: 1024, ny: 1024, interpolator: SincConfig::default() }
    }
}

/// Full polar reformatting onto the inscribed Cartesian grid.
pub fn polar_format(ph: &PhaseHistory, cfg: &PfaConfig) -> Result<CartesianSpectrum> {
    let kernel = SincKernel::new(cfg.interpolator);
    let grid = CartesianGrid::inscribed(ph, cfg.nx, cfg.ny, kernel.half_width())?;
    let freq = UniformAxis::centered(
        0.0,
        grid.y.step / super::grid::wavenumber_scale(grid.sin_ref, grid.propagation_speed),
        cfg.ny,
    );
    let rr = range_resample(ph, &freq, &kernel)?;
    azimuth_resample(&rr, &grid, &kernel)
}
