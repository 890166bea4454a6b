//! Squint-mode spotlight geometry, point-target phase history in the
//! range-frequency domain, and controlled range-error injection.
//!
//! Data are produced after matched filtering and motion compensation to the
//! scene center, so a target at `(x, y)` contributes
//! `A·exp{j(4π/c)(f_c + f_r)[sinφ(x sinθ + y cosθ) + r_e(t)]}`.

use crate::axis::UniformAxis;
use crate::error::{invalid, Error, Result};
use crate::pfa::CartesianSpectrum;
use crate::structure::PhaseErrorSurface;
use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarParams {
    pub center_frequency: f64,
    pub bandwidth: f64,
    pub range_freq_samples: usize,
    pub pulse_count: usize,
    pub propagation_speed: f64,
}

impl RadarParams {
    pub fn new(center_frequency: f64, bandwidth: f64, range_freq_samples: usize, pulse_count: usize) -> Result<Self> {
        let p =
            Self { center_frequency, bandwidth, range_freq_samples, pulse_count, propagation_speed: SPEED_OF_LIGHT };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return invalid("bandwidth must be positive");
        }
        if !(self.center_frequency > self.bandwidth / 2.0) {
            return invalid("center frequency must exceed half the bandwidth");
        }
        if !(self.propagation_speed > 0.0) {
            return invalid("propagation speed must be positive");
        }
        if self.range_freq_samples < 2 || self.pulse_count < 2 {
            return invalid("need at least two range-frequency samples and two pulses");
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.propagation_speed / self.center_frequency
    }

    /// Baseband range-frequency axis: `f_k = (k - N/2)·B/N`, so `-B/2 ≤ f < B/2`.
    pub fn range_freq_axis(&self) -> UniformAxis {
        let n = self.range_freq_samples;
        UniformAxis::centered(0.0, self.bandwidth / n as f64, n)
    }
}

/// Sampled collection geometry with the scene center at the origin and the
/// aperture-center line of sight along +y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightGeometry {
    pub slow_time: UniformAxis,
    pub apc: Vec<[f64; 3]>,
    pub range: Vec<f64>,
    pub azimuth: Vec<f64>,
    pub incidence: Vec<f64>,
    pub squint: f64,
    pub reference_incidence: f64,
}

fn angles_of(p: [f64; 3]) -> (f64, f64, f64) {
    let ground = p[0].hypot(p[1]);
    let r = ground.hypot(p[2]);
    (r, p[0].atan2(p[1]), ground.atan2(p[2]))
}

impl FlightGeometry {
    /// Builds the geometry from APC positions. Positions are rotated about z so
    /// that the sample at `t = 0` lies on the +y axis.
    pub fn from_positions(slow_time: UniformAxis, positions: &[[f64; 3]], squint: f64) -> Result<Self> {
        if positions.len() != slow_time.len || positions.len() < 2 {
            return invalid("position count must match the slow-time axis");
        }
        if slow_time.center != 0.0 || !(slow_time.step > 0.0) {
            return invalid("slow-time axis must be increasing and centered on t = 0");
        }
        if positions.iter().flatten().any(|v| !v.is_finite()) {
            return invalid("positions must be finite");
        }
        let c = positions[slow_time.center_index];
        let rot = c[0].atan2(c[1]);
        let (s, co) = rot.sin_cos();
        let mut apc: Vec<[f64; 3]> =
            positions.iter().map(|p| [co * p[0] - s * p[1], s * p[0] + co * p[1], p[2]]).collect();
        apc[slow_time.center_index][0] = 0.0;
        let mut range = Vec::with_capacity(apc.len());
        let mut azimuth = Vec::with_capacity(apc.len());
        let mut incidence = Vec::with_capacity(apc.len());
        for p in &apc {
            let (r, th, ph) = angles_of(*p);
            if !(r > 0.0) {
                return invalid("APC coincides with the scene center");
            }
            if p[1] <= 0.0 {
                return invalid("aperture must stay within ±90° of the aperture-center azimuth");
            }
            range.push(r);
            azimuth.push(th);
            incidence.push(ph);
        }
        let reference_incidence = incidence[slow_time.center_index];
        Ok(Self { slow_time, apc, range, azimuth, incidence, squint, reference_incidence })
    }

    pub fn pulse_count(&self) -> usize {
        self.apc.len()
    }

    pub fn sin_ref(&self) -> f64 {
        self.reference_incidence.sin()
    }

    pub fn center_index(&self) -> usize {
        self.slow_time.center_index
    }
}

/// Straight, constant-velocity pass. `squint` is the angle between broadside and
/// the aperture-center line of sight. An altitude of zero gives `sinφ_ref = 1`.
pub fn make_linear_geometry(
    radar: &RadarParams,
    velocity: f64,
    altitude: f64,
    scene_center_slant_range: f64,
    squint: f64,
    aperture_length: f64,
    pulse_count: usize,
) -> Result<FlightGeometry> {
    radar.validate()?;
    if !(velocity > 0.0) {
        return invalid("velocity must be positive");
    }
    if !(scene_center_slant_range > 0.0) {
        return invalid("slant range must be positive");
    }
    if !(altitude >= 0.0 && altitude < scene_center_slant_range) {
        return invalid("altitude must be non-negative and below the slant range");
    }
    if !(aperture_length > 0.0) {
        return invalid("aperture length must be positive");
    }
    if !(squint.abs() < PI / 2.0) {
        return invalid("squint must be within ±90°");
    }
    if pulse_count < 2 {
        return invalid("need at least two pulses");
    }
    let dt = aperture_length / (velocity * pulse_count as f64);
    let t = UniformAxis::centered(0.0, dt, pulse_count);
    let ground = (scene_center_slant_range.powi(2) - altitude.powi(2)).sqrt();
    let (ss, cs) = squint.sin_cos();
    let positions: Vec<[f64; 3]> = (0..pulse_count)
        .map(|k| {
            let along = velocity * t.value(k);
            [along * cs, ground + along * ss, altitude]
        })
        .collect();
    FlightGeometry::from_positions(t, &positions, squint)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTarget {
    pub x: f64,
    pub y: f64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TargetScene {
    pub targets: Vec<PointTarget>,
}

impl TargetScene {
    pub fn new(targets: Vec<PointTarget>) -> Result<Self> {
        let s = Self { targets };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.targets {
            if !(t.x.is_finite() && t.y.is_finite() && t.amplitude.re.is_finite() && t.amplitude.im.is_finite()) {
                return invalid("target coordinates and reflectivities must be finite");
            }
        }
        Ok(())
    }

    /// `rows × cols` grid with the given spacings, centered on the origin. Each
    /// row is offset in range by `stagger` per column so every target sits at a
    /// distinct range.
    pub fn grid(rows: usize, cols: usize, dx: f64, dy: f64, stagger: f64) -> Self {
        let mut targets = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let x = (c as f64 - (cols as f64 - 1.0) / 2.0) * dx;
                let y = (r as f64 - (rows as f64 - 1.0) / 2.0) * dy + (c as f64 - (cols as f64 - 1.0) / 2.0) * stagger;
                targets.push(PointTarget { x, y, amplitude: Complex64::new(1.0, 0.0) });
            }
        }
        Self { targets }
    }
}

/// Range-error shape. Unknown `kind` tags are rejected when parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ErrorSpec {
    /// `r_e(t) = coeff·t²`, coeff in m/s².
    Quadratic {
        coeff: f64,
    },
    /// `r_e(t) = amplitude·sin(2π·cycles·(t - t_first)/T + phase)` over the aperture time `T`.
    Sinusoid {
        amplitude: f64,
        cycles: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Integrated Gaussian steps, `step_std` metres per pulse.
    RandomWalk {
        step_std: f64,
        seed: u64,
    },
    Tabulated {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeErrorProfile {
    pub spec: ErrorSpec,
    pub values: Vec<f64>,
}

impl RangeErrorProfile {
    pub fn zero(n: usize) -> Self {
        Self { spec: ErrorSpec::Tabulated { values: vec![0.0; n] }, values: vec![0.0; n] }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn peak_to_peak(&self) -> f64 {
        let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }
}

pub fn make_error_profile(spec: &ErrorSpec, slow_time: &UniformAxis) -> Result<RangeErrorProfile> {
    let n = slow_time.len;
    let values: Vec<f64> = match spec {
        ErrorSpec::Quadratic { coeff } => {
            if !coeff.is_finite() {
                return invalid("quadratic coefficient must be finite");
            }
            (0..n).map(|k| coeff * slow_time.value(k).powi(2)).collect()
        }
        ErrorSpec::Sinusoid { amplitude, cycles, phase } => {
            if !(*amplitude >= 0.0 && cycles.is_finite() && phase.is_finite()) {
                return invalid("sinusoid needs amplitude ≥ 0 and finite cycles/phase");
            }
            let t0 = slow_time.first();
            let span = slow_time.span();
            (0..n).map(|k| amplitude * (2.0 * PI * cycles * (slow_time.value(k) - t0) / span + phase).sin()).collect()
        }
        ErrorSpec::RandomWalk { step_std, seed } => {
            if !(*step_std >= 0.0 && step_std.is_finite()) {
                return invalid("random-walk step deviation must be ≥ 0");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let normal = Normal::new(0.0, *step_std).map_err(|e| Error::InvalidInput(e.to_string()))?;
            let mut acc = 0.0;
            (0..n)
                .map(|_| {
                    let v = acc;
                    acc += normal.sample(&mut rng);
                    v
                })
                .collect()
        }
        ErrorSpec::Tabulated { values } => {
            if values.len() != n {
                return invalid(format!("tabulated error has {} samples, slow-time axis has {n}", values.len()));
            }
            values.clone()
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return invalid("range error must be finite");
    }
    Ok(RangeErrorProfile { spec: spec.clone(), values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseHistory {
    /// `[pulse, range frequency]`
    pub data: Array2<Complex64>,
    pub radar: RadarParams,
    pub geometry: FlightGeometry,
}

impl PhaseHistory {
    pub fn validate(&self) -> Result<()> {
        let (p, f) = self.data.dim();
        if p != self.geometry.pulse_count() || p != self.radar.pulse_count || f != self.radar.range_freq_samples {
            return invalid("phase-history dimensions do not match radar/geometry axes");
        }
        if self.data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return invalid("phase history contains non-finite samples");
        }
        Ok(())
    }
}

/// Phase of one target at one `(pulse, f_r)` sample.
#[inline]
pub fn signal_phase(
    radar: &RadarParams,
    geometry: &FlightGeometry,
    pulse: usize,
    f_r: f64,
    x: f64,
    y: f64,
    r_e: f64,
) -> f64 {
    let (st, ct) = geometry.azimuth[pulse].sin_cos();
    let sp = geometry.incidence[pulse].sin();
    let diff_range = sp * (x * st + y * ct) + r_e;
    4.0 * PI / radar.propagation_speed * (radar.center_frequency + f_r) * diff_range
}

pub fn synth_phase_history(
    scene: &TargetScene,
    geometry: &FlightGeometry,
    radar: &RadarParams,
    err: &RangeErrorProfile,
) -> Result<PhaseHistory> {
    radar.validate()?;
    scene.validate()?;
    if geometry.pulse_count() != radar.pulse_count {
        return invalid("geometry pulse count differs from radar pulse count");
    }
    if err.values.len() != geometry.pulse_count() {
        return invalid("range error must be sampled on the geometry's slow-time axis");
    }
    let fax = radar.range_freq_axis();
    let nf = radar.range_freq_samples;
    let mut data = Array2::<Complex64>::zeros((radar.pulse_count, nf));
    let k = 4.0 * PI / radar.propagation_speed;
    data.axis_iter_mut(ndarray::Axis(0)).into_par_iter().enumerate().for_each(|(p, mut row)| {
        let (st, ct) = geometry.azimuth[p].sin_cos();
        let sp = geometry.incidence[p].sin();
        let re = err.values[p];
        for t in &scene.targets {
            let dr = sp * (t.x * st + t.y * ct) + re;
            for (j, v) in row.iter_mut().enumerate() {
                let ph = k * (radar.center_frequency + fax.value(j)) * dr;
                *v += t.amplitude * Complex64::from_polar(1.0, ph);
            }
        }
    });
    Ok(PhaseHistory { data, radar: *radar, geometry: geometry.clone() })
}

/// Adds circular complex Gaussian noise of per-sample standard deviation `sigma`.
pub fn add_noise(data: &mut Array2<Complex64>, sigma: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma / 2f64.sqrt()).expect("finite sigma");
    for v in data.iter_mut() {
        *v += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
    }
}

/// Multiplies the spectrum by `exp{+jΦe}` on the surface's valid cells.
pub fn inject_spectrum_error(spec: &CartesianSpectrum, surface: &PhaseErrorSurface) -> Result<CartesianSpectrum> {
    apply_surface(spec, surface, 1.0)
}

pub(crate) fn apply_surface(
    spec: &CartesianSpectrum,
    surface: &PhaseErrorSurface,
    sign: f64,
) -> Result<CartesianSpectrum> {
    if !spec.grid.same_lattice(&surface.grid) || spec.data.dim() != surface.values.dim() {
        return Err(Error::GridMismatch("phase-error surface and spectrum grids differ".into()));
    }
    let mut out = spec.clone();
    ndarray::Zip::from(&mut out.data).and(&surface.values).and(&surface.valid).for_each(|v, &phi, &ok| {
        if ok {
            *v *= Complex64::from_polar(1.0, sign * phi);
        }
    });
    Ok(out)
}
