use crate::axis::UniformAxis;
use crate::error::{invalid, Result};
use crate::numeric::MonotoneCubic;
use crate::sim::{FlightGeometry, PhaseHistory};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Azimuth change of variables used by the polar reformatting.
///
/// RCM linearization maps the uniform variable `τ` to slow time
/// `t = ϑ_a(τ)` with `tanθ(ϑ_a(τ)) = Ω·τ`; the keystone step then rescales
/// `τ → f_c·τ/(f_c + f_r)`. The table stores `(tanθ(t_k)/Ω, t_k)` for every pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeystoneMap {
    pub tau: Vec<f64>,
    pub slow_time: Vec<f64>,
    pub center_frequency: f64,
}

impl KeystoneMap {
    fn interpolant(&self) -> Option<MonotoneCubic> {
        MonotoneCubic::new(&self.tau, &self.slow_time)
    }

    /// `ϑ_a(τ)`; `None` outside the recorded aperture.
    pub fn linearized_time(&self, tau: f64) -> Option<f64> {
        self.interpolant()?.eval(tau)
    }

    /// Slow time feeding output sample `τ` of the range-frequency row `f_r`.
    pub fn source_time(&self, tau: f64, f_r: f64) -> Option<f64> {
        self.linearized_time(self.center_frequency * tau / (self.center_frequency + f_r))
    }
}

/// Uniform Cartesian spatial-frequency grid. `X` is zero-centered, `Y` is
/// centered on `Y0 = (4π sinφ_ref / c)·f_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartesianGrid {
    pub x: UniformAxis,
    pub y: UniformAxis,
    pub y0: f64,
    /// Azimuth scaling constant, rad/(m·s) in `X = Y0·Ω·τ`.
    pub omega: f64,
    pub center_frequency: f64,
    pub propagation_speed: f64,
    pub sin_ref: f64,
    pub keystone: KeystoneMap,
}

/// `(4π sinφ_ref / c)`, the factor between range frequency and `Y`.
pub fn wavenumber_scale(sin_ref: f64, propagation_speed: f64) -> f64 {
    4.0 * PI * sin_ref / propagation_speed
}

impl CartesianGrid {
    /// Grid with explicit axes, used for synthetic spectra and tests.
    pub fn synthetic(
        center_frequency: f64,
        sin_ref: f64,
        propagation_speed: f64,
        nx: usize,
        dx: f64,
        ny: usize,
        dy: f64,
    ) -> Self {
        let y0 = wavenumber_scale(sin_ref, propagation_speed) * center_frequency;
        Self {
            x: UniformAxis::centered(0.0, dx, nx),
            y: UniformAxis::centered(y0, dy, ny),
            y0,
            omega: 1.0,
            center_frequency,
            propagation_speed,
            sin_ref,
            keystone: KeystoneMap { tau: vec![], slow_time: vec![], center_frequency },
        }
    }

    /// Largest zero-centered rectangle inside the recorded polar annulus, with
    /// `margin` input samples kept clear of every edge so each output sample
    /// sees the full interpolation kernel.
    pub fn inscribed(ph: &PhaseHistory, nx: usize, ny: usize, margin: usize) -> Result<Self> {
        ph.validate()?;
        if nx < 2 || ny < 2 {
            return invalid("grid needs at least two samples per axis");
        }
        let radar = &ph.radar;
        let geo = &ph.geometry;
        let np = geo.pulse_count();
        if 2 * margin + 2 >= np || 2 * margin + 2 >= radar.range_freq_samples {
            return invalid("margin leaves no usable support");
        }
        let sin_ref = geo.sin_ref();
        let fc = radar.center_frequency;
        let fax = radar.range_freq_axis();
        let lo = fax.value(margin);
        let hi = fax.value(radar.range_freq_samples - 1 - margin);
        let (mut f_lo, mut f_hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for p in 0..np {
            let d = range_scale(sin_ref, geo, p);
            f_lo = f_lo.max((lo - fc * (d - 1.0)) / d);
            f_hi = f_hi.min((hi - fc * (d - 1.0)) / d);
        }
        let half_f = (-f_lo).min(f_hi);
        if !(half_f > 0.0) {
            return invalid("range-frequency support collapses after scaling");
        }
        let df = 2.0 * half_f / ny as f64;
        let ky = wavenumber_scale(sin_ref, radar.propagation_speed);
        let y0 = ky * fc;
        let y = UniformAxis::centered(y0, ky * df, ny);

        let tan: Vec<f64> = geo.azimuth.iter().map(|a| a.tan()).collect();
        let increasing = tan.windows(2).all(|w| w[1] > w[0]);
        if !increasing {
            return invalid("azimuth angle must increase strictly along the aperture");
        }
        let s_lo = tan[margin];
        let s_hi = tan[np - 1 - margin];
        let tan_lim = (-s_lo).min(s_hi);
        if !(tan_lim > 0.0) {
            return invalid("aperture does not straddle the aperture-center azimuth");
        }
        let t_lim = (geo.center_index() - margin) as f64 * geo.slow_time.step;
        let omega = tan_lim / t_lim;
        let y_lo = y.first();
        let dx = 2.0 * tan_lim * y_lo / nx as f64;
        let x = UniformAxis::centered(0.0, dx, nx);
        let keystone = KeystoneMap {
            tau: tan.iter().map(|s| s / omega).collect(),
            slow_time: geo.slow_time.values(),
            center_frequency: fc,
        };
        Ok(Self {
            x,
            y,
            y0,
            omega,
            center_frequency: fc,
            propagation_speed: radar.propagation_speed,
            sin_ref,
            keystone,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x.len, self.y.len)
    }

    /// Range frequency (Hz, baseband) of `Y` row `j`.
    pub fn range_frequency(&self, j: usize) -> f64 {
        (self.y.value(j) - self.y0) / wavenumber_scale(self.sin_ref, self.propagation_speed)
    }

    /// Image pixel spacing in azimuth, `2π / X-span`.
    pub fn pixel_x(&self) -> f64 {
        2.0 * PI / self.x.span()
    }

    /// Image pixel spacing in range, `2π / Y-span`.
    pub fn pixel_y(&self) -> f64 {
        2.0 * PI / self.y.span()
    }

    pub fn same_lattice(&self, other: &CartesianGrid) -> bool {
        self.x.matches(&other.x, 1e-9)
            && self.y.matches(&other.y, 1e-9)
            && (self.y0 - other.y0).abs() <= 1e-12 * self.y0.abs()
    }

    /// Sub-grid keeping `Y` rows `start..start+len`.
    pub fn y_subgrid(&self, start: usize, len: usize) -> Self {
        let mut g = self.clone();
        let center_index = self.y.center_index as isize - start as isize;
        g.y = UniformAxis { center: self.y.center, center_index: center_index.max(0) as usize, step: self.y.step, len };
        if center_index < 0 || center_index as usize >= len {
            g.y = UniformAxis { center: self.y.value(start), center_index: 0, step: self.y.step, len };
        }
        g
    }
}

/// Range-frequency scale factor `δ_r = sinφ_ref / (sinφ cosθ)` of a pulse.
pub fn range_scale(sin_ref: f64, geo: &FlightGeometry, pulse: usize) -> f64 {
    sin_ref / (geo.incidence[pulse].sin() * geo.azimuth[pulse].cos())
}
