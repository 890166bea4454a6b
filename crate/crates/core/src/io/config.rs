//! TOML run configuration. Every field has a default; unknown keys are rejected.

use crate::error::{Error, Result};
use crate::numeric::SincConfig;
use crate::pfa::{PfaConfig, Taper};
use crate::pipeline::PipelineConfig;
use crate::sim::{
    add_noise, make_error_profile, make_linear_geometry, synth_phase_history, ErrorSpec, FlightGeometry, PhaseHistory,
    PointTarget, RadarParams, RangeErrorProfile, TargetScene,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarConfig {
    pub center_frequency: f64,
    pub bandwidth: f64,
    pub range_freq_samples: usize,
    pub pulse_count: usize,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self { center_frequency: 10e9, bandwidth: 600e6, range_freq_samples: 1024, pulse_count: 10240 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// m/s
    pub velocity: f64,
    /// m; zero puts the track in the ground plane (`sinφ_ref = 1`)
    pub altitude: f64,
    /// Scene-center slant range at aperture center, m.
    pub slant_range: f64,
    pub squint_deg: f64,
    /// Flown path length, m.
    pub aperture_length: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { velocity: 120.0, altitude: 0.0, slant_range: 8000.0, squint_deg: 10.0, aperture_length: 480.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetConfig {
    pub x: f64,
    pub y: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self { x: 0.0, y: 0.0, amplitude: 1.0, phase: 0.0 }
    }
}

/// Rectangular target grid plus optional extra targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub rows: usize,
    pub cols: usize,
    pub dx: f64,
    pub dy: f64,
    pub stagger: f64,
    pub extra: Vec<TargetConfig>,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self { rows: 3, cols: 3, dx: 60.0, dy: 50.0, stagger: 15.0, extra: vec![] }
    }
}

impl SceneConfig {
    pub fn build(&self) -> Result<TargetScene> {
        let mut scene = TargetScene::grid(self.rows, self.cols, self.dx, self.dy, self.stagger);
        scene.targets.extend(self.extra.iter().map(|t| PointTarget {
            x: t.x,
            y: t.y,
            amplitude: Complex64::from_polar(t.amplitude, t.phase),
        }));
        scene.validate()?;
        Ok(scene)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Per-sample SNR after range compression, dB. Absent means noise-free.
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormationConfig {
    pub nx: usize,
    pub ny: usize,
    pub interpolator: SincConfig,
    pub taper: Taper,
}

impl Default for FormationConfig {
    fn default() -> Self {
        let p = PfaConfig::default();
        Self { nx: p.nx, ny: p.ny, interpolator: p.interpolator, taper: Taper::None }
    }
}

impl FormationConfig {
    pub fn pfa_config(&self) -> PfaConfig {
        PfaConfig { nx: self.nx, ny: self.ny, interpolator: self.interpolator }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub targets: usize,
    /// Peak neighbourhood half-width, pixels.
    pub radius: usize,
    pub upsample: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { targets: 9, radius: 16, upsample: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dynamic_range_db: f64,
    pub metrics: MetricsConfig,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dynamic_range_db: 50.0, metrics: MetricsConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub radar: RadarConfig,
    pub geometry: GeometryConfig,
    pub scene: SceneConfig,
    pub error: ErrorSpec,
    pub noise: NoiseConfig,
    pub pfa: FormationConfig,
    pub autofocus: PipelineConfig,
    pub output: OutputConfig,
}

/// Quadratic range error giving six times the defocus-necessity coefficient
/// on the default geometry.
pub const CANONICAL_QUADRATIC: f64 = 3.18;

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            radar: RadarConfig::default(),
            geometry: GeometryConfig::default(),
            scene: SceneConfig::default(),
            error: ErrorSpec::Quadratic { coeff: CANONICAL_QUADRATIC },
            noise: NoiseConfig::default(),
            pfa: FormationConfig::default(),
            autofocus: PipelineConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.pfa.nx < 2 || self.pfa.ny < 2 {
            return bad("pfa grid needs at least two samples per axis");
        }
        if let Some(s) = self.noise.snr_db {
            if !s.is_finite() {
                return bad("snr_db must be finite");
            }
        }
        if !(self.output.dynamic_range_db > 0.0) {
            return bad("dynamic_range_db must be positive");
        }
        self.autofocus.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Replaces the run seed and any seed carried by the error model.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let ErrorSpec::RandomWalk { seed: s, .. } = &mut self.error {
            *s = seed;
        }
        self
    }

    pub fn radar_params(&self) -> Result<RadarParams> {
        let r = &self.radar;
        RadarParams::new(r.center_frequency, r.bandwidth, r.range_freq_samples, r.pulse_count)
    }

    pub fn flight_geometry(&self) -> Result<FlightGeometry> {
        let g = &self.geometry;
        make_linear_geometry(
            &self.radar_params()?,
            g.velocity,
            g.altitude,
            g.slant_range,
            g.squint_deg.to_radians(),
            g.aperture_length,
            self.radar.pulse_count,
        )
    }

    pub fn error_profile(&self, geometry: &FlightGeometry) -> Result<RangeErrorProfile> {
        make_error_profile(&self.error, &geometry.slow_time)
    }

    /// Noise deviation per phase-history sample for unit-amplitude targets.
    pub fn noise_sigma(&self) -> Option<f64> {
        self.noise.snr_db.map(|snr| (self.radar.range_freq_samples as f64 / 10f64.powf(snr / 10.0)).sqrt())
    }

    /// Phase history for this configuration, optionally without the range error.
    pub fn simulate_with(&self, with_error: bool) -> Result<PhaseHistory> {
        let radar = self.radar_params()?;
        let geometry = self.flight_geometry()?;
        let err =
            if with_error { self.error_profile(&geometry)? } else { RangeErrorProfile::zero(geometry.pulse_count()) };
        let mut ph = synth_phase_history(&self.scene.build()?, &geometry, &radar, &err)?;
        if let Some(sigma) = self.noise_sigma() {
            add_noise(&mut ph.data, sigma, self.seed);
        }
        Ok(ph)
    }

    pub fn simulate(&self) -> Result<PhaseHistory> {
        self.simulate_with(true)
    }
}
