//! Two-stage knowledge-aided 2-D autofocus and the two ablation baselines.
//!
//! Stage 1 estimates residual RCM on range-compressed data and maps it to the
//! full surface; stage 2 estimates the remaining APE by PGA on a coarse-range
//! image and maps that too. Every compensation happens on the spectrum.

use crate::error::{invalid, Error, Result};
use crate::estimate::{coarse_range_preprocess, estimate_ape_pga, estimate_rcm, EstimateDiagnostics, EstimatorConfig};
use crate::io::metrics::image_entropy;
use crate::pfa::{form_image, range_compress, CartesianSpectrum, ComplexImage, Taper};
use crate::sim::apply_surface;
use crate::structure::{
    ape_to_surface_with, detrend_plane, rcm_to_ape, truncated_surface, APEProfile, EdgePolicy, PhaseErrorSurface,
    RCMProfile,
};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Ka,
    #[serde(rename = "1d")]
    OneD,
    Prior2d,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ka" => Ok(Mode::Ka),
            "1d" => Ok(Mode::OneD),
            "prior2d" => Ok(Mode::Prior2d),
            other => Err(Error::Config(format!("unknown autofocus mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Ka => "ka",
            Mode::OneD => "1d",
            Mode::Prior2d => "prior2d",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub coarse_rcm_stage: bool,
    pub fine_ape_stage: bool,
    pub outer_iterations: usize,
    /// Range coarsening used ahead of PGA in the APE stage.
    pub coarse_factor: usize,
    pub edge: EdgePolicy,
    pub estimators: EstimatorConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Ka,
            coarse_rcm_stage: true,
            fine_ape_stage: true,
            outer_iterations: 1,
            coarse_factor: 8,
            edge: EdgePolicy::Extend { fraction: 0.05 },
            estimators: EstimatorConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_iterations < 1 {
            return invalid("outer_iterations must be at least 1");
        }
        if self.coarse_factor < 1 {
            return invalid("coarse_factor must be at least 1");
        }
        self.estimators.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageKind {
    CoarseRcm,
    FineApe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: StageKind,
    pub pass: usize,
    /// Estimated 1-D profile: metres for RCM, radians for APE.
    pub profile: Vec<f64>,
    pub surface_rms: f64,
    pub surface_peak_to_peak: f64,
    pub masked_cells: usize,
    pub entropy_before: f64,
    pub entropy_after: f64,
    /// Residual migration measured before this stage's compensation, cells.
    pub residual_rcm_cells: Option<f64>,
    #[serde(skip_serializing, default)]
    pub runtime_s: f64,
    pub diagnostics: EstimateDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub mode: Mode,
    pub stages: Vec<StageReport>,
    pub entropy_input: f64,
    pub entropy_output: f64,
    /// Migration measured on the output, cells.
    pub residual_rcm_cells: f64,
    pub low_confidence: bool,
    #[serde(skip_serializing, default)]
    pub runtime_s: f64,
}

impl PipelineReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "mode: {}\nentropy_input: {:.6}\nentropy_output: {:.6}\nresidual_rcm_cells: {:.4}\nlow_confidence: {}\nruntime_s: {:.3}\n",
            self.mode, self.entropy_input, self.entropy_output, self.residual_rcm_cells, self.low_confidence, self.runtime_s
        );
        for st in &self.stages {
            s.push_str(&format!(
                "stage {:?} pass {}: entropy {:.6} -> {:.6}, surface rms {:.4} rad, p2p {:.4} rad, masked {}, residual_rcm {}, {:.3} s{}\n",
                st.stage,
                st.pass,
                st.entropy_before,
                st.entropy_after,
                st.surface_rms,
                st.surface_peak_to_peak,
                st.masked_cells,
                st.residual_rcm_cells.map_or("-".into(), |v| format!("{v:.4} cells")),
                st.runtime_s,
                if st.diagnostics.low_confidence { " [low confidence]" } else { "" },
            ));
        }
        s
    }
}

/// Multiplies by `exp{−jΦe}` on the surface's valid cells.
pub fn compensate_surface(spec: &CartesianSpectrum, surface: &PhaseErrorSurface) -> Result<CartesianSpectrum> {
    apply_surface(spec, surface, -1.0)
}

fn entropy_of(spec: &CartesianSpectrum) -> f64 {
    image_entropy(&form_image(spec, Taper::None)).unwrap_or(0.0)
}

/// Residual migration of a spectrum in range cells.
pub fn measure_residual_rcm(spec: &CartesianSpectrum, est: &EstimatorConfig) -> Result<f64> {
    let (_, d) = estimate_rcm(&range_compress(spec), est)?;
    Ok(d.migration_cells.unwrap_or(0.0))
}

fn surface_stats(s: &PhaseErrorSurface) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (v, ok) in s.values.iter().zip(s.valid.iter()) {
        if *ok {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    (s.rms(), if hi >= lo { hi - lo } else { 0.0 })
}

/// RCM-driven surface for the selected mode.
fn rcm_stage_surface(phi1: &RCMProfile, spec: &CartesianSpectrum, cfg: &PipelineConfig) -> Result<PhaseErrorSurface> {
    let grid = &spec.grid;
    let psi = rcm_to_ape(phi1, grid.y0)?;
    let s = match cfg.mode {
        Mode::Ka => ape_to_surface_with(&psi, grid, cfg.edge)?,
        Mode::Prior2d => truncated_surface(&psi, Some(phi1), grid)?,
        Mode::OneD => unreachable!("1-D mode has no RCM stage"),
    };
    Ok(detrend_plane(&s).0)
}

fn ape_stage_surface(phi0: &APEProfile, spec: &CartesianSpectrum, cfg: &PipelineConfig) -> Result<PhaseErrorSurface> {
    let grid = &spec.grid;
    match cfg.mode {
        Mode::Ka => ape_to_surface_with(phi0, grid, cfg.edge),
        Mode::Prior2d => {
            let phi1 = crate::structure::ape_to_rcm(phi0, grid.y0)?;
            truncated_surface(phi0, Some(&phi1), grid)
        }
        Mode::OneD => truncated_surface(phi0, None, grid),
    }
}

fn run(spec: &CartesianSpectrum, cfg: &PipelineConfig) -> Result<(ComplexImage, PipelineReport)> {
    cfg.validate()?;
    let t0 = Instant::now();
    let est = &cfg.estimators;
    let mut cur = spec.clone();
    let entropy_input = entropy_of(&cur);
    let mut stages = Vec::new();
    let rcm_enabled = cfg.coarse_rcm_stage && cfg.mode != Mode::OneD;
    for pass in 0..cfg.outer_iterations {
        if rcm_enabled {
            let ts = Instant::now();
            let before = entropy_of(&cur);
            let (phi1, diag) = estimate_rcm(&range_compress(&cur), est)?;
            let surface = rcm_stage_surface(&phi1, &cur, cfg)?;
            cur = compensate_surface(&cur, &surface)?;
            let (rms, pp) = surface_stats(&surface);
            stages.push(StageReport {
                stage: StageKind::CoarseRcm,
                pass,
                profile: phi1.values,
                surface_rms: rms,
                surface_peak_to_peak: pp,
                masked_cells: surface.masked_count(),
                entropy_before: before,
                entropy_after: entropy_of(&cur),
                residual_rcm_cells: diag.migration_cells,
                runtime_s: ts.elapsed().as_secs_f64(),
                diagnostics: diag,
            });
        }
        if cfg.fine_ape_stage {
            let ts = Instant::now();
            let before = entropy_of(&cur);
            let factor = if cfg.mode == Mode::OneD { 1 } else { cfg.coarse_factor };
            let coarse = coarse_range_preprocess(&cur, factor)?;
            let (phi0, diag) = estimate_ape_pga(&coarse, est)?;
            let surface = ape_stage_surface(&phi0, &cur, cfg)?;
            cur = compensate_surface(&cur, &surface)?;
            let (rms, pp) = surface_stats(&surface);
            stages.push(StageReport {
                stage: StageKind::FineApe,
                pass,
                profile: phi0.values,
                surface_rms: rms,
                surface_peak_to_peak: pp,
                masked_cells: surface.masked_count(),
                entropy_before: before,
                entropy_after: entropy_of(&cur),
                residual_rcm_cells: None,
                runtime_s: ts.elapsed().as_secs_f64(),
                diagnostics: diag,
            });
        }
    }
    let img = form_image(&cur, Taper::None);
    let entropy_output = image_entropy(&img).unwrap_or(0.0);
    let residual_rcm_cells = measure_residual_rcm(&cur, est)?;
    let low_confidence = stages.iter().any(|s| s.diagnostics.low_confidence);
    let report = PipelineReport {
        mode: cfg.mode,
        stages,
        entropy_input,
        entropy_output,
        residual_rcm_cells,
        low_confidence,
        runtime_s: t0.elapsed().as_secs_f64(),
    };
    Ok((img, report))
}

/// Knowledge-aided two-stage autofocus.
pub fn ka_autofocus(spec: &CartesianSpectrum, cfg: &PipelineConfig) -> Result<(ComplexImage, PipelineReport)> {
    run(spec, &PipelineConfig { mode: Mode::Ka, ..*cfg })
}

/// PGA on the full-resolution image, applied as an `X`-only phase.
pub fn baseline_1d(spec: &CartesianSpectrum, cfg: &PipelineConfig) -> Result<(ComplexImage, PipelineReport)> {
    run(spec, &PipelineConfig { mode: Mode::OneD, ..*cfg })
}

/// Same two stages with the surface truncated to `φ0 + φ1(Y − Y0)`.
pub fn baseline_prior2d(spec: &CartesianSpectrum, cfg: &PipelineConfig) -> Result<(ComplexImage, PipelineReport)> {
    run(spec, &PipelineConfig { mode: Mode::Prior2d, ..*cfg })
}

pub fn autofocus(spec: &CartesianSpectrum, cfg: &PipelineConfig) -> Result<(ComplexImage, PipelineReport)> {
    run(spec, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfa::CartesianGrid;
    use num_complex::Complex64;

    fn spec(n: usize) -> CartesianSpectrum {
        let y0 = 4.0 * std::f64::consts::PI * 10e9 / crate::sim::SPEED_OF_LIGHT;
        let g = CartesianGrid::synthetic(
            10e9,
            1.0,
            crate::sim::SPEED_OF_LIGHT,
            n,
            24.0 / n as f64,
            n,
            0.06 * y0 / n as f64,
        );
        let d = g.pixel_x();
        let targets: Vec<(f64, f64, Complex64)> = (0..5)
            .map(|k| ((k as f64 * 9.0 - 20.0) * d, (k as f64 * 13.0 - 25.0) * g.pixel_y(), Complex64::new(1.0, 0.0)))
            .collect();
        CartesianSpectrum::point_targets(&g, &targets)
    }

    #[test]
    fn zero_surface_is_identity() {
        let s = spec(64);
        let out = compensate_surface(&s, &PhaseErrorSurface::zeros(&s.grid)).unwrap();
        assert_eq!(out.data, s.data);
    }

    #[test]
    fn inject_then_compensate_restores() {
        let s = spec(64);
        let surf = PhaseErrorSurface::from_fn(&s.grid, |x, y| 0.3 * x * x + 1e-3 * y + (x * 3.0).sin());
        let back = compensate_surface(&crate::sim::inject_spectrum_error(&s, &surf).unwrap(), &surf).unwrap();
        for (a, b) in back.data.iter().zip(s.data.iter()) {
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let s = spec(64);
        let other = spec(32);
        assert!(matches!(compensate_surface(&s, &PhaseErrorSurface::zeros(&other.grid)), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn both_stages_disabled_returns_plain_image() {
        let s = spec(64);
        let cfg = PipelineConfig { coarse_rcm_stage: false, fine_ape_stage: false, ..Default::default() };
        let (img, rep) = ka_autofocus(&s, &cfg).unwrap();
        assert_eq!(img.data, form_image(&s, Taper::None).data);
        assert!(rep.stages.is_empty());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("prior2d".parse::<Mode>().unwrap(), Mode::Prior2d);
        assert_eq!("1d".parse::<Mode>().unwrap(), Mode::OneD);
        assert!("2d".parse::<Mode>().is_err());
    }
}
