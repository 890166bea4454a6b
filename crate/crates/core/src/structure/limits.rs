use super::{ape_to_rcm, check_axis, APEProfile};
use crate::error::{invalid, Result};
use crate::numeric::diff::second_derivative;
use crate::pfa::CartesianGrid;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

/// Autofocus class needed for a given error level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "1-D")]
    OneD,
    #[serde(rename = "2-D")]
    TwoD,
    #[serde(rename = "accurate-2-D")]
    Accurate2D,
}

impl Region {
    /// From the three limit checks (`true` = violated).
    pub fn from_violations(ape: bool, rcm: bool, defocus: bool) -> Self {
        if defocus {
            Region::Accurate2D
        } else if rcm {
            Region::TwoD
        } else if ape {
            Region::OneD
        } else {
            Region::None
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::None => "none",
            Region::OneD => "1-D",
            Region::TwoD => "2-D",
            Region::Accurate2D => "accurate-2-D",
        })
    }
}

/// Largest quadratic coefficients `a` (in `φ0 = aX²`) each limit tolerates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NecessityLimits {
    pub a_ape: f64,
    pub a_rcm: f64,
    pub a_defocus: f64,
}

impl NecessityLimits {
    pub fn classify(&self, a: f64) -> Region {
        let a = a.abs();
        Region::from_violations(a > self.a_ape, a > self.a_rcm, a > self.a_defocus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub rho_x: f64,
    pub rho_y: f64,
    pub y0: f64,
    pub limits: NecessityLimits,
    pub coefficient: f64,
    pub region: Region,
}

/// Thresholds for `ρx`, `ρy` and `Y0`, and the region of coefficient `a`.
pub fn necessity_limits(rho_x: f64, rho_y: f64, y0: f64, a: f64) -> Result<LimitReport> {
    if !(rho_x > 0.0 && rho_y > 0.0 && y0 > 0.0) || !a.is_finite() {
        return invalid("resolutions and Y0 must be positive");
    }
    let limits = NecessityLimits {
        a_ape: rho_x * rho_x / (4.0 * PI),
        a_rcm: y0 * rho_x * rho_x * rho_y / (2.0 * PI * PI),
        a_defocus: y0 * y0 * rho_x * rho_x * rho_y * rho_y / (4.0 * PI.powi(3)),
    };
    Ok(LimitReport { rho_x, rho_y, y0, limits, coefficient: a, region: limits.classify(a) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    Ape,
    Rcm,
    Defocus,
}

/// Resolution `ρ = ρx = ρy` at which coefficient `a` sits exactly on a limit.
pub fn resolution_boundary(kind: LimitKind, a: f64, y0: f64) -> Result<f64> {
    if !(a > 0.0 && y0 > 0.0) {
        return invalid("coefficient and Y0 must be positive");
    }
    Ok(match kind {
        LimitKind::Ape => (4.0 * PI * a).sqrt(),
        LimitKind::Rcm => (2.0 * PI * PI * a / y0).cbrt(),
        LimitKind::Defocus => (4.0 * PI.powi(3) * a / (y0 * y0)).powf(0.25),
    })
}

/// Peak-to-peak levels of the three Taylor terms of an arbitrary APE over
/// the grid's band, compared with `π/4`, `ρy/2` and `π/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileLimits {
    pub ape_pp: f64,
    pub rcm_pp: f64,
    pub defocus_pp: f64,
    pub rho_y: f64,
    pub region: Region,
}

pub fn classify_profile(phi0: &APEProfile, grid: &CartesianGrid) -> Result<ProfileLimits> {
    check_axis(&phi0.x, grid)?;
    if phi0.values.len() < 6 {
        return invalid("profile needs at least six samples");
    }
    let y0 = grid.y0;
    let dy_max = (grid.y.first() - y0).abs().max((grid.y.last() - y0).abs());
    let rho_y = PI / dy_max;
    let pp = |v: &[f64]| {
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    };
    let phi1 = ape_to_rcm(phi0, y0)?;
    let d2 = second_derivative(&phi0.values, phi0.x.step);
    let xs = phi0.x.values();
    // φ2·(Y−Y0)² spans [0, φ2·dy_max²] per X; extremes come from the φ2 extremes
    let phi2: Vec<f64> = xs.iter().zip(&d2).map(|(x, d)| x * x * d / (2.0 * y0 * y0)).collect();
    let hi = phi2.iter().cloned().fold(0.0f64, f64::max);
    let lo = phi2.iter().cloned().fold(0.0f64, f64::min);
    let defocus_pp = (hi - lo) * dy_max * dy_max;
    let ape_pp = pp(&phi0.values);
    let rcm_pp = pp(&phi1.values);
    let region = Region::from_violations(ape_pp > FRAC_PI_4, rcm_pp > rho_y / 2.0, defocus_pp > FRAC_PI_4);
    Ok(ProfileLimits { ape_pp, rcm_pp, defocus_pp, rho_y, region })
}
