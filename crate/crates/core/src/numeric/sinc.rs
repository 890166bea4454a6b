//! Kaiser-windowed truncated-sinc interpolation from a tabulated kernel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SincConfig {
    /// Kernel support in input samples (even).
    pub taps: usize,
    /// Table entries per input sample.
    pub oversample: usize,
    /// Kaiser window shape.
    pub kaiser_beta: f64,
}

impl Default for SincConfig {
    fn default() -> Self {
        Self { taps: 16, oversample: 16, kaiser_beta: 6.0 }
    }
}

#[derive(Debug, Clone)]
pub struct SincKernel {
    cfg: SincConfig,
    half: usize,
    table: Vec<f64>,
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

impl SincKernel {
    pub fn new(cfg: SincConfig) -> Self {
        let taps = cfg.taps.max(2) & !1;
        let cfg = SincConfig { taps, oversample: cfg.oversample.max(1), ..cfg };
        let half = taps / 2;
        let n = half * cfg.oversample;
        let norm = bessel_i0(cfg.kaiser_beta);
        // table over offsets 0..=half (kernel is even); one guard entry
        let table = (0..=n + 1)
            .map(|i| {
                let x = i as f64 / cfg.oversample as f64;
                if x >= half as f64 {
                    return 0.0;
                }
                let r = x / half as f64;
                let w = bessel_i0(cfg.kaiser_beta * (1.0 - r * r).max(0.0).sqrt()) / norm;
                sinc(x) * w
            })
            .collect();
        Self { cfg, half, table }
    }

    pub fn config(&self) -> SincConfig {
        self.cfg
    }

    /// Half support in samples.
    pub fn half_width(&self) -> usize {
        self.half
    }

    fn weight(&self, offset: f64) -> f64 {
        let d = offset.abs() * self.cfg.oversample as f64;
        let i = d.floor() as usize;
        if i + 1 >= self.table.len() {
            return 0.0;
        }
        let f = d - i as f64;
        self.table[i] * (1.0 - f) + self.table[i + 1] * f
    }

    /// Interpolates `samples` at fractional index `pos`. Taps falling outside the
    /// sample range are dropped. Returns `None` when `pos` lies outside `[0, n-1]`.
    pub fn interpolate(&self, samples: &[Complex64], pos: f64) -> Option<Complex64> {
        let n = samples.len();
        if n == 0 || !pos.is_finite() || pos < 0.0 || pos > (n - 1) as f64 {
            return None;
        }
        let base = pos.floor() as isize;
        let frac = pos - base as f64;
        if frac == 0.0 {
            return Some(samples[base as usize]);
        }
        let half = self.half as isize;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut wsum = 0.0;
        for k in (base - half + 1)..=(base + half) {
            let w = self.weight(pos - k as f64);
            wsum += w;
            if k >= 0 && (k as usize) < n {
                acc += samples[k as usize] * w;
            }
        }
        Some(if wsum != 0.0 { acc / wsum } else { acc })
    }
}
