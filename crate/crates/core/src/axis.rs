use serde::{Deserialize, Serialize};

/// Uniformly sampled axis. Sample `center_index` carries exactly `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformAxis {
    pub center: f64,
    pub center_index: usize,
    pub step: f64,
    pub len: usize,
}

impl UniformAxis {
    /// Axis of `len` samples with sample `len / 2` at `center`.
    pub fn centered(center: f64, step: f64, len: usize) -> Self {
        Self { center, center_index: len / 2, step, len }
    }

    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        self.center + (k as f64 - self.center_index as f64) * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.value(k)).collect()
    }

    pub fn first(&self) -> f64 {
        self.value(0)
    }

    pub fn last(&self) -> f64 {
        self.value(self.len.saturating_sub(1))
    }

    /// `len · step`, the span that sets the conjugate-domain sample spacing.
    pub fn span(&self) -> f64 {
        self.len as f64 * self.step
    }

    /// Fractional sample index of `v` (may fall outside `[0, len-1]`).
    #[inline]
    pub fn position(&self, v: f64) -> f64 {
        (v - self.center) / self.step + self.center_index as f64
    }

    /// Same sampling within a relative tolerance.
    pub fn matches(&self, other: &UniformAxis, rel: f64) -> bool {
        let scale = self.step.abs().max(other.step.abs());
        self.len == other.len
            && (self.step - other.step).abs() <= rel * scale
            && (self.first() - other.first()).abs() <= rel * scale.max(self.first().abs())
    }
}
