//! Numerical building blocks shared by the imaging and autofocus modules.

pub mod diff;
pub mod fft;
pub mod fit;
pub mod sinc;
pub mod spline;

pub use fft::{centered_fft, centered_fft2, centered_fft_axis, Direction};
pub use sinc::{SincConfig, SincKernel};
pub use spline::{CubicSpline, MonotoneCubic};
