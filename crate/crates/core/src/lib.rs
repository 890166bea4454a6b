//! Spotlight SAR toolkit: squint-mode phase-history simulation, polar-format
//! image formation, and knowledge-aided 2-D autofocus that maps a 1-D error
//! estimate onto the full spatial-frequency phase-error surface.

// `!(v > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axis;
pub mod error;
pub mod estimate;
pub mod io;
pub mod numeric;
pub mod pfa;
pub mod pipeline;
pub mod sim;
pub mod structure;

pub use error::{Error, Result};
