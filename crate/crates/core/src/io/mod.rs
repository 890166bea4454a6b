//! Dataset files, configuration, focus metrics and graymap export.

pub mod config;
pub mod dataset;
pub mod metrics;
pub mod pgm;

pub use config::Config;
pub use dataset::{read_dataset, read_header, write_dataset, DatasetHeader, Kind, Matrix, Provenance};
pub use metrics::{focus_metrics, image_contrast, image_entropy, point_response_metrics, FocusMetrics, PointResponse};
pub use pgm::{export_magnitude, read_pgm};
