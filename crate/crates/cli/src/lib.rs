//! Config-driven pipeline around the `topmix` library: caching, run
//! manifests and report artifacts.

pub mod cache;
pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{ExperimentConfig, KSelection, KnnSection, MaxscaleSpec, SymmetryVectorSpec};
pub use error::{PipelineError, Stage};
pub use pipeline::{run_classify, run_diagrams, run_distances, run_inspect, ClassifyRun, Outcome, Pipeline};
