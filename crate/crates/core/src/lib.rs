//! Topological classification of mixed numeric/categorical records.
//!
//! Each record is one-hot encoded, standardized and shifted by a fixed
//! symmetry-breaking vector, then expanded into the point cloud made of the
//! record and its coordinate-hyperplane projections. Records are compared
//! through the Wasserstein distance between the dimension-0 Rips persistence
//! diagrams of their clouds and classified by k-nearest neighbours.
//!
//! ```
//! use topmix::pointcloud::{build_point_cloud, pairwise_distances};
//! use topmix::persistence::rips_dim0_diagram;
//! use topmix::metric::wasserstein;
//!
//! let x = rips_dim0_diagram(&pairwise_distances(&build_point_cloud(&[6.0, 8.0], 0)?), 20.0)?;
//! let y = rips_dim0_diagram(&pairwise_distances(&build_point_cloud(&[7.0, 7.0], 1)?), 20.0)?;
//! assert!(wasserstein(&x, &y, 1.0)? > 0.0);
//! # Ok::<(), topmix::Error>(())
//! ```

pub mod assignment;
pub mod error;
pub mod evaluation;
pub mod ingestion;
pub mod knn;
pub mod metric;
pub mod persistence;
pub mod pointcloud;
pub mod preprocessing;
pub mod union_find;

pub use error::{Error, Result};
pub use evaluation::{
    best_k, compute_metrics, evaluate_kfold, evaluate_kfold_nested, evaluate_split, hold_out_split, kfold_assignment,
    render_k_table, select_k_kfold, Confusion, EvaluationReport, HoldOutReport, HoldOutSplit, KScore, Metrics,
    Prediction, SplitMode, SplitSpec,
};
pub use ingestion::{binarize_target, parse_dataset, Label, ParseOptions, RawDataset, SchemaSpec};
pub use knn::{knn_predict, ranked_neighbors, vote, KnnConfig};
pub use metric::{bottleneck, distance_matrix, wasserstein, DistanceMatrix};
pub use persistence::{choose_maxscale, rips_dim0_diagram, PersistenceDiagram, PersistencePair};
pub use pointcloud::{build_point_cloud, pairwise_distances, project, PairwiseDistances, PointCloud};
pub use preprocessing::{
    default_symmetry_vector, fit_standardizer, one_hot_encode, standardize, symmetry_break, FeatureMatrix, FitScope,
    StandardizationParams, SymmetryVector,
};
