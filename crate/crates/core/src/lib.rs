//! Analytics core for taxonomy-driven trajectory exploration.
//!
//! Trajectories are turned into 72 statistical variables, scored per taxonomy
//! node with a distance-based outlier score, placed into one of four
//! decision-boundary zones for a pair of nodes, and zone-vs-zone differences
//! are explained with random-forest impurity importance.
//!
//! The crate is `no_std` and only needs `alloc`. Parsing, persistence, the
//! CLI and the HTTP service live in the `taxotrack` companion crate.

#![cfg_attr(not(test), no_std)]
// `!(a < b)` is used on purpose so NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod catalog;
pub mod comparison;
mod error;
pub mod forest;
pub mod geo;
mod math;
pub mod matrix;
pub mod outlier;
pub mod signature;
pub mod stats;
pub mod taxonomy;
pub mod trajectory;

pub use catalog::{vectorize_trajectory, Base, FeatureVector, Variable, VariableCatalog, CATALOG_LEN};
pub use comparison::{compare_zones, extract_sample, segment_for_signature, variable_anchor, ComparisonReport, SampleWindow};
pub use error::{CombinationRejection, Error, Result};
pub use forest::{EvalMetrics, Forest, ForestConfig, ImportanceVector};
pub use matrix::Matrix;
pub use geo::{haversine_distance, initial_bearing, TrajectoryPoint, EARTH_RADIUS_M};
pub use outlier::{assign_zone, frequency_heatmap, score_combination, DbosOptions, FrequencyMatrix, Zone, ZonedScore};
pub use signature::SignatureIndex;
pub use stats::{summarize_series, SeriesSummary, Statistic};
pub use taxonomy::{valid_combinations, validate_combination, Combination, TaxonomyNode};
pub use trajectory::{compute_point_features, Dataset, DatasetBuilder, FeatureSeries, IngestionReport, Trajectory};
