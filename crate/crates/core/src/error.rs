use alloc::string::String;
use core::fmt;

use crate::taxonomy::TaxonomyNode;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Why a pair of taxonomy nodes cannot be combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinationRejection {
    SameNode,
    ParentChild,
    /// A root paired with a child of the other root.
    MixedLevels,
}

impl fmt::Display for CombinationRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CombinationRejection::SameNode => "a node cannot be combined with itself",
            CombinationRejection::ParentChild => {
                "a parent and its own subdivision cannot be combined"
            }
            CombinationRejection::MixedLevels => {
                "a top-level group can only be combined with the other top-level group"
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("coordinate out of range (lat {lat}, lon {lon})")]
    CoordinateOutOfRange { lat: f64, lon: f64 },
    #[error("timestamp is not finite")]
    InvalidTimestamp,
    #[error("trajectory `{0}` has fewer than 2 points after cleaning")]
    TooFewPoints(String),
    #[error("trajectory `{id}` has a non-positive time delta at index {index}")]
    NonIncreasingTime { id: String, index: usize },
    #[error("duplicate trajectory id `{0}`")]
    DuplicateId(String),
    #[error("no valid rows")]
    NoValidRows,
    #[error("unknown trajectory `{0}`")]
    UnknownTrajectory(String),
    #[error("invalid combination {a}-{b}: {reason}")]
    InvalidCombination {
        a: TaxonomyNode,
        b: TaxonomyNode,
        reason: CombinationRejection,
    },
    #[error("unknown taxonomy node `{0}`")]
    UnknownNode(String),
    #[error("unknown combination `{0}`")]
    UnknownCombination(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is a distance-geometry signature and has no point anchor")]
    SignatureVariable(String),
    #[error("need at least {needed} instances, got {got}")]
    TooFewInstances { needed: usize, got: usize },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("score pair ({x}, {y}) is outside the unit square")]
    ScoreOutOfRange { x: f64, y: f64 },
    #[error("zone {0} is not in 0..=3")]
    InvalidZone(u8),
    #[error("cannot compare zone {0} with itself")]
    IdenticalZones(u8),
    #[error("insufficient members for stratified split: class {class} has {count}")]
    InsufficientMembers { class: usize, count: usize },
    #[error("zone {zone} has {count} trajectories, need at least 2")]
    InsufficientZoneMembers { zone: u8, count: usize },
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("empty input")]
    EmptyInput,
}
