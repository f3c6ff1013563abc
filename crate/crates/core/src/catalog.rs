//! The 72 trajectory-level statistical variables and per-node subspaces.
//!
//! Catalog order is fixed and defines [`FeatureVector`] indexing:
//! 19 speed statistics, 19 acceleration statistics, 19 angle statistics
//! (each in [`Statistic::ALL`] order), then the 15 distance-geometry
//! signatures ordered by `(k, j)`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::signature::{distance_geometry_signatures, SignatureIndex, SIGNATURE_COUNT};
use crate::stats::{summarize_series, Statistic};
use crate::taxonomy::TaxonomyNode;
use crate::trajectory::{FeatureSeries, Trajectory};
use crate::{Error, Result};

pub const STATS_PER_BASE: usize = 19;
pub const CATALOG_LEN: usize = 3 * STATS_PER_BASE + SIGNATURE_COUNT;

const SPEED: Range<usize> = 0..19;
const ACCELERATION: Range<usize> = 19..38;
const ANGLES: Range<usize> = 38..57;
const DISTANCE_GEOMETRY: Range<usize> = 57..72;

/// The point-feature family a variable summarizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    Speed,
    Acceleration,
    Angles,
    DistanceGeometry,
}

impl Base {
    pub fn prefix(self) -> &'static str {
        match self {
            Base::Speed => "speed",
            Base::Acceleration => "acceleration",
            Base::Angles => "angles",
            Base::DistanceGeometry => "distance_geometry",
        }
    }

    /// The per-point series the variable is computed from, if it has one.
    pub fn series(self, features: &FeatureSeries) -> Option<&[f64]> {
        match self {
            Base::Speed => Some(&features.speed),
            Base::Acceleration => Some(&features.acceleration),
            Base::Angles => Some(&features.angle),
            Base::DistanceGeometry => None,
        }
    }

    fn offset(self) -> usize {
        match self {
            Base::Speed => SPEED.start,
            Base::Acceleration => ACCELERATION.start,
            Base::Angles => ANGLES.start,
            Base::DistanceGeometry => DISTANCE_GEOMETRY.start,
        }
    }
}

/// One catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    Stat(Base, Statistic),
    Signature(SignatureIndex),
}

impl Variable {
    pub fn base(self) -> Base {
        match self {
            Variable::Stat(b, _) => b,
            Variable::Signature(_) => Base::DistanceGeometry,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Variable::Stat(b, s) => b.offset() + s.index(),
            Variable::Signature(sig) => DISTANCE_GEOMETRY.start + sig.ordinal(),
        }
    }

    pub fn from_index(index: usize) -> Option<Variable> {
        VariableCatalog::entries().nth(index)
    }

    pub fn name(self) -> String {
        match self {
            Variable::Stat(b, s) => format!("{}_{}", b.prefix(), s.name()),
            Variable::Signature(sig) => sig.name(),
        }
    }

    /// Parses a catalog column name such as `speed_kurt` or `distance_geometry_5_4`.
    pub fn parse(name: &str) -> Result<Variable> {
        if let Some(sig) = SignatureIndex::parse(name) {
            return Ok(Variable::Signature(sig));
        }
        for base in [Base::Speed, Base::Acceleration, Base::Angles] {
            if let Some(stat) = name
                .strip_prefix(base.prefix())
                .and_then(|rest| rest.strip_prefix('_'))
                .and_then(Statistic::from_name)
            {
                return Ok(Variable::Stat(base, stat));
            }
        }
        Err(Error::UnknownVariable(name.to_string()))
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Variable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Variable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        Variable::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// The ordered list of all 72 variables.
pub struct VariableCatalog;

impl VariableCatalog {
    pub fn entries() -> impl Iterator<Item = Variable> + Clone {
        [Base::Speed, Base::Acceleration, Base::Angles]
            .into_iter()
            .flat_map(|b| Statistic::ALL.into_iter().map(move |s| Variable::Stat(b, s)))
            .chain(SignatureIndex::all().map(Variable::Signature))
    }

    pub fn names() -> Vec<String> {
        Self::entries().map(Variable::name).collect()
    }

    pub fn len() -> usize {
        CATALOG_LEN
    }
}

/// Indices into a [`FeatureVector`] describing one taxonomy node, ascending.
pub fn node_subspace(node: TaxonomyNode) -> Vec<usize> {
    match node {
        TaxonomyNode::Speed => SPEED,
        TaxonomyNode::Acceleration => ACCELERATION,
        TaxonomyNode::Indentation => ANGLES,
        TaxonomyNode::Curvature => DISTANCE_GEOMETRY,
        TaxonomyNode::Kinematic => SPEED.start..ACCELERATION.end,
        TaxonomyNode::Geometric => ANGLES.start..DISTANCE_GEOMETRY.end,
    }
    .collect()
}

/// The 72 statistical variables of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub trajectory_id: String,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(trajectory_id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != CATALOG_LEN {
            return Err(Error::DimensionMismatch { expected: CATALOG_LEN, got: values.len() });
        }
        Ok(Self { trajectory_id: trajectory_id.into(), values })
    }

    pub fn get(&self, var: Variable) -> f64 {
        self.values[var.index()]
    }
}

/// Summarizes a trajectory into its 72-value feature vector.
pub fn vectorize_trajectory(traj: &Trajectory) -> Result<FeatureVector> {
    let features = traj.features_or_compute()?;
    let mut values = Vec::with_capacity(CATALOG_LEN);
    for base in [Base::Speed, Base::Acceleration, Base::Angles] {
        let series = base.series(&features).expect("point-feature base");
        values.extend_from_slice(&summarize_series(series)?.to_array());
    }
    values.extend_from_slice(&distance_geometry_signatures(&traj.points));
    FeatureVector::new(traj.id.clone(), values)
}
