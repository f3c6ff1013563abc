//! The fixed movement taxonomy and its seven legal node combinations.

use core::fmt;
use core::str::FromStr;

use alloc::string::{String, ToString};
use serde::{Deserialize, Serialize};

use crate::{CombinationRejection, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaxonomyNode {
    Geometric,
    Kinematic,
    Speed,
    Acceleration,
    Curvature,
    Indentation,
}

impl TaxonomyNode {
    pub const ALL: [TaxonomyNode; 6] = [
        TaxonomyNode::Geometric,
        TaxonomyNode::Kinematic,
        TaxonomyNode::Speed,
        TaxonomyNode::Acceleration,
        TaxonomyNode::Curvature,
        TaxonomyNode::Indentation,
    ];

    pub fn parent(self) -> Option<TaxonomyNode> {
        match self {
            TaxonomyNode::Speed | TaxonomyNode::Acceleration => Some(TaxonomyNode::Kinematic),
            TaxonomyNode::Curvature | TaxonomyNode::Indentation => Some(TaxonomyNode::Geometric),
            TaxonomyNode::Geometric | TaxonomyNode::Kinematic => None,
        }
    }

    pub fn children(self) -> Option<[TaxonomyNode; 2]> {
        match self {
            TaxonomyNode::Kinematic => Some([TaxonomyNode::Speed, TaxonomyNode::Acceleration]),
            TaxonomyNode::Geometric => Some([TaxonomyNode::Curvature, TaxonomyNode::Indentation]),
            _ => None,
        }
    }

    pub fn is_root(self) -> bool {
        self.parent().is_none()
    }

    /// The root this node belongs to (itself for roots).
    pub fn family(self) -> TaxonomyNode {
        self.parent().unwrap_or(self)
    }

    pub fn name(self) -> &'static str {
        match self {
            TaxonomyNode::Geometric => "geometric",
            TaxonomyNode::Kinematic => "kinematic",
            TaxonomyNode::Speed => "speed",
            TaxonomyNode::Acceleration => "acceleration",
            TaxonomyNode::Curvature => "curvature",
            TaxonomyNode::Indentation => "indentation",
        }
    }
}

impl fmt::Display for TaxonomyNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaxonomyNode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        TaxonomyNode::ALL
            .into_iter()
            .find(|n| n.name() == lower)
            .ok_or_else(|| Error::UnknownNode(s.to_string()))
    }
}

/// A legal pair of taxonomy nodes with its scatter-plot axis assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Combination {
    x_node: TaxonomyNode,
    y_node: TaxonomyNode,
}

impl Combination {
    pub fn x_node(self) -> TaxonomyNode {
        self.x_node
    }

    pub fn y_node(self) -> TaxonomyNode {
        self.y_node
    }

    /// Lowercase hyphenated name with the nodes in alphabetical order,
    /// e.g. `curvature-indentation`.
    pub fn name(self) -> String {
        let (a, b) = if self.x_node.name() <= self.y_node.name() {
            (self.x_node, self.y_node)
        } else {
            (self.y_node, self.x_node)
        };
        let mut s = String::from(a.name());
        s.push('-');
        s.push_str(b.name());
        s
    }

    /// Position of this combination in [`valid_combinations`].
    pub fn ordinal(self) -> usize {
        VALID
            .iter()
            .position(|&(a, b)| validate_combination(a, b).ok() == Some(self))
            .expect("a constructed combination is always valid")
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Combination {
    type Err = Error;

    /// Accepts `a-b` in either order, case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| Error::UnknownCombination(s.to_string()))?;
        validate_combination(a.parse()?, b.parse()?)
    }
}

impl Serialize for Combination {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Combination {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

use TaxonomyNode::*;

const VALID: [(TaxonomyNode, TaxonomyNode); 7] = [
    (Geometric, Kinematic),
    (Acceleration, Speed),
    (Curvature, Indentation),
    (Curvature, Speed),
    (Indentation, Speed),
    (Acceleration, Curvature),
    (Acceleration, Indentation),
];

/// The seven legal combinations, in heatmap row order.
pub fn valid_combinations() -> [Combination; 7] {
    VALID.map(|(a, b)| validate_combination(a, b).expect("table entries are valid"))
}

/// Checks a pair of nodes and assigns axes.
///
/// Two roots or two subdivisions may be combined. When the nodes come from
/// different families the Geometric-family node is plotted on y; within a
/// family the alphabetically first node goes on x.
pub fn validate_combination(a: TaxonomyNode, b: TaxonomyNode) -> Result<Combination> {
    let reject = |reason| Err(Error::InvalidCombination { a, b, reason });
    if a == b {
        return reject(CombinationRejection::SameNode);
    }
    if a.parent() == Some(b) || b.parent() == Some(a) {
        return reject(CombinationRejection::ParentChild);
    }
    if a.is_root() != b.is_root() {
        return reject(CombinationRejection::MixedLevels);
    }
    let (x_node, y_node) = if a.family() != b.family() {
        if a.family() == Geometric {
            (b, a)
        } else {
            (a, b)
        }
    } else if a.name() < b.name() {
        (a, b)
    } else {
        (b, a)
    };
    Ok(Combination { x_node, y_node })
}
