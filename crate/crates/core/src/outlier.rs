//! Distance-based outlier scores per taxonomy node and decision-boundary zones.
//!
//! For one node the trajectories' subspace vectors are min–max normalized per
//! column, the radius is the mean Euclidean distance over all unordered pairs,
//! and the raw score of a vector is one minus the fraction of the other
//! vectors lying within that radius. Raw scores are then replaced by their
//! average-rank uniform quantiles `(rank - 0.5) / n` and min–max rescaled so
//! the axis spans exactly `[0, 1]`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{node_subspace, FeatureVector};
use crate::matrix::Matrix;
use crate::taxonomy::{valid_combinations, Combination, TaxonomyNode};
use crate::{Error, Result};

/// Options for the scoring pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DbosOptions {
    /// Min–max normalize each subspace column before measuring distances.
    pub normalize_features: bool,
    /// Estimate the radius from this many random pairs instead of all pairs.
    pub radius_sample_pairs: Option<usize>,
    /// Seed for the sampled radius estimator.
    pub seed: u64,
}

impl Default for DbosOptions {
    fn default() -> Self {
        Self { normalize_features: true, radius_sample_pairs: None, seed: 42 }
    }
}

fn need_two(m: &Matrix) -> Result<()> {
    if m.rows() < 2 {
        return Err(Error::TooFewInstances { needed: 2, got: m.rows() });
    }
    Ok(())
}

/// Mean Euclidean distance over all `n(n-1)/2` unordered pairs.
pub fn pairwise_radius(m: &Matrix) -> Result<f64> {
    need_two(m)?;
    let n = m.rows();
    let mut sum = 0.0;
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in i + 1..n {
            row_sum += m.distance(i, j);
        }
        sum += row_sum;
    }
    Ok(sum / (n * (n - 1) / 2) as f64)
}

/// Radius estimated from `pairs` uniformly drawn unordered pairs.
pub fn sampled_radius(m: &Matrix, pairs: usize, seed: u64) -> Result<f64> {
    need_two(m)?;
    if pairs == 0 {
        return Err(Error::InvalidConfig("radius_sample_pairs must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m.rows();
    let mut sum = 0.0;
    for _ in 0..pairs {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        sum += m.distance(i, j);
    }
    Ok(sum / pairs as f64)
}

/// Number of other rows within distance `r` of each row.
pub fn neighbor_counts(m: &Matrix, r: f64) -> Result<Vec<usize>> {
    need_two(m)?;
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    let n = m.rows();
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if m.distance(i, j) <= r {
                counts[i] += 1;
                counts[j] += 1;
            }
        }
    }
    Ok(counts)
}

fn raw_from_counts(counts: &[usize]) -> Vec<f64> {
    let others = (counts.len() - 1) as f64;
    counts.iter().map(|&c| 1.0 - c as f64 / others).collect()
}

/// `1 - (neighbors within r) / (n - 1)` for every row.
///
/// A zero radius (all rows identical) counts every other row as a neighbor.
pub fn dbos_raw(m: &Matrix, r: f64) -> Result<Vec<f64>> {
    need_two(m)?;
    if r == 0.0 {
        return Ok(vec![0.0; m.rows()]);
    }
    Ok(raw_from_counts(&neighbor_counts(m, r)?))
}

/// Average ranks (1-based) of `values`, ties sharing the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Uniform quantile transform followed by min–max rescaling to `[0, 1]`.
///
/// The quantile `(rank - 0.5) / n` is affine in the rank, so the min–max step
/// is evaluated on ranks directly; extremes land on exactly 0 and 1.
pub fn scale_scores(raw: &[f64]) -> Vec<f64> {
    if raw.is_empty() {
        return Vec::new();
    }
    let ranks = average_ranks(raw);
    let lo = ranks.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ranks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return vec![0.0; raw.len()];
    }
    ranks.iter().map(|r| (r - lo) / (hi - lo)).collect()
}

/// Scores of every trajectory for one taxonomy node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeScores {
    pub node: TaxonomyNode,
    pub radius: f64,
    pub neighbor_counts: Vec<usize>,
    pub raw: Vec<f64>,
    pub scores: Vec<f64>,
}

/// Runs normalize → radius → raw score → scaling on one node subspace.
/// `scores[i]` belongs to `vectors[i]`.
pub fn score_node(vectors: &[FeatureVector], node: TaxonomyNode, opts: &DbosOptions) -> Result<NodeScores> {
    let mut m = Matrix::from_subspace(vectors, &node_subspace(node));
    need_two(&m)?;
    if opts.normalize_features {
        m.min_max_columns();
    }
    let radius = match opts.radius_sample_pairs {
        Some(p) => sampled_radius(&m, p, opts.seed)?,
        None => pairwise_radius(&m)?,
    };
    let neighbor_counts = if radius > 0.0 {
        neighbor_counts(&m, radius)?
    } else {
        vec![m.rows() - 1; m.rows()]
    };
    let raw = raw_from_counts(&neighbor_counts);
    let scores = scale_scores(&raw);
    Ok(NodeScores { node, radius, neighbor_counts, raw, scores })
}

/// Node scores for all six taxonomy nodes over one set of vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub trajectory_ids: Vec<String>,
    pub nodes: BTreeMap<TaxonomyNode, NodeScores>,
}

impl ScoreTable {
    pub fn compute(vectors: &[FeatureVector], opts: &DbosOptions) -> Result<Self> {
        let mut nodes = BTreeMap::new();
        for node in TaxonomyNode::ALL {
            nodes.insert(node, score_node(vectors, node, opts)?);
        }
        Ok(Self { trajectory_ids: vectors.iter().map(|v| v.trajectory_id.clone()).collect(), nodes })
    }

    pub fn node(&self, node: TaxonomyNode) -> &NodeScores {
        &self.nodes[&node]
    }

    pub fn zoned(&self, combo: Combination) -> Vec<ZonedScore> {
        zone_scores(&self.trajectory_ids, combo, self.node(combo.x_node()), self.node(combo.y_node()))
    }
}

/// Decision-boundary zone of a score pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Zone {
    /// Neither axis stands out.
    Zero = 0,
    /// The y-axis behavior dominates.
    One = 1,
    /// The x-axis behavior dominates.
    Two = 2,
    /// Hybrid of both axes.
    Three = 3,
}

impl Zone {
    pub const ALL: [Zone; 4] = [Zone::Zero, Zone::One, Zone::Two, Zone::Three];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: u8) -> Result<Zone> {
        Zone::ALL.get(i as usize).copied().ok_or(Error::InvalidZone(i))
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

impl Serialize for Zone {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.serialize_u8(*self as u8)
    }
}

impl<'de> Deserialize<'de> for Zone {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        Zone::from_index(u8::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

/// Zone of a point in the unit score square.
///
/// Inequalities are strict and evaluated in order; everything not captured
/// by zones 0–2, including points on the 0.5 boundaries, is zone 3.
pub fn assign_zone(x: f64, y: f64) -> Result<Zone> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::ScoreOutOfRange { x, y });
    }
    Ok(if x < 0.5 && y < 0.5 {
        Zone::Zero
    } else if y > 0.5 && x < y - 0.5 {
        Zone::One
    } else if x > 0.5 && y < x - 0.5 {
        Zone::Two
    } else {
        Zone::Three
    })
}

/// A trajectory placed on the scatter plot of one combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonedScore {
    pub trajectory_id: String,
    pub combination: Combination,
    pub x: f64,
    pub y: f64,
    pub zone: Zone,
}

/// Pairs two node score lists (aligned with `ids`) into zoned scores.
pub fn zone_scores(ids: &[String], combo: Combination, x: &NodeScores, y: &NodeScores) -> Vec<ZonedScore> {
    ids.iter()
        .zip(x.scores.iter().zip(&y.scores))
        .map(|(id, (&x, &y))| ZonedScore {
            trajectory_id: id.clone(),
            combination: combo,
            x,
            y,
            zone: assign_zone(x, y).expect("scaled scores lie in [0, 1]"),
        })
        .collect()
}

/// Both axis scores and the zone of every trajectory for `combo`.
pub fn score_combination(vectors: &[FeatureVector], combo: Combination, opts: &DbosOptions) -> Result<Vec<ZonedScore>> {
    let x = score_node(vectors, combo.x_node(), opts)?;
    let y = score_node(vectors, combo.y_node(), opts)?;
    let ids: Vec<String> = vectors.iter().map(|v| v.trajectory_id.clone()).collect();
    Ok(zone_scores(&ids, combo, &x, &y))
}

/// Zone counts of one combination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub combination: Combination,
    pub counts: [usize; 4],
}

/// Trajectory counts for all seven combinations × four zones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyMatrix {
    pub rows: Vec<FrequencyRow>,
}

impl FrequencyMatrix {
    pub fn from_table(table: &ScoreTable) -> Self {
        let rows = valid_combinations()
            .into_iter()
            .map(|combination| {
                let mut counts = [0usize; 4];
                for z in table.zoned(combination) {
                    counts[z.zone.index()] += 1;
                }
                FrequencyRow { combination, counts }
            })
            .collect();
        Self { rows }
    }

    pub fn row(&self, combo: Combination) -> &FrequencyRow {
        &self.rows[combo.ordinal()]
    }
}

/// Zone counts for every valid combination, rows in [`valid_combinations`] order.
pub fn frequency_heatmap(vectors: &[FeatureVector], opts: &DbosOptions) -> Result<FrequencyMatrix> {
    Ok(FrequencyMatrix::from_table(&ScoreTable::compute(vectors, opts)?))
}
