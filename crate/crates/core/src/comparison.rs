//! Zone-vs-zone importance reports and trajectory sample windows.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::catalog::{node_subspace, FeatureVector, Variable};
use crate::forest::{pick, stratified_split, EvalMetrics, Forest, ForestConfig};
use crate::matrix::Matrix;
use crate::outlier::{score_combination, DbosOptions, Zone, ZonedScore};
use crate::signature::{distance_geometry_signatures, SignatureIndex};
use crate::stats::summarize_series;
use crate::taxonomy::Combination;
use crate::trajectory::{FeatureSeries, Trajectory};
use crate::{Error, Result};

/// One bar of an importance column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedVariable {
    pub variable: String,
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub combination: Combination,
    pub zone_a: Zone,
    pub zone_b: Zone,
    /// Trajectories labeled 0 (zone a) and 1 (zone b).
    pub members: [usize; 2],
    pub train_size: usize,
    pub metrics: EvalMetrics,
    /// False when the forest made no informative split; all importances are then 0.
    pub importance_defined: bool,
    /// Variables of the x-axis node, most important first.
    pub column_x: Vec<RankedVariable>,
    /// Variables of the y-axis node, most important first.
    pub column_y: Vec<RankedVariable>,
}

impl ComparisonReport {
    /// Highest-ranked variable across both columns.
    pub fn top_variable(&self) -> Option<&RankedVariable> {
        let x = self.column_x.first();
        let y = self.column_y.first();
        match (x, y) {
            (Some(a), Some(b)) => Some(if b.importance > a.importance { b } else { a }),
            (a, b) => a.or(b),
        }
    }
}

/// Scores `combo`, then compares two of its zones with the sequential forest.
pub fn compare_zones(
    vectors: &[FeatureVector],
    combo: Combination,
    zone_a: Zone,
    zone_b: Zone,
    dbos: &DbosOptions,
    forest: &ForestConfig,
) -> Result<ComparisonReport> {
    let zoned = score_combination(vectors, combo, dbos)?;
    compare_zoned(vectors, &zoned, combo, zone_a, zone_b, forest, Forest::fit)
}

/// Compares two zones given precomputed zoned scores aligned with `vectors`.
///
/// Zone `a` is labeled 0 and zone `b` 1. The forest is trained on the union
/// of both nodes' subspaces using a stratified split, and its importances are
/// split into one column per node.
pub fn compare_zoned<F>(
    vectors: &[FeatureVector],
    zoned: &[ZonedScore],
    combo: Combination,
    zone_a: Zone,
    zone_b: Zone,
    config: &ForestConfig,
    fit: F,
) -> Result<ComparisonReport>
where
    F: Fn(&Matrix, &[u8], &ForestConfig) -> Result<Forest>,
{
    if zone_a == zone_b {
        return Err(Error::IdenticalZones(zone_a as u8));
    }
    if zoned.len() != vectors.len() {
        return Err(Error::DimensionMismatch { expected: vectors.len(), got: zoned.len() });
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, z) in zoned.iter().enumerate() {
        if z.zone == zone_a {
            rows.push(i);
            labels.push(0u8);
        } else if z.zone == zone_b {
            rows.push(i);
            labels.push(1u8);
        }
    }
    let members = [0u8, 1].map(|c| labels.iter().filter(|&&l| l == c).count());
    for (zone, count) in [(zone_a, members[0]), (zone_b, members[1])] {
        if count < 2 {
            return Err(Error::InsufficientZoneMembers { zone: zone as u8, count });
        }
    }

    let x_cols = node_subspace(combo.x_node());
    let y_cols = node_subspace(combo.y_node());
    let mut features: Vec<usize> = x_cols.iter().chain(&y_cols).copied().collect();
    features.sort_unstable();
    features.dedup();

    let selected: Vec<FeatureVector> = rows.iter().map(|&i| vectors[i].clone()).collect();
    let x = Matrix::from_subspace(&selected, &features);

    let split = stratified_split(&labels, config.test_fraction, config.seed)?;
    let forest = fit(&x.select_rows(&split.train), &pick(&labels, &split.train), config)?;
    let metrics = forest.evaluate(&x.select_rows(&split.test), &pick(&labels, &split.test))?;
    let importance = forest.gini_importance();

    let column = |cols: &[usize]| {
        let mut out: Vec<RankedVariable> = features
            .iter()
            .zip(&importance.values)
            .filter(|(f, _)| cols.contains(f))
            .map(|(&f, &importance)| RankedVariable {
                variable: Variable::from_index(f).expect("catalog index").name(),
                importance,
            })
            .collect();
        out.sort_by(|a, b| b.importance.total_cmp(&a.importance));
        out
    };

    Ok(ComparisonReport {
        combination: combo,
        zone_a,
        zone_b,
        members,
        train_size: split.train.len(),
        metrics,
        importance_defined: importance.any_split,
        column_x: column(&x_cols),
        column_y: column(&y_cols),
    })
}

/// Index of the point whose base-series value is closest to the variable's
/// statistic over the whole trajectory; lowest index on ties.
pub fn variable_anchor(traj: &Trajectory, variable: Variable) -> Result<usize> {
    let Variable::Stat(base, stat) = variable else {
        return Err(Error::SignatureVariable(variable.name()));
    };
    let features = traj.features_or_compute()?;
    let series = base.series(&features).expect("statistic bases have a series");
    let target = summarize_series(series)?.get(stat);
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, v) in series.iter().enumerate() {
        let d = (v - target).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// Points around a statistic anchor.
    Anchored,
    /// One part of a distance-geometry split.
    SignatureSegment,
}

/// A contiguous excerpt of a trajectory with its point features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleWindow {
    pub trajectory_id: String,
    pub variable: String,
    pub kind: WindowKind,
    /// Anchor point index; `None` for signature segments.
    pub anchor: Option<usize>,
    /// The variable's value for the whole trajectory.
    pub statistic: f64,
    /// First point index of the window.
    pub start: usize,
    /// One past the last point index.
    pub end: usize,
    pub points: Vec<crate::geo::TrajectoryPoint>,
    pub features: FeatureSeries,
}

impl SampleWindow {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// The feature series the UI colors this window by.
    pub fn color_series(&self) -> &[f64] {
        match Variable::parse(&self.variable) {
            Ok(v) => v.base().series(&self.features).unwrap_or(&self.features.distance),
            Err(_) => &self.features.distance,
        }
    }
}

/// Window of `before` points before and `after` points after the anchor, clamped.
pub fn window_bounds(anchor: usize, len: usize, before: usize, after: usize) -> (usize, usize) {
    (anchor.saturating_sub(before), (anchor + after + 1).min(len))
}

/// The 10-point window (5 before, anchor, 4 after) for a variable, or the
/// signature segment when the variable is a distance-geometry signature.
pub fn extract_sample(traj: &Trajectory, variable: Variable) -> Result<SampleWindow> {
    extract_sample_with(traj, variable, 5, 4)
}

pub fn extract_sample_with(traj: &Trajectory, variable: Variable, before: usize, after: usize) -> Result<SampleWindow> {
    let (base, stat) = match variable {
        Variable::Signature(sig) => return segment_for_signature(traj, sig),
        Variable::Stat(base, stat) => (base, stat),
    };
    let features = traj.features_or_compute()?;
    let series = base.series(&features).expect("statistic bases have a series");
    let statistic = summarize_series(series)?.get(stat);
    let anchor = variable_anchor(traj, variable)?;
    let (start, end) = window_bounds(anchor, traj.len(), before, after);
    Ok(SampleWindow {
        trajectory_id: traj.id.clone(),
        variable: variable.name(),
        kind: WindowKind::Anchored,
        anchor: Some(anchor),
        statistic,
        start,
        end,
        points: traj.points[start..end].to_vec(),
        features: features.slice(start..end),
    })
}

/// The `j`-th of `k` parts, using the partition the signatures are computed on.
pub fn segment_for_signature(traj: &Trajectory, signature: SignatureIndex) -> Result<SampleWindow> {
    let features = traj.features_or_compute()?;
    let range = signature.part_range(traj.len());
    let statistic = distance_geometry_signatures(&traj.points)[signature.ordinal()];
    Ok(SampleWindow {
        trajectory_id: traj.id.clone(),
        variable: signature.name(),
        kind: WindowKind::SignatureSegment,
        anchor: None,
        statistic,
        start: range.start,
        end: range.end,
        points: traj.points[range.clone()].to_vec(),
        features: features.slice(range),
    })
}

/// Shared color range of two windows shown side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorScale {
    pub min: f64,
    pub max: f64,
}

pub fn shared_color_scale(a: &SampleWindow, b: &SampleWindow) -> Option<ColorScale> {
    let mut it = a.color_series().iter().chain(b.color_series()).copied();
    let first = it.next()?;
    let (min, max) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Some(ColorScale { min, max })
}

/// Two windows of the same variable with their shared color scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePair {
    pub variable: String,
    pub windows: [SampleWindow; 2],
    pub color_scale: Option<ColorScale>,
}

/// Samples each trajectory independently, anchoring on its own statistic.
pub fn sample_pair(a: &Trajectory, b: &Trajectory, variable: Variable, before: usize, after: usize) -> Result<SamplePair> {
    let wa = extract_sample_with(a, variable, before, after)?;
    let wb = extract_sample_with(b, variable, before, after)?;
    let color_scale = shared_color_scale(&wa, &wb);
    Ok(SamplePair { variable: variable.name(), windows: [wa, wb], color_scale })
}
