//! Parallel drivers around the core analytics, shared by the CLI and service.

use rayon::prelude::*;
use taxotrack_core::comparison::{compare_zoned, ComparisonReport};
use taxotrack_core::forest::{grid_search, TrainingSet, TuneCandidate, TuneReport};
use taxotrack_core::outlier::{score_node, zone_scores, NodeScores, ScoreTable};
use taxotrack_core::{
    vectorize_trajectory, Combination, Dataset, DbosOptions, FeatureVector, Forest, ForestConfig, FrequencyMatrix,
    Matrix, TaxonomyNode, Zone, ZonedScore,
};

use crate::error::AppResult;

/// Feature vectors in dataset (id) order.
pub fn vectorize(dataset: &Dataset) -> AppResult<Vec<FeatureVector>> {
    Ok(dataset.trajectories().par_iter().map(vectorize_trajectory).collect::<Result<_, _>>()?)
}

/// Trees are grown in parallel; each owns its random stream, so the result
/// equals [`Forest::fit`].
pub fn fit_forest(x: &Matrix, y: &[u8], config: &ForestConfig) -> taxotrack_core::Result<Forest> {
    let set = TrainingSet::new(x, y, config)?;
    let trees = (0..config.n_trees).into_par_iter().map(|t| set.grow_tree(t)).collect();
    Ok(Forest::from_trees(&set, trees))
}

pub fn score_table(vectors: &[FeatureVector], dbos: &DbosOptions) -> AppResult<ScoreTable> {
    let nodes = TaxonomyNode::ALL
        .par_iter()
        .map(|&n| score_node(vectors, n, dbos).map(|s| (n, s)))
        .collect::<Result<_, _>>()?;
    Ok(ScoreTable { trajectory_ids: ids(vectors), nodes })
}

pub fn ids(vectors: &[FeatureVector]) -> Vec<String> {
    vectors.iter().map(|v| v.trajectory_id.clone()).collect()
}

pub fn score_combination(vectors: &[FeatureVector], combo: Combination, dbos: &DbosOptions) -> AppResult<Vec<ZonedScore>> {
    let (x, y) = rayon::join(
        || score_node(vectors, combo.x_node(), dbos),
        || score_node(vectors, combo.y_node(), dbos),
    );
    Ok(zoned(vectors, combo, &x?, &y?))
}

pub fn zoned(vectors: &[FeatureVector], combo: Combination, x: &NodeScores, y: &NodeScores) -> Vec<ZonedScore> {
    zone_scores(&ids(vectors), combo, x, y)
}

pub fn heatmap(vectors: &[FeatureVector], dbos: &DbosOptions) -> AppResult<FrequencyMatrix> {
    Ok(FrequencyMatrix::from_table(&score_table(vectors, dbos)?))
}

pub fn compare(
    vectors: &[FeatureVector],
    zoned: &[ZonedScore],
    combo: Combination,
    zones: (Zone, Zone),
    forest: &ForestConfig,
) -> AppResult<ComparisonReport> {
    Ok(compare_zoned(vectors, zoned, combo, zones.0, zones.1, forest, fit_forest)?)
}

/// Cross-validated grid search on the two zones' members (labels as in [`compare`]).
pub fn tune(
    vectors: &[FeatureVector],
    zoned: &[ZonedScore],
    combo: Combination,
    zones: (Zone, Zone),
    base: &ForestConfig,
    grid: &[TuneCandidate],
    folds: usize,
) -> AppResult<TuneReport> {
    if zones.0 == zones.1 {
        return Err(taxotrack_core::Error::IdenticalZones(zones.0 as u8).into());
    }
    for z in [zones.0, zones.1] {
        let count = zoned.iter().filter(|s| s.zone == z).count();
        if count < 2 {
            return Err(taxotrack_core::Error::InsufficientZoneMembers { zone: z as u8, count }.into());
        }
    }
    let mut features: Vec<usize> = taxotrack_core::catalog::node_subspace(combo.x_node());
    features.extend(taxotrack_core::catalog::node_subspace(combo.y_node()));
    features.sort_unstable();
    features.dedup();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (v, z) in vectors.iter().zip(zoned) {
        if z.zone == zones.0 || z.zone == zones.1 {
            rows.push(v.clone());
            labels.push(u8::from(z.zone == zones.1));
        }
    }
    let x = Matrix::from_subspace(&rows, &features);
    Ok(grid_search(&x, &labels, base, grid, folds, fit_forest)?)
}
