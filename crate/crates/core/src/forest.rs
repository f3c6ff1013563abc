//! Binary random-forest classifier with class-weighted Gini impurity.
//!
//! Each tree is a CART grown on a bootstrap resample. Sample weights are the
//! bootstrap multiplicity times the balanced class weight `n / (2 n_c)`,
//! computed once from the full training labels. Split search visits a random
//! permutation of the features and stops after `max_features` of them once a
//! valid split exists. Thresholds are midpoints between adjacent distinct
//! values; equal impurity decreases keep the lower feature index and the
//! lower threshold.
//!
//! Every tree owns a ChaCha8 stream `(seed, tree index)`, so trees can be
//! grown in any order or in parallel with identical results.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::math;
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Number of candidate features per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `floor(sqrt(m))`, at least 1.
    Sqrt,
    All,
    Fixed(usize),
}

impl MaxFeatures {
    pub fn resolve(self, m: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => math::floor(math::sqrt(m as f64)) as usize,
            MaxFeatures::All => m,
            MaxFeatures::Fixed(k) => k,
        };
        k.clamp(1, m.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeight {
    Balanced,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub class_weight: ClassWeight,
    pub seed: u64,
    pub test_fraction: f64,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 10,
            class_weight: ClassWeight::Balanced,
            seed: 42,
            test_fraction: 0.2,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            bootstrap: true,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be at least 1"));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidConfig("max_depth must be at least 1"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidConfig("test_fraction must be in (0, 1)"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidConfig("min_samples_leaf must be at least 1"));
        }
        if let MaxFeatures::Fixed(0) = self.max_features {
            return Err(Error::InvalidConfig("max_features must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    /// Class-weighted proportions of the two classes.
    Leaf { proba: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    /// Unnormalized weighted impurity decrease per feature.
    importance: Vec<f64>,
    depth: usize,
}

impl Tree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn split_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Split { .. })).count()
    }

    pub fn predict_proba(&self, row: &[f64]) -> [f64; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
                TreeNode::Leaf { proba } => return *proba,
            }
        }
    }
}

/// Validated training data with precomputed class weights.
#[derive(Debug, Clone)]
pub struct TrainingSet<'a> {
    x: &'a Matrix,
    y: &'a [u8],
    class_weight: [f64; 2],
    config: ForestConfig,
}

impl<'a> TrainingSet<'a> {
    pub fn new(x: &'a Matrix, y: &'a [u8], config: &ForestConfig) -> Result<Self> {
        config.validate()?;
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.rows(), got: y.len() });
        }
        if x.cols() == 0 {
            return Err(Error::EmptyInput);
        }
        if y.iter().any(|&c| c > 1) {
            return Err(Error::InvalidConfig("labels must be 0 or 1"));
        }
        if x.rows() < 2 {
            return Err(Error::TooFewInstances { needed: 2, got: x.rows() });
        }
        let n1 = y.iter().filter(|&&c| c == 1).count();
        let counts = [y.len() - n1, n1];
        if counts.contains(&0) {
            return Err(Error::SingleClass);
        }
        let n = y.len() as f64;
        let class_weight = match config.class_weight {
            ClassWeight::Balanced => counts.map(|c| n / (2.0 * c as f64)),
            ClassWeight::Uniform => [1.0, 1.0],
        };
        Ok(Self { x, y, class_weight, config: config.clone() })
    }

    pub fn class_weight(&self) -> [f64; 2] {
        self.class_weight
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    /// Grows tree number `tree_index` from its own random stream.
    pub fn grow_tree(&self, tree_index: usize) -> Tree {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(tree_index as u64);
        let n = self.x.rows();
        let mut multiplicity = vec![0u32; n];
        if self.config.bootstrap {
            for _ in 0..n {
                multiplicity[rng.random_range(0..n)] += 1;
            }
        } else {
            multiplicity.iter_mut().for_each(|c| *c = 1);
        }
        let weight: Vec<f64> = (0..n)
            .map(|i| multiplicity[i] as f64 * self.class_weight[self.y[i] as usize])
            .collect();
        let rows: Vec<usize> = (0..n).filter(|&i| multiplicity[i] > 0).collect();
        let mut grower = Grower {
            set: self,
            multiplicity,
            weight,
            max_features: self.config.max_features.resolve(self.x.cols()),
            rng,
            nodes: Vec::new(),
            importance: vec![0.0; self.x.cols()],
            depth: 0,
            scratch: Vec::with_capacity(rows.len()),
        };
        grower.build(rows, 0);
        Tree { nodes: grower.nodes, importance: grower.importance, depth: grower.depth }
    }
}

fn gini(w: [f64; 2]) -> f64 {
    let total = w[0] + w[1];
    if total <= 0.0 {
        return 0.0;
    }
    let (p0, p1) = (w[0] / total, w[1] / total);
    1.0 - p0 * p0 - p1 * p1
}

struct Candidate {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

struct Grower<'s, 'a> {
    set: &'s TrainingSet<'a>,
    multiplicity: Vec<u32>,
    weight: Vec<f64>,
    max_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<TreeNode>,
    importance: Vec<f64>,
    depth: usize,
    scratch: Vec<(f64, usize)>,
}

impl Grower<'_, '_> {
    fn class_totals(&self, rows: &[usize]) -> ([f64; 2], usize) {
        let mut w = [0.0; 2];
        let mut count = 0usize;
        for &r in rows {
            w[self.set.y[r] as usize] += self.weight[r];
            count += self.multiplicity[r] as usize;
        }
        (w, count)
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        self.depth = self.depth.max(depth);
        let (w, count) = self.class_totals(&rows);
        let total = w[0] + w[1];
        let id = self.nodes.len();
        let leaf = TreeNode::Leaf { proba: [w[0] / total, w[1] / total] };
        let min_leaf = self.set.config.min_samples_leaf;
        if depth >= self.set.config.max_depth || w[0] == 0.0 || w[1] == 0.0 || count < 2 * min_leaf {
            self.nodes.push(leaf);
            return id;
        }
        let Some(best) = self.best_split(&rows, w, count) else {
            self.nodes.push(leaf);
            return id;
        };
        self.importance[best.feature] += best.decrease.max(0.0);
        let (left, right): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.set.x.get(r, best.feature) <= best.threshold);
        self.nodes.push(TreeNode::Split { feature: best.feature, threshold: best.threshold, left: 0, right: 0 });
        let l = self.build(left, depth + 1);
        let r = self.build(right, depth + 1);
        if let TreeNode::Split { left, right, .. } = &mut self.nodes[id] {
            *left = l;
            *right = r;
        }
        id
    }

    fn best_split(&mut self, rows: &[usize], w: [f64; 2], count: usize) -> Option<Candidate> {
        let m = self.set.x.cols();
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut self.rng);
        let parent = (w[0] + w[1]) * gini(w);
        let mut best: Option<Candidate> = None;
        for (visited, &feature) in order.iter().enumerate() {
            if visited >= self.max_features && best.is_some() {
                break;
            }
            let Some(c) = self.best_threshold(rows, feature, w, count, parent) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some(b) => c.decrease > b.decrease || (c.decrease == b.decrease && c.feature < b.feature),
            };
            if better {
                best = Some(c);
            }
        }
        best
    }

    fn best_threshold(&mut self, rows: &[usize], feature: usize, w: [f64; 2], count: usize, parent: f64) -> Option<Candidate> {
        let x = self.set.x;
        self.scratch.clear();
        self.scratch.extend(rows.iter().map(|&r| (x.get(r, feature), r)));
        self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let min_leaf = self.set.config.min_samples_leaf;
        let mut left_w = [0.0; 2];
        let mut left_count = 0usize;
        let mut best: Option<Candidate> = None;
        for k in 0..self.scratch.len() - 1 {
            let (v, r) = self.scratch[k];
            left_w[self.set.y[r] as usize] += self.weight[r];
            left_count += self.multiplicity[r] as usize;
            let next = self.scratch[k + 1].0;
            if !(v < next) {
                continue;
            }
            if left_count < min_leaf || count - left_count < min_leaf {
                continue;
            }
            let right_w = [w[0] - left_w[0], w[1] - left_w[1]];
            let decrease = parent
                - (left_w[0] + left_w[1]) * gini(left_w)
                - (right_w[0] + right_w[1]) * gini(right_w);
            if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next {
                    threshold = v;
                }
                best = Some(Candidate { feature, threshold, decrease });
            }
        }
        best
    }
}

/// Normalized mean impurity decrease per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    pub values: Vec<f64>,
    /// False when no tree made a split with positive decrease; `values` is then all zero.
    pub any_split: bool,
}

impl ImportanceVector {
    /// Feature index with the largest importance, lowest index on ties.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|b| v > self.values[b]) {
                best = Some(i);
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
    n_features: usize,
    config: ForestConfig,
}

impl Forest {
    /// Grows all trees sequentially.
    pub fn fit(x: &Matrix, y: &[u8], config: &ForestConfig) -> Result<Forest> {
        let set = TrainingSet::new(x, y, config)?;
        let trees = (0..config.n_trees).map(|t| set.grow_tree(t)).collect();
        Ok(Forest::from_trees(&set, trees))
    }

    /// Assembles trees grown elsewhere (for example on a thread pool).
    /// `trees[i]` must come from `set.grow_tree(i)`.
    pub fn from_trees(set: &TrainingSet<'_>, trees: Vec<Tree>) -> Forest {
        Forest { trees, n_features: set.x.cols(), config: set.config.clone() }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    /// Mean of the trees' class-weighted leaf proportions.
    pub fn predict_proba(&self, row: &[f64]) -> [f64; 2] {
        let mut acc = [0.0; 2];
        for t in &self.trees {
            let p = t.predict_proba(row);
            acc[0] += p[0];
            acc[1] += p[1];
        }
        let n = self.trees.len() as f64;
        [acc[0] / n, acc[1] / n]
    }

    /// Class 1 only when its averaged vote is strictly larger.
    pub fn predict(&self, row: &[f64]) -> u8 {
        let p = self.predict_proba(row);
        u8::from(p[1] > p[0])
    }

    pub fn predict_all(&self, x: &Matrix) -> Vec<u8> {
        (0..x.rows()).map(|i| self.predict(x.row(i))).collect()
    }

    pub fn evaluate(&self, x: &Matrix, y: &[u8]) -> Result<EvalMetrics> {
        if x.rows() == 0 {
            return Err(Error::EmptyInput);
        }
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.rows(), got: y.len() });
        }
        Ok(EvalMetrics::from_predictions(y, &self.predict_all(x)))
    }

    /// Per-tree normalized impurity decrease averaged over trees, renormalized to sum 1.
    pub fn gini_importance(&self) -> ImportanceVector {
        let mut acc = vec![0.0; self.n_features];
        for t in &self.trees {
            let total: f64 = t.importance.iter().sum();
            if total > 0.0 {
                for (a, v) in acc.iter_mut().zip(&t.importance) {
                    *a += v / total;
                }
            }
        }
        let sum: f64 = acc.iter().sum();
        if sum > 0.0 {
            acc.iter_mut().for_each(|a| *a /= sum);
            ImportanceVector { values: acc, any_split: true }
        } else {
            ImportanceVector { values: vec![0.0; self.n_features], any_split: false }
        }
    }
}

/// Held-out classification quality for the two classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    /// Macro-averaged F1.
    pub f1: f64,
    pub accuracy: f64,
    pub precision: [f64; 2],
    pub recall: [f64; 2],
    pub f1_per_class: [f64; 2],
    pub test_size: usize,
    /// `confusion[truth][predicted]`.
    pub confusion: [[usize; 2]; 2],
}

impl EvalMetrics {
    /// Ratios with a zero denominator are 0.
    pub fn from_predictions(truth: &[u8], predicted: &[u8]) -> EvalMetrics {
        let mut confusion = [[0usize; 2]; 2];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[t as usize][p as usize] += 1;
        }
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let mut precision = [0.0; 2];
        let mut recall = [0.0; 2];
        let mut f1_per_class = [0.0; 2];
        for c in 0..2 {
            let tp = confusion[c][c];
            let predicted_c = confusion[0][c] + confusion[1][c];
            let actual_c = confusion[c][0] + confusion[c][1];
            precision[c] = ratio(tp, predicted_c);
            recall[c] = ratio(tp, actual_c);
            f1_per_class[c] = ratio(2 * tp, predicted_c + actual_c);
        }
        let n = truth.len();
        EvalMetrics {
            f1: (f1_per_class[0] + f1_per_class[1]) / 2.0,
            accuracy: ratio(confusion[0][0] + confusion[1][1], n),
            precision,
            recall,
            f1_per_class,
            test_size: n,
            confusion,
        }
    }
}

/// Train and test row indices, each ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn class_members(y: &[u8], min: usize) -> Result<[Vec<usize>; 2]> {
    let members: [Vec<usize>; 2] = [0u8, 1].map(|c| (0..y.len()).filter(|&i| y[i] == c).collect());
    for (class, m) in members.iter().enumerate() {
        if m.len() < min {
            return Err(Error::InsufficientMembers { class, count: m.len() });
        }
    }
    Ok(members)
}

/// Per-class shuffled split; each class sends `round(n_c * test_fraction)`
/// members to the test set, kept within `1..=n_c - 1`.
pub fn stratified_split(y: &[u8], test_fraction: f64, seed: u64) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig("test_fraction must be in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split { train: Vec::new(), test: Vec::new() };
    for mut members in class_members(y, 2)? {
        members.shuffle(&mut rng);
        let n = members.len();
        let k = (math::round(n as f64 * test_fraction) as usize).clamp(1, n - 1);
        split.test.extend_from_slice(&members[..k]);
        split.train.extend_from_slice(&members[k..]);
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// Assigns every row to one of `k` folds, dealing each shuffled class round-robin.
pub fn stratified_folds(y: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidConfig("need at least 2 folds"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mut members in class_members(y, k)? {
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// One point of the hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuneCandidate {
    pub n_trees: usize,
    pub max_depth: usize,
    pub max_features: MaxFeatures,
}

impl TuneCandidate {
    pub fn apply(&self, base: &ForestConfig) -> ForestConfig {
        ForestConfig { n_trees: self.n_trees, max_depth: self.max_depth, max_features: self.max_features, ..base.clone() }
    }
}

/// 4 tree counts × 3 depths × 2 feature rules = 24 candidates.
pub fn default_grid() -> Vec<TuneCandidate> {
    let mut grid = Vec::with_capacity(24);
    for n_trees in [50, 100, 200, 400] {
        for max_depth in [5, 10, 20] {
            for max_features in [MaxFeatures::Sqrt, MaxFeatures::All] {
                grid.push(TuneCandidate { n_trees, max_depth, max_features });
            }
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub candidate: TuneCandidate,
    pub fold_f1: Vec<f64>,
    pub mean_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub folds: usize,
    pub results: Vec<TuneResult>,
    /// Index into `results` of the highest mean F1, first on ties.
    pub best: usize,
}

/// Stratified k-fold cross-validated macro F1 for every candidate.
pub fn grid_search<F>(x: &Matrix, y: &[u8], base: &ForestConfig, grid: &[TuneCandidate], folds: usize, fit: F) -> Result<TuneReport>
where
    F: Fn(&Matrix, &[u8], &ForestConfig) -> Result<Forest>,
{
    if grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let assignment = stratified_folds(y, folds, base.seed)?;
    let mut results = Vec::with_capacity(grid.len());
    for cand in grid {
        let cfg = cand.apply(base);
        let mut fold_f1 = Vec::with_capacity(folds);
        for held_out in &assignment {
            let train: Vec<usize> = (0..y.len()).filter(|i| held_out.binary_search(i).is_err()).collect();
            let (xt, yt) = (x.select_rows(&train), pick(y, &train));
            let forest = fit(&xt, &yt, &cfg)?;
            fold_f1.push(forest.evaluate(&x.select_rows(held_out), &pick(y, held_out))?.f1);
        }
        let mean_f1 = fold_f1.iter().sum::<f64>() / folds as f64;
        results.push(TuneResult { candidate: *cand, fold_f1, mean_f1 });
    }
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.mean_f1 > results[best].mean_f1 {
            best = i;
        }
    }
    Ok(TuneReport { folds, results, best })
}

pub(crate) fn pick(y: &[u8], idx: &[usize]) -> Vec<u8> {
    idx.iter().map(|&i| y[i]).collect()
}
