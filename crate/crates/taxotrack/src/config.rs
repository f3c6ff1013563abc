//! Application configuration: a TOML file overlaid with `TAXOTRACK_*` variables.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! data_dir = "taxotrack-data"
//! ui_dir = "ui/dist"
//! workers = 4
//!
//! [forest]
//! n_trees = 200
//! max_depth = 10
//! seed = 42
//! test_fraction = 0.2
//! max_features = "sqrt"      # "all", or { fixed = 8 }
//!
//! [dbos]
//! normalize_features = true
//! radius_sample_pairs = 50000  # omit for the exact all-pairs radius
//!
//! [sample]
//! before = 5
//! after = 4
//!
//! [ingest]
//! id_column = "trajectory_id"
//! time_column = "timestamp"
//! filter = { column = "SEASON", min = 2004, max = 2024 }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use taxotrack_core::forest::MaxFeatures;
use taxotrack_core::{DbosOptions, ForestConfig};

use crate::error::{AppError, AppResult};
use crate::io::IngestConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub before: usize,
    pub after: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { before: 5, after: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub listen: String,
    pub data_dir: PathBuf,
    pub ui_dir: PathBuf,
    /// Concurrent heavy computations in the service.
    pub workers: usize,
    pub forest: ForestConfig,
    pub dbos: DbosOptions,
    pub sample: SampleConfig,
    pub ingest: IngestConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            data_dir: "taxotrack-data".into(),
            ui_dir: "ui/dist".into(),
            workers: std::thread::available_parallelism().map_or(2, |n| n.get()),
            forest: ForestConfig::default(),
            dbos: DbosOptions::default(),
            sample: SampleConfig::default(),
            ingest: IngestConfig::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> AppResult<T> {
    v.trim().parse().map_err(|_| AppError::Config(format!("{key}: cannot parse `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> AppResult<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(AppError::Config(format!("{key}: expected a boolean, got `{v}`"))),
    }
}

pub fn parse_max_features(v: &str) -> AppResult<MaxFeatures> {
    match v.trim().to_ascii_lowercase().as_str() {
        "sqrt" => Ok(MaxFeatures::Sqrt),
        "all" => Ok(MaxFeatures::All),
        n => Ok(MaxFeatures::Fixed(parse("max_features", n)?)),
    }
}

impl AppConfig {
    pub fn from_toml(text: &str) -> AppResult<Self> {
        toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))
    }

    /// Reads `path` if given (defaults otherwise) and applies the process environment.
    pub fn load(path: Option<&Path>) -> AppResult<Self> {
        let mut cfg = match path {
            Some(p) => Self::from_toml(&std::fs::read_to_string(p)?)?,
            None => Self::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> AppResult<()> {
        let var = |name: &str| get(&format!("TAXOTRACK_{name}")).map(|v| (name.to_string(), v));
        if let Some((_, v)) = var("LISTEN") {
            self.listen = v;
        }
        if let Some((_, v)) = var("DATA_DIR") {
            self.data_dir = v.into();
        }
        if let Some((_, v)) = var("UI_DIR") {
            self.ui_dir = v.into();
        }
        if let Some((k, v)) = var("WORKERS") {
            self.workers = parse(&k, &v)?;
        }
        let f = &mut self.forest;
        if let Some((k, v)) = var("FOREST_N_TREES") {
            f.n_trees = parse(&k, &v)?;
        }
        if let Some((k, v)) = var("FOREST_MAX_DEPTH") {
            f.max_depth = parse(&k, &v)?;
        }
        if let Some((k, v)) = var("FOREST_SEED") {
            f.seed = parse(&k, &v)?;
        }
        if let Some((k, v)) = var("FOREST_TEST_FRACTION") {
            f.test_fraction = parse(&k, &v)?;
        }
        if let Some((_, v)) = var("FOREST_MAX_FEATURES") {
            f.max_features = parse_max_features(&v)?;
        }
        if let Some((k, v)) = var("FOREST_MIN_SAMPLES_LEAF") {
            f.min_samples_leaf = parse(&k, &v)?;
        }
        if let Some((k, v)) = var("FOREST_BOOTSTRAP") {
            f.bootstrap = parse_bool(&k, &v)?;
        }
        if let Some((k, v)) = var("DBOS_NORMALIZE") {
            self.dbos.normalize_features = parse_bool(&k, &v)?;
        }
        if let Some((k, v)) = var("DBOS_RADIUS_SAMPLE_PAIRS") {
            self.dbos.radius_sample_pairs = if v.trim().is_empty() || v.trim() == "0" { None } else { Some(parse(&k, &v)?) };
        }
        if let Some((k, v)) = var("DBOS_SEED") {
            self.dbos.seed = parse(&k, &v)?;
        }
        if let Some((k, v)) = var("SAMPLE_BEFORE") {
            self.sample.before = parse(&k, &v)?;
        }
        if let Some((k, v)) = var("SAMPLE_AFTER") {
            self.sample.after = parse(&k, &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> AppResult<()> {
        self.forest.validate()?;
        if self.workers == 0 {
            return Err(AppError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Hash of the settings that change analytic results (forest and scoring).
    pub fn analytics_hash(&self) -> String {
        let bytes = serde_json::to_vec(&(&self.forest, &self.dbos)).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))[..16].to_string()
    }
}
