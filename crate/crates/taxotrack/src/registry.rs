//! On-disk dataset registry.
//!
//! Layout under the data directory:
//! `registry.json` (all entries), `datasets/<id>.raw` (the uploaded bytes) and
//! `datasets/<id>.vectors.csv` (cached feature vectors). Ids hash the raw
//! bytes together with the ingestion config, so a config change yields a new
//! entry with its own artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use taxotrack_core::{Dataset, FeatureVector, IngestionReport};

use crate::error::{AppError, AppResult};
use crate::io::{dataset_id, ingest_bytes, read_vectors_csv, write_vectors_csv, IngestConfig};
use crate::pipeline;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub raw: PathBuf,
    pub vectors: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub id: String,
    pub name: String,
    pub ingest: IngestConfig,
    pub ingest_hash: String,
    pub report: IngestionReport,
    pub trajectories: usize,
    pub artifacts: Artifacts,
    pub created_at: String,
}

/// A dataset ready for analysis.
#[derive(Debug)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    /// Aligned with `dataset.trajectories()`.
    pub vectors: Vec<FeatureVector>,
}

pub struct Registry {
    dir: PathBuf,
    entries: RwLock<BTreeMap<String, DatasetEntry>>,
}

impl Registry {
    pub fn open(dir: &Path) -> AppResult<Self> {
        std::fs::create_dir_all(dir.join("datasets"))?;
        let index = dir.join("registry.json");
        let entries = if index.exists() {
            let list: Vec<DatasetEntry> = serde_json::from_slice(&std::fs::read(&index)?)?;
            list.into_iter().map(|e| (e.id.clone(), e)).collect()
        } else {
            BTreeMap::new()
        };
        Ok(Self { dir: dir.to_path_buf(), entries: RwLock::new(entries) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn list(&self) -> Vec<DatasetEntry> {
        self.entries.read().expect("registry lock").values().cloned().collect()
    }

    pub fn get(&self, id: &str) -> AppResult<DatasetEntry> {
        self.entries
            .read()
            .expect("registry lock")
            .get(id)
            .cloned()
            .ok_or_else(|| AppError::UnknownDataset(id.to_string()))
    }

    fn persist(&self, entries: &BTreeMap<String, DatasetEntry>) -> AppResult<()> {
        let list: Vec<&DatasetEntry> = entries.values().collect();
        let tmp = self.dir.join("registry.json.tmp");
        std::fs::write(&tmp, serde_json::to_vec_pretty(&list)?)?;
        std::fs::rename(tmp, self.dir.join("registry.json"))?;
        Ok(())
    }

    /// Ingests and vectorizes `raw`, storing it unless an identical entry exists.
    /// Returns the entry and whether it was newly created.
    pub fn insert(&self, raw: &[u8], name: &str, ingest: &IngestConfig) -> AppResult<(DatasetEntry, LoadedDataset, bool)> {
        let id = dataset_id(raw, ingest);
        if let Ok(existing) = self.get(&id) {
            let loaded = self.load(&existing)?;
            return Ok((existing, loaded, false));
        }
        let (mut dataset, report) = ingest_bytes(raw, name, ingest)?;
        dataset.compute_features()?;
        let vectors = pipeline::vectorize(&dataset)?;
        let artifacts = Artifacts {
            raw: self.dir.join("datasets").join(format!("{id}.raw")),
            vectors: self.dir.join("datasets").join(format!("{id}.vectors.csv")),
        };
        std::fs::write(&artifacts.raw, raw)?;
        write_vectors_csv(std::fs::File::create(&artifacts.vectors)?, &vectors)?;
        let entry = DatasetEntry {
            id: id.clone(),
            name: name.to_string(),
            ingest: ingest.clone(),
            ingest_hash: ingest.hash(),
            trajectories: dataset.len(),
            report,
            artifacts,
            created_at: chrono::Utc::now().to_rfc3339(),
        };
        let mut entries = self.entries.write().expect("registry lock");
        entries.insert(id, entry.clone());
        self.persist(&entries)?;
        Ok((entry, LoadedDataset { dataset, vectors }, true))
    }

    /// Rebuilds the dataset from its stored bytes, reusing cached vectors when present.
    pub fn load(&self, entry: &DatasetEntry) -> AppResult<LoadedDataset> {
        let raw = std::fs::read(&entry.artifacts.raw)?;
        let (mut dataset, _) = ingest_bytes(&raw, &entry.name, &entry.ingest)?;
        dataset.compute_features()?;
        let cached = std::fs::File::open(&entry.artifacts.vectors)
            .ok()
            .and_then(|f| read_vectors_csv(f).ok())
            .filter(|v| v.len() == dataset.len() && v.iter().zip(dataset.ids()).all(|(v, id)| v.trajectory_id == id));
        let vectors = match cached {
            Some(v) => v,
            None => {
                let v = pipeline::vectorize(&dataset)?;
                write_vectors_csv(std::fs::File::create(&entry.artifacts.vectors)?, &v)?;
                v
            }
        };
        Ok(LoadedDataset { dataset, vectors })
    }
}
