//! Raw trajectory ingestion (CSV, GeoJSON) and the CSV/JSON artifact formats.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use taxotrack_core::comparison::ComparisonReport;
use taxotrack_core::trajectory::Provenance;
use taxotrack_core::{
    Combination, Dataset, DatasetBuilder, FeatureVector, FrequencyMatrix, IngestionReport, VariableCatalog, ZonedScore,
    CATALOG_LEN,
};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// GeoJSON when the content starts with `{`, CSV otherwise.
    Auto,
    Csv,
    Geojson,
}

/// Keeps only rows whose `column` parses to a number in `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeFilter {
    pub column: String,
    pub min: f64,
    pub max: f64,
}

impl std::str::FromStr for RangeFilter {
    type Err = AppError;

    /// `COLUMN:MIN:MAX`, e.g. `SEASON:2004:2024`.
    fn from_str(s: &str) -> AppResult<Self> {
        let parts: Vec<&str> = s.rsplitn(3, ':').collect();
        let [max, min, column] = parts[..] else {
            return Err(AppError::bad_input(format!("filter `{s}` is not COLUMN:MIN:MAX")));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| AppError::bad_input(format!("filter bound `{v}` is not a number")));
        Ok(RangeFilter { column: column.to_string(), min: num(min)?, max: num(max)? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub format: InputFormat,
    pub id_column: String,
    pub time_column: String,
    pub lat_column: String,
    pub lon_column: String,
    pub filter: Option<RangeFilter>,
    /// GeoJSON: feature property holding the id (falls back to the feature `id`).
    pub id_property: String,
    /// GeoJSON: feature property holding one timestamp per coordinate.
    pub timestamps_property: String,
    /// Map longitudes in (180, 360] to (-180, 0].
    pub wrap_longitude: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            format: InputFormat::Auto,
            id_column: "trajectory_id".into(),
            time_column: "timestamp".into(),
            lat_column: "lat".into(),
            lon_column: "lon".into(),
            filter: None,
            id_property: "id".into(),
            timestamps_property: "timestamps".into(),
            wrap_longitude: true,
        }
    }
}

impl IngestConfig {
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Stable id of a dataset: hash of its raw bytes and the ingestion config.
pub fn dataset_id(raw: &[u8], config: &IngestConfig) -> String {
    let mut h = Sha256::new();
    h.update(raw);
    h.update([0u8]);
    h.update(serde_json::to_vec(config).expect("config serializes"));
    hex::encode(h.finalize())[..16].to_string()
}

/// Seconds since the Unix epoch from a number, RFC 3339, or a naive
/// `YYYY-MM-DD HH:MM[:SS[.f]]` timestamp read as UTC.
pub fn parse_timestamp(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9);
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M", "%Y/%m/%d %H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            let utc = dt.and_utc();
            return Some(utc.timestamp() as f64 + utc.timestamp_subsec_nanos() as f64 * 1e-9);
        }
    }
    None
}

fn wrap(lon: f64, enabled: bool) -> f64 {
    if enabled && lon > 180.0 && lon <= 360.0 {
        lon - 360.0
    } else {
        lon
    }
}

/// Parses raw bytes into a cleaned dataset.
pub fn ingest_bytes(raw: &[u8], name: &str, config: &IngestConfig) -> AppResult<(Dataset, IngestionReport)> {
    let format = match config.format {
        InputFormat::Auto => {
            let first = raw.iter().find(|b| !b.is_ascii_whitespace());
            if first == Some(&b'{') {
                InputFormat::Geojson
            } else {
                InputFormat::Csv
            }
        }
        f => f,
    };
    let builder = match format {
        InputFormat::Geojson => geojson_rows(raw, name, config)?,
        _ => csv_rows(raw, name, config)?,
    };
    let (dataset, report) = builder.finish()?;
    let provenance = Provenance { source: name.to_string(), config_hash: config.hash() };
    Ok((dataset.with_provenance(provenance), report))
}

pub fn ingest_path(path: &std::path::Path, config: &IngestConfig) -> AppResult<(Dataset, IngestionReport, Vec<u8>)> {
    let raw = read_input(path)?;
    let name = path.file_name().map_or_else(|| "stdin".to_string(), |n| n.to_string_lossy().into_owned());
    let (d, r) = ingest_bytes(&raw, &name, config)?;
    Ok((d, r, raw))
}

/// Reads a file, or standard input for `-`.
pub fn read_input(path: &std::path::Path) -> AppResult<Vec<u8>> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read(path)?)
    }
}

fn column_index(headers: &csv::StringRecord, name: &str) -> AppResult<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .or_else(|| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name)))
        .ok_or_else(|| AppError::bad_input(format!("missing column `{name}`")))
}

fn csv_rows(raw: &[u8], name: &str, config: &IngestConfig) -> AppResult<DatasetBuilder> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(raw);
    let headers = reader.headers()?.clone();
    let id = column_index(&headers, &config.id_column)?;
    let time = column_index(&headers, &config.time_column)?;
    let lat = column_index(&headers, &config.lat_column)?;
    let lon = column_index(&headers, &config.lon_column)?;
    let filter = match &config.filter {
        Some(f) => Some((column_index(&headers, &f.column)?, f.min, f.max)),
        None => None,
    };
    let mut builder = DatasetBuilder::new(name);
    for record in reader.records() {
        let Ok(record) = record else {
            builder.reject_row();
            continue;
        };
        let field = |i: usize| record.get(i).map(str::trim).unwrap_or("");
        let num = |i: usize| field(i).parse::<f64>().ok().filter(|v| v.is_finite());
        if let Some((col, min, max)) = filter {
            match num(col) {
                Some(v) if v >= min && v <= max => {}
                // filtered rows are out of scope, not dropped
                Some(_) => continue,
                None => {
                    builder.reject_row();
                    continue;
                }
            }
        }
        let tid = field(id);
        match (tid.is_empty(), num(lat), num(lon), parse_timestamp(field(time))) {
            (false, Some(la), Some(lo), Some(t)) => {
                builder.push(tid, wrap(lo, config.wrap_longitude), la, t);
            }
            _ => builder.reject_row(),
        }
    }
    Ok(builder)
}

fn value_to_id(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn value_to_time(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => parse_timestamp(s),
        _ => None,
    }
}

fn geojson_rows(raw: &[u8], name: &str, config: &IngestConfig) -> AppResult<DatasetBuilder> {
    let doc: Value = serde_json::from_slice(raw)?;
    let features = match doc.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => doc.get("features").and_then(Value::as_array).cloned().unwrap_or_default(),
        Some("Feature") => vec![doc.clone()],
        _ => return Err(AppError::bad_input("GeoJSON input must be a FeatureCollection or Feature")),
    };
    let mut builder = DatasetBuilder::new(name);
    for (fi, feature) in features.iter().enumerate() {
        let props = feature.get("properties").unwrap_or(&Value::Null);
        let id = props
            .get(&config.id_property)
            .and_then(value_to_id)
            .or_else(|| feature.get("id").and_then(value_to_id))
            .unwrap_or_else(|| format!("feature-{fi}"));
        let geometry = feature.get("geometry").unwrap_or(&Value::Null);
        let coords = match geometry.get("type").and_then(Value::as_str) {
            Some("LineString") => geometry.get("coordinates").and_then(Value::as_array).cloned().unwrap_or_default(),
            _ => {
                builder.reject_row();
                continue;
            }
        };
        let times = props.get(&config.timestamps_property).and_then(Value::as_array);
        for (i, c) in coords.iter().enumerate() {
            let xy = c.as_array().filter(|a| a.len() >= 2);
            let lon = xy.and_then(|a| a[0].as_f64());
            let lat = xy.and_then(|a| a[1].as_f64());
            let t = times.and_then(|ts| ts.get(i)).and_then(value_to_time);
            match (lon, lat, t) {
                (Some(lo), Some(la), Some(t)) => {
                    builder.push(&id, wrap(lo, config.wrap_longitude), la, t);
                }
                _ => builder.reject_row(),
            }
        }
    }
    Ok(builder)
}

/// Writes `trajectory_id` plus the 72 catalog columns; floats use the
/// shortest representation that parses back to the same value.
pub fn write_vectors_csv<W: Write>(out: W, vectors: &[FeatureVector]) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["trajectory_id".to_string()];
    header.extend(VariableCatalog::names());
    w.write_record(&header)?;
    for v in vectors {
        let mut rec = Vec::with_capacity(CATALOG_LEN + 1);
        rec.push(v.trajectory_id.clone());
        rec.extend(v.values.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vectors_csv<R: Read>(input: R) -> AppResult<Vec<FeatureVector>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let expected = VariableCatalog::names();
    if headers.len() != CATALOG_LEN + 1
        || headers.get(0) != Some("trajectory_id")
        || headers.iter().skip(1).zip(&expected).any(|(h, e)| h != e)
    {
        return Err(AppError::bad_input("vectors CSV header does not match the 72-variable catalog"));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let values = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|_| AppError::bad_input(format!("non-numeric value in vectors row {}", line + 1)))?;
        out.push(FeatureVector::new(&rec[0], values)?);
    }
    Ok(out)
}

pub fn write_zoned_csv<W: Write>(out: W, scores: &[ZonedScore]) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trajectory_id", "combination", "x_node", "y_node", "x", "y", "zone"])?;
    for s in scores {
        w.write_record([
            s.trajectory_id.clone(),
            s.combination.name(),
            s.combination.x_node().to_string(),
            s.combination.y_node().to_string(),
            s.x.to_string(),
            s.y.to_string(),
            s.zone.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per combination with counts for zones 0–3.
pub fn write_heatmap_csv<W: Write>(out: W, heat: &FrequencyMatrix) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["combination", "x_node", "y_node", "zone_0", "zone_1", "zone_2", "zone_3"])?;
    for row in &heat.rows {
        let c: Combination = row.combination;
        let mut rec = vec![c.name(), c.x_node().to_string(), c.y_node().to_string()];
        rec.extend(row.counts.iter().map(usize::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// The two importance columns side by side, one rank per row.
pub fn write_report_csv<W: Write>(out: W, report: &ComparisonReport) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let x = report.combination.x_node().to_string();
    let y = report.combination.y_node().to_string();
    w.write_record(["rank".to_string(), x.clone(), format!("{x}_importance"), y.clone(), format!("{y}_importance")])?;
    let rows = report.column_x.len().max(report.column_y.len());
    for i in 0..rows {
        let cell = |col: &[taxotrack_core::comparison::RankedVariable]| match col.get(i) {
            Some(r) => (r.variable.clone(), r.importance.to_string()),
            None => (String::new(), String::new()),
        };
        let (xv, xi) = cell(&report.column_x);
        let (yv, yi) = cell(&report.column_y);
        w.write_record([(i + 1).to_string(), xv, xi, yv, yi])?;
    }
    w.flush()?;
    Ok(())
}
