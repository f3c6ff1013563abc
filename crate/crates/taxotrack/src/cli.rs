//! Command-line pipeline: `prep`, `vectorize`, `score`, `heatmap`, `compare`,
//! `sample`, `tune` and `serve`.
//!
//! Analytic commands read either raw trajectories (`--input`) or a vectors CSV
//! produced by `vectorize` (`--vectors`); `-` means standard input. Results
//! go to `--output` or standard output, the effective configuration is
//! printed to standard error as one JSON line, and failures print a JSON
//! error object to standard error with a nonzero exit code.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use taxotrack_core::comparison::{extract_sample_with, sample_pair, ComparisonReport};
use taxotrack_core::forest::{default_grid, MaxFeatures, TuneCandidate};
use taxotrack_core::{Combination, FeatureVector, Variable, Zone};

use crate::config::AppConfig;
use crate::error::{AppError, AppResult};
use crate::io::{self, InputFormat, RangeFilter};
use crate::pipeline;

#[derive(Debug, Parser)]
#[command(name = "taxotrack", version, about = "Taxonomy-driven trajectory outlier zones and feature importance")]
pub struct Cli {
    /// TOML configuration file; TAXOTRACK_* environment variables override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for the forest and the sampled radius estimator [default: 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Auto,
    Csv,
    Geojson,
}

#[derive(Debug, Args)]
pub struct RawArgs {
    /// Raw trajectories as CSV or GeoJSON (`-` for stdin).
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// CSV column holding the trajectory id.
    #[arg(long)]
    pub id_col: Option<String>,
    #[arg(long)]
    pub time_col: Option<String>,
    #[arg(long)]
    pub lat_col: Option<String>,
    #[arg(long)]
    pub lon_col: Option<String>,
    /// Keep rows with COLUMN in [MIN, MAX], e.g. SEASON:2004:2024.
    #[arg(long)]
    pub filter: Option<RangeFilter>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[command(flatten)]
    pub raw: RawArgs,
    /// Feature vectors CSV from `vectorize` (`-` for stdin).
    #[arg(long, conflicts_with = "input")]
    pub vectors: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest and clean raw trajectories and print the ingestion report.
    Prep {
        #[command(flatten)]
        raw: RawArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Write the 72-variable feature vectors as CSV.
    Vectorize {
        #[command(flatten)]
        raw: RawArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Score both nodes of a combination and write the zoned CSV.
    Score {
        #[command(flatten)]
        input: InputArgs,
        /// e.g. curvature-speed
        #[arg(long)]
        combo: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Zone counts for all seven combinations.
    Heatmap {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "json")]
        out_format: OutFormat,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Random-forest comparison of two zones of a combination.
    Compare {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        combo: String,
        /// Two zones, e.g. 1,2
        #[arg(long)]
        zones: String,
        /// Report JSON destination.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write the two importance columns as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample window of one trajectory (or two with --other) for a variable.
    Sample {
        #[command(flatten)]
        raw: RawArgs,
        #[arg(long)]
        tid: String,
        /// Second trajectory for a side-by-side pair with a shared color scale.
        #[arg(long)]
        other: Option<String>,
        #[arg(long)]
        variable: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Cross-validated grid search over tree count, depth and features per split.
    Tune {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        combo: String,
        #[arg(long)]
        zones: String,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Replace the grid's tree counts, e.g. 50,100.
        #[arg(long, value_delimiter = ',')]
        n_trees: Vec<usize>,
        /// Replace the grid's depths, e.g. 5,10.
        #[arg(long, value_delimiter = ',')]
        depths: Vec<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        listen: Option<String>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}

fn ingest_config(cfg: &AppConfig, raw: &RawArgs) -> io::IngestConfig {
    let mut ic = cfg.ingest.clone();
    if let Some(f) = raw.format {
        ic.format = match f {
            FormatArg::Auto => InputFormat::Auto,
            FormatArg::Csv => InputFormat::Csv,
            FormatArg::Geojson => InputFormat::Geojson,
        };
    }
    for (src, dst) in [
        (&raw.id_col, &mut ic.id_column),
        (&raw.time_col, &mut ic.time_column),
        (&raw.lat_col, &mut ic.lat_column),
        (&raw.lon_col, &mut ic.lon_column),
    ] {
        if let Some(v) = src {
            *dst = v.clone();
        }
    }
    if raw.filter.is_some() {
        ic.filter = raw.filter.clone();
    }
    ic
}

fn raw_dataset(cfg: &AppConfig, raw: &RawArgs) -> AppResult<(taxotrack_core::Dataset, taxotrack_core::IngestionReport, io::IngestConfig, Vec<u8>)> {
    let path = raw.input.as_ref().ok_or_else(|| AppError::bad_input("--input is required"))?;
    let ic = ingest_config(cfg, raw);
    let (mut d, r, bytes) = io::ingest_path(path, &ic)?;
    d.compute_features()?;
    Ok((d, r, ic, bytes))
}

fn load_vectors(cfg: &AppConfig, input: &InputArgs) -> AppResult<Vec<FeatureVector>> {
    match (&input.vectors, &input.raw.input) {
        (Some(v), _) => io::read_vectors_csv(&io::read_input(v)?[..]),
        (None, Some(_)) => pipeline::vectorize(&raw_dataset(cfg, &input.raw)?.0),
        (None, None) => Err(AppError::bad_input("give --input or --vectors")),
    }
}

fn parse_zones(s: &str) -> AppResult<(Zone, Zone)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts[..] else {
        return Err(AppError::bad_input(format!("--zones `{s}` must be two zones like 1,2")));
    };
    let z = |v: &str| -> AppResult<Zone> {
        let i: u8 = v.parse().map_err(|_| AppError::bad_input(format!("zone `{v}` is not a number")))?;
        Ok(Zone::from_index(i)?)
    };
    Ok((z(a)?, z(b)?))
}

fn sink(output: &Option<PathBuf>) -> AppResult<Box<dyn Write>> {
    Ok(match output {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(output: &Option<PathBuf>, value: &T) -> AppResult<()> {
    let mut w = sink(output)?;
    w.write_all(&json_document(value)?)?;
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline, as written by every JSON-producing command.
pub fn json_document<T: Serialize>(value: &T) -> AppResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn print_effective(cfg: &AppConfig) {
    let line = serde_json::json!({
        "effective_config": { "forest": cfg.forest, "dbos": cfg.dbos, "sample": cfg.sample, "ingest": cfg.ingest }
    });
    eprintln!("{line}");
}

/// Resolves configuration: file, then environment, then `--seed`.
pub fn effective_config(cli: &Cli) -> AppResult<AppConfig> {
    let mut cfg = AppConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.forest.seed = seed;
        cfg.dbos.seed = seed;
    }
    Ok(cfg)
}

/// The default grid with its tree-count and depth axes optionally replaced.
fn tune_grid(n_trees: &[usize], depths: &[usize]) -> Vec<TuneCandidate> {
    let grid = default_grid();
    let axis = |over: &[usize], f: fn(&TuneCandidate) -> usize| -> Vec<usize> {
        if over.is_empty() {
            let mut v: Vec<usize> = grid.iter().map(f).collect();
            v.sort_unstable();
            v.dedup();
            v
        } else {
            over.to_vec()
        }
    };
    let mut features: Vec<MaxFeatures> = Vec::new();
    for c in &grid {
        if !features.contains(&c.max_features) {
            features.push(c.max_features);
        }
    }
    let mut out = Vec::new();
    for &n_trees in &axis(n_trees, |c| c.n_trees) {
        for &max_depth in &axis(depths, |c| c.max_depth) {
            for &max_features in &features {
                out.push(TuneCandidate { n_trees, max_depth, max_features });
            }
        }
    }
    out
}

pub fn compare_report(
    vectors: &[FeatureVector],
    combo: Combination,
    zones: (Zone, Zone),
    cfg: &AppConfig,
) -> AppResult<ComparisonReport> {
    let zoned = pipeline::score_combination(vectors, combo, &cfg.dbos)?;
    pipeline::compare(vectors, &zoned, combo, zones, &cfg.forest)
}

pub fn run(cli: Cli) -> AppResult<()> {
    let mut cfg = effective_config(&cli)?;
    match cli.command {
        Command::Prep { raw, output } => {
            let (d, report, ic, bytes) = raw_dataset(&cfg, &raw)?;
            let doc = serde_json::json!({
                "dataset_id": io::dataset_id(&bytes, &ic),
                "name": d.name,
                "ingest": ic,
                "report": report,
            });
            write_json(&output, &doc)
        }
        Command::Vectorize { raw, output } => {
            let (d, ..) = raw_dataset(&cfg, &raw)?;
            let vectors = pipeline::vectorize(&d)?;
            let mut w = sink(&output)?;
            io::write_vectors_csv(&mut w, &vectors)
        }
        Command::Score { input, combo, output } => {
            print_effective(&cfg);
            let combo: Combination = combo.parse()?;
            let vectors = load_vectors(&cfg, &input)?;
            let zoned = pipeline::score_combination(&vectors, combo, &cfg.dbos)?;
            io::write_zoned_csv(sink(&output)?, &zoned)
        }
        Command::Heatmap { input, out_format, output } => {
            print_effective(&cfg);
            let vectors = load_vectors(&cfg, &input)?;
            let heat = pipeline::heatmap(&vectors, &cfg.dbos)?;
            match out_format {
                OutFormat::Json => write_json(&output, &heat),
                OutFormat::Csv => io::write_heatmap_csv(sink(&output)?, &heat),
            }
        }
        Command::Compare { input, combo, zones, output, csv } => {
            print_effective(&cfg);
            let combo: Combination = combo.parse()?;
            let zones = parse_zones(&zones)?;
            let vectors = load_vectors(&cfg, &input)?;
            let report = compare_report(&vectors, combo, zones, &cfg)?;
            if let Some(p) = csv {
                io::write_report_csv(File::create(p)?, &report)?;
            }
            write_json(&output, &report)
        }
        Command::Sample { raw, tid, other, variable, output } => {
            let variable = Variable::parse(&variable)?;
            let (d, ..) = raw_dataset(&cfg, &raw)?;
            let get = |id: &str| d.get(id).ok_or_else(|| taxotrack_core::Error::UnknownTrajectory(id.to_string()));
            let (before, after) = (cfg.sample.before, cfg.sample.after);
            match other {
                Some(o) => write_json(&output, &sample_pair(get(&tid)?, get(&o)?, variable, before, after)?),
                None => write_json(&output, &extract_sample_with(get(&tid)?, variable, before, after)?),
            }
        }
        Command::Tune { input, combo, zones, folds, n_trees, depths, output } => {
            print_effective(&cfg);
            let combo: Combination = combo.parse()?;
            let zones = parse_zones(&zones)?;
            let vectors = load_vectors(&cfg, &input)?;
            let zoned = pipeline::score_combination(&vectors, combo, &cfg.dbos)?;
            let report = pipeline::tune(&vectors, &zoned, combo, zones, &cfg.forest, &tune_grid(&n_trees, &depths), folds)?;
            write_json(&output, &report)
        }
        Command::Serve { listen, data_dir, ui_dir } => {
            if let Some(l) = listen {
                cfg.listen = l;
            }
            if let Some(d) = data_dir {
                cfg.data_dir = d;
            }
            if let Some(u) = ui_dir {
                cfg.ui_dir = u;
            }
            print_effective(&cfg);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::service::serve(cfg))
        }
    }
}
