use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

use super::config::ExperimentConfig;
use super::game::{run_game, Transcript};

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 18] = [
    "experiment_id",
    "learner",
    "adversary",
    "class",
    "T",
    "sigma",
    "K",
    "d",
    "n",
    "c_K",
    "tie_policy",
    "seed",
    "regret",
    "total_loss",
    "bih_loss",
    "oracle_calls",
    "mean_input_len",
    "wall_ms",
];

/// Prefix of the `seed` cell on aggregate rows.
pub const AGGREGATE_TAG: &str = "aggregate";

/// One CSV row. `seed` holds the seed for data rows and
/// `aggregate(se=<standard error of regret>)` for the aggregate row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub experiment_id: String,
    pub learner: String,
    pub adversary: String,
    pub class: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub sigma: f64,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub d: usize,
    pub n: Option<f64>,
    #[serde(rename = "c_K")]
    pub c_k: f64,
    pub tie_policy: String,
    pub seed: String,
    pub regret: f64,
    pub total_loss: f64,
    pub bih_loss: f64,
    pub oracle_calls: f64,
    pub mean_input_len: f64,
    pub wall_ms: f64,
}

impl CsvRow {
    pub fn is_aggregate(&self) -> bool {
        self.seed.starts_with(AGGREGATE_TAG)
    }
}

/// Run options that come from the command line rather than the config.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Added to every configured seed.
    pub seed_base: u64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// Data rows sorted by seed, then the aggregate row.
    pub rows: Vec<CsvRow>,
    /// Transcripts in the same order as the data rows.
    pub transcripts: Vec<Transcript>,
}

fn row_for(config: &ExperimentConfig, d: usize, tr: &Transcript) -> CsvRow {
    let wall_us: u64 = tr.rounds.iter().map(|r| r.wall_us).sum();
    CsvRow {
        experiment_id: config.experiment_id.clone(),
        learner: tr.learner.clone(),
        adversary: tr.adversary.clone(),
        class: config.class.label(),
        horizon: config.horizon,
        sigma: config.sigma,
        k: tr.k.or(config.k),
        d,
        n: tr.n,
        c_k: config.c_k,
        tie_policy: config.tie.as_str().to_string(),
        seed: tr.seed.to_string(),
        regret: tr.regret,
        total_loss: tr.total_loss,
        bih_loss: tr.bih_loss,
        oracle_calls: tr.oracle.call_count as f64,
        mean_input_len: tr.oracle.mean_input_length(),
        wall_ms: wall_us as f64 / 1000.0,
    }
}

fn mean(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let se = if v.len() > 1 {
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
        (var / v.len() as f64).sqrt()
    } else {
        0.0
    };
    (m, se)
}

fn aggregate(rows: &[CsvRow]) -> CsvRow {
    let (regret, se) = mean(rows.iter().map(|r| r.regret));
    let mut agg = rows[0].clone();
    agg.seed = format!("{AGGREGATE_TAG}(se={se})");
    agg.regret = regret;
    agg.total_loss = mean(rows.iter().map(|r| r.total_loss)).0;
    agg.bih_loss = mean(rows.iter().map(|r| r.bih_loss)).0;
    agg.oracle_calls = mean(rows.iter().map(|r| r.oracle_calls)).0;
    agg.mean_input_len = mean(rows.iter().map(|r| r.mean_input_len)).0;
    agg.wall_ms = mean(rows.iter().map(|r| r.wall_ms)).0;
    let n: Vec<f64> = rows.iter().filter_map(|r| r.n).collect();
    agg.n = (n.len() == rows.len()).then(|| n.iter().sum::<f64>() / n.len() as f64);
    agg
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| LabError::config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every seed of `config` (concurrently) and assembles the rows.
pub fn run_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentOutput> {
    config.validate()?;
    let d = config.dimension(&config.class.build()?);
    let mut seeds: Vec<u64> = config
        .seeds
        .iter()
        .map(|s| {
            s.checked_add(options.seed_base)
                .ok_or_else(|| LabError::config("seed + seed_base overflows"))
        })
        .collect::<Result<_>>()?;
    seeds.sort_unstable();
    let transcripts = in_pool(options.jobs, || {
        seeds
            .par_iter()
            .map(|&s| run_game(config, s))
            .collect::<Result<Vec<_>>>()
    })??;
    let mut rows: Vec<CsvRow> = transcripts
        .iter()
        .map(|tr| row_for(config, d, tr))
        .collect();
    rows.push(aggregate(&rows));
    Ok(ExperimentOutput { rows, transcripts })
}

/// Runs every grid point of a sweep config in order.
pub fn run_sweep(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentOutput> {
    if config.sweep.is_none() {
        return Err(LabError::config(
            "sweep needs a \"sweep\" grid in the config",
        ));
    }
    let mut rows = Vec::new();
    let mut transcripts = Vec::new();
    for point in config.grid_points() {
        let out = run_experiment(&point, options)?;
        rows.extend(out.rows);
        transcripts.extend(out.transcripts);
    }
    Ok(ExperimentOutput { rows, transcripts })
}

pub fn rows_to_csv(rows: &[CsvRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(csv_error)?.clone();
    if headers.iter().ne(CSV_COLUMNS) {
        return Err(LabError::config(format!(
            "unexpected CSV header; expected {}",
            CSV_COLUMNS.join(",")
        )));
    }
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

fn csv_error(e: csv::Error) -> LabError {
    LabError::config(format!("csv: {e}"))
}

/// Where outputs go: the CSV path and the transcript file next to it.
///
/// An explicit output directory (flag or environment) keeps only the file
/// name of the configured path.
pub fn output_paths(config: &ExperimentConfig, out_dir: Option<&Path>) -> (PathBuf, PathBuf) {
    let configured = config
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", config.experiment_id)));
    let csv_path = match out_dir {
        Some(dir) => dir.join(configured.file_name().unwrap_or(configured.as_os_str())),
        None => configured,
    };
    let transcripts = csv_path.with_extension("transcripts.jsonl");
    (csv_path, transcripts)
}

/// Writes the CSV and one transcript per line.
pub fn write_outputs(
    out: &ExperimentOutput,
    csv_path: &Path,
    transcript_path: &Path,
) -> Result<()> {
    for p in [csv_path, transcript_path] {
        if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(csv_path, rows_to_csv(&out.rows)?)?;
    let mut lines = String::new();
    for tr in &out.transcripts {
        lines.push_str(&tr.to_json()?);
        lines.push('\n');
    }
    fs::write(transcript_path, lines)?;
    Ok(())
}
