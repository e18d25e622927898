//! Artifact serialization. Metrics, archives and trajectories are plain
//! CSV with floats printed by Rust's shortest round-trip formatter, so
//! reruns of the same (config, seed) produce byte-identical files. The
//! manifest is JSON and carries the non-deterministic extras (wall-clock
//! times, failure notes) that must stay out of the CSVs.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use jedi_core::archive::Repertoire;
use jedi_core::env::EpisodeResult;
use jedi_core::methods::{MetricRow, RunResult};
use jedi_core::Genome;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const METRICS_HEADER: &str = "evaluations,best_fitness,coverage,alpha,loop";

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn metrics_to_csv(rows: &[MetricRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 40 + 64);
    s.push_str(METRICS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.evaluations,
            r.best_fitness,
            r.coverage,
            fmt_opt_f64(r.alpha),
            r.loop_index.map(|l| l.to_string()).unwrap_or_default()
        );
    }
    s
}

/// Parse the (evaluations, best_fitness) series back out of a metrics CSV.
pub fn read_metrics_series(path: &Path) -> Result<Vec<(u64, f64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != METRICS_HEADER {
                return Err(CliError::Runtime(format!(
                    "{}: unexpected metrics header '{line}'",
                    path.display()
                )));
            }
            continue;
        }
        let mut fields = line.split(',');
        let parse = |f: Option<&str>| -> Option<f64> { f.and_then(|v| v.parse().ok()) };
        let evals = fields.next().and_then(|v| v.parse::<u64>().ok());
        let best = parse(fields.next());
        match (evals, best) {
            (Some(e), Some(b)) => rows.push((e, b)),
            _ => {
                return Err(CliError::Runtime(format!(
                    "{}: malformed metrics row '{line}'",
                    path.display()
                )))
            }
        }
    }
    Ok(rows)
}

pub fn archive_to_csv(rep: &Repertoire) -> String {
    let genome_len = rep
        .cells()
        .iter()
        .find_map(|c| c.elite.as_ref().map(|e| e.genome.len()))
        .unwrap_or(0);
    let mut s = String::new();
    s.push_str("cell_index,centroid_x,centroid_y,descriptor_x,descriptor_y,elite_fitness,count");
    for i in 0..genome_len {
        let _ = write!(s, ",g{i}");
    }
    s.push('\n');
    for (ci, cell) in rep.cells().iter().enumerate() {
        if let Some(e) = &cell.elite {
            let c = rep.centroids().points()[ci];
            let _ = write!(
                s,
                "{},{},{},{},{},{},{}",
                ci, c[0], c[1], e.descriptor[0], e.descriptor[1], e.fitness, cell.count
            );
            for v in &e.genome {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
    }
    s
}

/// Genome files carry a summary comment header and one value per line.
pub fn genome_to_string(genome: &[f64], result: &EpisodeResult) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# fitness {} descriptor {} {} steps {} reached {}",
        result.fitness,
        result.descriptor[0],
        result.descriptor[1],
        result.steps_used,
        result.reached_target
    );
    for v in genome {
        let _ = writeln!(s, "{v}");
    }
    s
}

/// Read a genome file; returns the values and the recorded fitness if the
/// summary header is present.
pub fn read_genome_file(path: &Path) -> Result<(Genome, Option<f64>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read genome {}: {e}", path.display())))?;
    let mut genome = Genome::new();
    let mut recorded = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut words = rest.split_whitespace();
            while let Some(w) = words.next() {
                if w == "fitness" {
                    recorded = words.next().and_then(|v| v.parse().ok());
                    break;
                }
            }
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            CliError::Config(format!("{}: bad genome value '{line}'", path.display()))
        })?;
        genome.push(v);
    }
    if genome.is_empty() {
        return Err(CliError::Config(format!("{}: empty genome file", path.display())));
    }
    Ok((genome, recorded))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::io(&format!("creating {}", path.display()), e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
}

/// Per-seed entry in the experiment manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestRun {
    pub seed: u64,
    pub status: String,
    pub evaluations: u64,
    pub best_fitness: Option<f64>,
    pub reached_target: Option<bool>,
    pub restarts: u64,
    pub wall_ms: u64,
    pub metrics_file: String,
    pub archive_file: String,
    pub genome_file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub method: String,
    pub env: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    /// Canonical resolved configuration, embedded for reproducibility.
    pub config: String,
    pub runs: Vec<ManifestRun>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| {
            CliError::Config(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Runtime(format!("manifest serialization: {e}")))?;
        write_file(&dir.join("manifest.json"), &text)
    }
}

pub fn seed_file_names(method: &str, seed: u64) -> (String, String, String) {
    (
        format!("{method}_{seed}_metrics.csv"),
        format!("{method}_{seed}_archive.csv"),
        format!("{method}_{seed}_best.genome"),
    )
}

/// Everything written for one successful seed.
pub fn write_seed_artifacts(
    dir: &Path,
    method: &str,
    seed: u64,
    result: &RunResult,
) -> Result<(String, String, String), CliError> {
    let (metrics, archive, genome) = seed_file_names(method, seed);
    write_file(&dir.join(&metrics), &metrics_to_csv(&result.rows))?;
    write_file(&dir.join(&archive), &archive_to_csv(&result.repertoire))?;
    write_file(
        &dir.join(&genome),
        &genome_to_string(&result.best_genome, &result.best_result),
    )?;
    Ok((metrics, archive, genome))
}
