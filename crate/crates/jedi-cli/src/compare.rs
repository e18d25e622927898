//! The `compare` command: aggregate final fitness per result directory,
//! test each method against the first-listed one with a two-sided
//! Mann-Whitney U test, and emit a convergence table on a shared
//! evaluation grid for external plotting.

use std::path::{Path, PathBuf};

use jedi_core::stats::{convergence_table, mann_whitney_u, median, PValueMethod};

use crate::output::{read_metrics_series, Manifest};
use crate::CliError;

/// Number of grid points in the convergence table.
const GRID_POINTS: u64 = 50;

struct MethodSeries {
    label: String,
    finals: Vec<f64>,
    series: Vec<Vec<(u64, f64)>>,
}

fn load_dir(dir: &Path) -> Result<(Manifest, MethodSeries), CliError> {
    let manifest = Manifest::load(dir)?;
    let mut finals = Vec::new();
    let mut series = Vec::new();
    for run in &manifest.runs {
        if run.status != "ok" {
            eprintln!(
                "warning: {}: seed {} excluded ({})",
                dir.display(),
                run.seed,
                run.status
            );
            continue;
        }
        let path = dir.join(&run.metrics_file);
        let rows = match read_metrics_series(&path) {
            Ok(rows) if !rows.is_empty() => rows,
            Ok(_) | Err(_) => {
                eprintln!(
                    "warning: {}: seed {} excluded (missing or empty metrics)",
                    dir.display(),
                    run.seed
                );
                continue;
            }
        };
        finals.push(rows.last().unwrap().1);
        series.push(rows);
    }
    if finals.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no usable seed results",
            dir.display()
        )));
    }
    let label = format!("{} ({})", manifest.method, dir.display());
    Ok((manifest, MethodSeries { label, finals, series }))
}

pub fn compare(dirs: &[PathBuf], out: &Path) -> Result<(), CliError> {
    if dirs.len() < 2 {
        return Err(CliError::Config("compare needs at least two result directories".into()));
    }
    let mut loaded = Vec::new();
    for dir in dirs {
        loaded.push(load_dir(dir)?);
    }
    let env0 = &loaded[0].0.env;
    for (manifest, _) in &loaded {
        if &manifest.env != env0 {
            return Err(CliError::Config(format!(
                "mismatched environments: '{}' vs '{}'",
                env0, manifest.env
            )));
        }
    }

    let baseline = &loaded[0].1;
    let mut report = String::from(
        "label,seeds,median_final,u_statistic,p_value,p_method,not_significant\n",
    );
    for (i, (_, m)) in loaded.iter().enumerate() {
        let med = median(&m.finals);
        let (u, p, method_name) = if i == 0 {
            (f64::NAN, f64::NAN, "baseline")
        } else {
            let r = mann_whitney_u(&m.finals, &baseline.finals);
            let name = match r.method {
                PValueMethod::Exact => "exact",
                PValueMethod::NormalApproximation => "normal-approximation",
            };
            (r.u_statistic, r.p_value, name)
        };
        let star = if i > 0 && p > 0.05 { "*" } else { "" };
        let fmt_nan = |v: f64| if v.is_nan() { String::new() } else { v.to_string() };
        report.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            m.label,
            m.finals.len(),
            med,
            fmt_nan(u),
            fmt_nan(p),
            method_name,
            star
        ));
    }
    crate::output::write_file(out, &report)?;

    // Convergence table on a grid shared by every run of every method.
    let max_e = loaded
        .iter()
        .flat_map(|(_, m)| m.series.iter())
        .filter_map(|s| s.last().map(|r| r.0))
        .max()
        .unwrap_or(0);
    let grid: Vec<u64> = (1..=GRID_POINTS).map(|i| max_e * i / GRID_POINTS).collect();
    let mut conv = String::from("evaluations");
    for (_, m) in &loaded {
        conv.push_str(&format!(",{0} median,{0} std,{0} runs", m.label));
    }
    conv.push('\n');
    let tables: Vec<_> = loaded
        .iter()
        .map(|(_, m)| {
            let refs: Vec<&[(u64, f64)]> = m.series.iter().map(|s| s.as_slice()).collect();
            convergence_table(&refs, &grid)
        })
        .collect();
    for (gi, &g) in grid.iter().enumerate() {
        conv.push_str(&g.to_string());
        for table in &tables {
            match table[gi].1 {
                Some(cell) => {
                    conv.push_str(&format!(",{},{},{}", cell.median, cell.std_dev, cell.runs))
                }
                None => conv.push_str(",,,0"),
            }
        }
        conv.push('\n');
    }
    let conv_path = convergence_path(out);
    crate::output::write_file(&conv_path, &conv)?;
    println!(
        "wrote {} and {} ({} methods, baseline {})",
        out.display(),
        conv_path.display(),
        loaded.len(),
        baseline.label
    );
    Ok(())
}

pub fn convergence_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let mut name = stem.to_string();
    name.push_str("_convergence.csv");
    out.with_file_name(name)
}
