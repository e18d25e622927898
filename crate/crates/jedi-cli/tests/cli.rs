//! End-to-end harness tests: artifact layout, rerun determinism, the
//! compare/replay flows, shipped asset integrity and process exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

use jedi_cli::runner::{execute, run_experiment, RunOptions};
use jedi_cli::{compare, config, maze_file, output, replay};

fn assets_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets/mazes")
}

fn sphere_config(out: &Path, budget: u64) -> config::ExperimentConfig {
    config::from_str(&format!(
        "method = \"jedi\"\nenv = \"sphere\"\nseeds = [1, 2, 3]\neval_budget = {budget}\n\
         output_dir = \"{}\"\n[synthetic]\ndim = 4\n[jedi]\nn_init = 16\nes_generations = 5\n",
        out.display()
    ))
    .unwrap()
}

#[test]
fn run_writes_per_seed_artifacts_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sphere_config(&dir.path().join("out"), 1000);
    let manifest = execute(&cfg, dir.path(), 2).unwrap();
    assert_eq!(manifest.runs.len(), 3);
    for seed in [1u64, 2, 3] {
        let metrics = dir.path().join(format!("out/jedi_{seed}_metrics.csv"));
        let series = output::read_metrics_series(&metrics).unwrap();
        assert!(!series.is_empty());
        assert!(series.last().unwrap().0 <= 1000, "budget respected");
        assert!(dir.path().join(format!("out/jedi_{seed}_archive.csv")).exists());
        assert!(dir.path().join(format!("out/jedi_{seed}_best.genome")).exists());
    }
    let loaded = output::Manifest::load(&dir.path().join("out")).unwrap();
    assert_eq!(loaded.config_hash, cfg.hash());
    assert!(loaded.runs.iter().all(|r| r.status == "ok"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for name in ["a", "b"] {
        let cfg = sphere_config(&dir.path().join(name), 800);
        execute(&cfg, dir.path(), 2).unwrap();
        let mut files = Vec::new();
        for seed in [1u64, 2, 3] {
            files.push(
                std::fs::read(dir.path().join(format!("{name}/jedi_{seed}_metrics.csv"))).unwrap(),
            );
        }
        bytes.push(files);
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn compare_directory_with_itself_gives_p_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sphere_config(&dir.path().join("runs"), 600);
    execute(&cfg, dir.path(), 2).unwrap();
    let report = dir.path().join("report.csv");
    compare::compare(
        &[dir.path().join("runs"), dir.path().join("runs")],
        &report,
    )
    .unwrap();
    let text = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    let second: Vec<&str> = lines[2].split(',').collect();
    // label,seeds,median_final,u,p,method,star
    let medians: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(medians[2], second[2], "identical medians");
    assert_eq!(second[4], "1", "p = 1.0, got {}", second[4]);
    assert_eq!(second[6], "*", "flagged not significant");
    assert!(compare::convergence_path(&report).exists());
}

#[test]
fn compare_refuses_mismatched_environments() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = sphere_config(&dir.path().join("sphere"), 400);
    execute(&sphere, dir.path(), 1).unwrap();
    let rastrigin = config::from_str(&format!(
        "method = \"jedi\"\nenv = \"rastrigin\"\nseeds = [1, 2]\neval_budget = 400\n\
         output_dir = \"{}\"\n[synthetic]\ndim = 4\n[jedi]\nn_init = 16\nes_generations = 5\n",
        dir.path().join("rastrigin").display()
    ))
    .unwrap();
    execute(&rastrigin, dir.path(), 1).unwrap();
    let err = compare::compare(
        &[dir.path().join("sphere"), dir.path().join("rastrigin")],
        &dir.path().join("r.csv"),
    )
    .unwrap_err();
    assert!(err.to_string().contains("mismatched environments"), "{err}");
}

#[test]
fn separated_methods_compare_as_significant() {
    // Synthetic metrics files with hand-made finals [1..10] vs [11..20].
    let dir = tempfile::tempdir().unwrap();
    for (name, offset) in [("low", 0), ("high", 10)] {
        let out = dir.path().join(name);
        std::fs::create_dir_all(&out).unwrap();
        let mut runs = Vec::new();
        for seed in 1..=10u64 {
            let final_fitness = (seed + offset) as f64;
            let rows = vec![jedi_core::methods::MetricRow {
                evaluations: 100,
                best_fitness: final_fitness,
                coverage: 0.5,
                alpha: None,
                loop_index: None,
            }];
            let (metrics_file, archive_file, genome_file) = output::seed_file_names("jedi", seed);
            output::write_file(&out.join(&metrics_file), &output::metrics_to_csv(&rows)).unwrap();
            runs.push(output::ManifestRun {
                seed,
                status: "ok".into(),
                evaluations: 100,
                best_fitness: Some(final_fitness),
                reached_target: None,
                restarts: 0,
                wall_ms: 1,
                metrics_file,
                archive_file,
                genome_file,
            });
        }
        output::Manifest {
            tool_version: "test".into(),
            method: "jedi".into(),
            env: "sphere".into(),
            config_hash: "x".into(),
            seeds: (1..=10).collect(),
            config: String::new(),
            runs,
        }
        .save(&out)
        .unwrap();
    }
    let report = dir.path().join("report.csv");
    compare::compare(&[dir.path().join("low"), dir.path().join("high")], &report).unwrap();
    let text = std::fs::read_to_string(&report).unwrap();
    let second: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    let p: f64 = second[4].parse().unwrap();
    let expected = 2.0 / 184_756.0;
    assert!((p - expected).abs() < 1e-9, "exact p {p} vs {expected}");
    assert_eq!(second[6], "", "flagged significant");
}

#[test]
fn replay_reproduces_recorded_fitness_and_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let maze_path = assets_dir().join("detour.maze");
    let cfg = config::from_str(&format!(
        "method = \"map-elites\"\nenv = \"maze:{}\"\nseeds = [5]\neval_budget = 2000\n\
         output_dir = \"{}\"\n[jedi]\nn_init = 64\n",
        maze_path.display(),
        dir.path().join("out").display()
    ))
    .unwrap();
    execute(&cfg, dir.path(), 2).unwrap();
    let genome_path = dir.path().join("out/map-elites_5_best.genome");
    let (_, recorded) = output::read_genome_file(&genome_path).unwrap();
    let traj = dir.path().join("traj.csv");
    replay::replay(&genome_path, &maze_path, &traj).unwrap();
    let text = std::fs::read_to_string(&traj).unwrap();
    let summary = text.lines().last().unwrap();
    assert!(summary.starts_with("# fitness"), "{summary}");
    let replayed: f64 = summary.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert_eq!(Some(replayed), recorded, "replay matches recorded fitness");
    let steps: u32 = summary
        .split_whitespace()
        .nth(7)
        .unwrap()
        .parse()
        .unwrap();
    // Header + steps + 1 state rows + summary line.
    assert_eq!(text.lines().count() as u32, 1 + steps + 1 + 1);
}

#[test]
fn replay_of_immobile_genome_stays_at_start() {
    let dir = tempfile::tempdir().unwrap();
    let maze_path = assets_dir().join("open.maze");
    let genome_path = dir.path().join("zero.genome");
    let zeros: Vec<String> = (0..66).map(|_| "0".to_string()).collect();
    std::fs::write(&genome_path, zeros.join("\n")).unwrap();
    let traj = dir.path().join("t.csv");
    replay::replay(&genome_path, &maze_path, &traj).unwrap();
    let text = std::fs::read_to_string(&traj).unwrap();
    let mut positions = std::collections::HashSet::new();
    for line in text.lines().skip(1) {
        if line.starts_with('#') {
            continue;
        }
        let mut f = line.split(',');
        f.next();
        positions.insert((f.next().unwrap().to_string(), f.next().unwrap().to_string()));
    }
    assert_eq!(positions.len(), 1, "all rows share the start position");
}

#[test]
fn shipped_assets_match_the_builtin_layouts() {
    let dir = assets_dir();
    let presets = [
        ("open.maze", jedi_core::env::open_arena()),
        ("detour.maze", jedi_core::env::detour()),
        ("spiral.maze", jedi_core::env::spiral()),
        ("chambers.maze", jedi_core::env::chambers()),
        ("quad.maze", jedi_core::env::quadruple(&jedi_core::env::spiral())),
    ];
    for (file, preset) in presets {
        let loaded = maze_file::load(&dir.join(file)).unwrap();
        assert_eq!(loaded, preset, "{file} drifted from the built-in layout");
        assert!(loaded.validate().is_ok());
    }
    // The deceptive set really is deceptive, the open arena is not.
    assert!(!maze_file::load(&dir.join("open.maze")).unwrap().is_deceptive());
    for file in ["detour.maze", "spiral.maze", "chambers.maze", "quad.maze"] {
        assert!(maze_file::load(&dir.join(file)).unwrap().is_deceptive(), "{file}");
    }
}

#[test]
fn seeds_and_out_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.toml");
    std::fs::write(
        &config_path,
        "method = \"es\"\nenv = \"sphere\"\nseeds = [1, 2, 3]\neval_budget = 500\n[synthetic]\ndim = 3\n",
    )
    .unwrap();
    let manifest = run_experiment(&RunOptions {
        config_path,
        seeds_override: Some(vec![9]),
        out_override: Some(dir.path().join("here")),
        workers: 1,
    })
    .unwrap();
    assert_eq!(manifest.seeds, vec![9]);
    assert!(dir.path().join("here/es_9_metrics.csv").exists());
}

#[test]
fn binary_exit_codes_classify_errors() {
    let bin = env!("CARGO_BIN_EXE_jedi");
    let dir = tempfile::tempdir().unwrap();

    // Config error: missing config file.
    let status = Command::new(bin)
        .args(["run", "--config", "/nonexistent.toml"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));

    // Config error: invalid alpha, named in the message.
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "method = \"jedi\"\nenv = \"sphere\"\nseeds = [1]\n[jedi.alpha]\nschedule = \"constant\"\nvalue = 2.0\n",
    )
    .unwrap();
    let out = Command::new(bin)
        .args(["run", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha out of [0,1]"));

    // Success path: a tiny run plus centroids export.
    let good = dir.path().join("good.toml");
    std::fs::write(
        &good,
        format!(
            "method = \"es\"\nenv = \"sphere\"\nseeds = [1]\neval_budget = 200\n\
             output_dir = \"{}\"\n[synthetic]\ndim = 3\n",
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let out = Command::new(bin).args(["run", "--config"]).arg(&good).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let centroids_csv = dir.path().join("c.csv");
    let out = Command::new(bin)
        .args(["centroids", "--k", "16", "--seed", "3", "--out"])
        .arg(&centroids_csv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&centroids_csv).unwrap();
    assert_eq!(text.lines().count(), 17, "header plus 16 rows");
}
