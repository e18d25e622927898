//! The `replay` command: re-run a saved genome in a maze and dump the
//! trajectory — one row per step with pose, observations and actions, plus
//! a summary line. Episodes are deterministic, so the replayed fitness must
//! equal the one recorded at save time.

use std::fmt::Write as _;
use std::path::Path;

use jedi_core::env::{run_episode_traced, PolicySpec};

use crate::output::read_genome_file;
use crate::CliError;

pub fn replay(genome_path: &Path, maze_path: &Path, out: &Path) -> Result<(), CliError> {
    let (genome, recorded_fitness) = read_genome_file(genome_path)?;
    let maze = crate::maze_file::load(maze_path)?;
    let policy = PolicySpec::default();
    if genome.len() != policy.genome_len() {
        return Err(CliError::Config(format!(
            "genome length {} does not match the maze policy ({} parameters)",
            genome.len(),
            policy.genome_len()
        )));
    }
    let (result, trace) =
        run_episode_traced(&genome, &maze, &policy).map_err(|e| CliError::Config(e.to_string()))?;

    let mut csv = String::from(
        "step,x,y,heading,lidar0,lidar1,lidar2,bumper_l,bumper_r,action_l,action_r\n",
    );
    for row in &trace {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.step,
            row.x,
            row.y,
            row.heading,
            row.lidar[0],
            row.lidar[1],
            row.lidar[2],
            row.bumpers[0],
            row.bumpers[1],
            row.action[0],
            row.action[1]
        );
    }
    let _ = writeln!(
        csv,
        "# fitness {} descriptor {} {} steps {} reached {}",
        result.fitness,
        result.descriptor[0],
        result.descriptor[1],
        result.steps_used,
        result.reached_target
    );
    crate::output::write_file(out, &csv)?;

    if let Some(recorded) = recorded_fitness {
        if recorded != result.fitness {
            eprintln!(
                "warning: replayed fitness {} differs from recorded {} (wrong maze file?)",
                result.fitness, recorded
            );
        }
    }
    println!(
        "replayed {} steps, fitness {}, final position ({}, {})",
        result.steps_used, result.fitness, result.descriptor[0], result.descriptor[1]
    );
    Ok(())
}
