//! Maze file format: a `[maze]` section (start, heading, target, radii,
//! step limit) plus repeated `[[wall]]` segments, all in unit-square
//! coordinates. Files ship under `assets/mazes/`.

use std::path::Path;

use jedi_core::env::{MazeSpec, Segment};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MazeFile {
    maze: MazeSection,
    #[serde(default, rename = "wall")]
    walls: Vec<WallSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MazeSection {
    start: [f64; 2],
    heading: f64,
    target: [f64; 2],
    #[serde(default = "default_target_radius")]
    target_radius: f64,
    #[serde(default = "default_robot_radius")]
    robot_radius: f64,
    #[serde(default = "default_max_steps")]
    max_steps: u32,
    #[serde(default = "default_distance_scale")]
    distance_scale: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WallSection {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

fn default_target_radius() -> f64 {
    0.05
}

fn default_robot_radius() -> f64 {
    0.015
}

fn default_max_steps() -> u32 {
    250
}

fn default_distance_scale() -> f64 {
    100.0
}

/// Parse and validate a maze file.
pub fn load(path: &Path) -> Result<MazeSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read maze file {}: {e}", path.display())))?;
    let parsed: MazeFile = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("maze file {}: {e}", path.display())))?;
    let spec = MazeSpec {
        walls: parsed
            .walls
            .iter()
            .map(|w| Segment::new(w.x1, w.y1, w.x2, w.y2))
            .collect(),
        start_pose: (parsed.maze.start[0], parsed.maze.start[1], parsed.maze.heading),
        target_center: parsed.maze.target,
        target_radius: parsed.maze.target_radius,
        robot_radius: parsed.maze.robot_radius,
        max_steps: parsed.maze.max_steps,
        distance_scale: parsed.maze.distance_scale,
    };
    spec.validate()
        .map_err(|e| CliError::Config(format!("maze file {}: {e}", path.display())))?;
    Ok(spec)
}

/// Serialize a maze back to the file format.
pub fn to_string(spec: &MazeSpec) -> String {
    let file = MazeFile {
        maze: MazeSection {
            start: [spec.start_pose.0, spec.start_pose.1],
            heading: spec.start_pose.2,
            target: spec.target_center,
            target_radius: spec.target_radius,
            robot_radius: spec.robot_radius,
            max_steps: spec.max_steps,
            distance_scale: spec.distance_scale,
        },
        walls: spec
            .walls
            .iter()
            .map(|w| WallSection { x1: w.a[0], y1: w.a[1], x2: w.b[0], y2: w.b[1] })
            .collect(),
    };
    toml::to_string(&file).expect("maze serialization cannot fail")
}
