//! 2D maze simulation: differential-drive kinematics, lidar raycasting and
//! stop-at-contact collision resolution, all in unit-square coordinates.

use alloc::vec::Vec;
use core::fmt;

use super::{EnvError, EpisodeResult, Evaluator, Observation, PolicyNet, PolicySpec};
use crate::Descriptor;

/// One control tick per step.
pub const DT: f64 = 1.0;
/// Top wheel speed in unit lengths per step; a straight crossing of the
/// square takes ~50 steps.
pub const V_MAX: f64 = 0.02;
/// Wheel separation.
pub const AXLE: f64 = 0.05;
/// Lidar saturation distance.
pub const LIDAR_MAX_RANGE: f64 = 0.3;
/// Beam headings relative to the robot: a symmetric forward cone.
pub const LIDAR_OFFSETS: [f64; 3] = [
    -core::f64::consts::FRAC_PI_4,
    0.0,
    core::f64::consts::FRAC_PI_4,
];

/// Collision tolerance: contact is resolved at robot_radius - CONTACT_EPS so
/// a robot resting on a wall can still move tangentially. Kept below the
/// 1e-9 slack the collision-safety invariant allows.
const CONTACT_EPS: f64 = 5e-10;

/// Wall segment in unit-square coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Segment { a: [x1, y1], b: [x2, y2] }
    }
}

/// Static description of one maze task.
#[derive(Debug, Clone, PartialEq)]
pub struct MazeSpec {
    pub walls: Vec<Segment>,
    /// (x, y, heading in radians).
    pub start_pose: (f64, f64, f64),
    pub target_center: [f64; 2],
    pub target_radius: f64,
    pub robot_radius: f64,
    pub max_steps: u32,
    /// Weight of the residual distance in the not-reached fitness.
    pub distance_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MazeError {
    OutOfBounds(&'static str),
    NonPositiveRadius(&'static str),
    StartInsideWall,
    ZeroSteps,
}

impl fmt::Display for MazeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MazeError::OutOfBounds(what) => write!(f, "{what} outside the unit square"),
            MazeError::NonPositiveRadius(what) => write!(f, "{what} must be positive"),
            MazeError::StartInsideWall => {
                write!(f, "start pose closer than robot_radius to a wall")
            }
            MazeError::ZeroSteps => write!(f, "max_steps must be at least 1"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MazeError {}

impl MazeSpec {
    /// Check the geometric invariants: everything inside the unit square,
    /// positive radii, start clear of walls, at least one step.
    pub fn validate(&self) -> Result<(), MazeError> {
        let in_unit = |p: [f64; 2]| (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]);
        for w in &self.walls {
            if !in_unit(w.a) || !in_unit(w.b) {
                return Err(MazeError::OutOfBounds("wall endpoint"));
            }
        }
        let start = [self.start_pose.0, self.start_pose.1];
        if !in_unit(start) {
            return Err(MazeError::OutOfBounds("start position"));
        }
        if !in_unit(self.target_center) {
            return Err(MazeError::OutOfBounds("target center"));
        }
        if !(self.target_radius > 0.0) {
            return Err(MazeError::NonPositiveRadius("target_radius"));
        }
        if !(self.robot_radius > 0.0) {
            return Err(MazeError::NonPositiveRadius("robot_radius"));
        }
        if self.max_steps == 0 {
            return Err(MazeError::ZeroSteps);
        }
        for w in &self.walls {
            if point_segment_distance(start, w) < self.robot_radius {
                return Err(MazeError::StartInsideWall);
            }
        }
        Ok(())
    }

    /// True when the straight line from start to target crosses a wall, the
    /// geometric signature of a deceptive fitness landscape.
    pub fn is_deceptive(&self) -> bool {
        let line = Segment {
            a: [self.start_pose.0, self.start_pose.1],
            b: self.target_center,
        };
        self.walls.iter().any(|w| segments_intersect(&line, w))
    }
}

/// Robot pose during an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: [f64; 2],
    pub heading: f64,
    pub step_index: u32,
}

/// Result of applying one action: the new pose plus the bumper flags sensed
/// on the next observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: RobotState,
    pub bumpers: [f64; 2],
}

fn sub(p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
    [p[0] - q[0], p[1] - q[1]]
}

fn dot(p: [f64; 2], q: [f64; 2]) -> f64 {
    p[0] * q[0] + p[1] * q[1]
}

fn cross(p: [f64; 2], q: [f64; 2]) -> f64 {
    p[0] * q[1] - p[1] * q[0]
}

fn norm(p: [f64; 2]) -> f64 {
    libm::hypot(p[0], p[1])
}

pub(crate) fn point_segment_distance(p: [f64; 2], seg: &Segment) -> f64 {
    let ab = sub(seg.b, seg.a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(sub(p, seg.a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    norm(sub(p, [seg.a[0] + t * ab[0], seg.a[1] + t * ab[1]]))
}

fn closest_point_on_segment(p: [f64; 2], seg: &Segment) -> [f64; 2] {
    let ab = sub(seg.b, seg.a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(sub(p, seg.a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    [seg.a[0] + t * ab[0], seg.a[1] + t * ab[1]]
}

/// Proper or touching intersection of two segments.
fn segments_intersect(s1: &Segment, s2: &Segment) -> bool {
    let d1 = sub(s1.b, s1.a);
    let d2 = sub(s2.b, s2.a);
    let denom = cross(d1, d2);
    let ao = sub(s2.a, s1.a);
    if denom.abs() < 1e-15 {
        // Parallel: overlapping collinear segments still count.
        if cross(ao, d1).abs() > 1e-15 {
            return false;
        }
        let len2 = dot(d1, d1);
        if len2 == 0.0 {
            return point_segment_distance(s1.a, s2) == 0.0;
        }
        let t0 = dot(ao, d1) / len2;
        let t1 = dot(sub(s2.b, s1.a), d1) / len2;
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        return hi >= 0.0 && lo <= 1.0;
    }
    let t = cross(ao, d2) / denom;
    let s = cross(ao, d1) / denom;
    (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&s)
}

/// Distance along a ray to a wall segment, if it is hit.
fn ray_segment_hit(origin: [f64; 2], dir: [f64; 2], seg: &Segment) -> Option<f64> {
    let e = sub(seg.b, seg.a);
    let denom = cross(dir, e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let ao = sub(seg.a, origin);
    let t = cross(ao, e) / denom;
    let s = cross(ao, dir) / denom;
    if t >= 0.0 && (0.0..=1.0).contains(&s) {
        Some(t)
    } else {
        None
    }
}

/// Raw lidar reading: distance along the beam at `beam_angle_offset` from the
/// robot heading to the nearest wall, clamped at [`LIDAR_MAX_RANGE`].
pub fn lidar_cast(state: &RobotState, maze: &MazeSpec, beam_angle_offset: f64) -> f64 {
    let angle = state.heading + beam_angle_offset;
    let dir = [libm::cos(angle), libm::sin(angle)];
    let mut range = LIDAR_MAX_RANGE;
    for wall in &maze.walls {
        if let Some(t) = ray_segment_hit(state.position, dir, wall) {
            range = range.min(t);
        }
    }
    range
}

/// First t in [0, 1] at which `origin + t*motion` comes within `radius` of
/// the segment, or None if the whole move stays clear. Exact moving-disc
/// versus segment test: candidate times are roots of the per-feature
/// boundary equations (endpoint circles and the offset lines of the wall),
/// validated against the true distance.
fn capsule_entry(origin: [f64; 2], motion: [f64; 2], seg: &Segment, radius: f64) -> Option<f64> {
    if point_segment_distance(origin, seg) <= radius {
        return Some(0.0);
    }
    let speed2 = dot(motion, motion);
    if speed2 == 0.0 {
        return None;
    }
    let mut best: Option<f64> = None;
    let mut consider = |t: f64| {
        if (0.0..=1.0).contains(&t) {
            let p = [origin[0] + t * motion[0], origin[1] + t * motion[1]];
            if point_segment_distance(p, seg) <= radius + 1e-12 {
                best = Some(best.map_or(t, |b: f64| b.min(t)));
            }
        }
    };
    // Endpoint circles.
    for c in [seg.a, seg.b] {
        let oc = sub(origin, c);
        let qb = 2.0 * dot(motion, oc);
        let qc = dot(oc, oc) - radius * radius;
        let disc = qb * qb - 4.0 * speed2 * qc;
        if disc >= 0.0 {
            let sq = libm::sqrt(disc);
            consider((-qb - sq) / (2.0 * speed2));
            consider((-qb + sq) / (2.0 * speed2));
        }
    }
    // Lines parallel to the wall at +/- radius.
    let e = sub(seg.b, seg.a);
    let len = norm(e);
    if len > 0.0 {
        let n = [-e[1] / len, e[0] / len];
        let d0 = dot(n, sub(origin, seg.a));
        let dn = dot(n, motion);
        if dn != 0.0 {
            consider((radius - d0) / dn);
            consider((-radius - d0) / dn);
        }
    }
    best
}

/// Differential-drive update with stop-at-contact collision resolution.
///
/// Wheel speeds `action = [left, right]` produce a forward speed
/// `(l + r) / 2 * V_MAX` and a turn rate `(r - l) / AXLE * V_MAX`. The
/// heading updates first, then the position moves along the new heading
/// until it would penetrate a wall, where it stops and raises the bumper on
/// the contact side. Positions are clamped to the unit square.
pub fn maze_step(state: &RobotState, action: [f64; 2], maze: &MazeSpec) -> StepOutcome {
    let v = (action[0] + action[1]) / 2.0 * V_MAX;
    let omega = (action[1] - action[0]) / AXLE * V_MAX;
    let heading = state.heading + omega * DT;
    let motion = [v * DT * libm::cos(heading), v * DT * libm::sin(heading)];

    let mut bumpers = [0.0, 0.0];
    let mut position = [state.position[0] + motion[0], state.position[1] + motion[1]];
    if motion[0] != 0.0 || motion[1] != 0.0 {
        let contact_radius = maze.robot_radius - CONTACT_EPS;
        let mut first_hit: Option<(f64, usize)> = None;
        for (wi, wall) in maze.walls.iter().enumerate() {
            if let Some(t) = capsule_entry(state.position, motion, wall, contact_radius) {
                if first_hit.map_or(true, |(bt, _)| t < bt) {
                    first_hit = Some((t, wi));
                }
            }
        }
        if let Some((t, wi)) = first_hit {
            position = [
                state.position[0] + t * motion[0],
                state.position[1] + t * motion[1],
            ];
            let contact = closest_point_on_segment(position, &maze.walls[wi]);
            let to_contact = sub(contact, position);
            // Contact bearing relative to motion direction decides the side.
            let side = cross(motion, to_contact) * v.signum();
            if side > 0.0 {
                bumpers[0] = 1.0;
            } else {
                bumpers[1] = 1.0;
            }
        }
    }
    position[0] = position[0].clamp(0.0, 1.0);
    position[1] = position[1].clamp(0.0, 1.0);

    StepOutcome {
        state: RobotState {
            position,
            heading,
            step_index: state.step_index + 1,
        },
        bumpers,
    }
}

fn observe(state: &RobotState, maze: &MazeSpec, bumpers: [f64; 2]) -> Observation {
    let mut lidar = [0.0; 3];
    for (i, &offset) in LIDAR_OFFSETS.iter().enumerate() {
        lidar[i] = (lidar_cast(state, maze, offset) / LIDAR_MAX_RANGE).clamp(0.0, 1.0);
    }
    Observation { lidar, bumpers }
}

/// One row of a trajectory trace: the pose, what the policy saw there, and
/// the action it chose.
#[derive(Debug, Clone, Copy)]
pub struct TraceStep {
    pub step: u32,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub lidar: [f64; 3],
    pub bumpers: [f64; 2],
    pub action: [f64; 2],
}

fn episode_fitness(maze: &MazeSpec, final_pos: [f64; 2], reached_at: Option<u32>) -> f64 {
    match reached_at {
        Some(k) => -f64::from(k),
        None => {
            let dist = norm(sub(final_pos, maze.target_center));
            -f64::from(maze.max_steps) - maze.distance_scale * dist
        }
    }
}

fn run_impl(
    genome: &[f64],
    maze: &MazeSpec,
    spec: &PolicySpec,
    mut trace: Option<&mut Vec<TraceStep>>,
) -> Result<EpisodeResult, EnvError> {
    let mut net = PolicyNet::from_genome(genome, spec)?;
    let mut state = RobotState {
        position: [maze.start_pose.0, maze.start_pose.1],
        heading: maze.start_pose.2,
        step_index: 0,
    };
    let mut obs = observe(&state, maze, [0.0, 0.0]);
    let mut reached_at = None;
    loop {
        let action = net.forward(&obs.as_input());
        if let Some(rows) = trace.as_deref_mut() {
            rows.push(TraceStep {
                step: state.step_index,
                x: state.position[0],
                y: state.position[1],
                heading: state.heading,
                lidar: obs.lidar,
                bumpers: obs.bumpers,
                action,
            });
        }
        if reached_at.is_some() || state.step_index >= maze.max_steps {
            break;
        }
        let outcome = maze_step(&state, action, maze);
        state = outcome.state;
        obs = observe(&state, maze, outcome.bumpers);
        if norm(sub(state.position, maze.target_center)) <= maze.target_radius {
            reached_at = Some(state.step_index);
        }
    }
    let descriptor: Descriptor = [
        state.position[0].clamp(0.0, 1.0),
        state.position[1].clamp(0.0, 1.0),
    ];
    Ok(EpisodeResult {
        fitness: episode_fitness(maze, state.position, reached_at),
        descriptor,
        steps_used: state.step_index,
        reached_target: reached_at.is_some(),
    })
}

/// Roll out one episode. Ends at the first step whose final position lies
/// within the target radius (fitness = -steps) or after `max_steps`
/// (fitness = -max_steps - distance_scale * remaining distance). The
/// behavior descriptor is the final position.
pub fn run_episode(
    genome: &[f64],
    maze: &MazeSpec,
    spec: &PolicySpec,
) -> Result<EpisodeResult, EnvError> {
    run_impl(genome, maze, spec, None)
}

/// As [`run_episode`], also returning one trace row per visited state
/// (`steps_used + 1` rows; the last row's action is computed but unapplied).
pub fn run_episode_traced(
    genome: &[f64],
    maze: &MazeSpec,
    spec: &PolicySpec,
) -> Result<(EpisodeResult, Vec<TraceStep>), EnvError> {
    let mut rows = Vec::new();
    let result = run_impl(genome, maze, spec, Some(&mut rows))?;
    Ok((result, rows))
}

/// A maze plus the policy architecture that drives it.
#[derive(Debug, Clone)]
pub struct MazeEnv {
    pub maze: MazeSpec,
    pub policy: PolicySpec,
}

impl MazeEnv {
    pub fn new(maze: MazeSpec) -> Self {
        MazeEnv {
            maze,
            policy: PolicySpec::default(),
        }
    }
}

impl Evaluator for MazeEnv {
    fn genome_len(&self) -> usize {
        self.policy.genome_len()
    }

    fn evaluate(&self, genome: &[f64]) -> EpisodeResult {
        run_episode(genome, &self.maze, &self.policy).expect("genome length checked by caller")
    }
}
