//! Built-in maze layouts. Coordinates are unit-square; every maze carries
//! explicit boundary walls so collision handling is uniform. The deceptive
//! layouts all place a wall across the straight start-to-target line, which
//! `MazeSpec::is_deceptive` verifies.

use alloc::vec;
use alloc::vec::Vec;

use super::{MazeSpec, Segment};

const ROBOT_RADIUS: f64 = 0.015;
const TARGET_RADIUS: f64 = 0.05;
const MAX_STEPS: u32 = 250;
const DISTANCE_SCALE: f64 = 100.0;

fn boundary() -> Vec<Segment> {
    vec![
        Segment::new(0.0, 0.0, 1.0, 0.0),
        Segment::new(1.0, 0.0, 1.0, 1.0),
        Segment::new(1.0, 1.0, 0.0, 1.0),
        Segment::new(0.0, 1.0, 0.0, 0.0),
    ]
}

fn maze(walls: Vec<Segment>, start: (f64, f64, f64), target: [f64; 2]) -> MazeSpec {
    let spec = MazeSpec {
        walls,
        start_pose: start,
        target_center: target,
        target_radius: TARGET_RADIUS,
        robot_radius: ROBOT_RADIUS,
        max_steps: MAX_STEPS,
        distance_scale: DISTANCE_SCALE,
    };
    debug_assert!(spec.validate().is_ok());
    spec
}

/// Empty arena: no interior walls, target straight ahead. Not deceptive;
/// a plain ES solves it.
pub fn open_arena() -> MazeSpec {
    maze(
        boundary(),
        (0.5, 0.2, core::f64::consts::FRAC_PI_2),
        [0.5, 0.8],
    )
}

/// One wall between start and target, open on the left: the shortest path
/// detours around the wall end.
pub fn detour() -> MazeSpec {
    let mut walls = boundary();
    walls.push(Segment::new(0.25, 0.5, 1.0, 0.5));
    maze(walls, (0.6, 0.2, core::f64::consts::FRAC_PI_2), [0.6, 0.8])
}

/// Square spiral wrapping twice around the central start chamber. The only
/// way out of the chamber is a narrow mouth on the west side, after which
/// the route runs north, east, south and west again before reaching the
/// target in the bottom strip — while the target sits due south of the
/// start the whole time.
pub fn spiral() -> MazeSpec {
    let mut walls = boundary();
    // Outer wrap, attached to the left boundary; the gap between the end of
    // the bottom arm and the right arm drops into the target strip.
    walls.push(Segment::new(0.0, 0.15, 0.70, 0.15));
    walls.push(Segment::new(0.85, 0.15, 0.85, 0.85));
    walls.push(Segment::new(0.15, 0.85, 0.85, 0.85));
    walls.push(Segment::new(0.15, 0.30, 0.15, 0.85));
    // Inner wrap around the chamber; the mouth is the gap left of the
    // chamber between y = 0.30 and y = 0.42.
    walls.push(Segment::new(0.15, 0.30, 0.70, 0.30));
    walls.push(Segment::new(0.70, 0.30, 0.70, 0.70));
    walls.push(Segment::new(0.30, 0.70, 0.70, 0.70));
    walls.push(Segment::new(0.30, 0.42, 0.30, 0.70));
    maze(walls, (0.5, 0.5, 0.0), [0.5, 0.07])
}

/// Three chambers with doors on alternating sides; the target is two
/// chambers away from the start.
pub fn chambers() -> MazeSpec {
    let mut walls = boundary();
    walls.push(Segment::new(0.33, 0.0, 0.33, 0.75));
    walls.push(Segment::new(0.66, 0.25, 0.66, 1.0));
    maze(walls, (0.15, 0.5, 0.0), [0.85, 0.5])
}

/// Tile a base maze's interior walls at half scale into the four quadrants,
/// start the robot at the center of the new maze, and keep the target only
/// in the lower-left quadrant. Quadrants connect through the open cross
/// between them (the base boundary walls are not copied).
pub fn quadruple(base: &MazeSpec) -> MazeSpec {
    let mut walls = boundary();
    let offsets = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)];
    for wall in &base.walls {
        // Walls lying along the unit-square border are the base boundary;
        // copies would seal the quadrants off from each other.
        let on_border = (wall.a[0] == wall.b[0] && (wall.a[0] == 0.0 || wall.a[0] == 1.0))
            || (wall.a[1] == wall.b[1] && (wall.a[1] == 0.0 || wall.a[1] == 1.0));
        if on_border {
            continue;
        }
        for &(ox, oy) in &offsets {
            walls.push(Segment::new(
                wall.a[0] * 0.5 + ox,
                wall.a[1] * 0.5 + oy,
                wall.b[0] * 0.5 + ox,
                wall.b[1] * 0.5 + oy,
            ));
        }
    }
    let target = [base.target_center[0] * 0.5, base.target_center[1] * 0.5];
    MazeSpec {
        walls,
        start_pose: (0.5, 0.5, base.start_pose.2),
        target_center: target,
        target_radius: base.target_radius * 0.5,
        robot_radius: base.robot_radius,
        max_steps: base.max_steps,
        distance_scale: base.distance_scale,
    }
}
