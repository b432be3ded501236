//! A companion dog that idles near the player while on screen and walks back
//! into the camera's view whenever it drops out.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::polygon::{self, LabeledPolygon, Point};
use super::IslandMap;
use crate::geometry::{yaw_towards, CameraModel, Frustum, Pose, Vec3};
use crate::rng::{stream, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DogParams {
    /// Walking speed in metres per second.
    pub speed: f64,
    /// Simulation step in seconds.
    pub tick_seconds: f64,
    /// Largest ground distance from the player while wandering.
    pub follow_radius: f64,
    /// Height of the point tested against the frustum.
    pub height: f64,
    /// Longest single wander move, in metres.
    pub wander_step: f64,
    /// How far inside the edge of the view the returning dog aims, in metres.
    pub frame_margin: f64,
}

impl Default for DogParams {
    fn default() -> Self {
        DogParams {
            speed: 4.0,
            tick_seconds: 0.1,
            follow_radius: 8.0,
            height: 0.5,
            wander_step: 0.2,
            frame_margin: 0.5,
        }
    }
}

impl DogParams {
    pub fn step_length(&self) -> f64 {
        self.speed * self.tick_seconds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DogMode {
    InView,
    Returning,
}

impl DogMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DogMode::InView => "in_view",
            DogMode::Returning => "returning",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DogState {
    pub position: Point,
    pub mode: DogMode,
    pub current_target: Option<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DogTick {
    pub tick: usize,
    /// Position after this tick's move.
    pub x: f64,
    pub z: f64,
    /// Mode chosen from the position at the start of the tick.
    pub mode: DogMode,
    /// Whether the position after the move is inside the view.
    pub in_view: bool,
    pub target: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DogTrace {
    pub ticks: Vec<DogTick>,
    /// Share of ticks spent in `InView` mode.
    pub in_view_fraction: f64,
}

impl DogTrace {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["tick", "dog_x", "dog_z", "mode", "in_view"])
            .expect("in-memory write");
        for t in &self.ticks {
            w.write_record([
                t.tick.to_string(),
                t.x.to_string(),
                t.z.to_string(),
                t.mode.as_str().to_string(),
                t.in_view.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// The frustum's horizontal slice at height `h`, with every edge moved
/// `margin` metres inward, as a counter-clockwise convex polygon (empty if the slice misses).
pub fn frustum_slice(frustum: &Frustum, camera: &CameraModel, eye: Vec3, h: f64, margin: f64) -> Vec<Point> {
    let r = camera.far + 1.0;
    let mut poly = LabeledPolygon::rect([eye.x - r, eye.z - r], [eye.x + r, eye.z + r], ());
    for plane in &frustum.planes {
        let n = plane.normal;
        let c = n.y * h + plane.offset;
        let horizontal = n.x.hypot(n.z);
        if horizontal < 1e-12 {
            if c < 0.0 {
                return Vec::new();
            }
            continue;
        }
        // Shift each edge `margin` metres inward along the ground:
        // n.x x + n.z z + c >= margin * |n_h|.
        poly = poly.clip([-n.x, -n.z], c - margin * horizontal, ());
        if poly.vertices.len() < 3 {
            return Vec::new();
        }
    }
    poly.vertices
}

fn contained(frustum: &Frustum, p: Point, h: f64) -> bool {
    frustum.contains(Vec3::new(p[0], h, p[1]))
}

/// Poses walking from `from` to `to` at `step` metres per tick, facing the
/// direction of travel, then `hold` extra ticks standing at the end.
pub fn straight_walk(from: Point, to: Point, step: f64, eye_height: f64, hold: usize) -> Vec<Pose> {
    polyline_walk(&[from, to], step, eye_height, hold)
}

/// Poses along a polyline at `step` metres per tick, facing along the
/// current segment, then `hold` extra ticks standing at the last point.
pub fn polyline_walk(points: &[Point], step: f64, eye_height: f64, hold: usize) -> Vec<Pose> {
    let Some(&first) = points.first() else {
        return Vec::new();
    };
    let pose = |p: Point, yaw: f64| Pose::new(Vec3::new(p[0], eye_height, p[1]), yaw);
    let segments: Vec<(Point, Point)> = points
        .windows(2)
        .filter(|w| polygon::distance(w[0], w[1]) > 0.0)
        .map(|w| (w[0], w[1]))
        .collect();
    let heading = |(a, b): (Point, Point)| yaw_towards(b[0] - a[0], b[1] - a[1]);
    let mut yaw = segments.first().map_or(0.0, |s| heading(*s));
    let mut poses = vec![pose(first, yaw)];
    let mut pos = first;
    let mut seg = 0;
    while step > 0.0 && seg < segments.len() {
        let mut left = step;
        while seg < segments.len() {
            let end = segments[seg].1;
            let d = polygon::distance(pos, end);
            yaw = heading(segments[seg]);
            if d > left {
                let t = left / d;
                pos = [pos[0] + (end[0] - pos[0]) * t, pos[1] + (end[1] - pos[1]) * t];
                break;
            }
            left -= d;
            pos = end;
            seg += 1;
        }
        poses.push(pose(pos, yaw));
    }
    let last = *poses.last().expect("at least the start pose");
    poses.extend(std::iter::repeat_n(last, hold));
    poses
}

/// Moves from `from` towards `to` by at most `step`, halving the step until
/// the landing point is on land; stays put if no halving works.
fn step_on_land(map: &IslandMap, from: Point, to: Point, step: f64) -> Point {
    let d = polygon::distance(from, to);
    if d == 0.0 {
        return from;
    }
    let mut len = step.min(d);
    for _ in 0..8 {
        let t = len / d;
        let p = [from[0] + (to[0] - from[0]) * t, from[1] + (to[1] - from[1]) * t];
        if map.on_land(p) {
            return p;
        }
        len /= 2.0;
    }
    from
}

/// Steps towards the next cell on a land route to `to`, aiming at the middle
/// of the edge shared with that cell.
fn route_step(map: &IslandMap, from: Point, to: Point, step: f64) -> Point {
    let (Some(a), Some(b)) = (map.cell_at(from), map.cell_at(to)) else {
        return from;
    };
    if a == b {
        return from;
    }
    let Ok(route) = super::lay_path(map, a, b) else {
        return from;
    };
    let next = route[1];
    let waypoint = match super::voronoi::shared_edge(&map.cells, a, next) {
        Some((p, q)) if polygon::distance(from, [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]) > 1e-9 => {
            [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]
        }
        _ => map.cells[next].centroid,
    };
    step_on_land(map, from, waypoint, step)
}

/// Runs one tick per trajectory pose. The dog starts at `start`. A returning
/// dog walks straight at its target and falls back to a land route around
/// water.
pub fn simulate_dog(
    map: &IslandMap,
    trajectory: &[Pose],
    camera: &CameraModel,
    params: &DogParams,
    start: Point,
    seed: u64,
) -> DogTrace {
    let mut rng = stream(seed, Domain::Dog, 0, 0);
    let mut state = DogState {
        position: start,
        mode: DogMode::Returning,
        current_target: None,
    };
    let h = params.height;
    let mut ticks = Vec::with_capacity(trajectory.len());
    for (tick, pose) in trajectory.iter().enumerate() {
        let frustum = Frustum::new(pose, camera);
        let player = [pose.position.x, pose.position.z];
        if contained(&frustum, state.position, h) {
            state.mode = DogMode::InView;
            state.current_target = None;
            for _ in 0..8 {
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let len = rng.random_range(0.0..=params.wander_step);
                let p = [
                    state.position[0] + len * angle.sin(),
                    state.position[1] + len * angle.cos(),
                ];
                if contained(&frustum, p, h) && polygon::distance(p, player) <= params.follow_radius && map.on_land(p) {
                    state.position = p;
                    break;
                }
            }
        } else {
            state.mode = DogMode::Returning;
            let slice = frustum_slice(&frustum, camera, pose.position, h, params.frame_margin);
            let nearest = polygon::closest_in_convex(&slice, state.position);
            state.current_target = match nearest {
                Some(t) if map.on_land(t) => Some(t),
                _ => map
                    .cells
                    .iter()
                    .enumerate()
                    .filter(|(i, c)| map.land[*i] && polygon::convex_contains(&slice, c.centroid))
                    .map(|(_, c)| c.centroid)
                    .min_by(|a, b| {
                        polygon::distance(*a, state.position).total_cmp(&polygon::distance(*b, state.position))
                    }),
            };
            if let Some(t) = state.current_target {
                let direct = step_on_land(map, state.position, t, params.step_length());
                state.position = if direct != state.position {
                    direct
                } else {
                    route_step(map, state.position, t, params.step_length())
                };
            }
        }
        ticks.push(DogTick {
            tick,
            x: state.position[0],
            z: state.position[1],
            mode: state.mode,
            in_view: contained(&frustum, state.position, h),
            target: state.current_target,
        });
    }
    let in_view = ticks.iter().filter(|t| t.mode == DogMode::InView).count();
    DogTrace {
        in_view_fraction: if ticks.is_empty() {
            0.0
        } else {
            in_view as f64 / ticks.len() as f64
        },
        ticks,
    }
}

/// Ground distance from `p` to the unshrunk frustum slice at height `h`.
pub fn distance_to_view(pose: &Pose, camera: &CameraModel, h: f64, p: Point) -> f64 {
    let frustum = Frustum::new(pose, camera);
    let slice = frustum_slice(&frustum, camera, pose.position, h, 0.0);
    polygon::closest_in_convex(&slice, p).map_or(f64::INFINITY, |q| polygon::distance(p, q))
}
