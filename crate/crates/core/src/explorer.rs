//! Curiosity-driven exploration over a lattice of points laid on the level.
//!
//! The agent knows only what it has seen. Each tick it looks around from its
//! eye, classifies every lattice point as currently visible, frontier (never
//! seen, believed empty, next to something visible) or lapsed (a frontier
//! that dropped out of view before being seen), walks one lattice step
//! towards the nearest frontier on its believed graph, and learns from steps
//! that turn out to be blocked.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{segment_occluded, yaw_towards, Aabb, CameraModel, Frustum, GeometryError, Pose, Rect, Vec3};
use crate::navgrid::{build_navgrid, NavError, NavGrid, DEFAULT_AGENT_RADIUS, DEFAULT_CELL_SIZE};
use crate::template::{format_violations, LevelTemplate, Violation};

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("point spacing {spacing} must be positive and no larger than the surface")]
    BadSpacing { spacing: f64 },
    #[error("start point ({x}, {z}) is blocked")]
    StartBlocked { x: f64, z: f64 },
    #[error("template is invalid: {}", format_violations(.0))]
    InvalidTemplate(Vec<Violation>),
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error(transparent)]
    Camera(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointState {
    /// Not visible, not a frontier, not lapsed.
    Unobserved,
    CurrentlyVisible,
    Frontier,
    Lapsed,
}

impl PointState {
    pub fn letter(self) -> char {
        match self {
            PointState::Unobserved => 'U',
            PointState::CurrentlyVisible => 'V',
            PointState::Frontier => 'F',
            PointState::Lapsed => 'L',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub ground: [f64; 2],
    /// The same point lifted to eye height; this is what vision tests target.
    pub probe: Vec3,
}

/// Lattice of `nx * nz` points, row-major with rows along z.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGrid {
    pub nx: usize,
    pub nz: usize,
    pub spacing: f64,
    pub points: Vec<GridPoint>,
}

// Direction bits for the 4-neighborhood.
const EAST: u8 = 1;
const WEST: u8 = 2;
const NORTH: u8 = 4;
const SOUTH: u8 = 8;

fn opposite(bit: u8) -> u8 {
    match bit {
        EAST => WEST,
        WEST => EAST,
        NORTH => SOUTH,
        _ => NORTH,
    }
}

impl PointGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn row_col(&self, i: usize) -> (usize, usize) {
        (i / self.nx, i % self.nx)
    }

    /// Neighbors in a fixed order (east, west, north, south) with their
    /// direction bit.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, u8)> {
        let (r, c) = self.row_col(i);
        let nx = self.nx;
        let nz = self.nz;
        [
            (c + 1 < nx).then(|| (i + 1, EAST)),
            (c > 0).then(|| (i - 1, WEST)),
            (r + 1 < nz).then(|| (i + nx, NORTH)),
            (r > 0).then(|| (i - nx, SOUTH)),
        ]
        .into_iter()
        .flatten()
    }

    /// Lattice point nearest to a ground position (lowest index on ties).
    pub fn nearest(&self, x: f64, z: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (p.ground[0] - x).hypot(p.ground[1] - z);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

fn axis_coords(extent: f64, spacing: f64) -> Vec<f64> {
    let steps = ((extent / spacing) - 1e-9).ceil() as usize;
    (0..=steps).map(|i| (i as f64 * spacing).min(extent)).collect()
}

/// Regular lattice covering the surface, corners included. When the extent
/// is not a multiple of the spacing the last gap is shorter.
pub fn overlay_grid(template: &LevelTemplate, spacing: f64) -> Result<PointGrid, ExploreError> {
    let (sx, sz) = (template.surface.x, template.surface.z);
    if !(spacing > 0.0) || spacing > sx || spacing > sz {
        return Err(ExploreError::BadSpacing { spacing });
    }
    let xs = axis_coords(sx, spacing);
    let zs = axis_coords(sz, spacing);
    let mut points = Vec::with_capacity(xs.len() * zs.len());
    for &z in &zs {
        for &x in &xs {
            points.push(GridPoint {
                ground: [x, z],
                probe: Vec3::new(x, template.eye_height, z),
            });
        }
    }
    Ok(PointGrid {
        nx: xs.len(),
        nz: zs.len(),
        spacing,
        points,
    })
}

/// True walkability of a lattice point: its ground cell is unblocked.
pub fn point_free(grid: &NavGrid, p: &GridPoint) -> bool {
    grid.cell_of(p.ground[0], p.ground[1])
        .is_some_and(|c| !grid.is_blocked(c))
}

/// Whether walking straight between two lattice points stays on free cells.
pub fn step_clear(grid: &NavGrid, a: &GridPoint, b: &GridPoint) -> bool {
    grid.segment_clear((a.ground[0], a.ground[1]), (b.ground[0], b.ground[1]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    pub states: Vec<PointState>,
    /// False once the point has been seen to stand on a blocked cell.
    pub believed_empty: Vec<bool>,
    pub seen: Vec<bool>,
    pub was_frontier: Vec<bool>,
    /// Confirmed traversable directions per point (direction bitmask).
    pub edges: Vec<u8>,
    /// Directions whose traversal has failed; never re-added to `edges`.
    pub failed: Vec<u8>,
    pub visit_count: Vec<u32>,
}

impl BeliefState {
    pub fn new(n: usize) -> Self {
        BeliefState {
            states: vec![PointState::Unobserved; n],
            believed_empty: vec![true; n],
            seen: vec![false; n],
            was_frontier: vec![false; n],
            edges: vec![0; n],
            failed: vec![0; n],
            visit_count: vec![0; n],
        }
    }

    pub fn has_edge(&self, i: usize, bit: u8) -> bool {
        self.edges[i] & bit != 0
    }

    fn fail_edge(&mut self, i: usize, j: usize, bit: u8) {
        self.edges[i] &= !bit;
        self.edges[j] &= !opposite(bit);
        self.failed[i] |= bit;
        self.failed[j] |= opposite(bit);
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(|e| e.count_ones() as usize).sum::<usize>() / 2
    }
}

/// Updates beliefs from one view. The agent's own lattice point (if the pose
/// stands on one) always counts as visible.
pub fn observe(
    pose: &Pose,
    camera: &CameraModel,
    belief: &mut BeliefState,
    occluders: &[Aabb],
    true_grid: &NavGrid,
    points: &PointGrid,
) {
    observe_all(std::slice::from_ref(pose), camera, belief, occluders, true_grid, points);
}

/// Updates beliefs from several views taken in the same tick; a point is
/// visible when any of the views sees it.
pub fn observe_all(
    poses: &[Pose],
    camera: &CameraModel,
    belief: &mut BeliefState,
    occluders: &[Aabb],
    true_grid: &NavGrid,
    points: &PointGrid,
) {
    assert_eq!(belief.states.len(), points.len(), "belief does not match the lattice");
    let views: Vec<(Frustum, Vec3, Option<usize>)> = poses
        .iter()
        .map(|pose| {
            let eye = pose.position;
            let own = points.nearest(eye.x, eye.z);
            let own_here = points.points[own].ground[0] == eye.x && points.points[own].ground[1] == eye.z;
            (Frustum::new(pose, camera), eye, own_here.then_some(own))
        })
        .collect();

    let n = points.len();
    let mut visible = vec![false; n];
    for (i, p) in points.points.iter().enumerate() {
        let sees = views.iter().any(|(frustum, eye, own)| {
            *own == Some(i) || (frustum.contains(p.probe) && !segment_occluded(*eye, p.probe, occluders))
        });
        if !sees {
            continue;
        }
        belief.seen[i] = true;
        if point_free(true_grid, p) {
            belief.believed_empty[i] = true;
            visible[i] = true;
        } else {
            belief.believed_empty[i] = false;
            for (j, bit) in points.neighbors(i) {
                belief.edges[i] &= !bit;
                belief.edges[j] &= !opposite(bit);
            }
        }
    }

    for i in 0..n {
        let near_visible = points.neighbors(i).any(|(j, _)| visible[j]);
        let candidate = !belief.seen[i] && belief.believed_empty[i];
        belief.states[i] = if visible[i] {
            PointState::CurrentlyVisible
        } else if candidate && near_visible {
            belief.was_frontier[i] = true;
            PointState::Frontier
        } else if candidate && belief.was_frontier[i] {
            PointState::Lapsed
        } else {
            PointState::Unobserved
        };
    }

    for i in 0..n {
        if !(belief.seen[i] && belief.believed_empty[i]) {
            continue;
        }
        for (j, bit) in points.neighbors(i) {
            if belief.seen[j] && belief.believed_empty[j] && belief.failed[i] & bit == 0 {
                belief.edges[i] |= bit;
                belief.edges[j] |= opposite(bit);
            }
        }
    }
}

/// Breadth-first search over the believed graph: confirmed edges, plus
/// tentative steps from a seen empty point into an unseen, believed-empty
/// neighbor along a direction that has not failed.
fn plan_bfs(belief: &BeliefState, points: &PointGrid, from: usize) -> (Vec<usize>, Vec<usize>) {
    let n = points.len();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    dist[from] = 0;
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        if !belief.seen[u] && u != from {
            continue;
        }
        for (v, bit) in points.neighbors(u) {
            if dist[v] != usize::MAX {
                continue;
            }
            let confirmed = belief.has_edge(u, bit);
            let tentative = !belief.seen[v] && belief.believed_empty[v] && belief.failed[u] & bit == 0;
            if confirmed || tentative {
                dist[v] = dist[u] + 1;
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    (dist, parent)
}

/// Nearest frontier point by believed-graph distance (lowest index on ties);
/// if no frontier is reachable, the nearest lapsed point.
pub fn choose_target(belief: &BeliefState, points: &PointGrid, agent_point: usize) -> Option<usize> {
    let (dist, _) = plan_bfs(belief, points, agent_point);
    let nearest = |state: PointState| {
        (0..points.len())
            .filter(|&i| belief.states[i] == state && dist[i] != usize::MAX)
            .min_by_key(|&i| (dist[i], i))
    };
    nearest(PointState::Frontier).or_else(|| nearest(PointState::Lapsed))
}

/// Believed-graph route from `from` to `to`, both inclusive.
pub fn plan_route(belief: &BeliefState, points: &PointGrid, from: usize, to: usize) -> Option<Vec<usize>> {
    let (dist, parent) = plan_bfs(belief, points, from);
    if dist[to] == usize::MAX {
        return None;
    }
    let mut route = vec![to];
    let mut cur = to;
    while cur != from {
        cur = parent[cur];
        route.push(cur);
    }
    route.reverse();
    Some(route)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExploreParams {
    pub point_spacing: f64,
    /// Tick budget; `None` means ten ticks per lattice point.
    pub budget: Option<usize>,
    pub camera: CameraModel,
    pub cell_size: f64,
    pub agent_radius: f64,
}

impl Default for ExploreParams {
    fn default() -> Self {
        ExploreParams {
            point_spacing: 1.0,
            budget: None,
            camera: CameraModel::default(),
            cell_size: DEFAULT_CELL_SIZE,
            agent_radius: DEFAULT_AGENT_RADIUS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    FrontierExhausted,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationReport {
    pub ticks_used: usize,
    /// Seen fraction of the free points reachable from the start.
    pub points_observed_fraction: f64,
    /// Seen fraction of all free points on the map.
    pub coverage: f64,
    pub stuck_events: usize,
    pub termination: Termination,
    pub total_points: usize,
    pub free_points: usize,
    pub reachable_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub tick: usize,
    pub x: f64,
    pub z: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exploration {
    pub report: ExplorationReport,
    pub points: PointGrid,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Point states after each tick's observation, starting at tick 0.
    pub snapshots: Vec<Vec<PointState>>,
    pub belief: BeliefState,
    pub true_grid: NavGrid,
}

/// Views in one full turn.
const SCAN_STEPS: usize = 8;

fn scan_poses(ground: [f64; 2], yaw: f64, eye_height: f64) -> Vec<Pose> {
    (0..SCAN_STEPS)
        .map(|k| {
            let turn = yaw + k as f64 * std::f64::consts::TAU / SCAN_STEPS as f64;
            Pose::new(Vec3::new(ground[0], eye_height, ground[1]), turn)
        })
        .collect()
}

/// Free lattice points reachable from `start` by clear single steps.
pub fn reachable_points(grid: &NavGrid, points: &PointGrid, start: usize) -> Vec<bool> {
    let mut reach = vec![false; points.len()];
    if !point_free(grid, &points.points[start]) {
        return reach;
    }
    reach[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for (v, _) in points.neighbors(u) {
            if !reach[v] && step_clear(grid, &points.points[u], &points.points[v]) {
                reach[v] = true;
                queue.push_back(v);
            }
        }
    }
    reach
}

/// Explores the level from the lattice point nearest the template start
/// until no frontier or lapsed point is reachable on the believed graph, or
/// the tick budget runs out. At the start and after every failed step the
/// tick's observation is a full turn of eight views instead of one.
pub fn run_exploration(
    template: &LevelTemplate,
    occluders: &[Aabb],
    params: &ExploreParams,
) -> Result<Exploration, ExploreError> {
    let footprints: Vec<Rect> = occluders.iter().map(Aabb::footprint).collect();
    run_exploration_scene(template, occluders, &footprints, params)
}

/// Like [`run_exploration`] with explicit walk-blocking footprints.
pub fn run_exploration_scene(
    template: &LevelTemplate,
    occluders: &[Aabb],
    footprints: &[Rect],
    params: &ExploreParams,
) -> Result<Exploration, ExploreError> {
    run_exploration_observed(template, occluders, footprints, params, |_, _, _| {})
}

/// Like [`run_exploration_scene`], calling `on_tick(tick, belief, points)`
/// once per tick right after the belief is updated.
pub fn run_exploration_observed(
    template: &LevelTemplate,
    occluders: &[Aabb],
    footprints: &[Rect],
    params: &ExploreParams,
    mut on_tick: impl FnMut(usize, &BeliefState, &PointGrid),
) -> Result<Exploration, ExploreError> {
    let violations = template.validate();
    if !violations.is_empty() {
        return Err(ExploreError::InvalidTemplate(violations));
    }
    params.camera.validate()?;
    let points = overlay_grid(template, params.point_spacing)?;
    let grid = build_navgrid(template, footprints, params.cell_size, params.agent_radius)?;
    let eye_h = template.eye_height;
    let camera = &params.camera;

    let mut agent = points.nearest(template.start.x, template.start.z);
    let start = points.points[agent];
    if !point_free(&grid, &start) {
        return Err(ExploreError::StartBlocked {
            x: start.ground[0],
            z: start.ground[1],
        });
    }
    let budget = params.budget.unwrap_or(10 * points.len());

    let mut belief = BeliefState::new(points.len());
    belief.visit_count[agent] = 1;
    let mut yaw = 0.0;
    let mut trajectory = vec![TrajectoryPoint {
        tick: 0,
        x: start.ground[0],
        z: start.ground[1],
        yaw,
    }];
    let mut snapshots = Vec::new();
    let mut stuck_events = 0;
    let mut need_scan = true;
    let mut ticks = 0;

    let termination = loop {
        let here = points.points[agent];
        let poses = if need_scan {
            need_scan = false;
            scan_poses(here.ground, yaw, eye_h)
        } else {
            vec![Pose::new(Vec3::new(here.ground[0], eye_h, here.ground[1]), yaw)]
        };
        observe_all(&poses, camera, &mut belief, occluders, &grid, &points);
        snapshots.push(belief.states.clone());
        on_tick(ticks, &belief, &points);
        if ticks >= budget {
            break Termination::BudgetExhausted;
        }
        let Some(target) = choose_target(&belief, &points, agent) else {
            break Termination::FrontierExhausted;
        };
        let route = plan_route(&belief, &points, agent, target).expect("target was reachable");
        let next = route[1];
        let there = points.points[next];
        let bit = points
            .neighbors(agent)
            .find(|&(j, _)| j == next)
            .map(|(_, b)| b)
            .expect("route steps are 4-adjacent");
        ticks += 1;
        if step_clear(&grid, &here, &there) {
            yaw = yaw_towards(there.ground[0] - here.ground[0], there.ground[1] - here.ground[1]);
            agent = next;
            belief.visit_count[agent] += 1;
        } else {
            belief.fail_edge(agent, next, bit);
            stuck_events += 1;
            need_scan = true;
        }
        let p = points.points[agent];
        trajectory.push(TrajectoryPoint {
            tick: ticks,
            x: p.ground[0],
            z: p.ground[1],
            yaw,
        });
    };

    let start_idx = points.nearest(template.start.x, template.start.z);
    let reach = reachable_points(&grid, &points, start_idx);
    let free: Vec<bool> = points.points.iter().map(|p| point_free(&grid, p)).collect();
    let count = |f: &dyn Fn(usize) -> bool| (0..points.len()).filter(|&i| f(i)).count();
    let reachable = count(&|i| reach[i]);
    let free_total = count(&|i| free[i]);
    let seen_reachable = count(&|i| reach[i] && belief.seen[i]);
    let seen_free = count(&|i| free[i] && belief.seen[i]);
    let ratio = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };

    Ok(Exploration {
        report: ExplorationReport {
            ticks_used: ticks,
            points_observed_fraction: ratio(seen_reachable, reachable),
            coverage: ratio(seen_free, free_total),
            stuck_events,
            termination,
            total_points: points.len(),
            free_points: free_total,
            reachable_points: reachable,
        },
        points,
        trajectory,
        snapshots,
        belief,
        true_grid: grid,
    })
}

/// Checks the point-state rules on one belief; returns a message per breach.
pub fn state_violations(belief: &BeliefState, points: &PointGrid) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        let near_visible = points
            .neighbors(i)
            .any(|(j, _)| belief.states[j] == PointState::CurrentlyVisible);
        match belief.states[i] {
            PointState::CurrentlyVisible if !belief.believed_empty[i] => {
                out.push(format!("point {i} is visible but believed blocked"))
            }
            PointState::Frontier if !(belief.believed_empty[i] && near_visible) => out.push(format!(
                "frontier point {i} is not an empty neighbor of a visible point"
            )),
            PointState::Lapsed if !belief.was_frontier[i] || near_visible => out.push(format!(
                "lapsed point {i} was never a frontier or is next to a visible point"
            )),
            _ => {}
        }
        for (j, bit) in points.neighbors(i) {
            if belief.has_edge(i, bit) && !(belief.believed_empty[i] && belief.believed_empty[j]) {
                out.push(format!("edge {i}-{j} touches a believed-blocked point"));
            }
            if belief.has_edge(i, bit) && belief.failed[i] & bit != 0 {
                out.push(format!("edge {i}-{j} was re-added after failing"));
            }
        }
    }
    out
}

pub fn trajectory_to_csv(trajectory: &[TrajectoryPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tick", "x", "z", "yaw"]).expect("in-memory write");
    for t in trajectory {
        w.write_record([t.tick.to_string(), t.x.to_string(), t.z.to_string(), t.yaw.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

/// One row per tick and point: `tick, point_index, state` with state in
/// `{U, V, F, L}`.
pub fn snapshots_to_csv(snapshots: &[Vec<PointState>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tick", "point_index", "state"])
        .expect("in-memory write");
    for (tick, states) in snapshots.iter().enumerate() {
        for (i, s) in states.iter().enumerate() {
            w.write_record([tick.to_string(), i.to_string(), s.letter().to_string()])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
