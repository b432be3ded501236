//! Brute-force oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::PathBuf;

use vantage::explorer::{
    point_free, run_exploration_observed, state_violations, Exploration, ExploreParams, PointGrid, PointState,
};
use vantage::geometry::{Aabb, CameraModel, Pose, Rect, Vec3};
use vantage::islandgen::{DecorationKind, DecorationParams, IslandMap};
use vantage::navgrid::{Cell, NavGrid};
use vantage::template::{load_template, LevelTemplate};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn fixture(name: &str) -> LevelTemplate {
    let text = std::fs::read_to_string(data_dir().join(name)).expect("fixture exists");
    load_template(&text).expect("fixture is valid")
}

pub fn square_template(size: f64, start: [f64; 2], end: [f64; 2]) -> LevelTemplate {
    load_template(&format!(
        r#"{{"surface": {{"x": {size}, "z": {size}}}, "start": [{}, {}], "end": [{}, {}], "markers": []}}"#,
        start[0], start[1], end[0], end[1]
    ))
    .expect("valid square template")
}

/// First sampled parameter in `[0, t_max]` at which the ray is inside the
/// box, together with the smallest distance to the box surface seen along
/// the samples.
pub fn ray_oracle(origin: Vec3, dir: Vec3, b: &Aabb, t_max: f64, steps: usize) -> (Option<f64>, f64) {
    let mut first = None;
    let mut closest = f64::INFINITY;
    for k in 0..=steps {
        let t = t_max * k as f64 / steps as f64;
        let p = origin + dir * t;
        closest = closest.min(b.boundary_distance(p));
        if first.is_none() && b.contains(p) {
            first = Some(t);
        }
    }
    (first, closest)
}

/// Whether any sample strictly inside the segment (beyond `inset` of its
/// length from either end) lies in an occluder, plus the closest approach of
/// the samples to any occluder surface.
pub fn segment_oracle(p: Vec3, q: Vec3, occluders: &[Aabb], inset: f64, steps: usize) -> (bool, f64) {
    let mut hit = false;
    let mut closest = f64::INFINITY;
    for k in 0..=steps {
        let t = inset + (1.0 - 2.0 * inset) * k as f64 / steps as f64;
        let x = p + (q - p) * t;
        for b in occluders {
            closest = closest.min(b.boundary_distance(x));
            hit |= b.contains(x);
        }
    }
    (hit, closest)
}

/// Pinhole projection test: camera-space depth within `[near, far]` and
/// image coordinates within the half-extents at that depth. Also returns the
/// smallest slack over the six conditions.
pub fn projection_oracle(pose: &Pose, camera: &CameraModel, p: Vec3) -> (bool, f64) {
    let d = p - pose.position;
    let depth = d.dot(pose.forward());
    let x = d.dot(pose.right());
    let y = d.y;
    let th = camera.tan_half_horizontal();
    let tv = camera.tan_half_vertical();
    let slacks = [
        depth - camera.near,
        camera.far - depth,
        depth * th - x,
        depth * th + x,
        depth * tv - y,
        depth * tv + y,
    ];
    let min = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    (min >= 0.0, min)
}

/// Shortest 4-connected path length in cells (edges), by BFS.
pub fn bfs_distance(grid: &NavGrid, start: Cell, goal: Cell) -> Option<usize> {
    if grid.is_blocked(start) || grid.is_blocked(goal) {
        return None;
    }
    let mut dist = vec![usize::MAX; grid.width * grid.height];
    dist[grid.index(start)] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        if c == goal {
            return Some(dist[grid.index(c)]);
        }
        for n in grid.neighbors(c) {
            if !grid.is_blocked(n) && dist[grid.index(n)] == usize::MAX {
                dist[grid.index(n)] = dist[grid.index(c)] + 1;
                queue.push_back(n);
            }
        }
    }
    None
}

/// Free lattice points reachable from `start` where a step needs both end
/// points and the cell straddling their midpoint to be free.
pub fn lattice_flood(grid: &NavGrid, points: &PointGrid, start: usize) -> Vec<bool> {
    let mut seen = vec![false; points.len()];
    if !point_free(grid, &points.points[start]) {
        return seen;
    }
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let (r, c) = points.row_col(u);
        let mut next = Vec::new();
        if c + 1 < points.nx {
            next.push(u + 1);
        }
        if c > 0 {
            next.push(u - 1);
        }
        if r + 1 < points.nz {
            next.push(u + points.nx);
        }
        if r > 0 {
            next.push(u - points.nx);
        }
        for v in next {
            let (a, b) = (points.points[u].ground, points.points[v].ground);
            let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let mid_free = grid.cell_of(mid[0], mid[1]).is_some_and(|c| !grid.is_blocked(c));
            if !seen[v] && point_free(grid, &points.points[v]) && mid_free {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Point-in-polygon by ray casting, independent of the convexity-based test
/// used by the library.
pub fn point_in_polygon(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + n - 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Distance from `p` to the polygon's boundary.
pub fn boundary_distance_2d(poly: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|k| {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
            };
            (p[0] - a[0] - d[0] * t).hypot(p[1] - a[1] - d[1] * t)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Land cells connected over cell adjacency, counted by flood fill.
pub fn land_component_count(map: &IslandMap) -> usize {
    let mut seen = vec![false; map.cells.len()];
    let mut count = 0;
    for s in 0..map.cells.len() {
        if !map.land[s] || seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &map.cells[u].neighbors {
                if map.land[v] && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    count
}

/// Largest centroid distance over all pairs of land cells.
pub fn max_land_pair_distance(map: &IslandMap) -> f64 {
    let land: Vec<[f64; 2]> = (0..map.cells.len())
        .filter(|&i| map.land[i])
        .map(|i| map.cells[i].centroid)
        .collect();
    let mut best: f64 = 0.0;
    for (k, a) in land.iter().enumerate() {
        for b in &land[k + 1..] {
            best = best.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    best
}

/// Hop count between two land cells over land adjacency, by BFS.
pub fn land_hops(map: &IslandMap, from: usize, to: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; map.cells.len()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            return Some(dist[u]);
        }
        for &v in &map.cells[u].neighbors {
            if map.land[v] && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    None
}

/// Points this close to a cell boundary count as inside either cell.
pub const EDGE_TOL: f64 = 1e-7;

/// Every breach of the island rules, checked against the oracles above:
/// one land component, decorations on the right side of the shore and
/// inside their cell, fences on land-water edges, per-cell spacing, the
/// farthest-apart endpoints and a fewest-hop path over land.
pub fn island_violations(map: &IslandMap) -> Vec<String> {
    let mut out = Vec::new();
    let components = land_component_count(map);
    if components != 1 {
        out.push(format!("land has {components} components"));
    }
    let params = &DecorationParams::default();
    for d in &map.decorations {
        let p = [d.x, d.z];
        let poly = &map.cells[d.cell].polygon;
        let in_cell = point_in_polygon(poly, p) || boundary_distance_2d(poly, p) < EDGE_TOL;
        let ok = match d.kind {
            DecorationKind::Tree
            | DecorationKind::Rock
            | DecorationKind::PathStone
            | DecorationKind::Spawn
            | DecorationKind::Campsite => map.land[d.cell] && in_cell,
            DecorationKind::Lilypad => !map.land[d.cell] && in_cell,
            DecorationKind::FenceSegment => d.segment.is_some_and(|[a, b]| {
                let on =
                    |q: &[[f64; 2]]| boundary_distance_2d(q, a) < EDGE_TOL && boundary_distance_2d(q, b) < EDGE_TOL;
                let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
                map.land[d.cell]
                    && on(poly)
                    && map.cells[d.cell]
                        .neighbors
                        .iter()
                        .any(|&j| !map.land[j] && on(&map.cells[j].polygon))
                    && (mid[0] - d.x).abs() < 1e-12
                    && (mid[1] - d.z).abs() < 1e-12
            }),
        };
        if !ok {
            out.push(format!("{d:?} breaks its placement rule"));
        }
    }
    for (kind, spacing) in [
        (DecorationKind::Tree, params.spacing_tree),
        (DecorationKind::Rock, params.spacing_rock),
        (DecorationKind::Lilypad, params.spacing_lily),
    ] {
        let items: Vec<_> = map.decorations.iter().filter(|d| d.kind == kind).collect();
        for (k, a) in items.iter().enumerate() {
            for b in &items[k + 1..] {
                if a.cell == b.cell && (a.x - b.x).hypot(a.z - b.z) < spacing - 1e-12 {
                    out.push(format!("{kind:?} pair in cell {} closer than {spacing}", a.cell));
                }
            }
        }
    }

    let (Some(spawn), Some(camp)) = (map.spawn, map.campsite) else {
        if map.land_count() >= 2 {
            out.push("spawn or campsite missing".into());
        }
        return out;
    };
    if spawn == camp || !map.land[spawn] || !map.land[camp] {
        out.push(format!("endpoints {spawn} and {camp} are not two land cells"));
    }
    let (s, c) = (map.cells[spawn].centroid, map.cells[camp].centroid);
    let best = max_land_pair_distance(map);
    if ((s[0] - c[0]).hypot(s[1] - c[1]) - best).abs() > 1e-9 {
        out.push(format!("endpoints are not the farthest land pair ({best})"));
    }
    let path = &map.path_cells;
    if path.first() != Some(&spawn) || path.last() != Some(&camp) {
        out.push("path does not run from spawn to campsite".into());
    }
    if !path.iter().all(|&k| map.land[k]) {
        out.push("path leaves land".into());
    }
    if !path.windows(2).all(|w| map.cells[w[0]].neighbors.contains(&w[1])) {
        out.push("path steps between non-adjacent cells".into());
    }
    if !path.is_empty() && Some(path.len() - 1) != land_hops(map, spawn, camp) {
        out.push("path is not fewest-hop".into());
    }
    out
}

/// Runs the explorer and returns it with every breach of the point-state
/// rules: the full belief is checked at every tick, "Lapsed only after an
/// earlier Frontier" across the per-tick snapshots, and one lattice step at
/// most per tick.
pub fn explore_with_checks(t: &LevelTemplate, occluders: &[Aabb]) -> (Exploration, Vec<String>) {
    let footprints: Vec<Rect> = occluders.iter().map(Aabb::footprint).collect();
    let mut out = Vec::new();
    let mut ticks = 0;
    let ex = run_exploration_observed(
        t,
        occluders,
        &footprints,
        &ExploreParams::default(),
        |tick, belief, points| {
            out.extend(
                state_violations(belief, points)
                    .into_iter()
                    .map(|v| format!("tick {tick}: {v}")),
            );
            ticks += 1;
        },
    )
    .expect("exploration runs");
    if ticks != ex.snapshots.len() || ticks != ex.trajectory.len() {
        out.push("tick, snapshot and trajectory counts differ".into());
    }

    let mut was_frontier = vec![false; ex.points.len()];
    for (tick, snap) in ex.snapshots.iter().enumerate() {
        for (i, s) in snap.iter().enumerate() {
            let near_visible = ex
                .points
                .neighbors(i)
                .any(|(j, _)| snap[j] == PointState::CurrentlyVisible);
            match s {
                PointState::Frontier if !near_visible => {
                    out.push(format!("tick {tick}: frontier {i} has no visible neighbor"))
                }
                PointState::Lapsed if near_visible || (tick > 0 && !was_frontier[i]) => out.push(format!(
                    "tick {tick}: lapsed {i} is near a visible point or was never a frontier"
                )),
                _ => {}
            }
        }
        for (i, s) in snap.iter().enumerate() {
            was_frontier[i] |= *s == PointState::Frontier;
        }
    }
    for w in ex.trajectory.windows(2) {
        let step = (w[1].x - w[0].x).abs() + (w[1].z - w[0].z).abs();
        if step > 1e-9 && (step - ex.points.spacing).abs() > 1e-9 {
            out.push(format!("tick {}: moved {step}", w[1].tick));
        }
    }
    (ex, out)
}
