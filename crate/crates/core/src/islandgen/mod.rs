//! Island maps: a Voronoi partition of a plane, a random walk over its cells
//! that raises land, water everywhere else, fences and plants along the
//! shore, a player spawn and campsite at opposite ends joined by a stone
//! path, and a companion dog that keeps returning into the player's view.

pub mod dog;
pub mod polygon;
pub mod voronoi;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream, Domain};
pub use dog::{polyline_walk, simulate_dog, straight_walk, DogMode, DogParams, DogState, DogTick, DogTrace};
use polygon::Point;
pub use voronoi::{build_voronoi, lloyd_step, random_sites, Voronoi, VoronoiCell};

#[derive(Debug, Error)]
pub enum IslandError {
    #[error("invalid island parameter: {0}")]
    BadParam(String),
    #[error("need at least two land cells, found {0}")]
    TooFewLandCells(usize),
    #[error("cell {0} is not land")]
    NotLand(usize),
    #[error("no land route between cells {0} and {1}")]
    NoRoute(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecorationParams {
    /// Probability that a given land-water edge is fenced.
    pub p_fence: f64,
    /// Expected trees per square metre of land.
    pub d_tree: f64,
    pub d_rock: f64,
    /// Expected lilypads per square metre of water.
    pub d_lily: f64,
    /// Minimum spacing between decorations of one kind within a cell.
    pub spacing_tree: f64,
    pub spacing_rock: f64,
    pub spacing_lily: f64,
}

impl Default for DecorationParams {
    fn default() -> Self {
        DecorationParams {
            p_fence: 0.5,
            d_tree: 0.01,
            d_rock: 0.004,
            d_lily: 0.01,
            spacing_tree: 2.0,
            spacing_rock: 1.5,
            spacing_lily: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IslandParams {
    pub extent: [f64; 2],
    pub n_sites: usize,
    pub walk_steps: usize,
    pub lay_path: bool,
    pub decoration: DecorationParams,
}

impl Default for IslandParams {
    fn default() -> Self {
        IslandParams {
            extent: [100.0, 100.0],
            n_sites: 200,
            walk_steps: 150,
            lay_path: true,
            decoration: DecorationParams::default(),
        }
    }
}

impl IslandParams {
    pub fn validate(&self) -> Result<(), IslandError> {
        if !self.extent.iter().all(|e| e.is_finite() && *e > 0.0) {
            return Err(IslandError::BadParam(format!(
                "extent {:?} must be positive",
                self.extent
            )));
        }
        if self.n_sites < 2 {
            return Err(IslandError::BadParam(format!(
                "n_sites {} must be at least 2",
                self.n_sites
            )));
        }
        if self.walk_steps < 1 {
            return Err(IslandError::BadParam("walk_steps must be at least 1".into()));
        }
        let d = &self.decoration;
        if !(0.0..=1.0).contains(&d.p_fence) {
            return Err(IslandError::BadParam(format!(
                "p_fence {} must be in [0, 1]",
                d.p_fence
            )));
        }
        for (name, v) in [
            ("d_tree", d.d_tree),
            ("d_rock", d.d_rock),
            ("d_lily", d.d_lily),
            ("spacing_tree", d.spacing_tree),
            ("spacing_rock", d.spacing_rock),
            ("spacing_lily", d.spacing_lily),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(IslandError::BadParam(format!("{name} {v} must be non-negative")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecorationKind {
    Tree,
    Lilypad,
    FenceSegment,
    Rock,
    PathStone,
    Campsite,
    Spawn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoration {
    pub kind: DecorationKind,
    pub x: f64,
    pub z: f64,
    pub cell: usize,
    /// End points of a fence segment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment: Option<[Point; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IslandMap {
    pub extent: [f64; 2],
    pub sites: Vec<Point>,
    pub cells: Vec<VoronoiCell>,
    pub land: Vec<bool>,
    pub decorations: Vec<Decoration>,
    pub path_cells: Vec<usize>,
    pub spawn: Option<usize>,
    pub campsite: Option<usize>,
}

impl IslandMap {
    pub fn voronoi(&self) -> Voronoi {
        Voronoi {
            extent: self.extent,
            sites: self.sites.clone(),
            cells: self.cells.clone(),
        }
    }

    pub fn cell_at(&self, p: Point) -> Option<usize> {
        if !(0.0..=self.extent[0]).contains(&p[0]) || !(0.0..=self.extent[1]).contains(&p[1]) {
            return None;
        }
        (0..self.sites.len())
            .min_by(|&a, &b| polygon::distance(self.sites[a], p).total_cmp(&polygon::distance(self.sites[b], p)))
    }

    pub fn on_land(&self, p: Point) -> bool {
        self.cell_at(p).is_some_and(|c| self.land[c])
    }

    pub fn land_count(&self) -> usize {
        self.land.iter().filter(|&&l| l).count()
    }

    /// Land-water neighbor pairs `(land, water)`, each edge once.
    pub fn shore_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, cell) in self.cells.iter().enumerate() {
            if self.land[i] {
                out.extend(cell.neighbors.iter().filter(|&&j| !self.land[j]).map(|&j| (i, j)));
            }
        }
        out
    }
}

/// Uniform random sites followed by one Lloyd relaxation.
pub fn generate_voronoi(extent: [f64; 2], n_sites: usize, seed: u64) -> Voronoi {
    let mut rng = stream(seed, Domain::Voronoi, 0, 0);
    let raw = build_voronoi(&random_sites(n_sites, extent, &mut rng), extent);
    lloyd_step(&raw)
}

/// Random walk from the cell nearest the center; every visited cell is land.
pub fn walk_landmass(v: &Voronoi, walk_steps: usize, seed: u64) -> Vec<bool> {
    let mut rng = stream(seed, Domain::Walk, 0, 0);
    let mut land = vec![false; v.cells.len()];
    let Some(mut current) = v.cell_at([v.extent[0] / 2.0, v.extent[1] / 2.0]) else {
        return land;
    };
    for _ in 0..walk_steps {
        land[current] = true;
        if let Some(&next) = v.cells[current].neighbors.choose(&mut rng) {
            current = next;
        }
    }
    land
}

/// Dart throwing inside a convex cell with a minimum spacing. The number of
/// darts kept is the expected count `density * area`, stochastically rounded,
/// unless the spacing runs out of room first.
fn scatter<R: Rng>(cell: &VoronoiCell, density: f64, spacing: f64, rng: &mut R) -> Vec<Point> {
    let expected = density * cell.area;
    let quota = (expected.floor()
        + if rng.random::<f64>() < expected.fract() {
            1.0
        } else {
            0.0
        }) as usize;
    let mut placed: Vec<Point> = Vec::with_capacity(quota);
    if quota == 0 {
        return placed;
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &cell.polygon {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    for _ in 0..30 * quota {
        if placed.len() == quota {
            break;
        }
        let p = [rng.random_range(lo[0]..=hi[0]), rng.random_range(lo[1]..=hi[1])];
        if polygon::convex_contains(&cell.polygon, p) && placed.iter().all(|q| polygon::distance(*q, p) >= spacing) {
            placed.push(p);
        }
    }
    placed
}

/// Fences on shore edges, trees and rocks on land, lilypads on water.
pub fn decorate(map: &IslandMap, params: &DecorationParams, seed: u64) -> Vec<Decoration> {
    let mut out = Vec::new();
    let mut fence_rng = stream(seed, Domain::Decorate, u64::MAX, 0);
    for (i, j) in map.shore_edges() {
        let fenced = fence_rng.random_bool(params.p_fence);
        if let (true, Some((a, b))) = (fenced, voronoi::shared_edge(&map.cells, i, j)) {
            out.push(Decoration {
                kind: DecorationKind::FenceSegment,
                x: (a[0] + b[0]) / 2.0,
                z: (a[1] + b[1]) / 2.0,
                cell: i,
                segment: Some([a, b]),
            });
        }
    }
    for (i, cell) in map.cells.iter().enumerate() {
        let kinds: &[(DecorationKind, f64, f64)] = if map.land[i] {
            &[
                (DecorationKind::Tree, params.d_tree, params.spacing_tree),
                (DecorationKind::Rock, params.d_rock, params.spacing_rock),
            ]
        } else {
            &[(DecorationKind::Lilypad, params.d_lily, params.spacing_lily)]
        };
        for &(kind, density, spacing) in kinds {
            let mut rng = stream(seed, Domain::Decorate, i as u64, kind as u64);
            out.extend(
                scatter(cell, density, spacing, &mut rng)
                    .into_iter()
                    .map(|p| Decoration {
                        kind,
                        x: p[0],
                        z: p[1],
                        cell: i,
                        segment: None,
                    }),
            );
        }
    }
    out
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Indices (into `pts`) of the convex hull vertices.
fn convex_hull(pts: &[Point]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(pts[a][1].total_cmp(&pts[b][1])));
    if order.len() < 3 {
        return order;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for pass in 0..2 {
        let floor = hull.len();
        let seq: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(order.iter())
        } else {
            Box::new(order.iter().rev())
        };
        for &i in seq {
            while hull.len() >= floor + 2 && cross(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[i]) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

/// The two land cells whose centroids are farthest apart; the spawn is the
/// one with the smaller x (then smaller z).
pub fn place_endpoints(map: &IslandMap) -> Result<(usize, usize), IslandError> {
    let land: Vec<usize> = (0..map.cells.len()).filter(|&i| map.land[i]).collect();
    if land.len() < 2 {
        return Err(IslandError::TooFewLandCells(land.len()));
    }
    let pts: Vec<Point> = land.iter().map(|&i| map.cells[i].centroid).collect();
    let hull = convex_hull(&pts);
    let mut best = (land[0], land[1]);
    let mut best_d = f64::NEG_INFINITY;
    for (k, &a) in hull.iter().enumerate() {
        for &b in &hull[k + 1..] {
            let d = polygon::distance(pts[a], pts[b]);
            if d > best_d {
                best_d = d;
                best = (land[a], land[b]);
            }
        }
    }
    let key = |c: usize| (map.cells[c].centroid[0], map.cells[c].centroid[1]);
    let (a, b) = best;
    if key(a).0 < key(b).0 || (key(a).0 == key(b).0 && key(a).1 <= key(b).1) {
        Ok((a, b))
    } else {
        Ok((b, a))
    }
}

/// Fewest-hop route over land adjacency by A*; the heuristic is the centroid
/// distance divided by the longest centroid step between adjacent land cells,
/// which never overestimates the remaining hops. Ties go to the lower index.
pub fn lay_path(map: &IslandMap, from: usize, to: usize) -> Result<Vec<usize>, IslandError> {
    for c in [from, to] {
        if !map.land.get(c).copied().unwrap_or(false) {
            return Err(IslandError::NotLand(c));
        }
    }
    let mut longest: f64 = 0.0;
    for (_, cell) in map.cells.iter().enumerate().filter(|(i, _)| map.land[*i]) {
        for &j in cell.neighbors.iter().filter(|&&j| map.land[j]) {
            longest = longest.max(polygon::distance(cell.centroid, map.cells[j].centroid));
        }
    }
    let goal = map.cells[to].centroid;
    let h = |c: usize| {
        if longest > 0.0 {
            polygon::distance(map.cells[c].centroid, goal) / longest
        } else {
            0.0
        }
    };
    // Heap entries are ordered by (f, h, index); floats are compared by bits,
    // which preserves order for non-negative values.
    let n = map.cells.len();
    let mut g = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    g[from] = 0;
    heap.push(Reverse(((h(from)).to_bits(), h(from).to_bits(), from)));
    while let Some(Reverse((_, _, u))) = heap.pop() {
        if closed[u] {
            continue;
        }
        closed[u] = true;
        if u == to {
            let mut route = vec![to];
            let mut cur = to;
            while cur != from {
                cur = parent[cur];
                route.push(cur);
            }
            route.reverse();
            return Ok(route);
        }
        for &v in &map.cells[u].neighbors {
            if !map.land[v] || closed[v] || g[u] + 1 >= g[v] {
                continue;
            }
            g[v] = g[u] + 1;
            parent[v] = u;
            let hv = h(v);
            heap.push(Reverse(((g[v] as f64 + hv).to_bits(), hv.to_bits(), v)));
        }
    }
    Err(IslandError::NoRoute(from, to))
}

/// Runs the whole pipeline. With fewer than two land cells there is no spawn,
/// campsite or path.
pub fn generate_island(params: &IslandParams, seed: u64) -> Result<IslandMap, IslandError> {
    params.validate()?;
    let v = generate_voronoi(params.extent, params.n_sites, seed);
    let land = walk_landmass(&v, params.walk_steps, seed);
    let mut map = IslandMap {
        extent: v.extent,
        sites: v.sites,
        cells: v.cells,
        land,
        decorations: Vec::new(),
        path_cells: Vec::new(),
        spawn: None,
        campsite: None,
    };
    map.decorations = decorate(&map, &params.decoration, seed);
    if map.land_count() >= 2 {
        let (spawn, camp) = place_endpoints(&map)?;
        map.spawn = Some(spawn);
        map.campsite = Some(camp);
        for (kind, c) in [(DecorationKind::Spawn, spawn), (DecorationKind::Campsite, camp)] {
            let p = map.cells[c].centroid;
            map.decorations.push(Decoration {
                kind,
                x: p[0],
                z: p[1],
                cell: c,
                segment: None,
            });
        }
        if params.lay_path {
            map.path_cells = lay_path(&map, spawn, camp)?;
            let stones: Vec<Decoration> = map
                .path_cells
                .iter()
                .map(|&c| {
                    let p = map.cells[c].centroid;
                    Decoration {
                        kind: DecorationKind::PathStone,
                        x: p[0],
                        z: p[1],
                        cell: c,
                        segment: None,
                    }
                })
                .collect();
            map.decorations.extend(stones);
        }
    }
    Ok(map)
}

/// Connected components of the land cells (used by checks and tests).
pub fn land_components(map: &IslandMap) -> usize {
    let mut seen = vec![false; map.cells.len()];
    let mut count = 0;
    for s in 0..map.cells.len() {
        if !map.land[s] || seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &v in &map.cells[u].neighbors {
                if map.land[v] && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

/// Breaches of the decoration placement rules, one message each.
pub fn decoration_violations(map: &IslandMap) -> Vec<String> {
    let shore: BTreeSet<(usize, usize)> = map.shore_edges().into_iter().collect();
    let mut out = Vec::new();
    for (k, d) in map.decorations.iter().enumerate() {
        let p = [d.x, d.z];
        let inside = polygon::convex_contains(&map.cells[d.cell].polygon, p);
        let ok = match d.kind {
            DecorationKind::Tree | DecorationKind::Rock => map.land[d.cell] && inside,
            DecorationKind::Lilypad => !map.land[d.cell] && inside,
            DecorationKind::PathStone | DecorationKind::Spawn | DecorationKind::Campsite => map.land[d.cell] && inside,
            DecorationKind::FenceSegment => d.segment.is_some_and(|[a, b]| {
                map.cells[d.cell].neighbors.iter().any(|&j| {
                    shore.contains(&(d.cell, j))
                        && polygon::convex_contains(&map.cells[j].polygon, a)
                        && polygon::convex_contains(&map.cells[j].polygon, b)
                }) && polygon::convex_contains(&map.cells[d.cell].polygon, a)
                    && polygon::convex_contains(&map.cells[d.cell].polygon, b)
            }),
        };
        if !ok {
            out.push(format!(
                "decoration {k} ({:?}) at ({:.3}, {:.3}) breaks its placement rule",
                d.kind, d.x, d.z
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> IslandParams {
        IslandParams {
            extent: [60.0, 60.0],
            n_sites: 50,
            walk_steps: 30,
            ..IslandParams::default()
        }
    }

    #[test]
    fn one_step_walk_is_one_cell() {
        let v = generate_voronoi([50.0, 50.0], 40, 9);
        let land = walk_landmass(&v, 1, 9);
        assert_eq!(land.iter().filter(|&&l| l).count(), 1);
        let map = generate_island(
            &IslandParams {
                walk_steps: 1,
                ..small()
            },
            9,
        )
        .unwrap();
        assert_eq!(map.land_count(), 1);
        assert!(map.spawn.is_none() && map.path_cells.is_empty());
    }

    #[test]
    fn no_decorations_when_disabled() {
        let params = IslandParams {
            lay_path: false,
            decoration: DecorationParams {
                p_fence: 0.0,
                d_tree: 0.0,
                d_rock: 0.0,
                d_lily: 0.0,
                ..DecorationParams::default()
            },
            ..small()
        };
        let map = generate_island(&params, 4).unwrap();
        assert!(map
            .decorations
            .iter()
            .all(|d| matches!(d.kind, DecorationKind::Spawn | DecorationKind::Campsite)));
    }

    #[test]
    fn every_shore_edge_fenced_at_probability_one() {
        let params = IslandParams {
            decoration: DecorationParams {
                p_fence: 1.0,
                ..DecorationParams::default()
            },
            ..small()
        };
        let map = generate_island(&params, 5).unwrap();
        let fences = map
            .decorations
            .iter()
            .filter(|d| d.kind == DecorationKind::FenceSegment)
            .count();
        assert_eq!(fences, map.shore_edges().len());
    }

    #[test]
    fn pipeline_holds_its_invariants() {
        let map = generate_island(&small(), 1).unwrap();
        assert_eq!(land_components(&map), 1);
        assert!(
            decoration_violations(&map).is_empty(),
            "{:?}",
            decoration_violations(&map)
        );
        assert!(map.path_cells.iter().all(|&c| map.land[c]));
        assert_ne!(map.spawn, map.campsite);
        assert_eq!(map.path_cells.first().copied(), map.spawn);
        assert_eq!(map.path_cells.last().copied(), map.campsite);
    }

    #[test]
    fn path_to_self_is_one_cell() {
        let map = generate_island(&small(), 2).unwrap();
        let s = map.spawn.unwrap();
        assert_eq!(lay_path(&map, s, s).unwrap(), vec![s]);
        let water = (0..map.cells.len()).find(|&i| !map.land[i]).unwrap();
        assert!(matches!(lay_path(&map, s, water), Err(IslandError::NotLand(_))));
    }

    #[test]
    fn two_land_cells_are_the_endpoints() {
        let mut map = generate_island(&small(), 3).unwrap();
        map.land = vec![false; map.cells.len()];
        map.land[4] = true;
        map.land[7] = true;
        let (a, b) = place_endpoints(&map).unwrap();
        assert_eq!(BTreeSet::from([a, b]), BTreeSet::from([4, 7]));
        assert!(map.cells[a].centroid[0] <= map.cells[b].centroid[0]);
        map.land[7] = false;
        assert!(matches!(place_endpoints(&map), Err(IslandError::TooFewLandCells(1))));
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let pts = [[0.0, 0.0], [1.0, 1.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0], [1.0, 0.0]];
        let mut h = convex_hull(&pts);
        h.sort();
        assert_eq!(h, vec![0, 2, 3, 4]);
    }

    #[test]
    fn json_round_trip() {
        let map = generate_island(&small(), 8).unwrap();
        let text = serde_json::to_string(&map).unwrap();
        let back: IslandMap = serde_json::from_str(&text).unwrap();
        assert_eq!(back, map);
    }
}
