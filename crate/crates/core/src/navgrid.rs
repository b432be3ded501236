//! Walkability grid over the level surface, A* shortest paths, and
//! fixed-spacing walk samples along a path.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{yaw_towards, Pose, Rect, Vec3};
use crate::template::LevelTemplate;

pub const DEFAULT_CELL_SIZE: f64 = 0.5;
pub const DEFAULT_AGENT_RADIUS: f64 = 0.4;
pub const DEFAULT_SAMPLE_SPACING: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error("cell size {cell_size} must be positive and no larger than the surface ({x} x {z})")]
    BadCellSize { cell_size: f64, x: f64, z: f64 },
    #[error("agent radius must be non-negative, got {0}")]
    BadAgentRadius(f64),
}

/// Grid cell address; `row` runs along z, `col` along x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    pub fn manhattan(self, other: Cell) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavGrid {
    pub origin: [f64; 2],
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
    pub blocked: Vec<bool>,
    pub start_cell: Cell,
    pub end_cell: Cell,
    /// Set when the start or end cell is blocked.
    pub infeasible: bool,
}

fn cell_count(extent: f64, cell_size: f64) -> usize {
    ((extent / cell_size) - 1e-9).ceil().max(1.0) as usize
}

impl NavGrid {
    /// An unblocked grid of the given shape, mainly for tests and tools.
    pub fn open(width: usize, height: usize, cell_size: f64) -> Self {
        NavGrid {
            origin: [0.0, 0.0],
            cell_size,
            width,
            height,
            blocked: vec![false; width * height],
            start_cell: Cell::new(0, 0),
            end_cell: Cell::new(height - 1, width - 1),
            infeasible: false,
        }
    }

    pub fn index(&self, c: Cell) -> usize {
        c.row * self.width + c.col
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.row < self.height && c.col < self.width
    }

    pub fn is_blocked(&self, c: Cell) -> bool {
        self.blocked[self.index(c)]
    }

    pub fn set_blocked(&mut self, c: Cell, value: bool) {
        let i = self.index(c);
        self.blocked[i] = value;
    }

    pub fn cell_rect(&self, c: Cell) -> Rect {
        let x0 = self.origin[0] + c.col as f64 * self.cell_size;
        let z0 = self.origin[1] + c.row as f64 * self.cell_size;
        Rect {
            min: [x0, z0],
            max: [x0 + self.cell_size, z0 + self.cell_size],
        }
    }

    pub fn cell_center(&self, c: Cell) -> (f64, f64) {
        (
            self.origin[0] + (c.col as f64 + 0.5) * self.cell_size,
            self.origin[1] + (c.row as f64 + 0.5) * self.cell_size,
        )
    }

    /// Cell containing the ground point; points on the far edge map to the
    /// last cell.
    pub fn cell_of(&self, x: f64, z: f64) -> Option<Cell> {
        let fx = (x - self.origin[0]) / self.cell_size;
        let fz = (z - self.origin[1]) / self.cell_size;
        if !(fx >= 0.0 && fz >= 0.0) {
            return None;
        }
        let col = (fx.floor() as usize).min(self.width - 1);
        let row = (fz.floor() as usize).min(self.height - 1);
        let c = Cell::new(row, col);
        let r = self.cell_rect(c);
        if x > r.max[0] + 1e-9 || z > r.max[1] + 1e-9 {
            return None;
        }
        Some(c)
    }

    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        let up = (c.row > 0).then(|| Cell::new(c.row - 1, c.col));
        let down = (c.row + 1 < self.height).then(|| Cell::new(c.row + 1, c.col));
        let left = (c.col > 0).then(|| Cell::new(c.row, c.col - 1));
        let right = (c.col + 1 < self.width).then(|| Cell::new(c.row, c.col + 1));
        [up, left, right, down].into_iter().flatten()
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    /// True when the straight ground segment between two points crosses only
    /// unblocked cells (sampled at a quarter of the cell size).
    pub fn segment_clear(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        let steps = ((len / (self.cell_size * 0.25)).ceil() as usize).max(1);
        (0..=steps).all(|i| {
            let t = i as f64 / steps as f64;
            match self.cell_of(a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t) {
                Some(c) => !self.is_blocked(c),
                None => false,
            }
        })
    }
}

/// Rasterizes occluder footprints onto the template surface. A cell is
/// blocked when its square, grown by `agent_radius`, overlaps a footprint
/// with positive area.
pub fn build_navgrid(
    template: &LevelTemplate,
    footprints: &[Rect],
    cell_size: f64,
    agent_radius: f64,
) -> Result<NavGrid, NavError> {
    let sx = template.surface.x;
    let sz = template.surface.z;
    if !(cell_size > 0.0) || cell_size > sx || cell_size > sz {
        return Err(NavError::BadCellSize {
            cell_size,
            x: sx,
            z: sz,
        });
    }
    if !(agent_radius >= 0.0) {
        return Err(NavError::BadAgentRadius(agent_radius));
    }
    let width = cell_count(sx, cell_size);
    let height = cell_count(sz, cell_size);
    let mut grid = NavGrid {
        origin: [0.0, 0.0],
        cell_size,
        width,
        height,
        blocked: vec![false; width * height],
        start_cell: Cell::new(0, 0),
        end_cell: Cell::new(0, 0),
        infeasible: false,
    };
    for fp in footprints {
        // Only visit the cells whose inflated squares can reach the footprint.
        let grown = fp.inflate(agent_radius);
        let col_lo = ((grown.min[0] / cell_size).floor().max(0.0)) as usize;
        let row_lo = ((grown.min[1] / cell_size).floor().max(0.0)) as usize;
        if grown.max[0] < 0.0 || grown.max[1] < 0.0 {
            continue;
        }
        let col_hi = ((grown.max[0] / cell_size).ceil() as usize).min(width);
        let row_hi = ((grown.max[1] / cell_size).ceil() as usize).min(height);
        for row in row_lo..row_hi {
            for col in col_lo..col_hi {
                let c = Cell::new(row, col);
                if grid.cell_rect(c).inflate(agent_radius).overlaps(fp) {
                    grid.set_blocked(c, true);
                }
            }
        }
    }
    grid.start_cell = grid
        .cell_of(template.start.x, template.start.z)
        .unwrap_or(Cell::new(0, 0));
    grid.end_cell = grid.cell_of(template.end.x, template.end.z).unwrap_or(Cell::new(0, 0));
    grid.infeasible = grid.is_blocked(grid.start_cell) || grid.is_blocked(grid.end_cell);
    Ok(grid)
}

/// 4-connected A* with unit step cost and Manhattan heuristic. Open-list
/// ties resolve by `(f, h, row, col)` ascending.
pub fn astar(grid: &NavGrid, start: Cell, goal: Cell) -> Option<Vec<Cell>> {
    if !grid.in_bounds(start) || !grid.in_bounds(goal) {
        return None;
    }
    if grid.is_blocked(start) || grid.is_blocked(goal) {
        return None;
    }
    let n = grid.width * grid.height;
    let mut g = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();

    let si = grid.index(start);
    g[si] = 0;
    let h0 = start.manhattan(goal);
    open.push(Reverse((h0, h0, start.row, start.col)));

    while let Some(Reverse((_, _, row, col))) = open.pop() {
        let cur = Cell::new(row, col);
        let ci = grid.index(cur);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        if cur == goal {
            let mut path = vec![cur];
            let mut i = ci;
            while parent[i] != usize::MAX {
                i = parent[i];
                path.push(Cell::new(i / grid.width, i % grid.width));
            }
            path.reverse();
            return Some(path);
        }
        for nb in grid.neighbors(cur) {
            let ni = grid.index(nb);
            if closed[ni] || grid.blocked[ni] {
                continue;
            }
            let cand = g[ci] + 1;
            if cand < g[ni] {
                g[ni] = cand;
                parent[ni] = ci;
                let h = nb.manhattan(goal);
                open.push(Reverse((cand + h, h, nb.row, nb.col)));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSample {
    pub pose: Pose,
    /// Distance along the path from its first cell center.
    pub arc_length: f64,
}

/// Resamples the polyline through the path's cell centers every
/// `spacing` meters, plus a final sample at the path end. Each sample faces
/// along the segment it lies on (the outgoing segment at a corner); the last
/// sample keeps the previous yaw.
pub fn sample_walk(path: &[Cell], grid: &NavGrid, eye_height: f64, spacing: f64) -> Vec<WalkSample> {
    assert!(!path.is_empty(), "sample_walk needs a non-empty path");
    assert!(spacing > 0.0, "sample spacing must be positive");
    let pts: Vec<(f64, f64)> = path.iter().map(|c| grid.cell_center(*c)).collect();
    let mut cum = vec![0.0];
    for w in pts.windows(2) {
        let last = *cum.last().unwrap();
        cum.push(last + (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1));
    }
    let total = *cum.last().unwrap();

    let lift = |x: f64, z: f64, yaw: f64, s: f64| WalkSample {
        pose: Pose::new(Vec3::new(x, eye_height, z), yaw),
        arc_length: s,
    };
    if pts.len() == 1 {
        return vec![lift(pts[0].0, pts[0].1, 0.0, 0.0)];
    }

    let n_full = ((total / spacing) + 1e-9).floor() as usize;
    let mut arcs: Vec<f64> = (0..=n_full).map(|k| k as f64 * spacing).collect();
    if total - arcs[n_full] > 1e-9 {
        arcs.push(total);
    } else {
        arcs[n_full] = arcs[n_full].min(total);
    }

    let mut out = Vec::with_capacity(arcs.len());
    let mut seg = 0;
    let last_seg = pts.len() - 2;
    for (k, &s) in arcs.iter().enumerate() {
        while seg < last_seg && cum[seg + 1] <= s + 1e-9 {
            seg += 1;
        }
        let (a, b) = (pts[seg], pts[seg + 1]);
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 {
            ((s - cum[seg]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let x = a.0 + (b.0 - a.0) * t;
        let z = a.1 + (b.1 - a.1) * t;
        let yaw = if k + 1 == arcs.len() {
            out.last().map(|p: &WalkSample| p.pose.yaw).unwrap_or(0.0)
        } else {
            yaw_towards(b.0 - a.0, b.1 - a.1)
        };
        out.push(lift(x, z, yaw, s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::{load_template, LevelTemplate};

    fn empty_template() -> LevelTemplate {
        load_template(r#"{"surface": {"x": 20.0, "z": 20.0}, "start": [1.0, 1.0], "end": [19.0, 19.0], "markers": []}"#)
            .unwrap()
    }

    #[test]
    fn empty_surface_grid_shape() {
        let g = build_navgrid(&empty_template(), &[], 0.5, 0.4).unwrap();
        assert_eq!((g.width, g.height), (40, 40));
        assert_eq!(g.blocked_count(), 0);
        assert!(!g.infeasible);
        assert_eq!(g.start_cell, Cell::new(2, 2));
        assert_eq!(g.end_cell, Cell::new(38, 38));
    }

    #[test]
    fn footprint_blocks_overlapped_cells() {
        let fp = Rect::from_center([10.0, 10.0], [2.0, 2.0]);
        let g = build_navgrid(&empty_template(), &[fp], 0.5, 0.0).unwrap();
        // Oracle: cells whose square shares positive area with the footprint.
        let mut expected = 0;
        for row in 0..g.height {
            for col in 0..g.width {
                let r = g.cell_rect(Cell::new(row, col));
                let ix = (r.max[0].min(fp.max[0]) - r.min[0].max(fp.min[0])).max(0.0);
                let iz = (r.max[1].min(fp.max[1]) - r.min[1].max(fp.min[1])).max(0.0);
                let area = ix * iz;
                assert_eq!(area > 0.0, g.is_blocked(Cell::new(row, col)));
                expected += usize::from(area > 0.0);
            }
        }
        assert_eq!(expected, 16);
        assert_eq!(g.blocked_count(), 16);
    }

    #[test]
    fn footprint_on_start_sets_infeasible() {
        let fp = Rect::from_center([1.0, 1.0], [1.0, 1.0]);
        let g = build_navgrid(&empty_template(), &[fp], 0.5, 0.4).unwrap();
        assert!(g.infeasible);
    }

    #[test]
    fn oversize_cell_rejected() {
        assert!(matches!(
            build_navgrid(&empty_template(), &[], 25.0, 0.4),
            Err(NavError::BadCellSize { .. })
        ));
    }

    #[test]
    fn astar_on_empty_grid_is_manhattan() {
        let g = NavGrid::open(5, 5, 1.0);
        let p = astar(&g, Cell::new(0, 0), Cell::new(4, 4)).unwrap();
        assert_eq!(p.len(), 9);
        for w in p.windows(2) {
            assert_eq!(w[0].manhattan(w[1]), 1);
        }
    }

    #[test]
    fn astar_walled_off_goal() {
        let mut g = NavGrid::open(5, 5, 1.0);
        g.set_blocked(Cell::new(3, 4), true);
        g.set_blocked(Cell::new(4, 3), true);
        assert_eq!(astar(&g, Cell::new(0, 0), Cell::new(4, 4)), None);
    }

    #[test]
    fn astar_is_repeatable() {
        let g = NavGrid::open(12, 9, 1.0);
        let a = astar(&g, Cell::new(0, 0), Cell::new(8, 11));
        assert_eq!(a, astar(&g, Cell::new(0, 0), Cell::new(8, 11)));
    }

    #[test]
    fn straight_walk_samples() {
        // 21 cells of 0.5 m along one row: 10 m between the first and last center.
        let g = NavGrid::open(21, 1, 0.5);
        let path: Vec<Cell> = (0..21).map(|c| Cell::new(0, c)).collect();
        let s = sample_walk(&path, &g, 1.6, 0.25);
        assert_eq!(s.len(), 41);
        assert!(s.iter().all(|w| w.pose.yaw == s[0].pose.yaw));
        assert!(s.iter().all(|w| w.pose.position.y == 1.6));
        assert!((s.last().unwrap().arc_length - 10.0).abs() < 1e-12);
    }

    #[test]
    fn l_shaped_walk_turns_once_at_corner() {
        let g = NavGrid::open(6, 6, 0.5);
        let mut path: Vec<Cell> = (0..5).map(|c| Cell::new(0, c)).collect();
        path.extend((1..5).map(|r| Cell::new(r, 4)));
        let s = sample_walk(&path, &g, 1.6, 0.25);
        let changes: Vec<usize> = (1..s.len()).filter(|&i| s[i].pose.yaw != s[i - 1].pose.yaw).collect();
        assert_eq!(changes.len(), 1);
        let corner = g.cell_center(Cell::new(0, 4));
        let p = s[changes[0]].pose.position;
        assert!((p.x - corner.0).abs() < 1e-12 && (p.z - corner.1).abs() < 1e-12);
    }

    #[test]
    fn uneven_spacing_adds_final_sample() {
        let g = NavGrid::open(3, 1, 1.0);
        let path = [Cell::new(0, 0), Cell::new(0, 1), Cell::new(0, 2)];
        let s = sample_walk(&path, &g, 1.0, 0.75);
        let arcs: Vec<f64> = s.iter().map(|w| w.arc_length).collect();
        assert_eq!(arcs, vec![0.0, 0.75, 1.5, 2.0]);
    }

    #[test]
    fn single_cell_walk() {
        let g = NavGrid::open(3, 3, 1.0);
        let s = sample_walk(&[Cell::new(1, 1)], &g, 1.6, 0.25);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].arc_length, 0.0);
    }
}
