//! Voronoi partition of a rectangle by half-plane clipping, with cell
//! adjacency read off the shared edges.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::polygon::{self, LabeledPolygon, Point};

/// Shared edges shorter than this are treated as touching corners only.
const MIN_SHARED_EDGE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoronoiCell {
    /// Counter-clockwise vertices.
    pub polygon: Vec<Point>,
    /// Neighbor across each edge (`polygon[k]` to `polygon[k + 1]`), or
    /// `None` on the outer boundary.
    pub edge_neighbors: Vec<Option<usize>>,
    /// Sorted indices of cells sharing an edge with this one.
    pub neighbors: Vec<usize>,
    pub centroid: Point,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Voronoi {
    pub extent: [f64; 2],
    pub sites: Vec<Point>,
    pub cells: Vec<VoronoiCell>,
}

impl Voronoi {
    /// Index of the cell containing `p`, i.e. of the nearest site (lowest
    /// index on ties). `None` outside the extent.
    pub fn cell_at(&self, p: Point) -> Option<usize> {
        if !(0.0..=self.extent[0]).contains(&p[0]) || !(0.0..=self.extent[1]).contains(&p[1]) {
            return None;
        }
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (i, s) in self.sites.iter().enumerate() {
            let d = polygon::distance(*s, p);
            if d < best_d {
                best = Some(i);
                best_d = d;
            }
        }
        best
    }

    /// Geometry of the edge shared by cells `i` and `j`, if any.
    pub fn shared_edge(&self, i: usize, j: usize) -> Option<(Point, Point)> {
        shared_edge(&self.cells, i, j)
    }
}

/// Longest edge of cell `i` labelled with neighbor `j` (or of `j` labelled
/// `i`), oriented as it runs around `i`.
pub fn shared_edge(cells: &[VoronoiCell], i: usize, j: usize) -> Option<(Point, Point)> {
    let find = |a: usize, b: usize| {
        let c = &cells[a];
        let n = c.polygon.len();
        (0..n)
            .filter(|&k| c.edge_neighbors[k] == Some(b))
            .map(|k| (c.polygon[k], c.polygon[(k + 1) % n]))
            .max_by(|x, y| polygon::distance(x.0, x.1).total_cmp(&polygon::distance(y.0, y.1)))
    };
    find(i, j).or_else(|| find(j, i).map(|(a, b)| (b, a)))
}

/// Exact Voronoi diagram of `sites` clipped to `[0, extent.x] x [0, extent.z]`.
pub fn build_voronoi(sites: &[Point], extent: [f64; 2]) -> Voronoi {
    let n = sites.len();
    let mut cells: Vec<VoronoiCell> = (0..n)
        .map(|i| {
            let si = sites[i];
            let mut poly = LabeledPolygon::rect([0.0, 0.0], extent, None);
            for (j, sj) in sites.iter().enumerate() {
                if i == j || poly.vertices.is_empty() {
                    continue;
                }
                // |p - si|^2 <= |p - sj|^2  <=>  2 (sj - si) . p <= |sj|^2 - |si|^2
                let a = [2.0 * (sj[0] - si[0]), 2.0 * (sj[1] - si[1])];
                let b = sj[0] * sj[0] + sj[1] * sj[1] - si[0] * si[0] - si[1] * si[1];
                poly = poly.clip(a, b, Some(j));
            }
            let area = polygon::area(&poly.vertices);
            VoronoiCell {
                centroid: polygon::centroid(&poly.vertices),
                area,
                polygon: poly.vertices,
                edge_neighbors: poly.labels,
                neighbors: Vec::new(),
            }
        })
        .collect();

    let mut adjacency = vec![Vec::new(); n];
    for (i, cell) in cells.iter().enumerate() {
        let m = cell.polygon.len();
        for k in 0..m {
            if let Some(j) = cell.edge_neighbors[k] {
                if polygon::distance(cell.polygon[k], cell.polygon[(k + 1) % m]) > MIN_SHARED_EDGE {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
    }
    for (cell, mut adj) in cells.iter_mut().zip(adjacency) {
        adj.sort_unstable();
        adj.dedup();
        cell.neighbors = adj;
    }
    Voronoi {
        extent,
        sites: sites.to_vec(),
        cells,
    }
}

pub fn random_sites<R: Rng>(n: usize, extent: [f64; 2], rng: &mut R) -> Vec<Point> {
    (0..n)
        .map(|_| [rng.random_range(0.0..extent[0]), rng.random_range(0.0..extent[1])])
        .collect()
}

/// Moves every site to its cell's centroid and rebuilds the diagram.
pub fn lloyd_step(v: &Voronoi) -> Voronoi {
    let sites: Vec<Point> = v.cells.iter().map(|c| c.centroid).collect();
    build_voronoi(&sites, v.extent)
}
