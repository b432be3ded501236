//! Small convex-polygon toolkit on the ground plane. Polygons are
//! counter-clockwise in (x, z) and each vertex carries the label of the edge
//! leaving it.

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPolygon<L> {
    pub vertices: Vec<Point>,
    /// `labels[k]` belongs to the edge from `vertices[k]` to `vertices[k + 1]`.
    pub labels: Vec<L>,
}

impl<L: Copy> LabeledPolygon<L> {
    pub fn rect(min: Point, max: Point, label: L) -> Self {
        LabeledPolygon {
            vertices: vec![min, [max[0], min[1]], max, [min[0], max[1]]],
            labels: vec![label; 4],
        }
    }

    /// Keeps the part where `a . p <= b`; new edges along the cut get `label`.
    pub fn clip(&self, a: Point, b: f64, label: L) -> Self {
        let n = self.vertices.len();
        let mut out = LabeledPolygon {
            vertices: Vec::with_capacity(n + 1),
            labels: Vec::with_capacity(n + 1),
        };
        let side = |p: Point| a[0] * p[0] + a[1] * p[1] - b;
        for k in 0..n {
            let p = self.vertices[k];
            let q = self.vertices[(k + 1) % n];
            let (sp, sq) = (side(p), side(q));
            let crossing = |t: f64| [p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t];
            match (sp <= 0.0, sq <= 0.0) {
                (true, true) => {
                    out.vertices.push(p);
                    out.labels.push(self.labels[k]);
                }
                (true, false) => {
                    out.vertices.push(p);
                    out.labels.push(self.labels[k]);
                    out.vertices.push(crossing(sp / (sp - sq)));
                    out.labels.push(label);
                }
                (false, true) => {
                    out.vertices.push(crossing(sp / (sp - sq)));
                    out.labels.push(self.labels[k]);
                }
                (false, false) => {}
            }
        }
        out.dedup();
        out
    }

    /// Drops vertices that coincide with their successor.
    fn dedup(&mut self) {
        let mut k = 0;
        while self.vertices.len() > 1 && k < self.vertices.len() {
            let next = (k + 1) % self.vertices.len();
            let (p, q) = (self.vertices[k], self.vertices[next]);
            if (p[0] - q[0]).abs() <= 1e-12 && (p[1] - q[1]).abs() <= 1e-12 {
                // Keep the label of the edge leaving the survivor.
                self.labels[k] = self.labels[next];
                self.vertices.remove(next);
                self.labels.remove(next);
                if next < k {
                    k -= 1;
                }
            } else {
                k += 1;
            }
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point, L)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n], self.labels[k]))
    }
}

pub fn area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|k| {
            let (p, q) = (vertices[k], vertices[(k + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        / 2.0
}

/// Area-weighted centroid; falls back to the vertex mean for degenerate input.
pub fn centroid(vertices: &[Point]) -> Point {
    let a = area(vertices);
    let n = vertices.len();
    if a.abs() < 1e-12 {
        let m = n.max(1) as f64;
        return [
            vertices.iter().map(|p| p[0]).sum::<f64>() / m,
            vertices.iter().map(|p| p[1]).sum::<f64>() / m,
        ];
    }
    let (mut cx, mut cz) = (0.0, 0.0);
    for k in 0..n {
        let (p, q) = (vertices[k], vertices[(k + 1) % n]);
        let w = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * w;
        cz += (p[1] + q[1]) * w;
    }
    [cx / (6.0 * a), cz / (6.0 * a)]
}

/// Inside-or-on test for a counter-clockwise convex polygon.
pub fn convex_contains(vertices: &[Point], p: Point) -> bool {
    let n = vertices.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|k| {
        let (a, b) = (vertices[k], vertices[(k + 1) % n]);
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -1e-9
    })
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Closest point to `p` on the segment `a`-`b`.
pub fn closest_on_segment(a: Point, b: Point, p: Point) -> Point {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return a;
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    [a[0] + d[0] * t, a[1] + d[1] * t]
}

/// Closest point of a convex polygon (boundary and interior) to `p`.
pub fn closest_in_convex(vertices: &[Point], p: Point) -> Option<Point> {
    match vertices.len() {
        0 => None,
        1 => Some(vertices[0]),
        _ if convex_contains(vertices, p) => Some(p),
        n => (0..n)
            .map(|k| closest_on_segment(vertices[k], vertices[(k + 1) % n], p))
            .min_by(|x, y| distance(*x, p).total_cmp(&distance(*y, p))),
    }
}
