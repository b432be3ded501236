//! Top-down SVG drawings of levels, explorer beliefs and islands, plus a
//! Wavefront OBJ dump of occluder boxes. Output depends only on the inputs,
//! and every coordinate is printed with three decimals.

use std::fmt::Write;

use crate::explorer::{PointGrid, PointState};
use crate::geometry::Aabb;
use crate::islandgen::{DecorationKind, DogMode, DogTrace, IslandMap};
use crate::template::LevelTemplate;

/// Pixels per metre.
const SCALE: f64 = 20.0;
const MARGIN: f64 = 1.0;

pub const COLOR_MET: &str = "#2e9d3a";
pub const COLOR_UNMET: &str = "#d62728";
pub const COLOR_OCCLUDER: &str = "#8c8c8c";

/// Everything that can be drawn on a level; empty slices and `None` fields
/// are simply left out.
#[derive(Debug, Clone, Copy)]
pub struct LevelView<'a> {
    pub template: &'a LevelTemplate,
    pub occluders: &'a [Aabb],
    /// Met flag per marker; without it markers are drawn as outlines.
    pub marker_met: Option<&'a [bool]>,
    /// Ground polyline of the walk.
    pub path: &'a [[f64; 2]],
    pub beliefs: Option<(&'a PointGrid, &'a [PointState])>,
    pub agent: Option<[f64; 2]>,
}

impl<'a> LevelView<'a> {
    pub fn new(template: &'a LevelTemplate) -> Self {
        LevelView {
            template,
            occluders: &[],
            marker_met: None,
            path: &[],
            beliefs: None,
            agent: None,
        }
    }
}

struct Canvas {
    out: String,
    height: f64,
}

impl Canvas {
    fn new(width: f64, height: f64) -> Self {
        let mut out = String::new();
        let (w, h) = (width + 2.0 * MARGIN, height + 2.0 * MARGIN);
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.3}" height="{:.3}" viewBox="{:.3} {:.3} {:.3} {:.3}">"#,
            w * SCALE,
            h * SCALE,
            -MARGIN,
            -MARGIN,
            w,
            h
        )
        .unwrap();
        Canvas { out, height }
    }

    /// World z grows upwards on the page.
    fn y(&self, z: f64) -> f64 {
        self.height - z
    }

    fn rect(&mut self, min: [f64; 2], max: [f64; 2], attrs: &str) {
        writeln!(
            self.out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" {attrs}/>"#,
            min[0],
            self.y(max[1]),
            max[0] - min[0],
            max[1] - min[1]
        )
        .unwrap();
    }

    fn circle(&mut self, p: [f64; 2], r: f64, attrs: &str) {
        writeln!(
            self.out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" {attrs}/>"#,
            p[0],
            self.y(p[1]),
            r
        )
        .unwrap();
    }

    fn points(&self, pts: &[[f64; 2]]) -> String {
        pts.iter()
            .map(|p| format!("{:.3},{:.3}", p[0], self.y(p[1])))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn polyline(&mut self, pts: &[[f64; 2]], attrs: &str) {
        if pts.len() >= 2 {
            let p = self.points(pts);
            writeln!(self.out, r#"<polyline points="{p}" fill="none" {attrs}/>"#).unwrap();
        }
    }

    fn polygon(&mut self, pts: &[[f64; 2]], attrs: &str) {
        let p = self.points(pts);
        writeln!(self.out, r#"<polygon points="{p}" {attrs}/>"#).unwrap();
    }

    fn line(&mut self, a: [f64; 2], b: [f64; 2], attrs: &str) {
        writeln!(
            self.out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" {attrs}/>"#,
            a[0],
            self.y(a[1]),
            b[0],
            self.y(b[1])
        )
        .unwrap();
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn belief_color(s: PointState) -> &'static str {
    match s {
        PointState::CurrentlyVisible => "#2ca02c",
        PointState::Frontier => "#e6c700",
        PointState::Lapsed => "#d000d0",
        PointState::Unobserved => "#b0b0b0",
    }
}

/// Draws a level: surface, occluders, walk, markers, start and end, and
/// optionally the explorer's beliefs. The surface is the only `<rect>` with
/// class `surface`; markers carry class `marker met`, `marker unmet` or
/// `marker`.
pub fn render_level_svg(view: &LevelView) -> String {
    let t = view.template;
    let mut c = Canvas::new(t.surface.x, t.surface.z);
    c.rect(
        [0.0, 0.0],
        [t.surface.x, t.surface.z],
        r##"class="surface" fill="#f4f1e8" stroke="#333333" stroke-width="0.05""##,
    );
    for b in view.occluders {
        let f = b.footprint();
        c.rect(
            f.min,
            f.max,
            &format!(r#"class="occluder" fill="{COLOR_OCCLUDER}" fill-opacity="0.8""#),
        );
    }
    if let Some((grid, states)) = view.beliefs {
        for (p, s) in grid.points.iter().zip(states) {
            c.circle(
                p.ground,
                0.12,
                &format!(r#"class="belief" fill="{}""#, belief_color(*s)),
            );
        }
    }
    c.polyline(view.path, r##"class="path" stroke="#1f77b4" stroke-width="0.08""##);
    for (k, m) in t.markers.iter().enumerate() {
        let f = m.bounds.footprint();
        let attrs = match view.marker_met.and_then(|met| met.get(k)) {
            Some(true) => format!(r#"class="marker met" fill="{COLOR_MET}""#),
            Some(false) => format!(r#"class="marker unmet" fill="{COLOR_UNMET}""#),
            None => r##"class="marker" fill="none" stroke="#000000" stroke-width="0.05""##.to_string(),
        };
        c.rect(f.min, f.max, &attrs);
    }
    c.circle([t.start.x, t.start.z], 0.3, r##"class="start" fill="#1f77b4""##);
    c.circle([t.end.x, t.end.z], 0.3, r##"class="end" fill="#ff7f0e""##);
    if let Some(a) = view.agent {
        c.circle(a, 0.25, r##"class="agent" fill="#000000""##);
    }
    c.finish()
}

/// Draws an island: water and land cells, fences, plants, rocks, path, spawn
/// and campsite, and optionally a dog trace.
pub fn render_island_svg(map: &IslandMap, dog: Option<&DogTrace>) -> String {
    let mut c = Canvas::new(map.extent[0], map.extent[1]);
    for (i, cell) in map.cells.iter().enumerate() {
        let (class, fill) = if map.land[i] {
            ("land", "#d9c38c")
        } else {
            ("water", "#5b9bd5")
        };
        c.polygon(
            &cell.polygon,
            &format!(r##"class="{class}" fill="{fill}" stroke="#6d6d6d" stroke-width="0.05""##),
        );
    }
    let route: Vec<[f64; 2]> = map.path_cells.iter().map(|&k| map.cells[k].centroid).collect();
    c.polyline(&route, r##"class="path" stroke="#7f7f7f" stroke-width="0.4""##);
    for d in &map.decorations {
        let p = [d.x, d.z];
        match d.kind {
            DecorationKind::FenceSegment => {
                if let Some([a, b]) = d.segment {
                    c.line(a, b, r##"class="fence" stroke="#6b3e1f" stroke-width="0.3""##);
                }
            }
            DecorationKind::Tree => c.circle(p, 0.8, r##"class="tree" fill="#2e7d32""##),
            DecorationKind::Rock => c.circle(p, 0.5, r##"class="rock" fill="#7a7a7a""##),
            DecorationKind::Lilypad => c.circle(p, 0.4, r##"class="lilypad" fill="#66bb6a""##),
            DecorationKind::PathStone => c.circle(p, 0.35, r##"class="path_stone" fill="#bdbdbd""##),
            DecorationKind::Spawn => c.circle(p, 1.0, r##"class="spawn" fill="#1f77b4""##),
            DecorationKind::Campsite => c.circle(p, 1.0, r##"class="campsite" fill="#ff7f0e""##),
        }
    }
    if let Some(trace) = dog {
        let pts: Vec<[f64; 2]> = trace.ticks.iter().map(|t| [t.x, t.z]).collect();
        c.polyline(&pts, r##"class="dog" stroke="#8c564b" stroke-width="0.15""##);
        if let Some(last) = trace.ticks.last() {
            let fill = if last.mode == DogMode::InView {
                COLOR_MET
            } else {
                COLOR_UNMET
            };
            c.circle([last.x, last.z], 0.5, &format!(r#"class="dog_final" fill="{fill}""#));
        }
    }
    c.finish()
}

/// Occluder boxes as a Wavefront OBJ mesh, one object per box.
pub fn occluders_to_obj(occluders: &[Aabb]) -> String {
    const FACES: [[usize; 4]; 6] = [
        [0, 1, 3, 2],
        [4, 6, 7, 5],
        [0, 4, 5, 1],
        [2, 3, 7, 6],
        [0, 2, 6, 4],
        [1, 5, 7, 3],
    ];
    let mut out = String::new();
    for (k, b) in occluders.iter().enumerate() {
        writeln!(out, "o occluder_{k}").unwrap();
        for v in crate::geometry::aabb_vertices(b) {
            writeln!(out, "v {:.6} {:.6} {:.6}", v.x, v.y, v.z).unwrap();
        }
        for f in FACES {
            let base = 8 * k + 1;
            writeln!(out, "f {} {} {} {}", base + f[0], base + f[1], base + f[2], base + f[3]).unwrap();
        }
    }
    out
}
