//! Vision-based level evaluation: walk an agent along the shortest path,
//! record which objective markers it can see at each sample, and score how
//! many visibility constraints the layout satisfies.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{aabb_vertices, segment_occluded, Aabb, CameraModel, Frustum, GeometryError, Pose, Rect};
use crate::navgrid::{
    astar, build_navgrid, sample_walk, NavError, WalkSample, DEFAULT_AGENT_RADIUS, DEFAULT_CELL_SIZE,
    DEFAULT_SAMPLE_SPACING,
};
use crate::template::{format_violations, LevelTemplate, MarkerConstraint, ObjectiveMarker, Violation};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("template is invalid: {}", format_violations(.0))]
    InvalidTemplate(Vec<Violation>),
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error(transparent)]
    Camera(#[from] GeometryError),
    #[error("invalid evaluation parameter: {0}")]
    BadParam(&'static str),
}

/// Camera, grid and threshold settings for one walkthrough.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalParams {
    pub camera: CameraModel,
    pub cell_size: f64,
    pub agent_radius: f64,
    pub sample_spacing: f64,
    /// Minimum visible fraction for a `MustSee` marker to count as met.
    pub tau_see: f64,
    /// Maximum visible fraction for a `MustStayHidden` marker to count as met.
    pub tau_hide: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            camera: CameraModel::default(),
            cell_size: DEFAULT_CELL_SIZE,
            agent_radius: DEFAULT_AGENT_RADIUS,
            sample_spacing: DEFAULT_SAMPLE_SPACING,
            tau_see: 0.10,
            tau_hide: 0.0,
        }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<(), EvalError> {
        self.camera.validate()?;
        if !(self.sample_spacing > 0.0) {
            return Err(EvalError::BadParam("sample_spacing must be positive"));
        }
        if !(0.0..=1.0).contains(&self.tau_see) || !(0.0..=1.0).contains(&self.tau_hide) {
            return Err(EvalError::BadParam("thresholds must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityTrace {
    pub marker_ids: Vec<String>,
    pub samples: Vec<WalkSample>,
    /// `visible[sample][marker]`.
    pub visible: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub path_found: bool,
    pub marker_ids: Vec<String>,
    pub per_marker_visible_fraction: Vec<f64>,
    pub marker_met: Vec<bool>,
    pub constraints_met: usize,
    pub shaping: f64,
    pub fitness: f64,
}

impl FitnessReport {
    pub fn all_met(&self) -> bool {
        self.path_found && self.constraints_met == self.marker_ids.len()
    }
}

/// A marker counts as visible when at least one of its eight corners is in
/// the view frustum and has an unobstructed line of sight from the eye.
pub fn marker_visible_at(pose: &Pose, camera: &CameraModel, marker: &ObjectiveMarker, occluders: &[Aabb]) -> bool {
    let frustum = Frustum::new(pose, camera);
    marker_visible_in(&frustum, pose, marker, occluders)
}

fn marker_visible_in(frustum: &Frustum, pose: &Pose, marker: &ObjectiveMarker, occluders: &[Aabb]) -> bool {
    aabb_vertices(&marker.bounds)
        .iter()
        .any(|v| frustum.contains(*v) && !segment_occluded(pose.position, *v, occluders))
}

/// Scores visible fractions: per-marker met flags, met count, shaping term.
pub fn score(markers: &[ObjectiveMarker], fractions: &[f64], tau_see: f64, tau_hide: f64) -> (Vec<bool>, usize, f64) {
    let met: Vec<bool> = markers
        .iter()
        .zip(fractions)
        .map(|(m, &f)| match m.constraint {
            MarkerConstraint::MustSee => f >= tau_see,
            MarkerConstraint::MustStayHidden => f <= tau_hide,
        })
        .collect();
    let count = met.iter().filter(|m| **m).count();
    let shaping = if markers.is_empty() {
        1.0
    } else {
        markers
            .iter()
            .zip(fractions)
            .map(|(m, &f)| match m.constraint {
                MarkerConstraint::MustSee => f,
                MarkerConstraint::MustStayHidden => 1.0 - f,
            })
            .sum::<f64>()
            / markers.len() as f64
    };
    (met, count, shaping)
}

/// Evaluates a level whose walkable footprints are the ground projections
/// of its occluders.
pub fn evaluate_level(
    template: &LevelTemplate,
    occluders: &[Aabb],
    params: &EvalParams,
) -> Result<(FitnessReport, VisibilityTrace), EvalError> {
    let footprints: Vec<Rect> = occluders.iter().map(Aabb::footprint).collect();
    evaluate_scene(template, occluders, &footprints, params)
}

/// Evaluates a level with explicit walk-blocking footprints, which may be
/// larger than the occluders' projections (e.g. model placements).
pub fn evaluate_scene(
    template: &LevelTemplate,
    occluders: &[Aabb],
    footprints: &[Rect],
    params: &EvalParams,
) -> Result<(FitnessReport, VisibilityTrace), EvalError> {
    let violations = template.validate();
    if !violations.is_empty() {
        return Err(EvalError::InvalidTemplate(violations));
    }
    params.validate()?;
    let ids: Vec<String> = template.markers.iter().map(|m| m.id.clone()).collect();
    let n = template.markers.len();

    let grid = build_navgrid(template, footprints, params.cell_size, params.agent_radius)?;
    let path = if grid.infeasible {
        None
    } else {
        astar(&grid, grid.start_cell, grid.end_cell)
    };
    let Some(path) = path else {
        let report = FitnessReport {
            path_found: false,
            marker_ids: ids.clone(),
            per_marker_visible_fraction: vec![0.0; n],
            marker_met: vec![false; n],
            constraints_met: 0,
            shaping: 0.0,
            fitness: 0.0,
        };
        let trace = VisibilityTrace {
            marker_ids: ids,
            samples: Vec::new(),
            visible: Vec::new(),
        };
        return Ok((report, trace));
    };

    let samples = sample_walk(&path, &grid, template.eye_height, params.sample_spacing);
    let visible: Vec<Vec<bool>> = samples
        .iter()
        .map(|s| {
            let frustum = Frustum::new(&s.pose, &params.camera);
            template
                .markers
                .iter()
                .map(|m| marker_visible_in(&frustum, &s.pose, m, occluders))
                .collect()
        })
        .collect();

    let fractions: Vec<f64> = (0..n)
        .map(|j| visible.iter().filter(|row| row[j]).count() as f64 / samples.len() as f64)
        .collect();
    let (met, constraints_met, shaping) = score(&template.markers, &fractions, params.tau_see, params.tau_hide);
    let report = FitnessReport {
        path_found: true,
        marker_ids: ids.clone(),
        per_marker_visible_fraction: fractions,
        marker_met: met,
        constraints_met,
        shaping,
        fitness: constraints_met as f64 + shaping,
    };
    Ok((
        report,
        VisibilityTrace {
            marker_ids: ids,
            samples,
            visible,
        },
    ))
}

/// CSV with columns `sample_index, arc_length, x, z, yaw`, then one 0/1
/// column per marker id.
pub fn trace_to_csv(trace: &VisibilityTrace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "sample_index".to_string(),
        "arc_length".into(),
        "x".into(),
        "z".into(),
        "yaw".into(),
    ];
    header.extend(trace.marker_ids.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (i, (s, row)) in trace.samples.iter().zip(&trace.visible).enumerate() {
        let mut rec = vec![
            i.to_string(),
            s.arc_length.to_string(),
            s.pose.position.x.to_string(),
            s.pose.position.z.to_string(),
            s.pose.yaw.to_string(),
        ];
        rec.extend(row.iter().map(|v| if *v { "1" } else { "0" }.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
