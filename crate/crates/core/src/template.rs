//! Level-design problem instances: a flat rectangular surface, start and end
//! points, and objective markers that must be seen or stay hidden.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Aabb, Rect, Vec3};

pub const DEFAULT_EYE_HEIGHT: f64 = 1.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerConstraint {
    MustSee,
    MustStayHidden,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveMarker {
    pub id: String,
    pub bounds: Aabb,
    pub constraint: MarkerConstraint,
}

/// Ground rectangle spanning `[0, x] x [0, z]` at height 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Surface {
    pub x: f64,
    pub z: f64,
}

impl Surface {
    pub fn rect(&self) -> Rect {
        Rect {
            min: [0.0, 0.0],
            max: [self.x, self.z],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelTemplate {
    pub surface: Surface,
    pub start: Vec3,
    pub end: Vec3,
    pub markers: Vec<ObjectiveMarker>,
    pub eye_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationCode {
    InvalidSurface,
    NonPositiveEyeHeight,
    StartOutsideSurface,
    EndOutsideSurface,
    StartEqualsEnd,
    EmptyMarkerId,
    DuplicateMarkerId,
    InvertedMarkerBox,
    ZeroVolumeMarker,
    MarkerOutsideSurface,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::InvalidSurface => "invalid-surface",
            ViolationCode::NonPositiveEyeHeight => "non-positive-eye-height",
            ViolationCode::StartOutsideSurface => "start-outside-surface",
            ViolationCode::EndOutsideSurface => "end-outside-surface",
            ViolationCode::StartEqualsEnd => "start-equals-end",
            ViolationCode::EmptyMarkerId => "empty-marker-id",
            ViolationCode::DuplicateMarkerId => "duplicate-marker-id",
            ViolationCode::InvertedMarkerBox => "inverted-marker-box",
            ViolationCode::ZeroVolumeMarker => "zero-volume-marker",
            ViolationCode::MarkerOutsideSurface => "marker-outside-surface",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("template is invalid: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

pub(crate) fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl LevelTemplate {
    /// Every invariant violation, in a fixed order: surface, eye height,
    /// start, end, then markers in declaration order.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |code, message: String| out.push(Violation { code, message });

        let surface_ok =
            self.surface.x > 0.0 && self.surface.z > 0.0 && self.surface.x.is_finite() && self.surface.z.is_finite();
        if !surface_ok {
            push(
                ViolationCode::InvalidSurface,
                format!(
                    "surface extents must be positive, got {} x {}",
                    self.surface.x, self.surface.z
                ),
            );
        }
        if !(self.eye_height > 0.0 && self.eye_height.is_finite()) {
            push(
                ViolationCode::NonPositiveEyeHeight,
                format!("eye_height must be positive, got {}", self.eye_height),
            );
        }
        let rect = self.surface.rect();
        if !rect.contains_point(self.start.x, self.start.z) || !self.start.is_finite() {
            push(
                ViolationCode::StartOutsideSurface,
                format!("start ({}, {}) is outside the surface", self.start.x, self.start.z),
            );
        }
        if !rect.contains_point(self.end.x, self.end.z) || !self.end.is_finite() {
            push(
                ViolationCode::EndOutsideSurface,
                format!("end ({}, {}) is outside the surface", self.end.x, self.end.z),
            );
        }
        if self.start == self.end {
            push(ViolationCode::StartEqualsEnd, "start and end coincide".to_string());
        }

        let mut seen = HashSet::new();
        for m in &self.markers {
            if m.id.is_empty() {
                push(ViolationCode::EmptyMarkerId, "marker id is empty".to_string());
            } else if !seen.insert(m.id.as_str()) {
                push(
                    ViolationCode::DuplicateMarkerId,
                    format!("marker id {:?} is used more than once", m.id),
                );
            }
            let b = &m.bounds;
            if b.min.x > b.max.x || b.min.y > b.max.y || b.min.z > b.max.z {
                push(
                    ViolationCode::InvertedMarkerBox,
                    format!("marker {:?} has min greater than max", m.id),
                );
            } else if !(b.volume() > 0.0) {
                push(
                    ViolationCode::ZeroVolumeMarker,
                    format!("marker {:?} has zero volume", m.id),
                );
            }
            if !rect.contains_rect(&b.footprint()) {
                push(
                    ViolationCode::MarkerOutsideSurface,
                    format!("marker {:?} extends beyond the surface", m.id),
                );
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), TemplateError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(TemplateError::Invalid(v))
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkerFile {
    id: String,
    min: [f64; 3],
    max: [f64; 3],
    constraint: MarkerConstraint,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    surface: Surface,
    start: [f64; 2],
    end: [f64; 2],
    #[serde(default = "default_eye_height")]
    eye_height: f64,
    markers: Vec<MarkerFile>,
}

fn default_eye_height() -> f64 {
    DEFAULT_EYE_HEIGHT
}

fn arr(v: [f64; 3]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

/// Parses a template document and validates it.
pub fn load_template(text: &str) -> Result<LevelTemplate, TemplateError> {
    let file: TemplateFile = serde_json::from_str(text).map_err(|e| TemplateError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let template = LevelTemplate {
        surface: file.surface,
        start: Vec3::new(file.start[0], 0.0, file.start[1]),
        end: Vec3::new(file.end[0], 0.0, file.end[1]),
        eye_height: file.eye_height,
        markers: file
            .markers
            .into_iter()
            .map(|m| ObjectiveMarker {
                id: m.id,
                bounds: Aabb {
                    min: arr(m.min),
                    max: arr(m.max),
                },
                constraint: m.constraint,
            })
            .collect(),
    };
    template.ensure_valid()?;
    Ok(template)
}

pub fn save_template(t: &LevelTemplate) -> String {
    let file = TemplateFile {
        surface: t.surface,
        start: [t.start.x, t.start.z],
        end: [t.end.x, t.end.z],
        eye_height: t.eye_height,
        markers: t
            .markers
            .iter()
            .map(|m| MarkerFile {
                id: m.id.clone(),
                min: [m.bounds.min.x, m.bounds.min.y, m.bounds.min.z],
                max: [m.bounds.max.x, m.bounds.max.y, m.bounds.max.z],
                constraint: m.constraint,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("template serializes");
    s.push('\n');
    s
}
