//! 3D primitives: vectors, axis-aligned boxes, rays and a pinhole camera.
//!
//! Conventions: `y` is up, distances are meters, angles are radians. A pose
//! with yaw 0 looks along `+z`; positive yaw turns counterclockwise when viewed
//! from above, so the forward vector is `(sin yaw, 0, cos yaw)`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("ray direction has zero length")]
    ZeroDirection,
    #[error("box min {min:?} exceeds max {max:?}")]
    InvertedBox { min: Vec3, max: Vec3 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const UP: Vec3 = Vec3::new(0.0, 1.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis index {axis} out of range"),
        }
    }

    /// Horizontal (x, z) distance, ignoring height.
    pub fn ground_distance(self, other: Vec3) -> f64 {
        (self.x - other.x).hypot(self.z - other.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Axis-aligned box, closed on all faces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "BoxArrays", into = "BoxArrays")]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self, GeometryError> {
        if !min.is_finite() || !max.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if min.x > max.x || min.y > max.y || min.z > max.z {
            return Err(GeometryError::InvertedBox { min, max });
        }
        Ok(Aabb { min, max })
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn size(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let s = self.size();
        s.x * s.y * s.z
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Projection onto the ground plane.
    pub fn footprint(&self) -> Rect {
        Rect {
            min: [self.min.x, self.min.z],
            max: [self.max.x, self.max.z],
        }
    }

    /// Distance from `p` to the nearest point of the box surface.
    pub fn boundary_distance(&self, p: Vec3) -> f64 {
        let outside = Vec3::new(
            (self.min.x - p.x).max(0.0).max(p.x - self.max.x),
            (self.min.y - p.y).max(0.0).max(p.y - self.max.y),
            (self.min.z - p.z).max(0.0).max(p.z - self.max.z),
        );
        if outside.x > 0.0 || outside.y > 0.0 || outside.z > 0.0 {
            return outside.length();
        }
        let mut inside = f64::INFINITY;
        for axis in 0..3 {
            let c = p.component(axis);
            inside = inside
                .min(c - self.min.component(axis))
                .min(self.max.component(axis) - c);
        }
        inside
    }
}

/// File representation of a box: `{"min": [x, y, z], "max": [x, y, z]}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxArrays {
    min: [f64; 3],
    max: [f64; 3],
}

impl From<BoxArrays> for Aabb {
    fn from(b: BoxArrays) -> Self {
        Aabb {
            min: Vec3::new(b.min[0], b.min[1], b.min[2]),
            max: Vec3::new(b.max[0], b.max[1], b.max[2]),
        }
    }
}

impl From<Aabb> for BoxArrays {
    fn from(b: Aabb) -> Self {
        BoxArrays {
            min: [b.min.x, b.min.y, b.min.z],
            max: [b.max.x, b.max.y, b.max.z],
        }
    }
}

/// Axis-aligned rectangle on the ground plane, stored as `[x, z]` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn from_center(center: [f64; 2], size: [f64; 2]) -> Self {
        Rect {
            min: [center[0] - size[0] / 2.0, center[1] - size[1] / 2.0],
            max: [center[0] + size[0] / 2.0, center[1] + size[1] / 2.0],
        }
    }

    pub fn inflate(&self, by: f64) -> Rect {
        Rect {
            min: [self.min[0] - by, self.min[1] - by],
            max: [self.max[0] + by, self.max[1] + by],
        }
    }

    /// True when the interiors intersect (touching edges do not count).
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.min[0] < other.max[0]
            && self.max[0] > other.min[0]
            && self.min[1] < other.max[1]
            && self.max[1] > other.min[1]
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.min[0] >= self.min[0]
            && other.max[0] <= self.max[0]
            && other.min[1] >= self.min[1]
            && other.max[1] <= self.max[1]
    }

    pub fn contains_point(&self, x: f64, z: f64) -> bool {
        x >= self.min[0] && x <= self.max[0] && z >= self.min[1] && z <= self.max[1]
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn depth(&self) -> f64 {
        self.max[1] - self.min[1]
    }
}

/// Eight corners ordered lexicographically by (x, y, z).
pub fn aabb_vertices(b: &Aabb) -> [Vec3; 8] {
    let mut out = [Vec3::ZERO; 8];
    for (i, v) in out.iter_mut().enumerate() {
        *v = Vec3::new(
            if i & 4 == 0 { b.min.x } else { b.max.x },
            if i & 2 == 0 { b.min.y } else { b.max.y },
            if i & 1 == 0 { b.min.z } else { b.max.z },
        );
    }
    out
}

/// Parameter interval `[t_enter, t_exit]` over which the infinite line
/// `origin + t * dir` lies inside `b`, or `None` if it misses.
pub fn slab_interval(origin: Vec3, dir: Vec3, b: &Aabb) -> Option<(f64, f64)> {
    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    for axis in 0..3 {
        let o = origin.component(axis);
        let d = dir.component(axis);
        let lo = b.min.component(axis);
        let hi = b.max.component(axis);
        if d == 0.0 {
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let mut t0 = (lo - o) / d;
        let mut t1 = (hi - o) / d;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_enter = t_enter.max(t0);
        t_exit = t_exit.min(t1);
        if t_enter > t_exit {
            return None;
        }
    }
    Some((t_enter, t_exit))
}

/// Smallest `t >= 0` such that `origin + t * dir` is inside or on `b`.
pub fn ray_aabb(origin: Vec3, dir: Vec3, b: &Aabb) -> Result<Option<f64>, GeometryError> {
    if dir.x == 0.0 && dir.y == 0.0 && dir.z == 0.0 {
        return Err(GeometryError::ZeroDirection);
    }
    Ok(match slab_interval(origin, dir, b) {
        Some((_, t_exit)) if t_exit < 0.0 => None,
        Some((t_enter, _)) => Some(t_enter.max(0.0)),
        None => None,
    })
}

/// Fraction of the segment length excluded at each end of an occlusion test.
pub const OCCLUSION_EPSILON: f64 = 1e-4;

/// True when any occluder intersects the open segment `p..q`, ignoring hits
/// within [`OCCLUSION_EPSILON`] of either endpoint.
pub fn segment_occluded(p: Vec3, q: Vec3, occluders: &[Aabb]) -> bool {
    // Canonical endpoint order makes the result exactly symmetric.
    let (a, b) = if (p.x, p.y, p.z) <= (q.x, q.y, q.z) {
        (p, q)
    } else {
        (q, p)
    };
    let dir = b - a;
    occluders.iter().any(|occ| match slab_interval(a, dir, occ) {
        Some((t0, t1)) => t0 < 1.0 - OCCLUSION_EPSILON && t1 > OCCLUSION_EPSILON,
        None => false,
    })
}

/// Pinhole camera intrinsics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraModel {
    pub vertical_fov: f64,
    pub aspect: f64,
    pub near: f64,
    pub far: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel {
            vertical_fov: 60f64.to_radians(),
            aspect: 16.0 / 9.0,
            near: 0.1,
            far: 200.0,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.vertical_fov > 0.0 && self.vertical_fov < PI) {
            return Err(GeometryError::InvalidCamera("vertical_fov must lie in (0, pi)"));
        }
        if !(self.aspect > 0.0 && self.aspect.is_finite()) {
            return Err(GeometryError::InvalidCamera("aspect must be positive"));
        }
        if !(self.near > 0.0 && self.near < self.far && self.far.is_finite()) {
            return Err(GeometryError::InvalidCamera("require 0 < near < far"));
        }
        Ok(())
    }

    pub fn tan_half_vertical(&self) -> f64 {
        (self.vertical_fov / 2.0).tan()
    }

    pub fn tan_half_horizontal(&self) -> f64 {
        self.tan_half_vertical() * self.aspect
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn normalize_yaw(yaw: f64) -> f64 {
    let wrapped = (yaw + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped >= PI {
        -PI
    } else {
        wrapped
    }
}

/// Yaw that faces along the ground direction `(dx, dz)`.
pub fn yaw_towards(dx: f64, dz: f64) -> f64 {
    normalize_yaw(dx.atan2(dz))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub yaw: f64,
}

impl Pose {
    pub fn new(position: Vec3, yaw: f64) -> Self {
        Pose {
            position,
            yaw: normalize_yaw(yaw),
        }
    }

    pub fn forward(&self) -> Vec3 {
        Vec3::new(self.yaw.sin(), 0.0, self.yaw.cos())
    }

    /// Horizontal axis of the image plane (camera-right).
    pub fn right(&self) -> Vec3 {
        Vec3::new(-self.yaw.cos(), 0.0, self.yaw.sin())
    }
}

/// Plane `normal . p + offset >= 0` marks the inside half-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    fn through(point: Vec3, normal: Vec3) -> Self {
        let n = normal * (1.0 / normal.length());
        Plane {
            normal: n,
            offset: -n.dot(point),
        }
    }

    pub fn signed_distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) + self.offset
    }
}

/// View volume of a posed camera as six inward-facing planes, in the order
/// near, far, left, right, bottom, top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frustum {
    pub planes: [Plane; 6],
}

impl Frustum {
    pub fn new(pose: &Pose, camera: &CameraModel) -> Self {
        let eye = pose.position;
        let fwd = pose.forward();
        let right = pose.right();
        let up = Vec3::UP;
        let th = camera.tan_half_horizontal();
        let tv = camera.tan_half_vertical();
        // Side planes pass through the eye; their normals point inward.
        let left = fwd * th + right;
        let rightn = fwd * th - right;
        let bottom = fwd * tv + up;
        let top = fwd * tv - up;
        Frustum {
            planes: [
                Plane::through(eye + fwd * camera.near, fwd),
                Plane::through(eye + fwd * camera.far, -fwd),
                Plane::through(eye, left),
                Plane::through(eye, rightn),
                Plane::through(eye, bottom),
                Plane::through(eye, top),
            ],
        }
    }

    pub fn signed_distances(&self, p: Vec3) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (d, plane) in out.iter_mut().zip(&self.planes) {
            *d = plane.signed_distance(p);
        }
        out
    }

    pub fn contains(&self, p: Vec3) -> bool {
        self.planes.iter().all(|pl| pl.signed_distance(p) >= 0.0)
    }
}

/// Whether `point` lies inside (or on) the view frustum of the posed camera.
pub fn frustum_contains(pose: &Pose, camera: &CameraModel, point: Vec3) -> bool {
    Frustum::new(pose, camera).contains(point)
}
