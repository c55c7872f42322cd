//! 2D geometric primitives: vectors, disks, tangent-point computation and
//! segment-disk intersection.
//!
//! All tangent math is done with vector algebra only (no `atan2`), so there
//! are no branch cuts to worry about near the axes.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use thiserror::Error;

/// Degeneracy tolerance for geometric predicates, in meters.
pub const EPS_GEOM: f64 = 1e-9;

/// A 2D vector in meters (or m/s when used as a velocity).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite(), "non-finite Vec2 ({x}, {y})");
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` lies
    /// counterclockwise of `self`.
    pub fn det(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Vec2) -> f64 {
        (self - other).norm_sq()
    }

    /// Counterclockwise perpendicular (rotation by +90 degrees).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 {
            Some(self / n)
        } else {
            None
        }
    }

    /// Rescales to magnitude at most `max`.
    pub fn clamp_norm(self, max: f64) -> Vec2 {
        let n_sq = self.norm_sq();
        if n_sq > max * max {
            self * (max / n_sq.sqrt())
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        *self = *self + o;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A disk with center and radius, both in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec2,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Vec2, radius: f64) -> Self {
        debug_assert!(radius >= 0.0, "negative disk radius {radius}");
        Disk { center, radius }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.dist(self.center) < self.radius
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    /// The query point is on or inside the disk, so no tangent exists.
    #[error("no tangent from a point on or inside the disk (distance {dist}, radius {radius})")]
    DegenerateTangent { dist: f64, radius: f64 },
}

/// Both tangent points on `disk` as seen from the external point `p`.
///
/// Each returned point `T` satisfies `(T - c)·(T - p) = 0` and `|T - c| = r`.
/// The first element is the counterclockwise one as seen from `p` toward the
/// disk center.
pub fn tangent_points(p: Vec2, disk: &Disk) -> Result<(Vec2, Vec2), GeomError> {
    let to_p = p - disk.center;
    let dist = to_p.norm();
    let r = disk.radius;
    if dist <= r + EPS_GEOM {
        return Err(GeomError::DegenerateTangent { dist, radius: r });
    }
    // Rotate the center-to-point direction by +/- beta with cos(beta) = r/dist,
    // then scale to the disk boundary.
    let leg = (dist * dist - r * r).sqrt();
    let dir = to_p / dist;
    let side = dir.perp();
    let ccw = disk.center + (dir * r + side * leg) * (r / dist);
    let cw = disk.center + (dir * r - side * leg) * (r / dist);
    Ok((ccw, cw))
}

/// True iff the closed segment `[a, b]` comes within `disk.radius` of the
/// disk center.
pub fn segment_disk_intersects(a: Vec2, b: Vec2, disk: &Disk) -> bool {
    point_segment_distance(disk.center, a, b) <= disk.radius
}

/// Distance from point `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Picks the tangent point of the disk inflated by `inflate` whose direction
/// from `p_r` best aligns with the direction toward `goal`. Exact ties go to
/// the counterclockwise point.
pub fn select_tangent(
    p_r: Vec2,
    group: &Disk,
    inflate: f64,
    goal: Vec2,
) -> Result<Vec2, GeomError> {
    let inflated = Disk::new(group.center, group.radius + inflate);
    let (ccw, cw) = tangent_points(p_r, &inflated)?;
    let to_goal = match (goal - p_r).normalized() {
        Some(u) => u,
        None => return Ok(ccw),
    };
    let align = |t: Vec2| -> f64 {
        (t - p_r)
            .normalized()
            .map(|u| u.dot(to_goal))
            .unwrap_or(f64::NEG_INFINITY)
    };
    if align(cw) > align(ccw) {
        Ok(cw)
    } else {
        Ok(ccw)
    }
}
