//! Planar poses, points and line segments.
//!
//! Lengths are millimetres and angles are degrees everywhere outside of
//! trigonometric calls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle in degrees into `(-180, 180]`.
pub fn normalize_deg(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing along `heading_deg`.
    pub fn from_heading(heading_deg: f64) -> Self {
        let r = heading_deg.to_radians();
        Self::new(r.cos(), r.sin())
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the planar cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }

    pub fn normalized(self) -> Self {
        self.scale(1.0 / self.norm())
    }

    /// Heading of this vector in degrees.
    pub fn heading(self) -> f64 {
        self.y.atan2(self.x).to_degrees()
    }

    pub fn rotated(self, angle_deg: f64) -> Self {
        let (s, c) = angle_deg.to_radians().sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Rotates this point about `centre`.
    pub fn rotated_about(self, centre: Self, angle_deg: f64) -> Self {
        centre + (self - centre).rotated(angle_deg)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Point2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Planar rigid pose. The heading is kept in `(-180, 180]` degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2 {
    pub const IDENTITY: Pose2 = Pose2 {
        x: 0.0,
        y: 0.0,
        heading: 0.0,
    };

    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_deg(heading),
        }
    }

    pub fn from_position(position: Point2, heading: f64) -> Self {
        Self::new(position.x, position.y, heading)
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    /// Unit vector along the heading.
    pub fn axis(&self) -> Point2 {
        Point2::from_heading(self.heading)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.heading.is_finite()
    }

    /// Maps a point expressed in this pose's frame into the parent frame.
    pub fn transform_point(&self, local: Point2) -> Point2 {
        self.position() + local.rotated(self.heading)
    }

    /// Maps a parent-frame point into this pose's frame.
    pub fn inverse_transform_point(&self, world: Point2) -> Point2 {
        (world - self.position()).rotated(-self.heading)
    }

    pub fn inverse(&self) -> Pose2 {
        let p = (-self.position()).rotated(-self.heading);
        Pose2::new(p.x, p.y, -self.heading)
    }

    pub fn compose(&self, child: &Pose2) -> Pose2 {
        compose(self, child)
    }

    /// This pose carried rigidly around `centre` by `angle_deg`.
    pub fn rotated_about(&self, centre: Point2, angle_deg: f64) -> Pose2 {
        Pose2::from_position(self.position().rotated_about(centre, angle_deg), self.heading + angle_deg)
    }
}

/// Rigid-transform composition `parent ∘ child`.
pub fn compose(parent: &Pose2, child: &Pose2) -> Pose2 {
    let p = parent.transform_point(child.position());
    Pose2::new(p.x, p.y, parent.heading + child.heading)
}

/// The pose of `to` expressed in the frame of `from`, so that
/// `compose(from, relative_pose(from, to)) == to`.
pub fn relative_pose(from: &Pose2, to: &Pose2) -> Pose2 {
    let p = from.inverse_transform_point(to.position());
    Pose2::new(p.x, p.y, to.heading - from.heading)
}

/// A flat face of an object. The outward normal points away from the solid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    a: Point2,
    b: Point2,
    outward_normal: Point2,
}

impl LineSegment {
    /// Builds a face from its endpoints; the outward normal is the
    /// right-hand perpendicular of `b - a`.
    pub fn new(a: Point2, b: Point2) -> Result<Self> {
        let d = b - a;
        let len = d.norm();
        if !(len > 1e-12) || !a.is_finite() || !b.is_finite() {
            return Err(Error::DegenerateSurface);
        }
        let t = d.scale(1.0 / len);
        Ok(Self {
            a,
            b,
            outward_normal: Point2::new(t.y, -t.x),
        })
    }

    pub fn a(&self) -> Point2 {
        self.a
    }

    pub fn b(&self) -> Point2 {
        self.b
    }

    pub fn outward_normal(&self) -> Point2 {
        self.outward_normal
    }

    pub fn inward_normal(&self) -> Point2 {
        -self.outward_normal
    }

    /// Unit vector from `a` to `b`.
    pub fn tangent(&self) -> Point2 {
        (self.b - self.a).normalized()
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn midpoint(&self) -> Point2 {
        (self.a + self.b).scale(0.5)
    }

    /// Signed distance of `p` from the face's line, positive on the
    /// outward side.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        self.outward_normal.dot(p - self.a)
    }

    /// Signed coordinate along the face of the perpendicular foot of `p`,
    /// measured from the midpoint in the `a → b` direction.
    pub fn tangential_coordinate(&self, p: Point2) -> f64 {
        self.tangent().dot(p - self.midpoint())
    }
}
