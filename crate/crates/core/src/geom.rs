//! Points, small matrices and the model domains.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// A 2×2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 {
            m: [[a11, a12], [a21, a22]],
        }
    }

    pub fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn zero() -> Self {
        Mat2::new(0.0, 0.0, 0.0, 0.0)
    }

    /// a vvᵀ + b I
    pub fn outer_plus(a: f64, v: Point2, b: f64) -> Self {
        Mat2::new(
            a * v.x * v.x + b,
            a * v.x * v.y,
            a * v.y * v.x,
            a * v.y * v.y + b,
        )
    }

    /// a uvᵀ
    pub fn outer(a: f64, u: Point2, v: Point2) -> Self {
        Mat2::new(a * u.x * v.x, a * u.x * v.y, a * u.y * v.x, a * u.y * v.y)
    }

    pub fn transpose(self) -> Self {
        Mat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn scale(self, s: f64) -> Self {
        Mat2::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    pub fn apply(self, v: Point2) -> Point2 {
        Point2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    pub fn max_abs(self) -> f64 {
        self.m
            .iter()
            .flatten()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-1.0)
    }
}

/// Points closer to the boundary than this are rejected by the kernel layer
/// rather than extrapolated.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// The model domains all kernels and meshes live on.
///
/// Rectangles sit with one corner at the origin: `(0, width) × (0, height)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    UnitDisc,
    Disc { radius: f64, center: Point2 },
    Rectangle { width: f64, height: f64 },
}

impl DomainSpec {
    pub fn unit_disc() -> Self {
        DomainSpec::UnitDisc
    }

    /// Validates the shape parameters.
    pub fn validate(&self) -> crate::Result<()> {
        let ok = match *self {
            DomainSpec::UnitDisc => true,
            DomainSpec::Disc { radius, .. } => radius > 0.0 && radius.is_finite(),
            DomainSpec::Rectangle { width, height } => {
                width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(crate::Error::ResolutionInvalid(
                "domain dimensions must be strictly positive".into(),
            ))
        }
    }

    /// Disc radius and center, if this is a disc.
    pub fn disc_params(&self) -> Option<(f64, Point2)> {
        match *self {
            DomainSpec::UnitDisc => Some((1.0, Point2::ORIGIN)),
            DomainSpec::Disc { radius, center } => Some((radius, center)),
            DomainSpec::Rectangle { .. } => None,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            DomainSpec::UnitDisc => 2.0,
            DomainSpec::Disc { radius, .. } => 2.0 * radius,
            DomainSpec::Rectangle { width, height } => width.hypot(height),
        }
    }

    /// Signed distance to the boundary; positive inside.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        match *self {
            DomainSpec::UnitDisc => 1.0 - p.norm(),
            DomainSpec::Disc { radius, center } => radius - (p - center).norm(),
            DomainSpec::Rectangle { width, height } => {
                let dx = p.x.min(width - p.x);
                let dy = p.y.min(height - p.y);
                dx.min(dy)
            }
        }
    }

    /// Strict interiority test with the kernel-layer margin.
    pub fn is_strictly_interior(&self, p: Point2) -> bool {
        self.boundary_distance(p) > BOUNDARY_MARGIN
    }

    /// Errors unless `p` is strictly interior.
    pub fn require_interior(&self, p: Point2) -> crate::Result<()> {
        if self.is_strictly_interior(p) {
            Ok(())
        } else {
            Err(crate::Error::OutOfDomain(p.x, p.y))
        }
    }
}
