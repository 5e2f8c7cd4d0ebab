//! Comparison triangles, angles, the CAT(0) audit, convex projection and circumcenters.

mod audit;
mod circumcenter;
mod convex;

pub use audit::{audit_cat0, audit_quadruples, AuditReport, AuditRow, DistanceQuadruple, Inequality};
pub use circumcenter::{circumcenter, circumradius_at};
pub use convex::{ConvexSet, EuclideanBall, EuclideanConvex, HalfSpace, TreeConvex};

use crate::error::{Error, Result};
use crate::numeric::clamp_unit;
use crate::spaces::{Point, Space};

/// A Euclidean triangle with prescribed side lengths, placed with x at the origin
/// and y on the positive first axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTriangle {
    pub xy: f64,
    pub yz: f64,
    pub zx: f64,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
}

impl ComparisonTriangle {
    pub fn new(xy: f64, yz: f64, zx: f64) -> Result<Self> {
        let slack = 1e-12 * (xy + yz + zx).max(1.0);
        if xy < 0.0 || yz < 0.0 || zx < 0.0 || xy > yz + zx + slack || yz > xy + zx + slack || zx > xy + yz + slack {
            return Err(Error::Argument("side lengths violate the triangle inequality".into()));
        }
        let z = if xy == 0.0 {
            [zx, 0.0]
        } else {
            let u = (xy * xy + zx * zx - yz * yz) / (2.0 * xy);
            [u, (zx * zx - u * u).max(0.0).sqrt()]
        };
        Ok(ComparisonTriangle {
            xy,
            yz,
            zx,
            x: [0.0, 0.0],
            y: [xy, 0.0],
            z,
        })
    }

    /// Comparison point of the point at parameter t on [x, y].
    pub fn on_xy(&self, t: f64) -> [f64; 2] {
        [t * self.xy, 0.0]
    }

    /// Distance from z̄ to the comparison point at parameter t on [x̄, ȳ].
    pub fn apex_distance(&self, t: f64) -> f64 {
        let q = self.on_xy(t);
        (self.z[0] - q[0]).hypot(self.z[1] - q[1])
    }
}

/// Angle at p in the Euclidean triangle with the side lengths of (p, x, y).
pub fn comparison_angle(space: &Space, p: &Point, x: &Point, y: &Point) -> Result<f64> {
    let a = space.distance(p, x)?;
    let b = space.distance(p, y)?;
    let c = space.distance(x, y)?;
    if a == 0.0 || b == 0.0 {
        return Err(Error::DegenerateVertex("vertex coincides with an endpoint".into()));
    }
    Ok(law_of_cosines(a, b, c))
}

/// Angle opposite side c in a triangle with sides a, b, c.
pub fn law_of_cosines(a: f64, b: f64, c: f64) -> f64 {
    clamp_unit((a * a + b * b - c * c) / (2.0 * a * b)).acos()
}

/// Alexandrov angle at p between the geodesics to x and y, as the limit of
/// 2·asin(chord / 2s) at shrinking arclength s.
pub fn alexandrov_angle(space: &Space, p: &Point, x: &Point, y: &Point) -> Result<f64> {
    let a = space.distance(p, x)?;
    let b = space.distance(p, y)?;
    space.validate(y)?;
    if a == 0.0 || b == 0.0 {
        return Err(Error::DegenerateVertex("vertex coincides with an endpoint".into()));
    }
    let estimate = |s: f64| {
        let u = space.geo(p, x, s / a);
        let v = space.geo(p, y, s / b);
        2.0 * clamp_unit(space.d(&u, &v) / (2.0 * s)).asin()
    };
    let mut s = a.min(b);
    let mut previous = estimate(s);
    for _ in 0..80 {
        s *= 0.5;
        let value = estimate(s);
        if (value - previous).abs() < 1e-7 {
            return Ok(value);
        }
        previous = value;
    }
    Err(Error::NoConvergence {
        previous,
        last: estimate(s * 0.5),
    })
}
