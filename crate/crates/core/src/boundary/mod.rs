//! Boundary at infinity: geodesic rays, Busemann functions, Tits angles.

mod circumcenter;

pub use circumcenter::{angular_circumcenter, boundary_grid};

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{argument, domain, Error, Result};
use crate::geometry::alexandrov_angle;
use crate::numeric::{golden_min, normalized, unit_angle};
use crate::spaces::{Isometry, Point, Space, TreePoint};

/// An asymptote class of geodesic rays.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryPoint {
    /// Unit direction vector.
    Euclidean(Vec<f64>),
    /// End of the ray with this index.
    Tree(usize),
    /// Point of the spherical join ∂L * ∂R: weight angle theta, with the left part
    /// absent exactly when theta = pi/2 and the right part absent exactly when theta = 0.
    Join {
        theta: f64,
        left: Option<Box<BoundaryPoint>>,
        right: Option<Box<BoundaryPoint>>,
    },
}

impl BoundaryPoint {
    pub fn direction(v: &[f64]) -> Result<Self> {
        normalized(v)
            .map(BoundaryPoint::Euclidean)
            .ok_or_else(|| argument("boundary direction must be a nonzero vector"))
    }

    /// Canonical join: the component with zero weight is dropped.
    pub fn join(theta: f64, left: Option<BoundaryPoint>, right: Option<BoundaryPoint>) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(argument(format!("join angle {theta} outside [0, pi/2]")));
        }
        let left = if theta == FRAC_PI_2 { None } else { left };
        let right = if theta == 0.0 { None } else { right };
        if (theta < FRAC_PI_2 && left.is_none()) || (theta > 0.0 && right.is_none()) {
            return Err(domain("join component with positive weight is missing"));
        }
        Ok(BoundaryPoint::Join {
            theta,
            left: left.map(Box::new),
            right: right.map(Box::new),
        })
    }

    pub fn left(p: BoundaryPoint) -> Self {
        BoundaryPoint::Join {
            theta: 0.0,
            left: Some(Box::new(p)),
            right: None,
        }
    }

    pub fn right(p: BoundaryPoint) -> Self {
        BoundaryPoint::Join {
            theta: FRAC_PI_2,
            left: None,
            right: Some(Box::new(p)),
        }
    }
}

pub fn validate_boundary(space: &Space, xi: &BoundaryPoint) -> Result<()> {
    match (space, xi) {
        (Space::Euclidean(n), BoundaryPoint::Euclidean(u)) => {
            if u.len() != *n {
                return Err(domain(format!("direction has {} coordinates, space has {n}", u.len())));
            }
            let norm = crate::numeric::norm(u);
            if (norm - 1.0).abs() > 1e-12 {
                return Err(domain(format!("direction is not a unit vector (norm {norm})")));
            }
            Ok(())
        }
        (Space::Tree(t), BoundaryPoint::Tree(e)) => {
            if *e < t.end_count() {
                Ok(())
            } else {
                Err(domain(format!("tree has no end {e}")))
            }
        }
        (Space::Product(l, r), BoundaryPoint::Join { theta, left, right }) => {
            if !(0.0..=FRAC_PI_2).contains(theta) {
                return Err(domain("join angle outside [0, pi/2]"));
            }
            match left {
                Some(p) if *theta < FRAC_PI_2 => validate_boundary(l, p)?,
                None if *theta == FRAC_PI_2 => {}
                _ => return Err(domain("left join component inconsistent with theta")),
            }
            match right {
                Some(p) if *theta > 0.0 => validate_boundary(r, p),
                None if *theta == 0.0 => Ok(()),
                _ => Err(domain("right join component inconsistent with theta")),
            }
        }
        _ => Err(domain(format!("boundary point does not belong to a {} space", space.kind()))),
    }
}

/// Point at arclength t on the ray from x toward xi; unchecked.
pub fn ray_at(space: &Space, x: &Point, xi: &BoundaryPoint, t: f64) -> Point {
    match (space, x, xi) {
        (Space::Euclidean(_), Point::Euclidean(v), BoundaryPoint::Euclidean(u)) => {
            Point::Euclidean(v.iter().zip(u).map(|(a, b)| a + t * b).collect())
        }
        (Space::Tree(tr), Point::Tree(p), BoundaryPoint::Tree(e)) => Point::Tree(tr.ray_point(p, *e, t)),
        (Space::Product(l, r), Point::Product(a, b), BoundaryPoint::Join { theta, left, right }) => {
            let (s, c) = theta.sin_cos();
            let a2 = left.as_ref().map_or_else(|| (**a).clone(), |xl| ray_at(l, a, xl, t * c));
            let b2 = right.as_ref().map_or_else(|| (**b).clone(), |xr| ray_at(r, b, xr, t * s));
            Point::pair(a2, b2)
        }
        _ => panic!("ray data of the wrong kind"),
    }
}

pub fn ray_point(space: &Space, x: &Point, xi: &BoundaryPoint, t: f64) -> Result<Point> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(argument("ray parameter must be finite and nonnegative"));
    }
    space.validate(x)?;
    validate_boundary(space, xi)?;
    Ok(ray_at(space, x, xi, t))
}

/// Busemann function value up to the normalization at a base point: h(x) with
/// b_{x0, xi}(x) = h(x) - h(x0).
fn horo(space: &Space, xi: &BoundaryPoint, x: &Point) -> f64 {
    match (space, x, xi) {
        (Space::Euclidean(_), Point::Euclidean(v), BoundaryPoint::Euclidean(u)) => -crate::numeric::dot(v, u),
        (Space::Tree(tr), Point::Tree(p), BoundaryPoint::Tree(e)) => tr.horofunction(*e, p),
        (Space::Product(l, r), Point::Product(a, b), BoundaryPoint::Join { theta, left, right }) => {
            let (s, c) = theta.sin_cos();
            left.as_ref().map_or(0.0, |xl| c * horo(l, xl, a)) + right.as_ref().map_or(0.0, |xr| s * horo(r, xr, b))
        }
        _ => panic!("Busemann data of the wrong kind"),
    }
}

/// b_{x0, xi}(x); unchecked.
pub fn busemann_at(space: &Space, x0: &Point, xi: &BoundaryPoint, x: &Point) -> f64 {
    match (space, x0, x, xi) {
        (Space::Euclidean(_), Point::Euclidean(p), Point::Euclidean(q), BoundaryPoint::Euclidean(u)) => {
            -p.iter().zip(q).zip(u).map(|((a, b), c)| (b - a) * c).sum::<f64>()
        }
        (Space::Product(l, r), Point::Product(a0, b0), Point::Product(a, b), BoundaryPoint::Join { theta, left, right }) => {
            let (s, c) = theta.sin_cos();
            left.as_ref().map_or(0.0, |xl| c * busemann_at(l, a0, xl, a))
                + right.as_ref().map_or(0.0, |xr| s * busemann_at(r, b0, xr, b))
        }
        _ => horo(space, xi, x) - horo(space, xi, x0),
    }
}

pub fn busemann(space: &Space, x0: &Point, xi: &BoundaryPoint, x: &Point) -> Result<f64> {
    space.validate(x0)?;
    space.validate(x)?;
    validate_boundary(space, xi)?;
    Ok(busemann_at(space, x0, xi, x))
}

/// Closed-form Tits angle.
pub fn tits_angle(space: &Space, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<f64> {
    validate_boundary(space, xi)?;
    validate_boundary(space, eta)?;
    Ok(tits_unchecked(space, xi, eta))
}

pub(crate) fn tits_unchecked(space: &Space, xi: &BoundaryPoint, eta: &BoundaryPoint) -> f64 {
    2.0 * (half_chord(space, xi, eta)).clamp(0.0, 1.0).asin()
}

/// sin(angle / 2), computed without cancellation.
fn half_chord(space: &Space, xi: &BoundaryPoint, eta: &BoundaryPoint) -> f64 {
    match (space, xi, eta) {
        (Space::Euclidean(_), BoundaryPoint::Euclidean(u), BoundaryPoint::Euclidean(v)) => (unit_angle(u, v) / 2.0).sin(),
        (Space::Tree(_), BoundaryPoint::Tree(a), BoundaryPoint::Tree(b)) => {
            if a == b {
                0.0
            } else {
                1.0
            }
        }
        (
            Space::Product(l, r),
            BoundaryPoint::Join { theta: t1, left: l1, right: r1 },
            BoundaryPoint::Join { theta: t2, left: l2, right: r2 },
        ) => {
            // |u - u'|^2 for u = (cos t1 a, sin t1 b) on the join, with |a - a'|^2 = 4 sin^2(angle/2).
            let (s1, c1) = t1.sin_cos();
            let (s2, c2) = t2.sin_cos();
            let hl = match (l1, l2) {
                (Some(a), Some(b)) => half_chord(l, a, b),
                _ => 0.0,
            };
            let hr = match (r1, r2) {
                (Some(a), Some(b)) => half_chord(r, a, b),
                _ => 0.0,
            };
            let chord2 = (c1 - c2).powi(2) + 4.0 * c1 * c2 * hl * hl + (s1 - s2).powi(2) + 4.0 * s1 * s2 * hr * hr;
            (chord2.max(0.0).sqrt() / 2.0).min(1.0)
        }
        _ => panic!("boundary points of the wrong kind"),
    }
}

/// Base point at which rays toward xi and eta have exactly computable chords.
fn chord_base(space: &Space, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Point {
    match (space, xi, eta) {
        (Space::Tree(t), BoundaryPoint::Tree(a), _) => Point::Tree(TreePoint::Vertex(t.rays()[*a].at)),
        (Space::Product(l, r), BoundaryPoint::Join { left: l1, right: r1, .. }, BoundaryPoint::Join { left: l2, right: r2, .. }) => {
            let pick = |s: &Space, a: &Option<Box<BoundaryPoint>>, b: &Option<Box<BoundaryPoint>>| match (a, b) {
                (Some(x), Some(y)) => chord_base(s, x, y),
                (Some(x), None) | (None, Some(x)) => chord_base(s, x, x),
                (None, None) => s.base_point(),
            };
            Point::pair(pick(l, l1, l2), pick(r, r1, r2))
        }
        _ => space.base_point(),
    }
}

/// Tits angle as 2·asin(d(c(t), c'(t)) / 2t) at t = t_max, for rays from a common base point.
pub fn tits_angle_limit(space: &Space, xi: &BoundaryPoint, eta: &BoundaryPoint, t_max: f64) -> Result<f64> {
    if !(t_max >= 1.0) {
        return Err(argument("t_max must be at least 1"));
    }
    validate_boundary(space, xi)?;
    validate_boundary(space, eta)?;
    if xi == eta {
        return Ok(0.0);
    }
    let x = chord_base(space, xi, eta);
    let p = ray_at(space, &x, xi, t_max);
    let q = ray_at(space, &x, eta, t_max);
    Ok(2.0 * (space.d(&p, &q) / (2.0 * t_max)).clamp(0.0, 1.0).asin())
}

/// Comparison angle at x0 between the points at distance t along the rays toward xi and eta.
fn ray_comparison(space: &Space, x0: &Point, xi: &BoundaryPoint, eta: &BoundaryPoint, t: f64) -> f64 {
    let p = ray_at(space, x0, xi, t);
    let q = ray_at(space, x0, eta, t);
    2.0 * (space.d(&p, &q) / (2.0 * t)).clamp(0.0, 1.0).asin()
}

const ANGLE_GRID: f64 = 1e-2;

/// ∠ⁿ(xi, eta) = sup over t in [1, n] of the comparison angle at x0.
pub fn angle_n(space: &Space, x0: &Point, xi: &BoundaryPoint, eta: &BoundaryPoint, n: u64) -> Result<f64> {
    Ok(angle_n_trace(space, x0, xi, eta, &[n])?[0])
}

/// ∠ⁿ for several n at once, sharing one sweep of the t-grid; `ns` must be nondecreasing.
pub fn angle_n_trace(space: &Space, x0: &Point, xi: &BoundaryPoint, eta: &BoundaryPoint, ns: &[u64]) -> Result<Vec<f64>> {
    space.validate(x0)?;
    validate_boundary(space, xi)?;
    validate_boundary(space, eta)?;
    if ns.iter().any(|&n| n < 1) || ns.windows(2).any(|w| w[0] > w[1]) {
        return Err(argument("n must be a nondecreasing list of positive integers"));
    }
    if xi == eta {
        return Ok(vec![0.0; ns.len()]);
    }
    let f = |t: f64| ray_comparison(space, x0, xi, eta, t);
    let mut out = Vec::with_capacity(ns.len());
    let mut best = (1.0, f(1.0));
    let mut carried = 0.0f64;
    let mut k: u64 = 0;
    for &n in ns {
        let n = n as f64;
        loop {
            let t = 1.0 + (k + 1) as f64 * ANGLE_GRID;
            if t > n + 1e-12 {
                break;
            }
            k += 1;
            let v = f(t.min(n));
            if v > best.1 {
                best = (t.min(n), v);
            }
        }
        // Endpoint and local refinement around the best grid node.
        let mut value = best.1.max(f(n));
        let lo = (best.0 - ANGLE_GRID).max(1.0);
        let hi = (best.0 + ANGLE_GRID).min(n);
        if hi > lo {
            let (_, neg) = golden_min(|t| -f(t), lo, hi, 1e-10);
            value = value.max(-neg);
        }
        // The supremum over [1, n] dominates every earlier supremum.
        carried = carried.max(value.clamp(0.0, PI));
        out.push(carried);
    }
    Ok(out)
}

/// Alexandrov angle at x between the rays toward xi and eta.
pub fn ray_angle_at(space: &Space, x: &Point, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<f64> {
    validate_boundary(space, xi)?;
    validate_boundary(space, eta)?;
    let p = ray_at(space, x, xi, 1.0);
    let q = ray_at(space, x, eta, 1.0);
    alexandrov_angle(space, x, &p, &q)
}

impl Isometry {
    /// Action on the boundary at infinity.
    pub fn map_boundary(&self, xi: &BoundaryPoint) -> Result<BoundaryPoint> {
        match (self, xi) {
            (Isometry::Euclidean { linear, .. }, BoundaryPoint::Euclidean(u)) => {
                if u.len() != linear.ncols() {
                    return Err(domain("direction has the wrong dimension"));
                }
                let v = linear * nalgebra::DVector::from_column_slice(u);
                BoundaryPoint::direction(v.as_slice())
            }
            (Isometry::Tree(t), BoundaryPoint::Tree(e)) => {
                if *e >= t.domain.end_count() {
                    return Err(domain(format!("tree has no end {e}")));
                }
                Ok(BoundaryPoint::Tree(t.apply_end(*e)))
            }
            (Isometry::Product(gl, gr), BoundaryPoint::Join { theta, left, right }) => Ok(BoundaryPoint::Join {
                theta: *theta,
                left: left.as_ref().map(|p| gl.map_boundary(p).map(Box::new)).transpose()?,
                right: right.as_ref().map(|p| gr.map_boundary(p).map(Box::new)).transpose()?,
            }),
            _ => Err(Error::Domain("boundary point and isometry are of different kinds".into())),
        }
    }
}

/// Human-readable rendering used in reports.
pub fn format_boundary(space: &Space, xi: &BoundaryPoint) -> String {
    match (space, xi) {
        (Space::Tree(t), BoundaryPoint::Tree(e)) if *e < t.end_count() => format!("end:{}", t.ray_label(*e)),
        (_, BoundaryPoint::Euclidean(u)) => {
            let parts: Vec<String> = u.iter().map(|x| format!("{x}")).collect();
            format!("dir({})", parts.join(" "))
        }
        (Space::Product(l, r), BoundaryPoint::Join { theta, left, right }) => format!(
            "join({theta}; {}; {})",
            left.as_ref().map_or("-".into(), |p| format_boundary(l, p)),
            right.as_ref().map_or("-".into(), |p| format_boundary(r, p))
        ),
        (_, other) => format!("{other:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Segment, Tree};

    fn e(v: &[f64]) -> Point {
        Point::Euclidean(v.to_vec())
    }

    fn dir(v: &[f64]) -> BoundaryPoint {
        BoundaryPoint::direction(v).unwrap()
    }

    #[test]
    fn euclidean_ray_and_busemann() {
        let x = Space::Euclidean(2);
        let p = ray_point(&x, &e(&[0.0, 0.0]), &dir(&[1.0, 0.0]), 2.0).unwrap();
        assert_eq!(p, e(&[2.0, 0.0]));
        let b = busemann(&x, &e(&[0.0, 0.0]), &dir(&[1.0, 0.0]), &e(&[2.0, 3.0])).unwrap();
        assert_eq!(b, -2.0);
        let z = busemann(&x, &e(&[1.0, 0.0]), &dir(&[1.0, 0.0]), &e(&[2.0, 3.0])).unwrap();
        assert_eq!(z, -1.0);
    }

    #[test]
    fn tripod_busemann_and_ray() {
        let t = Tree::tripod();
        let x = Space::tree(t.clone());
        let o = Point::Tree(TreePoint::Vertex(0));
        let b1 = Point::Tree(t.point_on(Segment::Ray(1), 1.0).unwrap());
        assert_eq!(busemann(&x, &o, &BoundaryPoint::Tree(0), &b1).unwrap(), 1.0);
        let p = ray_point(&x, &b1, &BoundaryPoint::Tree(0), 1.5).unwrap();
        assert_eq!(p, Point::Tree(TreePoint::Ray { ray: 0, offset: 0.5 }));
        assert!(ray_point(&x, &o, &BoundaryPoint::Tree(5), 1.0).is_err());
    }

    #[test]
    fn tits_closed_forms() {
        let x = Space::Euclidean(2);
        assert!((tits_angle(&x, &dir(&[1.0, 0.0]), &dir(&[0.0, 1.0])).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let t = Space::tripod();
        assert_eq!(tits_angle(&t, &BoundaryPoint::Tree(0), &BoundaryPoint::Tree(1)).unwrap(), PI);
        let p = Space::product(Space::Euclidean(2), Space::tripod());
        let a = BoundaryPoint::left(dir(&[1.0, 0.0]));
        let b = BoundaryPoint::right(BoundaryPoint::Tree(0));
        assert!((tits_angle(&p, &a, &b).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(tits_angle(&p, &a, &a).unwrap(), 0.0);
    }

    #[test]
    fn join_canonical_form() {
        let j = BoundaryPoint::join(0.0, Some(dir(&[1.0])), Some(BoundaryPoint::Tree(0))).unwrap();
        assert_eq!(j, BoundaryPoint::left(dir(&[1.0])));
        assert!(BoundaryPoint::join(0.3, Some(dir(&[1.0])), None).is_err());
        let bounded = Space::product(Space::Euclidean(1), Space::point());
        let bad = BoundaryPoint::join(0.3, Some(dir(&[1.0])), Some(BoundaryPoint::Tree(0))).unwrap();
        assert!(validate_boundary(&bounded, &bad).is_err());
    }

    #[test]
    fn limits_match_closed_forms() {
        let x = Space::Euclidean(2);
        let v = tits_angle_limit(&x, &dir(&[1.0, 0.0]), &dir(&[0.0, 1.0]), 1e6).unwrap();
        assert!((v - FRAC_PI_2).abs() < 1e-6);
        let t = Space::tripod();
        let v = tits_angle_limit(&t, &BoundaryPoint::Tree(0), &BoundaryPoint::Tree(2), 1e3).unwrap();
        assert!((v - PI).abs() < 1e-6);
    }

    #[test]
    fn angle_n_tripod_at_two() {
        let t = Tree::tripod();
        let x = Space::tree(t.clone());
        let b1 = Point::Tree(t.point_on(Segment::Ray(1), 1.0).unwrap());
        let v = angle_n(&x, &b1, &BoundaryPoint::Tree(0), &BoundaryPoint::Tree(2), 2).unwrap();
        assert!((v - PI / 3.0).abs() < 1e-12);
        let e2 = Space::Euclidean(2);
        let w = angle_n(&e2, &e(&[0.0, 0.0]), &dir(&[1.0, 0.0]), &dir(&[0.0, 1.0]), 7).unwrap();
        assert!((w - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn boundary_action() {
        let g = Isometry::rotation2(FRAC_PI_2, [3.0, -1.0]);
        let u = g.map_boundary(&dir(&[1.0, 0.0])).unwrap();
        assert!(tits_angle(&Space::Euclidean(2), &u, &dir(&[0.0, 1.0])).unwrap() < 1e-15);
    }
}
