//! Convex function handles: weighted Busemann sums in closed form, or arbitrary closures.

use std::fmt;
use std::sync::Arc;

use crate::boundary::{busemann_at, validate_boundary, BoundaryPoint};
use crate::error::{Error, Result};
use crate::geometry::{ConvexSet, TreeConvex};
use crate::numeric::{golden_min, nelder_mead, norm};
use crate::spaces::{Point, Space, TreePoint};

/// offset + sum_i w_i b_{base_i, xi_i}.
#[derive(Debug, Clone, PartialEq)]
pub struct BusemannSum {
    pub terms: Vec<(f64, Point, BoundaryPoint)>,
    pub offset: f64,
}

#[derive(Clone)]
pub enum ConvexFunction {
    Busemann(BusemannSum),
    Custom(Arc<dyn Fn(&Point) -> f64 + Send + Sync>),
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexFunction::Busemann(b) => f.debug_tuple("Busemann").field(b).finish(),
            ConvexFunction::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl BusemannSum {
    pub fn single(base: Point, xi: BoundaryPoint) -> Self {
        BusemannSum {
            terms: vec![(1.0, base, xi)],
            offset: 0.0,
        }
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        for (w, base, xi) in &self.terms {
            if !w.is_finite() {
                return Err(Error::Argument("Busemann weight must be finite".into()));
            }
            space.validate(base)?;
            validate_boundary(space, xi)?;
        }
        Ok(())
    }

    pub fn eval(&self, space: &Space, x: &Point) -> f64 {
        self.offset
            + self
                .terms
                .iter()
                .map(|(w, base, xi)| w * busemann_at(space, base, xi, x))
                .sum::<f64>()
    }

    /// For Euclidean sums: f(x) = c - <v, x>; returns (v, c).
    fn euclidean_linear(&self, space: &Space) -> Option<(Vec<f64>, f64)> {
        let Space::Euclidean(n) = space else { return None };
        let mut v = vec![0.0; *n];
        for (w, _, xi) in &self.terms {
            let BoundaryPoint::Euclidean(u) = xi else { return None };
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi += w * ui;
            }
        }
        let c = self.eval(space, &Point::Euclidean(vec![0.0; *n]));
        Some((v, c))
    }
}

impl ConvexFunction {
    pub fn eval(&self, space: &Space, x: &Point) -> f64 {
        match self {
            ConvexFunction::Busemann(b) => b.eval(space, x),
            ConvexFunction::Custom(f) => f(x),
        }
    }

    /// Closed sublevel set {f <= level}, for Busemann sums on Euclidean spaces and trees.
    pub fn sublevel(&self, space: &Space, level: f64) -> Result<ConvexSet> {
        let ConvexFunction::Busemann(b) = self else {
            return Err(Error::Unsupported("sublevel sets of custom functions".into()));
        };
        match space {
            Space::Euclidean(_) => {
                let (v, c) = b.euclidean_linear(space).expect("Euclidean sum");
                if norm(&v) < 1e-12 {
                    return Ok(if c <= level { ConvexSet::Universal } else { ConvexSet::Empty });
                }
                // c - <v, x> <= level  <=>  <-v, x> <= level - c
                ConvexSet::halfspace(v.iter().map(|x| -x).collect(), level - c)
            }
            Space::Tree(t) => {
                // Tree Busemann functions are affine on every segment.
                let mut set = TreeConvex::empty(t);
                for i in 0..t.segment_count() {
                    let seg = t.segment(i);
                    let len = t.segment_length(seg);
                    let s1 = len.min(1.0);
                    let f0 = b.eval(space, &Point::Tree(t.point_on_clamped(seg, 0.0)));
                    let f1 = b.eval(space, &Point::Tree(t.point_on_clamped(seg, s1)));
                    let slope = (f1 - f0) / s1;
                    let tol = 1e-12 * (1.0 + f0.abs() + level.abs());
                    set.intervals[i] = if slope.abs() < 1e-12 {
                        (f0 <= level + tol).then_some((0.0, len))
                    } else if slope > 0.0 {
                        let hi = ((level - f0) / slope).min(len);
                        (hi >= -tol).then_some((0.0, hi.max(0.0)))
                    } else {
                        let lo = ((level - f0) / slope).max(0.0);
                        (lo <= len + tol).then_some((lo.min(len), len))
                    };
                }
                for v in 0..t.vertex_count() {
                    let fv = b.eval(space, &Point::Tree(TreePoint::Vertex(v)));
                    set.vertices[v] = fv <= level + 1e-12 * (1.0 + fv.abs());
                }
                let pieces: Vec<_> = (0..t.segment_count())
                    .filter_map(|i| set.intervals[i].map(|(lo, hi)| (t.segment(i), lo, hi)))
                    .collect();
                let verts: Vec<usize> = (0..t.vertex_count()).filter(|&v| set.vertices[v]).collect();
                if pieces.is_empty() && verts.is_empty() {
                    return Ok(ConvexSet::Empty);
                }
                Ok(ConvexSet::Tree(TreeConvex::from_pieces(t, &verts, &pieces)?))
            }
            Space::Product(l, r) => {
                // Only sums that depend on a single factor have product sublevel sets.
                let (lf, rf) = split_product_sum(b)?;
                let lonely = |f: &ConvexFunction| matches!(f, ConvexFunction::Busemann(s) if s.terms.is_empty());
                match (lonely(&lf), lonely(&rf)) {
                    (_, true) => Ok(ConvexSet::product(lf.sublevel(l, level)?, ConvexSet::Universal)),
                    (true, false) => Ok(ConvexSet::product(ConvexSet::Universal, rf.sublevel(r, level - b.offset)?)),
                    _ => Err(Error::Unsupported("sublevel of a Busemann sum coupling both factors".into())),
                }
            }
        }
    }

    /// Minimum of f over the closed ball B(center, radius): (argmin, value).
    pub fn minimize_on_ball(&self, space: &Space, center: &Point, radius: f64) -> Result<(Point, f64)> {
        match (space, center) {
            (Space::Euclidean(_), Point::Euclidean(c)) => {
                if let ConvexFunction::Busemann(b) = self {
                    let (v, _) = b.euclidean_linear(space).expect("Euclidean sum");
                    let nv = norm(&v);
                    let p = if nv < 1e-15 {
                        c.clone()
                    } else {
                        c.iter().zip(&v).map(|(a, b)| a + radius * b / nv).collect()
                    };
                    let p = Point::Euclidean(p);
                    let val = self.eval(space, &p);
                    return Ok((p, val));
                }
                let project = |y: &[f64]| -> Vec<f64> {
                    let d = crate::numeric::dist(y, c);
                    if d <= radius {
                        y.to_vec()
                    } else {
                        c.iter().zip(y).map(|(a, b)| a + (b - a) * radius / d).collect()
                    }
                };
                let (y, _) = nelder_mead(
                    |y| self.eval(space, &Point::Euclidean(project(y))),
                    c,
                    (radius / 4.0).max(1e-6),
                    1e-14 * (1.0 + radius),
                    4000 * (c.len() + 1),
                );
                let p = Point::Euclidean(project(&y));
                let val = self.eval(space, &p);
                let c0 = self.eval(space, center);
                Ok(if c0 < val { (center.clone(), c0) } else { (p, val) })
            }
            (Space::Tree(t), Point::Tree(c)) => {
                let ball = TreeConvex::ball(t, c, radius);
                let mut best = (center.clone(), self.eval(space, center));
                for v in 0..t.vertex_count() {
                    if ball.vertices[v] {
                        let p = Point::Tree(TreePoint::Vertex(v));
                        let val = self.eval(space, &p);
                        if val < best.1 {
                            best = (p, val);
                        }
                    }
                }
                for i in 0..t.segment_count() {
                    let Some((lo, hi)) = ball.intervals[i] else { continue };
                    let seg = t.segment(i);
                    let f = |s: f64| self.eval(space, &Point::Tree(t.point_on_clamped(seg, s)));
                    let (s, val) = golden_min(f, lo, hi, 1e-12 * (1.0 + hi));
                    if val < best.1 {
                        best = (Point::Tree(t.point_on_clamped(seg, s)), val);
                    }
                }
                Ok(best)
            }
            (Space::Product(l, r), Point::Product(cl, cr)) => {
                let ConvexFunction::Busemann(b) = self else {
                    return Err(Error::Unsupported("ball minimization of custom functions on products".into()));
                };
                let (lf, rf) = split_product_sum(b)?;
                let eval_split = |rho: f64| -> Result<(Point, Point, f64)> {
                    let (pl, vl) = lf.minimize_on_ball(l, cl, rho)?;
                    let (pr, vr) = rf.minimize_on_ball(r, cr, (radius * radius - rho * rho).max(0.0).sqrt())?;
                    Ok((pl, pr, vl + vr))
                };
                let (rho, _) = golden_min(
                    |rho| eval_split(rho).map_or(f64::INFINITY, |x| x.2),
                    0.0,
                    radius,
                    1e-10 * (1.0 + radius),
                );
                let (pl, pr, _) = eval_split(rho)?;
                let p = Point::pair(pl, pr);
                let val = self.eval(space, &p);
                Ok((p, val))
            }
            _ => Err(Error::Domain("ball center of the wrong kind".into())),
        }
    }
}

/// Splits a product Busemann sum into its factor parts (offset kept on the left).
pub(crate) fn split_product_sum(b: &BusemannSum) -> Result<(ConvexFunction, ConvexFunction)> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (w, base, xi) in &b.terms {
        let (Point::Product(bl, br), BoundaryPoint::Join { theta, left: xl, right: xr }) = (base, xi) else {
            return Err(Error::Domain("product Busemann term of the wrong kind".into()));
        };
        let (s, c) = theta.sin_cos();
        if let Some(xl) = xl {
            left.push((w * c, (**bl).clone(), (**xl).clone()));
        }
        if let Some(xr) = xr {
            right.push((w * s, (**br).clone(), (**xr).clone()));
        }
    }
    Ok((
        ConvexFunction::Busemann(BusemannSum { terms: left, offset: b.offset }),
        ConvexFunction::Busemann(BusemannSum { terms: right, offset: 0.0 }),
    ))
}
