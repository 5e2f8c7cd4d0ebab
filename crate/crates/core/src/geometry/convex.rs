//! Closed convex sets with exact nearest-point projection.

use nalgebra::{DMatrix, DVector};

use crate::error::{argument, domain, Error, Result};
use crate::numeric::{dist, dot, norm};
use crate::spaces::{Point, Segment, Space, Tree, TreePoint};

#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    /// {x : <normal, x> <= offset}
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EuclideanConvex {
    pub halfspaces: Vec<HalfSpace>,
    pub balls: Vec<EuclideanBall>,
}

/// Closed connected subtree: one closed interval of offsets per segment (edges first,
/// then rays) plus the set of included vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeConvex {
    pub vertices: Vec<bool>,
    pub intervals: Vec<Option<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Universal,
    Empty,
    Euclidean(EuclideanConvex),
    Tree(TreeConvex),
    Product(Box<ConvexSet>, Box<ConvexSet>),
}

const MEMBER_TOL: f64 = 1e-9;

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let n = norm(&normal);
        if !(n > 0.0 && n.is_finite()) || !offset.is_finite() {
            return Err(argument("half-space normal must be nonzero and finite"));
        }
        // Stored with a unit normal so offsets are signed distances.
        Ok(HalfSpace {
            normal: normal.iter().map(|x| x / n).collect(),
            offset: offset / n,
        })
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }
}

impl TreeConvex {
    pub fn empty(tree: &Tree) -> Self {
        TreeConvex {
            vertices: vec![false; tree.vertex_count()],
            intervals: vec![None; tree.segment_count()],
        }
    }

    pub fn whole(tree: &Tree) -> Self {
        let mut c = Self::empty(tree);
        for i in 0..tree.segment_count() {
            c.intervals[i] = Some((0.0, tree.segment_length(tree.segment(i))));
        }
        c.vertices.iter_mut().for_each(|v| *v = true);
        c
    }

    /// Builds from explicit (segment, lo, hi) pieces and vertex list, then checks connectedness.
    pub fn from_pieces(tree: &Tree, vertices: &[usize], pieces: &[(Segment, f64, f64)]) -> Result<Self> {
        let mut c = Self::empty(tree);
        for &v in vertices {
            if v >= tree.vertex_count() {
                return Err(domain(format!("unknown vertex {v}")));
            }
            c.vertices[v] = true;
        }
        for &(seg, lo, hi) in pieces {
            let len = tree.segment_length(seg);
            let idx = tree.segment_index(seg);
            if idx >= tree.segment_count() || !(0.0 <= lo && lo <= hi && hi <= len) || lo.is_nan() {
                return Err(domain(format!("invalid interval [{lo}, {hi}] on {seg:?}")));
            }
            c.intervals[idx] = Some(match c.intervals[idx] {
                None => (lo, hi),
                Some((a, b)) => {
                    if hi < a || lo > b {
                        return Err(domain("disjoint intervals on one segment"));
                    }
                    (a.min(lo), b.max(hi))
                }
            });
        }
        c.normalize(tree);
        if !c.is_connected(tree) {
            return Err(domain("subtree pieces are not connected"));
        }
        Ok(c)
    }

    /// Closed ball of radius r about `center`.
    pub fn ball(tree: &Tree, center: &TreePoint, radius: f64) -> Self {
        let mut c = Self::empty(tree);
        if radius < 0.0 {
            return c;
        }
        for i in 0..tree.segment_count() {
            let seg = tree.segment(i);
            let len = tree.segment_length(seg);
            c.intervals[i] = match tree.offset_on(seg, center).filter(|_| tree.locate(center).is_some()) {
                Some(o) => Some(((o - radius).max(0.0), (o + radius).min(len))),
                None => {
                    let (tail, head) = tree.segment_ends(seg);
                    let dt = tree.distance(center, &TreePoint::Vertex(tail));
                    let dh = head.map(|h| tree.distance(center, &TreePoint::Vertex(h)));
                    if dh.map_or(true, |dh| dt <= dh) {
                        (radius >= dt).then(|| (0.0, (radius - dt).min(len)))
                    } else {
                        let dh = dh.expect("head exists");
                        (radius >= dh).then(|| ((len - (radius - dh)).max(0.0), len))
                    }
                }
            };
        }
        for v in 0..tree.vertex_count() {
            c.vertices[v] = tree.distance(center, &TreePoint::Vertex(v)) <= radius;
        }
        c.normalize(tree);
        c
    }

    /// Convex hull of finitely many points.
    pub fn span(tree: &Tree, points: &[TreePoint]) -> Self {
        let mut c = Self::empty(tree);
        for (i, p) in points.iter().enumerate() {
            for q in &points[i..] {
                c.add_geodesic(tree, p, q);
            }
        }
        c.normalize(tree);
        c
    }

    fn add_geodesic(&mut self, tree: &Tree, p: &TreePoint, q: &TreePoint) {
        let total = tree.distance(p, q);
        let tol = 1e-12 * (1.0 + total);
        for v in 0..tree.vertex_count() {
            let x = TreePoint::Vertex(v);
            if tree.distance(p, &x) + tree.distance(&x, q) <= total + tol {
                self.vertices[v] = true;
            }
        }
        for i in 0..tree.segment_count() {
            let seg = tree.segment(i);
            let len = tree.segment_length(seg);
            let mut cands = vec![0.0];
            if len.is_finite() {
                cands.push(len);
            }
            cands.extend(tree.offset_on(seg, p));
            cands.extend(tree.offset_on(seg, q));
            let on: Vec<f64> = cands
                .into_iter()
                .filter(|&s| {
                    let y = tree.point_on_clamped(seg, s);
                    tree.distance(p, &y) + tree.distance(&y, q) <= total + tol
                })
                .collect();
            if let (Some(lo), Some(hi)) = (
                on.iter().cloned().reduce(f64::min),
                on.iter().cloned().reduce(f64::max),
            ) {
                self.intervals[i] = Some(match self.intervals[i] {
                    None => (lo, hi),
                    Some((a, b)) => (a.min(lo), b.max(hi)),
                });
            }
        }
    }

    /// Makes vertex membership and segment endpoints agree.
    fn normalize(&mut self, tree: &Tree) {
        for i in 0..tree.segment_count() {
            let seg = tree.segment(i);
            let (tail, head) = tree.segment_ends(seg);
            if let Some((lo, hi)) = self.intervals[i] {
                if lo == 0.0 {
                    self.vertices[tail] = true;
                }
                if let Some(h) = head {
                    if hi == tree.segment_length(seg) {
                        self.vertices[h] = true;
                    }
                }
            }
        }
        for i in 0..tree.segment_count() {
            let seg = tree.segment(i);
            let (tail, head) = tree.segment_ends(seg);
            let len = tree.segment_length(seg);
            if self.vertices[tail] {
                self.intervals[i] = Some(self.intervals[i].map_or((0.0, 0.0), |(_, b)| (0.0, b)));
            }
            if let Some(h) = head {
                if self.vertices[h] {
                    self.intervals[i] = Some(self.intervals[i].map_or((len, len), |(a, _)| (a, len)));
                }
            }
        }
    }

    fn is_connected(&self, tree: &Tree) -> bool {
        // Pieces are segments with intervals; two pieces touch when they share an included vertex.
        let mut pieces: Vec<usize> = (0..tree.segment_count()).filter(|&i| self.intervals[i].is_some()).collect();
        let verts: Vec<usize> = (0..tree.vertex_count()).filter(|&v| self.vertices[v]).collect();
        if pieces.is_empty() {
            return verts.len() <= 1;
        }
        if verts.is_empty() {
            return pieces.len() == 1;
        }
        let mut reached = vec![false; tree.vertex_count()];
        let mut stack = vec![verts[0]];
        reached[verts[0]] = true;
        while let Some(v) = stack.pop() {
            for seg in tree.incident(v) {
                let i = tree.segment_index(*seg);
                pieces.retain(|&p| p != i);
                let (tail, head) = tree.segment_ends(*seg);
                for w in [Some(tail), head].into_iter().flatten() {
                    if self.vertices[w] && !reached[w] && self.covers(tree, *seg) {
                        reached[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        pieces.is_empty() && verts.iter().all(|&v| reached[v])
    }

    fn covers(&self, tree: &Tree, seg: Segment) -> bool {
        let len = tree.segment_length(seg);
        matches!(self.intervals[tree.segment_index(seg)], Some((lo, hi)) if lo == 0.0 && hi == len)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.iter().all(|v| !v) && self.intervals.iter().all(|i| i.is_none())
    }

    pub fn contains(&self, tree: &Tree, p: &TreePoint, tol: f64) -> bool {
        match tree.locate(p) {
            None => match p {
                TreePoint::Vertex(v) => {
                    self.vertices[*v]
                        || tree.incident(*v).iter().any(|seg| {
                            let o = tree.offset_on(*seg, p).expect("incident");
                            matches!(self.intervals[tree.segment_index(*seg)], Some((lo, hi)) if o >= lo - tol && o <= hi + tol)
                        })
                }
                _ => unreachable!(),
            },
            Some((seg, o)) => match self.intervals[tree.segment_index(seg)] {
                Some((lo, hi)) => o >= lo - tol && o <= hi + tol,
                None => false,
            },
        }
    }

    pub fn project(&self, tree: &Tree, x: &TreePoint) -> Result<TreePoint> {
        let mut best: Option<(f64, TreePoint)> = None;
        let mut consider = |p: TreePoint| {
            let d = tree.distance(x, &p);
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, p));
            }
        };
        for v in 0..tree.vertex_count() {
            if self.vertices[v] {
                consider(TreePoint::Vertex(v));
            }
        }
        for i in 0..tree.segment_count() {
            let Some((lo, hi)) = self.intervals[i] else { continue };
            let seg = tree.segment(i);
            let s = match tree.offset_on(seg, x) {
                Some(o) => o.clamp(lo, hi),
                None => {
                    let (tail, head) = tree.segment_ends(seg);
                    let dt = tree.distance(x, &TreePoint::Vertex(tail));
                    let toward_tail = head.map_or(true, |h| dt <= tree.distance(x, &TreePoint::Vertex(h)));
                    if toward_tail {
                        lo
                    } else {
                        hi
                    }
                }
            };
            consider(tree.point_on_clamped(seg, s));
        }
        best.map(|(_, p)| p).ok_or(Error::EmptySet)
    }

    /// Sample points: interval endpoints plus a few interior points; rays are truncated at `reach`.
    pub fn sample(&self, tree: &Tree, reach: f64) -> Vec<TreePoint> {
        let mut out = Vec::new();
        for v in 0..tree.vertex_count() {
            if self.vertices[v] {
                out.push(TreePoint::Vertex(v));
            }
        }
        for i in 0..tree.segment_count() {
            if let Some((lo, hi)) = self.intervals[i] {
                let seg = tree.segment(i);
                let hi = if hi.is_finite() { hi } else { lo + reach };
                for k in 0..=4 {
                    out.push(tree.point_on_clamped(seg, lo + (hi - lo) * k as f64 / 4.0));
                }
            }
        }
        out.dedup();
        out
    }
}

impl EuclideanConvex {
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.slack(x) <= tol) && self.balls.iter().all(|b| dist(x, &b.center) <= b.radius + tol)
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.contains(x, 0.0) {
            return Ok(x.to_vec());
        }
        if self.balls.len() <= 1 && self.halfspaces.len() <= 16 {
            self.project_active_set(x)
        } else {
            self.project_dykstra(x)
        }
    }

    /// Exact projection by enumerating candidate active sets (at most one ball).
    fn project_active_set(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        let m = self.halfspaces.len();
        let ball = self.balls.first();
        let scale = 1.0 + norm(x) + self.halfspaces.iter().map(|h| h.offset.abs()).fold(0.0, f64::max)
            + ball.map_or(0.0, |b| norm(&b.center) + b.radius);
        let tol = 1e-11 * scale;
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut subset = Vec::new();
        let consider = |y: Vec<f64>, best: &mut Option<(f64, Vec<f64>)>| {
            if self.contains(&y, tol) {
                let d = dist(x, &y);
                if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                    *best = Some((d, y));
                }
            }
        };
        // Depth-first enumeration of subsets of size <= n.
        fn visit(
            start: usize,
            m: usize,
            n: usize,
            subset: &mut Vec<usize>,
            f: &mut dyn FnMut(&[usize]),
        ) {
            f(subset);
            if subset.len() == n {
                return;
            }
            for i in start..m {
                subset.push(i);
                visit(i + 1, m, n, subset, f);
                subset.pop();
            }
        }
        visit(0, m, n, &mut subset, &mut |s: &[usize]| {
            let Some(xl) = self.affine_projection(s, x) else { return };
            consider(xl.clone(), &mut best);
            if let Some(b) = ball {
                let Some(cl) = self.affine_projection(s, &b.center) else { return };
                let off = dist(&cl, &b.center);
                if off > b.radius {
                    return;
                }
                let r = (b.radius * b.radius - off * off).sqrt();
                let dir: Vec<f64> = xl.iter().zip(&cl).map(|(a, c)| a - c).collect();
                let len = norm(&dir);
                if len > 0.0 {
                    let y: Vec<f64> = cl.iter().zip(&dir).map(|(c, d)| c + r * d / len).collect();
                    consider(y, &mut best);
                } else if r == 0.0 {
                    consider(cl, &mut best);
                }
            }
        });
        best.map(|(_, y)| y).ok_or(Error::EmptySet)
    }

    /// Projection of `x` onto {y : <a_i, y> = c_i, i in s}; None if the normals are dependent.
    fn affine_projection(&self, s: &[usize], x: &[f64]) -> Option<Vec<f64>> {
        if s.is_empty() {
            return Some(x.to_vec());
        }
        let n = x.len();
        let a = DMatrix::from_fn(s.len(), n, |i, j| self.halfspaces[s[i]].normal[j]);
        let gram = &a * a.transpose();
        let lu = gram.clone().lu();
        let det = lu.determinant();
        if det.abs() < 1e-12 {
            return None;
        }
        let xv = DVector::from_column_slice(x);
        let c = DVector::from_fn(s.len(), |i, _| self.halfspaces[s[i]].offset);
        let lam = lu.solve(&(&a * &xv - c))?;
        let y = xv - a.transpose() * lam;
        Some(y.iter().cloned().collect())
    }

    fn project_dykstra(&self, x: &[f64]) -> Result<Vec<f64>> {
        let k = self.halfspaces.len() + self.balls.len();
        let mut y = x.to_vec();
        let mut corr = vec![vec![0.0; x.len()]; k];
        for _ in 0..200_000 {
            let prev = y.clone();
            for (i, c) in corr.iter_mut().enumerate() {
                let z: Vec<f64> = y.iter().zip(c.iter()).map(|(a, b)| a + b).collect();
                let p = if i < self.halfspaces.len() {
                    let h = &self.halfspaces[i];
                    let s = h.slack(&z);
                    if s > 0.0 {
                        z.iter().zip(&h.normal).map(|(a, b)| a - s * b).collect()
                    } else {
                        z.clone()
                    }
                } else {
                    let b = &self.balls[i - self.halfspaces.len()];
                    let d = dist(&z, &b.center);
                    if d > b.radius {
                        z.iter().zip(&b.center).map(|(a, c)| c + (a - c) * b.radius / d).collect()
                    } else {
                        z.clone()
                    }
                };
                *c = z.iter().zip(&p).map(|(a, b)| a - b).collect();
                y = p;
            }
            if dist(&prev, &y) < 1e-15 * (1.0 + norm(&y)) {
                break;
            }
        }
        if self.contains(&y, 1e-8 * (1.0 + norm(&y))) {
            Ok(y)
        } else {
            Err(Error::EmptySet)
        }
    }
}

impl ConvexSet {
    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<ConvexSet> {
        Ok(ConvexSet::Euclidean(EuclideanConvex {
            halfspaces: vec![HalfSpace::new(normal, offset)?],
            balls: vec![],
        }))
    }

    pub fn euclidean_ball(center: Vec<f64>, radius: f64) -> Result<ConvexSet> {
        if !(radius >= 0.0) {
            return Err(argument("ball radius must be nonnegative"));
        }
        Ok(ConvexSet::Euclidean(EuclideanConvex {
            halfspaces: vec![],
            balls: vec![EuclideanBall { center, radius }],
        }))
    }

    /// Closed metric ball (Euclidean and tree spaces).
    pub fn ball(space: &Space, center: &Point, radius: f64) -> Result<ConvexSet> {
        space.validate(center)?;
        match (space, center) {
            (Space::Euclidean(_), Point::Euclidean(c)) => Self::euclidean_ball(c.clone(), radius),
            (Space::Tree(t), Point::Tree(c)) => Ok(ConvexSet::Tree(TreeConvex::ball(t, c, radius))),
            _ => Err(Error::Unsupported("balls in product spaces are not product sets".into())),
        }
    }

    pub fn product(left: ConvexSet, right: ConvexSet) -> ConvexSet {
        ConvexSet::Product(Box::new(left), Box::new(right))
    }

    pub fn check(&self, space: &Space) -> Result<()> {
        match (self, space) {
            (ConvexSet::Universal | ConvexSet::Empty, _) => Ok(()),
            (ConvexSet::Euclidean(c), Space::Euclidean(n)) => {
                if c.halfspaces.iter().any(|h| h.normal.len() != *n) || c.balls.iter().any(|b| b.center.len() != *n) {
                    Err(domain("convex set has the wrong dimension"))
                } else {
                    Ok(())
                }
            }
            (ConvexSet::Tree(c), Space::Tree(t)) => {
                if c.vertices.len() != t.vertex_count() || c.intervals.len() != t.segment_count() {
                    Err(domain("subtree does not match the tree"))
                } else {
                    Ok(())
                }
            }
            (ConvexSet::Product(a, b), Space::Product(l, r)) => {
                a.check(l)?;
                b.check(r)
            }
            _ => Err(domain(format!("convex set does not live in a {} space", space.kind()))),
        }
    }

    pub fn contains(&self, space: &Space, p: &Point, tol: f64) -> bool {
        match (self, space, p) {
            (ConvexSet::Universal, _, _) => true,
            (ConvexSet::Empty, _, _) => false,
            (ConvexSet::Euclidean(c), _, Point::Euclidean(x)) => c.contains(x, tol),
            (ConvexSet::Tree(c), Space::Tree(t), Point::Tree(x)) => c.contains(t, x, tol),
            (ConvexSet::Product(a, b), Space::Product(l, r), Point::Product(x, y)) => {
                a.contains(l, x, tol) && b.contains(r, y, tol)
            }
            _ => false,
        }
    }

    pub fn is_member(&self, space: &Space, p: &Point) -> bool {
        self.contains(space, p, MEMBER_TOL)
    }

    /// Nearest point of the set.
    pub fn project(&self, space: &Space, x: &Point) -> Result<Point> {
        self.check(space)?;
        space.validate(x)?;
        self.project_unchecked(space, x)
    }

    fn project_unchecked(&self, space: &Space, x: &Point) -> Result<Point> {
        match (self, space, x) {
            (ConvexSet::Universal, _, _) => Ok(x.clone()),
            (ConvexSet::Empty, _, _) => Err(Error::EmptySet),
            (ConvexSet::Euclidean(c), _, Point::Euclidean(v)) => Ok(Point::Euclidean(c.project(v)?)),
            (ConvexSet::Tree(c), Space::Tree(t), Point::Tree(p)) => Ok(Point::Tree(c.project(t, p)?)),
            (ConvexSet::Product(a, b), Space::Product(l, r), Point::Product(p, q)) => {
                Ok(Point::pair(a.project_unchecked(l, p)?, b.project_unchecked(r, q)?))
            }
            _ => Err(domain("convex set and point are of different kinds")),
        }
    }

    pub fn distance_to(&self, space: &Space, x: &Point) -> Result<f64> {
        let p = self.project(space, x)?;
        Ok(space.d(x, &p))
    }

    /// Intersection, when both sets are of the same concrete kind.
    pub fn intersect(&self, other: &ConvexSet, space: &Space) -> Result<ConvexSet> {
        Ok(match (self, other) {
            (ConvexSet::Universal, c) | (c, ConvexSet::Universal) => c.clone(),
            (ConvexSet::Empty, _) | (_, ConvexSet::Empty) => ConvexSet::Empty,
            (ConvexSet::Euclidean(a), ConvexSet::Euclidean(b)) => {
                let mut c = a.clone();
                c.halfspaces.extend(b.halfspaces.iter().cloned());
                c.balls.extend(b.balls.iter().cloned());
                ConvexSet::Euclidean(c)
            }
            (ConvexSet::Tree(a), ConvexSet::Tree(b)) => {
                let Space::Tree(t) = space else {
                    return Err(domain("subtree intersection needs a tree"));
                };
                let mut c = TreeConvex::empty(t);
                for v in 0..t.vertex_count() {
                    c.vertices[v] = a.contains(t, &TreePoint::Vertex(v), 0.0) && b.contains(t, &TreePoint::Vertex(v), 0.0);
                }
                for i in 0..t.segment_count() {
                    c.intervals[i] = match (a.intervals[i], b.intervals[i]) {
                        (Some((a0, a1)), Some((b0, b1))) if a0.max(b0) <= a1.min(b1) => Some((a0.max(b0), a1.min(b1))),
                        _ => None,
                    };
                }
                c.normalize(t);
                ConvexSet::Tree(c)
            }
            (ConvexSet::Product(a1, b1), ConvexSet::Product(a2, b2)) => {
                let Space::Product(l, r) = space else {
                    return Err(domain("product intersection needs a product space"));
                };
                ConvexSet::product(a1.intersect(a2, l)?, b1.intersect(b2, r)?)
            }
            _ => return Err(domain("cannot intersect convex sets of different kinds")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Segment;

    #[test]
    fn halfplane_projection() {
        let c = ConvexSet::halfspace(vec![1.0, 0.0], 0.0).unwrap();
        let x = Space::Euclidean(2);
        let p = c.project(&x, &Point::Euclidean(vec![2.0, 3.0])).unwrap();
        assert_eq!(p, Point::Euclidean(vec![0.0, 3.0]));
        let inside = Point::Euclidean(vec![-1.0, 5.0]);
        assert_eq!(c.project(&x, &inside).unwrap(), inside);
    }

    #[test]
    fn ball_and_halfspace() {
        // Unit disk cut by x2 <= 0.5; nearest point to (0, 3) is the chord end region.
        let c = EuclideanConvex {
            halfspaces: vec![HalfSpace::new(vec![0.0, 1.0], 0.5).unwrap()],
            balls: vec![EuclideanBall { center: vec![0.0, 0.0], radius: 1.0 }],
        };
        assert_eq!(c.project(&[0.0, 3.0]).unwrap(), vec![0.0, 0.5]);
        let p = c.project(&[3.0, 3.0]).unwrap();
        let expect = [0.75f64.sqrt(), 0.5];
        assert!(dist(&p, &expect) < 1e-12);
    }

    #[test]
    fn empty_intersection() {
        let c = EuclideanConvex {
            halfspaces: vec![
                HalfSpace::new(vec![1.0, 0.0], -1.0).unwrap(),
                HalfSpace::new(vec![-1.0, 0.0], -1.0).unwrap(),
            ],
            balls: vec![],
        };
        assert_eq!(c.project(&[0.0, 0.0]), Err(Error::EmptySet));
        assert_eq!(ConvexSet::Empty.project(&Space::Euclidean(1), &Point::Euclidean(vec![0.0])), Err(Error::EmptySet));
    }

    #[test]
    fn dykstra_agrees_with_geometry() {
        let c = EuclideanConvex {
            halfspaces: vec![],
            balls: vec![
                EuclideanBall { center: vec![0.0, 0.0], radius: 1.0 },
                EuclideanBall { center: vec![1.0, 0.0], radius: 1.0 },
            ],
        };
        let p = c.project(&[0.5, 3.0]).unwrap();
        assert!(dist(&p, &[0.5, 0.75f64.sqrt()]) < 1e-6);
    }

    #[test]
    fn tripod_segment_projection() {
        let t = Tree::tripod();
        let a = t.point_on(Segment::Ray(0), 1.0).unwrap();
        let b = t.point_on(Segment::Ray(1), 1.0).unwrap();
        let c1 = t.point_on(Segment::Ray(2), 1.0).unwrap();
        let s = TreeConvex::span(&t, &[a, b]);
        assert_eq!(s.project(&t, &c1).unwrap(), TreePoint::Vertex(0));
        assert!(s.contains(&t, &TreePoint::Vertex(0), 0.0));
        assert_eq!(s.project(&t, &a).unwrap(), a);
    }

    #[test]
    fn tree_ball_membership() {
        let t = Tree::tripod();
        let a1 = t.point_on(Segment::Ray(0), 1.0).unwrap();
        let ball = TreeConvex::ball(&t, &a1, 1.5);
        assert!(ball.contains(&t, &TreePoint::Ray { ray: 1, offset: 0.5 }, 0.0));
        assert!(!ball.contains(&t, &TreePoint::Ray { ray: 1, offset: 0.6 }, 0.0));
        assert!(ball.contains(&t, &TreePoint::Ray { ray: 0, offset: 2.5 }, 0.0));
    }

    #[test]
    fn disconnected_pieces_rejected() {
        let t = Tree::tripod();
        let r = TreeConvex::from_pieces(&t, &[], &[(Segment::Ray(0), 1.0, 2.0), (Segment::Ray(1), 1.0, 2.0)]);
        assert!(r.is_err());
        let ok = TreeConvex::from_pieces(&t, &[], &[(Segment::Ray(0), 3.0, f64::INFINITY)]).unwrap();
        assert!(!ok.contains(&t, &TreePoint::Vertex(0), 0.0));
    }
}
