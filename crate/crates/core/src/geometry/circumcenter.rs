//! Circumcenters (centers of minimal enclosing balls) of finite sets.
//!
//! Euclidean sets use Welzl's algorithm. On a tree the objective restricted to one
//! segment is max(s + A, B - s), so every segment is solved in closed form. In a
//! product, fixing one segment per tree factor turns every tree factor into an
//! interval of the real line (each data point sits at a "virtual" coordinate:
//! its offset, minus its distance to the tail, or length plus its distance to
//! the head), and the problem becomes a Euclidean enclosing-ball problem with box
//! constraints, solved by active-set enumeration.

use nalgebra::{DMatrix, DVector};

use crate::error::{argument, Result};
use crate::numeric::dist;
use crate::spaces::{Point, Segment, Space, Tree, TreePoint};

/// Largest distance from `c` to the points of `set`.
pub fn circumradius_at(space: &Space, c: &Point, set: &[Point]) -> f64 {
    set.iter().map(|y| space.d(c, y)).fold(0.0, f64::max)
}

pub fn circumcenter(space: &Space, set: &[Point]) -> Result<(Point, f64)> {
    if set.is_empty() {
        return Err(argument("circumcenter of an empty set"));
    }
    for p in set {
        space.validate(p)?;
    }
    let center = match space {
        Space::Euclidean(_) => {
            let pts: Vec<Vec<f64>> = set.iter().map(|p| p.coords().expect("validated").to_vec()).collect();
            Point::Euclidean(welzl(&pts))
        }
        Space::Tree(t) => {
            let pts: Vec<TreePoint> = set.iter().map(|p| *p.tree_point().expect("validated")).collect();
            Point::Tree(tree_circumcenter(t, &pts))
        }
        Space::Product(..) => product_circumcenter(space, set),
    };
    let radius = circumradius_at(space, &center, set);
    Ok((center, radius))
}

/// Exact minimal enclosing ball center in R^n.
pub(crate) fn welzl(points: &[Vec<f64>]) -> Vec<f64> {
    let dim = points[0].len();
    let mut boundary = Vec::new();
    let (c, _) = welzl_rec(points, points.len(), &mut boundary, dim);
    c
}

fn welzl_rec(points: &[Vec<f64>], n: usize, boundary: &mut Vec<Vec<f64>>, dim: usize) -> (Vec<f64>, f64) {
    if n == 0 || boundary.len() == dim + 1 {
        return circumsphere(boundary, dim);
    }
    let p = &points[n - 1];
    let (c, r) = welzl_rec(points, n - 1, boundary, dim);
    if dist(&c, p) <= r * (1.0 + 1e-12) + 1e-14 {
        return (c, r);
    }
    boundary.push(p.clone());
    let out = welzl_rec(points, n - 1, boundary, dim);
    boundary.pop();
    out
}

/// Smallest sphere through all given points (center in their affine hull).
pub(crate) fn circumsphere(points: &[Vec<f64>], dim: usize) -> (Vec<f64>, f64) {
    weighted_center(points, &vec![0.0; points.len()])
        .map(|(c, r2)| (c, r2.max(0.0).sqrt()))
        .unwrap_or_else(|| (vec![0.0; dim], -1.0))
}

/// Point c in aff(points) with |c - p_i|^2 + w_i equal for all i; returns (c, common value).
fn weighted_center(points: &[Vec<f64>], weights: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = points.len();
    if k == 0 {
        return None;
    }
    let p0 = &points[0];
    if k == 1 {
        return Some((p0.clone(), weights[0]));
    }
    let m = k - 1;
    let diffs: Vec<Vec<f64>> = points[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    // c = p0 + sum_j lambda_j v_j with 2 <v_i, c - p0> = |v_i|^2 + w_i - w_0.
    let gram = DMatrix::from_fn(m, m, |i, j| 2.0 * crate::numeric::dot(&diffs[i], &diffs[j]));
    let rhs = DVector::from_fn(m, |i, _| crate::numeric::dot(&diffs[i], &diffs[i]) + weights[i + 1] - weights[0]);
    let svd = gram.svd(true, true);
    let lambda = svd.solve(&rhs, 1e-12).ok()?;
    let mut c = p0.clone();
    for (j, v) in diffs.iter().enumerate() {
        for (ci, vi) in c.iter_mut().zip(v) {
            *ci += lambda[j] * vi;
        }
    }
    let value = dist(&c, p0).powi(2) + weights[0];
    Some((c, value))
}

/// Minimizer of max_i (|c - z_i|^2 + w_i) over c in R^dim, by support-set enumeration.
pub(crate) fn weighted_meb(points: &[Vec<f64>], weights: &[f64], dim: usize) -> Vec<f64> {
    let objective = |c: &[f64]| {
        points
            .iter()
            .zip(weights)
            .map(|(z, w)| dist(c, z).powi(2) + w)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    if dim == 0 {
        return Vec::new();
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset: Vec<usize> = Vec::new();
    fn visit(start: usize, m: usize, cap: usize, subset: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if !subset.is_empty() {
            f(subset);
        }
        if subset.len() == cap {
            return;
        }
        for i in start..m {
            subset.push(i);
            visit(i + 1, m, cap, subset, f);
            subset.pop();
        }
    }
    visit(0, points.len(), dim + 1, &mut subset, &mut |s: &[usize]| {
        let pts: Vec<Vec<f64>> = s.iter().map(|&i| points[i].clone()).collect();
        let ws: Vec<f64> = s.iter().map(|&i| weights[i]).collect();
        if let Some((c, _)) = weighted_center(&pts, &ws) {
            let v = objective(&c);
            if best.as_ref().map_or(true, |(b, _)| v < *b) {
                best = Some((v, c));
            }
        }
    });
    best.map(|(_, c)| c).unwrap_or_else(|| vec![0.0; dim])
}

pub(crate) fn tree_circumcenter(tree: &Tree, set: &[TreePoint]) -> TreePoint {
    if tree.segment_count() == 0 {
        return TreePoint::Vertex(0);
    }
    let mut best: Option<(f64, TreePoint)> = None;
    for i in 0..tree.segment_count() {
        let seg = tree.segment(i);
        let len = tree.segment_length(seg);
        let virt: Vec<f64> = set.iter().map(|y| virtual_coordinate(tree, seg, y)).collect();
        let a = virt.iter().map(|v| -v).fold(f64::NEG_INFINITY, f64::max);
        let b = virt.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // f(s) = max(s + a, b - s) where a = -min v and b = max v.
        let s = ((b - a) / 2.0).clamp(0.0, len);
        let p = tree.point_on_clamped(seg, s);
        let r = set.iter().map(|y| tree.distance(&p, y)).fold(0.0, f64::max);
        if best.as_ref().map_or(true, |(br, _)| r < *br) {
            best = Some((r, p));
        }
    }
    best.expect("tree has segments").1
}

/// Signed position of `y` relative to `seg` such that d(y, point at offset s) = |s - v|.
pub(crate) fn virtual_coordinate(tree: &Tree, seg: Segment, y: &TreePoint) -> f64 {
    if let Some((s, o)) = tree.locate(y) {
        if s == seg {
            return o;
        }
    }
    let (tail, head) = tree.segment_ends(seg);
    let dt = tree.distance(y, &TreePoint::Vertex(tail));
    match head {
        Some(h) => {
            let dh = tree.distance(y, &TreePoint::Vertex(h));
            if dt <= dh {
                -dt
            } else {
                tree.segment_length(seg) + dh
            }
        }
        None => -dt,
    }
}

/// Flattened view of a product space: Euclidean blocks and tree factors.
enum Atom<'a> {
    Euclid(usize),
    Tree(&'a Tree),
}

fn atoms<'a>(space: &'a Space, out: &mut Vec<Atom<'a>>) {
    match space {
        Space::Euclidean(n) => out.push(Atom::Euclid(*n)),
        Space::Tree(t) => out.push(Atom::Tree(t)),
        Space::Product(l, r) => {
            atoms(l, out);
            atoms(r, out);
        }
    }
}

fn flatten<'p>(p: &'p Point, out: &mut Vec<&'p Point>) {
    match p {
        Point::Product(a, b) => {
            flatten(a, out);
            flatten(b, out);
        }
        _ => out.push(p),
    }
}

fn rebuild(space: &Space, parts: &mut std::vec::IntoIter<Point>) -> Point {
    match space {
        Space::Product(l, r) => {
            let a = rebuild(l, parts);
            let b = rebuild(r, parts);
            Point::pair(a, b)
        }
        _ => parts.next().expect("one part per atom"),
    }
}

fn product_circumcenter(space: &Space, set: &[Point]) -> Point {
    let mut ats = Vec::new();
    atoms(space, &mut ats);
    let flat: Vec<Vec<&Point>> = set
        .iter()
        .map(|p| {
            let mut v = Vec::new();
            flatten(p, &mut v);
            v
        })
        .collect();
    // Tree atoms with segments are the combinatorial choices.
    let tree_atoms: Vec<usize> = ats
        .iter()
        .enumerate()
        .filter(|(_, a)| matches!(a, Atom::Tree(t) if t.segment_count() > 0))
        .map(|(i, _)| i)
        .collect();
    let seg_counts: Vec<usize> = tree_atoms
        .iter()
        .map(|&i| match ats[i] {
            Atom::Tree(t) => t.segment_count(),
            _ => unreachable!(),
        })
        .collect();
    let euclid_dim: usize = ats.iter().map(|a| if let Atom::Euclid(n) = a { *n } else { 0 }).sum();

    let mut best: Option<(f64, Point)> = None;
    let mut choice = vec![0usize; tree_atoms.len()];
    loop {
        // Virtual coordinates of every point for this choice of segments.
        let segs: Vec<Segment> = tree_atoms
            .iter()
            .zip(&choice)
            .map(|(&ai, &c)| match ats[ai] {
                Atom::Tree(t) => t.segment(c),
                _ => unreachable!(),
            })
            .collect();
        let lens: Vec<f64> = tree_atoms
            .iter()
            .zip(&segs)
            .map(|(&ai, &s)| match ats[ai] {
                Atom::Tree(t) => t.segment_length(s),
                _ => unreachable!(),
            })
            .collect();
        let euclid: Vec<Vec<f64>> = flat
            .iter()
            .map(|parts| {
                let mut v = Vec::with_capacity(euclid_dim);
                for (ai, a) in ats.iter().enumerate() {
                    if let Atom::Euclid(_) = a {
                        v.extend_from_slice(parts[ai].coords().expect("euclidean part"));
                    }
                }
                v
            })
            .collect();
        let virt: Vec<Vec<f64>> = flat
            .iter()
            .map(|parts| {
                tree_atoms
                    .iter()
                    .zip(&segs)
                    .map(|(&ai, &s)| match ats[ai] {
                        Atom::Tree(t) => virtual_coordinate(t, s, parts[ai].tree_point().expect("tree part")),
                        _ => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        // Fixed weight: distance^2 to the fixed-at-vertex tree atoms (segmentless trees contribute 0).
        let k = tree_atoms.len();
        let patterns = 3usize.pow(k as u32);
        for pat in 0..patterns {
            // Per tree coordinate: 0 = free, 1 = pinned at 0, 2 = pinned at length.
            let mut code = pat;
            let mut pins: Vec<Option<f64>> = Vec::with_capacity(k);
            let mut skip = false;
            for len in &lens {
                let c = code % 3;
                code /= 3;
                pins.push(match c {
                    0 => None,
                    1 => Some(0.0),
                    _ => {
                        if len.is_finite() {
                            Some(*len)
                        } else {
                            skip = true;
                            None
                        }
                    }
                });
            }
            if skip {
                continue;
            }
            let free: Vec<usize> = (0..k).filter(|&j| pins[j].is_none()).collect();
            let pts: Vec<Vec<f64>> = euclid
                .iter()
                .zip(&virt)
                .map(|(e, v)| {
                    let mut z = e.clone();
                    z.extend(free.iter().map(|&j| v[j]));
                    z
                })
                .collect();
            let weights: Vec<f64> = virt
                .iter()
                .map(|v| (0..k).filter_map(|j| pins[j].map(|s| (s - v[j]).powi(2))).sum())
                .collect();
            let dim = euclid_dim + free.len();
            let c = if dim == 0 { Vec::new() } else { weighted_meb(&pts, &weights, dim) };
            // Assemble a genuine point of the product and score it.
            let mut parts = Vec::with_capacity(ats.len());
            let mut e_off = 0;
            let mut free_iter = c[euclid_dim..].iter();
            let mut tj = 0;
            for a in &ats {
                match a {
                    Atom::Euclid(n) => {
                        parts.push(Point::Euclidean(c[e_off..e_off + n].to_vec()));
                        e_off += n;
                    }
                    Atom::Tree(t) if t.segment_count() == 0 => parts.push(Point::Tree(TreePoint::Vertex(0))),
                    Atom::Tree(t) => {
                        let s = match pins[tj] {
                            Some(s) => s,
                            None => *free_iter.next().expect("free coordinate"),
                        };
                        parts.push(Point::Tree(t.point_on_clamped(segs[tj], s)));
                        tj += 1;
                    }
                }
            }
            let p = rebuild(space, &mut parts.into_iter());
            let r = circumradius_at(space, &p, set);
            if best.as_ref().map_or(true, |(br, _)| r < *br) {
                best = Some((r, p));
            }
        }
        // Next segment combination.
        let mut j = 0;
        loop {
            if j == choice.len() {
                return best.expect("at least one candidate").1;
            }
            choice[j] += 1;
            if choice[j] < seg_counts[j] {
                break;
            }
            choice[j] = 0;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: &[f64]) -> Point {
        Point::Euclidean(v.to_vec())
    }

    #[test]
    fn two_points() {
        let (c, r) = circumcenter(&Space::Euclidean(2), &[e(&[0.0, 0.0]), e(&[2.0, 0.0])]).unwrap();
        assert_eq!(c, e(&[1.0, 0.0]));
        assert_eq!(r, 1.0);
    }

    #[test]
    fn acute_triangle() {
        let (c, r) = circumcenter(&Space::Euclidean(2), &[e(&[0.0, 0.0]), e(&[2.0, 0.0]), e(&[1.0, 2.0])]).unwrap();
        let Point::Euclidean(v) = c else { panic!() };
        assert!(dist(&v, &[1.0, 0.75]) < 1e-12);
        assert!((r - 1.25).abs() < 1e-12);
    }

    #[test]
    fn obtuse_triangle_uses_longest_side() {
        let (c, r) = circumcenter(&Space::Euclidean(2), &[e(&[0.0, 0.0]), e(&[4.0, 0.0]), e(&[2.0, 0.5])]).unwrap();
        let Point::Euclidean(v) = c else { panic!() };
        assert!(dist(&v, &[2.0, 0.0]) < 1e-12);
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tripod_leaves() {
        let t = Tree::tripod();
        let x = Space::tree(t.clone());
        let pts: Vec<Point> = (0..3).map(|r| Point::Tree(TreePoint::Ray { ray: r, offset: 1.0 })).collect();
        let (c, r) = circumcenter(&x, &pts).unwrap();
        assert_eq!(c, Point::Tree(TreePoint::Vertex(0)));
        assert_eq!(r, 1.0);
    }

    #[test]
    fn tree_pair_midpoint() {
        let t = Tree::tripod();
        let x = Space::tree(t);
        let p = Point::Tree(TreePoint::Ray { ray: 0, offset: 3.0 });
        let q = Point::Tree(TreePoint::Ray { ray: 1, offset: 1.0 });
        let (c, r) = circumcenter(&x, &[p, q]).unwrap();
        assert_eq!(c, Point::Tree(TreePoint::Ray { ray: 0, offset: 1.0 }));
        assert_eq!(r, 2.0);
    }

    #[test]
    fn product_of_line_and_tripod() {
        let x = Space::product(Space::Euclidean(1), Space::tripod());
        let pts: Vec<Point> = (0..3)
            .map(|r| Point::pair(e(&[r as f64]), Point::Tree(TreePoint::Ray { ray: r, offset: 1.0 })))
            .collect();
        let (c, r) = circumcenter(&x, &pts).unwrap();
        // Tree part at o (by symmetry of the tree factor), line part at 1.
        let Point::Product(a, b) = &c else { panic!() };
        assert!(dist(a.coords().unwrap(), &[1.0]) < 1e-9);
        assert_eq!(**b, Point::Tree(TreePoint::Vertex(0)));
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_is_an_argument_error() {
        assert!(circumcenter(&Space::Euclidean(2), &[]).is_err());
    }
}
