//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use cat0_core::boundary::BoundaryPoint;
use cat0_core::geometry::{ConvexSet, EuclideanBall, EuclideanConvex, HalfSpace, TreeConvex};
use cat0_core::spaces::{Space, Tree, TreePoint};
use rand::Rng;

pub fn model_spaces() -> Vec<(&'static str, Space)> {
    vec![
        ("E2", Space::Euclidean(2)),
        ("E3", Space::Euclidean(3)),
        ("tripod", Space::tripod()),
        ("line", Space::line_tree()),
        ("E2 x tripod", Space::product(Space::Euclidean(2), Space::tripod())),
    ]
}

pub fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

pub fn bundled_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples"))
        .expect("examples dir")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

fn gaussian_ish<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 0.1 && r <= 1.0 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

pub fn unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    gaussian_ish(rng, n)
}

pub fn random_boundary<R: Rng>(rng: &mut R, space: &Space) -> BoundaryPoint {
    match space {
        Space::Euclidean(n) => BoundaryPoint::Euclidean(unit(rng, *n)),
        Space::Tree(t) => BoundaryPoint::Tree(rng.gen_range(0..t.end_count())),
        Space::Product(l, r) => match rng.gen_range(0..5) {
            0 => BoundaryPoint::left(random_boundary(rng, l)),
            1 => BoundaryPoint::right(random_boundary(rng, r)),
            _ => BoundaryPoint::join(
                rng.gen_range(0.01..FRAC_PI_2 - 0.01),
                Some(random_boundary(rng, l)),
                Some(random_boundary(rng, r)),
            )
            .expect("interior join"),
        },
    }
}

/// Nonempty random convex set; every piece contains a common anchor point.
pub fn random_convex<R: Rng>(rng: &mut R, space: &Space) -> ConvexSet {
    match space {
        Space::Euclidean(n) => {
            let anchor: Vec<f64> = (0..*n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let halfspaces = (0..rng.gen_range(0..=3))
                .map(|_| {
                    let u = unit(rng, *n);
                    let c = u.iter().zip(&anchor).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(0.0..3.0);
                    HalfSpace::new(u, c).expect("unit normal")
                })
                .collect();
            let balls = if rng.gen_bool(0.6) {
                let center: Vec<f64> = anchor.iter().map(|a| a + rng.gen_range(-1.0..1.0)).collect();
                let gap = center.iter().zip(&anchor).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                vec![EuclideanBall { center, radius: gap + rng.gen_range(0.5..4.0) }]
            } else {
                Vec::new()
            };
            ConvexSet::Euclidean(EuclideanConvex { halfspaces, balls })
        }
        Space::Tree(t) => {
            if rng.gen_bool(0.5) {
                let c = space.random_point(rng, 5.0);
                ConvexSet::ball(space, &c, rng.gen_range(0.0..4.0)).expect("tree ball")
            } else {
                let pts: Vec<TreePoint> = (0..rng.gen_range(1..=3))
                    .map(|_| *space.random_point(rng, 5.0).tree_point().expect("tree"))
                    .collect();
                ConvexSet::Tree(TreeConvex::span(t, &pts))
            }
        }
        Space::Product(l, r) => ConvexSet::product(random_convex(rng, l), random_convex(rng, r)),
    }
}

/// A point of a star tree (all rays at vertex 0) given as (ray, offset).
pub fn star_point(ray: usize, s: f64) -> TreePoint {
    if s == 0.0 {
        TreePoint::Vertex(0)
    } else {
        TreePoint::Ray { ray, offset: s }
    }
}

pub fn star_coords(t: &Tree, p: &TreePoint) -> (usize, f64) {
    assert_eq!(t.vertex_count(), 1, "star trees only");
    match *p {
        TreePoint::Vertex(_) => (0, 0.0),
        TreePoint::Ray { ray, offset } => (ray, offset),
        TreePoint::Edge { .. } => unreachable!("star trees have no edges"),
    }
}

/// Distance on a star tree from first principles.
pub fn star_distance(a: (usize, f64), b: (usize, f64)) -> f64 {
    if a.0 == b.0 {
        (a.1 - b.1).abs()
    } else {
        a.1 + b.1
    }
}

/// Solves the small dense system by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Point of aff(support) with equal power |c - a_i|^2 + w_i over the support.
fn power_center(points: &[Vec<f64>], weights: &[f64], support: &[usize]) -> Option<Vec<f64>> {
    let a0 = &points[support[0]];
    let k = support.len() - 1;
    if k == 0 {
        return Some(a0.clone());
    }
    let dirs: Vec<Vec<f64>> = support[1..].iter().map(|&i| points[i].iter().zip(a0).map(|(x, y)| x - y).collect()).collect();
    let gram: Vec<Vec<f64>> = dirs
        .iter()
        .map(|u| dirs.iter().map(|v| 2.0 * u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>()).collect())
        .collect();
    let rhs: Vec<f64> = support[1..]
        .iter()
        .zip(&dirs)
        .map(|(&i, u)| u.iter().map(|x| x * x).sum::<f64>() + weights[i] - weights[support[0]])
        .collect();
    let lambda = solve(gram, rhs)?;
    let mut c = a0.clone();
    for (l, u) in lambda.iter().zip(&dirs) {
        c.iter_mut().zip(u).for_each(|(ci, ui)| *ci += l * ui);
    }
    Some(c)
}

fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        if (mask.count_ones() as usize) <= max {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

/// Exhaustive minimum enclosing ball for additively weighted points in R^m: minimizes
/// max_i |c - a_i|^2 + w_i by trying every support set of size at most m + 1.
/// Returns (center, squared radius).
pub fn weighted_meb(points: &[Vec<f64>], weights: &[f64]) -> (Vec<f64>, f64) {
    let m = points[0].len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in subsets(points.len(), m + 1) {
        let Some(c) = power_center(points, weights, &s) else { continue };
        let r2 = points.iter().zip(weights).map(|(a, w)| sq(&c, a) + w).fold(f64::NEG_INFINITY, f64::max);
        let own = sq(&c, &points[s[0]]) + weights[s[0]];
        if r2 > own + 1e-9 * (1.0 + own.abs()) {
            continue;
        }
        if best.as_ref().map_or(true, |b| r2 < b.1) {
            best = Some((c, r2));
        }
    }
    best.expect("singletons always yield a candidate")
}

/// Oracle circumcenter on a star tree: midpoint of a diametral pair.
pub fn star_circumcenter(pts: &[(usize, f64)]) -> ((usize, f64), f64) {
    let mut best = (pts[0], pts[0], 0.0);
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let d = star_distance(*a, *b);
            if d > best.2 {
                best = (*a, *b, d);
            }
        }
    }
    let (a, b, d) = best;
    let m = d / 2.0;
    // Walk m from a toward b.
    let c = if a.0 == b.0 {
        (a.0, (a.1 + b.1) / 2.0)
    } else if m <= a.1 {
        (a.0, a.1 - m)
    } else {
        (b.0, m - a.1)
    };
    (c, m)
}

/// Oracle circumcenter on E^n x (star tree): unfold along each ray, solve the lifted
/// Euclidean problem with the ray coordinate constrained to be nonnegative.
pub fn product_star_circumcenter(pts: &[(Vec<f64>, (usize, f64))], rays: usize) -> ((Vec<f64>, (usize, f64)), f64) {
    let n = pts[0].0.len();
    let mut best: Option<((Vec<f64>, (usize, f64)), f64)> = None;
    for k in 0..rays {
        let lifted: Vec<Vec<f64>> = pts
            .iter()
            .map(|(a, (ray, s))| {
                let v = if *ray == k { *s } else { -s };
                let mut p = a.clone();
                p.push(v);
                p
            })
            .collect();
        let (c, r2) = weighted_meb(&lifted, &vec![0.0; pts.len()]);
        let cand = if c[n] >= 0.0 {
            ((c[..n].to_vec(), (k, c[n])), r2)
        } else {
            // Constrained to the vertex: the ray coordinate becomes an additive weight.
            let flat: Vec<Vec<f64>> = lifted.iter().map(|p| p[..n].to_vec()).collect();
            let w: Vec<f64> = lifted.iter().map(|p| p[n] * p[n]).collect();
            let (c2, r2) = weighted_meb(&flat, &w);
            ((c2, (k, 0.0)), r2)
        };
        if best.as_ref().map_or(true, |b| cand.1 < b.1) {
            best = Some(cand);
        }
    }
    let (c, r2) = best.expect("at least one ray");
    (c, r2.max(0.0).sqrt())
}
