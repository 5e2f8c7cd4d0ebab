//! Flat points at infinity: the affinity defect of Busemann functions and the A/P split.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::function::{BusemannSum, ConvexFunction};
use crate::boundary::{tits_unchecked, validate_boundary, BoundaryPoint};
use crate::error::{argument, Result};
use crate::geometry::TreeConvex;
use crate::numeric::{golden_min, normalized};
use crate::spaces::{Point, Space};

/// Flat points F, antipodal flat points A and flat points perpendicular to A.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSplit {
    pub flat: Vec<BoundaryPoint>,
    pub antipodal: Vec<BoundaryPoint>,
    pub perpendicular: Vec<BoundaryPoint>,
    pub defects: Vec<DefectRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectRow {
    pub candidate: usize,
    pub radius: f64,
    pub defect: f64,
}

pub const DEFAULT_R_MAX: f64 = 8.0;
pub const DEFAULT_DEFECT_TOL: f64 = 1e-6;
const PERPENDICULAR_TOL: f64 = 1e-6;
const T_STEPS: usize = 16;
const SAMPLE_SEED: u64 = 0x5eed;

/// Points of B(x0, R) used as chord endpoints: the center, points on the sphere and
/// interior points along every direction the model offers.
pub fn ball_sample(space: &Space, x0: &Point, r: f64) -> Vec<Point> {
    match (space, x0) {
        (Space::Euclidean(n), Point::Euclidean(c)) => {
            let mut out = vec![x0.clone()];
            let at = |v: &[f64], s: f64| Point::Euclidean(c.iter().zip(v).map(|(a, b)| a + s * b).collect());
            for i in 0..*n {
                let mut e = vec![0.0; *n];
                e[i] = 1.0;
                out.push(at(&e, r));
                out.push(at(&e, -r));
            }
            if *n > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
                for k in 0..6 {
                    let v: Vec<f64> = (0..*n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    if let Some(u) = normalized(&v) {
                        out.push(at(&u, if k < 4 { r } else { r / 2.0 }));
                    }
                }
            }
            out
        }
        (Space::Tree(t), Point::Tree(c)) => {
            let ball = TreeConvex::ball(t, c, r);
            let mut out = vec![x0.clone()];
            for (i, iv) in ball.intervals.iter().enumerate() {
                if let Some((lo, hi)) = iv {
                    let seg = t.segment(i);
                    for s in [*lo, (lo + hi) / 2.0, *hi] {
                        let p = Point::Tree(t.point_on_clamped(seg, s));
                        if !out.contains(&p) {
                            out.push(p);
                        }
                    }
                }
            }
            out
        }
        (Space::Product(l, rt), Point::Product(a, b)) => {
            let inner = r / 2f64.sqrt();
            let ls = ball_sample(l, a, inner);
            let rs = ball_sample(rt, b, inner);
            let mut out = Vec::new();
            for p in &ls {
                for q in &rs {
                    out.push(Point::pair(p.clone(), q.clone()));
                }
            }
            out.extend(ball_sample(l, a, r).into_iter().map(|p| Point::pair(p, (**b).clone())));
            out.extend(ball_sample(rt, b, r).into_iter().map(|q| Point::pair((**a).clone(), q)));
            out
        }
        _ => vec![x0.clone()],
    }
}

/// Δ^R(f): the largest gap between f along a geodesic and the chord of its endpoint values,
/// over pairs of sample points of B(x0, R).
pub fn affinity_defect(space: &Space, f: &ConvexFunction, x0: &Point, r: f64) -> f64 {
    let pts = ball_sample(space, x0, r);
    let vals: Vec<f64> = pts.iter().map(|p| f.eval(space, p)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let gap = |t: f64| {
                let q = space.geo(&pts[i], &pts[j], t);
                (f.eval(space, &q) - (1.0 - t) * vals[i] - t * vals[j]).abs()
            };
            let (mut best_t, mut best) = (0.0, 0.0);
            for k in 1..T_STEPS {
                let t = k as f64 / T_STEPS as f64;
                let g = gap(t);
                if g > best {
                    best = g;
                    best_t = t;
                }
            }
            if best > 0.0 {
                let h = 1.0 / T_STEPS as f64;
                let (_, neg) = golden_min(|t| -gap(t), (best_t - h).max(0.0), (best_t + h).min(1.0), 1e-9);
                best = best.max(-neg);
            }
            worst = worst.max(best);
        }
    }
    worst
}

/// The boundary point at Tits angle pi joined to xi by a flat line, when the model has one.
pub fn antipode(space: &Space, xi: &BoundaryPoint) -> Option<BoundaryPoint> {
    match (space, xi) {
        (Space::Euclidean(_), BoundaryPoint::Euclidean(v)) => Some(BoundaryPoint::Euclidean(v.iter().map(|x| -x).collect())),
        (Space::Tree(t), BoundaryPoint::Tree(e)) => (t.end_count() == 2).then(|| BoundaryPoint::Tree(1 - e)),
        (Space::Product(l, r), BoundaryPoint::Join { theta, left, right }) => {
            let left = match left {
                Some(p) => Some(antipode(l, p)?),
                None => None,
            };
            let right = match right {
                Some(p) => Some(antipode(r, p)?),
                None => None,
            };
            BoundaryPoint::join(*theta, left, right).ok()
        }
        _ => None,
    }
}

/// Closed-form flatness: every Euclidean direction; a tree end iff the tree has no branching;
/// a join iff each weighted component is flat in its factor.
pub fn is_flat_closed_form(space: &Space, xi: &BoundaryPoint) -> bool {
    match (space, xi) {
        (Space::Euclidean(_), _) => true,
        (Space::Tree(t), _) => (0..t.vertex_count()).all(|v| t.degree(v) <= 2),
        (Space::Product(l, r), BoundaryPoint::Join { left, right, .. }) => {
            left.as_ref().map_or(true, |p| is_flat_closed_form(l, p))
                && right.as_ref().map_or(true, |p| is_flat_closed_form(r, p))
        }
        _ => false,
    }
}

fn radii(r_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = 1.0;
    while r <= r_max * (1.0 + 1e-12) {
        out.push(r);
        r *= 2.0;
    }
    if out.is_empty() {
        out.push(r_max);
    }
    out
}

fn defect_profile(space: &Space, x0: &Point, xi: &BoundaryPoint, radii: &[f64]) -> Vec<f64> {
    let f = ConvexFunction::Busemann(BusemannSum::single(x0.clone(), xi.clone()));
    radii.iter().map(|&r| affinity_defect(space, &f, x0, r)).collect()
}

fn same(space: &Space, a: &BoundaryPoint, b: &BoundaryPoint) -> bool {
    tits_unchecked(space, a, b) < 1e-9
}

/// Classifies every candidate by its defect profile over radii 1, 2, 4, ... up to `r_max`.
pub fn flat_split(space: &Space, grid: &[BoundaryPoint], r_max: f64, defect_tol: f64) -> Result<FlatSplit> {
    if grid.is_empty() {
        return Err(argument("flat_split needs a non-empty candidate grid"));
    }
    if !(r_max > 0.0) {
        return Err(argument("R_max must be positive"));
    }
    for xi in grid {
        validate_boundary(space, xi)?;
    }
    let x0 = space.base_point();
    let radii = radii(r_max);
    let mut defects = Vec::new();
    let mut is_flat = Vec::with_capacity(grid.len());
    for (i, xi) in grid.iter().enumerate() {
        let profile = defect_profile(space, &x0, xi, &radii);
        is_flat.push(profile.iter().all(|&d| d < defect_tol));
        defects.extend(radii.iter().zip(&profile).map(|(&radius, &defect)| DefectRow {
            candidate: i,
            radius,
            defect,
        }));
    }
    let flat: Vec<BoundaryPoint> = grid.iter().zip(&is_flat).filter(|(_, &f)| f).map(|(x, _)| x.clone()).collect();
    let antipodal: Vec<BoundaryPoint> = flat
        .iter()
        .filter(|xi| match antipode(space, xi) {
            None => false,
            Some(anti) => match grid.iter().position(|g| same(space, g, &anti)) {
                Some(k) => is_flat[k],
                None => defect_profile(space, &x0, &anti, &radii).iter().all(|&d| d < defect_tol),
            },
        })
        .cloned()
        .collect();
    let perpendicular = if antipodal.is_empty() {
        flat.clone()
    } else {
        flat.iter()
            .filter(|xi| {
                let to_a = antipodal.iter().map(|a| tits_unchecked(space, xi, a)).fold(f64::INFINITY, f64::min);
                (to_a - FRAC_PI_2).abs() <= PERPENDICULAR_TOL
            })
            .cloned()
            .collect()
    };
    Ok(FlatSplit {
        flat,
        antipodal,
        perpendicular,
        defects,
    })
}

/// Splits off the presented Euclidean factor: (dimension of E, the remaining factor Y).
pub fn euclidean_decomposition(space: &Space) -> (usize, Space) {
    match space {
        Space::Euclidean(n) => (*n, Space::point()),
        Space::Tree(t) if t.is_line() => (1, Space::point()),
        Space::Tree(_) => (0, space.clone()),
        Space::Product(l, r) => {
            let (dl, yl) = euclidean_decomposition(l);
            let (dr, yr) = euclidean_decomposition(r);
            let y = match (yl.is_single_point(), yr.is_single_point()) {
                (true, _) => yr,
                (false, true) => yl,
                (false, false) => Space::product(yl, yr),
            };
            (dl + dr, y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::boundary_grid;
    use crate::spaces::{Tree, TreePoint};

    #[test]
    fn busemann_on_the_plane_is_affine() {
        let x = Space::Euclidean(2);
        let f = ConvexFunction::Busemann(BusemannSum::single(
            Point::Euclidean(vec![0.0, 0.0]),
            BoundaryPoint::Euclidean(vec![1.0, 0.0]),
        ));
        for r in [1.0, 3.0, 8.0] {
            assert!(affinity_defect(&x, &f, &Point::Euclidean(vec![0.0, 0.0]), r) < 1e-9);
        }
    }

    #[test]
    fn tripod_defect_at_radius_two() {
        let x = Space::tripod();
        let f = ConvexFunction::Busemann(BusemannSum::single(Point::Tree(TreePoint::Vertex(0)), BoundaryPoint::Tree(0)));
        let d = affinity_defect(&x, &f, &Point::Tree(TreePoint::Vertex(0)), 2.0);
        assert!((d - 2.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn square_norm_defect() {
        let x = Space::Euclidean(1);
        let f = ConvexFunction::Custom(std::sync::Arc::new(|p: &Point| p.coords().unwrap()[0].powi(2)));
        let d = affinity_defect(&x, &f, &Point::Euclidean(vec![0.0]), 1.0);
        assert!((d - 1.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn plane_grid_is_all_antipodal() {
        let x = Space::Euclidean(2);
        let g = boundary_grid(&x, 0.5);
        let s = flat_split(&x, &g, 8.0, 1e-6).unwrap();
        assert_eq!(s.flat.len(), g.len());
        assert_eq!(s.antipodal.len(), g.len());
        assert!(s.perpendicular.is_empty());
    }

    #[test]
    fn tripod_has_no_flat_points() {
        let x = Space::tripod();
        let s = flat_split(&x, &boundary_grid(&x, 0.1), 8.0, 1e-6).unwrap();
        assert!(s.flat.is_empty() && s.perpendicular.is_empty());
        assert!(s.defects.iter().filter(|r| r.radius == 2.0).all(|r| r.defect >= 1.0));
    }

    #[test]
    fn line_tree_ends_are_antipodal() {
        let x = Space::line_tree();
        let s = flat_split(&x, &boundary_grid(&x, 0.1), 8.0, 1e-6).unwrap();
        assert_eq!(s.flat.len(), 2);
        assert_eq!(s.antipodal.len(), 2);
        assert!(s.perpendicular.is_empty());
    }

    #[test]
    fn half_line_end_is_flat_but_not_antipodal() {
        let x = Space::tree(Tree::half_line());
        let s = flat_split(&x, &[BoundaryPoint::Tree(0)], 8.0, 1e-6).unwrap();
        assert_eq!(s.flat.len(), 1);
        assert!(s.antipodal.is_empty());
        assert_eq!(s.perpendicular, s.flat);
    }

    #[test]
    fn product_flat_set_is_the_euclidean_factor() {
        let x = Space::product(Space::Euclidean(1), Space::tripod());
        let g = boundary_grid(&x, 0.5);
        let s = flat_split(&x, &g, 4.0, 1e-6).unwrap();
        assert_eq!(s.flat.len(), 2);
        assert!(s.flat.iter().all(|p| matches!(p, BoundaryPoint::Join { theta, .. } if *theta == 0.0)));
        assert_eq!(s.antipodal, s.flat);
        for xi in &g {
            assert_eq!(is_flat_closed_form(&x, xi), s.flat.contains(xi));
        }
    }

    #[test]
    fn decompositions() {
        assert_eq!(euclidean_decomposition(&Space::Euclidean(3)), (3, Space::point()));
        assert_eq!(euclidean_decomposition(&Space::tripod()), (0, Space::tripod()));
        assert_eq!(euclidean_decomposition(&Space::line_tree()), (1, Space::point()));
        assert_eq!(
            euclidean_decomposition(&Space::product(Space::Euclidean(2), Space::tripod())),
            (2, Space::tripod())
        );
    }
}
