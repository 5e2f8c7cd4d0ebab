//! Angular circumcenters of finite boundary sets.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{tits_unchecked, validate_boundary, BoundaryPoint};
use crate::error::{argument, Error, Result};
use crate::geometry::{EuclideanConvex, HalfSpace};
use crate::numeric::{circle_grid, fibonacci_sphere, golden_min, nelder_mead, normalized, unit_angle};
use crate::spaces::Space;

/// Gate below which the angular circumcenter is unique.
const RADIUS_GATE: f64 = FRAC_PI_2 - 1e-6;

/// Center and radius of the smallest Tits ball containing `set`.
///
/// Fails with [`Error::NoUniqueCenter`] (carrying the radius) when the radius is
/// not below pi/2.
pub fn angular_circumcenter(space: &Space, set: &[BoundaryPoint]) -> Result<(BoundaryPoint, f64)> {
    if set.is_empty() {
        return Err(argument("angular circumcenter of an empty set"));
    }
    for xi in set {
        validate_boundary(space, xi)?;
    }
    let (center, radius) = minimax(space, set);
    if radius >= RADIUS_GATE {
        return Err(Error::NoUniqueCenter { radius });
    }
    Ok((center, radius))
}

fn spread(space: &Space, c: &BoundaryPoint, set: &[BoundaryPoint]) -> f64 {
    set.iter().map(|x| tits_unchecked(space, c, x)).fold(0.0, f64::max)
}

fn minimax(space: &Space, set: &[BoundaryPoint]) -> (BoundaryPoint, f64) {
    if set.iter().all(|x| x == &set[0]) {
        return (set[0].clone(), 0.0);
    }
    match space {
        Space::Euclidean(_) => {
            let dirs: Vec<Vec<f64>> = set
                .iter()
                .map(|x| match x {
                    BoundaryPoint::Euclidean(u) => u.clone(),
                    _ => unreachable!("validated"),
                })
                .collect();
            let (c, r) = sphere_minimax(&dirs, 1e-3);
            (BoundaryPoint::Euclidean(c), r)
        }
        Space::Tree(_) => set
            .iter()
            .map(|c| (c.clone(), spread(space, c, set)))
            .fold(None, |best: Option<(BoundaryPoint, f64)>, cand| match best {
                Some(b) if b.1 <= cand.1 => Some(b),
                _ => Some(cand),
            })
            .expect("non-empty"),
        Space::Product(l, r) => product_minimax(space, l, r, set),
    }
}

fn sphere_objective(dirs: &[Vec<f64>], v: &[f64]) -> f64 {
    match normalized(v) {
        Some(c) => dirs.iter().map(|a| unit_angle(&c, a)).fold(0.0, f64::max),
        None => PI,
    }
}

/// Minimax point on the unit sphere for the angular distance to `dirs`.
pub(crate) fn sphere_minimax(dirs: &[Vec<f64>], spacing: f64) -> (Vec<f64>, f64) {
    let n = dirs[0].len();
    let mut cands: Vec<Vec<f64>> = dirs.to_vec();
    let mean: Vec<f64> = (0..n).map(|i| dirs.iter().map(|d| d[i]).sum::<f64>()).collect();
    cands.extend(normalized(&mean));
    match n {
        1 => cands.extend([vec![1.0], vec![-1.0]]),
        2 => cands.extend(circle_grid(spacing)),
        3 => cands.extend(fibonacci_sphere(spacing.max(0.02))),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..4000 {
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                cands.extend(normalized(&v));
            }
        }
    }
    let (mut best, mut best_val) = cands
        .iter()
        .map(|c| (c.clone(), sphere_objective(dirs, c)))
        .fold((vec![0.0; n], f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    if n > 1 {
        let (v, val) = nelder_mead(|v| sphere_objective(dirs, v), &best, 0.05, 1e-13, 4000 * n);
        if val < best_val {
            best = normalized(&v).unwrap_or(best);
            best_val = val;
        }
    }
    // Exact polish: for radius < pi/2 the center is v*/|v*| with v* the least-norm
    // point of {v : <a_i, v> >= 1}.
    let poly = EuclideanConvex {
        halfspaces: dirs
            .iter()
            .filter_map(|a| HalfSpace::new(a.iter().map(|x| -x).collect(), -1.0).ok())
            .collect(),
        balls: vec![],
    };
    if let Ok(v) = poly.project(&vec![0.0; n]) {
        if let Some(c) = normalized(&v) {
            let val = sphere_objective(dirs, &c);
            if val <= best_val + 1e-9 {
                best = c;
                best_val = val;
            }
        }
    }
    (best, best_val)
}

/// Deterministic candidate grid of boundary points.
pub fn boundary_grid(space: &Space, spacing: f64) -> Vec<BoundaryPoint> {
    match space {
        Space::Euclidean(0) => Vec::new(),
        Space::Euclidean(1) => vec![BoundaryPoint::Euclidean(vec![1.0]), BoundaryPoint::Euclidean(vec![-1.0])],
        Space::Euclidean(2) => circle_grid(spacing).into_iter().map(BoundaryPoint::Euclidean).collect(),
        Space::Euclidean(3) => fibonacci_sphere(spacing).into_iter().map(BoundaryPoint::Euclidean).collect(),
        Space::Euclidean(n) => {
            let mut out = Vec::new();
            for i in 0..*n {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; *n];
                    v[i] = s;
                    out.push(BoundaryPoint::Euclidean(v));
                }
                for j in i + 1..*n {
                    for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                        let mut v = vec![0.0; *n];
                        v[i] = a;
                        v[j] = b;
                        out.push(BoundaryPoint::Euclidean(normalized(&v).expect("nonzero")));
                    }
                }
            }
            out
        }
        Space::Tree(t) => (0..t.end_count()).map(BoundaryPoint::Tree).collect(),
        Space::Product(l, r) => {
            let lg = boundary_grid(l, spacing);
            let rg = boundary_grid(r, spacing);
            let mut out: Vec<BoundaryPoint> = lg.iter().cloned().map(BoundaryPoint::left).collect();
            for a in &lg {
                for b in &rg {
                    out.push(BoundaryPoint::Join {
                        theta: PI / 4.0,
                        left: Some(Box::new(a.clone())),
                        right: Some(Box::new(b.clone())),
                    });
                }
            }
            out.extend(rg.into_iter().map(BoundaryPoint::right));
            out
        }
    }
}

/// Candidate factor centers: the factor grid, the factor components of the set and
/// their own factor minimax center.
fn factor_candidates(space: &Space, parts: &[BoundaryPoint]) -> Vec<BoundaryPoint> {
    let spacing = match space {
        Space::Euclidean(2) => 0.05,
        _ => 0.2,
    };
    let mut out = boundary_grid(space, spacing);
    out.extend(parts.iter().cloned());
    if !parts.is_empty() {
        out.push(minimax(space, parts).0);
    }
    out
}

fn product_minimax(space: &Space, l: &Space, r: &Space, set: &[BoundaryPoint]) -> (BoundaryPoint, f64) {
    let (mut lp, mut rp) = (Vec::new(), Vec::new());
    for x in set {
        if let BoundaryPoint::Join { left, right, .. } = x {
            lp.extend(left.as_ref().map(|b| (**b).clone()));
            rp.extend(right.as_ref().map(|b| (**b).clone()));
        }
    }
    let lc = if l.is_bounded() { Vec::new() } else { factor_candidates(l, &lp) };
    let rc = if r.is_bounded() { Vec::new() } else { factor_candidates(r, &rp) };
    let build = |theta: f64, a: Option<&BoundaryPoint>, b: Option<&BoundaryPoint>| {
        BoundaryPoint::join(theta, a.cloned(), b.cloned()).ok()
    };
    let score = |c: &BoundaryPoint| spread(space, c, set);
    let mut best: Option<(BoundaryPoint, f64)> = None;
    let mut offer = |c: BoundaryPoint, v: f64| {
        if best.as_ref().map_or(true, |b| v < b.1) {
            best = Some((c, v));
        }
    };
    for a in &lc {
        let c = BoundaryPoint::left(a.clone());
        let v = score(&c);
        offer(c, v);
    }
    for b in &rc {
        let c = BoundaryPoint::right(b.clone());
        let v = score(&c);
        offer(c, v);
    }
    const STEPS: usize = 157;
    for a in &lc {
        for b in &rc {
            let f = |theta: f64| build(theta, Some(a), Some(b)).map_or(f64::INFINITY, |c| score(&c));
            let (mut tb, mut vb) = (0.0, f64::INFINITY);
            for k in 1..STEPS {
                let theta = FRAC_PI_2 * k as f64 / STEPS as f64;
                let v = f(theta);
                if v < vb {
                    tb = theta;
                    vb = v;
                }
            }
            let h = FRAC_PI_2 / STEPS as f64;
            let (t, v) = golden_min(f, (tb - h).max(1e-12), (tb + h).min(FRAC_PI_2 - 1e-12), 1e-10);
            if let Some(c) = build(t, Some(a), Some(b)) {
                offer(c, v);
            }
        }
    }
    let (mut c, mut v) = best.expect("product boundary is non-empty");
    // Continuous refinement when the factor boundaries are spheres.
    if let BoundaryPoint::Join { theta, left, right } = &c {
        let lv = euclid_vec(left.as_deref());
        let rv = euclid_vec(right.as_deref());
        if lv.is_some() || rv.is_some() {
            let nl = lv.as_ref().map_or(0, |x| x.len());
            let mut start = vec![*theta];
            start.extend(lv.clone().unwrap_or_default());
            start.extend(rv.clone().unwrap_or_default());
            let decode = |p: &[f64]| -> Option<BoundaryPoint> {
                let th = p[0].clamp(0.0, FRAC_PI_2);
                let a = match &lv {
                    Some(_) => normalized(&p[1..1 + nl]).map(BoundaryPoint::Euclidean),
                    None => left.as_deref().cloned(),
                };
                let b = match &rv {
                    Some(_) => normalized(&p[1 + nl..]).map(BoundaryPoint::Euclidean),
                    None => right.as_deref().cloned(),
                };
                build(th, a.as_ref().or(lc.first()), b.as_ref().or(rc.first()))
            };
            let (p, _) = nelder_mead(
                |p| decode(p).map_or(f64::INFINITY, |c| score(&c)),
                &start,
                0.02,
                1e-13,
                3000 * start.len(),
            );
            if let Some(c2) = decode(&p) {
                let v2 = score(&c2);
                if v2 < v {
                    c = c2;
                    v = v2;
                }
            }
        }
    }
    (c, v)
}

fn euclid_vec(b: Option<&BoundaryPoint>) -> Option<Vec<f64>> {
    match b {
        Some(BoundaryPoint::Euclidean(u)) => Some(u.clone()),
        _ => None,
    }
}
