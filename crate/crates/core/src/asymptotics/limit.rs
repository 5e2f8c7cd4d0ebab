//! Limit sets at infinity of nested convex families.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use crate::boundary::{angular_circumcenter, tits_unchecked, BoundaryPoint};
use crate::error::{Error, Result};
use crate::geometry::ConvexSet;
use crate::spaces::{Point, Space, TreePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyIndex {
    Integer,
    /// Indexed by a real parameter, sampled on the grid 1, 2, 4, 8, ...
    Real,
}

type Generator = Arc<dyn Fn(f64) -> Result<ConvexSet> + Send + Sync>;

/// A decreasing family C_0 ⊇ C_1 ⊇ ... of closed convex sets.
#[derive(Clone)]
pub struct NestedConvexFamily {
    pub index: FamilyIndex,
    source: Source,
}

#[derive(Clone)]
enum Source {
    List(Vec<ConvexSet>),
    Generator(Generator),
}

impl fmt::Debug for NestedConvexFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Source::List(l) => write!(f, "NestedConvexFamily::List({} sets)", l.len()),
            Source::Generator(_) => write!(f, "NestedConvexFamily::Generator({:?})", self.index),
        }
    }
}

/// One sampled member of the projection orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSample {
    pub index: f64,
    pub point: Point,
    pub distance: f64,
}

const MAX_DOUBLINGS: usize = 64;
const CLUSTER_RESOLUTION: f64 = 1e-3;
/// Samples taken after the orbit first passes the horizon.
const TAIL_SAMPLES: usize = 3;

impl NestedConvexFamily {
    pub fn from_list(sets: Vec<ConvexSet>) -> Self {
        NestedConvexFamily {
            index: FamilyIndex::Integer,
            source: Source::List(sets),
        }
    }

    /// Family n -> C_n from a callback, sampled at n = 1, 2, 4, ...
    pub fn from_fn<F: Fn(f64) -> Result<ConvexSet> + Send + Sync + 'static>(index: FamilyIndex, f: F) -> Self {
        NestedConvexFamily {
            index,
            source: Source::Generator(Arc::new(f)),
        }
    }

    /// Sampled indices and members, k-th sample.
    fn member(&self, k: usize) -> Option<Result<(f64, ConvexSet)>> {
        match &self.source {
            Source::List(l) => l.get(k).map(|c| Ok((k as f64, c.clone()))),
            Source::Generator(g) => {
                if k > MAX_DOUBLINGS {
                    return None;
                }
                let idx = 2f64.powi(k as i32);
                Some(g(idx).map(|c| (idx, c)))
            }
        }
    }

    /// Projections of x0 onto the sampled members until `TAIL_SAMPLES` of them lie beyond the horizon.
    pub fn projection_orbit(&self, space: &Space, x0: &Point, horizon: f64) -> Result<Vec<OrbitSample>> {
        space.validate(x0)?;
        let mut orbit: Vec<OrbitSample> = Vec::new();
        let mut previous: Option<ConvexSet> = None;
        let mut beyond = 0;
        let mut k = 0;
        while let Some(member) = self.member(k) {
            let (index, set) = member?;
            let p = set.project(space, x0)?;
            let distance = space.d(x0, &p);
            if let Some(prev) = &previous {
                // C_{k+1} ⊆ C_k tested on the new projection.
                if !prev.contains(space, &p, 1e-9 * (1.0 + distance)) {
                    return Err(Error::Precondition(format!("family is not monotone at index {index}")));
                }
            }
            orbit.push(OrbitSample { index, point: p, distance });
            if distance > horizon {
                beyond += 1;
                if beyond == TAIL_SAMPLES {
                    return Ok(orbit);
                }
            }
            previous = Some(set);
            k += 1;
        }
        if beyond > 0 {
            return Ok(orbit);
        }
        Err(Error::Precondition("intersection nonempty at horizon".into()))
    }
}

/// Boundary point of the geodesic ray from x0 through p (p far from x0).
pub fn direction_at_infinity(space: &Space, x0: &Point, p: &Point) -> Result<BoundaryPoint> {
    match (space, x0, p) {
        (Space::Euclidean(_), Point::Euclidean(a), Point::Euclidean(b)) => {
            let v: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
            BoundaryPoint::direction(&v)
        }
        (Space::Tree(_), _, Point::Tree(TreePoint::Ray { ray, .. })) => Ok(BoundaryPoint::Tree(*ray)),
        (Space::Tree(_), _, _) => Err(Error::Precondition("projection stayed in the bounded part of the tree".into())),
        (Space::Product(l, r), Point::Product(a0, b0), Point::Product(a, b)) => {
            let dl = l.d(a0, a);
            let dr = r.d(b0, b);
            let theta = dr.atan2(dl);
            // A factor that stays within a negligible fraction of the total carries no direction.
            let scale = dl.hypot(dr);
            let left = (dl > 1e-9 * scale).then(|| direction_at_infinity(l, a0, a)).transpose()?;
            let right = (dr > 1e-9 * scale).then(|| direction_at_infinity(r, b0, b)).transpose()?;
            let theta = if left.is_none() {
                FRAC_PI_2
            } else if right.is_none() {
                0.0
            } else {
                theta
            };
            BoundaryPoint::join(theta, left, right)
        }
        _ => Err(Error::Domain("points of the wrong kind".into())),
    }
}

/// Accumulation directions of the projection orbit, clustered at angular resolution 1e-3.
pub fn limit_set(space: &Space, family: &NestedConvexFamily, x0: &Point, horizon: f64) -> Result<Vec<BoundaryPoint>> {
    let orbit = family.projection_orbit(space, x0, horizon)?;
    let mut clusters: Vec<Vec<BoundaryPoint>> = Vec::new();
    for s in orbit.iter().filter(|s| s.distance > horizon) {
        let xi = direction_at_infinity(space, x0, &s.point)?;
        let hits: Vec<usize> = clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| c.iter().any(|m| tits_unchecked(space, m, &xi) < CLUSTER_RESOLUTION))
            .map(|(i, _)| i)
            .collect();
        match hits.split_first() {
            None => clusters.push(vec![xi]),
            Some((&first, rest)) => {
                // Single linkage: merge every cluster within reach.
                for &i in rest.iter().rev() {
                    let moved = clusters.remove(i);
                    clusters[first].extend(moved);
                }
                clusters[first].push(xi);
            }
        }
    }
    // The farthest sample represents its cluster.
    Ok(clusters.into_iter().map(|mut c| c.pop().expect("non-empty cluster")).collect())
}

/// Largest pairwise Tits angle.
pub fn limit_set_diameter_check(space: &Space, set: &[BoundaryPoint]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in set.iter().enumerate() {
        for b in &set[i + 1..] {
            worst = worst.max(tits_unchecked(space, a, b));
        }
    }
    worst
}

/// Angular circumcenter of the limit set, with its radius.
pub fn limit_circumcenter(space: &Space, family: &NestedConvexFamily, x0: &Point, horizon: f64) -> Result<(BoundaryPoint, f64)> {
    let set = limit_set(space, family, x0, horizon)?;
    angular_circumcenter(space, &set)
}
