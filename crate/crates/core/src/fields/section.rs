//! Sections of a field, flats, invariance residuals and spanning-tree transport.

use super::scenario::FieldScenario;
use crate::boundary::{tits_unchecked, validate_boundary, BoundaryPoint};
use crate::error::{argument, domain, Result};
use crate::geometry::{ConvexSet, EuclideanConvex, HalfSpace, TreeConvex};
use crate::numeric::{complement_basis, dot, norm};
use crate::spaces::{Isometry, Point, Space};

/// A flat of one fiber: a point, an affine subspace with orthonormal frame, a whole line
/// tree, or a product of such.
#[derive(Debug, Clone, PartialEq)]
pub enum Flat {
    Point(Point),
    Euclidean { base: Vec<f64>, frame: Vec<Vec<f64>> },
    Line,
    Product(Box<Flat>, Box<Flat>),
}

impl Flat {
    pub fn dim(&self) -> usize {
        match self {
            Flat::Point(_) => 0,
            Flat::Euclidean { frame, .. } => frame.len(),
            Flat::Line => 1,
            Flat::Product(a, b) => a.dim() + b.dim(),
        }
    }

    /// The flat as a space in its own right.
    pub fn intrinsic(&self, ambient: &Space) -> Space {
        match (self, ambient) {
            (Flat::Point(_), _) => Space::point(),
            (Flat::Euclidean { frame, .. }, _) => Space::Euclidean(frame.len()),
            (Flat::Line, _) => ambient.clone(),
            (Flat::Product(a, b), Space::Product(l, r)) => Space::product(a.intrinsic(l), b.intrinsic(r)),
            (Flat::Product(..), _) => Space::point(),
        }
    }

    pub fn map(&self, iso: &Isometry) -> Flat {
        match (self, iso) {
            (Flat::Point(p), _) => Flat::Point(iso.map(p)),
            (Flat::Euclidean { base, frame }, Isometry::Euclidean { linear, .. }) => {
                let b = iso.map(&Point::Euclidean(base.clone()));
                Flat::Euclidean {
                    base: b.coords().expect("Euclidean").to_vec(),
                    frame: frame
                        .iter()
                        .map(|v| (linear * nalgebra::DVector::from_column_slice(v)).iter().cloned().collect())
                        .collect(),
                }
            }
            (Flat::Product(a, b), Isometry::Product(l, r)) => Flat::Product(Box::new(a.map(l)), Box::new(b.map(r))),
            (f, _) => f.clone(),
        }
    }

    /// A few points spanning the flat, used for residuals.
    pub fn probes(&self, ambient: &Space) -> Vec<Point> {
        match (self, ambient) {
            (Flat::Point(p), _) => vec![p.clone()],
            (Flat::Euclidean { base, frame }, _) => {
                let mut out = vec![Point::Euclidean(base.clone())];
                for v in frame {
                    for s in [1.0, -1.0] {
                        out.push(Point::Euclidean(base.iter().zip(v).map(|(b, x)| b + s * x).collect()));
                    }
                }
                out
            }
            (Flat::Line, Space::Tree(t)) => [-1.0, 0.0, 1.0]
                .iter()
                .filter_map(|&x| t.line_point(x).ok().map(Point::Tree))
                .collect(),
            (Flat::Product(a, b), Space::Product(l, r)) => {
                let (pa, pb) = (a.probes(l), b.probes(r));
                pa.iter()
                    .flat_map(|x| pb.iter().map(move |y| Point::pair(x.clone(), y.clone())))
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn distance_to(&self, ambient: &Space, p: &Point) -> f64 {
        match (self, ambient, p) {
            (Flat::Point(q), _, _) => ambient.d(p, q),
            (Flat::Euclidean { base, frame }, _, Point::Euclidean(x)) => {
                let mut r: Vec<f64> = x.iter().zip(base).map(|(a, b)| a - b).collect();
                for v in frame {
                    let c = dot(&r, v);
                    r.iter_mut().zip(v).for_each(|(ri, vi)| *ri -= c * vi);
                }
                norm(&r)
            }
            (Flat::Line, _, _) => 0.0,
            (Flat::Product(a, b), Space::Product(l, r), Point::Product(x, y)) => {
                a.distance_to(l, x).hypot(b.distance_to(r, y))
            }
            _ => f64::INFINITY,
        }
    }

    /// Symmetric probe distance between two flats of the same ambient space.
    pub fn residual(&self, ambient: &Space, other: &Flat) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        let one = |a: &Flat, b: &Flat| a.probes(ambient).iter().map(|p| b.distance_to(ambient, p)).fold(0.0, f64::max);
        one(self, other).max(one(other, self))
    }

    pub fn to_convex(&self, ambient: &Space) -> ConvexSet {
        match (self, ambient) {
            (Flat::Point(p), _) => point_set(ambient, p),
            (Flat::Euclidean { base, frame }, Space::Euclidean(n)) => {
                if frame.len() == *n {
                    return ConvexSet::Universal;
                }
                let mut halfspaces = Vec::new();
                for a in complement_basis(frame, *n) {
                    let c = dot(&a, base);
                    let neg: Vec<f64> = a.iter().map(|x| -x).collect();
                    halfspaces.push(HalfSpace { normal: a, offset: c });
                    halfspaces.push(HalfSpace { normal: neg, offset: -c });
                }
                ConvexSet::Euclidean(EuclideanConvex { halfspaces, balls: Vec::new() })
            }
            (Flat::Product(a, b), Space::Product(l, r)) => ConvexSet::product(a.to_convex(l), b.to_convex(r)),
            _ => ConvexSet::Universal,
        }
    }

    /// Image in the ambient boundary of a boundary point of the intrinsic space.
    pub fn boundary_to_ambient(&self, ambient: &Space, xi: &BoundaryPoint) -> Result<BoundaryPoint> {
        match (self, ambient, xi) {
            (Flat::Euclidean { frame, .. }, _, BoundaryPoint::Euclidean(c)) if c.len() == frame.len() => {
                let n = frame[0].len();
                let v: Vec<f64> = (0..n).map(|i| frame.iter().zip(c).map(|(f, w)| w * f[i]).sum()).collect();
                BoundaryPoint::direction(&v)
            }
            (Flat::Line, _, BoundaryPoint::Tree(_)) => Ok(xi.clone()),
            (Flat::Product(a, b), Space::Product(l, r), BoundaryPoint::Join { theta, left, right }) => {
                let left = left.as_ref().map(|p| a.boundary_to_ambient(l, p)).transpose()?;
                let right = right.as_ref().map(|p| b.boundary_to_ambient(r, p)).transpose()?;
                BoundaryPoint::join(*theta, left, right)
            }
            _ => Err(domain("boundary point does not belong to the flat")),
        }
    }

    pub fn describe(&self, ambient: &Space) -> String {
        match (self, ambient) {
            (Flat::Point(p), _) => ambient.format_point(p),
            (Flat::Euclidean { base, frame }, _) => {
                let vs: Vec<String> = frame.iter().map(|v| fmt_vec(v)).collect();
                format!("{} + span{{{}}}", fmt_vec(base), vs.join(", "))
            }
            (Flat::Line, _) => "whole line".into(),
            (Flat::Product(a, b), Space::Product(l, r)) => format!("[{}; {}]", a.describe(l), b.describe(r)),
            _ => "?".into(),
        }
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(" "))
}

/// The singleton {p} as a convex set.
pub fn point_set(space: &Space, p: &Point) -> ConvexSet {
    match (space, p) {
        (Space::Euclidean(_), Point::Euclidean(x)) => ConvexSet::Euclidean(EuclideanConvex {
            halfspaces: Vec::new(),
            balls: vec![crate::geometry::EuclideanBall { center: x.clone(), radius: 0.0 }],
        }),
        (Space::Tree(t), Point::Tree(q)) => ConvexSet::Tree(TreeConvex::span(t, std::slice::from_ref(q))),
        (Space::Product(l, r), Point::Product(a, b)) => ConvexSet::product(point_set(l, a), point_set(r, b)),
        _ => ConvexSet::Empty,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Section {
    Points(Vec<Point>),
    Boundary(Vec<BoundaryPoint>),
    Flats(Vec<Flat>),
}

impl Section {
    pub fn len(&self) -> usize {
        match self {
            Section::Points(v) => v.len(),
            Section::Boundary(v) => v.len(),
            Section::Flats(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Residual of α(ω, ω')·s(ω) against s(ω') for every generator edge, in edge order.
pub fn edge_residuals(scenario: &FieldScenario, s: &Section) -> Result<Vec<f64>> {
    if s.len() != scenario.len() {
        return Err(argument(format!("section has {} entries for {} ids", s.len(), scenario.len())));
    }
    scenario
        .edges
        .iter()
        .map(|e| {
            let to = &scenario.spaces[e.to];
            Ok(match s {
                Section::Points(p) => {
                    scenario.spaces[e.from].validate(&p[e.from])?;
                    to.validate(&p[e.to])?;
                    to.d(&e.iso.map(&p[e.from]), &p[e.to])
                }
                Section::Boundary(b) => {
                    validate_boundary(&scenario.spaces[e.from], &b[e.from])?;
                    validate_boundary(to, &b[e.to])?;
                    tits_unchecked(to, &e.iso.map_boundary(&b[e.from])?, &b[e.to])
                }
                Section::Flats(f) => f[e.from].map(&e.iso).residual(to, &f[e.to]),
            })
        })
        .collect()
}

/// Largest edge residual: a distance for point sections and flats, a Tits angle for boundary sections.
pub fn check_invariant_section(scenario: &FieldScenario, s: &Section) -> Result<f64> {
    Ok(edge_residuals(scenario, s)?.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopDisplacement {
    pub class: usize,
    pub index: usize,
    pub displacement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transport {
    Invariant(Section),
    Obstruction(Vec<LoopDisplacement>),
}

/// Transports one seed per class along the spanning trees; loops that move a seed by more
/// than the invariance tolerance are reported instead.
pub fn transport_section(scenario: &FieldScenario, seeds: &[(usize, Point)]) -> Result<Transport> {
    let mut out: Vec<Option<Point>> = vec![None; scenario.len()];
    let mut obstruction = Vec::new();
    let mut seeded = vec![false; scenario.classes().len()];
    for (w, p) in seeds {
        if *w >= scenario.len() {
            return Err(argument(format!("no id with index {w}")));
        }
        scenario.spaces[*w].validate(p)?;
        let c = scenario.class_of(*w);
        if std::mem::replace(&mut seeded[c], true) {
            return Err(argument(format!("class of {} seeded twice", scenario.ids[*w])));
        }
        let root = scenario.root(*w);
        let at_root = scenario.transport(*w, root)?.map(p);
        for (index, l) in scenario.root_loops(c).iter().enumerate() {
            let displacement = scenario.spaces[root].d(&l.map(&at_root), &at_root);
            if displacement > scenario.tolerances.invariance {
                obstruction.push(LoopDisplacement { class: c, index, displacement });
            }
        }
        for &v in &scenario.classes()[c] {
            out[v] = Some(scenario.transport(*w, v)?.map(p));
        }
    }
    if let Some(c) = seeded.iter().position(|s| !s) {
        return Err(argument(format!("class {c} has no seed")));
    }
    if !obstruction.is_empty() {
        return Ok(Transport::Obstruction(obstruction));
    }
    Ok(Transport::Invariant(Section::Points(out.into_iter().map(|p| p.expect("seeded")).collect())))
}

/// Transports a boundary point at ω over its class; other ids are left empty.
pub fn transport_boundary(scenario: &FieldScenario, w: usize, xi: &BoundaryPoint) -> Result<Vec<Option<BoundaryPoint>>> {
    let mut out = vec![None; scenario.len()];
    for &v in &scenario.classes()[scenario.class_of(w)] {
        out[v] = Some(scenario.transport(w, v)?.map_boundary(xi)?);
    }
    Ok(out)
}

/// Transports a flat at ω over its class.
pub fn transport_flat(scenario: &FieldScenario, w: usize, flat: &Flat) -> Result<Vec<Option<Flat>>> {
    let mut out = vec![None; scenario.len()];
    for &v in &scenario.classes()[scenario.class_of(w)] {
        out[v] = Some(flat.map(&scenario.transport(w, v)?));
    }
    Ok(out)
}
