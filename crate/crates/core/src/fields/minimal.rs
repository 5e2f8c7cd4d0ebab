//! Minimal invariant subfields, found from the structure of the holonomy group at the class root.
//!
//! Each round computes the minimal displacement set of the loop group inside the current
//! convex set. Euclidean holonomy is split into the subspace W it translates along and its
//! complement, where a common fixed point is solved for by least squares. Tree automorphisms
//! are intersected fixed subtrees. Product holonomy is analyzed factorwise.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::scenario::FieldScenario;
use super::section::{point_set, Flat};
use crate::asymptotics::{FamilyIndex, NestedConvexFamily};
use crate::boundary::BoundaryPoint;
use crate::error::{Error, Result};
use crate::geometry::{circumcenter, ConvexSet, EuclideanConvex, HalfSpace, TreeConvex};
use crate::numeric::{complement_basis, dot, least_squares, norm, normalized, null_space, span_basis};
use crate::spaces::{Isometry, Point, Segment, Space, Tree, TreeIsometry, TreeMap, TreePoint};

/// Where the shrinking settled for one class.
#[derive(Debug, Clone)]
pub enum Minimal {
    Stabilized(Flat),
    /// No minimal set: nested invariant sets marching to infinity from `base`.
    Escape {
        family: NestedConvexFamily,
        base: Point,
        direction: BoundaryPoint,
    },
    Indeterminate(String),
}

#[derive(Debug, Clone)]
pub struct ClassMinimal {
    pub class: usize,
    pub root: usize,
    pub outcome: Minimal,
    pub rounds: usize,
    pub trace: Vec<String>,
}

type Members = Arc<dyn Fn(f64) -> Result<ConvexSet> + Send + Sync>;

#[derive(Clone)]
enum Candidate {
    Flat(Flat),
    Escape { members: Members, base: Point, direction: BoundaryPoint },
    Stuck(String),
}

const LINEAR_TOL: f64 = 1e-9;
const MAX_WORDS: usize = 4096;
const WORD_LENGTH: usize = 4;
const MAX_POWER: usize = 12;
const CONTAIN_TOL: f64 = 1e-7;

/// Shrinks C₀ (one convex set per ω) to a minimal invariant subfield, class by class.
pub fn minimal_invariant_subfield(scenario: &FieldScenario, c0: &[ConvexSet], rounds: usize) -> Result<Vec<ClassMinimal>> {
    if c0.len() != scenario.len() {
        return Err(Error::Argument(format!("{} initial sets for {} ids", c0.len(), scenario.len())));
    }
    for (w, c) in c0.iter().enumerate() {
        c.check(&scenario.spaces[w])?;
    }
    check_invariant_sets(scenario, c0)?;
    let mut out = Vec::new();
    for (class, members) in scenario.classes().iter().enumerate() {
        let root = members[0];
        let gens = scenario.root_loops(class);
        let (outcome, used, trace) = shrink(&scenario.spaces[root], &gens, &c0[root], rounds);
        out.push(ClassMinimal {
            class,
            root,
            outcome,
            rounds: used,
            trace,
        });
    }
    Ok(out)
}

/// Round loop at one root: stop when two consecutive rounds give the same flat.
pub(crate) fn shrink(space: &Space, gens: &[Isometry], c0: &ConvexSet, rounds: usize) -> (Minimal, usize, Vec<String>) {
    let mut trace = Vec::new();
    let mut current = c0.clone();
    let mut previous: Option<Flat> = None;
    for round in 1..=rounds {
        match analyze(space, gens, &current) {
            Candidate::Stuck(reason) => {
                trace.push(format!("round {round}: {reason}"));
                return (Minimal::Indeterminate(reason), round, trace);
            }
            Candidate::Escape { members, base, direction } => {
                trace.push(format!("round {round}: displacement has no minimal set; escaping"));
                let family = NestedConvexFamily::from_fn(FamilyIndex::Real, move |b| members(b));
                return (Minimal::Escape { family, base, direction }, round, trace);
            }
            Candidate::Flat(f) => {
                let probe = &f.probes(space)[0];
                let disp = gens.iter().map(|g| space.d(probe, &g.map(probe))).fold(0.0, f64::max);
                trace.push(format!(
                    "round {round}: minimal displacement {disp:e} on a flat of dimension {}",
                    f.dim()
                ));
                if previous.as_ref().is_some_and(|p| p.residual(space, &f) < 1e-9 * (1.0 + disp)) {
                    return (Minimal::Stabilized(f), round, trace);
                }
                current = f.to_convex(space);
                previous = Some(f);
            }
        }
    }
    (Minimal::Indeterminate("rounds exhausted without stabilization".into()), rounds, trace)
}

fn analyze(space: &Space, gens: &[Isometry], c: &ConvexSet) -> Candidate {
    match space {
        Space::Euclidean(n) => {
            let parts: Vec<(DMatrix<f64>, DVector<f64>)> = gens
                .iter()
                .filter_map(|g| g.euclidean_parts().map(|(a, t)| (a.clone(), t.clone())))
                .collect();
            let tie = tie_point(space);
            euclidean(*n, &parts, c, tie.coords().expect("Euclidean").to_vec())
        }
        Space::Tree(t) => {
            let tree_gens: Vec<&TreeIsometry> = gens
                .iter()
                .filter_map(|g| match g {
                    Isometry::Tree(t) => Some(t),
                    _ => None,
                })
                .collect();
            if t.is_line() {
                line(space, t, &tree_gens, c)
            } else {
                automorphisms(space, t, &tree_gens, c)
            }
        }
        Space::Product(l, r) => {
            let (mut lg, mut rg) = (Vec::new(), Vec::new());
            for g in gens {
                if let Isometry::Product(a, b) = g {
                    lg.push((**a).clone());
                    rg.push((**b).clone());
                }
            }
            let (cl, cr) = match c {
                ConvexSet::Universal => (ConvexSet::Universal, ConvexSet::Universal),
                ConvexSet::Product(a, b) => ((**a).clone(), (**b).clone()),
                _ => return Candidate::Stuck("initial set on a product is not a product of sets".into()),
            };
            let left = analyze(l, &lg, &cl);
            let right = analyze(r, &rg, &cr);
            combine(l, r, left, right, cl, cr)
        }
    }
}

fn combine(l: &Space, r: &Space, left: Candidate, right: Candidate, cl: ConvexSet, cr: ConvexSet) -> Candidate {
    match (left, right) {
        (Candidate::Stuck(s), _) | (_, Candidate::Stuck(s)) => Candidate::Stuck(s),
        (Candidate::Escape { members, base, direction }, other) => {
            let (set, fixed) = settle(r, other, cr);
            Candidate::Escape {
                members: Arc::new(move |b| Ok(ConvexSet::product(members(b)?, set.clone()))),
                base: Point::pair(base, fixed),
                direction: BoundaryPoint::left(direction),
            }
        }
        (other, Candidate::Escape { members, base, direction }) => {
            let (set, fixed) = settle(l, other, cl);
            Candidate::Escape {
                members: Arc::new(move |b| Ok(ConvexSet::product(set.clone(), members(b)?))),
                base: Point::pair(fixed, base),
                direction: BoundaryPoint::right(direction),
            }
        }
        (Candidate::Flat(a), Candidate::Flat(b)) => Candidate::Flat(Flat::Product(Box::new(a), Box::new(b))),
    }
}

/// The factor that does not escape: its flat as a set, and a base point on it.
fn settle(space: &Space, c: Candidate, initial: ConvexSet) -> (ConvexSet, Point) {
    match c {
        Candidate::Flat(f) => (f.to_convex(space), f.probes(space).swap_remove(0)),
        // Both factors escaping: follow the first and keep the other at its initial set.
        Candidate::Escape { base, .. } => (initial, base),
        Candidate::Stuck(_) => unreachable!("stuck factors are handled first"),
    }
}

/// Circumcenter of a small canonical probe set: origin and unit vectors, or vertices and
/// unit ray points.
pub(crate) fn tie_point(space: &Space) -> Point {
    match space {
        Space::Euclidean(n) => {
            let mut probes = vec![Point::Euclidean(vec![0.0; *n])];
            for i in 0..*n {
                let mut e = vec![0.0; *n];
                e[i] = 1.0;
                probes.push(Point::Euclidean(e));
            }
            circumcenter(space, &probes).map(|c| c.0).unwrap_or_else(|_| space.base_point())
        }
        Space::Tree(t) => {
            let mut probes: Vec<Point> = (0..t.vertex_count()).map(|v| Point::Tree(TreePoint::Vertex(v))).collect();
            for r in 0..t.rays().len() {
                probes.push(Point::Tree(t.point_on_clamped(Segment::Ray(r), 1.0)));
            }
            circumcenter(space, &probes).map(|c| c.0).unwrap_or_else(|_| space.base_point())
        }
        Space::Product(l, r) => Point::pair(tie_point(l), tie_point(r)),
    }
}

fn is_identity(a: &DMatrix<f64>) -> bool {
    (a - DMatrix::identity(a.nrows(), a.ncols())).amax() < LINEAR_TOL
}

type Affine = (DMatrix<f64>, DVector<f64>);

fn compose(a: &Affine, b: &Affine) -> Affine {
    (&a.0 * &b.0, &a.0 * &b.1 + &a.1)
}

/// Translation vectors of the loop group: axial parts of the generators, pure translations
/// among short words and among powers.
fn translation_vectors(n: usize, gens: &[Affine]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut push = |t: &DVector<f64>| {
        if t.norm() > LINEAR_TOL {
            out.push(t.iter().cloned().collect::<Vec<f64>>());
        }
    };
    for (a, t) in gens {
        let fixed = null_space(&(a - DMatrix::identity(n, n)), 1e-9);
        let mut axial = DVector::zeros(n);
        for v in &fixed {
            let v = DVector::from_column_slice(v);
            axial += &v * v.dot(t);
        }
        push(&axial);
    }
    let mut letters: Vec<Affine> = gens.to_vec();
    letters.extend(gens.iter().map(|(a, t)| {
        let at = a.transpose();
        let inv_t = -(&at * t);
        (at, inv_t)
    }));
    for g in gens {
        let mut p = g.clone();
        for _ in 1..MAX_POWER {
            p = compose(&p, g);
            if is_identity(&p.0) {
                push(&p.1);
                break;
            }
        }
    }
    let mut layer: Vec<Affine> = letters.clone();
    let mut count = layer.len();
    for _ in 1..WORD_LENGTH {
        let mut next = Vec::new();
        for w in &layer {
            for l in &letters {
                if count >= MAX_WORDS {
                    break;
                }
                next.push(compose(l, w));
                count += 1;
            }
        }
        for w in &next {
            if is_identity(&w.0) {
                push(&w.1);
            }
        }
        layer = next;
    }
    for w in &letters {
        if is_identity(&w.0) {
            push(&w.1);
        }
    }
    out
}

/// Minimal displacement structure of a group of affine isometries of R^n restricted to `c`.
fn euclidean(n: usize, gens: &[Affine], c: &ConvexSet, tie: Vec<f64>) -> Candidate {
    let translations = translation_vectors(n, gens);
    let mut w = span_basis(&translations, n, LINEAR_TOL);
    loop {
        let mut more = w.clone();
        for (a, _) in gens {
            for v in &w {
                more.push((a * DVector::from_column_slice(v)).iter().cloned().collect());
            }
        }
        let grown = span_basis(&more, n, LINEAR_TOL);
        if grown.len() == w.len() {
            break;
        }
        w = grown;
    }
    let q = complement_basis(&w, n);
    let rows = q.len() * gens.len();
    let mut m = DMatrix::zeros(rows, n);
    let mut rhs = DVector::zeros(rows);
    for (i, (a, t)) in gens.iter().enumerate() {
        let d = a - DMatrix::identity(n, n);
        for (j, qv) in q.iter().enumerate() {
            let qrow = DVector::from_column_slice(qv).transpose();
            m.row_mut(i * q.len() + j).copy_from(&(&qrow * &d));
            rhs[i * q.len() + j] = -(&qrow * t)[0];
        }
    }
    let (x, residual) = least_squares(&m, &rhs);
    let scale = 1.0 + gens.iter().map(|(_, t)| t.norm()).fold(0.0, f64::max);
    if residual > 1e-7 * scale {
        return Candidate::Stuck(format!(
            "holonomy has no common fixed point transverse to its translations (residual {residual:.3e})"
        ));
    }
    let k = null_space(&m, 1e-9);
    let xstar: Vec<f64> = x.iter().cloned().collect();
    let invariant = affine_set(n, &xstar, &k);
    let space = Space::Euclidean(n);
    let tie_p = Point::Euclidean(tie);
    let within = match invariant.intersect(c, &space) {
        Ok(s) => s,
        Err(e) => return Candidate::Stuck(e.to_string()),
    };
    let base = match within.project(&space, &tie_p) {
        Ok(p) => p,
        Err(_) => return Candidate::Stuck("initial set misses every invariant affine subspace".into()),
    };
    if w.is_empty() {
        return Candidate::Flat(Flat::Point(base));
    }
    let bv = base.coords().expect("Euclidean").to_vec();
    if k.len() > w.len() {
        // Part of W fixed by every linear part: directions the whole group drifts along.
        let wfix = drift_directions(n, gens, &w);
        if !wfix.is_empty() {
            let t0 = &translations[0];
            let mut eta = vec![0.0; n];
            for f in &wfix {
                let c0 = dot(f, t0);
                eta.iter_mut().zip(f).for_each(|(e, fi)| *e += c0 * fi);
            }
            let eta = normalized(&eta).unwrap_or_else(|| wfix[0].clone());
            if !contains_flat(&space, c, &bv, &k) {
                return Candidate::Stuck("initial set cuts the invariant affine subspace".into());
            }
            let anchor = dot(&eta, &bv);
            let neg: Vec<f64> = eta.iter().map(|x| -x).collect();
            let members: Members = Arc::new(move |beta: f64| {
                let h = HalfSpace::new(neg.clone(), -(anchor + beta))?;
                let cut = ConvexSet::Euclidean(EuclideanConvex { halfspaces: vec![h], balls: vec![] });
                invariant.intersect(&cut, &Space::Euclidean(n))
            });
            return Candidate::Escape {
                members,
                base,
                direction: BoundaryPoint::Euclidean(eta),
            };
        }
    }
    if !contains_flat(&space, c, &bv, &w) {
        return Candidate::Stuck("initial set cuts the invariant flat".into());
    }
    Candidate::Flat(Flat::Euclidean { base: bv, frame: w })
}

/// Vectors of W fixed by every linear part.
fn drift_directions(n: usize, gens: &[Affine], w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let b = DMatrix::from_fn(n, w.len(), |i, j| w[j][i]);
    let mut stacked = DMatrix::zeros(n * gens.len(), w.len());
    for (i, (a, _)) in gens.iter().enumerate() {
        let d = (a - DMatrix::identity(n, n)) * &b;
        stacked.view_mut((i * n, 0), (n, w.len())).copy_from(&d);
    }
    let coeffs = if gens.is_empty() { null_space(&DMatrix::zeros(0, w.len()), 1e-9) } else { null_space(&stacked, 1e-9) };
    let vs: Vec<Vec<f64>> = coeffs.iter().map(|c| (&b * DVector::from_column_slice(c)).iter().cloned().collect()).collect();
    span_basis(&vs, n, LINEAR_TOL)
}

/// {base + span(frame)} as equality constraints.
fn affine_set(n: usize, base: &[f64], frame: &[Vec<f64>]) -> ConvexSet {
    Flat::Euclidean {
        base: base.to_vec(),
        frame: frame.to_vec(),
    }
    .to_convex(&Space::Euclidean(n))
}

/// Sampled containment of base + span(frame) in c.
fn contains_flat(space: &Space, c: &ConvexSet, base: &[f64], frame: &[Vec<f64>]) -> bool {
    if matches!(c, ConvexSet::Universal) {
        return true;
    }
    frame.iter().all(|v| {
        [1.0, -1.0, 1e3, -1e3].iter().all(|s| {
            let p = Point::Euclidean(base.iter().zip(v).map(|(b, x)| b + s * x).collect());
            c.contains(space, &p, CONTAIN_TOL * (1.0 + norm(p.coords().expect("Euclidean"))))
        })
    })
}

/// Line trees: the 1D affine analysis in line coordinates.
fn line(space: &Space, t: &Tree, gens: &[&TreeIsometry], c: &ConvexSet) -> Candidate {
    let mut parts = Vec::new();
    for g in gens {
        match g.line_form() {
            Some((reflect, shift)) => parts.push((
                DMatrix::from_element(1, 1, if reflect { -1.0 } else { 1.0 }),
                DVector::from_element(1, shift),
            )),
            None => return Candidate::Stuck("line tree map without a line form".into()),
        }
    }
    let tie = tie_point(space);
    let x = match tie.tree_point().map(|p| t.line_coordinate(p)) {
        Some(Ok(x)) => x,
        _ => return Candidate::Stuck("no line coordinate for the tie-break point".into()),
    };
    match euclidean(1, &parts, &ConvexSet::Universal, vec![x]) {
        Candidate::Flat(Flat::Point(p)) => {
            let q = match t.line_point(p.coords().expect("Euclidean")[0]) {
                Ok(q) => Point::Tree(q),
                Err(e) => return Candidate::Stuck(e.to_string()),
            };
            match c.project(space, &q) {
                Ok(p) => Candidate::Flat(Flat::Point(p)),
                Err(e) => Candidate::Stuck(e.to_string()),
            }
        }
        Candidate::Flat(_) => {
            let whole = match c {
                ConvexSet::Universal => true,
                ConvexSet::Tree(tc) => *tc == TreeConvex::whole(t),
                _ => false,
            };
            if whole {
                Candidate::Flat(Flat::Line)
            } else {
                Candidate::Stuck("initial set cuts the invariant line".into())
            }
        }
        other => other,
    }
}

/// Fixed subtree of one automorphism.
fn fixed_subtree(t: &Tree, g: &TreeIsometry) -> Result<TreeConvex> {
    let TreeMap::Automorphism { vertices, edges, rays } = &g.map else {
        return Err(Error::Unsupported("line map on a tree that is not a line".into()));
    };
    let fixed_v: Vec<usize> = (0..vertices.len()).filter(|&v| vertices[v] == v).collect();
    let mut pieces = Vec::new();
    for (e, &(image, flip)) in edges.iter().enumerate() {
        if image == e {
            let len = t.edges()[e].length;
            pieces.push(if flip { (Segment::Edge(e), len / 2.0, len / 2.0) } else { (Segment::Edge(e), 0.0, len) });
        }
    }
    for (r, &image) in rays.iter().enumerate() {
        if image == r {
            pieces.push((Segment::Ray(r), 0.0, f64::INFINITY));
        }
    }
    TreeConvex::from_pieces(t, &fixed_v, &pieces)
}

fn automorphisms(space: &Space, t: &Tree, gens: &[&TreeIsometry], c: &ConvexSet) -> Candidate {
    let mut fix = ConvexSet::Tree(TreeConvex::whole(t));
    for g in gens {
        let f = match fixed_subtree(t, g) {
            Ok(f) => f,
            Err(e) => return Candidate::Stuck(e.to_string()),
        };
        fix = match fix.intersect(&ConvexSet::Tree(f), space) {
            Ok(s) => s,
            Err(e) => return Candidate::Stuck(e.to_string()),
        };
    }
    let within = match fix.intersect(c, space) {
        Ok(s) => s,
        Err(e) => return Candidate::Stuck(e.to_string()),
    };
    match within.project(space, &tie_point(space)) {
        Ok(p) => Candidate::Flat(Flat::Point(p)),
        Err(_) => Candidate::Stuck("no fixed point of the holonomy inside the initial set".into()),
    }
}

/// Sampled check that α(ω,ω') maps C_ω into C_ω' and back.
fn check_invariant_sets(scenario: &FieldScenario, c: &[ConvexSet]) -> Result<()> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(scenario.seed);
    for (e, edge) in scenario.edges.iter().enumerate() {
        for (src, dst, iso) in [(edge.from, edge.to, edge.iso.clone()), (edge.to, edge.from, edge.iso.inverse())] {
            let (xs, xd) = (&scenario.spaces[src], &scenario.spaces[dst]);
            for _ in 0..8 {
                let q = xs.random_point(&mut rng, 8.0);
                let Ok(p) = c[src].project(xs, &q) else { continue };
                let image = iso.map(&p);
                let gap = c[dst].distance_to(xd, &image)?;
                if gap > 1e-7 * (1.0 + xs.d(&xs.base_point(), &p)) {
                    return Err(Error::Precondition(format!(
                        "initial subfield is not invariant along {} (gap {gap:.3e})",
                        scenario.edge_label(e)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// The singleton set at a point, for callers that shrink to argmin points.
pub(crate) fn singleton(space: &Space, p: &Point) -> ConvexSet {
    point_set(space, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::scenario::{Generator, Tolerances};
    use std::f64::consts::PI;

    fn looped(space: Space, iso: Isometry) -> FieldScenario {
        FieldScenario::new(
            vec!["0".into()],
            vec![space],
            vec![Generator { pairs: vec![(0, 0, iso)] }],
            vec![None],
            Tolerances::default(),
            3,
        )
        .unwrap()
    }

    fn run(s: &FieldScenario) -> ClassMinimal {
        let c0 = vec![ConvexSet::Universal; s.len()];
        minimal_invariant_subfield(s, &c0, 16).unwrap().remove(0)
    }

    #[test]
    fn rotation_stabilizes_at_its_center() {
        let s = looped(Space::Euclidean(2), Isometry::rotation2(PI / 5.0, [2.0, -1.0]));
        let m = run(&s);
        let Minimal::Stabilized(Flat::Point(Point::Euclidean(p))) = m.outcome else { panic!("{:?}", m.trace) };
        assert!((p[0] - 2.0).abs() < 1e-9 && (p[1] + 1.0).abs() < 1e-9);
        assert!(m.rounds <= 3);
    }

    #[test]
    fn translation_escapes_along_itself() {
        let s = looped(Space::Euclidean(2), Isometry::translation(&[1.0, 0.0]));
        let Minimal::Escape { direction, .. } = run(&s).outcome else { panic!() };
        assert_eq!(direction, BoundaryPoint::Euclidean(vec![1.0, 0.0]));
    }

    #[test]
    fn screw_stabilizes_on_its_axis() {
        let mut screw = Isometry::rotation3(PI / 2.0, [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]).unwrap();
        if let Isometry::Euclidean { translation, .. } = &mut screw {
            translation[2] = 1.0;
        }
        let s = looped(Space::Euclidean(3), screw);
        let m = run(&s);
        let Minimal::Stabilized(Flat::Euclidean { base, frame }) = m.outcome else { panic!("{:?}", m.trace) };
        assert_eq!(frame.len(), 1);
        assert!(base[0].abs() < 1e-9 && base[1].abs() < 1e-9);
        assert!((frame[0][2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_holonomy_picks_the_probe_circumcenter() {
        let s = FieldScenario::new(vec!["0".into()], vec![Space::Euclidean(2)], vec![], vec![None], Tolerances::default(), 0).unwrap();
        let Minimal::Stabilized(Flat::Point(Point::Euclidean(p))) = run(&s).outcome else { panic!() };
        assert!((p[0] - 0.5).abs() < 1e-9 && (p[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn tripod_swap_fixes_the_center() {
        let t = Arc::new(Tree::tripod());
        let swap = TreeIsometry::automorphism(t.clone(), t.clone(), vec![0], vec![], vec![0, 2, 1]).unwrap();
        let s = looped(Space::Tree(t), Isometry::Tree(swap));
        let Minimal::Stabilized(Flat::Point(p)) = run(&s).outcome else { panic!() };
        assert_eq!(p, Point::Tree(TreePoint::Vertex(0)));
    }

    #[test]
    fn line_translation_keeps_the_line() {
        let t = Arc::new(Tree::line());
        let shift = TreeIsometry::line(t.clone(), t.clone(), false, 1.0).unwrap();
        let s = looped(Space::Tree(t), Isometry::Tree(shift));
        assert!(matches!(run(&s).outcome, Minimal::Stabilized(Flat::Line)));
    }

    #[test]
    fn non_invariant_initial_set_is_rejected() {
        let s = looped(Space::Euclidean(2), Isometry::translation(&[1.0, 0.0]));
        let c0 = vec![ConvexSet::halfspace(vec![1.0, 0.0], 0.0).unwrap()];
        assert!(matches!(minimal_invariant_subfield(&s, &c0, 16), Err(Error::Precondition(_))));
    }
}
