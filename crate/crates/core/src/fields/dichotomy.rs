//! The field dichotomy: every class carries either an invariant section of boundary points
//! or an invariant field of Euclidean flats.

use std::sync::Arc;

use serde::Serialize;

use super::measure::{orbit_average_measure, supplied_measures, Measure, OrbitAverage};
use super::minimal::{minimal_invariant_subfield, Minimal};
use super::quasi::{classify_inf, quasi_invariant_busemann_field, InfKind};
use super::scenario::FieldScenario;
use super::section::{check_invariant_section, transport_boundary, transport_flat, Flat, Section};
use crate::asymptotics::{euclidean_decomposition, flat_split, limit_circumcenter, FamilyIndex, NestedConvexFamily};
use crate::boundary::{angular_circumcenter, boundary_grid, BoundaryPoint};
use crate::error::{argument, Error, Result};
use crate::geometry::ConvexSet;
use crate::spaces::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Nested invariant sets escape to infinity.
    Escape,
    /// Circumcenter of the flat points perpendicular to the antipodal ones.
    PerpendicularCircumcenter,
    /// The minimal set splits as a Euclidean factor times a bounded space.
    EuclideanFactor,
    /// Limit of sublevel sets of the quasi-invariant Busemann field.
    BusemannSublevel,
    /// Recursion into the argmin of the quasi-invariant Busemann field.
    BusemannArgmin,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DichotomyOutcome {
    BoundarySection { section: Vec<BoundaryPoint>, residual: f64 },
    InvariantFlat { flats: Vec<Flat>, dim: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub depth: usize,
    pub stage: String,
    pub detail: String,
}

/// Outcome for one class. Sections are listed in the order of `members`.
#[derive(Debug, Clone)]
pub struct ClassReport {
    pub members: Vec<usize>,
    pub outcome: Option<DichotomyOutcome>,
    /// Why no certified outcome was reached.
    pub incomplete: Option<String>,
    /// Branches taken, outermost first.
    pub branches: Vec<Branch>,
    pub trace: Vec<TraceEntry>,
}

const GRID_SPACING: f64 = 0.25;
const INF_BUDGET: usize = 64;

#[derive(Default)]
struct Run {
    branches: Vec<Branch>,
    trace: Vec<TraceEntry>,
}

impl Run {
    fn note(&mut self, depth: usize, stage: &str, detail: impl Into<String>) {
        let detail = detail.into();
        log::debug!("depth {depth} {stage}: {detail}");
        self.trace.push(TraceEntry {
            depth,
            stage: stage.into(),
            detail,
        });
    }
}

type Finish = std::result::Result<DichotomyOutcome, String>;

/// Runs the dichotomy on every class of the scenario.
pub fn dichotomy(scenario: &FieldScenario) -> Result<Vec<ClassReport>> {
    let mut out = Vec::new();
    for (class, members) in scenario.classes().iter().enumerate() {
        let s = scenario.restrict(class);
        let c = vec![ConvexSet::Universal; s.len()];
        let mut run = Run::default();
        let finish = pipeline(&s, &c, 0, &mut run)?;
        out.push(report(members.clone(), finish, run));
    }
    Ok(out)
}

/// The Busemann branch on a single-class scenario, starting from the invariant convex
/// subfield `c` at recursion depth `depth`.
pub fn busemann_branch(scenario: &FieldScenario, c: &[ConvexSet], depth: usize) -> Result<ClassReport> {
    if scenario.classes().len() != 1 {
        return Err(argument("the Busemann branch runs on one class at a time"));
    }
    if c.len() != scenario.len() {
        return Err(argument(format!("{} convex sets for {} ids", c.len(), scenario.len())));
    }
    let mut run = Run::default();
    let finish = busemann(scenario, c, depth, &mut run)?;
    Ok(report(scenario.classes()[0].clone(), finish, run))
}

fn report(members: Vec<usize>, finish: Finish, run: Run) -> ClassReport {
    let (outcome, incomplete) = match finish {
        Ok(o) => (Some(o), None),
        Err(reason) => (None, Some(reason)),
    };
    ClassReport {
        members,
        outcome,
        incomplete,
        branches: run.branches,
        trace: run.trace,
    }
}

fn pipeline(s: &FieldScenario, c: &[ConvexSet], depth: usize, run: &mut Run) -> Result<Finish> {
    let tol = &s.tolerances;
    let minimal = minimal_invariant_subfield(s, c, tol.rounds)?.remove(0);
    for line in &minimal.trace {
        run.note(depth, "minimal", line.clone());
    }
    let root = minimal.root;
    let space = &s.spaces[root];
    match minimal.outcome {
        Minimal::Escape { family, base, direction } => {
            run.branches.push(Branch::Escape);
            run.note(depth, "escape", format!("drift toward {direction:?}"));
            let (xi, radius) = limit_circumcenter(space, &family, &base, tol.horizon)?;
            run.note(depth, "limit", format!("limit set circumradius {radius:.6}"));
            finish_boundary(s, root, &xi, depth, run)
        }
        Minimal::Indeterminate(reason) => {
            run.note(depth, "minimal", format!("no minimal flat ({reason}); trying Busemann functions"));
            busemann(s, c, depth, run)
        }
        Minimal::Stabilized(flat) => {
            let m = flat.intrinsic(space);
            let grid = boundary_grid(&m, GRID_SPACING);
            // A bounded flat has no boundary, so P is empty.
            let p = if grid.is_empty() {
                Vec::new()
            } else {
                let split = flat_split(&m, &grid, tol.r_max, tol.defect)?;
                // With no antipodal pairs every flat point is perpendicular to the empty set.
                if split.antipodal.is_empty() {
                    split.flat
                } else {
                    split.perpendicular
                }
            };
            run.note(
                depth,
                "flat-split",
                format!("minimal flat of dimension {}: {} grid points, {} in P", flat.dim(), grid.len(), p.len()),
            );
            if !p.is_empty() {
                run.branches.push(Branch::PerpendicularCircumcenter);
                let (center, radius) = angular_circumcenter(&m, &p)?;
                run.note(depth, "circumcenter", format!("angular circumradius {radius:.6}"));
                let xi = flat.boundary_to_ambient(space, &center)?;
                return finish_boundary(s, root, &xi, depth, run);
            }
            let (dim, y) = euclidean_decomposition(&m);
            if y.is_bounded() {
                run.branches.push(Branch::EuclideanFactor);
                run.note(depth, "decomposition", format!("Euclidean factor of dimension {dim}"));
                return finish_flat(s, root, &flat, dim, depth, run);
            }
            let c: Vec<ConvexSet> = transport_flat(s, root, &flat)?
                .iter()
                .zip(&s.spaces)
                .map(|(f, x)| f.as_ref().expect("one class").to_convex(x))
                .collect();
            busemann(s, &c, depth, run)
        }
    }
}

fn finish_boundary(s: &FieldScenario, root: usize, xi: &BoundaryPoint, depth: usize, run: &mut Run) -> Result<Finish> {
    let section: Vec<BoundaryPoint> = transport_boundary(s, root, xi)?.into_iter().map(|b| b.expect("one class")).collect();
    let section = Section::Boundary(section);
    let residual = check_invariant_section(s, &section)?;
    run.note(depth, "certificate", format!("boundary section residual {residual:e}"));
    let Section::Boundary(section) = section else { unreachable!() };
    if residual > s.tolerances.boundary_certificate {
        return Ok(Err(format!("boundary section residual {residual:e} above certificate")));
    }
    Ok(Ok(DichotomyOutcome::BoundarySection { section, residual }))
}

fn finish_flat(s: &FieldScenario, root: usize, flat: &Flat, dim: usize, depth: usize, run: &mut Run) -> Result<Finish> {
    let flats: Vec<Flat> = transport_flat(s, root, flat)?.into_iter().map(|f| f.expect("one class")).collect();
    let section = Section::Flats(flats);
    let residual = check_invariant_section(s, &section)?;
    run.note(depth, "certificate", format!("flat field residual {residual:e}"));
    let Section::Flats(flats) = section else { unreachable!() };
    if residual > s.tolerances.point_certificate {
        return Ok(Err(format!("flat field residual {residual:e} above certificate")));
    }
    Ok(Ok(DichotomyOutcome::InvariantFlat { flats, dim, residual }))
}

fn measures_for(s: &FieldScenario, run: &mut Run, depth: usize) -> Result<Option<Vec<Measure>>> {
    let supplied = supplied_measures(s)?;
    if supplied.iter().all(Option::is_some) {
        run.note(depth, "measure", "using the supplied measure field");
        return Ok(Some(supplied.into_iter().flatten().collect()));
    }
    let Some(xi) = boundary_grid(&s.spaces[0], GRID_SPACING).into_iter().next() else {
        return Ok(None);
    };
    match orbit_average_measure(s, 0, &xi, s.tolerances.max_orbit)? {
        OrbitAverage::Measures(m) => {
            run.note(depth, "measure", format!("orbit average with {} atoms", m[0].as_ref().map_or(0, |m| m.atoms.len())));
            Ok(Some(m.into_iter().flatten().collect()))
        }
        OrbitAverage::Overflow { explored } => {
            run.note(depth, "measure", format!("orbit exceeded {explored} points"));
            Ok(None)
        }
    }
}

fn busemann(s: &FieldScenario, c: &[ConvexSet], depth: usize, run: &mut Run) -> Result<Finish> {
    let tol = &s.tolerances;
    let Some(measures) = measures_for(s, run, depth)? else {
        return Ok(Err("no invariant measure obtainable".into()));
    };
    let x0: Vec<Point> = s.spaces.iter().map(|x| x.base_point()).collect();
    let field = match quasi_invariant_busemann_field(s, &measures, &x0) {
        Ok(f) => f,
        Err(Error::Precondition(reason)) => return Ok(Err(reason)),
        Err(e) => return Err(e),
    };
    let reports = classify_inf(&field, tol.search_radius, INF_BUDGET);
    let kinds: Vec<InfKind> = reports.iter().map(|r| r.kind).collect();
    run.note(depth, "infimum", format!("{kinds:?}"));
    if kinds.iter().all(|k| *k == InfKind::Attained) {
        run.branches.push(Branch::BusemannArgmin);
        if depth >= tol.depth {
            return Ok(Err(format!("recursion depth {depth} reached")));
        }
        let mut next = Vec::with_capacity(s.len());
        for ((r, cw), x) in reports.iter().zip(c).zip(&s.spaces) {
            let argmin = r.argmin.as_ref().ok_or_else(|| Error::Unsupported("attained minimum without argmin".into()))?;
            let set = argmin.intersect(cw, x)?;
            if set == ConvexSet::Empty {
                return Ok(Err("argmin misses the current subfield".into()));
            }
            next.push(set);
        }
        return pipeline(s, &next, depth + 1, run);
    }
    let root = &reports[0];
    let finite = match root.kind {
        InfKind::MinusInfinity => false,
        InfKind::FiniteUnattained => true,
        _ => return Ok(Err(format!("infimum classification inconclusive: {kinds:?}"))),
    };
    run.branches.push(Branch::BusemannSublevel);
    let space = s.spaces[0].clone();
    let f = field.functions[0].clone();
    let c0 = c[0].clone();
    let inf = root.infimum;
    let family = NestedConvexFamily::from_fn(FamilyIndex::Real, {
        let space = space.clone();
        move |beta| {
            let level = if finite { inf + 1.0 / beta } else { -beta };
            f.sublevel(&space, level)?.intersect(&c0, &space)
        }
    });
    let base = Arc::new(x0[0].clone());
    let (xi, radius) = limit_circumcenter(&space, &family, &base, tol.horizon)?;
    run.note(depth, "limit", format!("sublevel limit circumradius {radius:.6}"));
    finish_boundary(s, 0, &xi, depth, run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::scenario::{Generator, Tolerances};
    use crate::spaces::{Isometry, Space, Tree};

    fn scenario(spaces: Vec<Space>, generators: Vec<Generator>, measures: Vec<Option<Measure>>) -> FieldScenario {
        let ids = (0..spaces.len()).map(|i| i.to_string()).collect();
        FieldScenario::new(ids, spaces, generators, measures, Tolerances::default(), 1).unwrap()
    }

    fn flat(report: &ClassReport) -> (&[Flat], usize) {
        match report.outcome.as_ref().expect("complete") {
            DichotomyOutcome::InvariantFlat { flats, dim, .. } => (flats, *dim),
            o => panic!("unexpected {o:?}"),
        }
    }

    #[test]
    fn screw_leaves_its_axis() {
        let g = Isometry::rotation3(1.0, [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]).unwrap();
        let screw = Isometry::translation(&[0.0, 0.0, 1.0]).compose(&g).unwrap();
        let s = scenario(vec![Space::Euclidean(3)], vec![Generator { pairs: vec![(0, 0, screw)] }], vec![None]);
        let r = dichotomy(&s).unwrap();
        let (flats, dim) = flat(&r[0]);
        assert_eq!(dim, 1);
        let Flat::Euclidean { base, frame } = &flats[0] else { panic!() };
        assert!(base[0].abs() < 1e-9 && base[1].abs() < 1e-9);
        assert!((frame[0][2].abs() - 1.0).abs() < 1e-9);
        assert_eq!(r[0].branches, vec![Branch::EuclideanFactor]);
    }

    #[test]
    fn translation_fixes_its_direction() {
        let s = scenario(
            vec![Space::Euclidean(2)],
            vec![Generator { pairs: vec![(0, 0, Isometry::translation(&[2.0, 0.0]))] }],
            vec![None],
        );
        let r = dichotomy(&s).unwrap();
        let Some(DichotomyOutcome::BoundarySection { section, residual }) = &r[0].outcome else {
            panic!("{:?}", r[0])
        };
        let BoundaryPoint::Euclidean(v) = &section[0] else { panic!() };
        assert!((v[0] - 1.0).abs() < 1e-6 && v[1].abs() < 1e-6);
        assert!(*residual <= 1e-5);
        assert_eq!(r[0].branches, vec![Branch::Escape]);
    }

    fn tripod_swap() -> Isometry {
        let t = Arc::new(Tree::tripod());
        // Swap the rays b and c, fixing a and the center.
        Isometry::Tree(
            crate::spaces::TreeIsometry::automorphism(t.clone(), t, vec![0], Vec::new(), vec![0, 2, 1]).unwrap(),
        )
    }

    #[test]
    fn tripod_swap_fixes_the_center() {
        let s = scenario(vec![Space::tripod()], vec![Generator { pairs: vec![(0, 0, tripod_swap())] }], vec![None]);
        let r = dichotomy(&s).unwrap();
        let (flats, dim) = flat(&r[0]);
        assert_eq!(dim, 0);
        assert_eq!(flats[0], Flat::Point(Space::tripod().base_point()));
    }

    #[test]
    fn line_translation_keeps_the_line() {
        let t = Arc::new(Tree::line());
        let g = Isometry::Tree(crate::spaces::TreeIsometry::line(t.clone(), t, false, 1.5).unwrap());
        let s = scenario(vec![Space::line_tree(), Space::line_tree()], vec![Generator { pairs: vec![(0, 1, g.clone()), (1, 0, g)] }], vec![None, None]);
        let r = dichotomy(&s).unwrap();
        let (flats, dim) = flat(&r[0]);
        assert_eq!(dim, 1);
        assert!(flats.iter().all(|f| *f == Flat::Line));
    }

    #[test]
    fn tripod_measure_argmin_recurses_to_the_center() {
        let mu = Measure::new(vec![(0.5, BoundaryPoint::Tree(1)), (0.5, BoundaryPoint::Tree(2))]).unwrap();
        let s = scenario(vec![Space::tripod()], vec![Generator { pairs: vec![(0, 0, tripod_swap())] }], vec![Some(mu)]);
        let r = busemann_branch(&s, &[ConvexSet::Universal], 0).unwrap();
        assert_eq!(r.branches.first(), Some(&Branch::BusemannArgmin));
        let (flats, dim) = flat(&r);
        assert_eq!(dim, 0);
        assert_eq!(flats[0], Flat::Point(Space::tripod().base_point()));
    }

    #[test]
    fn dirac_field_goes_through_sublevels() {
        let mu = Measure::dirac(BoundaryPoint::Euclidean(vec![0.0, 1.0]));
        let s = scenario(
            vec![Space::Euclidean(2)],
            vec![Generator { pairs: vec![(0, 0, Isometry::translation(&[0.0, 1.0]))] }],
            vec![Some(mu)],
        );
        let r = busemann_branch(&s, &[ConvexSet::Universal], 0).unwrap();
        assert_eq!(r.branches, vec![Branch::BusemannSublevel]);
        let Some(DichotomyOutcome::BoundarySection { section, .. }) = &r.outcome else { panic!("{r:?}") };
        let BoundaryPoint::Euclidean(v) = &section[0] else { panic!() };
        assert!((v[1] - 1.0).abs() < 1e-6);
    }
}
