//! Quasi-invariant convex function fields built by integrating Busemann functions, and the
//! classification of their infima.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::measure::{measure_invariance, Measure};
use super::minimal::singleton;
use super::scenario::{FieldEdge, FieldScenario};
use crate::asymptotics::{BusemannSum, ConvexFunction};
use crate::error::{argument, Error, Result};
use crate::geometry::ConvexSet;
use crate::spaces::{Point, Space};

/// f_ω with f_ω ∘ α(ω', ω) = f_ω' + c(ω, ω'); `cocycle[e]` is c(from, to) for edge e.
#[derive(Debug, Clone)]
pub struct QuasiInvariantField {
    pub spaces: Vec<Space>,
    pub centers: Vec<Point>,
    pub functions: Vec<ConvexFunction>,
    pub edges: Vec<FieldEdge>,
    pub cocycle: Vec<f64>,
}

const EQUATION_SAMPLES: usize = 100;
const CONVEXITY_SAMPLES: usize = 20;
const SAMPLE_SCALE: f64 = 10.0;

impl QuasiInvariantField {
    /// A field without generator edges, for classifying hand-made functions.
    pub fn from_functions(spaces: Vec<Space>, centers: Vec<Point>, functions: Vec<ConvexFunction>) -> Result<Self> {
        if spaces.len() != centers.len() || spaces.len() != functions.len() {
            return Err(argument("one space, center and function per id are required"));
        }
        Ok(QuasiInvariantField {
            spaces,
            centers,
            functions,
            edges: Vec::new(),
            cocycle: Vec::new(),
        })
    }

    /// Largest |f_to(g·y) - f_from(y) + c(from, to)| over `samples` random y per edge.
    pub fn equation_residual(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for (e, edge) in self.edges.iter().enumerate() {
            let (xs, xt) = (&self.spaces[edge.from], &self.spaces[edge.to]);
            for _ in 0..samples {
                let y = xs.random_point(&mut rng, SAMPLE_SCALE);
                let lhs = self.functions[edge.to].eval(xt, &edge.iso.map(&y));
                let rhs = self.functions[edge.from].eval(xs, &y) - self.cocycle[e];
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    /// Largest |c(u, w) - c(u, v) - c(v, w)| over composable edge pairs u -> v -> w,
    /// with c(u, w) evaluated on the composite isometry.
    pub fn additivity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, e1) in self.edges.iter().enumerate() {
            for (j, e2) in self.edges.iter().enumerate() {
                if e1.to != e2.from {
                    continue;
                }
                let Ok(g) = e2.iso.compose(&e1.iso) else { continue };
                let direct = self.cocycle_value(e1.from, e2.to, &g);
                worst = worst.max((direct - self.cocycle[i] - self.cocycle[j]).abs());
            }
        }
        worst
    }

    fn cocycle_value(&self, from: usize, to: usize, g: &crate::spaces::Isometry) -> f64 {
        -self.functions[to].eval(&self.spaces[to], &g.map(&self.centers[from]))
    }
}

/// Integrates Busemann functions against an invariant measure field:
/// f_ω = Σ w b_{x⁰_ω, ξ}, with c(ω, ω') = -f_ω'(α(ω, ω') x⁰_ω).
pub fn quasi_invariant_busemann_field(scenario: &FieldScenario, measures: &[Measure], x0: &[Point]) -> Result<QuasiInvariantField> {
    if measures.len() != scenario.len() || x0.len() != scenario.len() {
        return Err(argument("one measure and one base point per id are required"));
    }
    for (w, (mu, p)) in measures.iter().zip(x0).enumerate() {
        mu.validate(&scenario.spaces[w])?;
        scenario.spaces[w].validate(p)?;
    }
    let tol = scenario.tolerances.invariance;
    let (gap, worst) = measure_invariance(scenario, measures)?;
    if gap > tol {
        let edge = worst.map(|e| scenario.edge_label(e)).unwrap_or_default();
        return Err(Error::Precondition(format!("measure field is not invariant along {edge} (gap {gap:.3e})")));
    }
    let functions: Vec<ConvexFunction> = measures
        .iter()
        .zip(x0)
        .map(|(mu, p)| {
            ConvexFunction::Busemann(BusemannSum {
                terms: mu.atoms.iter().map(|(w, xi)| (*w, p.clone(), xi.clone())).collect(),
                offset: 0.0,
            })
        })
        .collect();
    let mut field = QuasiInvariantField {
        spaces: scenario.spaces.clone(),
        centers: x0.to_vec(),
        functions,
        edges: scenario.edges.clone(),
        cocycle: Vec::new(),
    };
    field.cocycle = scenario
        .edges
        .iter()
        .map(|e| field.cocycle_value(e.from, e.to, &e.iso))
        .collect();
    let residual = field.equation_residual(EQUATION_SAMPLES, scenario.seed);
    if residual > tol * (1.0 + SAMPLE_SCALE) {
        return Err(Error::Precondition(format!("quasi-invariance residual {residual:.3e} above tolerance")));
    }
    check_convexity(&field, scenario.seed)?;
    Ok(field)
}

fn check_convexity(field: &QuasiInvariantField, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    for (w, f) in field.functions.iter().enumerate() {
        let x = &field.spaces[w];
        for _ in 0..CONVEXITY_SAMPLES {
            let p = x.random_point(&mut rng, SAMPLE_SCALE);
            let q = x.random_point(&mut rng, SAMPLE_SCALE);
            let mid = f.eval(x, &x.geo(&p, &q, 0.5));
            let chord = 0.5 * (f.eval(x, &p) + f.eval(x, &q));
            if mid > chord + 1e-9 * (1.0 + chord.abs()) {
                return Err(Error::Precondition(format!("function at id {w} fails the convexity sample")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InfKind {
    MinusInfinity,
    FiniteUnattained,
    Attained,
    Indeterminate,
}

#[derive(Debug, Clone)]
pub struct InfReport {
    pub kind: InfKind,
    /// (ball radius, minimum over the ball) for every radius tried.
    pub evidence: Vec<(f64, f64)>,
    pub infimum: f64,
    pub minimizer: Option<Point>,
    /// f⁻¹(min) when the minimum is attained.
    pub argmin: Option<ConvexSet>,
}

const STALL: f64 = 1e-8;

/// Minimizes f_ω over balls of doubling radius about x⁰_ω, at most `budget` doublings and
/// up to `search_radius`, and classifies the infimum from the decrease profile.
pub fn classify_inf(field: &QuasiInvariantField, search_radius: f64, budget: usize) -> Vec<InfReport> {
    (0..field.functions.len())
        .map(|w| classify_one(&field.spaces[w], &field.functions[w], &field.centers[w], search_radius, budget))
        .collect()
}

fn classify_one(space: &Space, f: &ConvexFunction, center: &Point, search_radius: f64, budget: usize) -> InfReport {
    let mut evidence: Vec<(f64, f64)> = Vec::new();
    let mut best: Option<Point> = None;
    let mut r = 1.0;
    let mut k = 0;
    while r <= search_radius && k < budget {
        match f.minimize_on_ball(space, center, r) {
            Ok((p, v)) => {
                evidence.push((r, v));
                best = Some(p);
            }
            Err(_) => break,
        }
        let n = evidence.len();
        if n >= 3 {
            let d0 = evidence[n - 3].1 - evidence[n - 2].1;
            let d1 = evidence[n - 2].1 - evidence[n - 1].1;
            let scale = 1.0 + evidence[n - 1].1.abs();
            if d0 < STALL * scale && d1 < STALL * scale {
                let value = evidence[n - 1].1;
                let argmin = match f {
                    ConvexFunction::Busemann(_) => f.sublevel(space, value + 1e-9 * scale).ok(),
                    ConvexFunction::Custom(_) => best.as_ref().map(|p| singleton(space, p)),
                };
                return InfReport {
                    kind: InfKind::Attained,
                    evidence,
                    infimum: value,
                    minimizer: best,
                    argmin,
                };
            }
        }
        r *= 2.0;
        k += 1;
    }
    let n = evidence.len();
    let last = evidence.last().map_or(f64::NAN, |e| e.1);
    let mut report = InfReport {
        kind: InfKind::Indeterminate,
        evidence: evidence.clone(),
        infimum: last,
        minimizer: best,
        argmin: None,
    };
    if n < 3 {
        return report;
    }
    let slope = |i: usize| (evidence[i].1 - evidence[i + 1].1) / (evidence[i + 1].0 - evidence[i].0);
    let (sa, sb) = (slope(n - 3), slope(n - 2));
    if sb > 1e-6 && sb >= 0.5 * sa {
        report.kind = InfKind::MinusInfinity;
        report.infimum = f64::NEG_INFINITY;
    } else if sb >= 0.0 && sa > 0.0 && sb < 0.5 * sa {
        report.kind = InfKind::FiniteUnattained;
        // Geometric tail of the remaining improvements.
        report.infimum = last - (evidence[n - 2].1 - last);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryPoint;
    use crate::fields::scenario::{Generator, Tolerances};
    use crate::spaces::Isometry;
    use std::sync::Arc;

    fn custom(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, dim: usize) -> QuasiInvariantField {
        QuasiInvariantField::from_functions(
            vec![Space::Euclidean(dim)],
            vec![Point::Euclidean(vec![0.0; dim])],
            vec![ConvexFunction::Custom(Arc::new(move |p: &Point| f(p.coords().unwrap())))],
        )
        .unwrap()
    }

    #[test]
    fn linear_decrease_is_minus_infinity() {
        let r = classify_inf(&custom(|x| -x[0], 2), 1e4, 64);
        assert_eq!(r[0].kind, InfKind::MinusInfinity);
    }

    #[test]
    fn norm_attains_at_origin() {
        let r = classify_inf(&custom(|x| (x[0] * x[0] + x[1] * x[1]).sqrt(), 2), 1e4, 64);
        assert_eq!(r[0].kind, InfKind::Attained);
        let Some(Point::Euclidean(p)) = &r[0].minimizer else { panic!() };
        assert!(p[0].hypot(p[1]) < 1e-6);
    }

    #[test]
    fn hyperbola_has_unattained_finite_infimum() {
        let r = classify_inf(&custom(|x| (x[0] * x[0] + 1.0).sqrt() + x[0], 1), 1e4, 64);
        assert_eq!(r[0].kind, InfKind::FiniteUnattained, "{:?}", r[0].evidence);
        assert!(r[0].infimum.abs() < 1e-3);
    }

    fn translation_scenario(measure: Measure) -> FieldScenario {
        FieldScenario::new(
            vec!["0".into(), "1".into()],
            vec![Space::Euclidean(2); 2],
            vec![Generator {
                pairs: vec![(0, 1, Isometry::translation(&[0.0, 0.0])), (1, 0, Isometry::translation(&[1.0, 0.0]))],
            }],
            vec![Some(measure), None],
            Tolerances::default(),
            5,
        )
        .unwrap()
    }

    #[test]
    fn dirac_field_is_quasi_invariant() {
        let s = translation_scenario(Measure::dirac(BoundaryPoint::Euclidean(vec![1.0, 0.0])));
        let mu = super::super::measure::supplied_measures(&s).unwrap().into_iter().map(|m| m.unwrap()).collect::<Vec<_>>();
        let x0 = vec![Point::Euclidean(vec![0.0, 0.0]); 2];
        let f = quasi_invariant_busemann_field(&s, &mu, &x0).unwrap();
        assert!(f.equation_residual(100, 9) < 1e-9);
        assert!(f.additivity_residual() < 1e-9);
        // f = -x1 and the edge 1 -> 0 translates by +1.
        assert!((f.cocycle[1] - 1.0).abs() < 1e-12);
        assert_eq!(classify_inf(&f, 1e4, 64)[0].kind, InfKind::MinusInfinity);
    }

    #[test]
    fn symmetric_measure_cancels() {
        let mu = Measure::new(vec![
            (0.5, BoundaryPoint::Euclidean(vec![1.0, 0.0])),
            (0.5, BoundaryPoint::Euclidean(vec![-1.0, 0.0])),
        ])
        .unwrap();
        let s = translation_scenario(mu);
        let mu = super::super::measure::supplied_measures(&s).unwrap().into_iter().map(|m| m.unwrap()).collect::<Vec<_>>();
        let x0 = vec![Point::Euclidean(vec![0.0, 0.0]); 2];
        let f = quasi_invariant_busemann_field(&s, &mu, &x0).unwrap();
        let p = Point::Euclidean(vec![3.0, -7.0]);
        assert!(f.functions[0].eval(&s.spaces[0], &p).abs() < 1e-9);
    }

    #[test]
    fn non_invariant_measure_is_rejected() {
        let s = FieldScenario::new(
            vec!["0".into()],
            vec![Space::Euclidean(2)],
            vec![Generator { pairs: vec![(0, 0, Isometry::rotation2(0.5, [0.0, 0.0]))] }],
            vec![None],
            Tolerances::default(),
            0,
        )
        .unwrap();
        let mu = vec![Measure::dirac(BoundaryPoint::Euclidean(vec![1.0, 0.0]))];
        let x0 = vec![Point::Euclidean(vec![0.0, 0.0])];
        assert!(matches!(quasi_invariant_busemann_field(&s, &mu, &x0), Err(Error::Precondition(_))));
    }
}
