//! Numerical audit of the CAT(0) comparison inequality and the CN midpoint inequality.

use serde::Serialize;

use super::ComparisonTriangle;
use crate::spaces::{Point, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// d(z, q) <= d(z̄, q̄) for q on [x, y].
    Comparison,
    /// d(z, m)^2 <= (d(z, x)^2 + d(z, y)^2) / 2 - d(x, y)^2 / 4 at the midpoint m.
    Cn,
}

impl Inequality {
    pub fn label(self) -> &'static str {
        match self {
            Inequality::Comparison => "comparison",
            Inequality::Cn => "cn",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub triple: usize,
    pub kind: Inequality,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub max_comparison: f64,
    pub max_cn: f64,
    /// First triple attaining the overall maximum violation.
    pub worst: Option<usize>,
}

impl AuditReport {
    pub fn max_violation(&self) -> f64 {
        self.max_comparison.max(self.max_cn)
    }

    fn push(&mut self, triple: usize, kind: Inequality, violation: f64) {
        let slot = match kind {
            Inequality::Comparison => &mut self.max_comparison,
            Inequality::Cn => &mut self.max_cn,
        };
        *slot = slot.max(violation);
        let overall = self
            .worst
            .and_then(|w| self.rows.iter().filter(|r| r.triple == w).map(|r| r.violation).reduce(f64::max));
        if violation > overall.unwrap_or(0.0) {
            self.worst = Some(triple);
        }
        self.rows.push(AuditRow { triple, kind, violation });
    }
}

/// Raw distances for a geodesic triangle (apex z; base x, y) with a chosen midpoint m of [x, y].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceQuadruple {
    pub apex_left: f64,
    pub apex_right: f64,
    pub left_right: f64,
    pub apex_mid: f64,
}

const T_GRID: usize = 32;

fn stewart(zx: f64, zy: f64, xy: f64, t: f64) -> f64 {
    ((1.0 - t) * zx * zx + t * zy * zy - t * (1.0 - t) * xy * xy).max(0.0).sqrt()
}

fn cn_violation(zx: f64, zy: f64, xy: f64, zm: f64) -> f64 {
    (zm * zm - ((zx * zx + zy * zy) / 2.0 - xy * xy / 4.0)).max(0.0)
}

/// Audits each triple (x, y, z): z is the apex, [x, y] the base.
pub fn audit_cat0(space: &Space, triples: &[(Point, Point, Point)]) -> AuditReport {
    let mut report = AuditReport::default();
    for (i, (x, y, z)) in triples.iter().enumerate() {
        let xy = space.d(x, y);
        let zx = space.d(z, x);
        let zy = space.d(z, y);
        let mut worst: f64 = 0.0;
        for k in 0..=T_GRID {
            let t = k as f64 / T_GRID as f64;
            let q = space.geo(x, y, t);
            worst = worst.max((space.d(z, &q) - stewart(zx, zy, xy, t)).max(0.0));
        }
        report.push(i, Inequality::Comparison, worst);
        let m = space.geo(x, y, 0.5);
        report.push(i, Inequality::Cn, cn_violation(zx, zy, xy, space.d(z, &m)));
    }
    report
}

/// Audits raw distance data, for metric spaces that are not among the models.
pub fn audit_quadruples(quads: &[DistanceQuadruple]) -> AuditReport {
    let mut report = AuditReport::default();
    for (i, q) in quads.iter().enumerate() {
        let rhs = match ComparisonTriangle::new(q.left_right, q.apex_right, q.apex_left) {
            Ok(tri) => tri.apex_distance(0.5),
            Err(_) => stewart(q.apex_left, q.apex_right, q.left_right, 0.5),
        };
        report.push(i, Inequality::Comparison, (q.apex_mid - rhs).max(0.0));
        report.push(i, Inequality::Cn, cn_violation(q.apex_left, q.apex_right, q.left_right, q.apex_mid));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_quadruple_is_flagged() {
        // x = (1,1), y = (1,0), z = (0,1), m = (0,0) in the l1 plane; apex x.
        let q = DistanceQuadruple {
            apex_left: 1.0,
            apex_right: 1.0,
            left_right: 2.0,
            apex_mid: 2.0,
        };
        let r = audit_quadruples(&[q]);
        assert_eq!(r.max_cn, 4.0);
        assert!(r.max_comparison > 1.0);
        assert_eq!(r.worst, Some(0));
    }

    #[test]
    fn stewart_matches_triangle() {
        let tri = ComparisonTriangle::new(3.0, 2.5, 2.0).unwrap();
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert!((tri.apex_distance(t) - stewart(2.0, 2.5, 3.0, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn first_worst_triple_wins_ties() {
        let q = DistanceQuadruple {
            apex_left: 1.0,
            apex_right: 1.0,
            left_right: 2.0,
            apex_mid: 2.0,
        };
        let r = audit_quadruples(&[q, q]);
        assert_eq!(r.worst, Some(0));
    }
}
