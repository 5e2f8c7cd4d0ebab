//! Finitely supported probabilities on the boundary and their equivariant transport.

use super::scenario::{holonomy, FieldScenario};
use crate::boundary::{tits_unchecked, validate_boundary, BoundaryPoint};
use crate::error::{argument, Error, Result};
use crate::spaces::{Isometry, Space};

#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub atoms: Vec<(f64, BoundaryPoint)>,
}

impl Measure {
    pub fn new(atoms: Vec<(f64, BoundaryPoint)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(argument("a measure needs at least one atom"));
        }
        if atoms.iter().any(|(w, _)| !(*w > 0.0 && w.is_finite())) {
            return Err(argument("atom weights must be positive"));
        }
        let total: f64 = atoms.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(argument(format!("atom weights sum to {total}, not 1")));
        }
        Ok(Measure { atoms })
    }

    pub fn dirac(xi: BoundaryPoint) -> Self {
        Measure { atoms: vec![(1.0, xi)] }
    }

    pub fn uniform(points: Vec<BoundaryPoint>) -> Self {
        let w = 1.0 / points.len() as f64;
        Measure {
            atoms: points.into_iter().map(|p| (w, p)).collect(),
        }
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        for (_, xi) in &self.atoms {
            validate_boundary(space, xi)?;
        }
        Ok(())
    }

    pub fn push_forward(&self, iso: &Isometry) -> Result<Measure> {
        Ok(Measure {
            atoms: self
                .atoms
                .iter()
                .map(|(w, xi)| Ok((*w, iso.map_boundary(xi)?)))
                .collect::<Result<_>>()?,
        })
    }

    /// Angular mismatch to `other`: every atom must meet an atom of identical weight.
    /// Infinite when some atom has no partner.
    pub fn mismatch(&self, space: &Space, other: &Measure) -> f64 {
        if self.atoms.len() != other.atoms.len() {
            return f64::INFINITY;
        }
        let mut used = vec![false; other.atoms.len()];
        let mut worst: f64 = 0.0;
        for (w, xi) in &self.atoms {
            let best = other
                .atoms
                .iter()
                .enumerate()
                .filter(|(j, (v, _))| !used[*j] && v == w)
                .map(|(j, (_, eta))| (j, tits_unchecked(space, xi, eta)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((j, a)) => {
                    used[j] = true;
                    worst = worst.max(a);
                }
                None => return f64::INFINITY,
            }
        }
        worst
    }
}

/// Result of orbit averaging: uniform measures over the class of ω, or the orbit size
/// at which the search gave up.
#[derive(Debug, Clone, PartialEq)]
pub enum OrbitAverage {
    Measures(Vec<Option<Measure>>),
    Overflow { explored: usize },
}

const ORBIT_MERGE: f64 = 1e-6;

/// Uniform measure on the holonomy orbit of ξ at ω, pushed along the spanning tree.
pub fn orbit_average_measure(scenario: &FieldScenario, w: usize, xi: &BoundaryPoint, max_orbit: usize) -> Result<OrbitAverage> {
    if w >= scenario.len() {
        return Err(argument(format!("no id with index {w}")));
    }
    let space = &scenario.spaces[w];
    validate_boundary(space, xi)?;
    let gens = holonomy(scenario, w);
    let mut orbit = vec![xi.clone()];
    let mut frontier = 0;
    while frontier < orbit.len() {
        let current = orbit[frontier].clone();
        frontier += 1;
        for g in &gens {
            let image = g.map_boundary(&current)?;
            if orbit.iter().all(|o| tits_unchecked(space, o, &image) > ORBIT_MERGE) {
                if orbit.len() == max_orbit {
                    return Ok(OrbitAverage::Overflow { explored: orbit.len() + 1 });
                }
                orbit.push(image);
            }
        }
    }
    let at_w = Measure::uniform(orbit);
    let mut out = vec![None; scenario.len()];
    for &v in &scenario.classes()[scenario.class_of(w)] {
        out[v] = Some(at_w.push_forward(&scenario.transport(w, v)?)?);
    }
    Ok(OrbitAverage::Measures(out))
}

/// Completes the scenario-supplied measures over each class that has one, by transport
/// from the first supplied member; supplied values elsewhere must agree.
pub fn supplied_measures(scenario: &FieldScenario) -> Result<Vec<Option<Measure>>> {
    let mut out = vec![None; scenario.len()];
    for class in scenario.classes() {
        let Some(&src) = class.iter().find(|&&w| scenario.measures[w].is_some()) else {
            continue;
        };
        let mu = scenario.measures[src].as_ref().expect("found");
        for &v in class {
            let pushed = mu.push_forward(&scenario.transport(src, v)?)?;
            if let Some(given) = &scenario.measures[v] {
                let gap = pushed.mismatch(&scenario.spaces[v], given);
                if gap > ORBIT_MERGE {
                    return Err(Error::Precondition(format!(
                        "supplied measure at {} is not the transport of the one at {} (gap {gap:.3e})",
                        scenario.ids[v], scenario.ids[src]
                    )));
                }
            }
            out[v] = Some(pushed);
        }
    }
    Ok(out)
}

/// Largest pushforward mismatch over generator edges, with the worst edge.
pub fn measure_invariance(scenario: &FieldScenario, measures: &[Measure]) -> Result<(f64, Option<usize>)> {
    let mut worst = (0.0, None);
    for (e, edge) in scenario.edges.iter().enumerate() {
        let pushed = measures[edge.from].push_forward(&edge.iso)?;
        let gap = pushed.mismatch(&scenario.spaces[edge.to], &measures[edge.to]);
        if gap > worst.0 || (gap.is_infinite() && worst.1.is_none()) {
            worst = (gap, Some(e));
        }
    }
    Ok(worst)
}
