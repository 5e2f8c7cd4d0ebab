//! Finite bases with an equivalence-relation action: classes, spanning trees, holonomy.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::measure::Measure;
use crate::error::{argument, Error, Result};
use crate::spaces::{Isometry, Point, Space};

/// Numerical thresholds for the field analyzer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub metric: f64,
    pub angular: f64,
    /// Residual below which a section counts as invariant.
    pub invariance: f64,
    pub defect: f64,
    pub r_max: f64,
    pub depth: usize,
    pub max_orbit: usize,
    pub rounds: usize,
    pub horizon: f64,
    pub search_radius: f64,
    pub point_certificate: f64,
    pub boundary_certificate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            metric: 1e-9,
            angular: 1e-6,
            invariance: 1e-7,
            defect: 1e-6,
            r_max: 8.0,
            depth: 8,
            max_orbit: 64,
            rounds: 16,
            horizon: 1e6,
            search_radius: 1e4,
            point_certificate: 1e-6,
            boundary_certificate: 1e-5,
        }
    }
}

impl Tolerances {
    /// Overrides one field by name, as in `--tolerance metric=1e-10`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let real = || -> Result<f64> {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| argument(format!("tolerance {key} needs a positive number, got {value:?}")))
        };
        let count = || -> Result<usize> {
            value
                .parse::<usize>()
                .map_err(|_| argument(format!("tolerance {key} needs a non-negative integer, got {value:?}")))
        };
        match key {
            "metric" => self.metric = real()?,
            "angular" => self.angular = real()?,
            "invariance" => self.invariance = real()?,
            "defect" => self.defect = real()?,
            "r_max" => self.r_max = real()?,
            "depth" => self.depth = count()?,
            "max_orbit" => self.max_orbit = count()?,
            "rounds" => self.rounds = count()?,
            "horizon" => self.horizon = real()?,
            "search_radius" => self.search_radius = real()?,
            "point_certificate" => self.point_certificate = real()?,
            "boundary_certificate" => self.boundary_certificate = real()?,
            _ => return Err(argument(format!("unknown tolerance {key:?}"))),
        }
        Ok(())
    }
}

/// One pair (ω -> ω') of a generator together with its isometry X_ω -> X_ω'.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldEdge {
    pub generator: usize,
    pub from: usize,
    pub to: usize,
    pub iso: Isometry,
}

/// A generator of the relation: a partial bijection of omega with isometries along it.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub pairs: Vec<(usize, usize, Isometry)>,
}

#[derive(Debug, Clone)]
pub struct FieldScenario {
    pub ids: Vec<String>,
    pub spaces: Vec<Space>,
    pub edges: Vec<FieldEdge>,
    /// Scenario-supplied boundary probabilities, by ω.
    pub measures: Vec<Option<Measure>>,
    pub tolerances: Tolerances,
    pub seed: u64,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    /// Composite of spanning-tree isometries from the class root to ω.
    from_root: Vec<Isometry>,
    in_tree: Vec<bool>,
}

const ISOMETRY_PROBES: usize = 12;

impl FieldScenario {
    /// Validates the generators, closes the relation up and builds spanning trees.
    pub fn new(
        ids: Vec<String>,
        spaces: Vec<Space>,
        generators: Vec<Generator>,
        measures: Vec<Option<Measure>>,
        tolerances: Tolerances,
        seed: u64,
    ) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(argument("omega must not be empty"));
        }
        if spaces.len() != n || measures.len() != n {
            return Err(argument("one space and one optional measure per id are required"));
        }
        let mut edges = Vec::new();
        for (g, gen) in generators.into_iter().enumerate() {
            let mut seen_from = vec![false; n];
            let mut seen_to = vec![false; n];
            for (from, to, iso) in gen.pairs {
                let context = || format!("generator {g} edge {}", edge_name(&ids, from, to));
                if from >= n || to >= n {
                    return Err(Error::Load { context: format!("generator {g}"), reason: "id out of range".into() });
                }
                if std::mem::replace(&mut seen_from[from], true) || std::mem::replace(&mut seen_to[to], true) {
                    return Err(Error::Load { context: context(), reason: "generator is not a partial bijection".into() });
                }
                check_edge(&spaces[from], &spaces[to], &iso, tolerances.metric, seed ^ (edges.len() as u64))
                    .map_err(|reason| Error::Load { context: context(), reason })?;
                edges.push(FieldEdge { generator: g, from, to, iso });
            }
        }
        for (w, m) in measures.iter().enumerate() {
            if let Some(m) = m {
                m.validate(&spaces[w]).map_err(|e| Error::Load {
                    context: format!("measure at {}", ids[w]),
                    reason: e.to_string(),
                })?;
            }
        }
        let mut s = FieldScenario {
            ids,
            spaces,
            edges,
            measures,
            tolerances,
            seed,
            classes: Vec::new(),
            class_of: Vec::new(),
            from_root: Vec::new(),
            in_tree: Vec::new(),
        };
        s.build_classes();
        Ok(s)
    }

    fn build_classes(&mut self) {
        let n = self.ids.len();
        let mut adj: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); n];
        for (e, edge) in self.edges.iter().enumerate() {
            adj[edge.from].push((e, edge.to, true));
            adj[edge.to].push((e, edge.from, false));
        }
        let mut class_of = vec![usize::MAX; n];
        let mut from_root: Vec<Option<Isometry>> = vec![None; n];
        let mut in_tree = vec![false; self.edges.len()];
        let mut classes = Vec::new();
        for root in 0..n {
            if class_of[root] != usize::MAX {
                continue;
            }
            let c = classes.len();
            let mut members = vec![root];
            class_of[root] = c;
            from_root[root] = Some(Isometry::identity(&self.spaces[root]));
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for &(e, v, forward) in &adj[u] {
                    if class_of[v] != usize::MAX {
                        continue;
                    }
                    let step = if forward { self.edges[e].iso.clone() } else { self.edges[e].iso.inverse() };
                    let to_u = from_root[u].as_ref().expect("visited");
                    from_root[v] = Some(step.compose(to_u).expect("validated generator chains"));
                    class_of[v] = c;
                    in_tree[e] = true;
                    members.push(v);
                    queue.push_back(v);
                }
            }
            members.sort_unstable();
            classes.push(members);
        }
        self.classes = classes;
        self.class_of = class_of;
        self.from_root = from_root.into_iter().map(|i| i.expect("every id is reached")).collect();
        self.in_tree = in_tree;
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, w: usize) -> usize {
        self.class_of[w]
    }

    pub fn root(&self, w: usize) -> usize {
        self.classes[self.class_of[w]][0]
    }

    pub fn edge_label(&self, e: usize) -> String {
        let edge = &self.edges[e];
        format!("generator {} edge {}", edge.generator, edge_name(&self.ids, edge.from, edge.to))
    }

    /// Spanning-tree transport X_u -> X_v inside one class.
    pub fn transport(&self, u: usize, v: usize) -> Result<Isometry> {
        if self.class_of[u] != self.class_of[v] {
            return Err(argument(format!("{} and {} are not related", self.ids[u], self.ids[v])));
        }
        self.from_root[v].compose(&self.from_root[u].inverse())
    }

    /// Loop isometries of X_root for every generator edge outside the spanning tree.
    pub fn root_loops(&self, class: usize) -> Vec<Isometry> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(e, edge)| !self.in_tree[*e] && self.class_of[edge.from] == class)
            .map(|(_, edge)| {
                self.from_root[edge.to]
                    .inverse()
                    .compose(&edge.iso.compose(&self.from_root[edge.from]).expect("chains"))
                    .expect("chains")
            })
            .collect()
    }

    /// The sub-scenario on one class, with ids renumbered in class order.
    pub fn restrict(&self, class: usize) -> FieldScenario {
        let members = &self.classes[class];
        let index = |w: usize| members.binary_search(&w).expect("member");
        let edges: Vec<FieldEdge> = self
            .edges
            .iter()
            .filter(|e| self.class_of[e.from] == class)
            .map(|e| FieldEdge {
                generator: e.generator,
                from: index(e.from),
                to: index(e.to),
                iso: e.iso.clone(),
            })
            .collect();
        let mut s = FieldScenario {
            ids: members.iter().map(|&w| self.ids[w].clone()).collect(),
            spaces: members.iter().map(|&w| self.spaces[w].clone()).collect(),
            edges,
            measures: members.iter().map(|&w| self.measures[w].clone()).collect(),
            tolerances: self.tolerances.clone(),
            seed: self.seed,
            classes: Vec::new(),
            class_of: Vec::new(),
            from_root: Vec::new(),
            in_tree: Vec::new(),
        };
        s.build_classes();
        s
    }

    /// The same scenario with every metric multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<FieldScenario> {
        let spaces = self.spaces.iter().map(|s| s.scaled(factor)).collect::<Result<Vec<_>>>()?;
        let mut generators: Vec<Generator> = Vec::new();
        for e in &self.edges {
            while generators.len() <= e.generator {
                generators.push(Generator { pairs: Vec::new() });
            }
            generators[e.generator].pairs.push((e.from, e.to, e.iso.scaled(factor)?));
        }
        FieldScenario::new(
            self.ids.clone(),
            spaces,
            generators,
            self.measures.clone(),
            self.tolerances.clone(),
            self.seed,
        )
    }
}

/// Holonomy of the class of ω: one loop generator per independent cycle, conjugated to X_ω;
/// the identity alone for acyclic classes.
pub fn holonomy(scenario: &FieldScenario, w: usize) -> Vec<Isometry> {
    let class = scenario.class_of(w);
    let loops = scenario.root_loops(class);
    if loops.is_empty() {
        return vec![Isometry::identity(&scenario.spaces[w])];
    }
    let to_w = &scenario.from_root[w];
    let back = to_w.inverse();
    loops
        .iter()
        .map(|l| to_w.compose(&l.compose(&back).expect("chains")).expect("chains"))
        .collect()
}

fn edge_name(ids: &[String], from: usize, to: usize) -> String {
    let name = |w: usize| ids.get(w).cloned().unwrap_or_else(|| format!("#{w}"));
    format!("{} -> {}", name(from), name(to))
}

/// Kind agreement and sampled distance preservation.
fn check_edge(from: &Space, to: &Space, iso: &Isometry, tol: f64, seed: u64) -> std::result::Result<(), String> {
    if iso.domain() != *from {
        return Err(format!("isometry domain is not the {} space at the source", from.kind()));
    }
    if iso.codomain() != *to {
        return Err(format!("isometry codomain is not the {} space at the target", to.kind()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Point> = (0..ISOMETRY_PROBES).map(|_| from.random_point(&mut rng, 4.0)).collect();
    let distortion = iso.distortion(&samples);
    let scale = samples.iter().map(|p| from.d(p, &samples[0])).fold(1.0, f64::max);
    if distortion > tol * scale.max(1.0) * 10.0 {
        return Err(format!("not an isometry: sampled distance mismatch {distortion:.3e}"));
    }
    for p in &samples {
        to.validate(&iso.map(p)).map_err(|e| e.to_string())?;
    }
    Ok(())
}
