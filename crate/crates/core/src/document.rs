//! The JSON scenario document: parsing of space, point, boundary, isometry, convex-set,
//! measure and family literals, and assembly into a [`FieldScenario`] plus query lists.
//!
//! Literals are interpreted against the space they live in, so the same JSON array can
//! be a Euclidean point or a product pair. Semantic errors name the key path.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde_json::{Map, Value};

use crate::asymptotics::{BusemannSum, ConvexFunction, FamilyIndex, NestedConvexFamily};
use crate::boundary::BoundaryPoint;
use crate::error::{Error, Result};
use crate::fields::{FieldScenario, Generator, Measure, Tolerances};
use crate::geometry::{ConvexSet, DistanceQuadruple, EuclideanBall, EuclideanConvex, HalfSpace, TreeConvex};
use crate::numeric::normalized;
use crate::spaces::{Edge, Isometry, Point, Ray, Segment, Space, Tree, TreeIsometry, TreePoint};

/// Overrides applied between parsing and validation, as given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tolerances: Vec<(String, String)>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct AuditQuery {
    pub at: usize,
    /// Random triangles drawn from the seeded generator.
    pub random: usize,
    pub scale: f64,
    pub triples: Vec<(Point, Point, Point)>,
    pub quadruples: Vec<DistanceQuadruple>,
}

#[derive(Debug, Clone)]
pub struct ProjectQuery {
    pub at: usize,
    pub set: ConvexSet,
    pub point: Point,
}

#[derive(Debug, Clone)]
pub struct PointsQuery {
    pub at: usize,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone)]
pub struct TitsQuery {
    pub at: usize,
    pub xi: BoundaryPoint,
    pub eta: BoundaryPoint,
    pub base: Point,
    pub t_max: f64,
    /// Values of n for the ∠ⁿ trace.
    pub trace: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct BoundaryQuery {
    pub at: usize,
    pub points: Vec<BoundaryPoint>,
}

#[derive(Debug, Clone)]
pub struct LimitQuery {
    pub at: usize,
    pub label: String,
    pub family: NestedConvexFamily,
    pub base: Point,
}

#[derive(Debug, Clone)]
pub struct FlatSplitQuery {
    pub at: usize,
    pub spacing: f64,
}

/// Inputs of the single-space commands. Missing sections fall back to command defaults.
#[derive(Debug, Clone, Default)]
pub struct Queries {
    pub audit: Vec<AuditQuery>,
    pub project: Vec<ProjectQuery>,
    pub circumcenter: Vec<PointsQuery>,
    pub tits: Vec<TitsQuery>,
    pub angular_circumcenter: Vec<BoundaryQuery>,
    pub limit_set: Vec<LimitQuery>,
    pub flat_split: Vec<FlatSplitQuery>,
}

#[derive(Debug, Clone)]
pub struct ScenarioDocument {
    pub scenario: FieldScenario,
    pub queries: Queries,
}

const TOP_KEYS: [&str; 8] = ["version", "omega", "spaces", "generators", "measures", "tolerances", "seed", "queries"];
const DEFAULT_SPACE_KEY: &str = "*";

fn load(path: &str, reason: impl Into<String>) -> Error {
    Error::Load {
        context: path.to_string(),
        reason: reason.into(),
    }
}

fn at(path: &str, key: impl std::fmt::Display) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn idx(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

/// Reads and parses a scenario file.
pub fn parse_scenario(path: &Path, overrides: &Overrides) -> Result<ScenarioDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| load(&path.display().to_string(), e.to_string()))?;
    parse_document(&text, overrides)
}

/// Parses a document and builds the scenario it describes.
pub fn load_scenario(text: &str) -> Result<FieldScenario> {
    Ok(parse_document(text, &Overrides::default())?.scenario)
}

pub fn parse_document(text: &str, overrides: &Overrides) -> Result<ScenarioDocument> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| load(&format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let obj = object(&root, "document")?;
    for key in obj.keys() {
        if !TOP_KEYS.contains(&key.as_str()) {
            return Err(load(key, "unknown key"));
        }
    }
    match obj.get("version") {
        Some(v) if v.as_u64() == Some(1) => {}
        Some(_) => return Err(load("version", "only version 1 is supported")),
        None => return Err(load("version", "missing")),
    }
    let ids = parse_omega(required(obj, "omega", "")?)?;
    let spaces = parse_spaces(required(obj, "spaces", "")?, &ids)?;
    let generators = match obj.get("generators") {
        Some(g) => parse_generators(g, &ids, &spaces)?,
        None => Vec::new(),
    };
    let measures = match obj.get("measures") {
        Some(m) => parse_measures(m, &ids, &spaces)?,
        None => vec![None; ids.len()],
    };
    let mut tolerances: Tolerances = match obj.get("tolerances") {
        Some(t) => serde_json::from_value(t.clone()).map_err(|e| load("tolerances", e.to_string()))?,
        None => Tolerances::default(),
    };
    for (k, v) in &overrides.tolerances {
        tolerances.set(k, v)?;
    }
    let seed = match (overrides.seed, obj.get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v.as_u64().ok_or_else(|| load("seed", "expected a non-negative integer"))?,
        (None, None) => 0,
    };
    let queries = match obj.get("queries") {
        Some(q) => parse_queries(q, &ids, &spaces)?,
        None => Queries::default(),
    };
    let scenario = FieldScenario::new(ids, spaces, generators, measures, tolerances, seed)?;
    Ok(ScenarioDocument { scenario, queries })
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| load(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| load(path, "expected an array"))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| load(path, "expected a finite number"))
}

fn uint(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| load(path, "expected a non-negative integer"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| load(path, "expected a string"))
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| load(&at(path, key), "missing"))
}

fn vector(v: &Value, path: &str) -> Result<Vec<f64>> {
    array(v, path)?.iter().enumerate().map(|(i, x)| number(x, &idx(path, i))).collect()
}

fn only_keys(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(load(&at(path, k), "unknown key")),
        None => Ok(()),
    }
}

/// Single-key object `{tag: body}`.
fn tagged<'a>(v: &'a Value, path: &str) -> Result<(&'a str, &'a Value)> {
    let obj = object(v, path)?;
    if obj.len() != 1 {
        return Err(load(path, "expected an object with exactly one key"));
    }
    let (k, body) = obj.iter().next().expect("one key");
    Ok((k.as_str(), body))
}

fn parse_omega(v: &Value) -> Result<Vec<String>> {
    let ids: Vec<String> = array(v, "omega")?
        .iter()
        .enumerate()
        .map(|(i, x)| match x {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) if n.is_u64() => Ok(n.to_string()),
            _ => Err(load(&idx("omega", i), "ids are strings or non-negative integers")),
        })
        .collect::<Result<_>>()?;
    if ids.is_empty() {
        return Err(load("omega", "must not be empty"));
    }
    for (i, id) in ids.iter().enumerate() {
        if id == DEFAULT_SPACE_KEY {
            return Err(load(&idx("omega", i), "\"*\" is reserved"));
        }
        if ids[..i].contains(id) {
            return Err(load(&idx("omega", i), format!("duplicate id {id:?}")));
        }
    }
    Ok(ids)
}

fn id_index(ids: &[String], v: &Value, path: &str) -> Result<usize> {
    let name = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_u64() => n.to_string(),
        _ => return Err(load(path, "expected an id")),
    };
    ids.iter().position(|i| *i == name).ok_or_else(|| load(path, format!("unknown id {name:?}")))
}

fn parse_spaces(v: &Value, ids: &[String]) -> Result<Vec<Space>> {
    let obj = object(v, "spaces")?;
    let mut by_id: BTreeMap<&str, Space> = BTreeMap::new();
    for (k, body) in obj {
        if k != DEFAULT_SPACE_KEY && !ids.contains(k) {
            return Err(load(&at("spaces", k), "unknown id"));
        }
        by_id.insert(k, parse_space(body, &at("spaces", k))?);
    }
    ids.iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .or_else(|| by_id.get(DEFAULT_SPACE_KEY))
                .cloned()
                .ok_or_else(|| load(&at("spaces", id), "no space given"))
        })
        .collect()
}

/// `{"euclidean": n}`, `{"tree": "tripod" | "line" | "half_line" | "point" | {...}}`,
/// `{"star": [names]}` or `{"product": [left, right]}`.
pub fn parse_space(v: &Value, path: &str) -> Result<Space> {
    let (tag, body) = tagged(v, path)?;
    let here = at(path, tag);
    match tag {
        "euclidean" => {
            let n = uint(body, &here)?;
            if n == 0 {
                return Err(load(&here, "dimension must be positive"));
            }
            Ok(Space::Euclidean(n))
        }
        "tree" => {
            let tree = match body {
                Value::String(s) => match s.as_str() {
                    "tripod" => Tree::tripod(),
                    "line" => Tree::line(),
                    "half_line" => Tree::half_line(),
                    "point" => Tree::point(),
                    other => return Err(load(&here, format!("unknown tree preset {other:?}"))),
                },
                _ => parse_tree(body, &here)?,
            };
            Ok(Space::tree(tree))
        }
        "star" => {
            let names: Vec<&str> = array(body, &here)?
                .iter()
                .enumerate()
                .map(|(i, x)| string(x, &idx(&here, i)))
                .collect::<Result<_>>()?;
            if names.is_empty() {
                return Err(load(&here, "a star needs at least one ray"));
            }
            Ok(Space::tree(Tree::star(&names)))
        }
        "product" => {
            let parts = array(body, &here)?;
            if parts.len() != 2 {
                return Err(load(&here, "a product has exactly two factors"));
            }
            Ok(Space::product(parse_space(&parts[0], &idx(&here, 0))?, parse_space(&parts[1], &idx(&here, 1))?))
        }
        other => Err(load(path, format!("unknown space kind {other:?}"))),
    }
}

fn parse_tree(v: &Value, path: &str) -> Result<Tree> {
    let obj = object(v, path)?;
    only_keys(obj, &["vertices", "edges", "rays"], path)?;
    let n = uint(required(obj, "vertices", path)?, &at(path, "vertices"))?;
    let mut edges = Vec::new();
    if let Some(e) = obj.get("edges") {
        let p = at(path, "edges");
        for (i, item) in array(e, &p)?.iter().enumerate() {
            let q = idx(&p, i);
            let t = array(item, &q)?;
            if t.len() != 3 {
                return Err(load(&q, "edges are [tail, head, length]"));
            }
            edges.push(Edge {
                tail: uint(&t[0], &q)?,
                head: uint(&t[1], &q)?,
                length: number(&t[2], &q)?,
            });
        }
    }
    let mut rays = Vec::new();
    if let Some(r) = obj.get("rays") {
        let p = at(path, "rays");
        for (i, item) in array(r, &p)?.iter().enumerate() {
            let q = idx(&p, i);
            rays.push(match item {
                Value::Number(_) => Ray { at: uint(item, &q)?, name: None },
                _ => {
                    let o = object(item, &q)?;
                    only_keys(o, &["at", "name"], &q)?;
                    Ray {
                        at: uint(required(o, "at", &q)?, &at(&q, "at"))?,
                        name: o.get("name").map(|s| string(s, &at(&q, "name")).map(str::to_string)).transpose()?,
                    }
                }
            });
        }
    }
    Tree::new(n, edges, rays).map_err(|e| load(path, e.to_string()))
}

fn ray_index(tree: &Tree, v: &Value, path: &str) -> Result<usize> {
    let r = match v {
        Value::String(s) => match tree.ray_by_name(s) {
            Some(r) => r,
            None => s
                .strip_prefix('r')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| load(path, format!("unknown ray {s:?}")))?,
        },
        _ => uint(v, path)?,
    };
    if r >= tree.rays().len() {
        return Err(load(path, format!("no ray {r}")));
    }
    Ok(r)
}

fn segment(tree: &Tree, v: &Value, path: &str) -> Result<Segment> {
    if let Some(s) = v.as_str() {
        if let Some(e) = s.strip_prefix('e').and_then(|d| d.parse::<usize>().ok()) {
            if e >= tree.edges().len() {
                return Err(load(path, format!("no edge {e}")));
            }
            return Ok(Segment::Edge(e));
        }
    }
    Ok(Segment::Ray(ray_index(tree, v, path)?))
}

/// Tree points: `"v3"`, `"o"` (vertex 0), `"e2@0.5"`, `"a@1"` (ray by name), `"r1@2"`,
/// or `{"vertex": 3}`, `{"edge": 2, "offset": 0.5}`, `{"ray": "a", "offset": 1}`.
fn tree_point(tree: &Tree, v: &Value, path: &str) -> Result<TreePoint> {
    let on = |seg: Segment, t: f64| tree.point_on(seg, t).map_err(|e| load(path, e.to_string()));
    match v {
        Value::String(s) => {
            if s == "o" && tree.ray_by_name("o").is_none() {
                return on_vertex(tree, 0, path);
            }
            if let Some((name, t)) = s.rsplit_once('@') {
                let t: f64 = t.parse().map_err(|_| load(path, format!("bad offset in {s:?}")))?;
                return on(segment(tree, &Value::String(name.to_string()), path)?, t);
            }
            match s.strip_prefix('v').and_then(|d| d.parse::<usize>().ok()) {
                Some(k) => on_vertex(tree, k, path),
                None => Err(load(path, format!("unrecognized tree point {s:?}"))),
            }
        }
        Value::Object(o) => {
            only_keys(o, &["vertex", "edge", "ray", "offset"], path)?;
            if let Some(k) = o.get("vertex") {
                return on_vertex(tree, uint(k, &at(path, "vertex"))?, path);
            }
            let offset = number(required(o, "offset", path)?, &at(path, "offset"))?;
            let seg = match (o.get("edge"), o.get("ray")) {
                (Some(e), None) => {
                    let e = uint(e, &at(path, "edge"))?;
                    if e >= tree.edges().len() {
                        return Err(load(path, format!("no edge {e}")));
                    }
                    Segment::Edge(e)
                }
                (None, Some(r)) => Segment::Ray(ray_index(tree, r, &at(path, "ray"))?),
                _ => return Err(load(path, "give exactly one of vertex, edge or ray")),
            };
            on(seg, offset)
        }
        _ => Err(load(path, "expected a tree point")),
    }
}

fn on_vertex(tree: &Tree, k: usize, path: &str) -> Result<TreePoint> {
    if k >= tree.vertex_count() {
        return Err(load(path, format!("no vertex {k}")));
    }
    Ok(TreePoint::Vertex(k))
}

/// A point of `space`: coordinates, a tree point, or a `[left, right]` pair.
pub fn parse_point(space: &Space, v: &Value, path: &str) -> Result<Point> {
    let p = match space {
        Space::Euclidean(n) => {
            let x = vector(v, path)?;
            if x.len() != *n {
                return Err(load(path, format!("expected {n} coordinates, got {}", x.len())));
            }
            Point::Euclidean(x)
        }
        Space::Tree(t) => Point::Tree(tree_point(t, v, path)?),
        Space::Product(l, r) => {
            let parts = array(v, path)?;
            if parts.len() != 2 {
                return Err(load(path, "a product point is [left, right]"));
            }
            Point::pair(parse_point(l, &parts[0], &idx(path, 0))?, parse_point(r, &parts[1], &idx(path, 1))?)
        }
    };
    space.validate(&p).map_err(|e| load(path, e.to_string()))?;
    Ok(p)
}

/// A boundary point: a nonzero direction (normalized on load), an end given by ray name
/// or index, or `{"theta": t, "left": ξ | null, "right": η | null}`; `{"left": ξ}` and
/// `{"right": η}` are the pure joins.
pub fn parse_boundary(space: &Space, v: &Value, path: &str) -> Result<BoundaryPoint> {
    match space {
        Space::Euclidean(n) => {
            let x = vector(v, path)?;
            if x.len() != *n {
                return Err(load(path, format!("expected {n} coordinates, got {}", x.len())));
            }
            BoundaryPoint::direction(&x).map_err(|e| load(path, e.to_string()))
        }
        Space::Tree(t) => {
            let name = match v.as_str() {
                Some(s) => Value::String(s.strip_prefix("end:").unwrap_or(s).to_string()),
                None => v.clone(),
            };
            let r = ray_index(t, &name, path)?;
            if r >= t.end_count() {
                return Err(load(path, format!("ray {r} is not an end")));
            }
            Ok(BoundaryPoint::Tree(r))
        }
        Space::Product(l, r) => {
            let obj = object(v, path)?;
            only_keys(obj, &["theta", "left", "right"], path)?;
            let side = |key: &str, s: &Space| -> Result<Option<BoundaryPoint>> {
                match obj.get(key) {
                    None | Some(Value::Null) => Ok(None),
                    Some(b) => parse_boundary(s, b, &at(path, key)).map(Some),
                }
            };
            let left = side("left", l)?;
            let right = side("right", r)?;
            let theta = match obj.get("theta") {
                Some(t) => number(t, &at(path, "theta"))?,
                None => match (&left, &right) {
                    (Some(_), None) => 0.0,
                    (None, Some(_)) => FRAC_PI_2,
                    _ => return Err(load(path, "theta is required when both sides are given")),
                },
            };
            BoundaryPoint::join(theta, left, right).map_err(|e| load(path, e.to_string()))
        }
    }
}

/// An isometry `from -> to`: `"identity"`; Euclidean `{"linear" | "rotation" (+ "axis"),
/// "center", "translation"}` meaning x -> A(x - c) + c + t; tree `{"line": {...}}` or
/// `{"vertices", "edges", "rays"}`; `{"product": [g, h]}`.
pub fn parse_isometry(from: &Space, to: &Space, v: &Value, path: &str) -> Result<Isometry> {
    if v.as_str() == Some("identity") {
        if from != to {
            return Err(load(path, "identity between different spaces"));
        }
        return Ok(Isometry::identity(from));
    }
    let obj = object(v, path)?;
    let iso = match (from, to) {
        (Space::Euclidean(n), Space::Euclidean(m)) if n == m => euclidean_isometry(*n, obj, path)?,
        (Space::Tree(a), Space::Tree(b)) => {
            if let Some(line) = obj.get("line") {
                only_keys(obj, &["line"], path)?;
                let p = at(path, "line");
                let o = object(line, &p)?;
                only_keys(o, &["reflect", "shift"], &p)?;
                let reflect = o.get("reflect").map(|r| r.as_bool().ok_or_else(|| load(&p, "reflect is a boolean"))).transpose()?;
                let shift = o.get("shift").map(|s| number(s, &at(&p, "shift"))).transpose()?;
                Isometry::Tree(
                    TreeIsometry::line(a.clone(), b.clone(), reflect.unwrap_or(false), shift.unwrap_or(0.0))
                        .map_err(|e| load(path, e.to_string()))?,
                )
            } else {
                only_keys(obj, &["vertices", "edges", "rays"], path)?;
                let vertices = match obj.get("vertices") {
                    Some(v) => array(v, &at(path, "vertices"))?
                        .iter()
                        .enumerate()
                        .map(|(i, x)| uint(x, &idx(&at(path, "vertices"), i)))
                        .collect::<Result<_>>()?,
                    None => (0..a.vertex_count()).collect(),
                };
                let mut edges = Vec::new();
                if let Some(e) = obj.get("edges") {
                    let p = at(path, "edges");
                    for (i, item) in array(e, &p)?.iter().enumerate() {
                        let q = idx(&p, i);
                        edges.push(match item {
                            Value::Number(_) => (uint(item, &q)?, false),
                            _ => {
                                let t = array(item, &q)?;
                                if t.len() != 2 {
                                    return Err(load(&q, "edge images are j or [j, flip]"));
                                }
                                (uint(&t[0], &q)?, t[1].as_bool().ok_or_else(|| load(&q, "flip is a boolean"))?)
                            }
                        });
                    }
                } else {
                    edges = (0..a.edges().len()).map(|e| (e, false)).collect();
                }
                let rays = match obj.get("rays") {
                    Some(r) => {
                        let p = at(path, "rays");
                        array(r, &p)?
                            .iter()
                            .enumerate()
                            .map(|(i, x)| ray_index(b, x, &idx(&p, i)))
                            .collect::<Result<_>>()?
                    }
                    None => (0..a.rays().len()).collect(),
                };
                Isometry::Tree(
                    TreeIsometry::automorphism(a.clone(), b.clone(), vertices, edges, rays).map_err(|e| load(path, e.to_string()))?,
                )
            }
        }
        (Space::Product(la, ra), Space::Product(lb, rb)) => {
            only_keys(obj, &["product"], path)?;
            let p = at(path, "product");
            let parts = array(required(obj, "product", path)?, &p)?;
            if parts.len() != 2 {
                return Err(load(&p, "a product isometry has two factors"));
            }
            Isometry::product(
                parse_isometry(la, lb, &parts[0], &idx(&p, 0))?,
                parse_isometry(ra, rb, &parts[1], &idx(&p, 1))?,
            )
        }
        _ => {
            return Err(load(
                path,
                format!("isometry between spaces of different kinds ({} -> {})", from.kind(), to.kind()),
            ))
        }
    };
    Ok(iso)
}

fn euclidean_isometry(n: usize, obj: &Map<String, Value>, path: &str) -> Result<Isometry> {
    only_keys(obj, &["linear", "rotation", "axis", "center", "translation"], path)?;
    let sized = |key: &str| -> Result<Option<Vec<f64>>> {
        obj.get(key)
            .map(|v| {
                let x = vector(v, &at(path, key))?;
                if x.len() != n {
                    return Err(load(&at(path, key), format!("expected {n} coordinates")));
                }
                Ok(x)
            })
            .transpose()
    };
    let center = sized("center")?.unwrap_or_else(|| vec![0.0; n]);
    let shift = sized("translation")?.unwrap_or_else(|| vec![0.0; n]);
    let linear = match (obj.get("linear"), obj.get("rotation")) {
        (Some(_), Some(_)) => return Err(load(path, "give linear or rotation, not both")),
        (Some(m), None) => {
            let p = at(path, "linear");
            let rows = array(m, &p)?;
            if rows.len() != n {
                return Err(load(&p, format!("expected {n} rows")));
            }
            let mut entries = Vec::with_capacity(n * n);
            for (i, row) in rows.iter().enumerate() {
                let r = vector(row, &idx(&p, i))?;
                if r.len() != n {
                    return Err(load(&idx(&p, i), format!("expected {n} entries")));
                }
                entries.extend(r);
            }
            DMatrix::from_row_slice(n, n, &entries)
        }
        (None, Some(a)) => {
            let angle = number(a, &at(path, "rotation"))?;
            let rot = match n {
                2 => Isometry::rotation2(angle, [0.0, 0.0]),
                3 => {
                    let axis = sized("axis")?.ok_or_else(|| load(&at(path, "axis"), "a rotation of R^3 needs an axis"))?;
                    Isometry::rotation3(angle, [axis[0], axis[1], axis[2]], [0.0; 3]).map_err(|e| load(path, e.to_string()))?
                }
                _ => return Err(load(path, "rotations are supported in dimensions 2 and 3")),
            };
            rot.euclidean_parts().expect("Euclidean").0.clone()
        }
        (None, None) => DMatrix::identity(n, n),
    };
    let c = DVector::from_column_slice(&center);
    let translation = &c - &linear * &c + DVector::from_column_slice(&shift);
    Isometry::euclidean(linear, translation).map_err(|e| load(path, e.to_string()))
}

fn parse_generators(v: &Value, ids: &[String], spaces: &[Space]) -> Result<Vec<Generator>> {
    let mut out = Vec::new();
    for (g, item) in array(v, "generators")?.iter().enumerate() {
        let p = idx("generators", g);
        let obj = object(item, &p)?;
        only_keys(obj, &["name", "iso", "pairs"], &p)?;
        let default_iso = obj.get("iso");
        let pp = at(&p, "pairs");
        let mut pairs = Vec::new();
        for (i, pair) in array(required(obj, "pairs", &p)?, &pp)?.iter().enumerate() {
            let q = idx(&pp, i);
            let (from, to, iso) = match pair {
                Value::Array(a) if a.len() == 2 => (&a[0], &a[1], None),
                Value::Object(o) => {
                    only_keys(o, &["from", "to", "iso"], &q)?;
                    (required(o, "from", &q)?, required(o, "to", &q)?, o.get("iso"))
                }
                _ => return Err(load(&q, "pairs are [from, to] or {from, to, iso}")),
            };
            let from = id_index(ids, from, &at(&q, "from"))?;
            let to = id_index(ids, to, &at(&q, "to"))?;
            let iso = iso
                .or(default_iso)
                .ok_or_else(|| load(&q, "no isometry for this pair and no generator default"))?;
            let iso = parse_isometry(&spaces[from], &spaces[to], iso, &at(&q, "iso")).map_err(|e| match e {
                Error::Load { context, reason } => Error::Load {
                    context: format!("generator {g} edge {} -> {} ({context})", ids[from], ids[to]),
                    reason,
                },
                e => e,
            })?;
            pairs.push((from, to, iso));
        }
        out.push(Generator { pairs });
    }
    Ok(out)
}

/// A measure: `[{"weight": w, "point": ξ}, ...]` with weights summing to one.
pub fn parse_measure(space: &Space, v: &Value, path: &str) -> Result<Measure> {
    let mut atoms = Vec::new();
    for (i, item) in array(v, path)?.iter().enumerate() {
        let q = idx(path, i);
        let o = object(item, &q)?;
        only_keys(o, &["weight", "point"], &q)?;
        atoms.push((
            number(required(o, "weight", &q)?, &at(&q, "weight"))?,
            parse_boundary(space, required(o, "point", &q)?, &at(&q, "point"))?,
        ));
    }
    Measure::new(atoms).map_err(|e| load(path, e.to_string()))
}

fn parse_measures(v: &Value, ids: &[String], spaces: &[Space]) -> Result<Vec<Option<Measure>>> {
    let mut out = vec![None; ids.len()];
    for (k, body) in object(v, "measures")? {
        let p = at("measures", k);
        let w = id_index(ids, &Value::String(k.clone()), &p)?;
        out[w] = Some(parse_measure(&spaces[w], body, &p)?);
    }
    Ok(out)
}

/// Convex sets: `"universal"`, `"empty"`, `{"ball": {"center", "radius"}}`,
/// `{"halfspaces": [{"normal", "offset"}], "balls": [...]}` meaning ⟨u, x⟩ ≤ c,
/// `{"span": [points]}`, `{"subtree": {"vertices", "pieces": [{"segment", "from", "to"}]}}`,
/// `{"product": [C, D]}`.
pub fn parse_convex(space: &Space, v: &Value, path: &str) -> Result<ConvexSet> {
    match v.as_str() {
        Some("universal") => return Ok(ConvexSet::Universal),
        Some("empty") => return Ok(ConvexSet::Empty),
        Some(other) => return Err(load(path, format!("unknown convex set {other:?}"))),
        None => {}
    }
    let obj = object(v, path)?;
    let fail = |e: Error| load(path, e.to_string());
    if let Some(b) = obj.get("ball") {
        only_keys(obj, &["ball"], path)?;
        let p = at(path, "ball");
        let (center, radius) = ball_literal(space, b, &p)?;
        return ConvexSet::ball(space, &center, radius).map_err(fail);
    }
    let set = match space {
        Space::Euclidean(n) => {
            only_keys(obj, &["halfspaces", "balls"], path)?;
            let mut halfspaces = Vec::new();
            if let Some(h) = obj.get("halfspaces") {
                let p = at(path, "halfspaces");
                for (i, item) in array(h, &p)?.iter().enumerate() {
                    let q = idx(&p, i);
                    let o = object(item, &q)?;
                    only_keys(o, &["normal", "offset"], &q)?;
                    let normal = vector(required(o, "normal", &q)?, &at(&q, "normal"))?;
                    if normal.len() != *n {
                        return Err(load(&q, format!("normal needs {n} coordinates")));
                    }
                    let offset = number(required(o, "offset", &q)?, &at(&q, "offset"))?;
                    halfspaces.push(HalfSpace::new(normal, offset).map_err(|e| load(&q, e.to_string()))?);
                }
            }
            let mut balls = Vec::new();
            if let Some(b) = obj.get("balls") {
                let p = at(path, "balls");
                for (i, item) in array(b, &p)?.iter().enumerate() {
                    let q = idx(&p, i);
                    let (center, radius) = ball_literal(space, item, &q)?;
                    balls.push(EuclideanBall {
                        center: center.coords().expect("Euclidean").to_vec(),
                        radius,
                    });
                }
            }
            ConvexSet::Euclidean(EuclideanConvex { halfspaces, balls })
        }
        Space::Tree(t) => {
            if let Some(s) = obj.get("span") {
                only_keys(obj, &["span"], path)?;
                let p = at(path, "span");
                let pts: Vec<TreePoint> = array(s, &p)?
                    .iter()
                    .enumerate()
                    .map(|(i, x)| tree_point(t, x, &idx(&p, i)))
                    .collect::<Result<_>>()?;
                if pts.is_empty() {
                    return Err(load(&p, "span of no points"));
                }
                ConvexSet::Tree(TreeConvex::span(t, &pts))
            } else {
                only_keys(obj, &["subtree"], path)?;
                let p = at(path, "subtree");
                let o = object(required(obj, "subtree", path)?, &p)?;
                only_keys(o, &["vertices", "pieces"], &p)?;
                let vertices: Vec<usize> = match o.get("vertices") {
                    Some(v) => array(v, &at(&p, "vertices"))?
                        .iter()
                        .enumerate()
                        .map(|(i, x)| uint(x, &idx(&at(&p, "vertices"), i)))
                        .collect::<Result<_>>()?,
                    None => Vec::new(),
                };
                let mut pieces = Vec::new();
                if let Some(ps) = o.get("pieces") {
                    let pp = at(&p, "pieces");
                    for (i, item) in array(ps, &pp)?.iter().enumerate() {
                        let q = idx(&pp, i);
                        let po = object(item, &q)?;
                        only_keys(po, &["segment", "from", "to"], &q)?;
                        let seg = segment(t, required(po, "segment", &q)?, &at(&q, "segment"))?;
                        let lo = po.get("from").map(|x| number(x, &at(&q, "from"))).transpose()?.unwrap_or(0.0);
                        let hi = match po.get("to") {
                            None | Some(Value::Null) => t.segment_length(seg),
                            Some(x) => number(x, &at(&q, "to"))?,
                        };
                        pieces.push((seg, lo, hi));
                    }
                }
                ConvexSet::Tree(TreeConvex::from_pieces(t, &vertices, &pieces).map_err(|e| load(&p, e.to_string()))?)
            }
        }
        Space::Product(l, r) => {
            only_keys(obj, &["product"], path)?;
            let p = at(path, "product");
            let parts = array(required(obj, "product", path)?, &p)?;
            if parts.len() != 2 {
                return Err(load(&p, "a product set has two factors"));
            }
            ConvexSet::product(parse_convex(l, &parts[0], &idx(&p, 0))?, parse_convex(r, &parts[1], &idx(&p, 1))?)
        }
    };
    set.check(space).map_err(fail)?;
    Ok(set)
}

fn ball_literal(space: &Space, v: &Value, path: &str) -> Result<(Point, f64)> {
    let o = object(v, path)?;
    only_keys(o, &["center", "radius"], path)?;
    let center = parse_point(space, required(o, "center", path)?, &at(path, "center"))?;
    let radius = number(required(o, "radius", path)?, &at(path, "radius"))?;
    if radius < 0.0 {
        return Err(load(&at(path, "radius"), "radius must be non-negative"));
    }
    Ok((center, radius))
}

/// Nested families indexed by β = 1, 2, 4, ...: `{"halfspace": {"direction": u}}` is
/// {⟨u, x⟩ ≥ β}; `{"corner": {"directions": [u, ...]}}` intersects those; `{"subtree":
/// {"end": e}}` is the part of the ray to e beyond offset β; `{"sublevel": {"measure",
/// "base"}}` is {Σ w b_{base, ξ} ≤ -β}; `{"list": [C_0, C_1, ...]}` is explicit.
pub fn parse_family(space: &Space, v: &Value, path: &str) -> Result<NestedConvexFamily> {
    let (tag, body) = tagged(v, path)?;
    let here = at(path, tag);
    let units = |dirs: Vec<Vec<f64>>, n: usize| -> Result<Vec<Vec<f64>>> {
        dirs.into_iter()
            .map(|d| {
                if d.len() != n {
                    return Err(load(&here, format!("directions need {n} coordinates")));
                }
                normalized(&d).ok_or_else(|| load(&here, "direction must be nonzero"))
            })
            .collect()
    };
    let corner = |dirs: Vec<Vec<f64>>| {
        move |beta: f64| -> Result<ConvexSet> {
            let halfspaces = dirs
                .iter()
                .map(|u| HalfSpace::new(u.iter().map(|x| -x).collect(), -beta))
                .collect::<Result<_>>()?;
            Ok(ConvexSet::Euclidean(EuclideanConvex { halfspaces, balls: Vec::new() }))
        }
    };
    match (tag, space) {
        ("halfspace", Space::Euclidean(n)) => {
            let o = object(body, &here)?;
            only_keys(o, &["direction"], &here)?;
            let u = units(vec![vector(required(o, "direction", &here)?, &at(&here, "direction"))?], *n)?;
            Ok(NestedConvexFamily::from_fn(FamilyIndex::Real, corner(u)))
        }
        ("corner", Space::Euclidean(n)) => {
            let o = object(body, &here)?;
            only_keys(o, &["directions"], &here)?;
            let p = at(&here, "directions");
            let dirs = array(required(o, "directions", &here)?, &p)?
                .iter()
                .enumerate()
                .map(|(i, x)| vector(x, &idx(&p, i)))
                .collect::<Result<Vec<_>>>()?;
            if dirs.is_empty() {
                return Err(load(&p, "at least one direction"));
            }
            Ok(NestedConvexFamily::from_fn(FamilyIndex::Real, corner(units(dirs, *n)?)))
        }
        ("subtree", Space::Tree(t)) => {
            let o = object(body, &here)?;
            only_keys(o, &["end"], &here)?;
            let BoundaryPoint::Tree(r) = parse_boundary(space, required(o, "end", &here)?, &at(&here, "end"))? else {
                unreachable!("tree boundary")
            };
            let t = t.clone();
            Ok(NestedConvexFamily::from_fn(FamilyIndex::Real, move |beta| {
                Ok(ConvexSet::Tree(TreeConvex::from_pieces(&t, &[], &[(Segment::Ray(r), beta, f64::INFINITY)])?))
            }))
        }
        ("sublevel", _) => {
            let o = object(body, &here)?;
            only_keys(o, &["measure", "base"], &here)?;
            let mu = parse_measure(space, required(o, "measure", &here)?, &at(&here, "measure"))?;
            let base = match o.get("base") {
                Some(b) => parse_point(space, b, &at(&here, "base"))?,
                None => space.base_point(),
            };
            let f = ConvexFunction::Busemann(BusemannSum {
                terms: mu.atoms.into_iter().map(|(w, xi)| (w, base.clone(), xi)).collect(),
                offset: 0.0,
            });
            let space = space.clone();
            Ok(NestedConvexFamily::from_fn(FamilyIndex::Real, move |beta| f.sublevel(&space, -beta)))
        }
        ("list", _) => {
            let sets = array(body, &here)?
                .iter()
                .enumerate()
                .map(|(i, x)| parse_convex(space, x, &idx(&here, i)))
                .collect::<Result<_>>()?;
            Ok(NestedConvexFamily::from_list(sets))
        }
        (other, _) => Err(load(path, format!("family {other:?} is not available on {}", space.kind()))),
    }
}

const QUERY_KEYS: [&str; 7] = ["audit", "project", "circumcenter", "tits", "angular_circumcenter", "limit_set", "flat_split"];

fn parse_queries(v: &Value, ids: &[String], spaces: &[Space]) -> Result<Queries> {
    let obj = object(v, "queries")?;
    only_keys(obj, &QUERY_KEYS, "queries")?;
    let mut q = Queries::default();
    let list = |key: &str| -> Result<Vec<(String, &Map<String, Value>, usize)>> {
        let Some(items) = obj.get(key) else { return Ok(Vec::new()) };
        let p = at("queries", key);
        array(items, &p)?
            .iter()
            .enumerate()
            .map(|(i, item)| {
                let path = idx(&p, i);
                let o = object(item, &path)?;
                let w = match o.get("at") {
                    Some(a) => id_index(ids, a, &at(&path, "at"))?,
                    None => 0,
                };
                Ok((path, o, w))
            })
            .collect()
    };
    for (path, o, w) in list("audit")? {
        only_keys(o, &["at", "random", "scale", "triples", "quadruples"], &path)?;
        let x = &spaces[w];
        let random = o.get("random").map(|r| uint(r, &at(&path, "random"))).transpose()?.unwrap_or(0);
        let scale = o.get("scale").map(|r| number(r, &at(&path, "scale"))).transpose()?.unwrap_or(10.0);
        let mut triples = Vec::new();
        if let Some(t) = o.get("triples") {
            let p = at(&path, "triples");
            for (i, item) in array(t, &p)?.iter().enumerate() {
                let tp = idx(&p, i);
                let pts = array(item, &tp)?;
                if pts.len() != 3 {
                    return Err(load(&tp, "a triple has three points [x, y, z]"));
                }
                triples.push((
                    parse_point(x, &pts[0], &idx(&tp, 0))?,
                    parse_point(x, &pts[1], &idx(&tp, 1))?,
                    parse_point(x, &pts[2], &idx(&tp, 2))?,
                ));
            }
        }
        let quadruples = match o.get("quadruples") {
            Some(qs) => serde_json::from_value(qs.clone()).map_err(|e| load(&at(&path, "quadruples"), e.to_string()))?,
            None => Vec::new(),
        };
        q.audit.push(AuditQuery { at: w, random, scale, triples, quadruples });
    }
    for (path, o, w) in list("project")? {
        only_keys(o, &["at", "set", "point"], &path)?;
        q.project.push(ProjectQuery {
            at: w,
            set: parse_convex(&spaces[w], required(o, "set", &path)?, &at(&path, "set"))?,
            point: parse_point(&spaces[w], required(o, "point", &path)?, &at(&path, "point"))?,
        });
    }
    for (path, o, w) in list("circumcenter")? {
        only_keys(o, &["at", "points"], &path)?;
        let p = at(&path, "points");
        let points = array(required(o, "points", &path)?, &p)?
            .iter()
            .enumerate()
            .map(|(i, x)| parse_point(&spaces[w], x, &idx(&p, i)))
            .collect::<Result<_>>()?;
        q.circumcenter.push(PointsQuery { at: w, points });
    }
    for (path, o, w) in list("tits")? {
        only_keys(o, &["at", "xi", "eta", "base", "t_max", "trace"], &path)?;
        let x = &spaces[w];
        let trace = match o.get("trace") {
            Some(t) => array(t, &at(&path, "trace"))?
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    n.as_u64()
                        .filter(|n| *n >= 1)
                        .ok_or_else(|| load(&idx(&at(&path, "trace"), i), "trace entries are integers n >= 1"))
                })
                .collect::<Result<_>>()?,
            None => Vec::new(),
        };
        q.tits.push(TitsQuery {
            at: w,
            xi: parse_boundary(x, required(o, "xi", &path)?, &at(&path, "xi"))?,
            eta: parse_boundary(x, required(o, "eta", &path)?, &at(&path, "eta"))?,
            base: match o.get("base") {
                Some(b) => parse_point(x, b, &at(&path, "base"))?,
                None => x.base_point(),
            },
            t_max: o.get("t_max").map(|t| number(t, &at(&path, "t_max"))).transpose()?.unwrap_or(1e6),
            trace,
        });
    }
    for (path, o, w) in list("angular_circumcenter")? {
        only_keys(o, &["at", "points"], &path)?;
        let p = at(&path, "points");
        let points = array(required(o, "points", &path)?, &p)?
            .iter()
            .enumerate()
            .map(|(i, x)| parse_boundary(&spaces[w], x, &idx(&p, i)))
            .collect::<Result<_>>()?;
        q.angular_circumcenter.push(BoundaryQuery { at: w, points });
    }
    for (path, o, w) in list("limit_set")? {
        only_keys(o, &["at", "name", "family", "base"], &path)?;
        let x = &spaces[w];
        let family_value = required(o, "family", &path)?;
        let label = match o.get("name") {
            Some(n) => string(n, &at(&path, "name"))?.to_string(),
            None => tagged(family_value, &at(&path, "family"))?.0.to_string(),
        };
        q.limit_set.push(LimitQuery {
            at: w,
            label,
            family: parse_family(x, family_value, &at(&path, "family"))?,
            base: match o.get("base") {
                Some(b) => parse_point(x, b, &at(&path, "base"))?,
                None => x.base_point(),
            },
        });
    }
    for (path, o, w) in list("flat_split")? {
        only_keys(o, &["at", "spacing"], &path)?;
        let spacing = o.get("spacing").map(|s| number(s, &at(&path, "spacing"))).transpose()?.unwrap_or(0.25);
        if spacing <= 0.0 {
            return Err(load(&at(&path, "spacing"), "spacing must be positive"));
        }
        q.flat_split.push(FlatSplitQuery { at: w, spacing });
    }
    Ok(q)
}
