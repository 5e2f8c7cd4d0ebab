//! The `cat0` command line: argument parsing, command dispatch and report emission.
//!
//! Every command reads a scenario document, prints a JSON report to stdout and, with
//! `--emit`, writes CSV tables and SVG plots into `--out`.

mod emit;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub use emit::{Plot, Table};

use crate::asymptotics::{euclidean_decomposition, flat_split, limit_set, limit_set_diameter_check};
use crate::boundary::{angle_n_trace, angular_circumcenter, boundary_grid, format_boundary, tits_angle, tits_angle_limit, BoundaryPoint};
use crate::document::{parse_scenario, AuditQuery, FlatSplitQuery, Overrides, ScenarioDocument};
use crate::error::{Error, Result};
use crate::fields::{dichotomy, edge_residuals, DichotomyOutcome, Flat, Section};
use crate::geometry::{audit_cat0, audit_quadruples, circumcenter, AuditReport};
use crate::spaces::Space;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCOMPLETE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "cat0", version, about = "Geometry of proper CAT(0) model spaces and their fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    AuditCat0,
    Project,
    Circumcenter,
    Tits,
    AngularCircumcenter,
    LimitSet,
    FlatSplit,
    Dichotomy,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit the CAT(0) comparison and CN inequalities.
    AuditCat0(Invocation),
    /// Project points onto convex sets.
    Project(Invocation),
    /// Metric circumcenters of finite point sets.
    Circumcenter(Invocation),
    /// Tits angles: closed form, ray limit and the ∠ⁿ trace.
    Tits(Invocation),
    /// Angular circumcenters of finite boundary sets.
    AngularCircumcenter(Invocation),
    /// Limit sets at infinity of nested convex families.
    LimitSet(Invocation),
    /// Flat, antipodal and perpendicular boundary points.
    FlatSplit(Invocation),
    /// Invariant boundary section or invariant flat, class by class.
    Dichotomy(Invocation),
}

impl Command {
    fn split(self) -> (CommandKind, Invocation) {
        match self {
            Command::AuditCat0(i) => (CommandKind::AuditCat0, i),
            Command::Project(i) => (CommandKind::Project, i),
            Command::Circumcenter(i) => (CommandKind::Circumcenter, i),
            Command::Tits(i) => (CommandKind::Tits, i),
            Command::AngularCircumcenter(i) => (CommandKind::AngularCircumcenter, i),
            Command::LimitSet(i) => (CommandKind::LimitSet, i),
            Command::FlatSplit(i) => (CommandKind::FlatSplit, i),
            Command::Dichotomy(i) => (CommandKind::Dichotomy, i),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Svg,
    Both,
}

#[derive(Debug, Args)]
pub struct Invocation {
    /// Scenario document (JSON).
    pub scenario: PathBuf,
    /// Write CSV tables, SVG plots (with the tables they draw) or both.
    #[arg(long, value_enum)]
    pub emit: Option<Emit>,
    /// Directory for emitted files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Override one tolerance, e.g. `--tolerance metric=1e-10`. Repeatable.
    #[arg(long = "tolerance", value_name = "K=V", value_parser = parse_key_value)]
    pub tolerances: Vec<(String, String)>,
    /// Seed for every sampled probe.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_key_value(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected K=V, got {s:?}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The analysis ran but could not certify an outcome, or no unique center exists.
    Incomplete,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub status: Status,
    pub body: Value,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => EXIT_OK,
            Status::Incomplete => EXIT_INCOMPLETE,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("report is valid JSON") + "\n"
    }

    /// Writes tables and plots as requested; returns the file names written.
    pub fn emit(&self, emit: Emit, dir: &Path) -> Result<Vec<String>> {
        let mut written = Vec::new();
        let plotted: Vec<&str> = self.plots.iter().map(|p| p.name.as_str()).collect();
        for t in &self.tables {
            // Plots are views of tables, so an SVG never ships without its table.
            let wanted = match emit {
                Emit::Csv | Emit::Both => true,
                Emit::Svg => plotted.contains(&t.name.as_str()),
            };
            if wanted {
                let name = format!("{}.csv", t.name);
                emit::write_file(dir, &name, &t.to_csv()?)?;
                written.push(name);
            }
        }
        if emit != Emit::Csv {
            for p in &self.plots {
                let name = format!("{}.svg", p.name);
                emit::write_file(dir, &name, &p.to_svg())?;
                written.push(name);
            }
        }
        Ok(written)
    }
}

/// Parses arguments, runs the command and prints the report; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (kind, inv) = cli.command.split();
    match run_invocation(kind, &inv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn run_invocation(kind: CommandKind, inv: &Invocation) -> Result<i32> {
    let overrides = Overrides {
        tolerances: inv.tolerances.clone(),
        seed: inv.seed,
    };
    let doc = parse_scenario(&inv.scenario, &overrides)?;
    let report = execute(kind, &doc)?;
    if let Some(emit) = inv.emit {
        for name in report.emit(emit, &inv.out)? {
            log::info!("wrote {}", inv.out.join(name).display());
        }
    }
    print!("{}", report.to_json());
    Ok(report.exit_code())
}

pub fn command_name(kind: CommandKind) -> &'static str {
    match kind {
        CommandKind::AuditCat0 => "audit-cat0",
        CommandKind::Project => "project",
        CommandKind::Circumcenter => "circumcenter",
        CommandKind::Tits => "tits",
        CommandKind::AngularCircumcenter => "angular-circumcenter",
        CommandKind::LimitSet => "limit-set",
        CommandKind::FlatSplit => "flat-split",
        CommandKind::Dichotomy => "dichotomy",
    }
}

pub fn parse_command_name(name: &str) -> Option<CommandKind> {
    use CommandKind::*;
    [AuditCat0, Project, Circumcenter, Tits, AngularCircumcenter, LimitSet, FlatSplit, Dichotomy]
        .into_iter()
        .find(|k| command_name(*k) == name)
}

/// Runs one command on a parsed document.
pub fn execute(kind: CommandKind, doc: &ScenarioDocument) -> Result<Report> {
    let mut r = Report {
        status: Status::Ok,
        body: Value::Null,
        tables: Vec::new(),
        plots: Vec::new(),
    };
    let results = match kind {
        CommandKind::AuditCat0 => audit(doc, &mut r)?,
        CommandKind::Project => project(doc, &mut r)?,
        CommandKind::Circumcenter => circumcenters(doc, &mut r)?,
        CommandKind::Tits => tits(doc, &mut r)?,
        CommandKind::AngularCircumcenter => angular(doc, &mut r)?,
        CommandKind::LimitSet => limits(doc, &mut r)?,
        CommandKind::FlatSplit => flats(doc, &mut r)?,
        CommandKind::Dichotomy => dichotomy_report(doc, &mut r)?,
    };
    r.body = json!({
        "command": command_name(kind),
        "seed": doc.scenario.seed,
        "status": match r.status { Status::Ok => "ok", Status::Incomplete => "incomplete" },
        "results": results,
        "tables": r.tables.iter().map(|t| format!("{}.csv", t.name)).collect::<Vec<_>>(),
    });
    Ok(r)
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn require<T>(items: &[T], command: &str) -> Result<()> {
    if items.is_empty() {
        return Err(Error::Argument(format!("the document has no queries.{command} entries")));
    }
    Ok(())
}

fn audit(doc: &ScenarioDocument, r: &mut Report) -> Result<Value> {
    let s = &doc.scenario;
    let default = [AuditQuery {
        at: 0,
        random: 1000,
        scale: 10.0,
        triples: Vec::new(),
        quadruples: Vec::new(),
    }];
    let queries = if doc.queries.audit.is_empty() { &default[..] } else { &doc.queries.audit[..] };
    let mut table = Table::new("audit", &["query", "source", "index", "inequality", "violation"]);
    let mut plot = Vec::new();
    let mut results = Vec::new();
    for (qi, q) in queries.iter().enumerate() {
        let space = &s.spaces[q.at];
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed.wrapping_add(qi as u64));
        let mut triples = q.triples.clone();
        for _ in 0..q.random {
            let x = space.random_point(&mut rng, q.scale);
            let y = space.random_point(&mut rng, q.scale);
            let z = space.random_point(&mut rng, q.scale);
            triples.push((x, y, z));
        }
        let mut summary = |source: &str, rep: &AuditReport| {
            for row in &rep.rows {
                table.push(vec![qi.to_string(), source.into(), row.triple.to_string(), row.kind.label().into(), num(row.violation)]);
            }
            json!({
                "query": qi,
                "source": source,
                "count": rep.rows.len() / 2,
                "max_comparison": rep.max_comparison,
                "max_cn": rep.max_cn,
                "worst": rep.worst,
            })
        };
        if !triples.is_empty() {
            let rep = audit_cat0(space, &triples);
            plot.push((format!("query {qi}"), rep.rows.iter().filter(|w| w.kind.label() == "cn").map(|w| (w.triple as f64, w.violation)).collect()));
            results.push(summary("triangles", &rep));
        }
        if !q.quadruples.is_empty() {
            results.push(summary("quadruples", &audit_quadruples(&q.quadruples)));
        }
    }
    r.plots.push(Plot {
        name: "audit".into(),
        title: "CN violation per triangle".into(),
        x_label: "triangle".into(),
        y_label: "violation".into(),
        log_x: false,
        series: plot,
    });
    r.tables.push(table);
    Ok(Value::Array(results))
}

fn project(doc: &ScenarioDocument, r: &mut Report) -> Result<Value> {
    require(&doc.queries.project, "project")?;
    let mut table = Table::new("projections", &["query", "point", "projection", "distance"]);
    let mut results = Vec::new();
    for (qi, q) in doc.queries.project.iter().enumerate() {
        let space = &doc.scenario.spaces[q.at];
        let p = q.set.project(space, &q.point)?;
        let d = space.d(&q.point, &p);
        table.push(vec![qi.to_string(), space.format_point(&q.point), space.format_point(&p), num(d)]);
        results.push(json!({"query": qi, "projection": space.format_point(&p), "distance": d}));
    }
    r.tables.push(table);
    Ok(Value::Array(results))
}

fn circumcenters(doc: &ScenarioDocument, r: &mut Report) -> Result<Value> {
    require(&doc.queries.circumcenter, "circumcenter")?;
    let mut table = Table::new("circumcenters", &["query", "center", "radius"]);
    let mut results = Vec::new();
    for (qi, q) in doc.queries.circumcenter.iter().enumerate() {
        let space = &doc.scenario.spaces[q.at];
        let (c, radius) = circumcenter(space, &q.points)?;
        table.push(vec![qi.to_string(), space.format_point(&c), num(radius)]);
        results.push(json!({"query": qi, "center": space.format_point(&c), "radius": radius}));
    }
    r.tables.push(table);
    Ok(Value::Array(results))
}

fn tits(doc: &ScenarioDocument, r: &mut Report) -> Result<Value> {
    require(&doc.queries.tits, "tits")?;
    let mut table = Table::new("tits", &["query", "xi", "eta", "closed_form", "ray_limit", "t_max"]);
    let mut trace_table = Table::new("angle_trace", &["query", "n", "angle"]);
    let mut series = Vec::new();
    let mut results = Vec::new();
    for (qi, q) in doc.queries.tits.iter().enumerate() {
        let space = &doc.scenario.spaces[q.at];
        let closed = tits_angle(space, &q.xi, &q.eta)?;
        let limit = tits_angle_limit(space, &q.xi, &q.eta, q.t_max)?;
        let (a, b) = (format_boundary(space, &q.xi), format_boundary(space, &q.eta));
        table.push(vec![qi.to_string(), a.clone(), b.clone(), num(closed), num(limit), num(q.t_max)]);
        let trace = if q.trace.is_empty() {
            Vec::new()
        } else {
            angle_n_trace(space, &q.base, &q.xi, &q.eta, &q.trace)?
        };
        for (n, v) in q.trace.iter().zip(&trace) {
            trace_table.push(vec![qi.to_string(), n.to_string(), num(*v)]);
        }
        if !trace.is_empty() {
            series.push((format!("query {qi}"), q.trace.iter().map(|n| *n as f64).zip(trace.iter().copied()).collect()));
        }
        results.push(json!({
            "query": qi, "xi": a, "eta": b, "closed_form": closed, "ray_limit": limit,
            "trace_last": trace.last(),
        }));
    }
    r.tables.push(table);
    if !trace_table.rows.is_empty() {
        r.tables.push(trace_table);
        r.plots.push(Plot {
            name: "angle_trace".into(),
            title: "comparison angle trace".into(),
            x_label: "n".into(),
            y_label: "angle".into(),
            log_x: true,
            series,
        });
    }
    Ok(Value::Array(results))
}

fn angular(doc: &ScenarioDocument, r: &mut Report) -> Result<Value> {
    require(&doc.queries.angular_circumcenter, "angular_circumcenter")?;
    let mut table = Table::new("angular_circumcenters", &["query", "center", "radius", "unique"]);
    let mut results = Vec::new();
    for (qi, q) in doc.queries.angular_circumcenter.iter().enumerate() {
        let space = &doc.scenario.spaces[q.at];
        match angular_circumcenter(space, &q.points) {
            Ok((c, radius)) => {
                let c = format_boundary(space, &c);
                table.push(vec![qi.to_string(), c.clone(), num(radius), "true".into()]);
                results.push(json!({"query": qi, "center": c, "radius": radius, "no_unique_center": false}));
            }
            Err(Error::NoUniqueCenter { radius }) => {
                r.status = Status::Incomplete;
                table.push(vec![qi.to_string(), String::new(), num(radius), "false".into()]);
                results.push(json!({"query": qi, "center": null, "radius": radius, "no_unique_center": true}));
            }
            Err(e) => return Err(e),
        }
    }
    r.tables.push(table);
    Ok(Value::Array(results))
}

fn limits(doc: &ScenarioDocument, r: &mut Report) -> Result<Value> {
    require(&doc.queries.limit_set, "limit_set")?;
    let horizon = doc.scenario.tolerances.horizon;
    let mut orbit_table = Table::new("projection_orbits", &["query", "name", "index", "point", "distance"]);
    let mut set_table = Table::new("limit_sets", &["query", "name", "point"]);
    let mut series = Vec::new();
    let mut results = Vec::new();
    for (qi, q) in doc.queries.limit_set.iter().enumerate() {
        let space = &doc.scenario.spaces[q.at];
        let orbit = q.family.projection_orbit(space, &q.base, horizon)?;
        for s in &orbit {
            orbit_table.push(vec![qi.to_string(), q.label.clone(), num(s.index), space.format_point(&s.point), num(s.distance)]);
        }
        series.push((q.label.clone(), orbit.iter().map(|s| (s.index, s.distance)).collect()));
        let set = limit_set(space, &q.family, &q.base, horizon)?;
        for xi in &set {
            set_table.push(vec![qi.to_string(), q.label.clone(), format_boundary(space, xi)]);
        }
        let diameter = limit_set_diameter_check(space, &set);
        let (center, radius) = match angular_circumcenter(space, &set) {
            Ok((c, radius)) => (Some(format_boundary(space, &c)), radius),
            Err(Error::NoUniqueCenter { radius }) => {
                r.status = Status::Incomplete;
                (None, radius)
            }
            Err(e) => return Err(e),
        };
        results.push(json!({
            "query": qi, "name": q.label,
            "limit_set": set.iter().map(|x| format_boundary(space, x)).collect::<Vec<_>>(),
            "diameter": diameter, "circumcenter": center, "radius": radius,
        }));
    }
    r.tables.push(orbit_table);
    r.tables.push(set_table);
    r.plots.push(Plot {
        name: "projection_orbits".into(),
        title: "distance of projections from the base point".into(),
        x_label: "index".into(),
        y_label: "distance".into(),
        log_x: true,
        series,
    });
    Ok(Value::Array(results))
}

fn flats(doc: &ScenarioDocument, r: &mut Report) -> Result<Value> {
    let s = &doc.scenario;
    let default = [FlatSplitQuery { at: 0, spacing: 0.25 }];
    let queries = if doc.queries.flat_split.is_empty() { &default[..] } else { &doc.queries.flat_split[..] };
    let mut table = Table::new("flat_split", &["query", "candidate", "point", "flat", "antipodal", "perpendicular"]);
    let mut defects = Table::new("defects", &["query", "candidate", "radius", "defect"]);
    let mut series = Vec::new();
    let mut results = Vec::new();
    for (qi, q) in queries.iter().enumerate() {
        let space = &s.spaces[q.at];
        let grid = boundary_grid(space, q.spacing);
        let (dim, y) = euclidean_decomposition(space);
        if grid.is_empty() {
            results.push(json!({"query": qi, "candidates": 0, "euclidean_dim": dim, "y_bounded": y.is_bounded()}));
            continue;
        }
        let split = flat_split(space, &grid, s.tolerances.r_max, s.tolerances.defect)?;
        let member = |set: &[BoundaryPoint], xi: &BoundaryPoint| set.contains(xi).to_string();
        for (i, xi) in grid.iter().enumerate() {
            table.push(vec![
                qi.to_string(),
                i.to_string(),
                format_boundary(space, xi),
                member(&split.flat, xi),
                member(&split.antipodal, xi),
                member(&split.perpendicular, xi),
            ]);
        }
        for row in &split.defects {
            defects.push(vec![qi.to_string(), row.candidate.to_string(), num(row.radius), num(row.defect)]);
        }
        for i in 0..grid.len().min(6) {
            let pts = split.defects.iter().filter(|d| d.candidate == i).map(|d| (d.radius, d.defect)).collect();
            series.push((format!("q{qi} candidate {i}"), pts));
        }
        let fmt = |v: &[BoundaryPoint]| v.iter().map(|x| format_boundary(space, x)).collect::<Vec<_>>();
        results.push(json!({
            "query": qi,
            "candidates": grid.len(),
            "flat": fmt(&split.flat),
            "antipodal": fmt(&split.antipodal),
            "perpendicular": fmt(&split.perpendicular),
            "p_empty_iff_a_equals_f": split.perpendicular.is_empty() == (split.antipodal.len() == split.flat.len()),
            "euclidean_dim": dim,
            "y_bounded": y.is_bounded(),
        }));
    }
    r.tables.push(table);
    r.tables.push(defects);
    r.plots.push(Plot {
        name: "defects".into(),
        title: "affinity defect of Busemann functions".into(),
        x_label: "radius".into(),
        y_label: "defect".into(),
        log_x: false,
        series,
    });
    Ok(Value::Array(results))
}

fn describe_flat(space: &Space, f: &Flat) -> Value {
    match f {
        Flat::Euclidean { base, frame } => json!({"description": f.describe(space), "base": base, "frame": frame}),
        _ => json!({"description": f.describe(space)}),
    }
}

fn dichotomy_report(doc: &ScenarioDocument, r: &mut Report) -> Result<Value> {
    let s = &doc.scenario;
    let reports = dichotomy(s)?;
    let mut outcome = Table::new("dichotomy", &["class", "id", "outcome", "dim", "value"]);
    let mut residuals = Table::new("residuals", &["class", "edge", "residual"]);
    let mut trace = Table::new("trace", &["class", "depth", "stage", "detail"]);
    let mut results = Vec::new();
    for (class, rep) in reports.iter().enumerate() {
        for t in &rep.trace {
            trace.push(vec![class.to_string(), t.depth.to_string(), t.stage.clone(), t.detail.clone()]);
        }
        let sub = s.restrict(class);
        let mut entry = json!({
            "class": class,
            "ids": rep.members.iter().map(|&w| s.ids[w].clone()).collect::<Vec<_>>(),
            "branches": rep.branches,
        });
        let section = match &rep.outcome {
            None => {
                r.status = Status::Incomplete;
                entry["outcome"] = json!("incomplete");
                entry["reason"] = json!(rep.incomplete);
                results.push(entry);
                continue;
            }
            Some(DichotomyOutcome::BoundarySection { section, residual }) => {
                for (k, &w) in rep.members.iter().enumerate() {
                    let v = format_boundary(&s.spaces[w], &section[k]);
                    outcome.push(vec![class.to_string(), s.ids[w].clone(), "boundary_section".into(), String::new(), v]);
                }
                entry["outcome"] = json!("boundary_section");
                entry["certificate"] = json!(residual);
                entry["section"] =
                    json!(rep.members.iter().zip(section).map(|(&w, xi)| format_boundary(&s.spaces[w], xi)).collect::<Vec<_>>());
                Section::Boundary(section.clone())
            }
            Some(DichotomyOutcome::InvariantFlat { flats, dim, residual }) => {
                for (k, &w) in rep.members.iter().enumerate() {
                    let v = flats[k].describe(&s.spaces[w]);
                    outcome.push(vec![class.to_string(), s.ids[w].clone(), "invariant_flat".into(), dim.to_string(), v]);
                }
                entry["outcome"] = json!("invariant_flat");
                entry["dim"] = json!(dim);
                entry["certificate"] = json!(residual);
                entry["flats"] = Value::Array(rep.members.iter().zip(flats).map(|(&w, f)| describe_flat(&s.spaces[w], f)).collect());
                Section::Flats(flats.clone())
            }
        };
        // Independent re-check of the certificate, edge by edge.
        let per_edge = edge_residuals(&sub, &section)?;
        for (e, res) in per_edge.iter().enumerate() {
            residuals.push(vec![class.to_string(), sub.edge_label(e), num(*res)]);
        }
        entry["recheck"] = json!(per_edge.iter().copied().fold(0.0, f64::max));
        results.push(entry);
    }
    r.tables.push(outcome);
    r.tables.push(residuals);
    r.tables.push(trace);
    Ok(Value::Array(results))
}
