//! Metric trees: a finite weighted tree with infinite rays attached at vertices.
//!
//! Points are stored canonically: a point sitting on a vertex is always
//! `TreePoint::Vertex`, and `Edge`/`Ray` offsets are strictly inside their segment.
//! That makes equality decidable and keeps every distance an exact sum of
//! edge lengths and offsets.

use crate::error::{argument, domain, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub at: usize,
    pub name: Option<String>,
}

/// A segment of the tree: a finite edge or an infinite ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    Edge(usize),
    Ray(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreePoint {
    Vertex(usize),
    Edge { edge: usize, offset: f64 },
    Ray { ray: usize, offset: f64 },
}

#[derive(Debug, Clone)]
struct LineInfo {
    /// Attach vertex of ray 0 (the negative end).
    start: usize,
    /// Total length of the finite part.
    length: f64,
    /// Edges along the finite part: (edge, coordinate of the edge start, forward orientation).
    pieces: Vec<(usize, f64, bool)>,
}

#[derive(Debug, Clone)]
pub struct Tree {
    vertex_count: usize,
    edges: Vec<Edge>,
    rays: Vec<Ray>,
    dist: Vec<f64>,
    next: Vec<Option<(usize, usize)>>,
    incident: Vec<Vec<Segment>>,
    line: Option<LineInfo>,
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count && self.edges == other.edges && self.rays == other.rays
    }
}

impl Tree {
    pub fn new(vertex_count: usize, edges: Vec<Edge>, rays: Vec<Ray>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(domain("tree needs at least one vertex"));
        }
        if edges.len() + 1 != vertex_count {
            return Err(domain(format!(
                "tree with {vertex_count} vertices needs {} edges, got {}",
                vertex_count - 1,
                edges.len()
            )));
        }
        let mut incident = vec![Vec::new(); vertex_count];
        for (i, e) in edges.iter().enumerate() {
            if e.tail >= vertex_count || e.head >= vertex_count || e.tail == e.head {
                return Err(domain(format!("edge {i} has invalid endpoints")));
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(domain(format!("edge {i} must have positive finite length")));
            }
            incident[e.tail].push(Segment::Edge(i));
            incident[e.head].push(Segment::Edge(i));
        }
        for (i, r) in rays.iter().enumerate() {
            if r.at >= vertex_count {
                return Err(domain(format!("ray {i} attached to unknown vertex {}", r.at)));
            }
            if let Some(name) = &r.name {
                if rays.iter().filter(|o| o.name.as_deref() == Some(name)).count() > 1 {
                    return Err(domain(format!("duplicate ray name {name}")));
                }
            }
            incident[r.at].push(Segment::Ray(i));
        }
        let n = vertex_count;
        let mut dist = vec![f64::INFINITY; n * n];
        let mut next = vec![None; n * n];
        for root in 0..n {
            // BFS from `root`; parent pointers give the first hop from any vertex back to root.
            dist[root * n + root] = 0.0;
            let mut queue = std::collections::VecDeque::from([root]);
            let mut seen = vec![false; n];
            seen[root] = true;
            while let Some(v) = queue.pop_front() {
                for seg in &incident[v] {
                    if let Segment::Edge(e) = *seg {
                        let edge = &edges[e];
                        let w = if edge.tail == v { edge.head } else { edge.tail };
                        if !seen[w] {
                            seen[w] = true;
                            dist[root * n + w] = dist[root * n + v] + edge.length;
                            next[w * n + root] = Some((v, e));
                            queue.push_back(w);
                        }
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(domain("tree graph is not connected"));
            }
        }
        let mut tree = Tree {
            vertex_count,
            edges,
            rays,
            dist,
            next,
            incident,
            line: None,
        };
        tree.line = tree.compute_line();
        Ok(tree)
    }

    /// Single vertex with three rays `a`, `b`, `c`.
    pub fn tripod() -> Self {
        Self::star(&["a", "b", "c"])
    }

    /// Single vertex with two rays `minus`, `plus`: a geodesic line.
    pub fn line() -> Self {
        Self::star(&["minus", "plus"])
    }

    pub fn half_line() -> Self {
        Self::star(&["end"])
    }

    /// The one-point space.
    pub fn point() -> Self {
        Self::new(1, Vec::new(), Vec::new()).expect("point tree is valid")
    }

    pub fn star(names: &[&str]) -> Self {
        let rays = names
            .iter()
            .map(|n| Ray {
                at: 0,
                name: Some((*n).to_string()),
            })
            .collect();
        Self::new(1, Vec::new(), rays).expect("star tree is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn segment_count(&self) -> usize {
        self.edges.len() + self.rays.len()
    }

    /// Segments enumerated as edges first, then rays.
    pub fn segment(&self, index: usize) -> Segment {
        if index < self.edges.len() {
            Segment::Edge(index)
        } else {
            Segment::Ray(index - self.edges.len())
        }
    }

    pub fn segment_index(&self, seg: Segment) -> usize {
        match seg {
            Segment::Edge(e) => e,
            Segment::Ray(r) => self.edges.len() + r,
        }
    }

    pub fn segment_length(&self, seg: Segment) -> f64 {
        match seg {
            Segment::Edge(e) => self.edges[e].length,
            Segment::Ray(_) => f64::INFINITY,
        }
    }

    /// Tail vertex (offset 0) and head vertex (offset = length) of a segment.
    pub fn segment_ends(&self, seg: Segment) -> (usize, Option<usize>) {
        match seg {
            Segment::Edge(e) => (self.edges[e].tail, Some(self.edges[e].head)),
            Segment::Ray(r) => (self.rays[r].at, None),
        }
    }

    pub fn incident(&self, v: usize) -> &[Segment] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn ray_by_name(&self, name: &str) -> Option<usize> {
        self.rays.iter().position(|r| r.name.as_deref() == Some(name))
    }

    pub fn ray_label(&self, r: usize) -> String {
        self.rays[r].name.clone().unwrap_or_else(|| r.to_string())
    }

    pub fn end_count(&self) -> usize {
        self.rays.len()
    }

    pub fn vertex_distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.vertex_count + b]
    }

    /// Canonical point at `offset` along `seg`.
    pub fn point_on(&self, seg: Segment, offset: f64) -> Result<TreePoint> {
        let len = self.segment_length(seg);
        if !offset.is_finite() || offset < 0.0 || offset > len {
            return Err(domain(format!("offset {offset} outside segment {seg:?}")));
        }
        let (tail, head) = self.segment_ends(seg);
        Ok(if offset == 0.0 {
            TreePoint::Vertex(tail)
        } else if offset == len {
            TreePoint::Vertex(head.expect("finite segment has a head"))
        } else {
            match seg {
                Segment::Edge(edge) => TreePoint::Edge { edge, offset },
                Segment::Ray(ray) => TreePoint::Ray { ray, offset },
            }
        })
    }

    /// Like `point_on`, clamping the offset into the segment first.
    pub(crate) fn point_on_clamped(&self, seg: Segment, offset: f64) -> TreePoint {
        let len = self.segment_length(seg);
        self.point_on(seg, offset.clamp(0.0, len))
            .expect("clamped offset is valid")
    }

    pub fn validate(&self, p: &TreePoint) -> Result<()> {
        match *p {
            TreePoint::Vertex(v) if v < self.vertex_count => Ok(()),
            TreePoint::Edge { edge, offset }
                if edge < self.edges.len() && offset > 0.0 && offset < self.edges[edge].length =>
            {
                Ok(())
            }
            TreePoint::Ray { ray, offset } if ray < self.rays.len() && offset > 0.0 && offset.is_finite() => {
                Ok(())
            }
            _ => Err(domain(format!("{p:?} is not a canonical point of this tree"))),
        }
    }

    /// Segment carrying the point and its offset; `None` for vertices.
    pub fn locate(&self, p: &TreePoint) -> Option<(Segment, f64)> {
        match *p {
            TreePoint::Vertex(_) => None,
            TreePoint::Edge { edge, offset } => Some((Segment::Edge(edge), offset)),
            TreePoint::Ray { ray, offset } => Some((Segment::Ray(ray), offset)),
        }
    }

    /// Offset of `p` along `seg` when `p` lies on the closed segment.
    pub fn offset_on(&self, seg: Segment, p: &TreePoint) -> Option<f64> {
        match (*p, self.locate(p)) {
            (TreePoint::Vertex(v), _) => {
                let (tail, head) = self.segment_ends(seg);
                if v == tail {
                    Some(0.0)
                } else if Some(v) == head {
                    Some(self.segment_length(seg))
                } else {
                    None
                }
            }
            (_, Some((s, o))) if s == seg => Some(o),
            _ => None,
        }
    }

    /// Vertices through which paths leave `p`, with the distance from `p` to each.
    fn anchors(&self, p: &TreePoint) -> ([(usize, f64); 2], usize) {
        match *p {
            TreePoint::Vertex(v) => ([(v, 0.0), (v, 0.0)], 1),
            TreePoint::Edge { edge, offset } => {
                let e = &self.edges[edge];
                ([(e.tail, offset), (e.head, e.length - offset)], 2)
            }
            TreePoint::Ray { ray, offset } => ([(self.rays[ray].at, offset), (0, 0.0)], 1),
        }
    }

    pub fn distance(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        if let (Some((sp, op)), Some((sq, oq))) = (self.locate(p), self.locate(q)) {
            if sp == sq {
                return (op - oq).abs();
            }
        }
        self.route(p, q).0
    }

    /// Shortest route between points on different segments: (length, exit anchor of p, entry anchor of q).
    fn route(&self, p: &TreePoint, q: &TreePoint) -> (f64, (usize, f64), (usize, f64)) {
        let (ap, np) = self.anchors(p);
        let (aq, nq) = self.anchors(q);
        let mut best = (f64::INFINITY, ap[0], aq[0]);
        for a in ap.iter().take(np) {
            for b in aq.iter().take(nq) {
                let d = a.1 + self.vertex_distance(a.0, b.0) + b.1;
                if d < best.0 {
                    best = (d, *a, *b);
                }
            }
        }
        best
    }

    /// Edges along the vertex path from `a` to `b`, each with the vertex it leads to.
    pub fn vertex_path(&self, a: usize, b: usize) -> Vec<(usize, usize)> {
        let n = self.vertex_count;
        let mut out = Vec::new();
        let mut v = a;
        while v != b {
            let (w, e) = self.next[v * n + b].expect("tree is connected");
            out.push((e, w));
            v = w;
        }
        out
    }

    /// Point at distance `tau` from vertex `from` along the edge `edge`.
    fn along_edge(&self, from: usize, edge: usize, tau: f64) -> TreePoint {
        let e = &self.edges[edge];
        let offset = if e.tail == from { tau } else { e.length - tau };
        self.point_on_clamped(Segment::Edge(edge), offset)
    }

    /// Point at distance `tau` from `p` moving toward its anchor vertex `v`.
    fn toward_anchor(&self, p: &TreePoint, v: usize, tau: f64) -> TreePoint {
        match *p {
            TreePoint::Vertex(_) => *p,
            TreePoint::Edge { edge, offset } => {
                let e = &self.edges[edge];
                let o = if e.tail == v { offset - tau } else { offset + tau };
                self.point_on_clamped(Segment::Edge(edge), o)
            }
            TreePoint::Ray { ray, offset } => self.point_on_clamped(Segment::Ray(ray), offset - tau),
        }
    }

    /// Point at distance `tau` from anchor vertex `v` moving toward `q`.
    fn from_anchor(&self, q: &TreePoint, v: usize, tau: f64) -> TreePoint {
        match *q {
            TreePoint::Vertex(_) => *q,
            TreePoint::Edge { edge, .. } => self.along_edge(v, edge, tau),
            TreePoint::Ray { ray, .. } => self.point_on_clamped(Segment::Ray(ray), tau),
        }
    }

    pub fn geodesic_point(&self, p: &TreePoint, q: &TreePoint, t: f64) -> TreePoint {
        if t <= 0.0 {
            return *p;
        }
        if t >= 1.0 {
            return *q;
        }
        if let (Some((sp, op)), Some((sq, oq))) = (self.locate(p), self.locate(q)) {
            if sp == sq {
                return self.point_on_clamped(sp, op + t * (oq - op));
            }
        }
        let (total, (va, da), (vb, db)) = self.route(p, q);
        let mut tau = t * total;
        if tau <= da {
            return self.toward_anchor(p, va, tau);
        }
        tau -= da;
        for (edge, w) in self.vertex_path(va, vb) {
            let len = self.edges[edge].length;
            if tau <= len {
                let from = if self.edges[edge].tail == w {
                    self.edges[edge].head
                } else {
                    self.edges[edge].tail
                };
                return self.along_edge(from, edge, tau);
            }
            tau -= len;
        }
        self.from_anchor(q, vb, tau.min(db))
    }

    /// Geodesic ray from `x` toward the end of ray `ray`, evaluated at arclength `t`.
    pub fn ray_point(&self, x: &TreePoint, ray: usize, t: f64) -> TreePoint {
        if let TreePoint::Ray { ray: r, offset } = *x {
            if r == ray {
                return self.point_on_clamped(Segment::Ray(ray), offset + t);
            }
        }
        let at = TreePoint::Vertex(self.rays[ray].at);
        let d0 = self.distance(x, &at);
        if t <= d0 {
            if d0 == 0.0 {
                return at;
            }
            return self.geodesic_point(x, &at, t / d0);
        }
        self.point_on_clamped(Segment::Ray(ray), t - d0)
    }

    /// Horofunction toward the end of `ray`: lim d(x, ray(T)) - T.
    pub fn horofunction(&self, ray: usize, x: &TreePoint) -> f64 {
        match *x {
            TreePoint::Ray { ray: r, offset } if r == ray => -offset,
            _ => self.distance(x, &TreePoint::Vertex(self.rays[ray].at)),
        }
    }

    pub fn is_line(&self) -> bool {
        self.line.is_some()
    }

    fn compute_line(&self) -> Option<LineInfo> {
        if self.rays.len() != 2 || (0..self.vertex_count).any(|v| self.degree(v) != 2) {
            return None;
        }
        let start = self.rays[0].at;
        let stop = self.rays[1].at;
        let mut pieces = Vec::new();
        let mut pos = 0.0;
        let mut v = start;
        for (edge, w) in self.vertex_path(start, stop) {
            let forward = self.edges[edge].tail == v;
            pieces.push((edge, pos, forward));
            pos += self.edges[edge].length;
            v = w;
        }
        Some(LineInfo {
            start,
            length: pos,
            pieces,
        })
    }

    /// Signed coordinate along a line tree (ray 0 points to negative infinity).
    pub fn line_coordinate(&self, p: &TreePoint) -> Result<f64> {
        let line = self.line.as_ref().ok_or_else(|| domain("tree is not a line"))?;
        Ok(match *p {
            TreePoint::Ray { ray: 0, offset } => -offset,
            TreePoint::Ray { offset, .. } => line.length + offset,
            TreePoint::Vertex(v) => self.vertex_distance(line.start, v),
            TreePoint::Edge { edge, offset } => {
                let &(_, start, forward) = line
                    .pieces
                    .iter()
                    .find(|(e, _, _)| *e == edge)
                    .expect("every edge of a line lies on the line");
                if forward {
                    start + offset
                } else {
                    start + self.edges[edge].length - offset
                }
            }
        })
    }

    pub fn line_point(&self, x: f64) -> Result<TreePoint> {
        let line = self.line.as_ref().ok_or_else(|| domain("tree is not a line"))?;
        if !x.is_finite() {
            return Err(argument("line coordinate must be finite"));
        }
        if x <= 0.0 {
            return Ok(self.point_on_clamped(Segment::Ray(0), -x));
        }
        if x >= line.length {
            return Ok(self.point_on_clamped(Segment::Ray(1), x - line.length));
        }
        for &(edge, start, forward) in &line.pieces {
            let len = self.edges[edge].length;
            if x <= start + len {
                let along = x - start;
                let offset = if forward { along } else { len - along };
                return Ok(self.point_on_clamped(Segment::Edge(edge), offset));
            }
        }
        Ok(self.point_on_clamped(Segment::Ray(1), 0.0))
    }

    pub fn line_length(&self) -> Option<f64> {
        self.line.as_ref().map(|l| l.length)
    }

    /// A copy with every edge length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                length: e.length * factor,
                ..e.clone()
            })
            .collect();
        Tree::new(self.vertex_count, edges, self.rays.clone())
    }

    pub fn scale_point(&self, p: &TreePoint, factor: f64) -> TreePoint {
        match *p {
            TreePoint::Vertex(v) => TreePoint::Vertex(v),
            TreePoint::Edge { edge, offset } => TreePoint::Edge {
                edge,
                offset: offset * factor,
            },
            TreePoint::Ray { ray, offset } => TreePoint::Ray {
                ray,
                offset: offset * factor,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caterpillar() -> Tree {
        // 0 -1- 1 -2- 2, with a leaf 3 hanging off 1; rays at 0 and 2.
        Tree::new(
            4,
            vec![
                Edge { tail: 0, head: 1, length: 1.0 },
                Edge { tail: 1, head: 2, length: 2.0 },
                Edge { tail: 3, head: 1, length: 0.5 },
            ],
            vec![
                Ray { at: 0, name: Some("w".into()) },
                Ray { at: 2, name: Some("e".into()) },
            ],
        )
        .unwrap()
    }

    #[test]
    fn tripod_leaf_distance() {
        let t = Tree::tripod();
        let a = t.point_on(Segment::Ray(0), 1.0).unwrap();
        let b = t.point_on(Segment::Ray(1), 1.0).unwrap();
        assert_eq!(t.distance(&a, &b), 2.0);
        assert_eq!(t.geodesic_point(&a, &b, 0.5), TreePoint::Vertex(0));
    }

    #[test]
    fn canonical_vertex_points() {
        let t = caterpillar();
        assert_eq!(t.point_on(Segment::Edge(0), 1.0).unwrap(), TreePoint::Vertex(1));
        assert_eq!(t.point_on(Segment::Edge(2), 0.0).unwrap(), TreePoint::Vertex(3));
        assert_eq!(t.point_on(Segment::Ray(1), 0.0).unwrap(), TreePoint::Vertex(2));
        assert!(t.point_on(Segment::Edge(1), 2.5).is_err());
    }

    #[test]
    fn rejects_cycles_and_bad_lengths() {
        let cyc = Tree::new(
            3,
            vec![
                Edge { tail: 0, head: 1, length: 1.0 },
                Edge { tail: 1, head: 0, length: 1.0 },
            ],
            vec![],
        );
        assert!(cyc.is_err());
        let neg = Tree::new(2, vec![Edge { tail: 0, head: 1, length: -1.0 }], vec![]);
        assert!(neg.is_err());
    }

    #[test]
    fn geodesic_through_interior_vertices() {
        let t = caterpillar();
        let leaf = TreePoint::Vertex(3);
        let far = t.point_on(Segment::Ray(1), 1.5).unwrap();
        let d = t.distance(&leaf, &far);
        assert!((d - 4.0).abs() < 1e-15);
        for k in 0..=40 {
            let s = k as f64 / 40.0;
            let r = t.geodesic_point(&leaf, &far, s);
            assert!((t.distance(&leaf, &r) - s * d).abs() < 1e-12);
            assert!((t.distance(&r, &far) - (1.0 - s) * d).abs() < 1e-12);
        }
    }

    #[test]
    fn ray_from_other_branch() {
        let t = Tree::tripod();
        let b1 = t.point_on(Segment::Ray(1), 1.0).unwrap();
        let p = t.ray_point(&b1, 0, 1.5);
        assert_eq!(p, TreePoint::Ray { ray: 0, offset: 0.5 });
    }

    #[test]
    fn line_coordinates_round_trip() {
        let t = Tree::new(
            3,
            vec![
                Edge { tail: 1, head: 0, length: 1.0 },
                Edge { tail: 1, head: 2, length: 2.0 },
            ],
            vec![Ray { at: 0, name: None }, Ray { at: 2, name: None }],
        )
        .unwrap();
        assert!(t.is_line());
        for x in [-3.0, -0.1, 0.0, 0.5, 1.0, 2.2, 3.0, 7.5] {
            let p = t.line_point(x).unwrap();
            assert!((t.line_coordinate(&p).unwrap() - x).abs() < 1e-14);
        }
        assert!(!caterpillar().is_line());
    }
}
