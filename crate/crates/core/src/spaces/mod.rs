//! Model spaces, their points, distances and geodesics.

mod isometry;
pub mod tree;

use std::sync::Arc;

use rand::Rng;

use crate::error::{argument, domain, Result};
pub use isometry::{Isometry, TreeIsometry, TreeMap};
pub use tree::{Edge, Ray, Segment, Tree, TreePoint};

/// A proper CAT(0) model space.
#[derive(Debug, Clone, PartialEq)]
pub enum Space {
    Euclidean(usize),
    Tree(Arc<Tree>),
    /// Binary product with the l2 product metric; deeper products nest.
    Product(Box<Space>, Box<Space>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Euclidean(Vec<f64>),
    Tree(TreePoint),
    Product(Box<Point>, Box<Point>),
}

impl Point {
    pub fn pair(left: Point, right: Point) -> Point {
        Point::Product(Box::new(left), Box::new(right))
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Euclidean(v) => Some(v),
            _ => None,
        }
    }

    pub fn tree_point(&self) -> Option<&TreePoint> {
        match self {
            Point::Tree(p) => Some(p),
            _ => None,
        }
    }

    pub fn factors(&self) -> Option<(&Point, &Point)> {
        match self {
            Point::Product(l, r) => Some((l, r)),
            _ => None,
        }
    }
}

impl Space {
    pub fn tree(tree: Tree) -> Space {
        Space::Tree(Arc::new(tree))
    }

    pub fn product(left: Space, right: Space) -> Space {
        Space::Product(Box::new(left), Box::new(right))
    }

    pub fn tripod() -> Space {
        Space::tree(Tree::tripod())
    }

    pub fn line_tree() -> Space {
        Space::tree(Tree::line())
    }

    /// The one-point space, realized as a tree with a single vertex.
    pub fn point() -> Space {
        Space::tree(Tree::point())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Space::Euclidean(_) => "euclidean",
            Space::Tree(_) => "tree",
            Space::Product(..) => "product",
        }
    }

    /// Same kind, shape and (for products) factor kinds.
    pub fn same_kind(&self, other: &Space) -> bool {
        match (self, other) {
            (Space::Euclidean(a), Space::Euclidean(b)) => a == b,
            (Space::Tree(_), Space::Tree(_)) => true,
            (Space::Product(a, b), Space::Product(c, d)) => a.same_kind(c) && b.same_kind(d),
            _ => false,
        }
    }

    pub fn is_single_point(&self) -> bool {
        match self {
            Space::Euclidean(n) => *n == 0,
            Space::Tree(t) => t.vertex_count() == 1 && t.rays().is_empty(),
            Space::Product(l, r) => l.is_single_point() && r.is_single_point(),
        }
    }

    /// Whether the space has no boundary at infinity.
    pub fn is_bounded(&self) -> bool {
        match self {
            Space::Euclidean(n) => *n == 0,
            Space::Tree(t) => t.rays().is_empty(),
            Space::Product(l, r) => l.is_bounded() && r.is_bounded(),
        }
    }

    pub fn validate(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (Space::Euclidean(n), Point::Euclidean(v)) => {
                if v.len() != *n {
                    return Err(domain(format!("expected {n} coordinates, got {}", v.len())));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(domain("coordinates must be finite"));
                }
                Ok(())
            }
            (Space::Tree(t), Point::Tree(q)) => t.validate(q),
            (Space::Product(l, r), Point::Product(a, b)) => {
                l.validate(a)?;
                r.validate(b)
            }
            _ => Err(domain(format!("point does not belong to a {} space", self.kind()))),
        }
    }

    /// Distance between valid points; panics on kind mismatch.
    pub fn d(&self, p: &Point, q: &Point) -> f64 {
        match (self, p, q) {
            (Space::Euclidean(_), Point::Euclidean(a), Point::Euclidean(b)) => crate::numeric::dist(a, b),
            (Space::Tree(t), Point::Tree(a), Point::Tree(b)) => t.distance(a, b),
            (Space::Product(l, r), Point::Product(a1, b1), Point::Product(a2, b2)) => {
                l.d(a1, a2).hypot(r.d(b1, b2))
            }
            _ => panic!("distance between points of the wrong kind"),
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.validate(p)?;
        self.validate(q)?;
        Ok(self.d(p, q))
    }

    /// Constant-speed geodesic from `p` (t = 0) to `q` (t = 1); unchecked.
    pub fn geo(&self, p: &Point, q: &Point, t: f64) -> Point {
        match (self, p, q) {
            (Space::Euclidean(_), Point::Euclidean(a), Point::Euclidean(b)) => {
                if t == 0.0 {
                    return p.clone();
                }
                if t == 1.0 {
                    return q.clone();
                }
                Point::Euclidean(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect())
            }
            (Space::Tree(tr), Point::Tree(a), Point::Tree(b)) => Point::Tree(tr.geodesic_point(a, b, t)),
            (Space::Product(l, r), Point::Product(a1, b1), Point::Product(a2, b2)) => {
                Point::pair(l.geo(a1, a2, t), r.geo(b1, b2, t))
            }
            _ => panic!("geodesic between points of the wrong kind"),
        }
    }

    pub fn geodesic_point(&self, p: &Point, q: &Point, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(argument(format!("geodesic parameter {t} outside [0, 1]")));
        }
        self.validate(p)?;
        self.validate(q)?;
        Ok(self.geo(p, q, t))
    }

    /// A canonical base point: the origin, vertex 0, or the pair of factor bases.
    pub fn base_point(&self) -> Point {
        match self {
            Space::Euclidean(n) => Point::Euclidean(vec![0.0; *n]),
            Space::Tree(_) => Point::Tree(TreePoint::Vertex(0)),
            Space::Product(l, r) => Point::pair(l.base_point(), r.base_point()),
        }
    }

    /// Random point; `scale` bounds Euclidean coordinates and ray offsets.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> Point {
        match self {
            Space::Euclidean(n) => Point::Euclidean((0..*n).map(|_| rng.gen_range(-scale..=scale)).collect()),
            Space::Tree(t) => {
                let segs = t.segment_count();
                if segs == 0 {
                    return Point::Tree(TreePoint::Vertex(0));
                }
                let seg = t.segment(rng.gen_range(0..segs));
                let len = t.segment_length(seg).min(scale);
                Point::Tree(t.point_on_clamped(seg, rng.gen_range(0.0..=len)))
            }
            Space::Product(l, r) => Point::pair(l.random_point(rng, scale), r.random_point(rng, scale)),
        }
    }

    /// The same space with the metric multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Space> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(argument("scale factor must be positive"));
        }
        Ok(match self {
            Space::Euclidean(n) => Space::Euclidean(*n),
            Space::Tree(t) => Space::tree(t.scaled(factor)?),
            Space::Product(l, r) => Space::product(l.scaled(factor)?, r.scaled(factor)?),
        })
    }

    /// Image of `p` under the homothety onto `self.scaled(factor)`.
    pub fn scale_point(&self, p: &Point, factor: f64) -> Point {
        match (self, p) {
            (Space::Euclidean(_), Point::Euclidean(v)) => Point::Euclidean(v.iter().map(|x| x * factor).collect()),
            (Space::Tree(t), Point::Tree(q)) => Point::Tree(t.scale_point(q, factor)),
            (Space::Product(l, r), Point::Product(a, b)) => {
                Point::pair(l.scale_point(a, factor), r.scale_point(b, factor))
            }
            _ => p.clone(),
        }
    }

    /// Human-readable rendering used in reports.
    pub fn format_point(&self, p: &Point) -> String {
        match (self, p) {
            (Space::Euclidean(_), Point::Euclidean(v)) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
                format!("({})", parts.join(" "))
            }
            (Space::Tree(t), Point::Tree(q)) => match *q {
                TreePoint::Vertex(v) => format!("v{v}"),
                TreePoint::Edge { edge, offset } => format!("e{edge}@{offset}"),
                TreePoint::Ray { ray, offset } => format!("{}@{offset}", t.ray_label(ray)),
            },
            (Space::Product(l, r), Point::Product(a, b)) => {
                format!("[{} ; {}]", l.format_point(a), r.format_point(b))
            }
            _ => "?".to_string(),
        }
    }
}
