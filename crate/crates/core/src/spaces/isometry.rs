use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{Point, Segment, Space, Tree, TreePoint};
use crate::error::{argument, domain, Error, Result};

/// How a tree isometry acts.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeMap {
    /// Combinatorial map: vertex images, edge images with an orientation flip, ray images.
    Automorphism {
        vertices: Vec<usize>,
        edges: Vec<(usize, bool)>,
        rays: Vec<usize>,
    },
    /// Affine map x -> (reflect ? -x : x) + shift in line coordinates (line trees only).
    Line { reflect: bool, shift: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeIsometry {
    pub domain: Arc<Tree>,
    pub codomain: Arc<Tree>,
    pub map: TreeMap,
}

/// A distance-preserving map between two spaces of the same kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Isometry {
    /// x -> linear * x + translation, with `linear` orthogonal.
    Euclidean {
        linear: DMatrix<f64>,
        translation: DVector<f64>,
    },
    Tree(TreeIsometry),
    Product(Box<Isometry>, Box<Isometry>),
}

impl TreeIsometry {
    pub fn automorphism(
        domain: Arc<Tree>,
        codomain: Arc<Tree>,
        vertices: Vec<usize>,
        edges: Vec<(usize, bool)>,
        rays: Vec<usize>,
    ) -> Result<Self> {
        let bad = |m: &str| Err(domain_err(m));
        if vertices.len() != domain.vertex_count()
            || edges.len() != domain.edges().len()
            || rays.len() != domain.rays().len()
            || domain.vertex_count() != codomain.vertex_count()
            || domain.edges().len() != codomain.edges().len()
            || domain.rays().len() != codomain.rays().len()
        {
            return bad("automorphism tables do not match the tree sizes");
        }
        if !is_permutation(&vertices) || !is_permutation(&edges.iter().map(|e| e.0).collect::<Vec<_>>()) || !is_permutation(&rays) {
            return bad("automorphism tables must be bijections");
        }
        for (i, e) in domain.edges().iter().enumerate() {
            let (j, flip) = edges[i];
            let f = &codomain.edges()[j];
            let (t, h) = if flip { (f.head, f.tail) } else { (f.tail, f.head) };
            if vertices[e.tail] != t || vertices[e.head] != h {
                return bad(&format!("edge {i} endpoints not preserved"));
            }
            if (e.length - f.length).abs() > 1e-12 * (1.0 + e.length) {
                return bad(&format!("edge {i} length not preserved"));
            }
        }
        for (i, r) in domain.rays().iter().enumerate() {
            if vertices[r.at] != codomain.rays()[rays[i]].at {
                return bad(&format!("ray {i} attachment not preserved"));
            }
        }
        Ok(TreeIsometry {
            domain,
            codomain,
            map: TreeMap::Automorphism { vertices, edges, rays },
        })
    }

    pub fn line(domain: Arc<Tree>, codomain: Arc<Tree>, reflect: bool, shift: f64) -> Result<Self> {
        if !domain.is_line() || !codomain.is_line() {
            return Err(domain_err("line isometries need line trees"));
        }
        if !shift.is_finite() {
            return Err(argument("line shift must be finite"));
        }
        Ok(TreeIsometry {
            domain,
            codomain,
            map: TreeMap::Line { reflect, shift },
        })
    }

    pub fn identity(tree: Arc<Tree>) -> Self {
        TreeIsometry {
            map: TreeMap::Automorphism {
                vertices: (0..tree.vertex_count()).collect(),
                edges: (0..tree.edges().len()).map(|e| (e, false)).collect(),
                rays: (0..tree.rays().len()).collect(),
            },
            domain: tree.clone(),
            codomain: tree,
        }
    }

    pub fn apply(&self, p: &TreePoint) -> TreePoint {
        match &self.map {
            TreeMap::Automorphism { vertices, edges, rays } => match *p {
                TreePoint::Vertex(v) => TreePoint::Vertex(vertices[v]),
                TreePoint::Edge { edge, offset } => {
                    let (e, flip) = edges[edge];
                    let len = self.codomain.edges()[e].length;
                    let o = if flip { len - offset } else { offset };
                    self.codomain.point_on_clamped(Segment::Edge(e), o)
                }
                TreePoint::Ray { ray, offset } => TreePoint::Ray { ray: rays[ray], offset },
            },
            TreeMap::Line { reflect, shift } => {
                let x = self.domain.line_coordinate(p).expect("domain is a line");
                let y = if *reflect { -x } else { x } + shift;
                self.codomain.line_point(y).expect("codomain is a line")
            }
        }
    }

    /// Image of the end of ray `r`.
    pub fn apply_end(&self, r: usize) -> usize {
        match &self.map {
            TreeMap::Automorphism { rays, .. } => rays[r],
            TreeMap::Line { reflect, .. } => {
                if *reflect {
                    1 - r
                } else {
                    r
                }
            }
        }
    }

    /// The same map written affinely in line coordinates (line trees only).
    pub fn line_form(&self) -> Option<(bool, f64)> {
        match &self.map {
            TreeMap::Line { reflect, shift } => Some((*reflect, *shift)),
            TreeMap::Automorphism { .. } => {
                if !self.domain.is_line() || !self.codomain.is_line() {
                    return None;
                }
                let zero = self.domain.line_point(0.0).ok()?;
                let shift = self.codomain.line_coordinate(&self.apply(&zero)).ok()?;
                Some((self.apply_end(0) == 1, shift))
            }
        }
    }

    pub fn compose(&self, inner: &TreeIsometry) -> Result<TreeIsometry> {
        if inner.codomain != self.domain {
            return Err(Error::Composition("tree isometries do not chain".into()));
        }
        match (&self.map, &inner.map) {
            (
                TreeMap::Automorphism { vertices: v2, edges: e2, rays: r2 },
                TreeMap::Automorphism { vertices: v1, edges: e1, rays: r1 },
            ) => Ok(TreeIsometry {
                domain: inner.domain.clone(),
                codomain: self.codomain.clone(),
                map: TreeMap::Automorphism {
                    vertices: v1.iter().map(|&v| v2[v]).collect(),
                    edges: e1
                        .iter()
                        .map(|&(e, f)| {
                            let (e2i, f2) = e2[e];
                            (e2i, f ^ f2)
                        })
                        .collect(),
                    rays: r1.iter().map(|&r| r2[r]).collect(),
                },
            }),
            _ => {
                let (ra, sa) = self.line_form().ok_or_else(|| Error::Composition("not a line map".into()))?;
                let (rb, sb) = inner.line_form().ok_or_else(|| Error::Composition("not a line map".into()))?;
                // a(b(x)) = ±a(±b x + sb) + sa
                let shift = if ra { -sb } else { sb } + sa;
                TreeIsometry::line(inner.domain.clone(), self.codomain.clone(), ra ^ rb, shift)
            }
        }
    }

    pub fn inverse(&self) -> TreeIsometry {
        match &self.map {
            TreeMap::Automorphism { vertices, edges, rays } => {
                let mut vi = vec![0; vertices.len()];
                for (i, &v) in vertices.iter().enumerate() {
                    vi[v] = i;
                }
                let mut ei = vec![(0, false); edges.len()];
                for (i, &(e, f)) in edges.iter().enumerate() {
                    ei[e] = (i, f);
                }
                let mut ri = vec![0; rays.len()];
                for (i, &r) in rays.iter().enumerate() {
                    ri[r] = i;
                }
                TreeIsometry {
                    domain: self.codomain.clone(),
                    codomain: self.domain.clone(),
                    map: TreeMap::Automorphism {
                        vertices: vi,
                        edges: ei,
                        rays: ri,
                    },
                }
            }
            TreeMap::Line { reflect, shift } => TreeIsometry {
                domain: self.codomain.clone(),
                codomain: self.domain.clone(),
                map: TreeMap::Line {
                    reflect: *reflect,
                    shift: if *reflect { *shift } else { -shift },
                },
            },
        }
    }
}

fn domain_err(m: &str) -> Error {
    domain(m.to_string())
}

fn is_permutation(v: &[usize]) -> bool {
    let mut seen = vec![false; v.len()];
    for &x in v {
        if x >= v.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

impl Isometry {
    /// Euclidean isometry from an orthogonal matrix and a translation.
    pub fn euclidean(linear: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let n = linear.nrows();
        if linear.ncols() != n || translation.len() != n {
            return Err(argument("matrix and translation sizes disagree"));
        }
        let err = (linear.transpose() * &linear - DMatrix::identity(n, n)).amax();
        if err > 1e-9 {
            return Err(domain(format!("linear part is not orthogonal (defect {err:e})")));
        }
        Ok(Isometry::Euclidean { linear, translation })
    }

    pub fn translation(v: &[f64]) -> Self {
        let n = v.len();
        Isometry::Euclidean {
            linear: DMatrix::identity(n, n),
            translation: DVector::from_column_slice(v),
        }
    }

    /// Planar rotation by `angle` about `center`.
    pub fn rotation2(angle: f64, center: [f64; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        let linear = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let ctr = DVector::from_column_slice(&center);
        let translation = &ctr - &linear * &ctr;
        Isometry::Euclidean { linear, translation }
    }

    /// Rotation of R^3 by `angle` about the line through `center` with direction `axis`.
    pub fn rotation3(angle: f64, axis: [f64; 3], center: [f64; 3]) -> Result<Self> {
        let k = crate::numeric::normalized(&axis).ok_or_else(|| argument("rotation axis must be nonzero"))?;
        let (s, c) = angle.sin_cos();
        let kx = DMatrix::from_row_slice(3, 3, &[0.0, -k[2], k[1], k[2], 0.0, -k[0], -k[1], k[0], 0.0]);
        let kk = DMatrix::from_fn(3, 3, |i, j| k[i] * k[j]);
        let linear = DMatrix::identity(3, 3) * c + kx * s + kk * (1.0 - c);
        let ctr = DVector::from_column_slice(&center);
        let translation = &ctr - &linear * &ctr;
        Ok(Isometry::Euclidean { linear, translation })
    }

    pub fn identity(space: &Space) -> Self {
        match space {
            Space::Euclidean(n) => Isometry::Euclidean {
                linear: DMatrix::identity(*n, *n),
                translation: DVector::zeros(*n),
            },
            Space::Tree(t) => Isometry::Tree(TreeIsometry::identity(t.clone())),
            Space::Product(l, r) => Isometry::Product(Box::new(Isometry::identity(l)), Box::new(Isometry::identity(r))),
        }
    }

    pub fn product(left: Isometry, right: Isometry) -> Self {
        Isometry::Product(Box::new(left), Box::new(right))
    }

    pub fn domain(&self) -> Space {
        match self {
            Isometry::Euclidean { linear, .. } => Space::Euclidean(linear.ncols()),
            Isometry::Tree(t) => Space::Tree(t.domain.clone()),
            Isometry::Product(l, r) => Space::product(l.domain(), r.domain()),
        }
    }

    pub fn codomain(&self) -> Space {
        match self {
            Isometry::Euclidean { linear, .. } => Space::Euclidean(linear.nrows()),
            Isometry::Tree(t) => Space::Tree(t.codomain.clone()),
            Isometry::Product(l, r) => Space::product(l.codomain(), r.codomain()),
        }
    }

    /// Applies the map to a point of the domain; unchecked.
    pub fn map(&self, p: &Point) -> Point {
        match (self, p) {
            (Isometry::Euclidean { linear, translation }, Point::Euclidean(v)) => {
                let x = DVector::from_column_slice(v);
                Point::Euclidean((linear * x + translation).iter().cloned().collect())
            }
            (Isometry::Tree(t), Point::Tree(q)) => Point::Tree(t.apply(q)),
            (Isometry::Product(l, r), Point::Product(a, b)) => Point::pair(l.map(a), r.map(b)),
            _ => panic!("isometry applied to a point of the wrong kind"),
        }
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        self.domain().validate(p)?;
        Ok(self.map(p))
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Isometry) -> Result<Isometry> {
        match (self, inner) {
            (
                Isometry::Euclidean { linear: a, translation: s },
                Isometry::Euclidean { linear: b, translation: t },
            ) => {
                if a.ncols() != b.nrows() {
                    return Err(Error::Composition("Euclidean dimensions do not chain".into()));
                }
                Ok(Isometry::Euclidean {
                    linear: a * b,
                    translation: a * t + s,
                })
            }
            (Isometry::Tree(a), Isometry::Tree(b)) => Ok(Isometry::Tree(a.compose(b)?)),
            (Isometry::Product(a1, b1), Isometry::Product(a2, b2)) => {
                Ok(Isometry::product(a1.compose(a2)?, b1.compose(b2)?))
            }
            _ => Err(Error::Composition("isometries act on different kinds of space".into())),
        }
    }

    pub fn inverse(&self) -> Isometry {
        match self {
            Isometry::Euclidean { linear, translation } => {
                let lt = linear.transpose();
                let t = -(&lt * translation);
                Isometry::Euclidean { linear: lt, translation: t }
            }
            Isometry::Tree(t) => Isometry::Tree(t.inverse()),
            Isometry::Product(l, r) => Isometry::product(l.inverse(), r.inverse()),
        }
    }

    /// Conjugate of the map by the homothety of ratio `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Isometry> {
        Ok(match self {
            Isometry::Euclidean { linear, translation } => Isometry::Euclidean {
                linear: linear.clone(),
                translation: translation * factor,
            },
            Isometry::Tree(t) => {
                let domain = Arc::new(t.domain.scaled(factor)?);
                let codomain = if Arc::ptr_eq(&t.domain, &t.codomain) {
                    domain.clone()
                } else {
                    Arc::new(t.codomain.scaled(factor)?)
                };
                let map = match &t.map {
                    TreeMap::Line { reflect, shift } => TreeMap::Line {
                        reflect: *reflect,
                        shift: shift * factor,
                    },
                    m => m.clone(),
                };
                Isometry::Tree(TreeIsometry { domain, codomain, map })
            }
            Isometry::Product(l, r) => Isometry::product(l.scaled(factor)?, r.scaled(factor)?),
        })
    }

    /// Largest distance distortion |d(gp, gq) - d(p, q)| over the sample pairs.
    pub fn distortion(&self, samples: &[Point]) -> f64 {
        let dom = self.domain();
        let cod = self.codomain();
        let images: Vec<Point> = samples.iter().map(|p| self.map(p)).collect();
        let mut worst: f64 = 0.0;
        for i in 0..samples.len() {
            for j in i + 1..samples.len() {
                let d0 = dom.d(&samples[i], &samples[j]);
                let d1 = cod.d(&images[i], &images[j]);
                worst = worst.max((d0 - d1).abs());
            }
        }
        worst
    }

    /// Euclidean linear part and translation, if this is a Euclidean map.
    pub fn euclidean_parts(&self) -> Option<(&DMatrix<f64>, &DVector<f64>)> {
        match self {
            Isometry::Euclidean { linear, translation } => Some((linear, translation)),
            _ => None,
        }
    }
}
