//! Small numerical helpers shared by the solvers: 1-D searches, Nelder–Mead,
//! subspace bases and sphere grids.

use nalgebra::{DMatrix, DVector};

pub(crate) const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Minimizes a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > tol && iter < 200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let mut best = (x, fx);
    for (y, fy) in [(lo, f(lo)), (hi, f(hi))] {
        if fy < best.1 {
            best = (y, fy);
        }
    }
    best
}

/// Derivative-free Nelder–Mead minimization.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    step: f64,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    if n == 0 {
        let v = f(start);
        return (Vec::new(), v);
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        let v = f(&p);
        simplex.push((p, v));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex
            .iter()
            .skip(1)
            .map(|(p, _)| dist(p, &simplex[0].0))
            .fold(0.0, f64::max);
        if spread.abs() <= tol && size <= tol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (p, _) in simplex.iter().take(n) {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = if fr < simplex[n].1 { along(-0.5) } else { along(0.5) };
            let fcon = f(&contracted);
            if fcon < simplex[n].1.min(fr) {
                simplex[n] = (contracted, fcon);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = best
                        .iter()
                        .zip(&entry.0)
                        .map(|(b, x)| b + 0.5 * (x - b))
                        .collect();
                    let v = f(&p);
                    *entry = (p, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    (n > 1e-300 && n.is_finite()).then(|| a.iter().map(|x| x / n).collect())
}

/// Angle between two unit vectors, accurate near 0 and pi.
pub fn unit_angle(u: &[f64], v: &[f64]) -> f64 {
    let diff: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let sum: f64 = u.iter().zip(v).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
    2.0 * diff.atan2(sum)
}

pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Orthonormal basis of the column span of `vectors` (rank decided at `tol`).
pub fn span_basis(vectors: &[Vec<f64>], dim: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let n = norm(&w);
        if n > tol * (1.0 + norm(v)) {
            basis.push(w.iter().map(|x| x / n).collect());
        }
        if basis.len() == dim {
            break;
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of span(`basis`) in R^dim.
pub fn complement_basis(basis: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut all = basis.to_vec();
    let start = all.len();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        all.push(e);
    }
    let full = span_basis(&all, dim, 1e-9);
    full[start.min(full.len())..].to_vec()
}

/// Null space of a matrix via SVD, returned as orthonormal vectors.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return (0..cols)
            .map(|i| {
                let mut e = vec![0.0; cols];
                e[i] = 1.0;
                e
            })
            .collect();
    }
    // Pad to at least square so the SVD exposes the full right singular basis.
    let rows = m.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let scale = svd.singular_values.iter().cloned().fold(1.0, f64::max);
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= tol * scale {
            out.push(v_t.row(i).iter().cloned().collect());
        }
    }
    out
}

/// Least-squares solution with minimum norm; returns the solution and the residual norm.
pub fn least_squares(m: &DMatrix<f64>, rhs: &DVector<f64>) -> (DVector<f64>, f64) {
    if m.nrows() == 0 {
        return (DVector::zeros(m.ncols()), 0.0);
    }
    let svd = m.clone().svd(true, true);
    let x = svd
        .solve(rhs, 1e-11)
        .unwrap_or_else(|_| DVector::zeros(m.ncols()));
    let residual = (m * &x - rhs).norm();
    (x, residual)
}

/// Points on the unit circle at the given angular spacing.
pub fn circle_grid(spacing: f64) -> Vec<Vec<f64>> {
    let n = ((2.0 * std::f64::consts::PI) / spacing).ceil().max(4.0) as usize;
    (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

/// Fibonacci lattice on the unit 2-sphere with roughly the given angular spacing.
pub fn fibonacci_sphere(spacing: f64) -> Vec<Vec<f64>> {
    let n = ((4.0 * std::f64::consts::PI) / (spacing * spacing)).ceil().max(8.0) as usize;
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let a = golden_angle * k as f64;
            vec![r * a.cos(), r * a.sin(), z]
        })
        .collect()
}
