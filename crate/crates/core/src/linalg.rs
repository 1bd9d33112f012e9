//! Small dense kernels: one-sided Jacobi SVD, Gram-Schmidt QR and subspace angles.
//!
//! These are deliberately independent of the Lanczos path in [`crate::spectral`] so
//! that they can serve as its test oracle.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

/// Thin SVD `A = U diag(s) Vt` with `s` sorted descending.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Array2<f64>,
    pub s: Vec<f64>,
    pub vt: Array2<f64>,
}

const MAX_SWEEPS: usize = 100;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Works on the columns of `A` (or of `Aᵀ` when `A` is wide) and rotates pairs until
/// every pair is orthogonal to working precision. Accurate to roughly machine epsilon
/// relative to the largest singular value; cost is O(sweeps · n · c²).
pub fn jacobi_svd(a: ArrayView2<f64>) -> ThinSvd {
    let (rows, cols) = a.dim();
    if rows < cols {
        let t = jacobi_svd(a.t());
        return ThinSvd {
            u: t.vt.t().to_owned(),
            s: t.s,
            vt: t.u.t().to_owned(),
        };
    }

    let mut work: Vec<Vec<f64>> = (0..cols).map(|j| a.column(j).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&work[p], &work[p]);
                let beta = dot(&work[q], &work[q]);
                let gamma = dot(&work[p], &work[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut work, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = work.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut u = Array2::zeros((rows, cols));
    let mut vt = Array2::zeros((cols, cols));
    let mut s = Vec::with_capacity(cols);
    for (k, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        s.push(sigma);
        if sigma > 0.0 {
            for i in 0..rows {
                u[[i, k]] = work[j][i] / sigma;
            }
        }
        for i in 0..cols {
            vt[[k, i]] = v[j][i];
        }
    }
    ThinSvd { u, s, vt }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Thin QR by modified Gram-Schmidt with one reorthogonalization pass.
///
/// `R` has a non-negative diagonal. A column that is numerically dependent on its
/// predecessors yields a zero column in `Q` and a zero row in `R`, so `A = QR` still holds.
pub fn qr_thin(a: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    let (rows, cols) = a.dim();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut r = Array2::zeros((cols, cols));
    for j in 0..cols {
        let mut w = a.column(j).to_vec();
        let original = norm(&w);
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let h = dot(qi, &w);
                r[[i, j]] += h;
                axpy(-h, qi, &mut w);
            }
        }
        let rn = norm(&w);
        if rn > 1e-14 * original && rn > 0.0 {
            r[[j, j]] = rn;
            w.iter_mut().for_each(|x| *x /= rn);
        } else {
            w.iter_mut().for_each(|x| *x = 0.0);
        }
        q.push(w);
    }
    let mut qm = Array2::zeros((rows, cols));
    for (j, col) in q.iter().enumerate() {
        for i in 0..rows {
            qm[[i, j]] = col[i];
        }
    }
    (qm, r)
}

/// Orthonormalize a set of vectors in place (two-pass Gram-Schmidt).
///
/// Returns `false` if some vector collapsed numerically onto the span of the others.
pub fn orthonormalize(vectors: &mut [Vec<f64>]) -> bool {
    let mut ok = true;
    for j in 0..vectors.len() {
        let (done, rest) = vectors.split_at_mut(j);
        let w = &mut rest[0];
        let before = norm(w);
        for _ in 0..2 {
            for q in done.iter() {
                let h = dot(q, w);
                axpy(-h, q, w);
            }
        }
        let n = norm(w);
        if n <= 1e-12 * before || n == 0.0 {
            ok = false;
        } else {
            w.iter_mut().for_each(|x| *x /= n);
        }
    }
    ok
}

/// Project `w` onto the orthogonal complement of the orthonormal `basis` (twice, for stability).
pub fn project_out(basis: &[Vec<f64>], w: &mut [f64]) {
    for _ in 0..2 {
        for q in basis {
            let h = dot(q, w);
            axpy(-h, q, w);
        }
    }
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Largest principal angle (radians) between the column spans of two matrices with
/// orthonormal columns and equal column count.
///
/// Computed from `‖(I − AAᵀ)B‖₂ = sin θ_max`, which stays accurate for tiny angles.
pub fn max_principal_angle(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    let residual = &b - &a.dot(&a.t().dot(&b));
    let s = jacobi_svd(residual.view()).s;
    let sin = s.first().copied().unwrap_or(0.0).min(1.0);
    sin.asin()
}

/// Largest absolute entry of `QᵀQ − I`.
pub fn orthonormality_error(q: ArrayView2<f64>) -> f64 {
    let g = q.t().dot(&q);
    let mut worst: f64 = 0.0;
    for ((i, j), x) in g.indexed_iter() {
        let target = if i == j { 1.0 } else { 0.0 };
        worst = worst.max((x - target).abs());
    }
    worst
}

pub fn frobenius(a: ArrayView2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
