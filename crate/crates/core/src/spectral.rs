//! Truncated SVD by Golub-Kahan-Lanczos bidiagonalization on matrix-free operators.
//!
//! The solver keeps every Lanczos vector and reorthogonalizes in full. Repeated singular
//! values are invisible to a single Krylov run, so converged triplets are locked and further
//! runs search the orthogonal complement until nothing larger than the k-th value remains.
//! A closing Rayleigh-Ritz step on the locked subspaces makes the factors orthonormal to
//! working precision.

use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, axpy, dot, jacobi_svd, norm, project_out};
use crate::matrix::{CenteredOperator, DenseOperator, LinearOperator};

/// Components with `σ ≤ DROP_TOL · σ₁` are treated as numerically zero.
pub const DROP_TOL: f64 = 1e-10;
/// Components below `ROUNDING_FLOOR · scale` of the operator are rounding noise even when
/// they are the largest ones, as for an all-zero centered matrix.
pub const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;
/// Entries within this relative distance of the largest magnitude count as tied.
pub const SIGN_TIE_TOL: f64 = 1e-8;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_RANK: usize = 64;

/// Truncated SVD `A ≈ U diag(σ) Vt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// nrows × r, orthonormal columns.
    pub u: Array2<f64>,
    /// r values, descending, all above the drop tolerance.
    pub sigma: Vec<f64>,
    /// r × ncols, orthonormal rows.
    pub vt: Array2<f64>,
    /// `‖Aᵀu_i − σ_i v_i‖` per component.
    pub residuals: Vec<f64>,
    pub seed: u64,
    pub tol: f64,
    /// Number of requested components that were not returned because the operator's
    /// numerical rank is smaller.
    pub dropped: usize,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.vt.ncols()
    }

    /// Dense `U diag(σ) Vt`.
    pub fn reconstruct(&self) -> Array2<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).mapv_inplace(|x| x * s);
        }
        us.dot(&self.vt)
    }
}

/// Truncated SVD of the centered data-sparsity operator.
///
/// `max_iter` bounds the total number of Lanczos steps over all runs; `None` picks
/// `2·min(V, m) + 100`, which is never binding in exact arithmetic.
pub fn truncated_svd(op: &CenteredOperator, k: usize, tol: f64, max_iter: Option<usize>, seed: u64) -> Result<SvdResult> {
    let limit = (op.nrows() - 1).min(op.ncols());
    if k == 0 || k > limit {
        return Err(Error::InvalidConfig(format!("rank k must lie in 1..={limit}, got {k}")));
    }
    truncated_svd_operator(op, k, tol, max_iter, seed)
}

/// Truncated SVD of any operator, `1 ≤ k ≤ min(nrows, ncols)`.
pub fn truncated_svd_operator<O: LinearOperator + ?Sized>(
    op: &O,
    k: usize,
    tol: f64,
    max_iter: Option<usize>,
    seed: u64,
) -> Result<SvdResult> {
    let (nr, nc) = (op.nrows(), op.ncols());
    let cap = nr.min(nc);
    if k == 0 || k > cap {
        return Err(Error::InvalidConfig(format!("rank k must lie in 1..={cap}, got {k}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    let budget = max_iter.unwrap_or(2 * cap + 100);
    let floor = ROUNDING_FLOOR * op.scale();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locked = Locked::default();
    let mut steps = 0;

    while locked.len() < cap {
        let verifying = locked.len() >= k;
        let need = if verifying { 1 } else { k - locked.len() };
        let run = lanczos_run(op, &locked, need, budget.saturating_sub(steps), tol, &mut rng);
        steps += run.steps;
        if !run.converged {
            let worst = run.residuals.iter().cloned().fold(0.0, f64::max);
            return Err(Error::NonConvergence {
                steps,
                worst,
                residuals: run.residuals,
            });
        }
        let sigma1 = locked.sigma_max().max(run.triplets.first().map_or(0.0, |t| t.sigma));
        let fresh: Vec<Triplet> = run
            .triplets
            .into_iter()
            .take(need)
            .filter(|t| t.sigma > (DROP_TOL * sigma1).max(floor))
            .collect();
        if verifying {
            let kth = locked.kth_largest(k);
            if fresh.first().is_none_or(|t| t.sigma <= kth + tol * sigma1) {
                break;
            }
        }
        if fresh.is_empty() {
            break;
        }
        for t in fresh {
            locked.push(t);
        }
    }

    let mut result = rayleigh_ritz(op, locked);
    let sigma1 = result.sigma.first().copied().unwrap_or(0.0);
    let keep = result
        .sigma
        .iter()
        .take(k)
        .filter(|&&s| s > (DROP_TOL * sigma1).max(floor))
        .count();
    result.truncate(keep);
    let res = SvdResult {
        residuals: result.residuals,
        u: result.u,
        sigma: result.sigma,
        vt: result.vt,
        seed,
        tol,
        dropped: k - keep,
    };
    Ok(canonicalize_signs(res))
}

/// Full SVD by one-sided Jacobi, canonicalized like the Lanczos path.
pub fn dense_svd_oracle(a: ArrayView2<f64>) -> Result<SvdResult> {
    let small = a.nrows().min(a.ncols());
    if small > 2048 {
        return Err(Error::TooLarge(small));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let svd = jacobi_svd(a);
    let sigma1 = svd.s.first().copied().unwrap_or(0.0);
    let floor = ROUNDING_FLOOR * a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r = svd.s.iter().filter(|&&s| s > (DROP_TOL * sigma1).max(floor)).count();
    let res = SvdResult {
        u: svd.u.slice(ndarray::s![.., ..r]).to_owned(),
        sigma: svd.s[..r].to_vec(),
        vt: svd.vt.slice(ndarray::s![..r, ..]).to_owned(),
        residuals: vec![0.0; r],
        seed: 0,
        tol: 0.0,
        dropped: small - r,
    };
    Ok(canonicalize_signs(res))
}

/// Flip each `(u_i, v_i)` pair so that the largest-magnitude entry of `u_i` is positive.
///
/// Entries within a relative [`SIGN_TIE_TOL`] of the maximum are tied and the smallest
/// index among them decides, so vectors equal up to rounding canonicalize identically.
pub fn canonicalize_signs(mut res: SvdResult) -> SvdResult {
    for i in 0..res.sigma.len() {
        let col = res.u.column(i);
        let max = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let Some(pivot) = col.iter().position(|x| x.abs() >= max * (1.0 - SIGN_TIE_TOL)) else {
            continue;
        };
        if col[pivot] < 0.0 {
            res.u.column_mut(i).mapv_inplace(|x| -x);
            res.vt.row_mut(i).mapv_inplace(|x| -x);
        }
    }
    res
}

/// Left singular vectors of an embedding matrix (rows are tokens), used as proxy word
/// analyzer vectors for trained decoders.
pub fn svd_of_embeddings(w: ArrayView2<f64>, k: usize) -> Result<SvdResult> {
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    truncated_svd_operator(&DenseOperator::new(w), k, DEFAULT_TOL, None, 0)
}

struct Triplet {
    sigma: f64,
    u: Vec<f64>,
    v: Vec<f64>,
}

#[derive(Default)]
struct Locked {
    sigma: Vec<f64>,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Locked {
    fn len(&self) -> usize {
        self.sigma.len()
    }

    fn push(&mut self, t: Triplet) {
        self.sigma.push(t.sigma);
        self.u.push(t.u);
        self.v.push(t.v);
    }

    fn sigma_max(&self) -> f64 {
        self.sigma.iter().cloned().fold(0.0, f64::max)
    }

    fn kth_largest(&self, k: usize) -> f64 {
        let mut s = self.sigma.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        s[k - 1]
    }
}

struct Run {
    /// Ritz triplets sorted by σ descending.
    triplets: Vec<Triplet>,
    residuals: Vec<f64>,
    steps: usize,
    converged: bool,
}

/// Random unit vector orthogonal to every vector in `bases`, or `None` if the bases
/// already span the space numerically.
fn random_orthogonal(len: usize, bases: &[&[Vec<f64>]], rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let used: usize = bases.iter().map(|b| b.len()).sum();
    if used >= len {
        return None;
    }
    for _ in 0..5 {
        let mut w = linalg::gaussian_vector(len, rng);
        let before = norm(&w);
        for b in bases {
            project_out(b, &mut w);
        }
        for b in bases {
            project_out(b, &mut w);
        }
        let n = norm(&w);
        if n > 1e-8 * before {
            w.iter_mut().for_each(|x| *x /= n);
            return Some(w);
        }
    }
    None
}

/// One Golub-Kahan-Lanczos run on `A` restricted to the complement of the locked triplets.
fn lanczos_run<O: LinearOperator + ?Sized>(
    op: &O,
    locked: &Locked,
    need: usize,
    budget: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Run {
    let (nr, nc) = (op.nrows(), op.ncols());
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut anorm: f64 = 0.0;
    let mut next_check = need;

    let Some(mut v) = random_orthogonal(nc, &[&locked.v], rng) else {
        return Run {
            triplets: Vec::new(),
            residuals: Vec::new(),
            steps: 0,
            converged: true,
        };
    };

    let mut u = vec![0.0; nr];
    let mut w = vec![0.0; nc];
    let mut steps = 0;
    loop {
        steps += 1;
        op.apply(&v, &mut u);
        p.push(v.clone());
        if let (Some(q_prev), Some(&beta)) = (q.last(), betas.last()) {
            axpy(-beta, q_prev, &mut u);
        }
        project_out(&locked.u, &mut u);
        project_out(&q, &mut u);
        let mut alpha = norm(&u);
        if alpha == 0.0 || alpha <= 1e-12 * anorm {
            alpha = 0.0;
            match random_orthogonal(nr, &[&locked.u, &q], rng) {
                Some(fresh) => u.copy_from_slice(&fresh),
                None => {
                    // The row space is exhausted: with α = 0 the extended bidiagonal
                    // [B | β e_j] is an exact restriction of A.
                    let triplets = if q.is_empty() {
                        Vec::new()
                    } else {
                        Bidiagonal::new(&alphas, &betas, true).triplets(&p, &q, need)
                    };
                    let residuals = vec![0.0; triplets.len()];
                    return Run {
                        triplets,
                        residuals,
                        steps,
                        converged: true,
                    };
                }
            }
        } else {
            u.iter_mut().for_each(|x| *x /= alpha);
        }
        anorm = anorm.max(alpha);
        q.push(u.clone());
        alphas.push(alpha);

        op.apply_transpose(&u, &mut w);
        axpy(-alpha, &v, &mut w);
        project_out(&locked.v, &mut w);
        project_out(&p, &mut w);
        let mut beta = norm(&w);
        let mut exhausted = false;
        if beta == 0.0 || beta <= 1e-12 * anorm {
            beta = 0.0;
            match random_orthogonal(nc, &[&locked.v, &p], rng) {
                Some(fresh) => w.copy_from_slice(&fresh),
                None => exhausted = true,
            }
        } else {
            w.iter_mut().for_each(|x| *x /= beta);
        }
        anorm = anorm.max(beta);
        betas.push(beta);

        let j = alphas.len();
        let out_of_budget = steps >= budget;
        if exhausted || out_of_budget || (j >= need && j >= next_check) || (beta == 0.0 && j >= need) {
            next_check = j + (j / 4).max(1);
            let small = Bidiagonal::new(&alphas, &betas[..j - 1], false);
            let residuals: Vec<f64> = (0..j).map(|i| (beta * small.svd.u[[j - 1, i]]).abs()).collect();
            let sigma1 = locked.sigma_max().max(small.svd.s[0]);
            let want = need.min(j);
            let converged = residuals[..want].iter().all(|&r| r <= tol * sigma1);
            if converged || exhausted || out_of_budget {
                return Run {
                    triplets: small.triplets(&p, &q, want),
                    residuals: residuals[..want].to_vec(),
                    steps,
                    converged: converged || exhausted,
                };
            }
        }
        v.copy_from_slice(&w);
    }
}

/// The j×j upper bidiagonal of a Lanczos run, or the j×(j+1) matrix `[B | β e_j]` when
/// `extended`, together with its SVD.
struct Bidiagonal {
    cols: usize,
    svd: linalg::ThinSvd,
}

impl Bidiagonal {
    fn new(alphas: &[f64], betas: &[f64], extended: bool) -> Self {
        let j = alphas.len();
        let cols = if extended { j + 1 } else { j };
        let mut b = Array2::zeros((j, cols));
        for i in 0..j {
            b[[i, i]] = alphas[i];
            if i + 1 < cols {
                b[[i, i + 1]] = betas[i];
            }
        }
        Self {
            cols,
            svd: jacobi_svd(b.view()),
        }
    }

    /// Leading `count` Ritz triplets lifted back through the Lanczos bases.
    fn triplets(&self, p: &[Vec<f64>], q: &[Vec<f64>], count: usize) -> Vec<Triplet> {
        let (nr, nc) = (q[0].len(), p[0].len());
        (0..count.min(self.svd.s.len()))
            .map(|i| {
                let mut u = vec![0.0; nr];
                for (a, qa) in q.iter().enumerate() {
                    axpy(self.svd.u[[a, i]], qa, &mut u);
                }
                let mut v = vec![0.0; nc];
                for (a, pa) in p.iter().enumerate().take(self.cols) {
                    axpy(self.svd.vt[[i, a]], pa, &mut v);
                }
                Triplet { sigma: self.svd.s[i], u, v }
            })
            .collect()
    }
}

struct Refined {
    u: Array2<f64>,
    sigma: Vec<f64>,
    vt: Array2<f64>,
    residuals: Vec<f64>,
}

impl Refined {
    fn truncate(&mut self, r: usize) {
        self.u = self.u.slice(ndarray::s![.., ..r]).to_owned();
        self.vt = self.vt.slice(ndarray::s![..r, ..]).to_owned();
        self.sigma.truncate(r);
        self.residuals.truncate(r);
    }
}

/// Project `A` onto the locked subspaces and rediagonalize.
fn rayleigh_ritz<O: LinearOperator + ?Sized>(op: &O, mut locked: Locked) -> Refined {
    let (nr, nc) = (op.nrows(), op.ncols());
    linalg::orthonormalize(&mut locked.u);
    linalg::orthonormalize(&mut locked.v);
    let kk = locked.len();
    let mut av = vec![vec![0.0; nr]; kk];
    for (b, vb) in locked.v.iter().enumerate() {
        op.apply(vb, &mut av[b]);
    }
    let mut m = Array2::zeros((kk, kk));
    for (a, ua) in locked.u.iter().enumerate() {
        for (b, avb) in av.iter().enumerate() {
            m[[a, b]] = dot(ua, avb);
        }
    }
    let small = jacobi_svd(m.view());
    let mut u = Array2::zeros((nr, kk));
    let mut vt = Array2::zeros((kk, nc));
    for i in 0..kk {
        for (a, ua) in locked.u.iter().enumerate() {
            let c = small.u[[a, i]];
            for (z, x) in ua.iter().enumerate() {
                u[[z, i]] += c * x;
            }
        }
        for (b, vb) in locked.v.iter().enumerate() {
            let c = small.vt[[i, b]];
            for (j, x) in vb.iter().enumerate() {
                vt[[i, j]] += c * x;
            }
        }
    }
    let mut residuals = Vec::with_capacity(kk);
    let mut atu = vec![0.0; nc];
    for i in 0..kk {
        let ui = u.column(i).to_vec();
        op.apply_transpose(&ui, &mut atu);
        let r: f64 = atu
            .iter()
            .zip(vt.row(i))
            .map(|(a, v): (&f64, &f64)| (a - small.s[i] * v).powi(2))
            .sum::<f64>()
            .sqrt();
        residuals.push(r);
    }
    Refined {
        u,
        sigma: small.s,
        vt,
        residuals,
    }
}
