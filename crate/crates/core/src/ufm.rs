//! Unconstrained-features NTP model: trainer, closed-form square-loss dynamics and
//! convergence diagnostics.
//!
//! The square loss is `½‖S̃ − WH‖²_F`; with that scaling a gradient step of size η advances
//! the gradient-flow clock by exactly η, so checkpoint `s` is compared with `a_i(η·s)`.

use ndarray::{Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::SoftLabelMatrix;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, gaussian_matrix, jacobi_svd, qr_thin};
use crate::matrix::CenteredOperator;
use crate::spectral::SvdResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Square,
    Ce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Spectral,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UfmState {
    /// V×d word embeddings (decoder).
    pub w: Array2<f64>,
    /// d×m context embeddings.
    pub h: Array2<f64>,
    pub step: usize,
    pub eta: f64,
    pub lambda: f64,
    /// d×r partial orthogonal matrix used by spectral init (d×0 for random init).
    pub rotation: Array2<f64>,
    pub delta: f64,
    pub init: InitKind,
}

impl UfmState {
    pub fn d(&self) -> usize {
        self.w.ncols()
    }

    pub fn logits(&self) -> Array2<f64> {
        self.w.dot(&self.h)
    }
}

fn default_eta(svd: &SvdResult) -> f64 {
    let s1 = svd.sigma.first().copied().unwrap_or(1.0);
    0.05 / (s1 * s1)
}

/// `W(0) = e^{−δ} U Rᵀ`, `H(0) = e^{−δ} R Vᵀ` with `R` the Q factor of a seeded
/// Gaussian d×r matrix.
pub fn spectral_init(svd: &SvdResult, d: usize, delta: f64, seed: u64) -> Result<UfmState> {
    let r = svd.rank();
    if d < r {
        return Err(Error::DimTooSmall { d, r });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rotation, _) = qr_thin(gaussian_matrix(d, r, &mut rng).view());
    let scale = (-delta).exp();
    let w = svd.u.dot(&rotation.t()) * scale;
    let h = rotation.dot(&svd.vt) * scale;
    Ok(UfmState {
        w,
        h,
        step: 0,
        eta: default_eta(svd),
        lambda: 0.0,
        rotation,
        delta,
        init: InitKind::Spectral,
    })
}

/// Gaussian `W(0)`, `H(0)` rescaled to the Frobenius norm `e^{−δ}√r` of spectral init.
pub fn random_init(svd: &SvdResult, d: usize, delta: f64, seed: u64) -> Result<UfmState> {
    if d == 0 {
        return Err(Error::InvalidConfig("embedding dimension must be positive".into()));
    }
    let target = (-delta).exp() * (svd.rank() as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = gaussian_matrix(svd.nrows(), d, &mut rng);
    let mut h = gaussian_matrix(d, svd.ncols(), &mut rng);
    w *= target / frobenius(w.view());
    h *= target / frobenius(h.view());
    Ok(UfmState {
        w,
        h,
        step: 0,
        eta: default_eta(svd),
        lambda: 0.0,
        rotation: Array2::zeros((d, 0)),
        delta,
        init: InitKind::Random,
    })
}

/// Training objective.
#[derive(Debug, Clone, Copy)]
pub enum Objective<'a> {
    /// `½‖S̃ − WH‖²_F`
    Square(CenteredOperator<'a>),
    /// `−(1/m) Σ_j Σ_z P[z,j] log softmax(W h_j)[z] + λ(‖W‖²_F + ‖H‖²_F)`
    Ce { labels: &'a SoftLabelMatrix, lambda: f64 },
}

/// Loss and its gradients with respect to `W` and `H`.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub loss: f64,
    pub grad_w: Array2<f64>,
    pub grad_h: Array2<f64>,
}

impl Objective<'_> {
    fn check_dims(&self, w: ArrayView2<f64>, h: ArrayView2<f64>) -> Result<()> {
        let (v, m) = match self {
            Objective::Square(op) => (op.base().nrows(), op.base().ncols()),
            Objective::Ce { labels, .. } => (labels.vocab_size(), labels.ncols()),
        };
        if w.nrows() != v {
            return Err(Error::DimensionMismatch { expected: v, got: w.nrows() });
        }
        if h.ncols() != m {
            return Err(Error::DimensionMismatch { expected: m, got: h.ncols() });
        }
        if h.nrows() != w.ncols() {
            return Err(Error::DimensionMismatch {
                expected: w.ncols(),
                got: h.nrows(),
            });
        }
        Ok(())
    }

    pub fn loss(&self, w: ArrayView2<f64>, h: ArrayView2<f64>) -> Result<f64> {
        self.check_dims(w, h)?;
        Ok(match self {
            Objective::Square(op) => {
                let wts = op.transpose_mul(w)?;
                square_loss(op, &wts, w, h)
            }
            Objective::Ce { labels, lambda } => ce_parts(labels, *lambda, w, h).0,
        })
    }

    pub fn gradient(&self, w: ArrayView2<f64>, h: ArrayView2<f64>) -> Result<Gradient> {
        self.check_dims(w, h)?;
        match self {
            Objective::Square(op) => {
                // E = S̃ − WH is never formed: EHᵀ = S̃Hᵀ − W(HHᵀ), WᵀE = WᵀS̃ − (WᵀW)H.
                let wts = op.transpose_mul(w)?;
                let loss = square_loss(op, &wts, w, h);
                let sht = op.mul_transposed(h)?;
                let hht = h.dot(&h.t());
                let wtw = w.t().dot(&w);
                let grad_w = w.dot(&hht) - sht;
                let grad_h = wtw.dot(&h) - wts;
                Ok(Gradient { loss, grad_w, grad_h })
            }
            Objective::Ce { labels, lambda } => {
                let (loss, g) = ce_parts(labels, *lambda, w, h);
                let grad_w = g.dot(&h.t()) + &w * (2.0 * lambda);
                let grad_h = w.t().dot(&g) + &h * (2.0 * lambda);
                Ok(Gradient { loss, grad_w, grad_h })
            }
        }
    }
}

/// `½(‖S̃‖² − 2⟨WᵀS̃, H⟩ + ⟨WᵀW, HHᵀ⟩)`
fn square_loss(op: &CenteredOperator, wts: &Array2<f64>, w: ArrayView2<f64>, h: ArrayView2<f64>) -> f64 {
    let cross: f64 = wts.iter().zip(h.iter()).map(|(a, b)| a * b).sum();
    let wtw = w.t().dot(&w);
    let hht = h.dot(&h.t());
    let quad: f64 = wtw.iter().zip(hht.iter()).map(|(a, b)| a * b).sum();
    (0.5 * (op.frobenius_sq() - 2.0 * cross + quad)).max(0.0)
}

/// CE loss and `∂loss/∂L = (softmax(L) − P)/m` (without the ridge term).
fn ce_parts(labels: &SoftLabelMatrix, lambda: f64, w: ArrayView2<f64>, h: ArrayView2<f64>) -> (f64, Array2<f64>) {
    let mut g = w.dot(&h);
    let m = g.ncols() as f64;
    let mut loss = 0.0;
    for (j, mut col) in g.axis_iter_mut(Axis(1)).enumerate() {
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_z = max + col.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
        for &(z, p) in labels.column(j) {
            loss -= p * (col[z as usize] - log_z);
        }
        col.mapv_inplace(|l| (l - log_z).exp());
        for &(z, p) in labels.column(j) {
            col[z as usize] -= p;
        }
    }
    g /= m;
    let ridge = lambda * (w.iter().map(|x| x * x).sum::<f64>() + h.iter().map(|x| x * x).sum::<f64>());
    (loss / m + ridge, g)
}

/// One plain gradient-descent step; also returns the loss at the starting point.
pub fn gd_step(state: &UfmState, objective: &Objective) -> Result<(UfmState, f64)> {
    let g = objective.gradient(state.w.view(), state.h.view())?;
    let w = &state.w - &(g.grad_w * state.eta);
    let h = &state.h - &(g.grad_h * state.eta);
    if !g.loss.is_finite() || w.iter().chain(h.iter()).any(|x| !x.is_finite()) {
        return Err(Error::Divergence {
            prev: g.loss,
            next: f64::INFINITY,
        });
    }
    let next = UfmState {
        w,
        h,
        step: state.step + 1,
        ..state.clone()
    };
    Ok((next, g.loss))
}

pub fn gd_step_square(state: &UfmState, op: &CenteredOperator) -> Result<UfmState> {
    gd_step(state, &Objective::Square(*op)).map(|(s, _)| s)
}

pub fn gd_step_ce(state: &UfmState, labels: &SoftLabelMatrix) -> Result<UfmState> {
    gd_step(
        state,
        &Objective::Ce {
            labels,
            lambda: state.lambda,
        },
    )
    .map(|(s, _)| s)
}

/// Closed-form mode strengths `a_i(t) = 1 / (1 + (σ_i e^{2δ} − 1) e^{−2σ_i t})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsPrediction {
    pub sigma: Vec<f64>,
    pub delta: f64,
}

impl DynamicsPrediction {
    pub fn new(sigma: Vec<f64>, delta: f64) -> Self {
        Self { sigma, delta }
    }

    /// `ln(σ e^{2δ} − 1)`, or `None` when `σ e^{2δ} ≤ 1`.
    fn log_coefficient(&self, sigma: f64) -> Option<f64> {
        let x = 2.0 * self.delta + sigma.ln();
        (x > 0.0).then(|| x + (-(-x).exp()).ln_1p())
    }

    pub fn strength(&self, i: usize, t: f64) -> f64 {
        let sigma = self.sigma[i];
        match self.log_coefficient(sigma) {
            Some(c) => 1.0 / (1.0 + (c - 2.0 * sigma * t).exp()),
            None => {
                let kappa = sigma * (2.0 * self.delta).exp() - 1.0;
                1.0 / (1.0 + kappa * (-2.0 * sigma * t).exp())
            }
        }
    }

    /// Times at which each mode reaches strength ½.
    pub fn crossing_times(&self) -> Vec<f64> {
        self.sigma
            .iter()
            .map(|&s| self.log_coefficient(s).map_or(0.0, |c| c / (2.0 * s)))
            .collect()
    }
}

pub fn predicted_mode_strengths(pred: &DynamicsPrediction, t: f64) -> Vec<f64> {
    (0..pred.sigma.len()).map(|i| pred.strength(i, t)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub loss: f64,
    /// Singular values of `L = WH`, descending (at most d).
    pub logit_singular_values: Vec<f64>,
    /// `‖WWᵀ − UΣA(t)Uᵀ‖_F / ‖UΣA(t)Uᵀ‖_F` against the closed-form trajectory at `t = η·step`.
    pub gram_error_w: f64,
    /// Same for `HᵀH` against `VΣA(t)Vᵀ`.
    pub gram_error_h: f64,
    /// `‖(I − UUᵀ) WH‖_F`
    pub offspace_left: f64,
    /// `‖WH (I − VᵀV)‖_F`
    pub offspace_right: f64,
    /// `‖WH‖_F`
    pub logit_norm: f64,
    /// `u_iᵀ W H v_i / σ_i`
    pub mode_strengths: Vec<f64>,
    /// `u_iᵀ W H v_i`
    pub mode_projections: Vec<f64>,
    pub w_norm: f64,
    pub h_norm: f64,
}

impl Diagnostics {
    pub fn offspace(&self) -> f64 {
        self.offspace_left.max(self.offspace_right)
    }
}

fn inner(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Relative error of `‖MMᵀ − B D Bᵀ‖_F` for orthonormal `B`, via d×d and r×r products only.
fn gram_error(m: ArrayView2<f64>, basis: ArrayView2<f64>, d: &[f64]) -> f64 {
    let mtm = m.t().dot(&m);
    let proj = basis.t().dot(&m);
    let cross: f64 = proj.rows().into_iter().zip(d).map(|(row, di)| di * row.dot(&row)).sum();
    let target: f64 = d.iter().map(|x| x * x).sum();
    let err2 = (inner(&mtm, &mtm) - 2.0 * cross + target).max(0.0);
    if target > 0.0 {
        (err2 / target).sqrt()
    } else {
        err2.sqrt()
    }
}

pub fn diagnostics(state: &UfmState, svd: &SvdResult, objective: &Objective) -> Result<Diagnostics> {
    let (w, h) = (state.w.view(), state.h.view());
    let loss = objective.loss(w, h)?;
    let r = svd.rank();
    let u = svd.u.view();
    let vt = svd.vt.view();

    let (_, rw) = qr_thin(w);
    let (_, rh) = qr_thin(h.t());
    let logit_singular_values = jacobi_svd(rw.dot(&rh.t()).view()).s;

    let wtw = w.t().dot(&w);
    let hht = h.dot(&h.t());
    let logit_norm = inner(&wtw, &hht).max(0.0).sqrt();

    let w_perp = &w - &u.dot(&u.t().dot(&w));
    let h_perp = &h - &h.dot(&vt.t()).dot(&vt);
    let offspace_left = inner(&w_perp.t().dot(&w_perp), &hht).max(0.0).sqrt();
    let offspace_right = inner(&wtw, &h_perp.dot(&h_perp.t())).max(0.0).sqrt();

    let wu = u.t().dot(&w); // r×d, row i = (Wᵀu_i)ᵀ
    let hv = h.dot(&vt.t()); // d×r, column i = H v_i
    let mode_projections: Vec<f64> = (0..r).map(|i| wu.row(i).dot(&hv.column(i))).collect();
    let mode_strengths = mode_projections.iter().zip(&svd.sigma).map(|(p, s)| p / s).collect();

    let pred = DynamicsPrediction::new(svd.sigma.clone(), state.delta);
    let t = state.eta * state.step as f64;
    let target: Vec<f64> = svd.sigma.iter().enumerate().map(|(i, s)| s * pred.strength(i, t)).collect();
    let gram_error_w = gram_error(w, u, &target);
    let gram_error_h = gram_error(h.t(), vt.t(), &target);

    Ok(Diagnostics {
        loss,
        logit_singular_values,
        gram_error_w,
        gram_error_h,
        offspace_left,
        offspace_right,
        logit_norm,
        mode_strengths,
        mode_projections,
        w_norm: frobenius(w),
        h_norm: frobenius(h),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub init: InitKind,
    pub d: usize,
    pub delta: f64,
    /// Defaults to `0.05 / σ₁²`.
    pub eta: Option<f64>,
    pub lambda: f64,
    pub steps: usize,
    pub checkpoint_every: usize,
    pub seed: u64,
    /// Keep `(W, H)` at every checkpoint.
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: usize,
    pub diagnostics: Diagnostics,
    pub snapshot: Option<(Array2<f64>, Array2<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub eta: f64,
    pub checkpoints: Vec<Checkpoint>,
    pub final_state: UfmState,
}

/// One JSON line of an exported trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub loss: f64,
    pub sigma_logits: Vec<f64>,
    pub mode_strengths: Vec<f64>,
    pub offspace: f64,
    #[serde(rename = "gramW_err")]
    pub gram_w_err: f64,
    #[serde(rename = "gramH_err")]
    pub gram_h_err: f64,
}

impl From<&Checkpoint> for TraceRecord {
    fn from(c: &Checkpoint) -> Self {
        let d = &c.diagnostics;
        Self {
            step: c.step,
            loss: d.loss,
            sigma_logits: d.logit_singular_values.clone(),
            mode_strengths: d.mode_strengths.clone(),
            offspace: d.offspace(),
            gram_w_err: d.gram_error_w,
            gram_h_err: d.gram_error_h,
        }
    }
}

/// Run plain gradient descent, recording diagnostics at step 0, every
/// `checkpoint_every` steps and at the final step.
///
/// Aborts with [`Error::Divergence`] when the loss jumps by more than 10× between steps.
pub fn train(svd: &SvdResult, objective: &Objective, cfg: &TrainConfig) -> Result<Trace> {
    if cfg.checkpoint_every == 0 {
        return Err(Error::InvalidConfig("checkpoint_every must be positive".into()));
    }
    let mut state = match cfg.init {
        InitKind::Spectral => spectral_init(svd, cfg.d, cfg.delta, cfg.seed)?,
        InitKind::Random => random_init(svd, cfg.d, cfg.delta, cfg.seed)?,
    };
    state.eta = cfg.eta.unwrap_or(state.eta);
    state.lambda = cfg.lambda;
    if state.eta.is_nan() || state.eta <= 0.0 {
        return Err(Error::InvalidConfig(format!("step size must be positive, got {}", state.eta)));
    }

    let record = |state: &UfmState| -> Result<Checkpoint> {
        Ok(Checkpoint {
            step: state.step,
            diagnostics: diagnostics(state, svd, objective)?,
            snapshot: cfg.snapshots.then(|| (state.w.clone(), state.h.clone())),
        })
    };

    let mut checkpoints = vec![record(&state)?];
    let mut prev_loss: Option<f64> = None;
    let floor = 1e-9 * (1.0 + checkpoints[0].diagnostics.loss);
    for _ in 0..cfg.steps {
        let (next, loss) = gd_step(&state, objective)?;
        if let Some(prev) = prev_loss {
            if loss > 10.0 * prev && loss - prev > floor {
                return Err(Error::Divergence { prev, next: loss });
            }
        }
        prev_loss = Some(loss);
        state = next;
        if state.step % cfg.checkpoint_every == 0 || state.step == cfg.steps {
            checkpoints.push(record(&state)?);
        }
    }
    Ok(Trace {
        eta: state.eta,
        checkpoints,
        final_state: state,
    })
}

/// The square-loss limit `W∞ = U√Σ Rᵀ`, `H∞ = R√Σ Vt` for a partial orthogonal `R`.
pub fn square_loss_limit(svd: &SvdResult, rotation: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    let root: Vec<f64> = svd.sigma.iter().map(|s| s.sqrt()).collect();
    let mut us = svd.u.clone();
    let mut sv = svd.vt.clone();
    for (i, r) in root.iter().enumerate() {
        us.column_mut(i).mapv_inplace(|x| x * r);
        sv.row_mut(i).mapv_inplace(|x| x * r);
    }
    (us.dot(&rotation.t()), rotation.dot(&sv))
}

/// Singular values of `W`, descending.
pub fn embedding_singular_values(w: ArrayView2<f64>) -> Vec<f64> {
    let (_, r) = qr_thin(w);
    jacobi_svd(r.view()).s
}
