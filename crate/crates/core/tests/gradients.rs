//! Analytic gradients against central finite differences of an independently written loss.

use ndarray::Array2;
use ntpgeo_core::corpus::SoftLabelMatrix;
use ntpgeo_core::linalg::gaussian_matrix;
use ntpgeo_core::matrix::{support_of, CenteredOperator};
use ntpgeo_core::ufm::Objective;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const V: usize = 5;
const M: usize = 4;
const D: usize = 3;

fn labels() -> SoftLabelMatrix {
    SoftLabelMatrix::new(
        V,
        vec![
            vec![(0, 0.5), (3, 0.5)],
            vec![(1, 1.0)],
            vec![(0, 0.2), (2, 0.3), (4, 0.5)],
            vec![(1, 0.25), (2, 0.25), (3, 0.25), (4, 0.25)],
        ],
    )
    .unwrap()
}

fn dense_square_loss(p: &SoftLabelMatrix, w: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let l = w.dot(h);
    let mut total = 0.0;
    for j in 0..M {
        let col = p.column(j);
        let c = col.len() as f64 / V as f64;
        for z in 0..V {
            let s = if col.iter().any(|&(y, _)| y as usize == z) { 1.0 } else { 0.0 };
            total += (s - c - l[[z, j]]).powi(2);
        }
    }
    0.5 * total
}

fn dense_ce_loss(p: &SoftLabelMatrix, lambda: f64, w: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let l = w.dot(h);
    let mut total = 0.0;
    for j in 0..M {
        let z: f64 = (0..V).map(|y| l[[y, j]].exp()).sum();
        for &(y, prob) in p.column(j) {
            total -= prob * (l[[y as usize, j]].exp() / z).ln();
        }
    }
    let ridge: f64 = w.iter().chain(h.iter()).map(|x| x * x).sum();
    total / M as f64 + lambda * ridge
}

fn check(objective: &Objective, oracle: impl Fn(&Array2<f64>, &Array2<f64>) -> f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = gaussian_matrix(V, D, &mut rng);
    let h = gaussian_matrix(D, M, &mut rng);
    let g = objective.gradient(w.view(), h.view()).unwrap();
    let loss = oracle(&w, &h);
    assert!((g.loss - loss).abs() <= 1e-12 * (1.0 + loss), "loss {} vs {loss}", g.loss);

    let eps = 1e-5;
    let mut fd_w = Array2::zeros((V, D));
    for idx in ndarray::indices((V, D)) {
        let (mut plus, mut minus) = (w.clone(), w.clone());
        plus[idx] += eps;
        minus[idx] -= eps;
        fd_w[idx] = (oracle(&plus, &h) - oracle(&minus, &h)) / (2.0 * eps);
    }
    let mut fd_h = Array2::zeros((D, M));
    for idx in ndarray::indices((D, M)) {
        let (mut plus, mut minus) = (h.clone(), h.clone());
        plus[idx] += eps;
        minus[idx] -= eps;
        fd_h[idx] = (oracle(&w, &plus) - oracle(&w, &minus)) / (2.0 * eps);
    }
    for (analytic, numeric) in [(&g.grad_w, &fd_w), (&g.grad_h, &fd_h)] {
        let diff: f64 = (analytic - numeric).iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale: f64 = numeric.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(diff <= 1e-5 * scale, "relative gradient error {}", diff / scale);
    }
}

#[test]
fn square_loss_gradient() {
    let p = labels();
    let s = support_of(&p);
    let objective = Objective::Square(CenteredOperator::new(&s));
    for seed in 0..5 {
        check(&objective, |w, h| dense_square_loss(&p, w, h), seed);
    }
}

#[test]
fn ce_loss_gradient() {
    let p = labels();
    for (seed, lambda) in [(0, 0.0), (1, 0.0), (2, 1e-3), (3, 0.1)] {
        let objective = Objective::Ce { labels: &p, lambda };
        check(&objective, |w, h| dense_ce_loss(&p, lambda, w, h), seed);
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    let p = labels();
    let objective = Objective::Ce { labels: &p, lambda: 0.0 };
    let w = Array2::zeros((V + 1, D));
    let h = Array2::zeros((D, M));
    assert!(objective.gradient(w.view(), h.view()).is_err());
}
