use ndarray::Array2;
use ntpgeo_core::evald::{confusion_matrix, emergence_trace, predict_class, ClassAssignment, ClassRule};
use ntpgeo_core::matrix::{effective_classes, support_of, CenteredOperator, EffectiveClassSet, SupportMatrix};
use ntpgeo_core::spectral::truncated_svd;
use ntpgeo_core::synth::{imbalanced_onehot, organism_dataset, random_support, OneHotSpec};
use ntpgeo_core::ufm::{train, InitKind, LossKind, Objective, TrainConfig};
use proptest::prelude::*;

fn normalized(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// `KL(uniform(S) ‖ p)` summed term by term.
fn kl_uniform(support: &[u32], p: &[f64]) -> f64 {
    let q = 1.0 / support.len() as f64;
    support.iter().map(|&z| q * (q / p[z as usize].max(1e-30)).ln()).sum()
}

fn classes_from(supports: Vec<Vec<u32>>) -> EffectiveClassSet {
    effective_classes(&SupportMatrix::new(6, supports).unwrap())
}

proptest! {
    #[test]
    fn kl_rule_minimizes_the_divergence(weights in proptest::collection::vec(0.01f64..1.0, 6), seed in 0u64..500) {
        let p = normalized(&weights);
        let s = random_support(6, 8, 4, seed).unwrap();
        let ec = effective_classes(&s);
        let rule = ClassAssignment { rule: ClassRule::KlToUniform, tie_tol: 0.0 };
        let got = predict_class(&p, &ec, &rule).unwrap();
        let kls: Vec<f64> = ec.classes.iter().map(|c| kl_uniform(c, &p)).collect();
        let best = kls.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(kls[got] <= best + 1e-12);
        prop_assert!(kls[..got].iter().all(|&k| k > best + 1e-12));
    }

    #[test]
    fn confusion_rows_conserve_class_sizes(seed in 0u64..500, d in 1usize..4) {
        let s = random_support(6, 12, 3, seed).unwrap();
        let ec = effective_classes(&s);
        let w = Array2::from_shape_fn((6, d), |(z, i)| ((z * 7 + i * 3 + seed as usize) % 5) as f64 - 2.0);
        let h = Array2::from_shape_fn((d, 12), |(i, j)| ((i * 11 + j * 5) % 7) as f64 / 3.0 - 1.0);
        let cm = confusion_matrix(w.view(), h.view(), &ec, &ClassAssignment::default(), 0).unwrap();
        for (row, &size) in cm.counts.iter().zip(&ec.sizes) {
            prop_assert_eq!(row.iter().sum::<usize>(), size);
        }
    }
}

#[test]
fn contrast_rule_prefers_the_emphasized_support() {
    let ec = classes_from(vec![vec![0, 1], vec![0, 1, 2, 3], vec![4]]);
    let p = normalized(&[2.0, 2.0, 1.0, 1.0, 1.0, 1.0]);
    assert_eq!(predict_class(&p, &ec, &ClassAssignment::default()).unwrap(), 0);
    let mean_rule = ClassAssignment { rule: ClassRule::MeanLogProb, tie_tol: 0.0 };
    assert_eq!(predict_class(&p, &ec, &mean_rule).unwrap(), 0);
}

#[test]
fn single_class_is_always_correct() {
    let s = SupportMatrix::new(5, vec![vec![1, 3]; 7]).unwrap();
    let op = CenteredOperator::new(&s);
    let svd = truncated_svd(&op, 1, 1e-10, None, 0).unwrap();
    let cfg = TrainConfig {
        loss: LossKind::Square,
        init: InitKind::Random,
        d: 2,
        delta: 4.0,
        eta: None,
        lambda: 0.0,
        steps: 10,
        checkpoint_every: 5,
        seed: 0,
        snapshots: true,
    };
    let trace = train(&svd, &Objective::Square(op), &cfg).unwrap();
    let report = emergence_trace(&trace, &effective_classes(&s), &ClassAssignment::default()).unwrap();
    assert_eq!(report.steps, vec![0, 5, 10]);
    assert_eq!(report.accuracy, vec![vec![1.0; 3]]);
    assert_eq!(report.crossing, vec![Some(0)]);
}

#[test]
fn traces_without_snapshots_are_rejected() {
    let s = SupportMatrix::new(3, vec![vec![0], vec![1]]).unwrap();
    let op = CenteredOperator::new(&s);
    let svd = truncated_svd(&op, 2, 1e-10, None, 0).unwrap();
    let cfg = TrainConfig {
        loss: LossKind::Square,
        init: InitKind::Random,
        d: 2,
        delta: 4.0,
        eta: None,
        lambda: 0.0,
        steps: 2,
        checkpoint_every: 1,
        seed: 0,
        snapshots: false,
    };
    let trace = train(&svd, &Objective::Square(op), &cfg).unwrap();
    assert!(emergence_trace(&trace, &effective_classes(&s), &ClassAssignment::default()).is_err());
}

fn crossings(s: &SupportMatrix, steps: usize, seed: u64, groups: &[Vec<Vec<usize>>]) -> Vec<usize> {
    let op = CenteredOperator::new(s);
    let svd = truncated_svd(&op, (s.nrows() - 1).min(s.ncols()), 1e-10, None, 0).unwrap();
    let cfg = TrainConfig {
        loss: LossKind::Square,
        init: InitKind::Random,
        d: 8,
        delta: 8.0,
        eta: None,
        lambda: 0.0,
        steps,
        checkpoint_every: 20,
        seed,
        snapshots: true,
    };
    let trace = train(&svd, &Objective::Square(op), &cfg).unwrap();
    let report = emergence_trace(&trace, &effective_classes(s), &ClassAssignment::default()).unwrap();
    groups.iter().map(|g| report.distinction_crossing(g).expect("distinction never learned")).collect()
}

#[test]
fn onehot_majorities_are_distinguished_first() {
    let spec = OneHotSpec::new(4, 10.0, 10).unwrap();
    let (s, _) = imbalanced_onehot(&spec).unwrap();
    let groups = [vec![vec![0], vec![1]], vec![vec![0, 1], vec![2, 3]], vec![vec![2], vec![3]]];
    let t = crossings(&s, 8000, 0, &groups);
    assert!(t[0] <= t[1] && t[1] <= t[2], "{t:?}");
}

#[test]
fn organism_kingdoms_are_distinguished_first() {
    let s = support_of(&organism_dataset().labels);
    let groups = [
        vec![vec![0, 7, 8], vec![1, 2, 3, 4, 5, 6]],
        vec![vec![2, 3, 4], vec![5, 6]],
        vec![vec![3], vec![4]],
        vec![vec![7], vec![8]],
    ];
    let t = crossings(&s, 6000, 1, &groups);
    assert!(t[1..].iter().all(|&x| t[0] <= x), "{t:?}");
}
