use ndarray::Array2;
use ntpgeo_core::io;
use ntpgeo_core::matrix::{effective_classes, CenteredOperator, LinearOperator, SupportMatrix};
use proptest::prelude::*;

fn support_strategy() -> impl Strategy<Value = SupportMatrix> {
    (2usize..12, 1usize..10).prop_flat_map(|(v, m)| {
        let col = proptest::collection::btree_set(0..v as u32, 1..=v).prop_map(|s| s.into_iter().collect::<Vec<_>>());
        proptest::collection::vec(col, m).prop_map(move |cols| SupportMatrix::new(v, cols).unwrap())
    })
}

/// Dense `S − (1/V) 1 cᵀ` built entry by entry.
fn dense_centered(s: &SupportMatrix) -> Array2<f64> {
    let v = s.nrows();
    let mut out = Array2::zeros((v, s.ncols()));
    for (j, col) in s.columns().iter().enumerate() {
        for z in 0..v {
            let hit = if col.contains(&(z as u32)) { 1.0 } else { 0.0 };
            out[[z, j]] = hit - col.len() as f64 / v as f64;
        }
    }
    out
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + y.abs()))
}

proptest! {
    #[test]
    fn matvecs_match_dense(s in support_strategy(), seed in 0u64..1000) {
        let op = CenteredOperator::new(&s);
        let dense = dense_centered(&s);
        let x: Vec<f64> = (0..s.ncols()).map(|j| ((j as u64 * 7 + seed) % 11) as f64 - 5.0).collect();
        let y: Vec<f64> = (0..s.nrows()).map(|z| ((z as u64 * 3 + seed) % 13) as f64 / 4.0 - 1.0).collect();
        let expect = dense.dot(&ndarray::arr1(&x));
        prop_assert!(close(&op.centered_matvec(&x).unwrap(), expect.as_slice().unwrap()));
        let expect = dense.t().dot(&ndarray::arr1(&y));
        prop_assert!(close(&op.centered_rmatvec(&y).unwrap(), expect.as_slice().unwrap()));
    }

    #[test]
    fn columns_of_the_centered_matrix_sum_to_zero(s in support_strategy()) {
        let op = CenteredOperator::new(&s);
        let ones = vec![1.0; s.nrows()];
        let mut out = vec![0.0; s.ncols()];
        op.apply_transpose(&ones, &mut out);
        prop_assert!(out.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn batched_products_match_dense(s in support_strategy(), d in 1usize..4) {
        let op = CenteredOperator::new(&s);
        let dense = dense_centered(&s);
        let h = Array2::from_shape_fn((d, s.ncols()), |(i, j)| (i as f64 + 1.0) * (j as f64 - 1.5));
        let w = Array2::from_shape_fn((s.nrows(), d), |(z, i)| ((z * 5 + i) % 7) as f64 - 3.0);
        let sht = op.mul_transposed(h.view()).unwrap();
        let wts = op.transpose_mul(w.view()).unwrap();
        prop_assert!(close(&sht.iter().copied().collect::<Vec<_>>(), &dense.dot(&h.t()).iter().copied().collect::<Vec<_>>()));
        prop_assert!(close(&wts.iter().copied().collect::<Vec<_>>(), &w.t().dot(&dense).iter().copied().collect::<Vec<_>>()));
    }

    #[test]
    fn frobenius_matches_dense(s in support_strategy()) {
        let dense = dense_centered(&s);
        let expect: f64 = dense.iter().map(|x| x * x).sum();
        prop_assert!((CenteredOperator::new(&s).frobenius_sq() - expect).abs() <= 1e-10 * (1.0 + expect));
    }

    #[test]
    fn effective_classes_partition_the_contexts(s in support_strategy()) {
        let ec = effective_classes(&s);
        prop_assert_eq!(ec.sizes.iter().sum::<usize>(), s.ncols());
        for (j, &c) in ec.class_of.iter().enumerate() {
            prop_assert_eq!(&ec.classes[c], &s.columns()[j]);
        }
        for a in 0..ec.len() {
            for b in 0..a {
                prop_assert_ne!(&ec.classes[a], &ec.classes[b]);
            }
        }
    }

    #[test]
    fn support_file_round_trip(s in support_strategy()) {
        let mut buf = Vec::new();
        io::write_support(&s, &mut buf).unwrap();
        prop_assert_eq!(buf.len(), 13 + 4 * s.ncols() + 4 * s.nnz());
        prop_assert_eq!(io::read_support(&mut buf.as_slice()).unwrap(), s);
    }
}

#[test]
fn operator_rejects_wrong_lengths() {
    let s = SupportMatrix::new(3, vec![vec![0], vec![1, 2]]).unwrap();
    let op = CenteredOperator::new(&s);
    assert!(op.centered_matvec(&[1.0]).is_err());
    assert!(op.centered_rmatvec(&[1.0, 2.0]).is_err());
}

#[test]
fn support_matrix_validation() {
    assert!(SupportMatrix::new(3, vec![vec![]]).is_err());
    assert!(SupportMatrix::new(3, vec![vec![3]]).is_err());
    assert!(SupportMatrix::new(3, vec![vec![1, 1]]).is_err());
}
