//! Synthetic data with known structure.

mod onehot;
mod organism;
mod stories;

pub use onehot::{
    analytic_left_vectors, analytic_onehot_spectrum, dct_basis, imbalanced_onehot, verify_onehot, AnalyticSpectrum,
    OneHotReport, OneHotSpec, Tier,
};
pub use organism::{canonical_text, organism_dataset, OrganismDataset, GROUPS, SUBJECTS};
pub use stories::generate_stories;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::matrix::SupportMatrix;

/// Random binary support matrix: every column draws a uniform support size in
/// `1..=max_support` and then a uniform subset of that size.
pub fn random_support(v: usize, m: usize, max_support: usize, seed: u64) -> Result<SupportMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_support = max_support.clamp(1, v);
    let columns = (0..m)
        .map(|_| {
            let size = rng.random_range(1..=max_support);
            let mut col: Vec<u32> = sample(&mut rng, v, size).into_iter().map(|z| z as u32).collect();
            col.sort_unstable();
            col
        })
        .collect();
    SupportMatrix::new(v, columns)
}

/// Few effective classes, each repeated many times: class `c` gets a random support of size
/// in `support_sizes` and `replication[c]` identical columns. Replication concentrates the
/// spectrum, giving well-separated singular values.
pub fn clustered_support(
    v: usize,
    replication: &[usize],
    support_sizes: std::ops::Range<usize>,
    seed: u64,
) -> Result<SupportMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = Vec::new();
    for &count in replication {
        let size = rng.random_range(support_sizes.clone()).clamp(1, v);
        let mut col: Vec<u32> = sample(&mut rng, v, size).into_iter().map(|z| z as u32).collect();
        col.sort_unstable();
        columns.extend(std::iter::repeat_n(col, count));
    }
    SupportMatrix::new(v, columns)
}
