//! Imbalanced one-hot classes: V/2 majority classes with R·n_min samples each and V/2
//! minority classes with n_min samples each.
//!
//! `S̃S̃ᵀ = P D P` with `P` the centering projector and `D = diag(class counts)`, so the
//! spectrum of `S̃ / √n_min` is `√R` on zero-sum majority vectors, `1` on zero-sum minority
//! vectors and `√((R+1)/2)` on the block-constant vector. Dividing by `√n_min` is the
//! normalization under which the tiers are stated.

use std::f64::consts::PI;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::corpus::SoftLabelMatrix;
use crate::error::{Error, Result};
use crate::linalg::max_principal_angle;
use crate::matrix::SupportMatrix;
use crate::spectral::SvdResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneHotSpec {
    #[serde(rename = "V")]
    pub v: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub n_min: usize,
}

impl OneHotSpec {
    pub fn new(v: usize, r: f64, n_min: usize) -> Result<Self> {
        if v < 2 || !v.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("V must be even and at least 2, got {v}")));
        }
        if !r.is_finite() || r < 1.0 {
            return Err(Error::InvalidConfig(format!("imbalance ratio must be at least 1, got {r}")));
        }
        if n_min == 0 {
            return Err(Error::InvalidConfig("n_min must be positive".into()));
        }
        let majority = r * n_min as f64;
        if (majority - majority.round()).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("R·n_min = {majority} is not an integer")));
        }
        Ok(Self { v, r, n_min })
    }

    pub fn majority_count(&self) -> usize {
        (self.r * self.n_min as f64).round() as usize
    }

    /// Samples of class `c`; classes `0..V/2` are the majorities.
    pub fn class_count(&self, c: usize) -> usize {
        if c < self.v / 2 {
            self.majority_count()
        } else {
            self.n_min
        }
    }

    pub fn contexts(&self) -> usize {
        (0..self.v).map(|c| self.class_count(c)).sum()
    }

    /// Factor that maps singular values of `S̃` onto the tier values.
    pub fn normalization(&self) -> f64 {
        (self.n_min as f64).sqrt()
    }
}

/// Contexts are laid out class by class, majorities first.
pub fn imbalanced_onehot(spec: &OneHotSpec) -> Result<(SupportMatrix, SoftLabelMatrix)> {
    let labels: Vec<u32> = (0..spec.v)
        .flat_map(|c| std::iter::repeat_n(c as u32, spec.class_count(c)))
        .collect();
    let support = SupportMatrix::new(spec.v, labels.iter().map(|&z| vec![z]).collect())?;
    let soft = SoftLabelMatrix::one_hot(spec.v, &labels)?;
    Ok((support, soft))
}

/// Orthonormal (V/2)×(V/2−1) DCT basis of the zero-sum subspace:
/// `F[i,j] = √(4/V) cos(π(2i−1)j/V)` for `i = 1..V/2`, `j = 1..V/2−1`.
pub fn dct_basis(v: usize) -> Array2<f64> {
    let half = v / 2;
    let scale = (4.0 / v as f64).sqrt();
    Array2::from_shape_fn((half, half.saturating_sub(1)), |(i, j)| {
        let (i, j) = ((i + 1) as f64, (j + 1) as f64);
        scale * (PI * (2.0 * i - 1.0) * j / v as f64).cos()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tier {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpectrum {
    /// Top, middle and bottom tier, in units of `√n_min`.
    pub tiers: [Tier; 3],
    pub normalization: f64,
}

impl AnalyticSpectrum {
    /// Tier values repeated by multiplicity, descending.
    pub fn expanded(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .tiers
            .iter()
            .flat_map(|t| std::iter::repeat_n(t.value, t.multiplicity))
            .collect();
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }
}

pub fn analytic_onehot_spectrum(spec: &OneHotSpec) -> AnalyticSpectrum {
    let half = spec.v / 2;
    AnalyticSpectrum {
        tiers: [
            Tier {
                value: spec.r.sqrt(),
                multiplicity: half - 1,
            },
            Tier {
                value: ((spec.r + 1.0) / 2.0).sqrt(),
                multiplicity: 1,
            },
            Tier {
                value: 1.0,
                multiplicity: half - 1,
            },
        ],
        normalization: spec.normalization(),
    }
}

/// Analytic left singular vectors: `[F; 0]`, the block vector `[−1; +1]/√V`, then `[0; F]`.
pub fn analytic_left_vectors(v: usize) -> Array2<f64> {
    let half = v / 2;
    let f = dct_basis(v);
    let mut u = Array2::zeros((v, v - 1));
    u.slice_mut(s![..half, ..half - 1]).assign(&f);
    let c = (1.0 / v as f64).sqrt();
    for z in 0..v {
        u[[z, half - 1]] = if z < half { -c } else { c };
    }
    u.slice_mut(s![half.., half..]).assign(&f);
    u
}

/// Outcome of comparing a computed SVD with the analytic one-hot structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneHotReport {
    pub spec: OneHotSpec,
    pub normalization: f64,
    pub expected: Vec<f64>,
    /// Computed singular values divided by the normalization.
    pub computed: Vec<f64>,
    pub sigma_error: f64,
    pub sigma_pass: bool,
    /// Largest row norm of the top-tier left subspace on minority coordinates.
    pub top_minority_leak: Option<f64>,
    /// Largest row norm of the bottom-tier left subspace on majority coordinates.
    pub bottom_majority_leak: Option<f64>,
    /// Largest principal angle between computed tier subspaces and the DCT blocks.
    pub tier_angle: Option<f64>,
    pub subspace_pass: Option<bool>,
    /// Max deviation of the middle vector from `∓√(1/V)` (up to global sign).
    pub middle_error: Option<f64>,
    pub middle_pass: Option<bool>,
    pub tolerance: f64,
}

impl OneHotReport {
    pub fn passed(&self) -> bool {
        self.sigma_pass && self.subspace_pass.unwrap_or(true) && self.middle_pass.unwrap_or(true)
    }
}

fn max_row_norm(block: ndarray::ArrayView2<f64>) -> f64 {
    block.rows().into_iter().map(|r| r.dot(&r).sqrt()).fold(0.0, f64::max)
}

/// Check the three-tier spectrum, the block sparsity of the tier subspaces and the middle
/// vector. With `R = 1` the spectrum is a single degenerate tier, so only the singular
/// values are checked.
pub fn verify_onehot(spec: &OneHotSpec, svd: &SvdResult, tolerance: f64) -> OneHotReport {
    let analytic = analytic_onehot_spectrum(spec);
    let expected = analytic.expanded();
    let norm = analytic.normalization;
    let computed: Vec<f64> = svd.sigma.iter().map(|s| s / norm).collect();
    let sigma_error = if computed.len() == expected.len() {
        computed.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let mut report = OneHotReport {
        spec: *spec,
        normalization: norm,
        expected,
        computed,
        sigma_error,
        sigma_pass: sigma_error <= tolerance,
        top_minority_leak: None,
        bottom_majority_leak: None,
        tier_angle: None,
        subspace_pass: None,
        middle_error: None,
        middle_pass: None,
        tolerance,
    };
    let half = spec.v / 2;
    if spec.r == 1.0 || svd.rank() != spec.v - 1 || svd.nrows() != spec.v {
        return report;
    }

    let u = svd.u.view();
    let top = u.slice(s![.., ..half - 1]);
    let bottom = u.slice(s![.., half..]);
    let top_leak = max_row_norm(top.slice(s![half.., ..]));
    let bottom_leak = max_row_norm(bottom.slice(s![..half, ..]));
    let analytic_u = analytic_left_vectors(spec.v);
    let angle = if half > 1 {
        max_principal_angle(top, analytic_u.slice(s![.., ..half - 1]))
            .max(max_principal_angle(bottom, analytic_u.slice(s![.., half..])))
    } else {
        0.0
    };
    report.top_minority_leak = Some(top_leak);
    report.bottom_majority_leak = Some(bottom_leak);
    report.tier_angle = Some(angle);
    report.subspace_pass = Some(top_leak <= tolerance && bottom_leak <= tolerance);

    let middle = u.column(half - 1);
    let sign = if middle[0] < 0.0 { 1.0 } else { -1.0 };
    let c = (1.0 / spec.v as f64).sqrt();
    let middle_error = middle
        .iter()
        .enumerate()
        .map(|(z, &x)| {
            let target = if z < half { -c } else { c };
            (sign * x - target).abs()
        })
        .fold(0.0, f64::max);
    report.middle_error = Some(middle_error);
    report.middle_pass = Some(middle_error <= tolerance);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_error;

    #[test]
    fn sample_counts() {
        let spec = OneHotSpec::new(4, 10.0, 10).unwrap();
        assert_eq!(spec.contexts(), 220);
        let (s, p) = imbalanced_onehot(&spec).unwrap();
        let sizes: Vec<usize> = (0..4).map(|z| s.columns().iter().filter(|c| c[0] == z).count()).collect();
        assert_eq!(sizes, vec![100, 100, 10, 10]);
        assert!(p.columns().iter().all(|c| c.len() == 1 && c[0].1 == 1.0));
    }

    #[test]
    fn spec_validation() {
        assert!(OneHotSpec::new(5, 2.0, 3).is_err());
        assert!(OneHotSpec::new(0, 2.0, 3).is_err());
        assert!(OneHotSpec::new(4, 2.5, 3).is_err());
        assert!(OneHotSpec::new(4, 2.5, 2).is_ok());
        assert!(OneHotSpec::new(4, 0.5, 2).is_err());
    }

    #[test]
    fn tier_values() {
        let t = analytic_onehot_spectrum(&OneHotSpec::new(4, 10.0, 10).unwrap()).tiers;
        assert!((t[0].value - 3.16228).abs() < 1e-5);
        assert!((t[1].value - 2.34521).abs() < 1e-5);
        assert_eq!(t[2].value, 1.0);
        let t = analytic_onehot_spectrum(&OneHotSpec::new(6, 4.0, 1).unwrap()).tiers;
        assert_eq!(t.map(|x| x.multiplicity), [2, 1, 2]);
        assert_eq!(t[0].value, 2.0);
        assert_eq!(t[1].value, 2.5f64.sqrt());
        let flat = analytic_onehot_spectrum(&OneHotSpec::new(8, 1.0, 3).unwrap());
        assert!(flat.tiers.iter().all(|x| x.value == 1.0));
        let two = analytic_onehot_spectrum(&OneHotSpec::new(2, 3.0, 1).unwrap());
        assert_eq!(two.expanded(), vec![2.0f64.sqrt()]);
    }

    #[test]
    fn dct_is_orthonormal_and_zero_sum() {
        for v in [4, 6, 8, 12] {
            let f = dct_basis(v);
            assert!(orthonormality_error(f.view()) < 1e-14);
            for col in f.columns() {
                assert!(col.sum().abs() < 1e-14);
            }
            assert!(orthonormality_error(analytic_left_vectors(v).view()) < 1e-14);
        }
    }
}
