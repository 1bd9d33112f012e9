//! Effective-class confusion matrices over training checkpoints.
//!
//! A context is "predicted as" class `c` by scoring every class support set against the
//! model's next-token distribution. Three rules are available:
//!
//! * [`ClassRule::SupportContrast`] (default): mean log-probability inside `S_c` minus mean
//!   log-probability outside it. A distribution that prefers exactly `S_c` scores highest
//!   for `c`, whether the preference is sharp (CE training) or mild (softmax of square-loss
//!   logits).
//! * [`ClassRule::KlToUniform`]: `argmin_c KL(uniform(S_c) ‖ p)`.
//! * [`ClassRule::MeanLogProb`]: `argmax_c mean_{z∈S_c} log p_z`, i.e. the KL rule without
//!   its `log |S_c|` term.
//!
//! Scores within `tie_tol` of the best are ties and go to the smallest class index.

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::EffectiveClassSet;
use crate::ufm::Trace;

pub const PROB_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassRule {
    SupportContrast,
    KlToUniform,
    MeanLogProb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAssignment {
    pub rule: ClassRule,
    pub tie_tol: f64,
}

impl Default for ClassAssignment {
    fn default() -> Self {
        Self {
            rule: ClassRule::SupportContrast,
            tie_tol: 1e-3,
        }
    }
}

impl ClassAssignment {
    /// Score of every class for a probability vector (higher is better).
    pub fn scores(&self, probs: &[f64], classes: &EffectiveClassSet) -> Vec<f64> {
        let logs: Vec<f64> = probs.iter().map(|p| p.max(PROB_FLOOR).ln()).collect();
        let total: f64 = logs.iter().sum();
        let v = probs.len();
        classes
            .classes
            .iter()
            .map(|support| {
                let inside: f64 = support.iter().map(|&z| logs[z as usize]).sum();
                let n = support.len() as f64;
                let mean_in = inside / n;
                match self.rule {
                    ClassRule::MeanLogProb => mean_in,
                    ClassRule::KlToUniform => mean_in + n.ln(),
                    ClassRule::SupportContrast => {
                        let rest = v - support.len();
                        let mean_out = if rest == 0 {
                            mean_in
                        } else {
                            (total - inside) / rest as f64
                        };
                        mean_in - mean_out
                    }
                }
            })
            .collect()
    }

    fn pick(&self, scores: &[f64]) -> usize {
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        scores.iter().position(|&s| s >= best - self.tie_tol).unwrap_or(0)
    }
}

/// Class assigned to one next-token distribution.
pub fn predict_class(probs: &[f64], classes: &EffectiveClassSet, assignment: &ClassAssignment) -> Result<usize> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidDistribution("negative or non-finite probability".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    if let Some(&z) = classes.classes.iter().flatten().find(|&&z| z as usize >= probs.len()) {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            got: z as usize + 1,
        });
    }
    Ok(assignment.pick(&assignment.scores(probs, classes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub step: usize,
    /// `counts[a][b]`: contexts of true class `a` predicted as class `b`.
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn class_accuracy(&self) -> Vec<f64> {
        self.counts
            .iter()
            .enumerate()
            .map(|(a, row)| {
                let n: usize = row.iter().sum();
                if n == 0 {
                    0.0
                } else {
                    row[a] as f64 / n as f64
                }
            })
            .collect()
    }

    /// Smallest, over groups, fraction of a group's contexts predicted into that group.
    pub fn group_accuracy(&self, groups: &[Vec<usize>]) -> f64 {
        groups
            .iter()
            .map(|g| {
                let total: usize = g.iter().map(|&a| self.counts[a].iter().sum::<usize>()).sum();
                let hit: usize = g.iter().map(|&a| g.iter().map(|&b| self.counts[a][b]).sum::<usize>()).sum();
                if total == 0 {
                    1.0
                } else {
                    hit as f64 / total as f64
                }
            })
            .fold(1.0, f64::min)
    }
}

fn softmax_column(logits: ArrayView2<f64>, j: usize) -> Vec<f64> {
    let col = logits.column(j);
    let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = col.iter().map(|&l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Confusion matrix of the model `(W, H)`: softmax over the logits of every context, then
/// class assignment.
pub fn confusion_matrix(
    w: ArrayView2<f64>,
    h: ArrayView2<f64>,
    classes: &EffectiveClassSet,
    assignment: &ClassAssignment,
    step: usize,
) -> Result<ConfusionMatrix> {
    if h.ncols() != classes.class_of.len() {
        return Err(Error::DimensionMismatch {
            expected: classes.class_of.len(),
            got: h.ncols(),
        });
    }
    let logits = w.dot(&h);
    let predicted: Vec<usize> = (0..logits.ncols())
        .into_par_iter()
        .map(|j| predict_class(&softmax_column(logits.view(), j), classes, assignment))
        .collect::<Result<_>>()?;
    let c = classes.len();
    let mut counts = vec![vec![0; c]; c];
    for (&truth, &pred) in classes.class_of.iter().zip(&predicted) {
        counts[truth][pred] += 1;
    }
    Ok(ConfusionMatrix { step, counts })
}

/// Per-class accuracy over checkpoints with the first step reaching ½.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergenceReport {
    pub classes: Vec<Vec<u32>>,
    pub class_sizes: Vec<usize>,
    pub assignment: ClassAssignment,
    pub steps: Vec<usize>,
    /// `accuracy[c][t]` for class `c` at checkpoint `t`.
    pub accuracy: Vec<Vec<f64>>,
    pub crossing: Vec<Option<usize>>,
    pub confusions: Vec<ConfusionMatrix>,
}

impl EmergenceReport {
    /// First checkpoint step at which every group keeps at least half of its contexts
    /// inside the group, i.e. the model has learned to tell the groups apart.
    pub fn distinction_crossing(&self, groups: &[Vec<usize>]) -> Option<usize> {
        self.confusions.iter().find(|c| c.group_accuracy(groups) >= 0.5).map(|c| c.step)
    }
}

pub fn emergence_trace(trace: &Trace, classes: &EffectiveClassSet, assignment: &ClassAssignment) -> Result<EmergenceReport> {
    let snapshots = trace
        .checkpoints
        .iter()
        .map(|cp| {
            let (w, h) = cp
                .snapshot
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("trace has no snapshots".into()))?;
            Ok((cp.step, w.view(), h.view()))
        })
        .collect::<Result<Vec<_>>>()?;
    emergence_from_snapshots(&snapshots, classes, assignment)
}

/// Emergence report from `(step, W, H)` snapshots in step order.
pub fn emergence_from_snapshots(
    snapshots: &[(usize, ArrayView2<f64>, ArrayView2<f64>)],
    classes: &EffectiveClassSet,
    assignment: &ClassAssignment,
) -> Result<EmergenceReport> {
    let confusions = snapshots
        .iter()
        .map(|(step, w, h)| confusion_matrix(*w, *h, classes, assignment, *step))
        .collect::<Result<Vec<_>>>()?;
    let steps: Vec<usize> = confusions.iter().map(|c| c.step).collect();
    let per_checkpoint: Vec<Vec<f64>> = confusions.iter().map(ConfusionMatrix::class_accuracy).collect();
    let accuracy: Vec<Vec<f64>> = (0..classes.len()).map(|c| per_checkpoint.iter().map(|a| a[c]).collect()).collect();
    let crossing = accuracy
        .iter()
        .map(|series| series.iter().position(|&a| a >= 0.5).map(|t| steps[t]))
        .collect();
    Ok(EmergenceReport {
        classes: classes.classes.clone(),
        class_sizes: classes.sizes.clone(),
        assignment: *assignment,
        steps,
        accuracy,
        crossing,
        confusions,
    })
}
