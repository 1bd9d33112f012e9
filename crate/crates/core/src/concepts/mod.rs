//! Analyzer vectors and orthant-based clustering.
//!
//! Concept indices are 1-based throughout, so dim `k` refers to the k-th singular pair.

mod kmeans;

pub use kmeans::{kmeans_spectral, KMeansResult};

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SvdResult;

/// Which analyzer vectors to cluster: word (`u_k`) or context (`v_k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Word,
    Context,
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Side::Word),
            "context" => Ok(Side::Context),
            other => Err(Error::InvalidConfig(format!("side must be word or context, got {other:?}"))),
        }
    }
}

/// Word and context analyzer vectors of a (sign-canonicalized) SVD.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptBasis {
    /// V×r, column k−1 is `u_k`.
    pub word_analyzers: Array2<f64>,
    /// r×m, row k−1 is `v_k`.
    pub context_analyzers: Array2<f64>,
    pub sigma: Vec<f64>,
}

impl ConceptBasis {
    pub fn from_svd(svd: &SvdResult) -> Self {
        Self {
            word_analyzers: svd.u.clone(),
            context_analyzers: svd.vt.clone(),
            sigma: svd.sigma.clone(),
        }
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn items(&self, side: Side) -> usize {
        match side {
            Side::Word => self.word_analyzers.nrows(),
            Side::Context => self.context_analyzers.ncols(),
        }
    }

    /// Analyzer vector `k` (1-based) on the given side.
    pub fn analyzer(&self, side: Side, k: usize) -> Result<ArrayView1<'_, f64>> {
        self.check_dim(k)?;
        Ok(match side {
            Side::Word => self.word_analyzers.column(k - 1),
            Side::Context => self.context_analyzers.row(k - 1),
        })
    }

    fn check_dim(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.rank() {
            return Err(Error::UnknownConcept {
                index: k,
                rank: self.rank(),
            });
        }
        Ok(())
    }
}

/// Selected concept dims (1-based) and the required sign on each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignConfiguration {
    dims: Vec<usize>,
    signs: Vec<i8>,
}

impl SignConfiguration {
    pub fn new(dims: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidConfig("at least one dim is required".into()));
        }
        if dims.len() != signs.len() {
            return Err(Error::InvalidConfig(format!(
                "{} dims but {} signs",
                dims.len(),
                signs.len()
            )));
        }
        if let Some(&bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidConfig(format!("sign must be +1 or -1, got {bad}")));
        }
        if let Some(&zero) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::UnknownConcept { index: zero, rank: 0 });
        }
        for (i, d) in dims.iter().enumerate() {
            if dims[..i].contains(d) {
                return Err(Error::DuplicateDim(*d));
            }
        }
        Ok(Self { dims, signs })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Append one more signed dim.
    pub fn extended(&self, dim: usize, sign: i8) -> Result<Self> {
        let mut dims = self.dims.clone();
        let mut signs = self.signs.clone();
        dims.push(dim);
        signs.push(sign);
        Self::new(dims, signs)
    }

    /// All `2^p` sign patterns over `dims`, in binary order with `+1` before `−1`.
    pub fn all_patterns(dims: &[usize]) -> Result<Vec<Self>> {
        let p = dims.len();
        (0..1usize << p)
            .map(|mask| {
                let signs = (0..p).map(|i| if mask >> (p - 1 - i) & 1 == 0 { 1 } else { -1 }).collect();
                Self::new(dims.to_vec(), signs)
            })
            .collect()
    }

    fn validate(&self, basis: &ConceptBasis) -> Result<()> {
        self.dims.iter().try_for_each(|&d| basis.check_dim(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub item: usize,
    pub typicality: f64,
}

/// Items whose coordinates carry the configured sign on every selected dim.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthantCluster {
    pub config: SignConfiguration,
    pub side: Side,
    /// Sorted by typicality descending, ties by item ascending.
    pub members: Vec<Member>,
    /// Items with an exact-zero coordinate on some selected dim.
    pub neutral_excluded: usize,
}

impl OrthantCluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Orthant membership with typicality `Σ_i |u_{k_i}[z]|`.
pub fn orthant_members(basis: &ConceptBasis, cfg: &SignConfiguration, side: Side) -> Result<OrthantCluster> {
    cfg.validate(basis)?;
    let vectors: Vec<ArrayView1<f64>> = cfg.dims.iter().map(|&d| basis.analyzer(side, d)).collect::<Result<_>>()?;
    let mut members = Vec::new();
    let mut neutral = 0;
    for item in 0..basis.items(side) {
        let mut typicality = 0.0;
        let mut matches = true;
        let mut zero = false;
        for (vec, &sign) in vectors.iter().zip(&cfg.signs) {
            let x = vec[item];
            if x == 0.0 {
                zero = true;
                break;
            }
            if (x > 0.0) != (sign > 0) {
                matches = false;
            }
            typicality += x.abs();
        }
        if zero {
            neutral += 1;
        } else if matches {
            members.push(Member { item, typicality });
        }
    }
    sort_members(&mut members);
    Ok(OrthantCluster {
        config: cfg.clone(),
        side,
        members,
        neutral_excluded: neutral,
    })
}

fn sort_members(members: &mut [Member]) {
    members.sort_by(|a, b| b.typicality.total_cmp(&a.typicality).then(a.item.cmp(&b.item)));
}

/// Keep the `n` most typical members.
pub fn top_members(mut cluster: OrthantCluster, n: usize) -> OrthantCluster {
    cluster.members.truncate(n);
    cluster
}

/// Children of a cluster for `next_dim` with sign `+1` and `−1`, in that order.
pub fn hierarchy_expand(
    basis: &ConceptBasis,
    cfg: &SignConfiguration,
    side: Side,
    next_dim: usize,
) -> Result<(OrthantCluster, OrthantCluster)> {
    let plus = orthant_members(basis, &cfg.extended(next_dim, 1)?, side)?;
    let minus = orthant_members(basis, &cfg.extended(next_dim, -1)?, side)?;
    Ok((plus, minus))
}

/// Word-side and context-side d-dimensional representations of concept `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptEmbedding {
    pub k: usize,
    /// `Wᵀ u_k`
    pub word_side: Vec<f64>,
    /// `H v_k`
    pub context_side: Vec<f64>,
    /// `‖word_side − context_side‖ / ‖word_side‖`, zero when both sides vanish.
    pub relative_error: f64,
}

pub fn concept_embedding(w: ArrayView2<f64>, h: ArrayView2<f64>, basis: &ConceptBasis, k: usize) -> Result<ConceptEmbedding> {
    let u = basis.analyzer(Side::Word, k)?;
    let v = basis.analyzer(Side::Context, k)?;
    if w.nrows() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: w.nrows(),
        });
    }
    if h.ncols() != v.len() || h.nrows() != w.ncols() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: h.ncols(),
        });
    }
    let word_side = w.t().dot(&u).to_vec();
    let context_side = h.dot(&v).to_vec();
    let diff: f64 = word_side.iter().zip(&context_side).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = word_side.iter().map(|a| a * a).sum::<f64>().sqrt();
    let relative_error = if scale > 0.0 {
        diff / scale
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ConceptEmbedding {
        k,
        word_side,
        context_side,
        relative_error,
    })
}

/// Exported cluster with item labels, as written by the CLI and served by the API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterExport {
    pub dims: Vec<usize>,
    pub signs: Vec<i8>,
    pub side: Side,
    pub members: Vec<LabeledMember>,
    pub neutral_excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledMember {
    pub token: String,
    pub typicality: f64,
}

/// One entry of a word cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudEntry {
    pub text: String,
    pub weight: f64,
}

impl ClusterExport {
    pub fn new(cluster: &OrthantCluster, labels: &[String]) -> Self {
        Self {
            dims: cluster.config.dims.clone(),
            signs: cluster.config.signs.clone(),
            side: cluster.side,
            members: cluster
                .members
                .iter()
                .map(|m| LabeledMember {
                    token: labels[m.item].clone(),
                    typicality: m.typicality,
                })
                .collect(),
            neutral_excluded: cluster.neutral_excluded,
        }
    }

    pub fn word_cloud(&self) -> Vec<CloudEntry> {
        self.members
            .iter()
            .map(|m| CloudEntry {
                text: m.token.clone(),
                weight: m.typicality,
            })
            .collect()
    }
}

/// Children of an expanded cluster, as served by the API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionExport {
    pub plus: ClusterExport,
    pub minus: ClusterExport,
}

impl ExpansionExport {
    pub fn new(children: &(OrthantCluster, OrthantCluster), labels: &[String]) -> Self {
        Self {
            plus: ClusterExport::new(&children.0, labels),
            minus: ClusterExport::new(&children.1, labels),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loading {
    pub token: String,
    pub value: f64,
}

/// The strongest positive and negative entries of one analyzer vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptView {
    pub k: usize,
    pub side: Side,
    pub sigma: f64,
    /// Largest values first.
    pub positive: Vec<Loading>,
    /// Most negative values first.
    pub negative: Vec<Loading>,
}

/// Up to `top` entries of each sign of analyzer `k`; ties by item index, zeros omitted.
pub fn concept_view(basis: &ConceptBasis, side: Side, k: usize, top: usize, labels: &[String]) -> Result<ConceptView> {
    let vector = basis.analyzer(side, k)?;
    let mut order: Vec<usize> = (0..vector.len()).collect();
    order.sort_by(|&a, &b| vector[b].abs().total_cmp(&vector[a].abs()).then(a.cmp(&b)));
    let pick = |positive: bool| -> Vec<Loading> {
        order
            .iter()
            .filter(|&&i| if positive { vector[i] > 0.0 } else { vector[i] < 0.0 })
            .take(top)
            .map(|&i| Loading {
                token: labels[i].clone(),
                value: vector[i],
            })
            .collect()
    };
    Ok(ConceptView {
        k,
        side,
        sigma: basis.sigma[k - 1],
        positive: pick(true),
        negative: pick(false),
    })
}
