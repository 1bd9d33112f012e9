use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use ntpgeo_core::concepts::{
    concept_view, hierarchy_expand, orthant_members, top_members, ClusterExport, ConceptBasis, ConceptView,
    ExpansionExport, Side, SignConfiguration,
};
use ntpgeo_core::corpus::Vocabulary;
use ntpgeo_core::evald::EmergenceReport;
use ntpgeo_core::io::{read_svd, read_vocab, SvdHeader};
use ntpgeo_core::spectral::SvdResult;
use serde::{Deserialize, Serialize};

/// Largest `top` a request may ask for.
pub const MAX_TOP: usize = 10_000;

const DEFAULT_TOP: usize = 40;

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("cannot load bundle: {0}")]
    Load(String),
    #[error(transparent)]
    Core(#[from] ntpgeo_core::Error),
    #[error("top = {0} exceeds the limit of {MAX_TOP}")]
    TopTooLarge(usize),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
}

type Result<T> = std::result::Result<T, SessionError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(rename = "V")]
    pub v: usize,
    pub m: usize,
    pub r: usize,
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrthantRequest {
    pub dims: Vec<usize>,
    pub signs: Vec<i8>,
    #[serde(default = "default_side")]
    pub side: Side,
    #[serde(default = "default_top")]
    pub top: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandRequest {
    pub dims: Vec<usize>,
    pub signs: Vec<i8>,
    pub next_dim: usize,
    #[serde(default = "default_side")]
    pub side: Side,
    #[serde(default = "default_top")]
    pub top: usize,
}

fn default_side() -> Side {
    Side::Word
}

fn default_top() -> usize {
    DEFAULT_TOP
}

fn check_top(top: usize) -> Result<()> {
    if top > MAX_TOP {
        return Err(SessionError::TopTooLarge(top));
    }
    Ok(())
}

/// An immutable loaded bundle.
#[derive(Debug, Clone)]
pub struct Session {
    basis: ConceptBasis,
    vocab: Vocabulary,
    context_labels: Vec<String>,
    trace: Option<EmergenceReport>,
}

fn open(dir: &Path, name: &str) -> Result<BufReader<File>> {
    let path = dir.join(name);
    File::open(&path)
        .map(BufReader::new)
        .map_err(|e| SessionError::Load(format!("{}: {e}", path.display())))
}

fn load_json<T: serde::de::DeserializeOwned>(dir: &Path, name: &str) -> Result<T> {
    serde_json::from_reader(open(dir, name)?).map_err(|e| SessionError::Load(format!("{name}: {e}")))
}

impl Session {
    /// Context labels default to `c0, c1, …` when not given.
    pub fn new(
        vocab: Vocabulary,
        svd: &SvdResult,
        context_labels: Option<Vec<String>>,
        trace: Option<EmergenceReport>,
    ) -> Result<Self> {
        if vocab.len() != svd.nrows() {
            return Err(SessionError::Load(format!(
                "vocabulary has {} tokens but the SVD has {} rows",
                vocab.len(),
                svd.nrows()
            )));
        }
        let context_labels = context_labels.unwrap_or_else(|| (0..svd.ncols()).map(|j| format!("c{j}")).collect());
        if context_labels.len() != svd.ncols() {
            return Err(SessionError::Load(format!(
                "{} context labels for {} contexts",
                context_labels.len(),
                svd.ncols()
            )));
        }
        Ok(Self {
            basis: ConceptBasis::from_svd(svd),
            vocab,
            context_labels,
            trace,
        })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let vocab = read_vocab(&mut open(dir, "vocab.json")?)?;
        let header: SvdHeader = load_json(dir, "svd.json")?;
        let svd = read_svd(&header, &mut open(dir, "svd.bin")?)?;
        let labels = if dir.join("context_labels.json").exists() {
            Some(load_json(dir, "context_labels.json")?)
        } else {
            None
        };
        let trace = if dir.join("emergence.json").exists() {
            Some(load_json(dir, "emergence.json")?)
        } else {
            None
        };
        Self::new(vocab, &svd, labels, trace)
    }

    pub fn basis(&self) -> &ConceptBasis {
        &self.basis
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn labels(&self, side: Side) -> &[String] {
        match side {
            Side::Word => self.vocab.tokens(),
            Side::Context => &self.context_labels,
        }
    }

    pub fn meta(&self) -> Meta {
        Meta {
            v: self.basis.items(Side::Word),
            m: self.basis.items(Side::Context),
            r: self.basis.rank(),
            sigma: self.basis.sigma.clone(),
        }
    }

    pub fn concept(&self, k: usize, side: Side, top: usize) -> Result<ConceptView> {
        check_top(top)?;
        Ok(concept_view(&self.basis, side, k, top, self.labels(side))?)
    }

    pub fn orthant(&self, req: &OrthantRequest) -> Result<ClusterExport> {
        check_top(req.top)?;
        let cfg = SignConfiguration::new(req.dims.clone(), req.signs.clone())?;
        let cluster = top_members(orthant_members(&self.basis, &cfg, req.side)?, req.top);
        Ok(ClusterExport::new(&cluster, self.labels(req.side)))
    }

    pub fn expand(&self, req: &ExpandRequest) -> Result<ExpansionExport> {
        check_top(req.top)?;
        let cfg = SignConfiguration::new(req.dims.clone(), req.signs.clone())?;
        let (plus, minus) = hierarchy_expand(&self.basis, &cfg, req.side, req.next_dim)?;
        let children = (top_members(plus, req.top), top_members(minus, req.top));
        Ok(ExpansionExport::new(&children, self.labels(req.side)))
    }

    pub fn trace(&self) -> Result<&EmergenceReport> {
        self.trace
            .as_ref()
            .ok_or_else(|| SessionError::NotFound("no emergence trace in this bundle".into()))
    }

    pub fn meta_json(&self) -> Result<Vec<u8>> {
        to_json(&self.meta())
    }

    pub fn concept_json(&self, k: usize, side: Side, top: usize) -> Result<Vec<u8>> {
        to_json(&self.concept(k, side, top)?)
    }

    pub fn orthant_json(&self, req: &OrthantRequest) -> Result<Vec<u8>> {
        to_json(&self.orthant(req)?)
    }

    pub fn expand_json(&self, req: &ExpandRequest) -> Result<Vec<u8>> {
        to_json(&self.expand(req)?)
    }

    pub fn trace_json(&self) -> Result<Vec<u8>> {
        to_json(self.trace()?)
    }
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    serde_json::to_vec(value).map_err(|e| SessionError::BadRequest(e.to_string()))
}
