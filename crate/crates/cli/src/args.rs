use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ntpgeo_core::concepts::Side;
use ntpgeo_core::evald::ClassRule;
use ntpgeo_core::spectral::{DEFAULT_RANK, DEFAULT_TOL};
use ntpgeo_core::ufm::{InitKind, LossKind};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "ntpgeo", version, about = "Concept geometry of next-token prediction")]
pub struct Cli {
    /// Seed of every random draw in the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Tokenize text files into a vocabulary, contexts and the support matrix.
    Ingest(IngestArgs),
    /// Truncated SVD of the centered support matrix.
    Svd(SvdArgs),
    /// Members of one sign pattern, or of every pattern over the given dims.
    Orthant(OrthantArgs),
    /// Batch drill-down report: every cluster split by each dim in turn.
    Hierarchy(HierarchyArgs),
    /// k-means on the top log2(k) analyzer coordinates.
    Kmeans(KmeansArgs),
    /// Gradient-descent training of the unconstrained-features model.
    TrainUfm(TrainArgs),
    /// Compare the SVD of an imbalanced one-hot matrix with its analytic spectrum.
    VerifyOnehot(OnehotArgs),
    /// Write the bundled organism dataset.
    Organism,
    /// Per-class accuracy over a training trace.
    Emergence(EmergenceArgs),
    /// Turn a cluster JSON into word-cloud entries.
    ExportCloud(CloudArgs),
    /// Serve the read-only HTTP API and, optionally, the explorer UI.
    Serve(ServeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Svd(_) => "svd",
            Command::Orthant(_) => "orthant",
            Command::Hierarchy(_) => "hierarchy",
            Command::Kmeans(_) => "kmeans",
            Command::TrainUfm(_) => "train-ufm",
            Command::VerifyOnehot(_) => "verify-onehot",
            Command::Organism => "organism",
            Command::Emergence(_) => "emergence",
            Command::ExportCloud(_) => "export-cloud",
            Command::Serve(_) => "serve",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// UTF-8 text files; windows never cross file boundaries.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
    #[arg(long, default_value_t = 2)]
    pub min_len: usize,
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
    /// Number of contexts m.
    #[arg(long, default_value_t = 10_000)]
    pub contexts: usize,
    /// Keep letter case.
    #[arg(long)]
    pub keep_case: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SvdArgs {
    #[arg(long, default_value_t = DEFAULT_RANK)]
    pub rank: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Support matrix (defaults to `support.ntps` in the output directory).
    #[arg(long)]
    pub support: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Word,
    Context,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Word => Side::Word,
            SideArg::Context => Side::Context,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct OrthantArgs {
    /// 1-based concept dims, e.g. `1,2,4`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    /// One sign per dim, e.g. `-,-,+`.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "all", conflicts_with = "all")]
    pub signs: Option<String>,
    /// Every sign pattern over `dims`.
    #[arg(long)]
    pub all: bool,
    #[arg(long, value_enum, default_value_t = SideArg::Word)]
    pub side: SideArg,
    #[arg(long, default_value_t = 40)]
    pub top: usize,
    /// Bundle directory (defaults to the output directory).
    #[arg(long)]
    pub bundle: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct HierarchyArgs {
    /// Dims to split by, in order.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub dims: Vec<usize>,
    #[arg(long, value_enum, default_value_t = SideArg::Word)]
    pub side: SideArg,
    /// Members listed per node.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct KmeansArgs {
    /// Number of clusters, a power of two.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = SideArg::Word)]
    pub side: SideArg,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LossArg {
    Square,
    Ce,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Square => LossKind::Square,
            LossArg::Ce => LossKind::Ce,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitArg {
    Spectral,
    Random,
}

impl From<InitArg> for InitKind {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Spectral => InitKind::Spectral,
            InitArg::Random => InitKind::Random,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value_t = LossArg::Square)]
    pub loss: LossArg,
    #[arg(long, value_enum, default_value_t = InitArg::Spectral)]
    pub init: InitArg,
    /// Embedding dimension (defaults to the SVD rank).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 8.0)]
    pub delta: f64,
    /// Step size (defaults to 0.05/σ₁²).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Weight decay of the CE loss.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 10)]
    pub checkpoint_every: usize,
    /// Dump (W, H) at every checkpoint under `snapshots/`.
    #[arg(long)]
    pub snapshots: bool,
    /// Directory holding the support matrix, labels and SVD (defaults to the output directory).
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct OnehotArgs {
    #[arg(long = "V")]
    pub v: usize,
    #[arg(long = "R")]
    pub r: f64,
    #[arg(long)]
    pub nmin: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    SupportContrast,
    KlToUniform,
    MeanLogProb,
}

impl From<RuleArg> for ClassRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::SupportContrast => ClassRule::SupportContrast,
            RuleArg::KlToUniform => ClassRule::KlToUniform,
            RuleArg::MeanLogProb => ClassRule::MeanLogProb,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EmergenceArgs {
    #[arg(long, value_enum, default_value_t = RuleArg::SupportContrast)]
    pub rule: RuleArg,
    #[arg(long, default_value_t = 1e-3)]
    pub tie_tol: f64,
    /// Directory holding `support.ntps` (defaults to the output directory).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Directory holding `trace.jsonl` and `snapshots/` (defaults to the output directory).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CloudArgs {
    /// Cluster JSON (defaults to `orthant.json` in the output directory).
    #[arg(long)]
    pub cluster: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    /// Built explorer UI to serve at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}
