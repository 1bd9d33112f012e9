use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ntpgeo_core::concepts::{
    hierarchy_expand, kmeans_spectral, orthant_members, top_members, ClusterExport, ConceptBasis, OrthantCluster, Side,
    SignConfiguration,
};
use ntpgeo_core::corpus::{build_soft_labels, build_vocabulary, extract_contexts, tokenize, Vocabulary, WindowConfig};
use ntpgeo_core::evald::{emergence_from_snapshots, ClassAssignment};
use ntpgeo_core::io;
use ntpgeo_core::matrix::{effective_classes, support_of, CenteredOperator, SupportMatrix};
use ntpgeo_core::spectral::{truncated_svd, SvdResult};
use ntpgeo_core::synth::{analytic_onehot_spectrum, canonical_text, imbalanced_onehot, organism_dataset, verify_onehot, OneHotSpec};
use ntpgeo_core::ufm::{train, LossKind, Objective, TraceRecord, TrainConfig};
use serde::Serialize;

use crate::args::*;
use crate::error::{CliError, Result};
use crate::manifest::Run;

pub struct Global {
    pub seed: u64,
    pub out: PathBuf,
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(CliError::new("invalid-path", format!("{} is not a file", path.display())));
    }
    Ok(())
}

fn require_dir(path: &Path) -> Result<()> {
    if !path.is_dir() {
        return Err(CliError::new("invalid-path", format!("{} is not a directory", path.display())));
    }
    Ok(())
}

fn require_files(dir: &Path, names: &[&str]) -> Result<()> {
    require_dir(dir)?;
    names.iter().try_for_each(|n| require_file(&dir.join(n)))
}

fn dir_or_out(dir: &Option<PathBuf>, g: &Global) -> PathBuf {
    dir.clone().unwrap_or_else(|| g.out.clone())
}

fn load_vocab(run: &mut Run, dir: &Path) -> Result<Vocabulary> {
    Ok(io::read_vocab(&mut run.read(&dir.join("vocab.json"))?.as_slice())?)
}

fn load_svd(run: &mut Run, dir: &Path) -> Result<SvdResult> {
    let header: io::SvdHeader = run.read_json(&dir.join("svd.json"))?;
    Ok(io::read_svd(&header, &mut run.read(&dir.join("svd.bin"))?.as_slice())?)
}

fn load_support(run: &mut Run, path: &Path) -> Result<SupportMatrix> {
    Ok(io::read_support(&mut run.read(path)?.as_slice())?)
}

struct Bundle {
    vocab: Vocabulary,
    basis: ConceptBasis,
    context_labels: Vec<String>,
}

impl Bundle {
    fn labels(&self, side: Side) -> &[String] {
        match side {
            Side::Word => self.vocab.tokens(),
            Side::Context => &self.context_labels,
        }
    }
}

fn load_bundle(run: &mut Run, dir: &Path) -> Result<Bundle> {
    let vocab = load_vocab(run, dir)?;
    let svd = load_svd(run, dir)?;
    let labels_path = dir.join("context_labels.json");
    let context_labels: Vec<String> = if labels_path.exists() {
        run.read_json(&labels_path)?
    } else {
        (0..svd.ncols()).map(|j| format!("c{j}")).collect()
    };
    if vocab.len() != svd.nrows() || context_labels.len() != svd.ncols() {
        return Err(CliError::new(
            "bundle",
            format!(
                "bundle shapes disagree: {} tokens, {} context labels, SVD {}×{}",
                vocab.len(),
                context_labels.len(),
                svd.nrows(),
                svd.ncols()
            ),
        ));
    }
    Ok(Bundle {
        vocab,
        basis: ConceptBasis::from_svd(&svd),
        context_labels,
    })
}

fn write_support(run: &mut Run, s: &SupportMatrix) -> Result<()> {
    let mut buf = Vec::new();
    io::write_support(s, &mut buf)?;
    run.write("support.ntps", &buf)
}

fn write_common(run: &mut Run, vocab: &Vocabulary, labels: &ntpgeo_core::corpus::SoftLabelMatrix, context_labels: &[String]) -> Result<()> {
    let mut buf = Vec::new();
    io::write_vocab(vocab, &mut buf)?;
    run.write("vocab.json", &buf)?;
    let mut buf = Vec::new();
    io::write_labels(labels, &mut buf)?;
    run.write("labels.json", &buf)?;
    write_support(run, &support_of(labels))?;
    run.write_json("context_labels.json", context_labels)
}

/// `-,-,+` → `[-1, -1, 1]`
pub fn parse_signs(s: &str) -> Result<Vec<i8>> {
    s.split(',')
        .map(|t| match t.trim() {
            "+" | "+1" | "1" => Ok(1),
            "-" | "-1" => Ok(-1),
            other => Err(CliError::new("invalid-config", format!("sign must be + or -, got {other:?}"))),
        })
        .collect()
}

pub fn ingest(run: &mut Run, a: &IngestArgs) -> Result<()> {
    a.inputs.iter().try_for_each(|p| require_file(p))?;
    let mut streams = Vec::with_capacity(a.inputs.len());
    for path in &a.inputs {
        let bytes = run.read(path)?;
        let text = String::from_utf8(bytes).map_err(|_| CliError::new("encoding", format!("{} is not UTF-8", path.display())))?;
        streams.push(tokenize(&text, !a.keep_case));
    }
    let all: Vec<&str> = streams.iter().flatten().map(String::as_str).collect();
    let vocab = build_vocabulary(&all, a.vocab_size, a.min_count)?;
    let cfg = WindowConfig {
        min_len: a.min_len,
        max_len: a.max_len,
        max_contexts: a.contexts,
    };
    let idx = extract_contexts(&streams, &vocab, &cfg)?;
    let labels = build_soft_labels(&idx, vocab.len())?;
    let context_labels: Vec<String> = idx
        .contexts
        .iter()
        .map(|c| c.iter().map(|&z| vocab.token(z)).collect::<Vec<_>>().join(" "))
        .collect();
    write_common(run, &vocab, &labels, &context_labels)?;
    let mut buf = Vec::new();
    io::write_contexts(&idx, &mut buf)?;
    run.write("contexts.jsonl", &buf)?;
    println!("V = {}, m = {}, tokens = {}", vocab.len(), idx.len(), all.len());
    Ok(())
}

pub fn svd(run: &mut Run, a: &SvdArgs, g: &Global) -> Result<()> {
    let path = a.support.clone().unwrap_or_else(|| g.out.join("support.ntps"));
    require_file(&path)?;
    let s = load_support(run, &path)?;
    let limit = (s.nrows() - 1).min(s.ncols());
    if a.rank > limit {
        eprintln!("rank {} exceeds min(V-1, m) = {limit}; computing {limit} components", a.rank);
    }
    let res = truncated_svd(&CenteredOperator::new(&s), a.rank.min(limit), a.tol, a.max_iter, g.seed)?;
    run.write_json("svd.json", &io::SvdHeader::new(&res))?;
    let mut buf = Vec::new();
    io::write_svd_payload(&res, &mut buf)?;
    run.write("svd.bin", &buf)?;
    let sigma: Vec<String> = res.sigma.iter().map(|s| format!("{s:.6}")).collect();
    println!("rank {}: sigma = [{}]", res.rank(), sigma.join(", "));
    Ok(())
}

pub fn orthant(run: &mut Run, a: &OrthantArgs, g: &Global) -> Result<()> {
    let dir = dir_or_out(&a.bundle, g);
    require_files(&dir, &["vocab.json", "svd.json", "svd.bin"])?;
    let bundle = load_bundle(run, &dir)?;
    let side = a.side.into();
    let export = |cfg: &SignConfiguration| -> Result<ClusterExport> {
        let c = top_members(orthant_members(&bundle.basis, cfg, side)?, a.top);
        Ok(ClusterExport::new(&c, bundle.labels(side)))
    };
    match &a.signs {
        Some(signs) => {
            let cfg = SignConfiguration::new(a.dims.clone(), parse_signs(signs)?)?;
            let cluster = export(&cfg)?;
            run.write_json("orthant.json", &cluster)?;
            println!("{}", serde_json::to_string(&cluster)?);
        }
        None => {
            let clusters = SignConfiguration::all_patterns(&a.dims)?
                .iter()
                .map(export)
                .collect::<Result<Vec<_>>>()?;
            run.write_json("orthants.json", &clusters)?;
            let non_empty = clusters.iter().filter(|c| !c.members.is_empty()).count();
            println!("{non_empty} of {} sign patterns non-empty", clusters.len());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct HierarchyNode {
    size: usize,
    #[serde(flatten)]
    cluster: ClusterExport,
    children: Vec<HierarchyNode>,
}

fn hierarchy_node(basis: &ConceptBasis, cluster: OrthantCluster, rest: &[usize], top: usize, labels: &[String]) -> Result<HierarchyNode> {
    let children = match rest.split_first() {
        Some((&next, rest)) if !cluster.is_empty() => {
            let (plus, minus) = hierarchy_expand(basis, &cluster.config, cluster.side, next)?;
            vec![
                hierarchy_node(basis, plus, rest, top, labels)?,
                hierarchy_node(basis, minus, rest, top, labels)?,
            ]
        }
        _ => Vec::new(),
    };
    Ok(HierarchyNode {
        size: cluster.len(),
        cluster: ClusterExport::new(&top_members(cluster, top), labels),
        children,
    })
}

pub fn hierarchy(run: &mut Run, a: &HierarchyArgs, g: &Global) -> Result<()> {
    let dir = dir_or_out(&a.bundle, g);
    require_files(&dir, &["vocab.json", "svd.json", "svd.bin"])?;
    let bundle = load_bundle(run, &dir)?;
    let side: Side = a.side.into();
    let (&first, rest) = a
        .dims
        .split_first()
        .ok_or_else(|| CliError::new("invalid-config", "hierarchy needs at least one dim"))?;
    let mut roots = Vec::with_capacity(2);
    for sign in [1, -1] {
        let cfg = SignConfiguration::new(vec![first], vec![sign])?;
        let cluster = orthant_members(&bundle.basis, &cfg, side)?;
        roots.push(hierarchy_node(&bundle.basis, cluster, rest, a.top, bundle.labels(side))?);
    }
    run.write_json("hierarchy.json", &roots)?;
    println!("split by dims {:?}: {} + {} items at the top level", a.dims, roots[0].size, roots[1].size);
    Ok(())
}

#[derive(Serialize)]
struct KmeansExport {
    k: usize,
    p: usize,
    side: Side,
    inertia: f64,
    clusters: Vec<Vec<String>>,
    assignments: Vec<usize>,
}

pub fn kmeans(run: &mut Run, a: &KmeansArgs, g: &Global) -> Result<()> {
    let dir = dir_or_out(&a.bundle, g);
    require_files(&dir, &["vocab.json", "svd.json", "svd.bin"])?;
    let bundle = load_bundle(run, &dir)?;
    let side: Side = a.side.into();
    let res = kmeans_spectral(&bundle.basis, a.k, g.seed, a.restarts, side)?;
    let labels = bundle.labels(side);
    let mut clusters = vec![Vec::new(); res.k];
    for (item, &c) in res.assignments.iter().enumerate() {
        clusters[c].push(labels[item].clone());
    }
    let sizes: Vec<usize> = clusters.iter().map(Vec::len).collect();
    run.write_json(
        "kmeans.json",
        &KmeansExport {
            k: res.k,
            p: res.p,
            side,
            inertia: res.inertia,
            clusters,
            assignments: res.assignments,
        },
    )?;
    println!("k = {}, inertia = {:.6}, sizes = {sizes:?}", res.k, res.inertia);
    Ok(())
}

pub fn snapshot_name(matrix: &str, step: usize) -> String {
    format!("snapshots/{matrix}-{step:08}.ntpd")
}

#[derive(Serialize)]
struct TrainSummary {
    eta: f64,
    checkpoints: usize,
    final_loss: f64,
}

pub fn train_ufm(run: &mut Run, a: &TrainArgs, g: &Global) -> Result<()> {
    let dir = dir_or_out(&a.data, g);
    let loss: LossKind = a.loss.into();
    let data_file = match loss {
        LossKind::Square => "support.ntps",
        LossKind::Ce => "labels.json",
    };
    require_files(&dir, &[data_file, "svd.json", "svd.bin"])?;
    let svd = load_svd(run, &dir)?;
    let support;
    let labels;
    let objective = match loss {
        LossKind::Square => {
            support = load_support(run, &dir.join(data_file))?;
            Objective::Square(CenteredOperator::new(&support))
        }
        LossKind::Ce => {
            labels = io::read_labels(&mut run.read(&dir.join(data_file))?.as_slice())?;
            Objective::Ce {
                labels: &labels,
                lambda: a.lambda,
            }
        }
    };
    let cfg = TrainConfig {
        loss,
        init: a.init.into(),
        d: a.d.unwrap_or(svd.rank()),
        delta: a.delta,
        eta: a.eta,
        lambda: a.lambda,
        steps: a.steps,
        checkpoint_every: a.checkpoint_every,
        seed: g.seed,
        snapshots: a.snapshots,
    };
    let trace = train(&svd, &objective, &cfg)?;
    let mut lines = Vec::new();
    for cp in &trace.checkpoints {
        serde_json::to_writer(&mut lines, &TraceRecord::from(cp))?;
        lines.push(b'\n');
    }
    run.write("trace.jsonl", &lines)?;
    for cp in &trace.checkpoints {
        if let Some((w, h)) = &cp.snapshot {
            for (name, m) in [("W", w), ("H", h)] {
                let mut buf = Vec::new();
                io::write_dense(m, &mut buf)?;
                run.write(&snapshot_name(name, cp.step), &buf)?;
            }
        }
    }
    let final_loss = trace.checkpoints.last().map_or(f64::NAN, |c| c.diagnostics.loss);
    run.write_json(
        "train-summary.json",
        &TrainSummary {
            eta: trace.eta,
            checkpoints: trace.checkpoints.len(),
            final_loss,
        },
    )?;
    println!("eta = {:.6e}, {} checkpoints, final loss {final_loss:.6e}", trace.eta, trace.checkpoints.len());
    Ok(())
}

/// Returns whether the check passed.
pub fn verify_onehot_cmd(run: &mut Run, a: &OnehotArgs, g: &Global) -> Result<bool> {
    let spec = OneHotSpec::new(a.v, a.r, a.nmin)?;
    let (s, _) = imbalanced_onehot(&spec)?;
    let svd = truncated_svd(&CenteredOperator::new(&s), a.v - 1, 1e-12, None, g.seed)?;
    let report = verify_onehot(&spec, &svd, a.tol);
    run.write_json("onehot-report.json", &report)?;
    let tiers: Vec<String> = analytic_onehot_spectrum(&spec).tiers.iter().map(|t| format!("{:.5}", t.value)).collect();
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    println!("{verdict}: V={} R={} n_min={} tiers [{}], max error {:.3e}", a.v, a.r, a.nmin, tiers.join(", "), report.sigma_error);
    Ok(report.passed())
}

pub fn organism(run: &mut Run) -> Result<()> {
    let ds = organism_dataset();
    write_common(run, &ds.vocab, &ds.labels, &ds.contexts)?;
    run.write("organism.txt", canonical_text(&ds).as_bytes())?;
    println!("V = {}, m = {}", ds.vocab.len(), ds.labels.ncols());
    Ok(())
}

pub fn emergence(run: &mut Run, a: &EmergenceArgs, g: &Global) -> Result<()> {
    let data = dir_or_out(&a.data, g);
    let trace_dir = dir_or_out(&a.trace, g);
    require_files(&data, &["support.ntps"])?;
    require_files(&trace_dir, &["trace.jsonl"])?;
    let s = load_support(run, &data.join("support.ntps"))?;
    let lines = run.read(&trace_dir.join("trace.jsonl"))?;
    let mut snapshots = Vec::new();
    for line in lines.lines() {
        let line = line.map_err(|e| CliError::io(&trace_dir.join("trace.jsonl"), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord = serde_json::from_str(&line)?;
        let mut load = |name: &str| -> Result<ndarray::Array2<f64>> {
            let path = trace_dir.join(snapshot_name(name, rec.step));
            if !path.is_file() {
                return Err(CliError::new(
                    "invalid-path",
                    format!("missing snapshot {} (train with --snapshots)", path.display()),
                ));
            }
            Ok(io::read_dense(&mut run.read(&path)?.as_slice())?)
        };
        let w = load("W")?;
        let h = load("H")?;
        snapshots.push((rec.step, w, h));
    }
    let views: Vec<_> = snapshots.iter().map(|(step, w, h)| (*step, w.view(), h.view())).collect();
    let assignment = ClassAssignment {
        rule: a.rule.into(),
        tie_tol: a.tie_tol,
    };
    let report = emergence_from_snapshots(&views, &effective_classes(&s), &assignment)?;
    run.write_json("emergence.json", &report)?;
    let crossing: Vec<String> = report
        .crossing
        .iter()
        .map(|c| c.map_or("-".to_string(), |s| s.to_string()))
        .collect();
    println!("{} classes, half-accuracy crossings [{}]", report.classes.len(), crossing.join(", "));
    Ok(())
}

pub fn export_cloud(run: &mut Run, a: &CloudArgs, g: &Global) -> Result<()> {
    let path = a.cluster.clone().unwrap_or_else(|| g.out.join("orthant.json"));
    require_file(&path)?;
    let cluster: ClusterExport = run.read_json(&path)?;
    let cloud = cluster.word_cloud();
    run.write_json("cloud.json", &cloud)?;
    println!("{}", serde_json::to_string(&cloud)?);
    Ok(())
}

/// Load the bundle and return the session to serve; the caller writes the manifest first.
pub fn serve_session(run: &mut Run, a: &ServeArgs, g: &Global) -> Result<Arc<ntpgeo_server::Session>> {
    let dir = dir_or_out(&a.bundle, g);
    require_files(&dir, &["vocab.json", "svd.json", "svd.bin"])?;
    if let Some(s) = &a.static_dir {
        require_dir(s)?;
    }
    for name in ["vocab.json", "svd.json", "svd.bin", "context_labels.json", "emergence.json"] {
        let path = dir.join(name);
        if path.exists() {
            run.read(&path)?;
        }
    }
    Ok(Arc::new(ntpgeo_server::Session::load(&dir)?))
}
