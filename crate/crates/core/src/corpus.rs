//! Corpus ingestion: vocabulary, distinct-context index and next-token soft labels.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// Whitespace tokenizer, optionally lowercasing.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    text.split_whitespace()
        .map(|t| if lowercase { t.to_lowercase() } else { t.to_string() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    id_of: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 2 {
            return Err(Error::VocabularyTooSmall(tokens.len()));
        }
        let mut id_of = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if id_of.insert(t.clone(), i as u32).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate token {t:?}")));
            }
        }
        Ok(Self { tokens, id_of })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.id_of.get(token).copied()
    }
}

/// Keep the `max_size` most frequent tokens with at least `min_count` occurrences.
/// Frequency ties go to the token seen first.
pub fn build_vocabulary<S: AsRef<str>>(tokens: &[S], max_size: usize, min_count: usize) -> Result<Vocabulary> {
    if tokens.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    // token -> (count, first position)
    let mut counts: HashMap<&str, (usize, usize)> = HashMap::new();
    for (pos, t) in tokens.iter().enumerate() {
        counts.entry(t.as_ref()).or_insert((0, pos)).0 += 1;
    }
    let mut ranked: Vec<(&str, usize, usize)> = counts
        .into_iter()
        .filter(|&(_, (c, _))| c >= min_count)
        .map(|(t, (c, first))| (t, c, first))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    ranked.truncate(max_size);
    Vocabulary::new(ranked.into_iter().map(|(t, _, _)| t.to_string()).collect())
}

/// Distinct contexts (token-id windows) with the counts of the tokens that follow them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextIndex {
    pub contexts: Vec<Vec<u32>>,
    pub next_counts: Vec<BTreeMap<u32, u64>>,
}

impl ContextIndex {
    pub fn new(contexts: Vec<Vec<u32>>, next_counts: Vec<BTreeMap<u32, u64>>, vocab_size: usize) -> Result<Self> {
        if contexts.len() != next_counts.len() {
            return Err(Error::DimensionMismatch {
                expected: contexts.len(),
                got: next_counts.len(),
            });
        }
        if contexts.is_empty() {
            return Err(Error::NoContexts);
        }
        let mut seen = std::collections::HashSet::new();
        for (ctx, next) in contexts.iter().zip(&next_counts) {
            if !seen.insert(ctx.as_slice()) {
                return Err(Error::InvalidConfig(format!("duplicate context {ctx:?}")));
            }
            if !next.values().any(|&c| c > 0) {
                return Err(Error::InvalidConfig(format!("context {ctx:?} has no next-token count")));
            }
            if ctx.iter().chain(next.keys()).any(|&z| z as usize >= vocab_size) {
                return Err(Error::InvalidConfig(format!("context {ctx:?} references id >= {vocab_size}")));
            }
        }
        Ok(Self { contexts, next_counts })
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    pub min_len: usize,
    pub max_len: usize,
    pub max_contexts: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            min_len: 2,
            max_len: 6,
            max_contexts: 10_000,
        }
    }
}

struct WindowStats {
    first: usize,
    count: u64,
    next: Vec<(u32, u64)>,
}

/// Slide windows of every length in `min_len..=max_len` over each stream and keep the
/// `max_contexts` most frequent distinct windows.
///
/// Every stream is scanned on its own, so windows never span two input files. A window is
/// ranked by how often it occurs; windows that are never followed by an in-vocabulary
/// token cannot form a context and are skipped. Ties go to the window encountered first
/// (streams in order, start positions ascending, shorter windows first).
pub fn extract_contexts<S: AsRef<str>>(streams: &[Vec<S>], vocab: &Vocabulary, cfg: &WindowConfig) -> Result<ContextIndex> {
    if cfg.min_len == 0 || cfg.min_len > cfg.max_len || cfg.max_contexts == 0 {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= min_len <= max_len and max_contexts >= 1, got {cfg:?}"
        )));
    }
    let mut windows: HashMap<Vec<u32>, WindowStats> = HashMap::new();
    let mut order = 0usize;
    for stream in streams {
        let ids: Vec<Option<u32>> = stream.iter().map(|t| vocab.id(t.as_ref())).collect();
        for start in 0..ids.len() {
            for len in cfg.min_len..=cfg.max_len {
                let end = start + len;
                if end > ids.len() {
                    break;
                }
                let Some(window) = ids[start..end].iter().copied().collect::<Option<Vec<u32>>>() else {
                    break;
                };
                let stats = windows.entry(window).or_insert_with(|| {
                    order += 1;
                    WindowStats {
                        first: order,
                        count: 0,
                        next: Vec::new(),
                    }
                });
                stats.count += 1;
                if let Some(Some(z)) = ids.get(end) {
                    match stats.next.iter_mut().find(|(id, _)| id == z) {
                        Some(entry) => entry.1 += 1,
                        None => stats.next.push((*z, 1)),
                    }
                }
            }
        }
    }

    let mut ranked: Vec<(Vec<u32>, WindowStats)> = windows.into_iter().filter(|(_, s)| !s.next.is_empty()).collect();
    if ranked.is_empty() {
        return Err(Error::NoContexts);
    }
    ranked.sort_by(|a, b| b.1.count.cmp(&a.1.count).then(a.1.first.cmp(&b.1.first)));
    ranked.truncate(cfg.max_contexts);

    let mut contexts = Vec::with_capacity(ranked.len());
    let mut next_counts = Vec::with_capacity(ranked.len());
    for (ctx, stats) in ranked {
        contexts.push(ctx);
        next_counts.push(stats.next.into_iter().collect());
    }
    Ok(ContextIndex { contexts, next_counts })
}

/// Column-sparse next-token distributions, one column per context.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLabelMatrix {
    vocab_size: usize,
    columns: Vec<Vec<(u32, f64)>>,
}

impl SoftLabelMatrix {
    /// Validates that every column is a probability vector with strictly positive,
    /// strictly id-sorted entries.
    pub fn new(vocab_size: usize, columns: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        for (j, col) in columns.iter().enumerate() {
            if col.is_empty() {
                return Err(Error::InvalidDistribution(format!("column {j} is empty")));
            }
            if col.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::InvalidDistribution(format!("column {j} ids not strictly increasing")));
            }
            if col.iter().any(|&(z, p)| z as usize >= vocab_size || !p.is_finite() || p <= 0.0) {
                return Err(Error::InvalidDistribution(format!("column {j} has an invalid entry")));
            }
            let total: f64 = col.iter().map(|e| e.1).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidDistribution(format!("column {j} sums to {total}")));
            }
        }
        Ok(Self { vocab_size, columns })
    }

    /// One-hot columns: context `j` puts all mass on `labels[j]`.
    pub fn one_hot(vocab_size: usize, labels: &[u32]) -> Result<Self> {
        Self::new(vocab_size, labels.iter().map(|&z| vec![(z, 1.0)]).collect())
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[(u32, f64)] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<(u32, f64)>] {
        &self.columns
    }
}

/// `P[z,j] = count(z|j) / Σ_z count(z|j)`, columns in context order.
pub fn build_soft_labels(idx: &ContextIndex, vocab_size: usize) -> Result<SoftLabelMatrix> {
    let columns = idx
        .next_counts
        .iter()
        .map(|next| {
            let total: u64 = next.values().sum();
            next.iter()
                .filter(|(_, &c)| c > 0)
                .map(|(&z, &c)| (z, c as f64 / total as f64))
                .collect()
        })
        .collect();
    SoftLabelMatrix::new(vocab_size, columns)
}
