//! Organism dataset: contexts "the organism that [attribute] is" followed by subject words.
//!
//! This is a hand-built reconstruction, not data taken from any figure. Each attribute
//! is shared by one group of subjects (plant, tree, flower, animal, mammal, feline, canine,
//! fish, bird) and the next-token distribution is uniform over that group, so the nine
//! groups are exactly the effective classes.

use crate::corpus::{SoftLabelMatrix, Vocabulary};

pub const SUBJECTS: [&str; 18] = [
    "oak", "pine", "maple", "rose", "tulip", "daisy", "cat", "lion", "tiger", "dog", "wolf", "fox", "trout",
    "salmon", "shark", "eagle", "robin", "parrot",
];

/// Group name, subject id range, attributes.
pub const GROUPS: [(&str, std::ops::Range<u32>, &[&str]); 9] = [
    ("plant", 0..6, &["uses sunlight for food", "grows from a seed"]),
    ("animal", 6..18, &["moves on its own", "eats other organisms", "has a nervous system"]),
    ("mammal", 6..12, &["feeds milk to its young", "has fur"]),
    ("feline", 6..9, &["purrs", "has retractable claws"]),
    ("canine", 9..12, &["hunts in packs"]),
    ("fish", 12..15, &["lives in water", "has gills", "swims with fins"]),
    ("bird", 15..18, &["has feathers", "lays eggs in nests"]),
    ("tree", 0..3, &["has bark"]),
    ("flower", 3..6, &["has petals"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct OrganismDataset {
    pub vocab: Vocabulary,
    pub labels: SoftLabelMatrix,
    /// Context strings, one per column of `labels`.
    pub contexts: Vec<String>,
    /// Group index of every context (equal to its effective class).
    pub group_of: Vec<usize>,
}

pub fn organism_dataset() -> OrganismDataset {
    let vocab = Vocabulary::new(SUBJECTS.iter().map(|s| s.to_string()).collect()).expect("distinct subjects");
    let mut columns = Vec::new();
    let mut contexts = Vec::new();
    let mut group_of = Vec::new();
    for (g, (_, members, attributes)) in GROUPS.iter().enumerate() {
        let p = 1.0 / members.len() as f64;
        for attr in attributes.iter() {
            contexts.push(format!("the organism that {attr} is"));
            columns.push(members.clone().map(|z| (z, p)).collect());
            group_of.push(g);
        }
    }
    let labels = SoftLabelMatrix::new(SUBJECTS.len(), columns).expect("uniform columns");
    OrganismDataset {
        vocab,
        labels,
        contexts,
        group_of,
    }
}

/// Stable text rendering used for checksumming the bundled dataset.
pub fn canonical_text(ds: &OrganismDataset) -> String {
    let mut out = ds.vocab.tokens().join(" ");
    out.push('\n');
    for (ctx, col) in ds.contexts.iter().zip(ds.labels.columns()) {
        out.push_str(ctx);
        for (z, p) in col {
            out.push_str(&format!(" {}:{p:.17e}", ds.vocab.token(*z)));
        }
        out.push('\n');
    }
    out
}
