//! Concept geometry of next-token prediction.
//!
//! Pipeline: text → vocabulary and distinct contexts ([`corpus`]) → binary support matrix
//! and its row-centered operator ([`matrix`]) → truncated SVD ([`spectral`]) → analyzer
//! vectors and orthant clusters ([`concepts`]). The [`ufm`] trainer fits free word and
//! context embeddings to the same data, and [`evald`] tracks which effective classes the
//! model separates over training.

pub mod concepts;
pub mod corpus;
pub mod error;
pub mod evald;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod spectral;
pub mod synth;
pub mod ufm;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
