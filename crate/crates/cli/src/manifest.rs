use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Record of one run: everything that determines its outputs, and their checksums.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub versions: BTreeMap<&'static str, &'static str>,
    pub subcommand: &'static str,
    pub seed: u64,
    pub threads: Option<usize>,
    pub config: &'a serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads inputs and writes outputs of a run, keeping a digest of each.
///
/// Paths inside the output directory are recorded relative to it, so runs into
/// different directories produce the same manifest.
pub struct Run {
    out: PathBuf,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

impl Run {
    pub fn new(out: &Path) -> Result<Self> {
        fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        Ok(Self {
            out: out.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn display(&self, path: &Path) -> String {
        path.strip_prefix(&self.out).unwrap_or(path).to_string_lossy().replace('\\', "/")
    }

    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.push(FileDigest {
            path: self.display(path),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::new("json", format!("{}: {e}", path.display())))
    }

    /// Write `name` (relative to the output directory).
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn finish(self, subcommand: &'static str, seed: u64, threads: Option<usize>, config: &serde_json::Value) -> Result<()> {
        let manifest = Manifest {
            tool: "ntpgeo",
            versions: BTreeMap::from([("ntpgeo", env!("CARGO_PKG_VERSION")), ("ntpgeo-core", ntpgeo_core::VERSION)]),
            subcommand,
            seed,
            threads,
            config,
            inputs: self.inputs,
            outputs: self.outputs,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        let path = self.out.join(format!("manifest-{subcommand}.json"));
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))
    }
}
