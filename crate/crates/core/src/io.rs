//! File formats.
//!
//! * `NTPS1` sparse support matrix: magic, u32 V, u32 m, then per column u32 length and
//!   u32 ids. All integers little-endian.
//! * SVD: JSON header `{V, m, r, sigma, seed, tol, ...}` plus a binary payload `NTPU1`
//!   followed by f64 `U` (V×r) row-major and f64 `Vt` (r×m) row-major.
//! * `NTPD1` dense matrix: magic, u32 rows, u32 cols, f32 row-major.
//! * Vocabulary: JSON array of strings.
//! * Contexts: JSON lines `{"ctx":[ids],"next":{"id":count}}`.
//! * Soft labels: JSON `{"V": n, "columns": [[[id, p], ...], ...]}`.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::{ContextIndex, SoftLabelMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::matrix::SupportMatrix;
use crate::spectral::SvdResult;

const SUPPORT_MAGIC: &[u8; 5] = b"NTPS1";
const SVD_MAGIC: &[u8; 5] = b"NTPU1";
const DENSE_MAGIC: &[u8; 5] = b"NTPD1";

fn read_magic<R: Read>(r: &mut R, magic: &[u8; 5]) -> Result<()> {
    let mut buf = [0u8; 5];
    r.read_exact(&mut buf)?;
    if &buf != magic {
        return Err(Error::Format(format!(
            "expected magic {}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&buf)
        )));
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn to_u32(x: usize) -> Result<u32> {
    u32::try_from(x).map_err(|_| Error::Format(format!("{x} does not fit in u32")))
}

pub fn write_support<W: Write>(s: &SupportMatrix, w: &mut W) -> Result<()> {
    w.write_all(SUPPORT_MAGIC)?;
    w.write_all(&to_u32(s.nrows())?.to_le_bytes())?;
    w.write_all(&to_u32(s.ncols())?.to_le_bytes())?;
    for col in s.columns() {
        w.write_all(&to_u32(col.len())?.to_le_bytes())?;
        for z in col {
            w.write_all(&z.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_support<R: Read>(r: &mut R) -> Result<SupportMatrix> {
    read_magic(r, SUPPORT_MAGIC)?;
    let v = read_u32(r)? as usize;
    let m = read_u32(r)? as usize;
    let mut columns = Vec::with_capacity(m.min(1 << 20));
    for _ in 0..m {
        let len = read_u32(r)? as usize;
        if len > v {
            return Err(Error::Format(format!("column length {len} exceeds V={v}")));
        }
        let col = (0..len).map(|_| read_u32(r)).collect::<Result<Vec<u32>>>()?;
        columns.push(col);
    }
    SupportMatrix::new(v, columns)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdHeader {
    #[serde(rename = "V")]
    pub v: usize,
    pub m: usize,
    pub r: usize,
    pub sigma: Vec<f64>,
    pub seed: u64,
    pub tol: f64,
    pub residuals: Vec<f64>,
    pub dropped: usize,
}

impl SvdHeader {
    pub fn new(res: &SvdResult) -> Self {
        Self {
            v: res.nrows(),
            m: res.ncols(),
            r: res.rank(),
            sigma: res.sigma.clone(),
            seed: res.seed,
            tol: res.tol,
            residuals: res.residuals.clone(),
            dropped: res.dropped,
        }
    }
}

pub fn write_svd_payload<W: Write>(res: &SvdResult, w: &mut W) -> Result<()> {
    w.write_all(SVD_MAGIC)?;
    for x in res.u.iter().chain(res.vt.iter()) {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Reassemble an SVD from its header and payload.
pub fn read_svd<R: Read>(header: &SvdHeader, payload: &mut R) -> Result<SvdResult> {
    read_magic(payload, SVD_MAGIC)?;
    let mut read_matrix = |rows: usize, cols: usize| -> Result<Array2<f64>> {
        let mut buf = vec![0u8; rows * cols * 8];
        payload.read_exact(&mut buf)?;
        let data = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Format(e.to_string()))
    };
    let u = read_matrix(header.v, header.r)?;
    let vt = read_matrix(header.r, header.m)?;
    if header.sigma.len() != header.r {
        return Err(Error::Format(format!("header lists {} values for r={}", header.sigma.len(), header.r)));
    }
    Ok(SvdResult {
        u,
        sigma: header.sigma.clone(),
        vt,
        residuals: header.residuals.clone(),
        seed: header.seed,
        tol: header.tol,
        dropped: header.dropped,
    })
}

/// Write a dense matrix as `NTPD1` (values narrowed to f32).
pub fn write_dense<W: Write>(a: &Array2<f64>, w: &mut W) -> Result<()> {
    w.write_all(DENSE_MAGIC)?;
    w.write_all(&to_u32(a.nrows())?.to_le_bytes())?;
    w.write_all(&to_u32(a.ncols())?.to_le_bytes())?;
    for row in a.rows() {
        for &x in row {
            w.write_all(&(x as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_dense<R: Read>(r: &mut R) -> Result<Array2<f64>> {
    read_magic(r, DENSE_MAGIC)?;
    let rows = read_u32(r)? as usize;
    let cols = read_u32(r)? as usize;
    let mut buf = vec![0u8; rows * cols * 4];
    r.read_exact(&mut buf)?;
    let data = buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_vocab<W: Write>(vocab: &Vocabulary, w: &mut W) -> Result<()> {
    serde_json::to_writer(&mut *w, vocab.tokens())?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_vocab<R: Read>(r: &mut R) -> Result<Vocabulary> {
    let tokens: Vec<String> = serde_json::from_reader(r)?;
    Vocabulary::new(tokens)
}

#[derive(Serialize, Deserialize)]
struct ContextLine {
    ctx: Vec<u32>,
    next: BTreeMap<u32, u64>,
}

pub fn write_contexts<W: Write>(idx: &ContextIndex, w: &mut W) -> Result<()> {
    for (ctx, next) in idx.contexts.iter().zip(&idx.next_counts) {
        let line = ContextLine {
            ctx: ctx.clone(),
            next: next.clone(),
        };
        serde_json::to_writer(&mut *w, &line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_contexts<R: BufRead>(r: R, vocab_size: usize) -> Result<ContextIndex> {
    let mut contexts = Vec::new();
    let mut next_counts = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ContextLine = serde_json::from_str(&line)?;
        contexts.push(parsed.ctx);
        next_counts.push(parsed.next);
    }
    ContextIndex::new(contexts, next_counts, vocab_size)
}

#[derive(Serialize, Deserialize)]
struct LabelsFile {
    #[serde(rename = "V")]
    v: usize,
    columns: Vec<Vec<(u32, f64)>>,
}

pub fn write_labels<W: Write>(labels: &SoftLabelMatrix, w: &mut W) -> Result<()> {
    let file = LabelsFile {
        v: labels.vocab_size(),
        columns: labels.columns().to_vec(),
    };
    serde_json::to_writer(&mut *w, &file)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_labels<R: Read>(r: &mut R) -> Result<SoftLabelMatrix> {
    let file: LabelsFile = serde_json::from_reader(r)?;
    SoftLabelMatrix::new(file.v, file.columns)
}
