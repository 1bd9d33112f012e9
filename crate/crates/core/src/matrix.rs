//! Support matrix, the implicitly centered data-sparsity operator and effective classes.

use std::collections::HashMap;

use ndarray::{Array2, ArrayView2};

use crate::corpus::SoftLabelMatrix;
use crate::error::{Error, Result};

/// A real matrix known only through its action on vectors.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = A x`; `x.len() == ncols`, `y.len() == nrows`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// `x = Aᵀ y`; `y.len() == nrows`, `x.len() == ncols`.
    fn apply_transpose(&self, y: &[f64], x: &mut [f64]);
    /// Magnitude of the data the operator is computed from; rounding errors in `apply`
    /// scale with it. Zero means unknown.
    fn scale(&self) -> f64 {
        0.0
    }
}

/// Binary V×m matrix stored column-wise: `S[z,j] = 1` iff `z` is in column `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMatrix {
    nrows: usize,
    columns: Vec<Vec<u32>>,
}

impl SupportMatrix {
    pub fn new(nrows: usize, columns: Vec<Vec<u32>>) -> Result<Self> {
        if nrows == 0 {
            return Err(Error::InvalidMatrix("no rows".into()));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.is_empty() {
                return Err(Error::InvalidMatrix(format!("column {j} is empty")));
            }
            if col.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidMatrix(format!("column {j} ids not strictly increasing")));
            }
            if *col.last().unwrap() as usize >= nrows {
                return Err(Error::InvalidMatrix(format!("column {j} has id >= {nrows}")));
            }
        }
        Ok(Self { nrows, columns })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    pub fn col_support_size(&self, j: usize) -> usize {
        self.columns[j].len()
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut s = Array2::zeros((self.nrows, self.ncols()));
        for (j, col) in self.columns.iter().enumerate() {
            for &z in col {
                s[[z as usize, j]] = 1.0;
            }
        }
        s
    }
}

/// Sparsity pattern of `P`.
pub fn support_of(p: &SoftLabelMatrix) -> SupportMatrix {
    let columns = p.columns().iter().map(|col| col.iter().map(|e| e.0).collect()).collect();
    SupportMatrix {
        nrows: p.vocab_size(),
        columns,
    }
}

/// `S̃ = S − (1/V)·1·cᵀ` applied without materializing the dense matrix.
#[derive(Debug, Clone, Copy)]
pub struct CenteredOperator<'a> {
    base: &'a SupportMatrix,
}

impl<'a> CenteredOperator<'a> {
    pub fn new(base: &'a SupportMatrix) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &'a SupportMatrix {
        self.base
    }

    /// `S̃ x`.
    pub fn centered_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.base.ncols(), x.len())?;
        let mut y = vec![0.0; self.base.nrows()];
        self.apply(x, &mut y);
        Ok(y)
    }

    /// `S̃ᵀ y`.
    pub fn centered_rmatvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.base.nrows(), y.len())?;
        let mut x = vec![0.0; self.base.ncols()];
        self.apply_transpose(y, &mut x);
        Ok(x)
    }

    /// `‖S̃‖²_F = Σ_j c_j (1 − c_j / V)`.
    pub fn frobenius_sq(&self) -> f64 {
        let v = self.base.nrows() as f64;
        self.base
            .columns()
            .iter()
            .map(|c| {
                let c = c.len() as f64;
                c * (1.0 - c / v)
            })
            .sum()
    }

    /// Dense `S̃`; only for tests and small instances.
    pub fn to_dense(&self) -> Array2<f64> {
        let v = self.base.nrows() as f64;
        let mut s = self.base.to_dense();
        for (j, col) in self.base.columns().iter().enumerate() {
            let shift = col.len() as f64 / v;
            s.column_mut(j).mapv_inplace(|x| x - shift);
        }
        s
    }

    /// `S̃ Hᵀ` for `H` of shape d×m, returned as V×d.
    pub fn mul_transposed(&self, h: ArrayView2<f64>) -> Result<Array2<f64>> {
        let (d, m) = h.dim();
        check_len(self.base.ncols(), m)?;
        let v = self.base.nrows();
        let ht = h.t().as_standard_layout().into_owned();
        let mut out = Array2::zeros((v, d));
        let mut weighted = vec![0.0; d];
        for (j, col) in self.base.columns().iter().enumerate() {
            let hj = ht.row(j);
            let hj = hj.as_slice().unwrap();
            for &z in col {
                let mut row = out.row_mut(z as usize);
                for (o, x) in row.iter_mut().zip(hj) {
                    *o += x;
                }
            }
            let c = col.len() as f64;
            for (w, x) in weighted.iter_mut().zip(hj) {
                *w += c * x;
            }
        }
        let inv_v = 1.0 / v as f64;
        for mut row in out.rows_mut() {
            for (o, w) in row.iter_mut().zip(&weighted) {
                *o -= inv_v * w;
            }
        }
        Ok(out)
    }

    /// `Wᵀ S̃` for `W` of shape V×d, returned as d×m.
    pub fn transpose_mul(&self, w: ArrayView2<f64>) -> Result<Array2<f64>> {
        let (v, d) = w.dim();
        check_len(self.base.nrows(), v)?;
        let w = w.as_standard_layout();
        let mut mean = vec![0.0; d];
        for row in w.rows() {
            for (s, x) in mean.iter_mut().zip(row) {
                *s += x;
            }
        }
        mean.iter_mut().for_each(|s| *s /= v as f64);
        let m = self.base.ncols();
        let mut out_t = Array2::zeros((m, d));
        for (j, col) in self.base.columns().iter().enumerate() {
            let mut acc = out_t.row_mut(j);
            for &z in col {
                for (a, x) in acc.iter_mut().zip(w.row(z as usize)) {
                    *a += x;
                }
            }
            let c = col.len() as f64;
            for (a, mu) in acc.iter_mut().zip(&mean) {
                *a -= c * mu;
            }
        }
        Ok(out_t.reversed_axes().as_standard_layout().into_owned())
    }
}

impl LinearOperator for CenteredOperator<'_> {
    fn nrows(&self) -> usize {
        self.base.nrows()
    }

    fn ncols(&self) -> usize {
        self.base.ncols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let mut cx = 0.0;
        for (col, &xj) in self.base.columns().iter().zip(x) {
            for &z in col {
                y[z as usize] += xj;
            }
            cx += col.len() as f64 * xj;
        }
        let shift = cx / self.base.nrows() as f64;
        y.iter_mut().for_each(|v| *v -= shift);
    }

    fn scale(&self) -> f64 {
        (self.base.nnz() as f64).sqrt()
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        let mean = y.iter().sum::<f64>() / self.base.nrows() as f64;
        for (col, xj) in self.base.columns().iter().zip(x.iter_mut()) {
            let s: f64 = col.iter().map(|&z| y[z as usize]).sum();
            *xj = s - col.len() as f64 * mean;
        }
    }
}

/// A dense matrix seen as an operator.
#[derive(Debug, Clone, Copy)]
pub struct DenseOperator<'a> {
    a: ArrayView2<'a, f64>,
}

impl<'a> DenseOperator<'a> {
    pub fn new(a: ArrayView2<'a, f64>) -> Self {
        Self { a }
    }
}

impl LinearOperator for DenseOperator<'_> {
    fn nrows(&self) -> usize {
        self.a.nrows()
    }

    fn ncols(&self) -> usize {
        self.a.ncols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(self.a.rows()) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (yi, row) in y.iter().zip(self.a.rows()) {
            for (xj, a) in x.iter_mut().zip(row) {
                *xj += yi * a;
            }
        }
    }

    fn scale(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Contexts grouped by identical next-token support set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectiveClassSet {
    pub classes: Vec<Vec<u32>>,
    pub class_of: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl EffectiveClassSet {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Classes are numbered in order of their first context.
pub fn effective_classes(s: &SupportMatrix) -> EffectiveClassSet {
    let mut index: HashMap<&[u32], usize> = HashMap::new();
    let mut classes = Vec::new();
    let mut sizes = Vec::new();
    let mut class_of = Vec::with_capacity(s.ncols());
    for col in s.columns() {
        let c = *index.entry(col.as_slice()).or_insert_with(|| {
            classes.push(col.clone());
            sizes.push(0);
            classes.len() - 1
        });
        sizes[c] += 1;
        class_of.push(c);
    }
    EffectiveClassSet { classes, class_of, sizes }
}
