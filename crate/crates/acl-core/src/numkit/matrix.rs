//! Dense row-major matrix with the handful of products the network needs.

use crate::error::{AclError, Result};

/// Compute precision for the matrix product kernels.
///
/// `F64` is the default and the only mode permitted for gradient checking.
/// `F32` runs the three hot product kernels in single precision for
/// training throughput; inputs and outputs stay `f64` at the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl Default for Precision {
    fn default() -> Self {
        Precision::F64
    }
}

/// Dense 2-D array of reals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(AclError::dim(
                "Matrix::from_vec",
                format!("{rows}x{cols}"),
                format!("{} values", data.len()),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Build from nested rows; all rows must have equal width.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(AclError::dim(
                    format!("Matrix::from_rows row {i}"),
                    cols,
                    r.len(),
                ));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// n x 1 column holding `data`.
    pub fn column(data: Vec<f64>) -> Self {
        Matrix {
            rows: data.len(),
            cols: 1,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// New matrix holding the selected rows, in the given order.
    pub fn gather_rows(&self, indices: &[usize]) -> Result<Matrix> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(AclError::Data(format!(
                    "row index {i} out of range for {} rows",
                    self.rows
                )));
            }
            data.extend_from_slice(self.row(i));
        }
        Ok(Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        })
    }

    /// self (m x k) * other (k x n) -> (m x n).
    pub fn matmul(&self, other: &Matrix, precision: Precision) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(AclError::dim(
                "matmul",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let (m, k, n) = (self.rows, self.cols, other.cols);
        match precision {
            Precision::F64 => {
                let mut out = vec![0.0f64; m * n];
                for i in 0..m {
                    let a_row = &self.data[i * k..(i + 1) * k];
                    let o_row = &mut out[i * n..(i + 1) * n];
                    for (l, &a) in a_row.iter().enumerate() {
                        let b_row = &other.data[l * n..(l + 1) * n];
                        for (o, &b) in o_row.iter_mut().zip(b_row) {
                            *o += a * b;
                        }
                    }
                }
                Ok(Matrix {
                    rows: m,
                    cols: n,
                    data: out,
                })
            }
            Precision::F32 => {
                let a32: Vec<f32> = self.data.iter().map(|&v| v as f32).collect();
                let b32: Vec<f32> = other.data.iter().map(|&v| v as f32).collect();
                let mut out = vec![0.0f32; m * n];
                for i in 0..m {
                    let a_row = &a32[i * k..(i + 1) * k];
                    let o_row = &mut out[i * n..(i + 1) * n];
                    for (l, &a) in a_row.iter().enumerate() {
                        let b_row = &b32[l * n..(l + 1) * n];
                        for (o, &b) in o_row.iter_mut().zip(b_row) {
                            *o += a * b;
                        }
                    }
                }
                Ok(Matrix {
                    rows: m,
                    cols: n,
                    data: out.into_iter().map(f64::from).collect(),
                })
            }
        }
    }

    /// self^T (k x m -> m x k transposed) * other: computes
    /// A^T B for A = self (n x m), other (n x p) -> (m x p).
    pub fn matmul_tn(&self, other: &Matrix, precision: Precision) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(AclError::dim(
                "matmul_tn",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let (n, m, p) = (self.rows, self.cols, other.cols);
        match precision {
            Precision::F64 => {
                let mut out = vec![0.0f64; m * p];
                for s in 0..n {
                    let a_row = &self.data[s * m..(s + 1) * m];
                    let b_row = &other.data[s * p..(s + 1) * p];
                    for (i, &a) in a_row.iter().enumerate() {
                        let o_row = &mut out[i * p..(i + 1) * p];
                        for (o, &b) in o_row.iter_mut().zip(b_row) {
                            *o += a * b;
                        }
                    }
                }
                Ok(Matrix {
                    rows: m,
                    cols: p,
                    data: out,
                })
            }
            Precision::F32 => {
                let a32: Vec<f32> = self.data.iter().map(|&v| v as f32).collect();
                let b32: Vec<f32> = other.data.iter().map(|&v| v as f32).collect();
                let mut out = vec![0.0f32; m * p];
                for s in 0..n {
                    let a_row = &a32[s * m..(s + 1) * m];
                    let b_row = &b32[s * p..(s + 1) * p];
                    for (i, &a) in a_row.iter().enumerate() {
                        let o_row = &mut out[i * p..(i + 1) * p];
                        for (o, &b) in o_row.iter_mut().zip(b_row) {
                            *o += a * b;
                        }
                    }
                }
                Ok(Matrix {
                    rows: m,
                    cols: p,
                    data: out.into_iter().map(f64::from).collect(),
                })
            }
        }
    }

    /// self (n x p) * other^T for other (m x p) -> (n x m).
    pub fn matmul_nt(&self, other: &Matrix, precision: Precision) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(AclError::dim(
                "matmul_nt",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let (n, p, m) = (self.rows, self.cols, other.rows);
        match precision {
            Precision::F64 => {
                let mut out = vec![0.0f64; n * m];
                for i in 0..n {
                    let a_row = &self.data[i * p..(i + 1) * p];
                    for j in 0..m {
                        let b_row = &other.data[j * p..(j + 1) * p];
                        let mut acc = 0.0;
                        for (&a, &b) in a_row.iter().zip(b_row) {
                            acc += a * b;
                        }
                        out[i * m + j] = acc;
                    }
                }
                Ok(Matrix {
                    rows: n,
                    cols: m,
                    data: out,
                })
            }
            Precision::F32 => {
                let a32: Vec<f32> = self.data.iter().map(|&v| v as f32).collect();
                let b32: Vec<f32> = other.data.iter().map(|&v| v as f32).collect();
                let mut out = vec![0.0f64; n * m];
                for i in 0..n {
                    let a_row = &a32[i * p..(i + 1) * p];
                    for j in 0..m {
                        let b_row = &b32[j * p..(j + 1) * p];
                        let mut acc = 0.0f32;
                        for (&a, &b) in a_row.iter().zip(b_row) {
                            acc += a * b;
                        }
                        out[i * m + j] = f64::from(acc);
                    }
                }
                Ok(Matrix {
                    rows: n,
                    cols: m,
                    data: out,
                })
            }
        }
    }

    /// Adds `v` to every row in place; `v.len()` must equal `cols`.
    pub fn add_row_vector(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.cols {
            return Err(AclError::dim("add_row_vector", self.cols, v.len()));
        }
        for r in 0..self.rows {
            for (x, &b) in self.row_mut(r).iter_mut().zip(v) {
                *x += b;
            }
        }
        Ok(())
    }

    /// Column sums as a vector of length `cols`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (s, &x) in sums.iter_mut().zip(self.row(r)) {
                *s += x;
            }
        }
        sums
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale_in_place(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        self.map(|v| v * c)
    }

    /// self += other, elementwise.
    pub fn add_in_place(&mut self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(AclError::dim(
                "add_in_place",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    /// self += c * other, elementwise.
    pub fn add_scaled_in_place(&mut self, other: &Matrix, c: f64) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(AclError::dim(
                "add_scaled_in_place",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    /// Errors unless every entry is finite.
    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        for (i, &v) in self.data.iter().enumerate() {
            if !v.is_finite() {
                return Err(AclError::numeric(
                    context,
                    format!(
                        "non-finite value {v} at ({}, {})",
                        i / self.cols.max(1),
                        i % self.cols.max(1)
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Row-wise softmax with max subtraction; each output row sums to 1.
pub fn softmax_rows(x: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for r in 0..x.rows() {
        let row = x.row(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let orow = out.row_mut(r);
        let mut sum = 0.0;
        for (o, &v) in orow.iter_mut().zip(row) {
            let e = (v - max).exp();
            *o = e;
            sum += e;
        }
        for o in orow.iter_mut() {
            *o /= sum;
        }
    }
    out
}
