use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Complex sparse matrix in coordinate form, kept sorted by (column, row)
/// with duplicates summed and exact zeros dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl SparseMatrix {
    pub fn new(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, Complex64)>) -> Self {
        entries.sort_by_key(|e| (e.1, e.0));
        let mut out: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        out.retain(|e| e.2 != Complex64::new(0.0, 0.0));
        Self { nrows, ncols, entries: out }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, n, (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect())
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries.binary_search_by_key(&(c, r), |e| (e.1, e.0)).map(|i| self.entries[i].2).unwrap_or_default()
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.ncols, self.nrows, self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect())
    }

    pub fn conj(&self) -> Self {
        Self { entries: self.entries.iter().map(|&(r, c, v)| (r, c, v.conj())).collect(), ..*self }
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.nrows, self.ncols, self.entries.iter().map(|&(r, c, v)| (r, c, v * s)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::new(self.nrows, self.ncols, self.entries.iter().chain(&other.entries).cloned().collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut by_col: HashMap<usize, Vec<(usize, Complex64)>> = HashMap::new();
        for &(r, c, v) in &self.entries {
            by_col.entry(c).or_default().push((r, v));
        }
        let mut out = Vec::new();
        for &(k, j, b) in &other.entries {
            if let Some(col) = by_col.get(&k) {
                for &(i, a) in col {
                    out.push((i, j, a * b));
                }
            }
        }
        Self::new(self.nrows, other.ncols, out)
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.nnz() * other.nnz());
        for &(p, q, a) in &self.entries {
            for &(r, s, b) in &other.entries {
                out.push((r + other.nrows * p, s + other.ncols * q, a * b));
            }
        }
        Self::new(self.nrows * other.nrows, self.ncols * other.ncols, out)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.nrows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}
