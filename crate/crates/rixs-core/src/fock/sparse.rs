//! Compressed-sparse-row operator with complex entries.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::ASSEMBLY_DROP_TOL;

/// Sparse operator in CSR layout. Immutable once built; safe to share
/// across threads for concurrent matrix-vector products.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Assembles from per-row entry lists. Entries within a row are summed
    /// per column and magnitudes below [`ASSEMBLY_DROP_TOL`] are dropped.
    pub fn from_rows(rows: Vec<Vec<(usize, Complex64)>>, hermitian: bool) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                if v.norm() >= ASSEMBLY_DROP_TOL {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseOperator {
            dim,
            row_ptr,
            cols,
            vals,
            hermitian,
        }
    }

    /// Diagonal operator `value * I`.
    pub fn scaled_identity(dim: usize, value: Complex64) -> Self {
        let rows = (0..dim).map(|i| vec![(i, value)]).collect();
        SparseOperator::from_rows(rows, value.im.abs() < ASSEMBLY_DROP_TOL)
    }

    /// A + shift * I. Used to re-center a spectrum inside a rescaling band;
    /// resolvent and measurement physics depend only on energy differences.
    pub fn with_diagonal_shift(&self, shift: Complex64) -> SparseOperator {
        let rows = (0..self.dim)
            .map(|i| {
                let mut row: Vec<(usize, Complex64)> = self.row(i).collect();
                row.push((i, shift));
                row
            })
            .collect();
        SparseOperator::from_rows(rows, self.hermitian && shift.im.abs() < ASSEMBLY_DROP_TOL)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian_flag(&self) -> bool {
        self.hermitian
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.cols[lo..hi].iter().copied().zip(self.vals[lo..hi].iter().copied())
    }

    /// y = A x.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim, "vector length mismatch");
        (0..self.dim)
            .into_par_iter()
            .map(|i| {
                let mut acc = Complex64::default();
                for (c, v) in self.row(i) {
                    acc += v * x[c];
                }
                acc
            })
            .collect()
    }

    /// y = A^dagger x. For hermitian operators this is `apply`.
    pub fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        if self.hermitian {
            return self.apply(x);
        }
        assert_eq!(x.len(), self.dim, "vector length mismatch");
        let mut y = vec![Complex64::default(); self.dim];
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                y[c] += v.conj() * x[i];
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                m[(i, c)] = v;
            }
        }
        m
    }

    /// max_ij |A_ij - conj(A_ji)|, for hermiticity checks.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut map = std::collections::HashMap::with_capacity(self.nnz());
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                map.insert((i, c), v);
            }
        }
        let mut defect = 0.0f64;
        for (&(i, j), &v) in &map {
            let vt = map.get(&(j, i)).copied().unwrap_or_default();
            defect = defect.max((v - vt.conj()).norm());
        }
        defect
    }

    /// Gershgorin bound on the spectral radius (valid for hermitian A).
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest-magnitude eigenvalue estimate by power iteration; a lower
    /// bound on the spectral norm of a hermitian operator.
    pub fn power_norm_estimate(&self, iterations: usize) -> f64 {
        if self.dim == 0 {
            return 0.0;
        }
        // Deterministic pseudo-random start to avoid unlucky orthogonality.
        let mut x: Vec<Complex64> = (0..self.dim)
            .map(|i| {
                let t = (i as f64 * 0.7548776662466927).fract() - 0.5;
                Complex64::new(1.0 + t, 0.0)
            })
            .collect();
        let mut norm = 0.0;
        for _ in 0..iterations {
            let y = self.apply(&x);
            norm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            x = y.into_iter().map(|v| v / norm).collect();
        }
        norm
    }

    /// Debug dump, one `row col re im` line per stored entry.
    pub fn write_debug<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                writeln!(w, "{} {} {:.17e} {:.17e}", i, c, v.re, v.im)?;
            }
        }
        Ok(())
    }
}
