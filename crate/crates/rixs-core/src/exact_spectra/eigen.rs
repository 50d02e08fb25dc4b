//! Dense full diagonalization and a Lanczos solver for the lowest
//! eigenpairs of a sparse hermitian operator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::fock::SparseOperator;

use super::SpectraError;

/// Residual tolerance of the iterative solver, relative to the spectral norm.
pub const LANCZOS_TOL: f64 = 1e-9;

const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalues (ascending) and matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Eigenvalues in Hartree, ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: DMatrix<Complex64>,
}

impl SpectralDecomposition {
    pub fn n_states(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// Ground-state energy E_0 (the smallest eigenvalue).
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> DVector<Complex64> {
        self.eigenvectors.column(0).into_owned()
    }

    /// Coefficients of `v` in the eigenbasis: V^dagger v.
    pub fn to_eigenbasis(&self, v: &[Complex64]) -> Vec<Complex64> {
        let rhs = DVector::from_column_slice(v);
        let out = self.eigenvectors.ad_mul(&rhs);
        out.iter().copied().collect()
    }

    /// Sector-basis vector from eigenbasis coefficients: V w.
    pub fn from_eigenbasis(&self, w: &[Complex64]) -> Vec<Complex64> {
        let rhs = DVector::from_column_slice(w);
        let out = &self.eigenvectors * rhs;
        out.iter().copied().collect()
    }

    /// Max residual ||H v - E v|| over the stored pairs.
    pub fn max_residual(&self, op: &SparseOperator) -> f64 {
        let mut worst = 0.0f64;
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let v: Vec<Complex64> = self.eigenvectors.column(j).iter().copied().collect();
            let hv = op.apply(&v);
            let r: f64 = hv
                .iter()
                .zip(v.iter())
                .map(|(h, x)| (h - x * Complex64::new(e, 0.0)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }
}

/// Diagonalization mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagMode {
    /// Full dense diagonalization.
    Full,
    /// Lowest `k` eigenpairs via Lanczos with full reorthogonalization.
    LowestK(usize),
}

/// Diagonalizes a hermitian sparse operator.
pub fn diagonalize(
    op: &SparseOperator,
    mode: DiagMode,
) -> Result<SpectralDecomposition, SpectraError> {
    let scale = op.gershgorin_bound().max(1.0);
    let defect = op.hermiticity_defect();
    if defect > HERMITICITY_TOL * scale {
        return Err(SpectraError::NonHermitian { defect });
    }
    match mode {
        DiagMode::Full => Ok(dense_full(op)),
        DiagMode::LowestK(k) => {
            if k == 0 || k > op.dim() {
                return Err(SpectraError::TooManyPairs { k, dim: op.dim() });
            }
            lanczos_lowest(op, k)
        }
    }
}

fn dense_full(op: &SparseOperator) -> SpectralDecomposition {
    let dense = op.to_dense();
    let all_real = dense.iter().all(|v| v.im.abs() < 1e-15);
    let (mut evals, mut evecs): (Vec<f64>, DMatrix<Complex64>) = if all_real {
        let real = dense.map(|v| v.re);
        let se = nalgebra::SymmetricEigen::new(real);
        (
            se.eigenvalues.iter().copied().collect(),
            se.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        )
    } else {
        let se = nalgebra::SymmetricEigen::new(dense);
        (se.eigenvalues.iter().copied().collect(), se.eigenvectors)
    };
    sort_pairs(&mut evals, &mut evecs);
    SpectralDecomposition {
        eigenvalues: evals,
        eigenvectors: evecs,
    }
}

fn sort_pairs(evals: &mut [f64], evecs: &mut DMatrix<Complex64>) {
    let mut order: Vec<usize> = (0..evals.len()).collect();
    order.sort_by(|&a, &b| evals[a].partial_cmp(&evals[b]).expect("finite eigenvalues"));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    let sorted_vecs = DMatrix::from_fn(evecs.nrows(), evals.len(), |r, c| evecs[(r, order[c])]);
    evals.copy_from_slice(&sorted_vals);
    *evecs = sorted_vecs;
}

fn pseudo_random_vector(dim: usize, salt: u64) -> Vec<Complex64> {
    // Deterministic start vector; quality does not matter beyond avoiding
    // exact orthogonality to target eigenvectors.
    let mut state = 0x9e3779b97f4a7c15u64 ^ salt;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..dim).map(|_| Complex64::new(next(), next())).collect()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Lanczos with full reorthogonalization, growing the Krylov space in
/// stages until the lowest `k` Ritz pairs reach [`LANCZOS_TOL`].
fn lanczos_lowest(op: &SparseOperator, k: usize) -> Result<SpectralDecomposition, SpectraError> {
    let dim = op.dim();
    let norm_scale = op.gershgorin_bound().max(1e-300);

    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let mut v = pseudo_random_vector(dim, 1);
    let n0 = norm(&v);
    for x in &mut v {
        *x /= n0;
    }
    basis.push(v.clone());

    let mut stage_target = (4 * k + 40).min(dim);

    loop {
        while basis.len() <= stage_target {
            let j = alpha.len();
            let mut w = op.apply(&basis[j]);
            let a_j = dot(&basis[j], &w).re;
            alpha.push(a_j);
            // Full reorthogonalization, two passes.
            for _ in 0..2 {
                for prev in &basis {
                    let proj = dot(prev, &w);
                    for (wi, pi) in w.iter_mut().zip(prev) {
                        *wi -= proj * pi;
                    }
                }
            }
            let b_next = norm(&w);
            if basis.len() == dim {
                break;
            }
            if b_next < 1e-13 * norm_scale.max(1.0) {
                // Invariant subspace exhausted: inject a fresh direction.
                let mut fresh = pseudo_random_vector(dim, basis.len() as u64 + 7);
                for _ in 0..2 {
                    for prev in &basis {
                        let proj = dot(prev, &fresh);
                        for (fi, pi) in fresh.iter_mut().zip(prev) {
                            *fi -= proj * pi;
                        }
                    }
                }
                let nf = norm(&fresh);
                if nf < 1e-12 {
                    break; // whole space spanned
                }
                for x in &mut fresh {
                    *x /= nf;
                }
                beta.push(0.0);
                basis.push(fresh);
                continue;
            }
            beta.push(b_next);
            let next: Vec<Complex64> = w.into_iter().map(|x| x / b_next).collect();
            basis.push(next);
        }

        // Ritz pairs from the (real symmetric) tridiagonal projection.
        let m = alpha.len();
        let mut tri = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            tri[(i, i)] = alpha[i];
            if i + 1 < m {
                tri[(i, i + 1)] = beta[i];
                tri[(i + 1, i)] = beta[i];
            }
        }
        let se = nalgebra::SymmetricEigen::new(tri);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            se.eigenvalues[a]
                .partial_cmp(&se.eigenvalues[b])
                .expect("finite eigenvalues")
        });

        let kk = k.min(m);
        let mut evals = Vec::with_capacity(kk);
        let mut evecs = DMatrix::<Complex64>::zeros(dim, kk);
        for (out_col, &oi) in order.iter().take(kk).enumerate() {
            let y = se.eigenvectors.column(oi);
            let mut ritz = vec![Complex64::default(); dim];
            for (j, q) in basis.iter().take(m).enumerate() {
                let c = y[j];
                for (r, qi) in ritz.iter_mut().zip(q) {
                    *r += qi * Complex64::new(c, 0.0);
                }
            }
            let nv = norm(&ritz);
            for x in &mut ritz {
                *x /= nv;
            }
            evals.push(se.eigenvalues[oi]);
            for (r, x) in ritz.iter().enumerate() {
                evecs[(r, out_col)] = *x;
            }
        }

        let decomp = SpectralDecomposition {
            eigenvalues: evals,
            eigenvectors: evecs,
        };
        let achieved = decomp.max_residual(op);
        let spec_norm_est = decomp
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &e| acc.max(e.abs()))
            .max(norm_scale.min(1.0));
        if achieved <= LANCZOS_TOL * spec_norm_est.max(1e-300) || m >= dim {
            if achieved > LANCZOS_TOL * spec_norm_est.max(1e-300) {
                return Err(SpectraError::NonConvergence {
                    iterations: m,
                    residual: achieved,
                    requested: LANCZOS_TOL * spec_norm_est,
                });
            }
            return Ok(decomp);
        }
        stage_target = (stage_target * 2).min(dim);
        if stage_target == m {
            return Err(SpectraError::NonConvergence {
                iterations: m,
                residual: achieved,
                requested: LANCZOS_TOL * spec_norm_est,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_op(values: &[f64]) -> SparseOperator {
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, &v)| vec![(i, Complex64::new(v, 0.0))])
            .collect();
        SparseOperator::from_rows(rows, true)
    }

    fn random_sparse_hermitian(dim: usize, seed: u64) -> SparseOperator {
        // Dense-ish random symmetric matrix as triplets.
        let mut state = seed.wrapping_mul(0x2545f4914f6cdd1d) | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
        for i in 0..dim {
            for j in 0..=i {
                if i == j {
                    rows[i].push((i, Complex64::new(2.0 * next(), 0.0)));
                } else if next().abs() < 0.1 {
                    let v = Complex64::new(next(), next());
                    rows[i].push((j, v));
                    rows[j].push((i, v.conj()));
                }
            }
        }
        SparseOperator::from_rows(rows, true)
    }

    #[test]
    fn full_diagonalization_sorts_ascending() {
        let op = diag_op(&[3.0, 1.0, 2.0]);
        let d = diagonalize(&op, DiagMode::Full).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let rows = vec![
            vec![(1, Complex64::new(1.0, 0.0))],
            vec![(0, Complex64::new(0.5, 0.0))],
        ];
        let op = SparseOperator::from_rows(rows, false);
        assert!(matches!(
            diagonalize(&op, DiagMode::Full),
            Err(SpectraError::NonHermitian { .. })
        ));
    }

    #[test]
    fn lanczos_matches_full_on_random_200() {
        let op = random_sparse_hermitian(200, 42);
        let full = diagonalize(&op, DiagMode::Full).unwrap();
        let low = diagonalize(&op, DiagMode::LowestK(5)).unwrap();
        for i in 0..5 {
            assert!(
                (full.eigenvalues[i] - low.eigenvalues[i]).abs() < 1e-8,
                "pair {i}: {} vs {}",
                full.eigenvalues[i],
                low.eigenvalues[i]
            );
        }
        assert!(low.max_residual(&op) <= LANCZOS_TOL * op.gershgorin_bound());
    }

    #[test]
    fn lanczos_handles_degenerate_spectrum() {
        let op = diag_op(&[1.0, 1.0, 1.0, 2.0, 3.0]);
        let low = diagonalize(&op, DiagMode::LowestK(4)).unwrap();
        assert!((low.eigenvalues[0] - 1.0).abs() < 1e-10);
        assert!((low.eigenvalues[3] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn residual_invariant_holds_on_full_path() {
        let op = random_sparse_hermitian(60, 7);
        let d = diagonalize(&op, DiagMode::Full).unwrap();
        let bound = op.gershgorin_bound();
        assert!(d.max_residual(&op) <= 1e-9 * bound.max(1.0));
        // Orthonormality of eigenvector columns.
        let g = d.eigenvectors.ad_mul(&d.eigenvectors);
        for i in 0..d.n_states() {
            for j in 0..d.n_states() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-10);
            }
        }
    }
}
