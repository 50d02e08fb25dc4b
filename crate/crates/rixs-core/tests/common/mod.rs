//! Shared test oracles. The dense operator builders here apply raw
//! creation/annihilation strings to every basis vector with global-parity
//! sign bookkeeping, independently of the Slater-Condon matrix-element
//! route used by the library.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rixs_core::fock::{ManyBodyBasis, SparseOperator};
use rixs_core::qchem_io::IntegralSet;

/// Combined-mask determinant: up spin-orbitals at positions 0..n, down at
/// n..2n, matching the library's operator-ordering convention.
fn combined(up: u64, down: u64, n: usize) -> u128 {
    up as u128 | ((down as u128) << n)
}

fn split(m: u128, n: usize) -> (u64, u64) {
    let mask = (1u128 << n) - 1;
    ((m & mask) as u64, (m >> n) as u64)
}

fn parity_below(m: u128, pos: usize) -> f64 {
    if (m & ((1u128 << pos) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn annihilate(m: u128, pos: usize) -> Option<(u128, f64)> {
    if m >> pos & 1 == 0 {
        return None;
    }
    Some((m & !(1u128 << pos), parity_below(m, pos)))
}

fn create(m: u128, pos: usize) -> Option<(u128, f64)> {
    if m >> pos & 1 == 1 {
        return None;
    }
    Some((m | (1u128 << pos), parity_below(m, pos)))
}

/// Dense Hamiltonian by explicit string action:
/// E0 + sum h_pq c+_ps c_qs + 1/2 sum V_pqrs c+_ps c+_rs' c_ss' c_qs.
pub fn dense_hamiltonian_oracle(set: &IntegralSet, basis: &ManyBodyBasis) -> DMatrix<Complex64> {
    let n = set.n_orb;
    let dim = basis.dimension();
    let pos = |p: usize, spin: usize| spin * n + p;
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let (up, down) = basis.state(col);
        let m0 = combined(up, down, n);
        out[(col, col)] += Complex64::new(set.e_frozen, 0.0);
        // One-body strings.
        for spin in 0..2 {
            for p in 0..n {
                for q in 0..n {
                    let h = set.h_at(p, q);
                    if h == 0.0 {
                        continue;
                    }
                    if let Some((m1, s1)) = annihilate(m0, pos(q, spin)) {
                        if let Some((m2, s2)) = create(m1, pos(p, spin)) {
                            let (u2, d2) = split(m2, n);
                            let row = basis.index_of(u2, d2).expect("sector closed");
                            out[(row, col)] += Complex64::new(h * s1 * s2, 0.0);
                        }
                    }
                }
            }
        }
        // Two-body strings, applied right to left.
        for spin_q in 0..2 {
            for spin_s in 0..2 {
                for p in 0..n {
                    for q in 0..n {
                        for r in 0..n {
                            for s in 0..n {
                                let v = set.v_at(p, q, r, s);
                                if v == 0.0 {
                                    continue;
                                }
                                let Some((m1, s1)) = annihilate(m0, pos(q, spin_q)) else {
                                    continue;
                                };
                                let Some((m2, s2)) = annihilate(m1, pos(s, spin_s)) else {
                                    continue;
                                };
                                let Some((m3, s3)) = create(m2, pos(r, spin_s)) else {
                                    continue;
                                };
                                let Some((m4, s4)) = create(m3, pos(p, spin_q)) else {
                                    continue;
                                };
                                let (u4, d4) = split(m4, n);
                                let row = basis.index_of(u4, d4).expect("sector closed");
                                out[(row, col)] +=
                                    Complex64::new(0.5 * v * s1 * s2 * s3 * s4, 0.0);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Dense one-body operator sum m_pq c+_ps c_qs by explicit string action.
pub fn dense_one_body_oracle(
    matrix: &[f64],
    n: usize,
    basis: &ManyBodyBasis,
) -> DMatrix<Complex64> {
    let dim = basis.dimension();
    let pos = |p: usize, spin: usize| spin * n + p;
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let (up, down) = basis.state(col);
        let m0 = combined(up, down, n);
        for spin in 0..2 {
            for p in 0..n {
                for q in 0..n {
                    let h = matrix[p * n + q];
                    if h == 0.0 {
                        continue;
                    }
                    if let Some((m1, s1)) = annihilate(m0, pos(q, spin)) {
                        if let Some((m2, s2)) = create(m1, pos(p, spin)) {
                            let (u2, d2) = split(m2, n);
                            let row = basis.index_of(u2, d2).expect("sector closed");
                            out[(row, col)] += Complex64::new(h * s1 * s2, 0.0);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Random integral set with full tensor symmetry, a dipole sidecar worth of
/// data and one tagged core orbital.
pub fn random_integral_set(
    n_orb: usize,
    n_elec: usize,
    two_sz: i32,
    seed: u64,
    scale: f64,
) -> IntegralSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = IntegralSet::zeros(n_orb, n_elec, two_sz);
    set.e_frozen = scale * (rng.gen::<f64>() - 0.5);
    for p in 0..n_orb {
        for q in 0..=p {
            set.set_h_sym(p, q, scale * (rng.gen::<f64>() - 0.5));
        }
    }
    for p in 0..n_orb {
        for q in 0..=p {
            for r in 0..=p {
                let s_max = if r == p { q } else { r };
                for s in 0..=s_max {
                    set.set_v_sym(p, q, r, s, 0.5 * scale * (rng.gen::<f64>() - 0.5));
                }
            }
        }
    }
    let mut dipole = [
        vec![0.0; n_orb * n_orb],
        vec![0.0; n_orb * n_orb],
        vec![0.0; n_orb * n_orb],
    ];
    for axis in dipole.iter_mut() {
        for p in 0..n_orb {
            for q in 0..=p {
                let v = scale * (rng.gen::<f64>() - 0.5);
                axis[p * n_orb + q] = v;
                axis[q * n_orb + p] = v;
            }
        }
    }
    set.dipole = Some(dipole);
    set.core_orbitals = vec![0];
    set
}

pub fn op_from_dense(m: &DMatrix<Complex64>, hermitian: bool) -> SparseOperator {
    let rows = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| (j, m[(i, j)])).collect())
        .collect();
    SparseOperator::from_rows(rows, hermitian)
}

pub fn op_from_dense_real(m: &DMatrix<f64>) -> SparseOperator {
    let rows = (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| (j, Complex64::new(m[(i, j)], 0.0)))
                .collect()
        })
        .collect();
    SparseOperator::from_rows(rows, true)
}

/// Random real-symmetric operator with spectrum rescaled into
/// [-fill*lambda, fill*lambda].
pub fn random_hermitian_in_band(
    dim: usize,
    lambda: f64,
    fill: f64,
    seed: u64,
) -> (SparseOperator, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..=i {
            let v = rng.gen::<f64>() - 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.max();
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo).max(1e-12);
    let scale = fill * lambda / half;
    let mut shifted = m;
    for i in 0..dim {
        shifted[(i, i)] -= center;
    }
    shifted *= scale;
    (op_from_dense_real(&shifted), shifted)
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

pub fn random_unit_complex(dim: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    v
}
