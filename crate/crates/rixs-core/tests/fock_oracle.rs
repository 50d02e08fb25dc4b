//! Dense-oracle equivalence and structural properties of the
//! second-quantized operator builders.

mod common;

use common::*;
use num_complex::Complex64;
use rixs_core::fock::{
    build_basis, build_cvs_dipole, build_hamiltonian, build_number_operator, cvs_dipole_matrix,
};

#[test]
fn hamiltonian_matches_string_oracle_on_random_sets() {
    for (seed, n_elec, two_sz) in [(1u64, 4usize, 0i32), (2, 3, 1), (3, 5, 1), (4, 2, 2)] {
        let set = random_integral_set(4, n_elec, two_sz, seed, 1.0);
        let basis = build_basis(4, n_elec, two_sz).unwrap();
        let h = build_hamiltonian(&set, &basis).unwrap();
        let oracle = dense_hamiltonian_oracle(&set, &basis);
        let diff = max_abs_diff(&h.to_dense(), &oracle);
        assert!(
            diff < 1e-12,
            "seed {seed} sector ({n_elec},{two_sz}): max diff {diff}"
        );
    }
}

#[test]
fn hamiltonian_is_hermitian_and_commutes_with_number_operator() {
    let set = random_integral_set(4, 3, 1, 9, 1.0);
    let basis = build_basis(4, 3, 1).unwrap();
    let h = build_hamiltonian(&set, &basis).unwrap();
    assert!(h.hermiticity_defect() < 1e-12);
    let n_op = build_number_operator(&basis);
    let hd = h.to_dense();
    let nd = n_op.to_dense();
    let comm = &hd * &nd - &nd * &hd;
    let worst = comm.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    assert!(worst < 1e-12, "commutator norm {worst}");
}

#[test]
fn cvs_dipole_matches_masked_one_body_oracle() {
    let set = random_integral_set(4, 3, 1, 21, 1.0);
    let basis = build_basis(4, 3, 1).unwrap();
    let pol = [0.6, -0.3, 0.9];
    let masked = cvs_dipole_matrix(&set, pol).unwrap();
    let op = build_cvs_dipole(&set, &basis, pol).unwrap();
    let oracle = dense_one_body_oracle(&masked, 4, &basis);
    let diff = max_abs_diff(&op.to_dense(), &oracle);
    assert!(diff < 1e-12, "max diff {diff}");

    // Matrix elements <phi|D|psi> agree with the oracle on random vectors.
    let phi = random_unit_complex(basis.dimension(), 5);
    let psi = random_unit_complex(basis.dimension(), 6);
    let dv = op.apply(&psi);
    let lhs: Complex64 = phi.iter().zip(&dv).map(|(a, b)| a.conj() * b).sum();
    let ov = oracle * nalgebra::DVector::from_column_slice(&psi);
    let rhs: Complex64 = phi.iter().zip(ov.iter()).map(|(a, b)| a.conj() * b).sum();
    assert!((lhs - rhs).norm() < 1e-12);
}

#[test]
fn cvs_dipole_moves_between_core_sectors_only() {
    // Energies aside, the CVS dipole must connect determinants whose
    // number of core holes differs by exactly one.
    let set = random_integral_set(4, 5, 1, 33, 1.0);
    let basis = build_basis(4, 5, 1).unwrap();
    let op = build_cvs_dipole(&set, &basis, [1.0, 0.0, 0.0]).unwrap();
    let core = 0usize;
    let holes = |i: usize| -> u32 {
        let (up, down) = basis.state(i);
        2 - ((up >> core & 1) + (down >> core & 1)) as u32
    };
    let dense = op.to_dense();
    for i in 0..basis.dimension() {
        for j in 0..basis.dimension() {
            if dense[(i, j)].norm() > 1e-14 {
                let d = holes(i).abs_diff(holes(j));
                assert_eq!(d, 1, "element ({i},{j}) changes core holes by {d}");
            }
        }
    }
}

#[test]
fn cluster_scale_basis_builds_quickly() {
    let t0 = std::time::Instant::now();
    let basis = build_basis(8, 11, 1).unwrap();
    assert_eq!(basis.dimension(), 1568);
    let set = random_integral_set(8, 11, 1, 44, 0.5);
    let h = build_hamiltonian(&set, &basis).unwrap();
    assert!(h.hermiticity_defect() < 1e-11);
    assert!(
        t0.elapsed().as_secs_f64() < 20.0,
        "cluster-scale build took {:?}",
        t0.elapsed()
    );
}
