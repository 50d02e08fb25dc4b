//! Statistical and cross-module properties of the quantum-algorithm
//! emulator.

mod common;

use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rixs_core::emulator::{
    multinomial_tv_expectation, prepare_rixs_state, qpe_distribution, sample_spectrum,
    success_probability, success_probability_from_norms, total_variation, AxisConvention,
    PrepMethod, QpeModel, SampleMode, Window,
};
use rixs_core::exact_spectra::{diagonalize, DiagMode};
use rixs_core::resolvent::{select_degree, DegreeMode};
use rixs_core::units::hartree_to_ev;

fn random_weights(n: usize, seed: u64, lambda: f64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= total;
    }
    w.into_iter()
        .map(|wi| (wi, lambda * 1.7 * (rng.gen::<f64>() - 0.5)))
        .collect()
}

/// Exact stick spectrum pushed through the axis map and binned at the same
/// width: the infinite-precision limit of the QPE histogram.
fn binned_sticks(model: &QpeModel, states: &[(f64, f64)], width_ev: f64) -> Vec<(i64, f64)> {
    let mut map = std::collections::BTreeMap::new();
    for &(w, e) in states {
        let omega = match model.axis {
            AxisConvention::EnergyLoss => e - model.e0,
            AxisConvention::GroundShifted => model.e0 + e,
        };
        let k = (hartree_to_ev(omega) / width_ev).floor() as i64;
        *map.entry(k).or_insert(0.0) += w;
    }
    map.into_iter().collect()
}

#[test]
fn kaiser_qpe_converges_to_binned_sticks_in_total_variation() {
    // 20-state random instance, n_omega = 16, Kaiser window: the binned
    // measurement distribution must be within 1e-3 TV of the exact sticks
    // binned at the same resolution.
    let lambda = 0.05;
    let model = QpeModel {
        n_omega: 16,
        window: Window::Kaiser { beta: 13.0 },
        lambda,
        e0: 0.0,
        axis: AxisConvention::EnergyLoss,
    };
    let states = random_weights(20, 1, lambda);
    let width = 0.2;
    let (spec, _) = sample_spectrum(&model, &states, SampleMode::Analytic, width).unwrap();
    let exact = binned_sticks(&model, &states, width);
    // Align on bin index.
    let mut p = std::collections::BTreeMap::new();
    for (x, mass) in spec.grid.iter().zip(
        spec.grid
            .iter()
            .map(|g| {
                spec.sticks
                    .iter()
                    .find(|(sx, _)| (sx - g).abs() < 1e-12)
                    .map(|&(_, m)| m)
                    .unwrap_or(0.0)
            })
            .collect::<Vec<_>>(),
    ) {
        p.insert((x / width).floor() as i64, mass);
    }
    let keys: std::collections::BTreeSet<i64> = p
        .keys()
        .copied()
        .chain(exact.iter().map(|&(k, _)| k))
        .collect();
    let mut tv = 0.0;
    for k in keys {
        let a = p.get(&k).copied().unwrap_or(0.0);
        let b = exact
            .iter()
            .find(|&&(kk, _)| kk == k)
            .map(|&(_, m)| m)
            .unwrap_or(0.0);
        tv += (a - b).abs();
    }
    tv *= 0.5;
    assert!(tv < 1e-3, "TV {tv:.3e}");
}

#[test]
fn two_thousand_shots_within_multinomial_band_over_100_seeds() {
    let lambda = 0.05;
    let model = QpeModel {
        n_omega: 12,
        window: Window::Kaiser { beta: 13.0 },
        lambda,
        e0: 0.0,
        axis: AxisConvention::EnergyLoss,
    };
    let states = random_weights(12, 9, lambda);
    let dist = qpe_distribution(&model, &states).unwrap();
    let bound = multinomial_tv_expectation(&dist, 2000);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(77).wrapping_add(5));
        let mut counts = vec![0u64; dist.len()];
        // Draw from the analytic distribution directly (the oracle is the
        // multinomial law itself).
        let mut cdf = Vec::with_capacity(dist.len());
        let mut acc = 0.0;
        for &p in &dist {
            acc += p;
            cdf.push(acc);
        }
        for _ in 0..2000 {
            let u = rng.gen::<f64>();
            let j = cdf.partition_point(|&x| x < u).min(dist.len() - 1);
            counts[j] += 1;
        }
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / 2000.0).collect();
        let tv = total_variation(&dist, &freq);
        assert!(tv <= 3.0 * bound, "seed {seed}: TV {tv:.4} vs bound {bound:.4}");
    }
}

#[test]
fn sampler_chi_square_statistic_is_calibrated() {
    // Aggregate chi-square over 100 seeded trials on a fixed 10-state
    // instance must sit below the 99.9% quantile of its chi-square law.
    let lambda = 0.04;
    let model = QpeModel {
        n_omega: 8,
        window: Window::Uniform,
        lambda,
        e0: 0.0,
        axis: AxisConvention::EnergyLoss,
    };
    let states = random_weights(10, 4, lambda);
    let dist = qpe_distribution(&model, &states).unwrap();
    let shots = 4000u64;
    // Pool bins so every expected count is comfortably large.
    let mut pools: Vec<(usize, f64)> = Vec::new(); // (bin, p)
    for (j, &p) in dist.iter().enumerate() {
        if p * shots as f64 >= 8.0 {
            pools.push((j, p));
        }
    }
    let rest: f64 = 1.0 - pools.iter().map(|&(_, p)| p).sum::<f64>();
    let df_per_trial = pools.len(); // pools + rest category - 1
    let mut total_stat = 0.0;
    for seed in 0..100u64 {
        let (_, samples) = sample_spectrum(
            &model,
            &states,
            SampleMode::Shots { shots, seed },
            0.2,
        )
        .unwrap();
        let mut counts = std::collections::HashMap::new();
        for s in &samples {
            *counts.entry(s.bin).or_insert(0u64) += 1;
        }
        let mut stat = 0.0;
        let mut pooled_count = shots;
        for &(j, p) in &pools {
            let o = counts.get(&j).copied().unwrap_or(0) as f64;
            let e = p * shots as f64;
            stat += (o - e) * (o - e) / e;
            pooled_count -= counts.get(&j).copied().unwrap_or(0);
        }
        if rest > 0.0 {
            let e = rest * shots as f64;
            let o = pooled_count as f64;
            stat += (o - e) * (o - e) / e;
        }
        total_stat += stat;
    }
    // Wilson-Hilferty approximation of the chi-square 99.9% quantile.
    let df = (100 * df_per_trial) as f64;
    let z = 3.0902; // Phi^{-1}(0.999)
    let q999 = df * (1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt()).powi(3);
    assert!(
        total_stat < q999,
        "aggregate chi-square {total_stat:.1} exceeds 99.9% quantile {q999:.1} (df {df})"
    );
}

#[test]
fn success_probability_matches_eigendecomposition_oracle() {
    // P_R from prepared-state norms equals a brute-force evaluation of the
    // closed formula via the eigendecomposition.
    let set = random_integral_set(4, 3, 1, 77, 1.0);
    let basis = rixs_core::fock::build_basis(4, 3, 1).unwrap();
    let h = rixs_core::fock::build_hamiltonian(&set, &basis).unwrap();
    let d_in = rixs_core::fock::build_cvs_dipole(&set, &basis, [1.0, 0.0, 0.0]).unwrap();
    let d_out = rixs_core::fock::build_cvs_dipole(&set, &basis, [0.0, 1.0, 0.0]).unwrap();
    let decomp = diagonalize(&h, DiagMode::Full).unwrap();
    let ground: Vec<Complex64> = decomp.ground_state().iter().copied().collect();
    let gamma = 0.02;
    let omega = 0.5;
    let lambda_d = 1.37; // arbitrary positive block-encoding norm
    let state = prepare_rixs_state(
        &h,
        decomp.ground_energy(),
        &ground,
        &d_in,
        &d_out,
        omega,
        gamma,
        lambda_d,
        PrepMethod::Exact,
    )
    .unwrap();
    let p = success_probability(&state).unwrap();

    // Oracle: |R|^2 = sum_f |sum_n <f|Dout^dag|n><n|Din|0> / (w - dE + iG)|^2.
    let a = decomp.to_eigenbasis(&d_in.apply(&ground));
    let e0 = decomp.ground_energy();
    let x: Vec<Complex64> = decomp
        .eigenvalues
        .iter()
        .zip(&a)
        .map(|(&en, ai)| ai / Complex64::new(omega - (en - e0), gamma))
        .collect();
    let y = d_out.apply_adjoint(&decomp.from_eigenbasis(&x));
    let r2: f64 = y.iter().map(|c| c.norm_sqr()).sum();
    let din2: f64 = d_in.apply(&ground).iter().map(|c| c.norm_sqr()).sum();
    let oracle = gamma * gamma * r2 / (lambda_d * lambda_d * din2);
    assert!((p - oracle).abs() < 1e-10 * oracle.max(1e-30), "{p} vs {oracle}");

    // Algebraic identity: same value from the norms directly.
    let p2 = success_probability_from_norms(gamma, r2.sqrt(), lambda_d, din2.sqrt()).unwrap();
    assert!((p - p2).abs() < 1e-15);
}

#[test]
fn chebyshev_preparation_reaches_target_fidelity_on_random_instance() {
    // 30-dimensional random instance: |<psi_cheb|psi_exact>| > 1 - 1e-5 at
    // the analytic degree for eps = 1e-4.
    let lambda = 1.0;
    let (h, dense) = random_hermitian_in_band(30, lambda, 0.9, 11);
    let eig = nalgebra::SymmetricEigen::new(dense.clone());
    let mut idx = 0;
    for i in 0..30 {
        if eig.eigenvalues[i] < eig.eigenvalues[idx] {
            idx = i;
        }
    }
    let e0 = eig.eigenvalues[idx];
    let ground: Vec<Complex64> = eig
        .eigenvectors
        .column(idx)
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let d_in = {
        let (op, _) = random_hermitian_in_band(30, 0.5, 0.9, 12);
        op
    };
    let d_out = {
        let (op, _) = random_hermitian_in_band(30, 0.5, 0.9, 13);
        op
    };
    let gamma = 0.05;
    let omega = 0.4;
    let exact = prepare_rixs_state(
        &h, e0, &ground, &d_in, &d_out, omega, gamma, 1.0, PrepMethod::Exact,
    )
    .unwrap();
    let degree = select_degree(lambda, gamma, DegreeMode::analytic(1e-4)).unwrap();
    let cheb = prepare_rixs_state(
        &h,
        e0,
        &ground,
        &d_in,
        &d_out,
        omega,
        gamma,
        1.0,
        PrepMethod::Chebyshev { degree, lambda },
    )
    .unwrap();
    let fidelity: f64 = exact
        .vector
        .iter()
        .zip(&cheb.vector)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .norm();
    assert!(fidelity > 1.0 - 1e-5, "fidelity {fidelity}");
}

#[test]
fn ground_shifted_axis_flag_changes_reported_energies() {
    let lambda = 0.05;
    let states = random_weights(5, 21, lambda);
    let mk = |axis| QpeModel {
        n_omega: 10,
        window: Window::Uniform,
        lambda,
        e0: 0.01,
        axis,
    };
    let (loss, _) = sample_spectrum(&mk(AxisConvention::EnergyLoss), &states, SampleMode::Analytic, 0.1).unwrap();
    let (lit, _) = sample_spectrum(&mk(AxisConvention::GroundShifted), &states, SampleMode::Analytic, 0.1).unwrap();
    // Same total mass, shifted axis.
    let m1: f64 = loss.sticks.iter().map(|&(_, m)| m).sum();
    let m2: f64 = lit.sticks.iter().map(|&(_, m)| m).sum();
    assert!((m1 - 1.0).abs() < 1e-9 && (m2 - 1.0).abs() < 1e-9);
    let mean = |s: &rixs_core::exact_spectra::SpectrumResult| -> f64 {
        s.sticks.iter().map(|&(x, m)| x * m).sum()
    };
    let shift = mean(&lit) - mean(&loss);
    // Axis conventions differ by 2 E_0.
    assert!(
        (shift - 2.0 * hartree_to_ev(0.01)).abs() < 0.2,
        "shift {shift}"
    );
}
