//! Subcommand implementations. Each command reads its inputs, performs one
//! pipeline stage, writes its product files plus a machine-readable summary
//! JSON into the output directory, and returns the summary value.

use std::fs;
use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use rixs_core::bliss_thc::{self, FactorDump, FitConfig};
use rixs_core::emulator::{
    self, parse_reference_csv, prepare_rixs_state, sample_reference, sample_spectrum,
    AxisConvention, PrepMethod, QpeModel, SampleMode, Window,
};
use rixs_core::exact_spectra::{
    diagonalize, rixs_amplitudes, rixs_spectrum, xas_spectrum, DiagMode, SpectralDecomposition,
};
use rixs_core::fock::{
    build_basis, build_hamiltonian, cvs_dipole_matrix, DipoleMode, ManyBodyBasis, SparseOperator,
};
use rixs_core::qchem_io::{parse_dipole_sidecar, parse_fcidump, IntegralSet};
use rixs_core::resolvent::{self, DegreeMode};
use rixs_core::resources::{self, SystemEntry, TableConfig, WalkModel};
use rixs_core::units::{ev_to_hartree, hartree_to_ev};

use crate::config::RunConfig;
use crate::errors::{CliError, CliResult, ExitClass};

pub struct Ctx {
    pub cfg: RunConfig,
}

impl Ctx {
    pub fn new(cfg: RunConfig) -> CliResult<Self> {
        fs::create_dir_all(&cfg.out_dir)?;
        Ok(Ctx { cfg })
    }

    fn out(&self, name: &str) -> PathBuf {
        self.cfg.out_dir.join(name)
    }

    fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        fs::write(self.out(name), contents)?;
        Ok(())
    }

    fn write_summary(&self, name: &str, value: &Value) -> CliResult<()> {
        self.write(
            name,
            &format!("{}\n", serde_json::to_string_pretty(value).expect("json")),
        )
    }

    fn write_effective_config(&self) -> CliResult<()> {
        self.write("effective_config.txt", &self.cfg.dump())
    }

    fn load_integrals(&self) -> CliResult<(IntegralSet, Vec<String>)> {
        let path = self
            .cfg
            .fcidump
            .as_ref()
            .ok_or_else(|| CliError::usage("--fcidump is required for this command"))?;
        let text = fs::read_to_string(path)?;
        let parsed = parse_fcidump(&text)?;
        let mut warnings = parsed.warnings;
        let mut set = parsed.integrals;
        if let Some(dip) = &self.cfg.dipole {
            let sidecar = fs::read_to_string(dip)?;
            let with_dipole = parse_dipole_sidecar(&sidecar, &set)?;
            warnings.extend(with_dipole.warnings);
            set = with_dipole.integrals;
        }
        Ok((set, warnings))
    }

    fn dipole_mode(&self) -> CliResult<DipoleMode> {
        match self.cfg.dipole_mode.as_str() {
            "cvs" => Ok(DipoleMode::Cvs),
            "full" => Ok(DipoleMode::Full),
            other => Err(CliError::usage(format!(
                "dipole_mode must be cvs or full, got {other:?}"
            ))),
        }
    }

    fn degree_mode(&self) -> CliResult<DegreeMode> {
        match self.cfg.degree_mode.as_str() {
            "calibrated" => Ok(DegreeMode::calibrated()),
            "analytic" => Ok(DegreeMode::analytic(self.cfg.analytic_eps)),
            other => Err(CliError::usage(format!(
                "degree_mode must be calibrated or analytic, got {other:?}"
            ))),
        }
    }

    fn qpe_window(&self) -> CliResult<Window> {
        match self.cfg.qpe_window.as_str() {
            "kaiser" => Ok(Window::Kaiser {
                beta: self.cfg.kaiser_beta,
            }),
            "uniform" => Ok(Window::Uniform),
            other => Err(CliError::usage(format!(
                "qpe_window must be kaiser or uniform, got {other:?}"
            ))),
        }
    }

    fn axis(&self) -> CliResult<AxisConvention> {
        match self.cfg.axis.as_str() {
            "loss" => Ok(AxisConvention::EnergyLoss),
            "ground-shifted" => Ok(AxisConvention::GroundShifted),
            other => Err(CliError::usage(format!(
                "axis must be loss or ground-shifted, got {other:?}"
            ))),
        }
    }

    fn walk_model(&self) -> CliResult<WalkModel> {
        let raw = self.cfg.walk_model.as_str();
        if raw == "affine" {
            return Ok(WalkModel::affine_thc_calibrated());
        }
        if let Some(rest) = raw.strip_prefix("user:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() == 2 {
                if let (Ok(t_w), Ok(n_w)) = (parts[0].parse(), parts[1].parse()) {
                    return Ok(WalkModel::UserSupplied { t_w, n_w });
                }
            }
        }
        if let Some(rest) = raw.strip_prefix("backsolve:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() == 2 {
                if let (Ok(target), Ok(n_w)) = (parts[0].parse(), parts[1].parse()) {
                    return Ok(WalkModel::BackSolve {
                        target_t_tot: target,
                        n_w,
                    });
                }
            }
        }
        Err(CliError::usage(format!(
            "walk_model must be affine, user:T_W:N_W or backsolve:T_TOT:N_W, got {raw:?}"
        )))
    }

    fn fit_config(&self) -> FitConfig {
        FitConfig {
            restarts: self.cfg.fit_restarts.max(1),
            polish_iters: self.cfg.fit_polish.max(1),
            varpro_rounds: self.cfg.fit_varpro.max(1),
            anneal_iters: self.cfg.fit_anneal.max(1),
            residual_tol: 1e-9,
            seed: self.cfg.seed,
        }
    }

    fn check_physics(&self) -> CliResult<()> {
        for (name, v) in [
            ("gamma_ev", self.cfg.gamma_ev),
            ("eta_ev", self.cfg.eta_ev),
            ("bin_width_ev", self.cfg.bin_width_ev),
        ] {
            if !(v > 0.0) {
                return Err(CliError {
                    class: ExitClass::Physics,
                    error: anyhow::anyhow!("{name} must be positive (got {v})"),
                });
            }
        }
        if self.cfg.window_ev < 0.0 {
            return Err(CliError {
                class: ExitClass::Physics,
                error: anyhow::anyhow!("window_ev must be non-negative"),
            });
        }
        Ok(())
    }
}

fn grid(min: f64, max: f64, points: usize) -> CliResult<Vec<f64>> {
    if points < 2 || !(max > min) {
        return Err(CliError::usage(format!(
            "invalid grid: [{min}, {max}] with {points} points"
        )));
    }
    Ok((0..points)
        .map(|i| min + (max - min) * i as f64 / (points - 1) as f64)
        .collect())
}

fn ground_column(decomp: &SpectralDecomposition) -> Vec<Complex64> {
    decomp.ground_state().iter().copied().collect()
}

// ---------------------------------------------------------------------------

pub fn parse_check(ctx: &Ctx) -> CliResult<Value> {
    let (set, warnings) = ctx.load_integrals()?;
    let summary = json!({
        "command": "parse-check",
        "n_orb": set.n_orb,
        "n_elec": set.n_elec,
        "two_sz": set.two_sz,
        "e_frozen_ha": set.e_frozen,
        "has_dipole": set.dipole.is_some(),
        "core_orbitals_1based": set.core_orbitals.iter().map(|c| c + 1).collect::<Vec<_>>(),
        "sector_dimension": rixs_core::fock::sector_dimension(set.n_orb, set.n_elec, set.two_sz)
            .map(|d| d.to_string())
            .map_err(CliError::from)?,
        "warnings": warnings,
    });
    ctx.write_summary("summary_parse_check.json", &summary)?;
    ctx.write_effective_config()?;
    Ok(summary)
}

struct Diagonalized {
    set: IntegralSet,
    basis: ManyBodyBasis,
    hamiltonian: SparseOperator,
    decomp: SpectralDecomposition,
    warnings: Vec<String>,
}

fn diagonalized(ctx: &Ctx, mode: DiagMode) -> CliResult<Diagonalized> {
    let (set, warnings) = ctx.load_integrals()?;
    let basis = build_basis(set.n_orb, set.n_elec, set.two_sz)?;
    let hamiltonian = build_hamiltonian(&set, &basis)?;
    let decomp = diagonalize(&hamiltonian, mode)?;
    Ok(Diagonalized {
        set,
        basis,
        hamiltonian,
        decomp,
        warnings,
    })
}

fn parse_diag_mode(raw: &str) -> CliResult<DiagMode> {
    if raw == "full" {
        return Ok(DiagMode::Full);
    }
    if let Some(k) = raw.strip_prefix("lowest:") {
        if let Ok(k) = k.parse::<usize>() {
            return Ok(DiagMode::LowestK(k));
        }
    }
    Err(CliError::usage(format!(
        "diag_mode must be full or lowest:<k>, got {raw:?}"
    )))
}

pub fn ground_state(ctx: &Ctx) -> CliResult<Value> {
    let mode = parse_diag_mode(&ctx.cfg.diag_mode)?;
    let d = diagonalized(ctx, mode)?;
    let e0 = d.decomp.ground_energy();
    let mut csv = String::from("index,energy_ha,excitation_ev\n");
    for (i, &e) in d.decomp.eigenvalues.iter().enumerate() {
        csv.push_str(&format!("{i},{e:.15e},{:.9}\n", hartree_to_ev(e - e0)));
    }
    ctx.write("eigenvalues.csv", &csv)?;
    let summary = json!({
        "command": "ground-state",
        "dimension": d.basis.dimension(),
        "states_computed": d.decomp.n_states(),
        "ground_energy_ha": e0,
        "max_excitation_ev": hartree_to_ev(
            d.decomp.eigenvalues.last().copied().unwrap_or(e0) - e0
        ),
        "files": ["eigenvalues.csv"],
        "warnings": d.warnings,
    });
    ctx.write_summary("summary_ground_state.json", &summary)?;
    ctx.write_effective_config()?;
    Ok(summary)
}

pub fn xas(ctx: &Ctx) -> CliResult<Value> {
    ctx.check_physics()?;
    let d = diagonalized(ctx, DiagMode::Full)?;
    let dip = ctx.dipole_mode()?.build(&d.set, &d.basis, ctx.cfg.eps_in)?;
    let g = grid(ctx.cfg.xas_min_ev, ctx.cfg.xas_max_ev, ctx.cfg.xas_points)?;
    let mut spectrum = xas_spectrum(&d.decomp, &dip, &g, ev_to_hartree(ctx.cfg.gamma_ev))?;
    spectrum.meta.eps_in = Some(ctx.cfg.eps_in);
    ctx.write("xas.csv", &spectrum.curve_csv())?;
    ctx.write("xas_sticks.json", &spectrum.to_json())?;
    let strongest = spectrum
        .sticks
        .iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
        .copied();
    let summary = json!({
        "command": "xas",
        "n_sticks": spectrum.sticks.len(),
        "strongest_stick": strongest.map(|(x, w)| json!({"energy_ev": x, "weight": w})),
        "files": ["xas.csv", "xas_sticks.json"],
        "warnings": d.warnings,
    });
    ctx.write_summary("summary_xas.json", &summary)?;
    ctx.write_effective_config()?;
    Ok(summary)
}

fn omega_tag(omega_ev: f64) -> String {
    format!("{omega_ev:.4}eV")
}

pub fn rixs_exact(ctx: &Ctx) -> CliResult<Value> {
    ctx.check_physics()?;
    if ctx.cfg.omega_in_ev.is_empty() {
        return Err(CliError::usage("at least one --omega-in value is required"));
    }
    let d = diagonalized(ctx, DiagMode::Full)?;
    let mode = ctx.dipole_mode()?;
    let d_in = mode.build(&d.set, &d.basis, ctx.cfg.eps_in)?;
    let d_out = mode.build(&d.set, &d.basis, ctx.cfg.eps_out)?;
    let g = grid(ctx.cfg.loss_min_ev, ctx.cfg.loss_max_ev, ctx.cfg.loss_points)?;
    let gamma = ev_to_hartree(ctx.cfg.gamma_ev);
    let eta = ev_to_hartree(ctx.cfg.eta_ev);
    let window = if ctx.cfg.window_ev == 0.0 {
        0.0
    } else {
        ev_to_hartree(ctx.cfg.window_ev)
    };
    // Incident energies are independent; evaluate them concurrently and
    // serialize only the file writes.
    let computed: Vec<CliResult<_>> = ctx
        .cfg
        .omega_in_ev
        .par_iter()
        .map(|&omega_ev| {
            let omega = ev_to_hartree(omega_ev);
            let amps = rixs_amplitudes(&d.decomp, &d_in, &d_out, omega, gamma, window)?;
            let mut spectrum = rixs_spectrum(&amps, &d.decomp, eta, &g)?;
            spectrum.meta.omega_in_ev = Some(omega_ev);
            spectrum.meta.gamma_ev = Some(ctx.cfg.gamma_ev);
            spectrum.meta.eps_in = Some(ctx.cfg.eps_in);
            spectrum.meta.eps_out = Some(ctx.cfg.eps_out);
            let total: f64 = amps.iter().map(|(_, w)| w.norm_sqr()).sum();
            Ok((omega_ev, spectrum, total))
        })
        .collect();
    let mut files = Vec::new();
    let mut per_omega = Vec::new();
    for item in computed {
        let (omega_ev, spectrum, total) = item?;
        let tag = omega_tag(omega_ev);
        let curve = format!("rixs_exact_{tag}.csv");
        let sticks = format!("rixs_exact_{tag}_sticks.json");
        ctx.write(&curve, &spectrum.curve_csv())?;
        ctx.write(&sticks, &spectrum.to_json())?;
        per_omega.push(json!({
            "omega_in_ev": omega_ev,
            "total_amplitude": total,
            "n_sticks": spectrum.sticks.len(),
        }));
        files.push(curve);
        files.push(sticks);
    }
    let summary = json!({
        "command": "rixs-exact",
        "per_omega": per_omega,
        "files": files,
        "warnings": d.warnings,
    });
    ctx.write_summary("summary_rixs_exact.json", &summary)?;
    ctx.write_effective_config()?;
    Ok(summary)
}

fn resolve_lambda(ctx: &Ctx) -> CliResult<Option<(f64, String)>> {
    if let Some(l) = ctx.cfg.lambda {
        return Ok(Some((l, "flag".into())));
    }
    if let Some(path) = &ctx.cfg.thc_factors {
        let dump = FactorDump::from_json(&fs::read_to_string(path)?)?;
        return Ok(Some((dump.lambda, "thc_factors".into())));
    }
    Ok(None)
}

pub fn rixs_qpe(ctx: &Ctx) -> CliResult<Value> {
    ctx.check_physics()?;
    if let Some(path) = &ctx.cfg.reference {
        return rixs_qpe_reference(ctx, path.clone());
    }
    let (lambda, lambda_source) = resolve_lambda(ctx)?.ok_or_else(|| {
        CliError::usage(
            "the walk rescaling is never inferred silently: pass --lambda or --thc-factors",
        )
    })?;
    let d = diagonalized(ctx, DiagMode::Full)?;
    let mode = ctx.dipole_mode()?;
    let d_in = mode.build(&d.set, &d.basis, ctx.cfg.eps_in)?;
    let d_out = mode.build(&d.set, &d.basis, ctx.cfg.eps_out)?;
    // Block-encoding 1-norm of the emission dipole.
    let out_matrix = match mode {
        DipoleMode::Cvs => cvs_dipole_matrix(&d.set, ctx.cfg.eps_out)?,
        DipoleMode::Full => d
            .set
            .dipole_along(ctx.cfg.eps_out)
            .ok_or_else(|| CliError::usage("--dipole sidecar required"))?,
    };
    let (_, lambda_d) =
        resources::dipole_block_encoding(d.set.n_orb, ctx.cfg.aleph_mu, &out_matrix)?;

    let gamma = ev_to_hartree(ctx.cfg.gamma_ev);
    let eta = ev_to_hartree(ctx.cfg.eta_ev);
    // Spectral frame for the walk: center the sector spectrum so the
    // rescaling bound is used symmetrically. The loss axis is unchanged.
    let e_min = d.decomp.eigenvalues[0];
    let e_max = *d.decomp.eigenvalues.last().expect("non-empty spectrum");
    let mid = 0.5 * (e_min + e_max);
    if 0.5 * (e_max - e_min) > lambda {
        return Err(CliError {
            class: ExitClass::Physics,
            error: anyhow::anyhow!(
                "lambda = {lambda} is smaller than half the sector spectral spread {:.6}; \
                 pass a larger --lambda",
                0.5 * (e_max - e_min)
            ),
        });
    }
    let n_omega = if ctx.cfg.n_omega > 0 {
        ctx.cfg.n_omega
    } else {
        resources::phase_bits(resources::walk_calls(lambda, eta)?)
    };
    let model = QpeModel {
        n_omega,
        window: ctx.qpe_window()?,
        lambda,
        e0: d.decomp.ground_energy() - mid,
        axis: ctx.axis()?,
    };

    let ground = ground_column(&d.decomp);
    let prep_method = match ctx.cfg.prep.as_str() {
        "exact" => PrepMethod::Exact,
        "chebyshev" => {
            let degree = resolvent::select_degree(lambda, gamma, ctx.degree_mode()?)?;
            PrepMethod::Chebyshev { degree, lambda }
        }
        other => {
            return Err(CliError::usage(format!(
                "prep must be exact or chebyshev, got {other:?}"
            )))
        }
    };
    // Work in the centered frame: the Green's function and the loss axis
    // depend only on energy differences, and the Chebyshev route needs the
    // spectrum inside [-lambda, lambda].
    let h_frame = d
        .hamiltonian
        .with_diagonal_shift(Complex64::new(-mid, 0.0));
    let e0_frame = d.decomp.ground_energy() - mid;

    // Each incident energy carries its own seed derived from the master
    // one, so the runs are independent and can proceed concurrently; file
    // writes stay sequential.
    let computed: Vec<CliResult<_>> = ctx
        .cfg
        .omega_in_ev
        .par_iter()
        .enumerate()
        .map(|(idx, &omega_ev)| {
            let omega = ev_to_hartree(omega_ev);
            let state = prepare_rixs_state(
                &h_frame,
                e0_frame,
                &ground,
                &d_in,
                &d_out,
                omega,
                gamma,
                lambda_d,
                prep_method,
            )?;
            let p_r = emulator::success_probability(&state)?;
            let k_a = if p_r > 0.0 {
                emulator::amplification_rounds(p_r)?
            } else {
                0
            };
            let weights: Vec<(f64, f64)> = emulator::rixs_state_weights(&state, &d.decomp)?
                .into_iter()
                .map(|(w, e)| (w, e - mid))
                .collect();
            let seed = ctx.cfg.seed.wrapping_add(idx as u64);
            let (spectrum, samples) = sample_spectrum(
                &model,
                &weights,
                SampleMode::Shots {
                    shots: ctx.cfg.shots,
                    seed,
                },
                ctx.cfg.bin_width_ev,
            )?;
            let (analytic, _) =
                sample_spectrum(&model, &weights, SampleMode::Analytic, ctx.cfg.bin_width_ev)?;
            // TV between the empirical histogram and the analytic one on
            // the union of their grids.
            let tv = {
                let mut keys = std::collections::BTreeMap::new();
                for (x, m) in &analytic.sticks {
                    keys.insert((x / ctx.cfg.bin_width_ev).round() as i64, (*m, 0.0));
                }
                for (x, m) in &spectrum.sticks {
                    keys.entry((x / ctx.cfg.bin_width_ev).round() as i64)
                        .and_modify(|e| e.1 = *m)
                        .or_insert((0.0, *m));
                }
                0.5 * keys.values().map(|(a, b)| (a - b).abs()).sum::<f64>()
            };
            Ok((omega_ev, state, p_r, k_a, seed, tv, spectrum, samples))
        })
        .collect();

    let mut files = Vec::new();
    let mut per_omega = Vec::new();
    for item in computed {
        let (omega_ev, state, p_r, k_a, seed, tv, spectrum, samples) = item?;
        let tag = omega_tag(omega_ev);
        let samples_name = format!("qpe_samples_{tag}.csv");
        let mut csv = String::from(emulator::RawSample::csv_header());
        csv.push('\n');
        for s in &samples {
            csv.push_str(&s.to_csv_line());
            csv.push('\n');
        }
        ctx.write(&samples_name, &csv)?;
        let spectrum_name = format!("qpe_spectrum_{tag}.csv");
        ctx.write(&spectrum_name, &spectrum.curve_csv())?;
        files.push(samples_name);
        files.push(spectrum_name);
        per_omega.push(json!({
            "omega_in_ev": omega_ev,
            "p_r": p_r,
            "sqrt_p_r": p_r.sqrt(),
            "k_a": k_a,
            "rixs_norm": state.norm_r,
            "d_in_norm": state.d_in_norm,
            "lambda_d": lambda_d,
            "seed": seed,
            "tv_to_analytic": tv,
        }));
    }
    let summary = json!({
        "command": "rixs-qpe",
        "lambda": lambda,
        "lambda_source": lambda_source,
        "n_omega": n_omega,
        "shots": ctx.cfg.shots,
        "per_omega": per_omega,
        "files": files,
        "warnings": d.warnings,
    });
    ctx.write_summary("summary_rixs_qpe.json", &summary)?;
    ctx.write_effective_config()?;
    Ok(summary)
}

fn rixs_qpe_reference(ctx: &Ctx, path: PathBuf) -> CliResult<Value> {
    let text = fs::read_to_string(&path)?;
    let reference = parse_reference_csv(&text)?;
    let (centers, analytic, empirical) = sample_reference(
        &reference,
        ctx.cfg.shots,
        ctx.cfg.seed,
        ctx.cfg.bin_width_ev,
    )?;
    let tv = emulator::total_variation(&analytic, &empirical);
    let bound = emulator::multinomial_tv_expectation(&analytic, ctx.cfg.shots);
    let mut csv = String::from("omega_eV,analytic,empirical\n");
    for ((x, a), e) in centers.iter().zip(&analytic).zip(&empirical) {
        csv.push_str(&format!("{x:.9},{a:.12e},{e:.12e}\n"));
    }
    ctx.write("qpe_reference_recon.csv", &csv)?;
    let summary = json!({
        "command": "rixs-qpe",
        "mode": "reference-reconstruction",
        "shots": ctx.cfg.shots,
        "seed": ctx.cfg.seed,
        "bins": centers.len(),
        "tv_to_analytic": tv,
        "multinomial_tv_expectation": bound,
        "files": ["qpe_reference_recon.csv"],
    });
    ctx.write_summary("summary_rixs_qpe.json", &summary)?;
    ctx.write_effective_config()?;
    Ok(summary)
}

pub fn bliss_thc_cmd(ctx: &Ctx) -> CliResult<Value> {
    let (set, warnings) = ctx.load_integrals()?;
    let rank = if ctx.cfg.thc_rank > 0 {
        ctx.cfg.thc_rank
    } else {
        bliss_thc::default_rank(set.n_orb)
    };
    let rho = if ctx.cfg.rho > 0.0 {
        ctx.cfg.rho
    } else {
        bliss_thc::default_rho(&set.v)
    };
    let opt = bliss_thc::optimize_bliss_thc(&set, set.n_elec, rank, rho, &ctx.fit_config())?;
    let dump = FactorDump::new(set.n_orb, &opt.params, &opt.factors, opt.lambda);
    ctx.write("thc_factors.json", &dump.to_json())?;
    let beta_norm: f64 = opt.params.beta.iter().map(|b| b * b).sum::<f64>().sqrt();
    let summary = json!({
        "command": "bliss-thc",
        "rank": rank,
        "rho": rho,
        "lambda": opt.lambda,
        "baseline_lambda": opt.baseline_lambda,
        "residual_frobenius": opt.residual,
        "alpha1": opt.params.alpha1,
        "alpha2": opt.params.alpha2,
        "beta_frobenius": beta_norm,
        "files": ["thc_factors.json"],
        "warnings": warnings,
    });
    ctx.write_summary("summary_bliss_thc.json", &summary)?;
    ctx.write_effective_config()?;
    Ok(summary)
}

fn parse_system(raw: &str) -> CliResult<SystemEntry> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(CliError::usage(format!(
            "system must be n_elec,n_orb,two_sz,lambda — got {raw:?}"
        )));
    }
    Ok(SystemEntry {
        n_elec: parts[0]
            .parse()
            .map_err(|_| CliError::usage(format!("bad n_elec in {raw:?}")))?,
        n_orb: parts[1]
            .parse()
            .map_err(|_| CliError::usage(format!("bad n_orb in {raw:?}")))?,
        two_sz: parts[2]
            .parse()
            .map_err(|_| CliError::usage(format!("bad two_sz in {raw:?}")))?,
        lambda: parts[3]
            .parse()
            .map_err(|_| CliError::usage(format!("bad lambda in {raw:?}")))?,
    })
}

pub fn estimate(ctx: &Ctx) -> CliResult<Value> {
    let mut systems: Vec<SystemEntry> = Vec::new();
    for raw in &ctx.cfg.systems {
        systems.push(parse_system(raw)?);
    }
    if systems.is_empty() {
        // Single-system path from --lambda / --thc-factors; the sector
        // defaults to the reference study's first row unless an integral
        // file pins it.
        let (lambda, _) = resolve_lambda(ctx)?.ok_or_else(|| {
            CliError::usage("estimate needs --system entries, --lambda or --thc-factors")
        })?;
        let (n_elec, n_orb, two_sz) = if ctx.cfg.fcidump.is_some() {
            let (set, _) = ctx.load_integrals()?;
            (set.n_elec, set.n_orb, set.two_sz)
        } else if let Some(path) = &ctx.cfg.thc_factors {
            let dump = FactorDump::from_json(&fs::read_to_string(path)?)?;
            (15, dump.n_orb, 1)
        } else {
            (15, 16, 1)
        };
        systems.push(SystemEntry {
            n_elec,
            n_orb,
            two_sz,
            lambda,
        });
    }
    let table_cfg = TableConfig {
        aleph: ctx.cfg.aleph,
        beth: ctx.cfg.beth,
        aleph_mu: ctx.cfg.aleph_mu,
        rank_per_orbital: 3,
        walk_model: ctx.walk_model()?,
        p_r: ctx.cfg.sqrt_pr * ctx.cfg.sqrt_pr,
        eps_omega_ha: ev_to_hartree(ctx.cfg.eta_ev),
        gamma_ha: ev_to_hartree(ctx.cfg.gamma_ev),
        degree_mode: ctx.degree_mode()?,
        shots: ctx.cfg.shots,
    };
    let (text, json_report) = resources::table_report(&systems, &table_cfg)?;
    ctx.write("resource_report.txt", &text)?;
    ctx.write("resource_report.json", &json_report)?;
    print!("{text}");
    let summary = json!({
        "command": "estimate",
        "systems": systems.len(),
        "sqrt_pr": ctx.cfg.sqrt_pr,
        "files": ["resource_report.txt", "resource_report.json"],
    });
    ctx.write_summary("summary_estimate.json", &summary)?;
    ctx.write_effective_config()?;
    Ok(summary)
}

pub fn full_run(ctx: &Ctx) -> CliResult<Value> {
    let mut steps = vec![
        ("parse-check", parse_check(ctx)?),
        ("ground-state", ground_state(ctx)?),
        ("xas", xas(ctx)?),
        ("rixs-exact", rixs_exact(ctx)?),
        ("bliss-thc", bliss_thc_cmd(ctx)?),
    ];
    // Downstream stages read the factors written above unless the caller
    // supplied explicit values.
    let mut chained = ctx.cfg.clone();
    if chained.lambda.is_none() && chained.thc_factors.is_none() {
        chained.thc_factors = Some(ctx.out("thc_factors.json"));
    }
    let chained_ctx = Ctx::new(chained)?;
    steps.push(("rixs-qpe", rixs_qpe(&chained_ctx)?));
    steps.push(("estimate", estimate(&chained_ctx)?));
    // Restore this run's own effective config (subcommands wrote theirs).
    ctx.write_effective_config()?;
    let summary = json!({
        "command": "full-run",
        "steps": steps.iter().map(|(name, _)| *name).collect::<Vec<_>>(),
        "summaries": steps.into_iter().map(|(name, s)| json!({"step": name, "summary": s})).collect::<Vec<_>>(),
    });
    ctx.write_summary("summary_full_run.json", &summary)?;
    Ok(summary)
}
