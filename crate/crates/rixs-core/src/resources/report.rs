//! Table-style multi-system reports: aligned text for the terminal, JSON
//! for machines.

use num_bigint::BigUint;
use serde::Serialize;

use crate::fock::sector_dimension;
use crate::resolvent::DegreeMode;

use super::{totals, CostModelParams, ResourceError, ResourceReport, WalkModel};

/// One system row: sector definition plus its Hamiltonian 1-norm.
#[derive(Debug, Clone)]
pub struct SystemEntry {
    pub n_elec: usize,
    pub n_orb: usize,
    pub two_sz: i32,
    pub lambda: f64,
}

/// Shared parameters of a table run.
#[derive(Debug, Clone)]
pub struct TableConfig {
    pub aleph: u32,
    pub beth: u32,
    pub aleph_mu: u32,
    /// THC rank per orbital (rank = this * N_a).
    pub rank_per_orbital: usize,
    pub walk_model: WalkModel,
    pub p_r: f64,
    pub eps_omega_ha: f64,
    pub gamma_ha: f64,
    pub degree_mode: DegreeMode,
    pub shots: u64,
}

#[derive(Debug, Serialize)]
struct TableRow {
    n_elec: usize,
    n_orb: usize,
    two_sz: i32,
    fci_dimension: String,
    #[serde(flatten)]
    report: ResourceReport,
}

#[derive(Debug, Serialize)]
struct TableJson {
    schema_version: u32,
    rows: Vec<TableRow>,
}

/// Formats `x` with `sig` significant figures, using scientific notation
/// outside [1e-2, 1e4).
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-2..4).contains(&mag) {
        format!("{:.*e}", sig.saturating_sub(1), x)
    } else {
        let decimals = (sig as i32 - 1 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

fn format_big(n: &BigUint) -> String {
    let s = n.to_string();
    if s.len() <= 4 {
        return s;
    }
    // Two significant figures in scientific style, matching how FCI matrix
    // dimensions are usually quoted.
    let d3: u32 = s[..3].parse().expect("digits");
    let rounded = (d3 + 5) / 10;
    if rounded == 100 {
        format!("1.0e{}", s.len())
    } else {
        format!("{:.1}e{}", rounded as f64 / 10.0, s.len() - 1)
    }
}

/// Builds the per-system reports and renders them as an aligned table plus
/// a versioned JSON document. FCI dimensions come from exact big-integer
/// binomials, never from materialized bases.
pub fn table_report(
    systems: &[SystemEntry],
    config: &TableConfig,
) -> Result<(String, String), ResourceError> {
    if systems.is_empty() {
        return Err(ResourceError::EmptySystems);
    }
    let mut rows = Vec::with_capacity(systems.len());
    for sys in systems {
        let dim = sector_dimension(sys.n_orb, sys.n_elec, sys.two_sz)?;
        let params = CostModelParams {
            aleph: config.aleph,
            beth: config.beth,
            aleph_mu: config.aleph_mu,
            thc_rank: config.rank_per_orbital * sys.n_orb,
            n_orb: sys.n_orb,
            walk_model: config.walk_model.clone(),
            shots: config.shots,
        };
        let report = totals(
            &params,
            sys.lambda,
            config.eps_omega_ha,
            config.gamma_ha,
            config.p_r,
            config.degree_mode,
        )?;
        rows.push(TableRow {
            n_elec: sys.n_elec,
            n_orb: sys.n_orb,
            two_sz: sys.two_sz,
            fci_dimension: format_big(&dim),
            report,
        });
    }

    let header = [
        "N_e", "N_a", "FCI dim", "1-norm", "K_G", "K_A", "n_omega", "qubits", "Toffolis", "shots",
    ];
    let mut cells: Vec<[String; 10]> = Vec::with_capacity(rows.len());
    for r in &rows {
        cells.push([
            r.n_elec.to_string(),
            r.n_orb.to_string(),
            r.fci_dimension.clone(),
            format_sig(r.report.lambda, 3),
            r.report.k_g.to_string(),
            r.report.k_a.to_string(),
            r.report.n_omega.to_string(),
            r.report.n_tot.to_string(),
            format_sig(r.report.t_tot as f64, 3),
            r.report.shots.to_string(),
        ]);
    }
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(c.len());
        }
    }
    let mut text = String::new();
    for (h, w) in header.iter().zip(&widths) {
        text.push_str(&format!("{h:>w$}  "));
    }
    text.push('\n');
    for row in &cells {
        for (c, w) in row.iter().zip(&widths) {
            text.push_str(&format!("{c:>w$}  "));
        }
        text.push('\n');
    }

    let json = serde_json::to_string_pretty(&TableJson {
        schema_version: 1,
        rows,
    })
    .expect("report serializes");
    Ok((text, json))
}
