//! Run configuration: defaults, flat key=value config files, and the
//! effective-config dump whose re-ingestion reproduces a run exactly.
//!
//! Every field has a default except the input paths. Energies on this
//! surface are eV; they are converted to Hartree once at the command
//! boundary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // Input paths (no defaults).
    pub fcidump: Option<PathBuf>,
    pub dipole: Option<PathBuf>,
    pub thc_factors: Option<PathBuf>,
    pub reference: Option<PathBuf>,

    pub out_dir: PathBuf,

    // Physics.
    pub omega_in_ev: Vec<f64>,
    pub gamma_ev: f64,
    pub eta_ev: f64,
    pub window_ev: f64,
    pub eps_in: [f64; 3],
    pub eps_out: [f64; 3],
    pub dipole_mode: String,
    pub xas_min_ev: f64,
    pub xas_max_ev: f64,
    pub xas_points: usize,
    pub loss_min_ev: f64,
    pub loss_max_ev: f64,
    pub loss_points: usize,
    pub diag_mode: String,

    // Emulation.
    pub n_omega: u32,
    pub qpe_window: String,
    pub kaiser_beta: f64,
    pub axis: String,
    pub shots: u64,
    pub seed: u64,
    pub bin_width_ev: f64,
    pub prep: String,
    pub degree_mode: String,
    pub analytic_eps: f64,
    pub lambda: Option<f64>,

    // Estimation.
    pub aleph: u32,
    pub beth: u32,
    pub aleph_mu: u32,
    pub thc_rank: usize,
    pub rho: f64,
    pub fit_restarts: usize,
    pub fit_polish: usize,
    pub fit_varpro: usize,
    pub fit_anneal: usize,
    pub walk_model: String,
    pub sqrt_pr: f64,
    pub systems: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            fcidump: None,
            dipole: None,
            thc_factors: None,
            reference: None,
            out_dir: PathBuf::from("rixs-out"),
            omega_in_ev: vec![548.5, 551.9],
            gamma_ev: 0.3,
            eta_ev: 0.2,
            window_ev: 50.0,
            eps_in: [1.0, 0.0, 0.0],
            eps_out: [1.0, 0.0, 0.0],
            dipole_mode: "cvs".into(),
            xas_min_ev: 0.0,
            xas_max_ev: 600.0,
            xas_points: 6001,
            loss_min_ev: 0.0,
            loss_max_ev: 30.0,
            loss_points: 3001,
            diag_mode: "full".into(),
            n_omega: 0,
            qpe_window: "kaiser".into(),
            kaiser_beta: 13.0,
            axis: "loss".into(),
            shots: 2000,
            seed: 0,
            bin_width_ev: 0.2,
            prep: "exact".into(),
            degree_mode: "calibrated".into(),
            analytic_eps: 1e-3,
            lambda: None,
            aleph: 13,
            beth: 13,
            aleph_mu: 13,
            thc_rank: 0,
            rho: 0.0,
            fit_restarts: 2,
            fit_polish: 120,
            fit_varpro: 4,
            fit_anneal: 200,
            walk_model: "affine".into(),
            sqrt_pr: 0.06,
            systems: Vec::new(),
        }
    }
}

fn parse_vec3(raw: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| anyhow!("expected three comma-separated numbers, got {raw:?}"))?;
    if parts.len() != 3 {
        bail!("expected three comma-separated numbers, got {raw:?}");
    }
    Ok([parts[0], parts[1], parts[2]])
}

fn parse_f64_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("number expected in list, got {t:?}"))
        })
        .collect()
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "fcidump" => self.fcidump = Some(PathBuf::from(v)),
            "dipole" => self.dipole = Some(PathBuf::from(v)),
            "thc_factors" => self.thc_factors = Some(PathBuf::from(v)),
            "reference" => self.reference = Some(PathBuf::from(v)),
            "out_dir" => self.out_dir = PathBuf::from(v),
            "omega_in_ev" => self.omega_in_ev = parse_f64_list(v)?,
            "gamma_ev" => self.gamma_ev = v.parse()?,
            "eta_ev" => self.eta_ev = v.parse()?,
            "window_ev" => self.window_ev = v.parse()?,
            "eps_in" => self.eps_in = parse_vec3(v)?,
            "eps_out" => self.eps_out = parse_vec3(v)?,
            "dipole_mode" => self.dipole_mode = v.into(),
            "xas_min_ev" => self.xas_min_ev = v.parse()?,
            "xas_max_ev" => self.xas_max_ev = v.parse()?,
            "xas_points" => self.xas_points = v.parse()?,
            "loss_min_ev" => self.loss_min_ev = v.parse()?,
            "loss_max_ev" => self.loss_max_ev = v.parse()?,
            "loss_points" => self.loss_points = v.parse()?,
            "diag_mode" => self.diag_mode = v.into(),
            "n_omega" => self.n_omega = v.parse()?,
            "qpe_window" => self.qpe_window = v.into(),
            "kaiser_beta" => self.kaiser_beta = v.parse()?,
            "axis" => self.axis = v.into(),
            "shots" => self.shots = v.parse()?,
            "seed" => self.seed = v.parse()?,
            "bin_width_ev" => self.bin_width_ev = v.parse()?,
            "prep" => self.prep = v.into(),
            "degree_mode" => self.degree_mode = v.into(),
            "analytic_eps" => self.analytic_eps = v.parse()?,
            "lambda" => self.lambda = Some(v.parse()?),
            "aleph" => self.aleph = v.parse()?,
            "beth" => self.beth = v.parse()?,
            "aleph_mu" => self.aleph_mu = v.parse()?,
            "thc_rank" => self.thc_rank = v.parse()?,
            "rho" => self.rho = v.parse()?,
            "fit_restarts" => self.fit_restarts = v.parse()?,
            "fit_polish" => self.fit_polish = v.parse()?,
            "fit_varpro" => self.fit_varpro = v.parse()?,
            "fit_anneal" => self.fit_anneal = v.parse()?,
            "walk_model" => self.walk_model = v.into(),
            "sqrt_pr" => self.sqrt_pr = v.parse()?,
            "systems" => {
                self.systems = v
                    .split(';')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| t.trim().to_string())
                    .collect()
            }
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Parses a flat `key = value` config file into `self`.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected key = value", idx + 1))?;
            self.set(key.trim(), value)
                .map_err(|e| anyhow!("config line {}: {e}", idx + 1))?;
        }
        Ok(())
    }

    /// Canonical effective-config dump; feeding it back through
    /// [`RunConfig::apply_file`] reproduces this configuration.
    pub fn dump(&self) -> String {
        let mut pairs: BTreeMap<&str, String> = BTreeMap::new();
        if let Some(p) = &self.fcidump {
            pairs.insert("fcidump", p.display().to_string());
        }
        if let Some(p) = &self.dipole {
            pairs.insert("dipole", p.display().to_string());
        }
        if let Some(p) = &self.thc_factors {
            pairs.insert("thc_factors", p.display().to_string());
        }
        if let Some(p) = &self.reference {
            pairs.insert("reference", p.display().to_string());
        }
        pairs.insert("out_dir", self.out_dir.display().to_string());
        let join = |xs: &[f64]| {
            xs.iter()
                .map(|x| format!("{x:.17e}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        pairs.insert("omega_in_ev", join(&self.omega_in_ev));
        pairs.insert("gamma_ev", format!("{:.17e}", self.gamma_ev));
        pairs.insert("eta_ev", format!("{:.17e}", self.eta_ev));
        pairs.insert("window_ev", format!("{:.17e}", self.window_ev));
        pairs.insert("eps_in", join(&self.eps_in));
        pairs.insert("eps_out", join(&self.eps_out));
        pairs.insert("dipole_mode", self.dipole_mode.clone());
        pairs.insert("xas_min_ev", format!("{:.17e}", self.xas_min_ev));
        pairs.insert("xas_max_ev", format!("{:.17e}", self.xas_max_ev));
        pairs.insert("xas_points", self.xas_points.to_string());
        pairs.insert("loss_min_ev", format!("{:.17e}", self.loss_min_ev));
        pairs.insert("loss_max_ev", format!("{:.17e}", self.loss_max_ev));
        pairs.insert("loss_points", self.loss_points.to_string());
        pairs.insert("diag_mode", self.diag_mode.clone());
        pairs.insert("n_omega", self.n_omega.to_string());
        pairs.insert("qpe_window", self.qpe_window.clone());
        pairs.insert("kaiser_beta", format!("{:.17e}", self.kaiser_beta));
        pairs.insert("axis", self.axis.clone());
        pairs.insert("shots", self.shots.to_string());
        pairs.insert("seed", self.seed.to_string());
        pairs.insert("bin_width_ev", format!("{:.17e}", self.bin_width_ev));
        pairs.insert("prep", self.prep.clone());
        pairs.insert("degree_mode", self.degree_mode.clone());
        pairs.insert("analytic_eps", format!("{:.17e}", self.analytic_eps));
        if let Some(l) = self.lambda {
            pairs.insert("lambda", format!("{l:.17e}"));
        }
        pairs.insert("aleph", self.aleph.to_string());
        pairs.insert("beth", self.beth.to_string());
        pairs.insert("aleph_mu", self.aleph_mu.to_string());
        pairs.insert("thc_rank", self.thc_rank.to_string());
        pairs.insert("rho", format!("{:.17e}", self.rho));
        pairs.insert("fit_restarts", self.fit_restarts.to_string());
        pairs.insert("fit_polish", self.fit_polish.to_string());
        pairs.insert("fit_varpro", self.fit_varpro.to_string());
        pairs.insert("fit_anneal", self.fit_anneal.to_string());
        pairs.insert("walk_model", self.walk_model.clone());
        pairs.insert("sqrt_pr", format!("{:.17e}", self.sqrt_pr));
        pairs.insert("systems", self.systems.join(";"));
        let mut out = String::new();
        for (k, v) in pairs {
            if !v.is_empty() {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }
}
