//! Command-line driver wiring the RIXS pipeline:
//! parse -> ground state -> XAS -> exact RIXS -> QPE-emulated RIXS ->
//! BLISS-THC -> resource report.

mod commands;
pub mod config;
mod errors;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use commands::Ctx;
use config::RunConfig;
use errors::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "rixs",
    version,
    about = "Exact RIXS/XAS spectra, a matrix-scale emulator of a qubitized RIXS \
             sampling algorithm, and logical-resource estimates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate the integral files; report their contents.
    ParseCheck(CommonArgs),
    /// Diagonalize the sector Hamiltonian and write the spectrum.
    GroundState(CommonArgs),
    /// X-ray absorption spectrum from the exact eigenstates.
    Xas(CommonArgs),
    /// Exact Kramers-Heisenberg RIXS spectra at the chosen incident energies.
    RixsExact(CommonArgs),
    /// Shot-sampled RIXS spectra through the emulated walk-based QPE.
    RixsQpe(CommonArgs),
    /// Symmetry-shift plus THC factorization minimizing the 1-norm.
    BlissThc(CommonArgs),
    /// Logical qubit and Toffoli estimates for one or more systems.
    Estimate(CommonArgs),
    /// The whole pipeline in order, sharing one configuration.
    FullRun(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::ParseCheck(a)
            | Command::GroundState(a)
            | Command::Xas(a)
            | Command::RixsExact(a)
            | Command::RixsQpe(a)
            | Command::BlissThc(a)
            | Command::Estimate(a)
            | Command::FullRun(a) => a,
        }
    }
}

/// Flags shared by every subcommand. Values given here override the config
/// file; the config file overrides the defaults.
#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// FCIDUMP integral file.
    #[arg(long)]
    fcidump: Option<PathBuf>,
    /// Dipole sidecar file.
    #[arg(long)]
    dipole: Option<PathBuf>,
    /// Previously fitted THC factors (JSON).
    #[arg(long)]
    thc_factors: Option<PathBuf>,
    /// Reference spectrum CSV (omega_eV,intensity) for shot reconstruction.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,

    /// Incident photon energy in eV (repeatable).
    #[arg(long = "omega-in", allow_negative_numbers = true)]
    omega_in: Vec<f64>,
    /// Intermediate-state broadening Gamma in eV.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Final-state broadening eta in eV.
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Intermediate-state energy window in eV (0 keeps only exact resonances).
    #[arg(long, allow_negative_numbers = true)]
    window: Option<f64>,
    /// Incident polarization, three comma-separated components.
    #[arg(long)]
    eps_in: Option<String>,
    /// Scattered polarization, three comma-separated components.
    #[arg(long)]
    eps_out: Option<String>,
    /// Dipole mode: cvs or full.
    #[arg(long)]
    dipole_mode: Option<String>,
    /// Eigensolver for ground-state: full or lowest:<k>.
    #[arg(long)]
    diag_mode: Option<String>,
    /// Energy-loss grid as min,max,points (eV).
    #[arg(long)]
    loss_grid: Option<String>,
    /// XAS grid as min,max,points (eV).
    #[arg(long)]
    xas_grid: Option<String>,

    /// QPE phase bits (0 = derive from lambda and eta).
    #[arg(long)]
    n_omega: Option<u32>,
    /// QPE register window: kaiser or uniform.
    #[arg(long)]
    qpe_window: Option<String>,
    /// Kaiser shape parameter.
    #[arg(long, allow_negative_numbers = true)]
    kaiser_beta: Option<f64>,
    /// Measured-energy axis convention: loss or ground-shifted.
    #[arg(long)]
    axis: Option<String>,
    /// Circuit repetitions.
    #[arg(long)]
    shots: Option<u64>,
    /// Master RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Histogram bin width in eV.
    #[arg(long, allow_negative_numbers = true)]
    bin_width: Option<f64>,
    /// State-preparation route: exact or chebyshev.
    #[arg(long)]
    prep: Option<String>,
    /// Green's function degree selection: calibrated or analytic.
    #[arg(long)]
    degree_mode: Option<String>,
    /// Target error for the analytic degree bound.
    #[arg(long, allow_negative_numbers = true)]
    analytic_eps: Option<f64>,
    /// Walk rescaling 1-norm in Hartree (never inferred silently).
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,

    /// Alias-sampling precision bits.
    #[arg(long)]
    aleph: Option<u32>,
    /// Givens-rotation precision bits.
    #[arg(long)]
    beth: Option<u32>,
    /// Dipole coefficient precision bits.
    #[arg(long)]
    aleph_mu: Option<u32>,
    /// THC rank (0 = 3 N_a).
    #[arg(long)]
    thc_rank: Option<usize>,
    /// 1-norm penalty weight (0 = 1e-4 |V|_F).
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Fit restarts.
    #[arg(long)]
    fit_restarts: Option<usize>,
    /// Walk cost model: affine, user:T_W:N_W or backsolve:T_TOT:N_W.
    #[arg(long)]
    walk_model: Option<String>,
    /// sqrt(P_R) used by resource estimation.
    #[arg(long, allow_negative_numbers = true)]
    sqrt_pr: Option<f64>,
    /// System row n_elec,n_orb,two_sz,lambda (repeatable).
    #[arg(long = "system")]
    systems: Vec<String>,
}

impl CommonArgs {
    fn to_config(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            cfg.apply_file(&text)
                .map_err(|e| CliError::usage(e.to_string()))?;
        }
        let set = |cfg: &mut RunConfig, key: &str, value: String| -> CliResult<()> {
            cfg.set(key, &value)
                .map_err(|e| CliError::usage(e.to_string()))
        };
        macro_rules! flag {
            ($field:expr, $key:literal) => {
                if let Some(v) = &$field {
                    set(&mut cfg, $key, v.to_string())?;
                }
            };
        }
        if let Some(p) = &self.fcidump {
            set(&mut cfg, "fcidump", p.display().to_string())?;
        }
        if let Some(p) = &self.dipole {
            set(&mut cfg, "dipole", p.display().to_string())?;
        }
        if let Some(p) = &self.thc_factors {
            set(&mut cfg, "thc_factors", p.display().to_string())?;
        }
        if let Some(p) = &self.reference {
            set(&mut cfg, "reference", p.display().to_string())?;
        }
        if let Some(p) = &self.out_dir {
            set(&mut cfg, "out_dir", p.display().to_string())?;
        }
        if !self.omega_in.is_empty() {
            let joined = self
                .omega_in
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",");
            set(&mut cfg, "omega_in_ev", joined)?;
        }
        flag!(self.gamma, "gamma_ev");
        flag!(self.eta, "eta_ev");
        flag!(self.window, "window_ev");
        flag!(self.eps_in, "eps_in");
        flag!(self.eps_out, "eps_out");
        flag!(self.dipole_mode, "dipole_mode");
        flag!(self.diag_mode, "diag_mode");
        if let Some(g) = &self.loss_grid {
            let (min, max, pts) = parse_grid(g)?;
            set(&mut cfg, "loss_min_ev", min.to_string())?;
            set(&mut cfg, "loss_max_ev", max.to_string())?;
            set(&mut cfg, "loss_points", pts.to_string())?;
        }
        if let Some(g) = &self.xas_grid {
            let (min, max, pts) = parse_grid(g)?;
            set(&mut cfg, "xas_min_ev", min.to_string())?;
            set(&mut cfg, "xas_max_ev", max.to_string())?;
            set(&mut cfg, "xas_points", pts.to_string())?;
        }
        flag!(self.n_omega, "n_omega");
        flag!(self.qpe_window, "qpe_window");
        flag!(self.kaiser_beta, "kaiser_beta");
        flag!(self.axis, "axis");
        flag!(self.shots, "shots");
        flag!(self.seed, "seed");
        flag!(self.bin_width, "bin_width_ev");
        flag!(self.prep, "prep");
        flag!(self.degree_mode, "degree_mode");
        flag!(self.analytic_eps, "analytic_eps");
        flag!(self.lambda, "lambda");
        flag!(self.aleph, "aleph");
        flag!(self.beth, "beth");
        flag!(self.aleph_mu, "aleph_mu");
        flag!(self.thc_rank, "thc_rank");
        flag!(self.rho, "rho");
        flag!(self.fit_restarts, "fit_restarts");
        flag!(self.walk_model, "walk_model");
        flag!(self.sqrt_pr, "sqrt_pr");
        if !self.systems.is_empty() {
            let joined = self.systems.join(";");
            set(&mut cfg, "systems", joined)?;
        }
        Ok(cfg)
    }
}

fn parse_grid(raw: &str) -> CliResult<(f64, f64, usize)> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() == 3 {
        if let (Ok(a), Ok(b), Ok(c)) = (parts[0].parse(), parts[1].parse(), parts[2].parse()) {
            return Ok((a, b, c));
        }
    }
    Err(CliError::usage(format!(
        "grid must be min,max,points — got {raw:?}"
    )))
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful exits.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match cli.command.args().to_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let ctx = match Ctx::new(cfg) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::ParseCheck(_) => commands::parse_check(&ctx),
        Command::GroundState(_) => commands::ground_state(&ctx),
        Command::Xas(_) => commands::xas(&ctx),
        Command::RixsExact(_) => commands::rixs_exact(&ctx),
        Command::RixsQpe(_) => commands::rixs_qpe(&ctx),
        Command::BlissThc(_) => commands::bliss_thc_cmd(&ctx),
        Command::Estimate(_) => commands::estimate(&ctx),
        Command::FullRun(_) => commands::full_run(&ctx),
    };
    match result {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            // Best-effort machine-readable error record.
            let _ = std::fs::write(
                ctx.cfg.out_dir.join("summary_error.json"),
                serde_json::to_string_pretty(&serde_json::json!({
                    "error": format!("{e}"),
                    "exit_code": e.exit_code(),
                }))
                .expect("json"),
            );
            e.exit_code()
        }
    }
}
