//! `kitten` — prepare photon-subtracted squeezed-vacuum states under
//! realistic imperfections, evaluate their Wigner negativity and quantum
//! non-Gaussian character, sweep parameters across detector models, and
//! calibrate source parameters from measured variances.
//!
//! Exit codes: 0 on success, 1 for configuration/usage problems, 2 for
//! numerical failures (impossible herald, truncation overflow).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kitten_core::calibration::{calibrate, CalibrationInput};
use kitten_core::config::ConfigFile;
use kitten_core::emit::{csv_string, write_csv, write_json, DmDump, RunMeta};
use kitten_core::fock::{photon_distribution, wigner_origin, DensityMatrix};
use kitten_core::presets::{ALIASES, PRESETS, PRESET_TABLE_ID};
use kitten_core::subtraction::{prepare_kitten_detailed, ExperimentParams};
use kitten_core::sweep::run_sweep;
use kitten_core::witness::evaluate_witness;
use kitten_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "kitten",
    version,
    about = "Heralded photon-subtracted squeezed vacuum: preparation, witnesses, sweeps, calibration"
)]
struct Cli {
    /// TOML config file (sections: [experiment], [detector], [witness],
    /// [sweep], [output]); command-line flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prepare a state and print W(0,0) plus its photon distribution
    Prepare(PrepareArgs),
    /// Evaluate the non-Gaussianity witness of a prepared state or state file
    Witness(WitnessArgs),
    /// Sweep one parameter across detector models, emitting CSV/JSON rows
    Sweep(SweepArgs),
    /// Map measured squeezed/anti-squeezed variances to source parameters
    Calibrate(CalibrateArgs),
    /// List the detector catalog and the reference experiment parameters
    Presets,
}

#[derive(Args, Clone, Default)]
struct ExperimentFlags {
    /// Pure squeezing level in dB (non-positive)
    #[arg(long, allow_negative_numbers = true)]
    v0_db: Option<f64>,
    /// Input impurity in [0,1)
    #[arg(long)]
    r1: Option<f64>,
    /// Tap reflectivity in (0,1)
    #[arg(long)]
    r2: Option<f64>,
    /// Heralding mode purity in [0,1]
    #[arg(long)]
    mode_purity: Option<f64>,
    /// Homodyne efficiency in (0,1]
    #[arg(long)]
    eta_hd: Option<f64>,
    /// Fock truncation level
    #[arg(long)]
    nmax: Option<usize>,
}

impl ExperimentFlags {
    fn merge_into(&self, cfg: &mut ConfigFile) {
        let e = &mut cfg.experiment;
        e.v0_db = self.v0_db.or(e.v0_db);
        e.r1 = self.r1.or(e.r1);
        e.r2 = self.r2.or(e.r2);
        e.mode_purity = self.mode_purity.or(e.mode_purity);
        e.eta_hd = self.eta_hd.or(e.eta_hd);
        e.nmax = self.nmax.or(e.nmax);
    }
}

#[derive(Args, Clone, Default)]
struct DetectorFlags {
    /// Catalog preset name (see `kitten presets`)
    #[arg(long)]
    preset: Option<String>,
    /// Explicit dark-count probability (needs --eta)
    #[arg(long)]
    pdc: Option<f64>,
    /// Explicit detection efficiency (needs --pdc)
    #[arg(long)]
    eta: Option<f64>,
    /// Detector behavior: pnrd, npnrd, impnrd, or imnpnrd
    #[arg(long)]
    model: Option<String>,
    /// Heralding click count m
    #[arg(long)]
    clicks: Option<usize>,
}

impl DetectorFlags {
    fn merge_into(&self, cfg: &mut ConfigFile) {
        let d = &mut cfg.detector;
        d.preset = self.preset.clone().or_else(|| d.preset.take());
        d.pdc = self.pdc.or(d.pdc);
        d.eta = self.eta.or(d.eta);
        d.model = self.model.clone().or_else(|| d.model.take());
        d.clicks = self.clicks.or(d.clicks);
    }
}

#[derive(Args, Clone, Default)]
struct WitnessFlags {
    /// Points on the mixing-weight grid over [0,1]
    #[arg(long)]
    a_points: Option<usize>,
    /// Points on the anti-squeezing grid
    #[arg(long)]
    s_points: Option<usize>,
    /// Upper end of the anti-squeezing grid
    #[arg(long)]
    s_max: Option<f64>,
    /// Gaussian-boundary search bracket upper end
    #[arg(long)]
    r_max: Option<f64>,
    /// Golden-section refinement tolerance
    #[arg(long)]
    refine_tol: Option<f64>,
}

impl WitnessFlags {
    fn merge_into(&self, cfg: &mut ConfigFile) {
        let w = &mut cfg.witness;
        w.a_points = self.a_points.or(w.a_points);
        w.s_points = self.s_points.or(w.s_points);
        w.s_max = self.s_max.or(w.s_max);
        w.r_max = self.r_max.or(w.r_max);
        w.refine_tol = self.refine_tol.or(w.refine_tol);
    }
}

#[derive(Args)]
struct PrepareArgs {
    #[command(flatten)]
    experiment: ExperimentFlags,
    #[command(flatten)]
    detector: DetectorFlags,
    /// Write the prepared density matrix as JSON {dim, elements, trace_deficit}
    #[arg(long, value_name = "FILE")]
    dump_state: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    /// Evaluate a density-matrix JSON file instead of preparing a state
    #[arg(long, value_name = "FILE")]
    state: Option<PathBuf>,
    #[command(flatten)]
    experiment: ExperimentFlags,
    #[command(flatten)]
    detector: DetectorFlags,
    #[command(flatten)]
    witness: WitnessFlags,
}

#[derive(Args)]
struct SweepArgs {
    /// Swept variable: v0_db, r1, r2, eta_apd, eta_hd, pdc, or mode_purity
    #[arg(long = "var")]
    variable: Option<String>,
    /// Grid start (with --to and --points)
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// Grid end
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    points: Option<usize>,
    /// Logarithmic grid spacing (positive endpoints only)
    #[arg(long)]
    log: bool,
    /// Detector references `name:model`, comma separated
    #[arg(long, value_delimiter = ',')]
    detectors: Option<Vec<String>>,
    /// CSV destination (default: stdout when no --json either)
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// JSON destination (rows plus run metadata)
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    #[command(flatten)]
    experiment: ExperimentFlags,
    #[command(flatten)]
    witness: WitnessFlags,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Measured squeezed-quadrature variance (vacuum = 1)
    #[arg(long)]
    vsqz: f64,
    /// Measured anti-squeezed-quadrature variance
    #[arg(long)]
    vasqz: f64,
    /// Homodyne efficiency as a single number (excludes the component flags)
    #[arg(long)]
    eta_hd: Option<f64>,
    /// Photodiode quantum efficiency component
    #[arg(long)]
    eta_qe: Option<f64>,
    /// Path transmission component
    #[arg(long)]
    eta_t: Option<f64>,
    /// Fringe visibility (entering squared)
    #[arg(long)]
    zeta: Option<f64>,
    /// Tap reflectivity used to split off the input impurity
    #[arg(long)]
    r2: Option<f64>,
}

/// Rust replaces the default SIGPIPE disposition with a panic on EPIPE;
/// restore it so `kitten ... | head` dies quietly like any other filter.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(if err.is_numerical() { 2 } else { 1 });
    }
}

fn run(cli: Cli) -> Result<()> {
    init_thread_pool()?;
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Prepare(args) => cmd_prepare(cfg, args),
        Command::Witness(args) => cmd_witness(cfg, args),
        Command::Sweep(args) => cmd_sweep(cfg, args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Presets => cmd_presets(),
    }
}

/// Size the global worker pool from `KITTEN_THREADS` when set.
fn init_thread_pool() -> Result<()> {
    let Ok(raw) = std::env::var("KITTEN_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().unwrap_or(0);
    if threads == 0 {
        return Err(Error::Config {
            path: "env.KITTEN_THREADS".into(),
            message: format!("expected a positive integer, got `{raw}`"),
        });
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config {
            path: "env.KITTEN_THREADS".into(),
            message: e.to_string(),
        })
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::from_toml_str(&std::fs::read_to_string(p)?),
        None => Ok(ConfigFile::default()),
    }
}

fn cmd_prepare(mut cfg: ConfigFile, args: PrepareArgs) -> Result<()> {
    args.experiment.merge_into(&mut cfg);
    args.detector.merge_into(&mut cfg);
    let params = cfg.resolve_experiment()?;
    let detector = cfg.resolve_detector()?;

    let prep = prepare_kitten_detailed(&params, &detector.model)?;
    let w00 = wigner_origin(&prep.state);

    // Write the artifact before the chatty summary so it survives a closed
    // stdout (`kitten prepare ... --dump-state f | head`).
    let dump = args
        .dump_state
        .or_else(|| cfg.output.dump_state.as_ref().map(PathBuf::from));
    if let Some(path) = dump {
        std::fs::write(&path, DmDump::from_state(&prep.state).to_json_string()?)?;
        eprintln!("wrote density matrix to {}", path.display());
    }

    print_parameters(&params);
    println!(
        "detector: {} ({}, pdc={:.2e}, eta={:.3}, m={})",
        detector.label,
        detector.model.label(),
        detector.model.pdc(),
        detector.model.eta(),
        detector.model.clicks()
    );
    println!("herald probability: {:.6e}", prep.herald_probability);
    println!("W(0,0): {w00:.6}");
    println!(
        "negative at origin: {}",
        if w00 < 0.0 { "yes" } else { "no" }
    );
    print_distribution(&prep.state);
    Ok(())
}

fn print_parameters(params: &ExperimentParams) {
    println!(
        "parameters: v0={:.3} dB, r1={}, r2={}, mode_purity={}, eta_hd={}, nmax={}",
        params.spec.v0_db(),
        params.r1,
        params.r2,
        params.mode_purity,
        params.eta_hd,
        params.spec.nmax()
    );
}

fn print_distribution(state: &DensityMatrix) {
    let dist = photon_distribution(state);
    let shown = dist.len().min(13);
    println!("photon distribution:");
    for (n, p) in dist.iter().take(shown).enumerate() {
        println!("  {n:2}: {p:.6e}");
    }
    if dist.len() > shown {
        let rest: f64 = dist[shown..].iter().sum();
        println!("  above n={}: {rest:.3e}", shown - 1);
    }
}

fn cmd_witness(mut cfg: ConfigFile, args: WitnessArgs) -> Result<()> {
    args.experiment.merge_into(&mut cfg);
    args.detector.merge_into(&mut cfg);
    args.witness.merge_into(&mut cfg);
    let wcfg = cfg.resolve_witness()?;

    let rho = match &args.state {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let rho = DmDump::from_json_str(&text)?.to_state()?;
            println!("state: {} ({} levels)", path.display(), rho.dim());
            rho
        }
        None => {
            let params = cfg.resolve_experiment()?;
            let detector = cfg.resolve_detector()?;
            print_parameters(&params);
            println!("detector: {} ({})", detector.label, detector.model.label());
            prepare_kitten_detailed(&params, &detector.model)?.state
        }
    };

    let result = evaluate_witness(&rho, &wcfg)?;
    println!("witness value: {:.6e}", result.witness_value);
    println!("optimum: a={:.4}, s={:.4}", result.a_opt, result.s_opt);
    println!(
        "probabilities at optimum: p0={:.6}, p1={:.6}",
        result.p0, result.p1
    );
    println!(
        "quantum non-Gaussian: {}",
        if result.witness_value > 0.0 {
            "yes"
        } else {
            "no"
        }
    );
    println!("classical-boundary margin: {:.6e}", result.classical_margin);
    Ok(())
}

fn cmd_sweep(mut cfg: ConfigFile, args: SweepArgs) -> Result<()> {
    args.experiment.merge_into(&mut cfg);
    args.witness.merge_into(&mut cfg);
    let s = &mut cfg.sweep;
    s.variable = args.variable.clone().or_else(|| s.variable.take());
    s.from = args.from.or(s.from);
    s.to = args.to.or(s.to);
    s.points = args.points.or(s.points);
    if args.log {
        s.log = Some(true);
    }
    if args.detectors.is_some() {
        s.detectors = args.detectors.clone();
    }

    let spec = cfg.resolve_sweep()?;
    let rows = run_sweep(&spec)?;
    let meta = RunMeta::from_spec(&spec);

    let csv_dest = args
        .csv
        .or_else(|| cfg.output.csv.as_ref().map(PathBuf::from));
    let json_dest = args
        .json
        .or_else(|| cfg.output.json.as_ref().map(PathBuf::from));

    let mut wrote = false;
    if let Some(path) = &csv_dest {
        write_csv(&rows, path)?;
        eprintln!("wrote {} rows to {}", rows.len(), path.display());
        wrote = true;
    }
    if let Some(path) = &json_dest {
        write_json(&meta, &rows, path)?;
        eprintln!("wrote {} rows to {}", rows.len(), path.display());
        wrote = true;
    }
    if !wrote {
        print!("{}", csv_string(&rows));
    }
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let components_given = args.eta_qe.is_some() || args.eta_t.is_some() || args.zeta.is_some();
    let (eta_qe, eta_t, zeta) = match args.eta_hd {
        Some(eta) if components_given => {
            return Err(Error::Config {
                path: "calibrate.eta_hd".into(),
                message: format!(
                    "give either --eta-hd {eta} or the component efficiencies, not both"
                ),
            });
        }
        Some(eta) => (eta, 1.0, 1.0),
        None => (
            args.eta_qe.unwrap_or(1.0),
            args.eta_t.unwrap_or(1.0),
            args.zeta.unwrap_or(1.0),
        ),
    };
    let input = CalibrationInput {
        v_sqz: args.vsqz,
        v_asqz: args.vasqz,
        eta_qe,
        eta_t,
        zeta,
        r2: args.r2.unwrap_or(0.08),
    };
    let out = calibrate(&input)?;
    println!("V0 = {:.3} ({:.3} dB)", out.v0, out.v0_db);
    println!("r_total = {:.4}", out.r_total);
    println!("r1 = {:.4}", out.r1);
    println!("eta_hd = {:.4}", out.eta_hd);
    Ok(())
}

fn cmd_presets() -> Result<()> {
    println!("detector catalog ({PRESET_TABLE_ID}):");
    println!("  {:<16} {:>8} {:>6}", "name", "pdc", "eta");
    for preset in PRESETS {
        println!(
            "  {:<16} {:>8.1e} {:>6.2}",
            preset.name, preset.pdc, preset.eta
        );
    }
    println!("aliases:");
    for (alias, target) in ALIASES {
        println!("  {alias} -> {target}");
    }
    println!("behaviors: pnrd, npnrd (ideal); impnrd, imnpnrd (catalog or --pdc/--eta)");
    let d = ExperimentParams::default();
    println!("reference experiment parameters:");
    println!(
        "  v0={:.2} dB, r1={}, r2={}, mode_purity={}, eta_hd={}, nmax={}",
        d.spec.v0_db(),
        d.r1,
        d.r2,
        d.mode_purity,
        d.eta_hd,
        d.spec.nmax()
    );
    Ok(())
}
