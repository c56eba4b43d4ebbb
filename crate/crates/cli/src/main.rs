//! `dipolariton` — command-line front end for the dipolar
//! waveguide-polariton numerical laboratory.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use dipolariton::blockade::{
    blockade_radius, build_report, calibrate_kappa, detuning_sweep, extract_interaction,
    full_blockade_condition, BlockadeParams, ExtractionInputs, SweepPoint,
};
use dipolariton::dispersion::{dispersion, BranchId, CouplingParams};
use dipolariton::hbt::{
    bootstrap_g2, build_histogram, estimate_g2, generate_stream, read_timetags, write_timetags,
    G2Estimate, MaskSpec, StreamParams,
};
use dipolariton::mode_area::mode_area;
use dipolariton::stark::stark_scan_device;
use dipolariton::waveguide::{device_slabs, effective_index_strip, lateral_mode, solve_slab_te};

use config::RunConfig;
use output::{fmt_float, json_with_hash, write_atomic, Csv, RunManifest};

#[derive(Debug)]
pub enum CliError {
    /// Config or usage problem → exit 2.
    Usage(String),
    /// Module (physics/numerics/statistics) failure → exit 1.
    Module(dipolariton::Error),
}

impl From<dipolariton::Error> for CliError {
    fn from(e: dipolariton::Error) -> Self {
        match e {
            dipolariton::Error::Config(_) => CliError::Usage(e.to_string()),
            other => CliError::Module(other),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "dipolariton",
    version,
    about = "Numerical laboratory for dipolar waveguide polaritons",
    propagate_version = true
)]
struct Cli {
    /// JSON config document (defaults are used when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for all output artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for parallel sweeps (1 = fully deterministic audit mode;
    /// results are order-stable for any value).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Override the random seed used by stochastic subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override a config key by dotted path, e.g. --set blockade.gamma_mev=0.115
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Quantum-well Stark scan: red-shift and dipole length vs field
    StarkScan,
    /// Guided slab/strip modes: effective indices and lateral profile
    WgMode,
    /// Three-branch polariton dispersion with Hopfield fractions
    Dispersion,
    /// Pulse-integrated g2(0) vs laser detuning
    G2Sweep,
    /// Fit the dip-depth calibration 1-g2_min = k(U/g) + b(U/g)^2
    Calibrate,
    /// Interaction extraction chain: g_dd, blockade radius, full-blockade test
    Extract,
    /// Synthesize a two-channel timetag stream
    HbtGenerate,
    /// Histogram + g2(0) estimate (and optional bootstrap) from timetags
    HbtAnalyze {
        /// Timetag CSV to analyze (default: <out-dir>/timetags.csv)
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the full pipeline and tabulate computed vs published values
    ReproducePaper,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Module(e)) => {
            let kind = match &e {
                dipolariton::Error::Domain(_) => "domain",
                dipolariton::Error::Numerical(_) => "numerical",
                dipolariton::Error::ModeCutOff(_) => "mode-cutoff",
                dipolariton::Error::Truncation { .. } => "truncation",
                dipolariton::Error::Statistics(_) => "statistics",
                dipolariton::Error::Config(_) => "config",
            };
            let diag = serde_json::json!({ "error": kind, "message": e.to_string() });
            eprintln!("{diag}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.jobs == 0 {
        return Err(CliError::Usage("--jobs must be >= 1".into()));
    }
    let (mut cfg, canonical) = config::load(cli.config.as_deref(), &cli.set)?;
    if let Some(seed) = cli.seed {
        cfg.hbt.seed = seed;
    }
    let subcommand = match &cli.cmd {
        Cmd::StarkScan => "stark-scan",
        Cmd::WgMode => "wg-mode",
        Cmd::Dispersion => "dispersion",
        Cmd::G2Sweep => "g2-sweep",
        Cmd::Calibrate => "calibrate",
        Cmd::Extract => "extract",
        Cmd::HbtGenerate => "hbt-generate",
        Cmd::HbtAnalyze { .. } => "hbt-analyze",
        Cmd::ReproducePaper => "reproduce-paper",
    };
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: subcommand.to_string(),
        config_path: cli.config.clone(),
        overrides: cli.set.clone(),
        seed: cli.seed,
        jobs: cli.jobs,
        config: canonical,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
    pool.install(|| dispatch(&cli, &cfg, &manifest))
}

fn dispatch(cli: &Cli, cfg: &RunConfig, manifest: &RunManifest) -> Result<(), CliError> {
    let hash = manifest.hash();
    let out = &cli.out_dir;
    write_atomic(out, &format!("{}-manifest.json", manifest.subcommand), {
        &json_with_hash(manifest, &hash)?
    })?;
    match &cli.cmd {
        Cmd::StarkScan => cmd_stark_scan(cfg, out, &hash),
        Cmd::WgMode => cmd_wg_mode(cfg, out, &hash),
        Cmd::Dispersion => cmd_dispersion(cfg, out, &hash),
        Cmd::G2Sweep => cmd_g2_sweep(cfg, out, &hash),
        Cmd::Calibrate => cmd_calibrate(cfg, out, &hash),
        Cmd::Extract => cmd_extract(cfg, out, &hash),
        Cmd::HbtGenerate => cmd_hbt_generate(cfg, out, &hash),
        Cmd::HbtAnalyze { input } => cmd_hbt_analyze(cfg, input.as_deref(), out, &hash),
        Cmd::ReproducePaper => cmd_reproduce(cfg, out, &hash),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn cmd_stark_scan(cfg: &RunConfig, out: &std::path::Path, hash: &str) -> Result<(), CliError> {
    let s = &cfg.stark;
    if s.points < 1 {
        return Err(CliError::Usage("stark.points must be >= 1".into()));
    }
    let fields = linspace(s.field_min_v_per_um, s.field_max_v_per_um, s.points);
    let results = stark_scan_device(&cfg.device, &fields)?;
    let mut csv = Csv::new(hash, "field_V_per_um,voltage_V,shift_meV,dipole_nm");
    for r in &results {
        csv.row(&[
            fmt_float(r.field_f),
            fmt_float(r.field_f * cfg.device.structure_thickness_um),
            fmt_float(r.shift_delta_e),
            fmt_float(r.dipole_length_d),
        ]);
    }
    write_atomic(out, "stark-scan.csv", &csv.into_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct WgModeSummary {
    n_eff_under_strip: f64,
    n_eff_outside_strip: f64,
    lateral_delta_n_eff: f64,
    strip_width_um: f64,
    lateral_fwhm_um: f64,
    wavelength_um: f64,
}

fn cmd_wg_mode(cfg: &RunConfig, out: &std::path::Path, hash: &str) -> Result<(), CliError> {
    let (under, outside) = device_slabs(&cfg.device)?;
    let m_under = solve_slab_te(&under, 0)?;
    let m_outside = solve_slab_te(&outside, 0)?;
    let lateral = effective_index_strip(&under, &outside, cfg.device.strip_width_um)?;
    let summary = WgModeSummary {
        n_eff_under_strip: m_under.n_eff,
        n_eff_outside_strip: m_outside.n_eff,
        lateral_delta_n_eff: m_under.n_eff - m_outside.n_eff,
        strip_width_um: cfg.device.strip_width_um,
        lateral_fwhm_um: lateral.fwhm_width,
        wavelength_um: cfg.device.wavelength_um,
    };
    write_atomic(out, "wg-mode.json", &json_with_hash(&summary, hash)?)?;
    let mut csv = Csv::new(hash, "y_um,field_amplitude");
    for (z, e) in lateral.profile_z.iter().zip(&lateral.profile_e) {
        csv.row(&[fmt_float(*z), fmt_float(*e)]);
    }
    write_atomic(out, "wg-profile.csv", &csv.into_bytes())?;
    Ok(())
}

fn coupling_for_bias(bias_v: f64) -> CouplingParams<f64> {
    // the two published coupling parameter sets; pick the nearer bias
    if (bias_v - 2.5).abs() <= (bias_v - 0.0).abs() {
        CouplingParams::biased_2p5()
    } else {
        CouplingParams::zero_bias()
    }
}

fn cmd_dispersion(cfg: &RunConfig, out: &std::path::Path, hash: &str) -> Result<(), CliError> {
    let d = &cfg.dispersion;
    if d.points < 2 {
        return Err(CliError::Usage("dispersion.points must be >= 2".into()));
    }
    let p = coupling_for_bias(d.bias_v);
    let lo = p.beta_at_energy(p.e_hh - d.window_mev);
    let hi = p.beta_at_energy(p.e_hh + d.window_mev);
    let grid = linspace(lo, hi, d.points);
    let branches = dispersion(&p, &grid)?;
    let mut csv = Csv::new(hash, "branch,beta_per_um,E_meV,chi_te2,chi_hh2,chi_lh2,vg_um_per_ps");
    for b in &branches {
        let name = match b.branch_id {
            BranchId::Lower => "lower",
            BranchId::Middle => "middle",
            BranchId::Upper => "upper",
        };
        for s in &b.samples {
            csv.row(&[
                name.to_string(),
                fmt_float(s.beta),
                fmt_float(s.energy),
                fmt_float(s.chi_te2),
                fmt_float(s.chi_hh2),
                fmt_float(s.chi_lh2),
                fmt_float(s.v_g),
            ]);
        }
    }
    write_atomic(out, "dispersion.csv", &csv.into_bytes())?;
    Ok(())
}

fn sweep_from_config(cfg: &RunConfig) -> Result<Vec<SweepPoint<f64>>, CliError> {
    let b = &cfg.blockade;
    if b.points < 2 {
        return Err(CliError::Usage("blockade.points must be >= 2".into()));
    }
    let deltas = linspace(
        b.delta_over_gamma_min * b.gamma_mev,
        b.delta_over_gamma_max * b.gamma_mev,
        b.points,
    );
    let mut base = BlockadeParams::new(0.0, b.u_over_gamma * b.gamma_mev, b.gamma_mev);
    base.fock_cutoff = b.fock_cutoff;
    base.coarse_points = b.coarse_points;
    Ok(detuning_sweep(&base, &deltas)?)
}

fn write_sweep_csv(
    sweep: &[SweepPoint<f64>],
    name: &str,
    out: &std::path::Path,
    hash: &str,
) -> Result<(), CliError> {
    let mut csv = Csv::new(hash, "delta_meV,g2_0");
    for p in sweep {
        csv.row(&[fmt_float(p.delta), fmt_float(p.g2_0)]);
    }
    write_atomic(out, name, &csv.into_bytes())?;
    Ok(())
}

fn cmd_g2_sweep(cfg: &RunConfig, out: &std::path::Path, hash: &str) -> Result<(), CliError> {
    let sweep = sweep_from_config(cfg)?;
    write_sweep_csv(&sweep, "g2-sweep.csv", out, hash)
}

fn cmd_calibrate(cfg: &RunConfig, out: &std::path::Path, hash: &str) -> Result<(), CliError> {
    let cal = calibrate_kappa::<f64>(&cfg.calibration.gammas_mev, &cfg.calibration.u_over_gamma)?;
    write_atomic(out, "calibrate.json", &json_with_hash(&cal, hash)?)?;
    let mut csv = Csv::new(hash, "gamma_meV,u_over_gamma,g2_min,delta_min_meV");
    for &(g, u, g2, dmin) in &cal.points {
        csv.row(&[fmt_float(g), fmt_float(u), fmt_float(g2), fmt_float(dmin)]);
    }
    write_atomic(out, "calibrate.csv", &csv.into_bytes())?;
    Ok(())
}

fn extraction_inputs(cfg: &RunConfig) -> ExtractionInputs<f64> {
    ExtractionInputs {
        width_w: cfg.device.strip_width_um,
        gamma: cfg.blockade.gamma_mev,
        v_g: cfg.extraction.v_g_um_per_ps,
        kappa: cfg.extraction.kappa,
        b: cfg.extraction.b,
        dipole_d_nm: cfg.extraction.dipole_d_nm,
        chi2: cfg.extraction.chi2,
        c_ex: cfg.extraction.c_ex,
    }
}

fn cmd_extract(cfg: &RunConfig, out: &std::path::Path, hash: &str) -> Result<(), CliError> {
    let sweep = sweep_from_config(cfg)?;
    write_sweep_csv(&sweep, "extract-curve.csv", out, hash)?;
    let report = build_report(&sweep, &extraction_inputs(cfg))?;
    write_atomic(out, "extract.json", &json_with_hash(&report, hash)?)?;
    Ok(())
}

fn stream_params(cfg: &RunConfig) -> StreamParams {
    let h = &cfg.hbt;
    StreamParams {
        n_pulses: h.n_pulses,
        p_click: h.p_click,
        g2_target: h.g2_target,
        jitter_sigma_ps: h.jitter_sigma_ps,
        crosstalk: h.crosstalk.clone(),
        seed: h.seed,
        rep_period_ps: h.rep_period_ps,
    }
}

fn cmd_hbt_generate(cfg: &RunConfig, out: &std::path::Path, hash: &str) -> Result<(), CliError> {
    let stream = generate_stream(&stream_params(cfg))?;
    let mut buf = Vec::new();
    buf.extend_from_slice(format!("# manifest {hash}\n").as_bytes());
    write_timetags(&stream, &mut buf)?;
    write_atomic(out, "timetags.csv", &buf)?;
    Ok(())
}

#[derive(Serialize)]
struct HbtAnalysis {
    estimate: G2Estimate,
    bootstrap_mean: Option<f64>,
    bootstrap_sigma: Option<f64>,
    n_events: usize,
}

fn cmd_hbt_analyze(
    cfg: &RunConfig,
    input: Option<&std::path::Path>,
    out: &std::path::Path,
    hash: &str,
) -> Result<(), CliError> {
    let h = &cfg.hbt;
    let default_path = out.join("timetags.csv");
    let path = input.unwrap_or(&default_path);
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    let stream = read_timetags(std::io::BufReader::new(file), h.rep_period_ps)?;
    let hist = build_histogram(&stream, h.bin_width_ps, h.max_order)?;
    let mask = MaskSpec::Auto {
        known_crosstalk_delays_ps: h.known_crosstalk_delays_ps.clone(),
    };
    let estimate = estimate_g2(&hist, &mask)?;
    let (bootstrap_mean, bootstrap_sigma) = if h.bootstrap_replicates > 0 {
        let (m, s) = bootstrap_g2(
            &stream,
            h.bin_width_ps,
            h.max_order,
            h.bootstrap_block_pulses,
            h.bootstrap_replicates,
            &mask,
            h.seed.wrapping_add(1),
        )?;
        (Some(m), Some(s))
    } else {
        (None, None)
    };
    let mut csv = Csv::new(hash, "tau_ps,counts");
    for (i, &c) in hist.counts.iter().enumerate() {
        let center = hist.tau_min + i as i64 * hist.bin_width + hist.bin_width / 2;
        csv.row(&[center.to_string(), c.to_string()]);
    }
    write_atomic(out, "hbt-histogram.csv", &csv.into_bytes())?;
    let analysis = HbtAnalysis {
        estimate,
        bootstrap_mean,
        bootstrap_sigma,
        n_events: stream.events.len(),
    };
    write_atomic(out, "hbt-estimate.json", &json_with_hash(&analysis, hash)?)?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow {
    quantity: &'static str,
    computed: f64,
    reference: f64,
}

fn cmd_reproduce(cfg: &RunConfig, out: &std::path::Path, hash: &str) -> Result<(), CliError> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    let push = |rows: &mut Vec<SummaryRow>, quantity, computed, reference| {
        rows.push(SummaryRow {
            quantity,
            computed,
            reference,
        });
    };

    // quantum-well Stark response at the operating field
    cmd_stark_scan(cfg, out, hash)?;
    let field = cfg.device.field_v_per_um();
    let stark = stark_scan_device(&cfg.device, &[field])?;
    push(&mut rows, "dipole_length_nm", stark[0].dipole_length_d, 8.0);

    // guided modes
    cmd_wg_mode(cfg, out, hash)?;
    let (under, outside) = device_slabs(&cfg.device)?;
    let slab = solve_slab_te(&outside, 0)?;
    let wide = effective_index_strip(&under, &outside, cfg.device.strip_width_um)?;
    let narrow = lateral_mode(slab.n_eff, 1.0, 0.5, cfg.device.wavelength_um)?;
    push(&mut rows, "slab_n_eff", slab.n_eff, 3.6);
    push(&mut rows, "wide_strip_fwhm_um", wide.fwhm_width, 4.9);
    push(&mut rows, "narrow_strip_fwhm_um", narrow.fwhm_width, 0.28);

    // dispersion: group velocities at the two published operating fractions
    cmd_dispersion(cfg, out, hash)?;
    let vel_at = |p: CouplingParams<f64>, frac: f64| -> Result<f64, CliError> {
        let grid = linspace(
            p.beta_at_energy(p.e_hh - 15.0),
            p.beta_at_energy(p.e_hh + 15.0),
            8001,
        );
        let [lp, _, _] = dispersion(&p, &grid)?;
        Ok(lp
            .samples
            .iter()
            .min_by(|a, b| {
                (a.exciton_fraction() - frac)
                    .abs()
                    .partial_cmp(&(b.exciton_fraction() - frac).abs())
                    .unwrap()
            })
            .expect("non-empty branch")
            .v_g)
    };
    push(
        &mut rows,
        "v_g_biased_um_per_ps",
        vel_at(CouplingParams::biased_2p5(), 0.68)?,
        25.6,
    );
    push(
        &mut rows,
        "v_g_zero_bias_um_per_ps",
        vel_at(CouplingParams::zero_bias(), 0.31)?,
        52.1,
    );

    // dip-depth calibration
    let cal = calibrate_kappa::<f64>(&cfg.calibration.gammas_mev, &cfg.calibration.u_over_gamma)?;
    write_atomic(out, "calibrate.json", &json_with_hash(&cal, hash)?)?;
    push(&mut rows, "kappa", cal.kappa, 0.61);
    push(&mut rows, "b", cal.b, -0.56);

    // simulated detuning sweep + extraction chain
    let sweep = sweep_from_config(cfg)?;
    write_sweep_csv(&sweep, "g2-sweep.csv", out, hash)?;
    let report = build_report(&sweep, &extraction_inputs(cfg))?;
    write_atomic(out, "extract.json", &json_with_hash(&report, hash)?)?;
    push(&mut rows, "dip_depth", 1.0 - report.g2_min, 0.06);
    // the published interaction strengths use the fitted calibration slope
    let area = mode_area::<f64>(
        cfg.device.strip_width_um,
        cfg.blockade.gamma_mev,
        cfg.extraction.v_g_um_per_ps,
    )?;
    let (_, g_dd) = extract_interaction(0.94, cfg.blockade.gamma_mev, &area, cfg.extraction.kappa)?;
    push(&mut rows, "g_dd_meV_um2", g_dd, 4.0);
    push(
        &mut rows,
        "blockade_radius_um",
        blockade_radius(g_dd, cfg.blockade.gamma_mev)?,
        3.4,
    );
    let cond = full_blockade_condition(
        0.28,
        cfg.extraction.dipole_d_nm,
        cfg.extraction.chi2,
        cfg.extraction.c_ex,
    )?;
    push(&mut rows, "threshold_chi2", cond.threshold_chi2, 0.56);

    // HBT round trip at the configured target
    cmd_hbt_generate(cfg, out, hash)?;
    cmd_hbt_analyze(cfg, None, out, hash)?;
    let stream = generate_stream(&stream_params(cfg))?;
    let hist = build_histogram(&stream, cfg.hbt.bin_width_ps, cfg.hbt.max_order)?;
    let est = estimate_g2(
        &hist,
        &MaskSpec::Auto {
            known_crosstalk_delays_ps: cfg.hbt.known_crosstalk_delays_ps.clone(),
        },
    )?;
    push(&mut rows, "hbt_g2_recovered", est.g2_0, cfg.hbt.g2_target);

    let mut csv = Csv::new(hash, "quantity,computed,reference");
    for r in &rows {
        csv.row(&[
            r.quantity.to_string(),
            fmt_float(r.computed),
            fmt_float(r.reference),
        ]);
    }
    write_atomic(out, "summary.csv", &csv.into_bytes())?;
    write_atomic(out, "summary.json", &json_with_hash(&rows, hash)?)?;
    Ok(())
}
