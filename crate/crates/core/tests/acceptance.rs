//! End-to-end acceptance gate. Each test prints exactly one
//! `ACCEPTANCE <n>: PASS|FAIL` line (run with `--nocapture` to see the
//! lines for passing criteria as well). Tolerances are pinned in code
//! next to each check.

use dipolariton::blockade::{
    blockade_radius, calibrate_kappa, detuning_sweep, evolve, extract_interaction,
    full_blockade_condition, pulse_g2, BlockadeParams, PulseShape,
};
use dipolariton::dispersion::{dispersion, group_velocity_vs_fraction, CouplingParams};
use dipolariton::hbt::{
    bootstrap_g2, build_histogram, estimate_g2, generate_stream, CrossTalk, MaskSpec,
    StreamParams, DEFAULT_BIN_WIDTH_PS,
};
use dipolariton::mode_area::mode_area;
use dipolariton::stark::{stark_scan, StarkParams};
use dipolariton::units::hbar;
use dipolariton::waveguide::{
    device_slabs, effective_index_strip, lateral_mode, mode_equation_residual, solve_slab_te,
};
use dipolariton::DeviceConfig;

struct Gate {
    criterion: u32,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Gate {
    fn new(criterion: u32) -> Self {
        Self {
            criterion,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!(
                "ACCEPTANCE {}: PASS — {}",
                self.criterion,
                self.notes.join("; ")
            );
        } else {
            println!(
                "ACCEPTANCE {}: FAIL — {}",
                self.criterion,
                self.failures.join("; ")
            );
            panic!(
                "acceptance criterion {} failed: {}",
                self.criterion,
                self.failures.join("; ")
            );
        }
    }
}

/// Criterion 1: the dip-depth calibration 1−g²₀,min = κ(U/γ) + b(U/γ)²
/// over U/γ ∈ {0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5} and γ ∈ {120, 220} µeV
/// must give κ ∈ [0.58, 0.64], b ∈ [−0.66, −0.46], with the per-γ κ values
/// agreeing within 2%.
#[test]
fn acceptance_1_kappa_calibration() {
    let mut gate = Gate::new(1);
    let gammas = [0.120, 0.220];
    let u_over_gamma = [0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
    let cal = calibrate_kappa::<f64>(&gammas, &u_over_gamma).expect("calibration run");
    gate.check(
        (0.58..=0.64).contains(&cal.kappa),
        format!("kappa = {:.4} (required [0.58, 0.64])", cal.kappa),
    );
    gate.check(
        (-0.66..=-0.46).contains(&cal.b),
        format!("b = {:.4} (required [-0.66, -0.46])", cal.b),
    );
    let k: Vec<f64> = cal.per_gamma.iter().map(|&(_, k)| k).collect();
    let spread = (k[0] - k[1]).abs() / k[0].abs().max(k[1].abs());
    gate.check(
        spread < 0.02,
        format!("per-linewidth kappa spread = {:.4} (required < 0.02)", spread),
    );
    gate.finish();
}

/// Criterion 2: steady-state g²(0) under a weak 50ħ/γ flat-top drive
/// matches the two-photon-truncation Kerr formula within 1e-3 relative
/// across Δ′/γ ∈ [−3, 3] and U/γ ∈ {0, 0.1, 0.5}.
#[test]
fn acceptance_2_cw_kerr_oracle() {
    let mut gate = Gate::new(2);
    let gamma = 0.2;
    let hb = hbar::<f64>();
    let mut worst = 0.0_f64;
    for &uog in &[0.0, 0.1, 0.5] {
        for i in 0..13 {
            let dprime_over_gamma = -3.0 + 0.5 * i as f64;
            let dprime = dprime_over_gamma * gamma;
            let half = 0.5 * gamma;
            // public API takes Δ = −Δ′
            let mut p = BlockadeParams::new(-dprime, uog * gamma, gamma);
            let target_n = 3e-4;
            let f0 = (target_n * (dprime * dprime + half * half)).sqrt() / hb;
            let length = 50.0 * hb / gamma;
            p.drive = PulseShape::flat_top(length, length / 2.0).with_amplitude(f0);
            let run = evolve(&p).expect("steady-state run");
            let g2 = *dipolariton::blockade::equal_time_g2(&run)
                .last()
                .map(|(_, g)| g)
                .expect("occupied steady state");
            let analytic = (dprime * dprime + half * half)
                / ((dprime + 0.5 * uog * gamma).powi(2) + half * half);
            worst = worst.max((g2 - analytic).abs() / analytic);
        }
    }
    gate.check(
        worst < 1e-3,
        format!("worst relative error vs analytic Kerr g2 = {worst:.2e} (required < 1e-3)"),
    );
    gate.finish();
}

/// Criterion 3: extraction chain from (g²_min = 0.94, γ = 0.215 meV,
/// w = 5 µm, v_g = 25.6 µm/ps, κ = 0.61).
#[test]
fn acceptance_3_extraction_chain() {
    let mut gate = Gate::new(3);
    let gamma = 0.215;
    let area = mode_area::<f64>(5.0, gamma, 25.6).expect("mode area");
    let (_, g_dd) = extract_interaction(0.94, gamma, &area, 0.61).expect("extraction");
    let r_b = blockade_radius(g_dd, gamma).expect("radius");
    let n_b = gamma / g_dd;
    let n = area.density_n;
    gate.check(
        (g_dd - 4.0).abs() <= 0.3,
        format!("g_dd = {g_dd:.3} meV·µm² (required 4.0 ± 0.3)"),
    );
    gate.check(
        (r_b - 3.4).abs() <= 0.2,
        format!("R_b = {r_b:.3} µm (required 3.4 ± 0.2)"),
    );
    gate.check(
        (n_b - 0.054).abs() < 0.006,
        format!("n_b = {n_b:.4} µm⁻² (expect ≈ 0.054)"),
    );
    gate.check(
        (n - 5.1e-3).abs() < 0.3e-3,
        format!("n = {n:.2e} µm⁻² (expect ≈ 5.1e-3)"),
    );
    gate.check(
        (n / n_b - 0.1).abs() < 0.02,
        format!("n/n_b = {:.3} (expect ≈ 0.1)", n / n_b),
    );
    gate.finish();
}

/// Criterion 4: full-blockade threshold fraction at w = 0.28 µm, d = 8 nm,
/// C_ex = 50 solves to χ²* = 0.56 ± 0.01.
#[test]
fn acceptance_4_blockade_threshold() {
    let mut gate = Gate::new(4);
    let c = full_blockade_condition(0.28, 8.0, 0.6, 50.0).expect("condition");
    gate.check(
        (c.threshold_chi2 - 0.56_f64).abs() <= 0.01,
        format!(
            "threshold exciton fraction = {:.4} (required 0.56 ± 0.01)",
            c.threshold_chi2
        ),
    );
    gate.finish();
}

/// Criterion 5: g²₀(Δ) at γ = 215 µeV, U/γ = 0.1 dips below one at Δ < 0
/// with depth in [0.04, 0.07] and peaks above one at Δ > 0; the U_dd = 0
/// sweep is flat to 1e-4.
#[test]
fn acceptance_5_sweep_shape() {
    let mut gate = Gate::new(5);
    let gamma = 0.215;
    let deltas: Vec<f64> = (0..15).map(|i| (-3.5 + 0.5 * i as f64) * gamma).collect();
    let sweep = detuning_sweep(&BlockadeParams::new(0.0, 0.1 * gamma, gamma), &deltas)
        .expect("interacting sweep");
    let min_pt = sweep
        .iter()
        .min_by(|a, b| a.g2_0.partial_cmp(&b.g2_0).unwrap())
        .unwrap();
    let max_pt = sweep
        .iter()
        .max_by(|a, b| a.g2_0.partial_cmp(&b.g2_0).unwrap())
        .unwrap();
    let depth = 1.0 - min_pt.g2_0;
    gate.check(
        min_pt.delta < 0.0,
        format!("minimum at Δ = {:.3} meV (required Δ < 0)", min_pt.delta),
    );
    gate.check(
        (0.04..=0.07).contains(&depth),
        format!("dip depth 1−g²₀,min = {depth:.4} (required [0.04, 0.07])"),
    );
    gate.check(
        max_pt.delta > 0.0 && max_pt.g2_0 > 1.0,
        format!(
            "maximum g²₀ = {:.4} at Δ = {:.3} meV (required > 1 at Δ > 0)",
            max_pt.g2_0, max_pt.delta
        ),
    );
    let mut flat_worst = 0.0_f64;
    for &delta in &[-2.0 * gamma, -0.5 * gamma, 0.5 * gamma, 2.0 * gamma] {
        let g2 = pulse_g2(&BlockadeParams::new(delta, 0.0, gamma)).expect("linear sweep");
        flat_worst = flat_worst.max((g2 - 1.0).abs());
    }
    gate.check(
        flat_worst < 1e-4,
        format!("U_dd = 0 flatness |g²₀ − 1| = {flat_worst:.2e} (required < 1e-4)"),
    );
    gate.finish();
}

/// Criterion 6: synthetic timetag streams (10⁷ pulses, 12.5 ns period,
/// 300 ps jitter, cross-talk at 9.5/114 ns with p = 0.005, auto-masking)
/// recover g2 ∈ {0.94, 1.00, 1.03} within two quoted uncertainties, and
/// the quoted uncertainty agrees with a block bootstrap within 25%.
#[test]
fn acceptance_6_hbt_round_trip() {
    let mut gate = Gate::new(6);
    for (i, &target) in [0.94, 1.00, 1.03].iter().enumerate() {
        let params = StreamParams {
            n_pulses: 10_000_000,
            g2_target: target,
            jitter_sigma_ps: 300.0,
            crosstalk: vec![
                CrossTalk {
                    delay_ps: 9_500,
                    probability: 0.005,
                },
                CrossTalk {
                    delay_ps: 114_000,
                    probability: 0.005,
                },
            ],
            seed: 42 + i as u64,
            ..StreamParams::default()
        };
        let stream = generate_stream(&params).expect("stream");
        let hist = build_histogram(&stream, DEFAULT_BIN_WIDTH_PS, 10).expect("histogram");
        let est = estimate_g2(&hist, &MaskSpec::auto_default()).expect("estimate");
        gate.check(
            (est.g2_0 - target).abs() <= 2.0 * est.uncertainty,
            format!(
                "target {target}: recovered {:.4} ± {:.4} (required within 2σ)",
                est.g2_0, est.uncertainty
            ),
        );
        let (_, boot_sigma) = bootstrap_g2(
            &stream,
            DEFAULT_BIN_WIDTH_PS,
            10,
            100_000,
            200,
            &MaskSpec::auto_default(),
            7,
        )
        .expect("bootstrap");
        let ratio = est.uncertainty / boot_sigma;
        gate.check(
            (0.75..=1.0 / 0.75).contains(&ratio),
            format!(
                "target {target}: quoted/bootstrap uncertainty = {:.4}/{:.4} (required within 25%)",
                est.uncertainty, boot_sigma
            ),
        );
    }
    gate.finish();
}

/// Criterion 7: Hopfield normalization to 1e-10, resonant splitting equal
/// to Ω_hh, v_g-vs-photon-fraction fit R² > 0.99, and the two
/// operating-point velocities within 15%.
#[test]
fn acceptance_7_dispersion_suite() {
    let mut gate = Gate::new(7);
    let p = CouplingParams::<f64>::biased_2p5();
    let lo = p.beta_at_energy(p.e_hh - 15.0);
    let hi = p.beta_at_energy(p.e_hh + 15.0);
    let grid: Vec<f64> = (0..8001)
        .map(|i| lo + (hi - lo) * i as f64 / 8000.0)
        .collect();
    let branches = dispersion(&p, &grid).expect("dispersion");
    let mut norm_worst = 0.0_f64;
    for b in &branches {
        for s in &b.samples {
            norm_worst = norm_worst.max((s.chi_te2 + s.chi_hh2 + s.chi_lh2 - 1.0).abs());
        }
    }
    gate.check(
        norm_worst < 1e-10,
        format!("Hopfield normalization deviation = {norm_worst:.2e} (required < 1e-10)"),
    );
    // resonant two-level splitting with the light-hole line pushed far
    // off resonance and almost decoupled
    let mut p2 = p;
    p2.omega_lh = 1e-6;
    p2.e_lh = p2.e_hh + 1e6;
    let beta_res = p2.beta_at_energy(p2.e_hh);
    let [lp, mp, _] = dispersion(&p2, &[beta_res]).expect("resonant point");
    let split = mp.samples[0].energy - lp.samples[0].energy;
    gate.check(
        (split - p2.omega_hh).abs() < 1e-9,
        format!(
            "resonant splitting = {split:.6} meV vs Ω_hh = {} meV",
            p2.omega_hh
        ),
    );
    let [lp_full, _, _] = dispersion(&p, &grid).expect("dispersion");
    let window = dipolariton::dispersion::PolaritonBranch {
        branch_id: lp_full.branch_id,
        samples: lp_full
            .samples
            .iter()
            .cloned()
            .filter(|s| (0.2..=0.8).contains(&s.exciton_fraction()))
            .collect(),
    };
    let (_, _, r2) = group_velocity_vs_fraction(&window).expect("velocity fit");
    gate.check(r2 > 0.99, format!("velocity-fraction fit R² = {r2:.4}"));
    let vel_at = |params: CouplingParams<f64>, frac: f64| {
        let lo = params.beta_at_energy(params.e_hh - 15.0);
        let hi = params.beta_at_energy(params.e_hh + 15.0);
        let grid: Vec<f64> = (0..8001)
            .map(|i| lo + (hi - lo) * i as f64 / 8000.0)
            .collect();
        let [lp, _, _] = dispersion(&params, &grid).expect("dispersion");
        lp.samples
            .iter()
            .min_by(|a, b| {
                (a.exciton_fraction() - frac)
                    .abs()
                    .partial_cmp(&(b.exciton_fraction() - frac).abs())
                    .unwrap()
            })
            .unwrap()
            .v_g
    };
    let v1 = vel_at(CouplingParams::biased_2p5(), 0.68);
    let v2 = vel_at(CouplingParams::zero_bias(), 0.31);
    gate.check(
        (v1 - 25.6).abs() / 25.6 < 0.15,
        format!("v_g at fraction 0.68 = {v1:.2} µm/ps (expect 25.6 ± 15%)"),
    );
    gate.check(
        (v2 - 52.1).abs() / 52.1 < 0.15,
        format!("v_g at fraction 0.31 = {v2:.2} µm/ps (expect 52.1 ± 15%)"),
    );
    gate.finish();
}

/// Criterion 8: lateral mode FWHM 4.9 µm ± 10% (5 µm strip) and
/// 0.28 µm ± 15% (0.5 µm deep-etched strip); slab mode-equation residual
/// below 1e-6.
#[test]
fn acceptance_8_waveguide_modes() {
    let mut gate = Gate::new(8);
    let cfg = DeviceConfig::default();
    let (under, outside) = device_slabs(&cfg).expect("device stacks");
    let wide = effective_index_strip(&under, &outside, cfg.strip_width_um).expect("wide strip");
    gate.check(
        (wide.fwhm_width - 4.9).abs() / 4.9 < 0.10,
        format!("5 µm strip FWHM = {:.3} µm (expect 4.9 ± 10%)", wide.fwhm_width),
    );
    let slab = solve_slab_te(&outside, 0).expect("slab mode");
    let narrow = lateral_mode(slab.n_eff, 1.0, 0.5, cfg.wavelength_um).expect("narrow strip");
    gate.check(
        (narrow.fwhm_width - 0.28).abs() / 0.28 < 0.15,
        format!(
            "0.5 µm strip FWHM = {:.4} µm (expect 0.28 ± 15%)",
            narrow.fwhm_width
        ),
    );
    for (name, stack) in [("under-strip", &under), ("outside-strip", &outside)] {
        let mode = solve_slab_te(stack, 0).expect("slab mode");
        let res = mode_equation_residual(stack, &mode);
        gate.check(
            res < 1e-6,
            format!("{name} slab residual = {res:.2e} (required < 1e-6)"),
        );
    }
    gate.finish();
}

/// Criterion 9: quadratic Stark shift at low field, monotone dipole
/// length, grid convergence, and d ∈ [5.6, 10.4] nm at F ≈ 2.36 V/µm.
#[test]
fn acceptance_9_stark_solver() {
    let mut gate = Gate::new(9);
    let params = StarkParams::<f64>::default();
    let fields = [0.0, 0.2, 0.4, 0.6, 1.2, 1.8, 2.359];
    let scan = stark_scan(&params, &fields).expect("field scan");
    // quadratic shift: fit ΔE = a·F² on the low-field points
    let (num, den): (f64, f64) = scan[..4].iter().fold((0.0, 0.0), |(n, d), r| {
        (
            n + r.shift_delta_e * r.field_f.powi(2),
            d + r.field_f.powi(4),
        )
    });
    let a = num / den;
    let worst_quad = scan[1..4]
        .iter()
        .map(|r| (r.shift_delta_e - a * r.field_f.powi(2)).abs() / r.shift_delta_e.abs())
        .fold(0.0_f64, f64::max);
    gate.check(
        worst_quad < 0.05,
        format!("low-field quadratic-fit residual = {worst_quad:.3} (required < 5%)"),
    );
    let monotone = scan
        .windows(2)
        .all(|w| w[1].dipole_length_d >= w[0].dipole_length_d);
    gate.check(monotone, "dipole length monotone in field".to_string());
    let d_op = scan.last().unwrap().dipole_length_d;
    gate.check(
        (5.6..=10.4).contains(&d_op),
        format!("d(F = 2.36 V/µm) = {d_op:.2} nm (required [5.6, 10.4])"),
    );
    let mut fine = params;
    fine.grid_h = params.grid_h / 2.0;
    let refined = stark_scan(&fine, &[2.359]).expect("refined scan");
    let rel = (refined[0].dipole_length_d - d_op).abs() / d_op;
    gate.check(
        rel < 0.01,
        format!("grid-refinement change in d = {rel:.2e} (required < 1%)"),
    );
    gate.finish();
}
