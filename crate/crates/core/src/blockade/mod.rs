//! Driven-dissipative Kerr (anharmonic) oscillator in a truncated Fock
//! space: Lindblad evolution, quantum-regression two-time correlations,
//! pulse-integrated g²₀ detuning sweeps, the κ/b calibration, and the
//! interaction-extraction / blockade design formulas.
//!
//! Sign convention bridge, documented once: figures quote the detuning
//! Δ = E_L − E_1P while the model Hamiltonian uses Δ' = E_p − ħω_L = −Δ.
//! The public API accepts Δ and negates internally.

mod extract;
mod g2;
mod lindblad;

pub use extract::{
    blockade_radius, build_report, extract_interaction, full_blockade_condition,
    BlockadeCondition, ExtractionInputs, ExtractionReport,
};
pub use g2::{
    calibrate_kappa, detuning_sweep, equal_time_g2, find_g2_minimum, pulse_g2,
    pulse_integrated_g2, two_time_g2, CalibrationResult, G2Grid, SweepPoint,
};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::units::hbar;

use lindblad::{integrate, KerrLiouvillian};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    Gaussian,
    FlatTop,
}

/// Drive envelope F(t), in 1/ps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape<R: Real> {
    pub kind: PulseKind,
    /// Peak amplitude F₀, 1/ps.
    pub amplitude_f0: R,
    /// Gaussian: intensity FWHM. Flat-top: plateau length. ps.
    pub fwhm_tau_p: R,
    /// Integration half-window: the run covers t ∈ [−T, +T]. ps.
    pub window_t: R,
}

impl<R: Real> PulseShape<R> {
    /// Fourier-limited Gaussian for a linewidth γ (meV): intensity FWHM
    /// τ_p = ħ/γ, window T = 4τ_p. Amplitude is a placeholder until
    /// [`calibrate_drive`] scales it.
    pub fn gaussian_for_linewidth(gamma: R) -> Self {
        let tau = hbar::<R>() / gamma;
        Self {
            kind: PulseKind::Gaussian,
            amplitude_f0: lit(0.02),
            fwhm_tau_p: tau,
            window_t: lit::<R>(4.0) * tau,
        }
    }

    /// Flat-top drive of the given plateau length centred on t = 0.
    pub fn flat_top(length: R, window_t: R) -> Self {
        Self {
            kind: PulseKind::FlatTop,
            amplitude_f0: lit(0.02),
            fwhm_tau_p: length,
            window_t,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fwhm_tau_p <= R::zero() || self.window_t <= R::zero() {
            return Err(Error::Domain("pulse widths must be positive".into()));
        }
        match self.kind {
            // Gaussian energy outside ±4τ_p is < 1e-6 of the total.
            PulseKind::Gaussian => {
                if self.window_t < lit::<R>(4.0) * self.fwhm_tau_p {
                    return Err(Error::Domain(
                        "gaussian window_t must be >= 4 x fwhm_tau_p".into(),
                    ));
                }
            }
            // Flat-top only needs the window to reach the plateau edge.
            PulseKind::FlatTop => {
                if self.window_t < self.fwhm_tau_p / lit::<R>(2.0) {
                    return Err(Error::Domain(
                        "flat-top window_t must cover the plateau half-length".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// F(t). The Gaussian field width is chosen so the *intensity* FWHM
    /// equals `fwhm_tau_p` (field FWHM is √2 larger).
    pub fn amplitude(&self, t: R) -> R {
        match self.kind {
            PulseKind::Gaussian => {
                let two = lit::<R>(2.0);
                let field_fwhm = self.fwhm_tau_p * two.sqrt();
                let sigma = field_fwhm / (two * (two * lit::<R>(2.0f64.ln())).sqrt());
                self.amplitude_f0 * (-t * t / (two * sigma * sigma)).exp()
            }
            PulseKind::FlatTop => {
                if t.abs() <= self.fwhm_tau_p / lit::<R>(2.0) {
                    self.amplitude_f0
                } else {
                    R::zero()
                }
            }
        }
    }

    pub fn with_amplitude(mut self, f0: R) -> Self {
        self.amplitude_f0 = f0;
        self
    }
}

/// Model parameters for one blockade run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockadeParams<R: Real> {
    /// Detuning in the figure convention Δ = E_L − E_1P (meV); the
    /// Hamiltonian coefficient is Δ' = −Δ.
    pub detuning_delta: R,
    /// Kerr shift U_dd, meV.
    pub u_dd: R,
    /// Polariton linewidth γ_p, meV (decay rate γ_p/ħ).
    pub gamma_p: R,
    pub drive: PulseShape<R>,
    /// Highest retained Fock state N (dimension N+1).
    pub fock_cutoff: usize,
    /// Number of coarse time samples kept for the two-time grid.
    pub coarse_points: usize,
}

pub const DEFAULT_FOCK_CUTOFF: usize = 6;
pub const DEFAULT_COARSE_POINTS: usize = 201;

/// Peak occupation the drive is calibrated to, and the weak-drive flag
/// threshold above which a run is no longer in the g²-independent regime.
pub const TARGET_PEAK_OCCUPATION: f64 = 0.01;
pub const WEAK_DRIVE_LIMIT: f64 = 0.05;

impl<R: Real> BlockadeParams<R> {
    pub fn new(detuning_delta: R, u_dd: R, gamma_p: R) -> Self {
        Self {
            detuning_delta,
            u_dd,
            gamma_p,
            drive: PulseShape::gaussian_for_linewidth(gamma_p),
            fock_cutoff: DEFAULT_FOCK_CUTOFF,
            coarse_points: DEFAULT_COARSE_POINTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fock_cutoff < 4 {
            return Err(Error::Domain("fock_cutoff must be >= 4".into()));
        }
        if self.gamma_p < R::zero() {
            return Err(Error::Domain("gamma_p must be >= 0".into()));
        }
        if self.coarse_points < 3 {
            return Err(Error::Domain("coarse_points must be >= 3".into()));
        }
        self.drive.validate()
    }

    pub(crate) fn liouvillian(&self) -> KerrLiouvillian<R> {
        KerrLiouvillian::new(
            -self.detuning_delta,
            self.u_dd,
            self.gamma_p,
            self.drive,
            self.fock_cutoff,
        )
    }
}

/// Evolution record: density matrices on the coarse time grid.
#[derive(Debug, Clone)]
pub struct BlockadeRun<R: Real> {
    pub times: Vec<R>,
    /// Flattened (N+1)×(N+1) density matrix per coarse time.
    pub rho_trajectory: Vec<Vec<Complex<R>>>,
    /// ⟨a†a⟩ per time.
    pub n_t: Vec<R>,
    pub peak_occupation: R,
    /// False when the peak occupation exceeds the weak-drive limit.
    pub weak_drive_ok: bool,
    pub dim: usize,
}

pub(crate) fn trace<R: Real>(rho: &[Complex<R>], dim: usize) -> Complex<R> {
    (0..dim).map(|k| rho[k * dim + k]).fold(
        Complex::new(R::zero(), R::zero()),
        |acc, x| acc + x,
    )
}

pub(crate) fn occupation<R: Real>(rho: &[Complex<R>], dim: usize) -> R {
    (0..dim)
        .map(|k| rho[k * dim + k].re * R::from_usize(k).unwrap())
        .sum()
}

/// ⟨a†a†aa⟩ = Σ k(k−1)ρ_kk.
pub(crate) fn pair_occupation<R: Real>(rho: &[Complex<R>], dim: usize) -> R {
    (0..dim)
        .map(|k| {
            let kf = R::from_usize(k).unwrap();
            rho[k * dim + k].re * kf * (kf - R::one())
        })
        .sum()
}

/// Conditioned matrix aρa† (one photon removed).
pub(crate) fn conditioned<R: Real>(rho: &[Complex<R>], dim: usize) -> Vec<Complex<R>> {
    let mut out = vec![Complex::new(R::zero(), R::zero()); dim * dim];
    for j in 0..dim - 1 {
        let sj = R::from_usize(j + 1).unwrap().sqrt();
        for k in 0..dim - 1 {
            let sk = R::from_usize(k + 1).unwrap().sqrt();
            out[j * dim + k] = rho[(j + 1) * dim + (k + 1)] * (sj * sk);
        }
    }
    out
}

fn hermiticity_deviation<R: Real>(rho: &[Complex<R>], dim: usize) -> R {
    let mut worst = R::zero();
    for j in 0..dim {
        for k in j..dim {
            let d = rho[j * dim + k] - rho[k * dim + j].conj();
            worst = worst.max(d.norm_sqr().sqrt());
        }
    }
    worst
}

/// Positivity within tolerance: ρ + tol·I must admit a Cholesky factor,
/// which holds iff every eigenvalue of ρ is ≥ −tol.
fn positive_within<R: Real>(rho: &[Complex<R>], dim: usize, tol: R) -> bool {
    let zero = Complex::new(R::zero(), R::zero());
    let mut l = vec![zero; dim * dim];
    for j in 0..dim {
        for k in 0..=j {
            let mut sum = rho[j * dim + k];
            if j == k {
                sum += Complex::new(tol, R::zero());
            }
            for m in 0..k {
                sum -= l[j * dim + m] * l[k * dim + m].conj();
            }
            if j == k {
                if sum.re <= R::zero() {
                    return false;
                }
                l[j * dim + j] = Complex::new(sum.re.sqrt(), R::zero());
            } else {
                l[j * dim + k] = sum / l[k * dim + k];
            }
        }
    }
    true
}

pub(crate) const TRACE_TOL: f64 = 1e-8;
pub(crate) const HERMITICITY_TOL: f64 = 1e-10;
pub(crate) const POSITIVITY_TOL: f64 = 1e-9;
pub(crate) const TRUNCATION_TOL: f64 = 1e-8;

fn check_state<R: Real>(rho: &[Complex<R>], dim: usize, t: R, fock_cutoff: usize) -> Result<()> {
    let tr = trace(rho, dim);
    if (tr.re - R::one()).abs() > lit::<R>(TRACE_TOL) || tr.im.abs() > lit::<R>(TRACE_TOL) {
        return Err(Error::Numerical(format!(
            "trace drifted to {} + {}i at t = {t}",
            tr.re, tr.im
        )));
    }
    let herm = hermiticity_deviation(rho, dim);
    if herm > lit::<R>(HERMITICITY_TOL) {
        return Err(Error::Numerical(format!(
            "hermiticity deviation {herm} at t = {t}"
        )));
    }
    if !positive_within(rho, dim, lit::<R>(POSITIVITY_TOL)) {
        return Err(Error::Numerical(format!(
            "density matrix lost positivity at t = {t}"
        )));
    }
    let top = rho[(dim - 1) * dim + (dim - 1)].re;
    if top >= lit::<R>(TRUNCATION_TOL) {
        return Err(Error::Truncation {
            top_population: top.to_f64().unwrap_or(f64::NAN),
            suggested_cutoff: fock_cutoff + 2,
        });
    }
    Ok(())
}

/// Evolve the vacuum from −T to +T under the pulsed Lindbladian, recording
/// the state on the coarse grid and enforcing the trace/hermiticity/
/// positivity/truncation guards at every kept sample.
pub fn evolve<R: Real>(params: &BlockadeParams<R>) -> Result<BlockadeRun<R>> {
    params.validate()?;
    let liouv = params.liouvillian();
    let dim = liouv.dim;
    let nc = params.coarse_points;
    let t_end = params.drive.window_t;
    let t0 = -t_end;
    let times: Vec<R> = (0..nc)
        .map(|i| {
            t0 + (t_end - t0) * R::from_usize(i).unwrap() / R::from_usize(nc - 1).unwrap()
        })
        .collect();
    let mut rho = vec![Complex::new(R::zero(), R::zero()); dim * dim];
    rho[0] = Complex::new(R::one(), R::zero());
    let mut rho_trajectory = Vec::with_capacity(nc);
    let mut n_t = Vec::with_capacity(nc);
    let rhs = |t: R, y: &[Complex<R>], dy: &mut [Complex<R>]| liouv.rhs(t, y, dy);
    for (i, &t) in times.iter().enumerate() {
        if i > 0 {
            integrate(&rhs, &mut rho, times[i - 1], t)?;
        }
        check_state(&rho, dim, t, params.fock_cutoff)?;
        n_t.push(occupation(&rho, dim));
        rho_trajectory.push(rho.clone());
    }
    let peak = n_t.iter().cloned().fold(R::zero(), R::max);
    Ok(BlockadeRun {
        times,
        rho_trajectory,
        n_t,
        peak_occupation: peak,
        weak_drive_ok: peak <= lit::<R>(WEAK_DRIVE_LIMIT),
        dim,
    })
}

/// Scale the drive amplitude so the evolved peak occupation hits
/// `target_peak` (default 0.01): in the weak-drive regime ⟨n⟩ ∝ F₀², so a
/// single probe run fixes the scale; one refinement pass guards against
/// probe nonlinearity.
pub fn calibrate_drive<R: Real>(
    params: &BlockadeParams<R>,
    target_peak: R,
) -> Result<BlockadeParams<R>> {
    if target_peak <= R::zero() || target_peak > lit::<R>(WEAK_DRIVE_LIMIT) {
        return Err(Error::Domain(format!(
            "target peak occupation must be in (0, {WEAK_DRIVE_LIMIT}]"
        )));
    }
    let mut p = *params;
    for _ in 0..2 {
        let run = evolve(&p)?;
        if run.peak_occupation <= R::zero() {
            return Err(Error::Numerical(
                "probe run produced zero occupation; cannot calibrate drive".into(),
            ));
        }
        let ratio = target_peak / run.peak_occupation;
        if (ratio - R::one()).abs() < lit::<R>(0.01) {
            return Ok(p);
        }
        p.drive = p.drive.with_amplitude(p.drive.amplitude_f0 * ratio.sqrt());
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::hbar;

    #[test]
    fn no_drive_stays_vacuum() {
        let mut p = BlockadeParams::<f64>::new(0.0, 0.0, 0.22);
        p.drive = p.drive.with_amplitude(0.0);
        let run = evolve(&p).unwrap();
        assert!(run.peak_occupation < 1e-14);
        for rho in &run.rho_trajectory {
            assert!((rho[0].re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_state_short_time_occupation() {
        // U=0, γ=0, constant resonant drive: α(t) = −i∫F, ⟨n⟩ = (∫F dt)²
        let f0 = 0.01;
        let mut p = BlockadeParams::<f64>::new(0.0, 0.0, 0.0);
        p.drive = PulseShape::flat_top(8.0, 4.0).with_amplitude(f0);
        let run = evolve(&p).unwrap();
        let t_span = run.times.last().unwrap() - run.times[0];
        let expect = (f0 * t_span).powi(2);
        let got = *run.n_t.last().unwrap();
        assert!((got - expect).abs() / expect < 1e-6, "{got} vs {expect}");
        // and the state is coherent: g²(t,t) = 1
        let rho = run.rho_trajectory.last().unwrap();
        let g2 = pair_occupation(rho, run.dim) / (got * got);
        assert!((g2 - 1.0).abs() < 1e-6, "g2 = {g2}");
    }

    #[test]
    fn free_decay_matches_exponential() {
        // drive a little population in, then let it decay with the drive off
        let gamma = 0.22;
        let mut p = BlockadeParams::<f64>::new(0.0, 0.0, gamma);
        // plateau ends at t=1; window runs to t=25
        p.drive = PulseShape {
            kind: PulseKind::FlatTop,
            amplitude_f0: 0.02,
            fwhm_tau_p: 2.0,
            window_t: 25.0,
        };
        let run = evolve(&p).unwrap();
        let t_off = 1.0;
        let idx = |t: f64| {
            run.times
                .iter()
                .position(|&x| (x - t).abs() < 1e-9)
                .unwrap_or_else(|| panic!("time {t} not on grid"))
        };
        // coarse grid spans [-25, 25] with 201 points -> step 0.25
        let (i0, i1) = (idx(t_off + 2.0), idx(t_off + 12.0));
        let expect = run.n_t[i0] * (-(gamma / hbar::<f64>()) * (run.times[i1] - run.times[i0])).exp();
        assert!(
            (run.n_t[i1] - expect).abs() / expect < 1e-6,
            "{} vs {expect}",
            run.n_t[i1]
        );
    }

    #[test]
    fn truncation_violation_reports_larger_cutoff() {
        let mut p = BlockadeParams::<f64>::new(0.0, 0.0, 0.05);
        p.drive = p.drive.with_amplitude(2.0); // far beyond weak drive
        match evolve(&p) {
            Err(Error::Truncation {
                suggested_cutoff, ..
            }) => assert!(suggested_cutoff > DEFAULT_FOCK_CUTOFF),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn drive_calibration_hits_target() {
        let p = BlockadeParams::<f64>::new(0.0, 0.022, 0.22);
        let cal = calibrate_drive(&p, 0.01).unwrap();
        let run = evolve(&cal).unwrap();
        assert!(
            (run.peak_occupation - 0.01).abs() / 0.01 < 0.02,
            "peak = {}",
            run.peak_occupation
        );
        assert!(run.weak_drive_ok);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = BlockadeParams::<f64>::new(0.0, 0.0, 0.22);
        p.fock_cutoff = 3;
        assert!(evolve(&p).is_err());
        let mut p = BlockadeParams::<f64>::new(0.0, 0.0, 0.22);
        p.drive.window_t = p.drive.fwhm_tau_p; // < 4x fwhm
        assert!(evolve(&p).is_err());
    }
}
