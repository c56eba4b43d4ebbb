//! Two-time photon correlations by quantum regression, the pulse-
//! integrated g²₀, detuning sweeps and the κ/b calibration fit.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::quadratic_through_origin;
use crate::scalar::{lit, Real};

use super::lindblad::integrate;
use super::{
    calibrate_drive, conditioned, evolve, occupation, pair_occupation, BlockadeParams,
    BlockadeRun, TARGET_PEAK_OCCUPATION,
};

/// Two-time correlation G²(t₁,t₂) = ⟨a†(t₁)a†(t₂)a(t₂)a(t₁)⟩ sampled on
/// the coarse grid, completed symmetrically.
#[derive(Debug, Clone)]
pub struct G2Grid<R: Real> {
    pub times: Vec<R>,
    /// Row i, column j: G²(times[i], times[j]).
    pub values: Vec<Vec<R>>,
}

/// Quantum regression: propagate the conditioned matrix aρ(t′)a† under the
/// same Lindbladian and read off the occupation at each later time.
pub fn two_time_g2<R: Real>(run: &BlockadeRun<R>, params: &BlockadeParams<R>) -> Result<G2Grid<R>> {
    params.validate()?;
    let liouv = params.liouvillian();
    let dim = run.dim;
    let nc = run.times.len();
    let rows: Result<Vec<Vec<R>>> = (0..nc)
        .into_par_iter()
        .map(|i| {
            let rhs = |t: R, y: &[num_complex::Complex<R>], dy: &mut [num_complex::Complex<R>]| {
                liouv.rhs(t, y, dy)
            };
            let mut chi = conditioned(&run.rho_trajectory[i], dim);
            let mut row = vec![R::zero(); nc];
            row[i] = occupation(&chi, dim);
            for j in i + 1..nc {
                integrate(&rhs, &mut chi, run.times[j - 1], run.times[j])?;
                row[j] = occupation(&chi, dim);
            }
            Ok(row)
        })
        .collect();
    let rows = rows?;
    // symmetric completion: G²(t,t') = G²(t',t)
    let mut values = rows;
    for i in 0..nc {
        for j in 0..i {
            values[i][j] = values[j][i];
        }
    }
    Ok(G2Grid {
        times: run.times.clone(),
        values,
    })
}

/// Pulse-integrated correlation g²₀ = 2∬_{t₁<t₂} G² dt₁dt₂ / (∫N dt)²,
/// trapezoid quadrature on the coarse grid (the diagonal enters with
/// boundary weight in the inner integral).
pub fn pulse_integrated_g2<R: Real>(run: &BlockadeRun<R>, grid: &G2Grid<R>) -> Result<R> {
    let nc = grid.times.len();
    if nc < 3 || run.n_t.len() != nc {
        return Err(Error::Domain("g2 grid and run are inconsistent".into()));
    }
    let dt = grid.times[1] - grid.times[0];
    let half = lit::<R>(0.5);
    let mut num = R::zero();
    for i in 0..nc {
        // inner trapezoid over t₂ from t₁ to T
        let row = &grid.values[i][i..];
        let mut inner = R::zero();
        for (j, &v) in row.iter().enumerate() {
            let w = if j == 0 || j == row.len() - 1 { half } else { R::one() };
            inner += w * v;
        }
        inner = inner * dt;
        let wi = if i == 0 || i == nc - 1 { half } else { R::one() };
        num += wi * dt * inner;
    }
    let mut den = R::zero();
    for (i, &n) in run.n_t.iter().enumerate() {
        let w = if i == 0 || i == nc - 1 { half } else { R::one() };
        den += w * n;
    }
    den = den * dt;
    if den <= R::zero() {
        return Err(Error::Domain(
            "undefined correlation: zero integrated occupation".into(),
        ));
    }
    Ok(lit::<R>(2.0) * num / (den * den))
}

/// Calibrated single-point evaluation: scale the drive to the target peak
/// occupation, evolve, and integrate.
pub fn pulse_g2<R: Real>(params: &BlockadeParams<R>) -> Result<R> {
    let cal = calibrate_drive(params, lit(TARGET_PEAK_OCCUPATION))?;
    let run = evolve(&cal)?;
    let grid = two_time_g2(&run, &cal)?;
    pulse_integrated_g2(&run, &grid)
}

/// Equal-time normalized correlation g²(t,t) = ⟨a†a†aa⟩/⟨a†a⟩² along a
/// run; the late-time value of a long flat-top run is the CW g²(0).
pub fn equal_time_g2<R: Real>(run: &BlockadeRun<R>) -> Vec<(R, R)> {
    run.times
        .iter()
        .zip(run.rho_trajectory.iter().zip(&run.n_t))
        .filter(|(_, (_, &n))| n > R::zero())
        .map(|(&t, (rho, &n))| (t, pair_occupation(rho, run.dim) / (n * n)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint<R: Real> {
    /// Figure-convention detuning Δ = E_L − E_1P, meV.
    pub delta: R,
    pub g2_0: R,
}

/// g²₀ per detuning, drive recalibrated at every point; points run
/// concurrently and are returned in input order.
pub fn detuning_sweep<R: Real>(
    base: &BlockadeParams<R>,
    deltas: &[R],
) -> Result<Vec<SweepPoint<R>>> {
    for w in deltas.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Domain("deltas must be sorted ascending".into()));
        }
    }
    deltas
        .par_iter()
        .map(|&delta| {
            let mut p = *base;
            p.detuning_delta = delta;
            Ok(SweepPoint {
                delta,
                g2_0: pulse_g2(&p)?,
            })
        })
        .collect()
}

/// Locate the g²₀ minimum over Δ < 0: coarse scan of Δ/γ ∈ [−3.5, −0.5]
/// on a reduced two-time grid, parabolic refinement of the bracket, then
/// one full-resolution evaluation. Returns (Δ_min, g²₀_min).
pub fn find_g2_minimum<R: Real>(base: &BlockadeParams<R>) -> Result<(R, R)> {
    let gamma = base.gamma_p;
    if gamma <= R::zero() {
        return Err(Error::Domain("dip search needs gamma_p > 0".into()));
    }
    let nscan = 13;
    let lo = lit::<R>(-3.5) * gamma;
    let hi = lit::<R>(-0.5) * gamma;
    let scan: Vec<R> = (0..nscan)
        .map(|i| lo + (hi - lo) * R::from_usize(i).unwrap() / R::from_usize(nscan - 1).unwrap())
        .collect();
    let mut coarse = *base;
    coarse.coarse_points = 101;
    let pts = detuning_sweep(&coarse, &scan)?;
    let imin = pts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.g2_0.partial_cmp(&b.1.g2_0).unwrap())
        .unwrap()
        .0;
    let delta_star = if imin == 0 || imin == nscan - 1 {
        pts[imin].delta
    } else {
        // parabola through the bracketing triple
        let (x0, x1, x2) = (pts[imin - 1].delta, pts[imin].delta, pts[imin + 1].delta);
        let (y0, y1, y2) = (pts[imin - 1].g2_0, pts[imin].g2_0, pts[imin + 1].g2_0);
        let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        if a <= R::zero() {
            x1
        } else {
            let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
            let vertex = -b / (lit::<R>(2.0) * a);
            vertex.max(x0).min(x2)
        }
    };
    let mut p = *base;
    p.detuning_delta = delta_star;
    let g2 = pulse_g2(&p)?;
    Ok((delta_star, g2))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CalibrationResult<R: Real> {
    pub kappa: R,
    pub b: R,
    pub rms_residual: R,
    /// κ fitted per linewidth, for the γ-independence check.
    pub per_gamma: Vec<(R, R)>,
    /// (γ meV, U/γ, g²₀,min, Δ at the minimum).
    pub points: Vec<(R, R, R, R)>,
}

/// Sweep U/γ for each linewidth, locate the dip depth 1−g²₀,min, and fit
/// 1−g²₀,min = κ(U/γ) + b(U/γ)².
pub fn calibrate_kappa<R: Real>(
    gamma_list: &[R],
    u_over_gamma_grid: &[R],
) -> Result<CalibrationResult<R>> {
    if gamma_list.is_empty() || u_over_gamma_grid.len() < 2 {
        return Err(Error::Domain(
            "calibration needs >= 1 linewidth and >= 2 U/gamma points".into(),
        ));
    }
    for &u in u_over_gamma_grid {
        if u < lit::<R>(0.01) || u > lit::<R>(0.5) {
            return Err(Error::Domain(format!(
                "U/gamma {u} outside the calibrated window [0.01, 0.5]"
            )));
        }
    }
    let jobs: Vec<(R, R)> = gamma_list
        .iter()
        .flat_map(|&g| u_over_gamma_grid.iter().map(move |&u| (g, u)))
        .collect();
    let points: Result<Vec<(R, R, R, R)>> = jobs
        .par_iter()
        .map(|&(gamma, uog)| {
            let base = BlockadeParams::new(R::zero(), uog * gamma, gamma);
            let (delta_min, g2_min) = find_g2_minimum(&base)?;
            Ok((gamma, uog, g2_min, delta_min))
        })
        .collect();
    let points = points?;
    let xs: Vec<R> = points.iter().map(|p| p.1).collect();
    let ys: Vec<R> = points.iter().map(|p| R::one() - p.2).collect();
    let (kappa, b, rms) = quadratic_through_origin(&xs, &ys)?;
    let mut per_gamma = Vec::with_capacity(gamma_list.len());
    for &g in gamma_list {
        let gxs: Vec<R> = points.iter().filter(|p| p.0 == g).map(|p| p.1).collect();
        let gys: Vec<R> = points
            .iter()
            .filter(|p| p.0 == g)
            .map(|p| R::one() - p.2)
            .collect();
        if gxs.len() >= 2 {
            let (kg, _, _) = quadratic_through_origin(&gxs, &gys)?;
            per_gamma.push((g, kg));
        }
    }
    Ok(CalibrationResult {
        kappa,
        b,
        rms_residual: rms,
        per_gamma,
        points,
    })
}
