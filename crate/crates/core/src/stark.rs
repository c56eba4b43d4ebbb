//! 1D finite-difference Schrödinger solver for electron and heavy-hole
//! states in a biased quantum well: voltage-dependent Stark red-shift and
//! induced dipole length.

use crate::device::DeviceConfig;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::units::{electron_mass, hbar};

/// Which carrier to solve for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    Electron,
    HeavyHole,
}

/// Discretized well-plus-barriers potential for both carriers.
///
/// The tilt orientation is chosen so the induced dipole d = ⟨z⟩_h − ⟨z⟩_e
/// comes out non-negative: +qFz on the electron, −qFz on the hole.
#[derive(Debug, Clone)]
pub struct QwPotential<R: Real> {
    /// Uniform grid, µm.
    pub grid_z: Vec<R>,
    /// Electron potential, meV.
    pub potential_e: Vec<R>,
    /// Heavy-hole potential, meV.
    pub potential_h: Vec<R>,
    /// Effective masses in units of the free-electron mass.
    pub mass_e: R,
    pub mass_h: R,
}

/// Material/geometry parameters for building [`QwPotential`]s.
#[derive(Debug, Clone, Copy)]
pub struct StarkParams<R: Real> {
    /// Well width, µm.
    pub well_width: R,
    /// Barrier extent on each side, µm.
    pub barrier_width: R,
    /// Conduction / valence band offsets, meV.
    pub offset_e: R,
    pub offset_h: R,
    /// Effective masses, units of m_e.
    pub mass_e: R,
    pub mass_h: R,
    /// Grid spacing, µm.
    pub grid_h: R,
}

impl<R: Real> Default for StarkParams<R> {
    fn default() -> Self {
        // GaAs well / Al0.4Ga0.6As barriers: total offset 1.36·x eV split 65:35.
        let total = lit::<R>(1360.0 * 0.4);
        Self {
            well_width: lit(0.020),
            barrier_width: lit(0.040),
            offset_e: lit::<R>(0.65) * total,
            offset_h: lit::<R>(0.35) * total,
            mass_e: lit(0.067),
            mass_h: lit(0.35),
            grid_h: lit(5.0e-5), // 0.05 nm
        }
    }
}

impl<R: Real> StarkParams<R> {
    pub fn from_device(cfg: &DeviceConfig) -> Self {
        Self {
            well_width: lit(cfg.qw_thickness_um),
            ..Self::default()
        }
    }

    /// Build the biased-well potential at field F (V/µm).
    pub fn potential(&self, field: R) -> QwPotential<R> {
        let half_span = self.well_width / lit::<R>(2.0) + self.barrier_width;
        let n = (lit::<R>(2.0) * half_span / self.grid_h)
            .round()
            .to_usize()
            .unwrap()
            + 1;
        let mut grid_z = Vec::with_capacity(n);
        let mut pe = Vec::with_capacity(n);
        let mut ph = Vec::with_capacity(n);
        let half_well = self.well_width / lit::<R>(2.0);
        // Energy picked up by a unit charge over z µm at F V/µm is 1000·F·z meV.
        let tilt = lit::<R>(1000.0) * field;
        for i in 0..n {
            let z = -half_span + self.grid_h * R::from_usize(i).unwrap();
            grid_z.push(z);
            let in_well = z.abs() <= half_well;
            let (be, bh) = if in_well {
                (R::zero(), R::zero())
            } else {
                (self.offset_e, self.offset_h)
            };
            pe.push(be + tilt * z);
            ph.push(bh - tilt * z);
        }
        QwPotential {
            grid_z,
            potential_e: pe,
            potential_h: ph,
            mass_e: self.mass_e,
            mass_h: self.mass_h,
        }
    }
}

/// Stark scan result at one field point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkResult<R: Real> {
    /// V/µm.
    pub field_f: R,
    /// Red-shift, meV (≤ 0; relative to zero field).
    pub shift_delta_e: R,
    /// Induced dipole length ⟨z⟩_h − ⟨z⟩_e, nm.
    pub dipole_length_d: R,
    /// ∫ψ_e ψ_h dz, dimensionless ∈ [0, 1].
    pub wavefunction_overlap: R,
}

/// Count of eigenvalues of the symmetric tridiagonal matrix below `x`
/// (Sturm sequence / LDLᵀ sign count).
fn sturm_count<R: Real>(diag: &[R], off: &[R], x: R) -> usize {
    let mut count = 0;
    let mut d = diag[0] - x;
    if d < R::zero() {
        count += 1;
    }
    let tiny = R::epsilon() * R::epsilon();
    for i in 1..diag.len() {
        if d.abs() < tiny {
            d = tiny;
        }
        d = diag[i] - x - off[i - 1] * off[i - 1] / d;
        if d < R::zero() {
            count += 1;
        }
    }
    count
}

/// Solve (T − σ)x = b for tridiagonal T via the Thomas algorithm.
fn tridiag_solve<R: Real>(diag: &[R], off: &[R], sigma: R, b: &[R], x: &mut [R]) -> Result<()> {
    let n = diag.len();
    let mut c = vec![R::zero(); n];
    let mut d = vec![R::zero(); n];
    let mut denom = diag[0] - sigma;
    if denom.abs() < R::epsilon() {
        denom = R::epsilon();
    }
    c[0] = off[0] / denom;
    d[0] = b[0] / denom;
    for i in 1..n {
        let mut m = diag[i] - sigma - off[i - 1] * c[i - 1];
        if m.abs() < R::epsilon() {
            m = R::epsilon();
        }
        if i < n - 1 {
            c[i] = off[i] / m;
        }
        d[i] = (b[i] - off[i - 1] * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "tridiagonal solve produced non-finite values".into(),
        ));
    }
    Ok(())
}

/// Lowest eigenpair of a symmetric tridiagonal matrix: Sturm bisection for
/// the eigenvalue, inverse iteration for the vector.
fn ground_eigenpair<R: Real>(diag: &[R], off: &[R]) -> Result<(R, Vec<R>)> {
    let n = diag.len();
    // Gershgorin bracket.
    let mut lo = diag[0];
    let mut hi = diag[0];
    for i in 0..n {
        let r = match (i.checked_sub(1).map(|j| off[j].abs()), off.get(i)) {
            (Some(a), Some(b)) => a + b.abs(),
            (Some(a), None) => a,
            (None, Some(b)) => b.abs(),
            (None, None) => R::zero(),
        };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = (hi - lo).max(R::one());
    let tol = scale * lit::<R>(1e-14);
    let mut a = lo;
    let mut b = hi;
    for _ in 0..200 {
        let mid = (a + b) / lit::<R>(2.0);
        if sturm_count(diag, off, mid) >= 1 {
            b = mid;
        } else {
            a = mid;
        }
        if b - a < tol {
            break;
        }
    }
    let e0 = (a + b) / lit::<R>(2.0);
    // Inverse iteration with a slightly detuned shift.
    let sigma = e0 - scale * lit::<R>(1e-10);
    let mut v = vec![R::one() / R::from_usize(n).unwrap().sqrt(); n];
    let mut w = vec![R::zero(); n];
    for it in 0..50 {
        tridiag_solve(diag, off, sigma, &v, &mut w)
            .map_err(|_| Error::Numerical(format!("inverse iteration failed at step {it}")))?;
        let norm = w.iter().map(|x| *x * *x).sum::<R>().sqrt();
        if norm <= R::zero() || !norm.is_finite() {
            return Err(Error::Numerical(format!(
                "inverse iteration degenerate after {it} iterations"
            )));
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = *wi / norm;
        }
        // Rayleigh-quotient residual check.
        let mut res = R::zero();
        for i in 0..n {
            let mut tv = diag[i] * v[i];
            if i > 0 {
                tv += off[i - 1] * v[i - 1];
            }
            if i < n - 1 {
                tv += off[i] * v[i + 1];
            }
            let d = tv - e0 * v[i];
            res += d * d;
        }
        if res.sqrt() < scale * lit::<R>(1e-10) {
            break;
        }
        if it == 49 {
            return Err(Error::Numerical(
                "inverse iteration did not converge in 50 iterations".into(),
            ));
        }
    }
    // Sign convention: make the peak positive.
    let peak = v
        .iter()
        .cloned()
        .fold(R::zero(), |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if peak < R::zero() {
        for vi in v.iter_mut() {
            *vi = -*vi;
        }
    }
    Ok((e0, v))
}

/// Ground state of −(ħ²/2m)d²/dz² + V(z) on the potential grid with
/// Dirichlet boundaries. Returns (energy meV, L2-normalized wavefunction).
pub fn solve_ground_state<R: Real>(pot: &QwPotential<R>, species: Species) -> Result<(R, Vec<R>)> {
    let (v, mass) = match species {
        Species::Electron => (&pot.potential_e, pot.mass_e),
        Species::HeavyHole => (&pot.potential_h, pot.mass_h),
    };
    let n = pot.grid_z.len();
    if n < 3 {
        return Err(Error::Domain("grid too small".into()));
    }
    let h = pot.grid_z[1] - pot.grid_z[0];
    let t = hbar::<R>() * hbar::<R>() / (lit::<R>(2.0) * mass * electron_mass::<R>() * h * h);
    let diag: Vec<R> = v.iter().map(|&vi| lit::<R>(2.0) * t + vi).collect();
    let off = vec![-t; n - 1];
    let (e0, mut psi) = ground_eigenpair(&diag, &off)?;
    // Normalize on the grid: Σψ²·h = 1.
    let norm = (psi.iter().map(|x| *x * *x).sum::<R>() * h).sqrt();
    for p in psi.iter_mut() {
        *p = *p / norm;
    }
    Ok((e0, psi))
}

fn expectation_z<R: Real>(grid: &[R], psi: &[R]) -> R {
    let h = grid[1] - grid[0];
    grid.iter()
        .zip(psi)
        .map(|(&z, &p)| z * p * p)
        .sum::<R>()
        * h
}

/// Scan the Stark shift and induced dipole length over a list of fields
/// (V/µm). Results are ordered as the input.
pub fn stark_scan<R: Real>(params: &StarkParams<R>, fields: &[R]) -> Result<Vec<StarkResult<R>>> {
    for &f in fields {
        if f < R::zero() || f > lit::<R>(10.0) {
            return Err(Error::Domain(format!(
                "stark_scan: field {f} outside [0, 10] V/µm"
            )));
        }
    }
    let solve_at = |f: R| -> Result<(R, R, R, R)> {
        let pot = params.potential(f);
        let (ee, pe) = solve_ground_state(&pot, Species::Electron)?;
        let (eh, ph) = solve_ground_state(&pot, Species::HeavyHole)?;
        let ze = expectation_z(&pot.grid_z, &pe);
        let zh = expectation_z(&pot.grid_z, &ph);
        let h = pot.grid_z[1] - pot.grid_z[0];
        let overlap = pe.iter().zip(&ph).map(|(&a, &b)| a * b).sum::<R>() * h;
        Ok((ee + eh, zh - ze, overlap.abs().min(R::one()), h))
    };
    let (e_zero, _, _, _) = solve_at(R::zero())?;
    let mut out = Vec::with_capacity(fields.len());
    for &f in fields {
        let (e_sum, d_um, overlap, _) = solve_at(f)?;
        out.push(StarkResult {
            field_f: f,
            shift_delta_e: e_sum - e_zero,
            dipole_length_d: d_um * lit::<R>(1000.0),
            wavefunction_overlap: overlap,
        });
    }
    Ok(out)
}

/// Convenience wrapper taking the device config (defaults elsewhere).
pub fn stark_scan_device(cfg: &DeviceConfig, fields: &[f64]) -> Result<Vec<StarkResult<f64>>> {
    stark_scan(&StarkParams::from_device(cfg), fields)
}
