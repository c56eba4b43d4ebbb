//! From the measured dip depth to physical interaction numbers: U_dd,
//! g_dd, blockade radius, densities, and the full-blockade criterion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mode_area::ModeArea;
use crate::scalar::{lit, Real};

use super::SweepPoint;

/// U_dd from the dip depth via 1−g²₀,min ≈ κ·U_dd/γ, and the areal
/// interaction constant g_dd = U_dd·A/2.
/// Returns (U_dd meV, g_dd meV·µm²).
pub fn extract_interaction<R: Real>(
    g2_min: R,
    gamma: R,
    area: &ModeArea<R>,
    kappa: R,
) -> Result<(R, R)> {
    if kappa <= R::zero() {
        return Err(Error::Domain("kappa must be positive".into()));
    }
    if g2_min <= R::zero() {
        return Err(Error::Domain("g2_min must be positive".into()));
    }
    if g2_min >= R::one() {
        return Err(Error::Domain(
            "no blockade signal: g2_min >= 1".into(),
        ));
    }
    let u_dd = (R::one() - g2_min) * gamma / kappa;
    let g_dd = u_dd * area.area_a / lit::<R>(2.0);
    Ok((u_dd, g_dd))
}

/// Blockade radius R_b = √(2g_dd/(πγ)): the separation at which the
/// pairwise interaction shift equals the linewidth.
pub fn blockade_radius<R: Real>(g_dd: R, gamma: R) -> Result<R> {
    if g_dd <= R::zero() || gamma <= R::zero() {
        return Err(Error::Domain(
            "blockade_radius needs positive g_dd and gamma".into(),
        ));
    }
    Ok((lit::<R>(2.0) * g_dd / (R::PI() * gamma)).sqrt())
}

/// Outcome of the full-blockade criterion w(1−|χ|²)/(d·|χ|⁴) < C_ex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockadeCondition<R: Real> {
    pub lhs: R,
    pub c_ex: R,
    pub verdict: bool,
    /// Margin C_ex − lhs (positive when satisfied).
    pub margin: R,
    /// Exciton fraction solving the equality, found by bisection.
    pub threshold_chi2: R,
}

/// Evaluate the full-blockade condition at exciton fraction chi2 = |χ_X|²
/// for mode width w (µm) and dipole length d (nm); |χ|⁴ = chi2².
pub fn full_blockade_condition<R: Real>(
    w: R,
    d_nm: R,
    chi2: R,
    c_ex: R,
) -> Result<BlockadeCondition<R>> {
    if w <= R::zero() || d_nm <= R::zero() {
        return Err(Error::Domain("w and d must be positive".into()));
    }
    if chi2 <= R::zero() || chi2 >= R::one() {
        return Err(Error::Domain("chi2 must lie strictly inside (0, 1)".into()));
    }
    let d_um = d_nm / lit::<R>(1000.0);
    let lhs_at = |x: R| w * (R::one() - x) / (d_um * x * x);
    let lhs = lhs_at(chi2);
    // lhs is strictly decreasing in x on (0,1): bisect lhs(x) = C_ex
    let mut lo = lit::<R>(1e-6);
    let mut hi = R::one() - lit::<R>(1e-12);
    for _ in 0..200 {
        let mid = (lo + hi) / lit::<R>(2.0);
        if lhs_at(mid) > c_ex {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let threshold = (lo + hi) / lit::<R>(2.0);
    Ok(BlockadeCondition {
        lhs,
        c_ex,
        verdict: lhs < c_ex,
        margin: c_ex - lhs,
        threshold_chi2: threshold,
    })
}

/// Physical inputs for assembling a full extraction report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExtractionInputs<R: Real> {
    /// Lateral mode width, µm.
    pub width_w: R,
    /// Polariton linewidth, meV.
    pub gamma: R,
    /// Group velocity, µm/ps.
    pub v_g: R,
    /// Calibration slope from the quadratic dip-depth fit.
    pub kappa: R,
    /// Quadratic coefficient of the same fit.
    pub b: R,
    /// Induced dipole length, nm.
    pub dipole_d_nm: R,
    /// Exciton fraction |χ_X|² at the operating point.
    pub chi2: R,
    /// Full-blockade constant to compare against.
    pub c_ex: R,
}

/// Everything the extraction pipeline produces for one operating point.
#[derive(Debug, Clone, Serialize)]
pub struct ExtractionReport<R: Real> {
    /// (Δ meV, g²₀) samples of the sweep this report was built from.
    pub g2_curve: Vec<(R, R)>,
    pub g2_min: R,
    pub delta_at_min: R,
    pub g2_max: R,
    pub delta_at_max: R,
    pub kappa: R,
    pub b: R,
    pub u_dd_extracted: R,
    /// meV·µm².
    pub g_dd: R,
    /// µm.
    pub r_b: R,
    /// Effective 2-polariton density, µm⁻².
    pub n: R,
    /// Blockade density γ/g_dd, µm⁻².
    pub n_b: R,
    pub blockade: BlockadeCondition<R>,
}

/// Reduce a detuning sweep plus the physical operating point to the full
/// interaction report.
pub fn build_report<R: Real>(
    curve: &[SweepPoint<R>],
    inputs: &ExtractionInputs<R>,
) -> Result<ExtractionReport<R>> {
    if curve.is_empty() {
        return Err(Error::Statistics("empty g2 curve".into()));
    }
    let min_pt = curve
        .iter()
        .min_by(|a, b| a.g2_0.partial_cmp(&b.g2_0).unwrap())
        .unwrap();
    let max_pt = curve
        .iter()
        .max_by(|a, b| a.g2_0.partial_cmp(&b.g2_0).unwrap())
        .unwrap();
    let area = crate::mode_area::mode_area(inputs.width_w, inputs.gamma, inputs.v_g)?;
    let (u_dd, g_dd) = extract_interaction(min_pt.g2_0, inputs.gamma, &area, inputs.kappa)?;
    let r_b = blockade_radius(g_dd, inputs.gamma)?;
    let blockade = full_blockade_condition(inputs.width_w, inputs.dipole_d_nm, inputs.chi2, inputs.c_ex)?;
    Ok(ExtractionReport {
        g2_curve: curve.iter().map(|p| (p.delta, p.g2_0)).collect(),
        g2_min: min_pt.g2_0,
        delta_at_min: min_pt.delta,
        g2_max: max_pt.g2_0,
        delta_at_max: max_pt.delta,
        kappa: inputs.kappa,
        b: inputs.b,
        u_dd_extracted: u_dd,
        g_dd,
        r_b,
        n: area.density_n,
        n_b: inputs.gamma / g_dd,
        blockade,
    })
}
