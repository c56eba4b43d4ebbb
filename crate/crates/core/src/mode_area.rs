//! Polariton pulse mode-area and two-polariton density bookkeeping.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::units::hbar;

/// Mode area A = w·τ_p·v_g and the effective 2-polariton density n = 2/A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeArea<R: Real> {
    /// Lateral mode width, µm.
    pub width_w: R,
    /// Pulse duration τ_p = ħ/γ, ps.
    pub pulse_duration_tau_p: R,
    /// Group velocity, µm/ps.
    pub group_velocity_vg: R,
    /// A = w·τ_p·v_g, µm².
    pub area_a: R,
    /// n = 2/A, µm⁻².
    pub density_n: R,
}

/// Build the mode area from the lateral width, linewidth γ (meV) and group
/// velocity; the pulse length is the linewidth Fourier limit τ_p = ħ/γ.
pub fn mode_area<R: Real>(width_w: R, gamma: R, v_g: R) -> Result<ModeArea<R>> {
    if width_w <= R::zero() || gamma <= R::zero() || v_g <= R::zero() {
        return Err(Error::Domain(
            "mode_area: width, linewidth and group velocity must be > 0".into(),
        ));
    }
    let tau_p = hbar::<R>() / gamma;
    let area = width_w * tau_p * v_g;
    Ok(ModeArea {
        width_w,
        pulse_duration_tau_p: tau_p,
        group_velocity_vg: v_g,
        area_a: area,
        density_n: lit::<R>(2.0) / area,
    })
}

/// Pulse width after convolving the temporal profile with the spatial spot
/// size δ traversed at v_g: √(τ_p² + (δ/v_g)²).
pub fn effective_pulse_width<R: Real>(tau_p: R, spot_size_delta: R, v_g: R) -> Result<R> {
    if tau_p < R::zero() || spot_size_delta < R::zero() || v_g <= R::zero() {
        return Err(Error::Domain(
            "effective_pulse_width: widths must be >= 0 and v_g > 0".into(),
        ));
    }
    let spatial = spot_size_delta / v_g;
    Ok((tau_p * tau_p + spatial * spatial).sqrt())
}
