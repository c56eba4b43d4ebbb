//! Unit conventions used throughout the crate: energies in meV, times in ps,
//! lengths in µm. Electric fields are V/µm; a unit charge moved through
//! V [volts] picks up 1000·V meV.

use crate::scalar::{lit, Real};

/// ħ in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.6582119569;

/// Speed of light in µm/ps.
pub const C_UM_PER_PS: f64 = 299.792458;

/// Free-electron rest energy in meV (0.51099895 MeV).
pub const ELECTRON_REST_ENERGY_MEV: f64 = 510_998_950.0;

/// hc in meV·nm, for wavelength↔energy conversion.
pub const HC_MEV_NM: f64 = 1_239_841.9;

/// Fundamental constants in the repo-wide unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<R: Real> {
    /// ħ, meV·ps.
    pub hbar: R,
    /// Speed of light, µm/ps.
    pub c: R,
    /// Free-electron mass, meV·ps²/µm² (m_e c² / c²).
    pub electron_mass: R,
}

impl<R: Real> Default for PhysicalConstants<R> {
    fn default() -> Self {
        let c = lit::<R>(C_UM_PER_PS);
        Self {
            hbar: lit(HBAR_MEV_PS),
            c,
            electron_mass: lit::<R>(ELECTRON_REST_ENERGY_MEV) / (c * c),
        }
    }
}

/// ħ in the working scalar type.
#[inline]
pub fn hbar<R: Real>() -> R {
    lit(HBAR_MEV_PS)
}

/// c in the working scalar type.
#[inline]
pub fn light_speed<R: Real>() -> R {
    lit(C_UM_PER_PS)
}

/// Free-electron mass in meV·ps²/µm².
#[inline]
pub fn electron_mass<R: Real>() -> R {
    lit::<R>(ELECTRON_REST_ENERGY_MEV) / (light_speed::<R>() * light_speed::<R>())
}

/// Photon energy in meV for a vacuum wavelength in nm.
#[inline]
pub fn energy_mev_from_wavelength_nm<R: Real>(lambda_nm: R) -> R {
    lit::<R>(HC_MEV_NM) / lambda_nm
}
