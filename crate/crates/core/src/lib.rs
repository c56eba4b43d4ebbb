//! Numerical laboratory for dipolar waveguide polaritons: quantum-well
//! Stark physics, guided-mode optics, coupled-oscillator dispersion, a
//! driven-dissipative photon-blockade simulator, and photon-correlation
//! statistics.
//!
//! All physics kernels are generic over the scalar type through [`Real`]
//! (f32 or f64); concrete f64 aliases are exported at the crate root.
//! Units repo-wide: energies in meV, times in ps, lengths in µm
//! (ħ = 0.6582119569 meV·ps).

pub mod blockade;
pub mod device;
pub mod dispersion;
pub mod error;
pub mod fit;
pub mod hbt;
pub mod mode_area;
pub mod scalar;
pub mod stark;
pub mod units;
pub mod waveguide;

pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete f64 working types.
pub type DeviceConfig = device::DeviceConfig;
pub type StarkParams = stark::StarkParams<f64>;
pub type StarkResult = stark::StarkResult<f64>;
pub type SlabStack = waveguide::SlabStack<f64>;
pub type GuidedMode = waveguide::GuidedMode<f64>;
pub type CouplingParams = dispersion::CouplingParams<f64>;
pub type PolaritonBranch = dispersion::PolaritonBranch<f64>;
pub type ModeArea = mode_area::ModeArea<f64>;
pub type BlockadeParams = blockade::BlockadeParams<f64>;
pub type PulseShape = blockade::PulseShape<f64>;
pub type BlockadeRun = blockade::BlockadeRun<f64>;
pub type ExtractionReport = blockade::ExtractionReport<f64>;
pub type CalibrationResult = blockade::CalibrationResult<f64>;
