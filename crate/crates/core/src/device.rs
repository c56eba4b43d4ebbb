//! Device geometry and material configuration. Loadable from JSON
//! (see `docs/device-config.md` for the schema); all fields are in the
//! repo-wide units (µm, V).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One layer of the epitaxial stack, bottom to top.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Layer {
    pub material: String,
    pub thickness_um: f64,
    /// Real refractive index at the working wavelength.
    pub refractive_index: f64,
}

/// Device description: layer stack, quantum-well geometry, gate strip,
/// and bias. Root of every pipeline.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct DeviceConfig {
    /// Bottom to top. The first layer is treated as the semi-infinite
    /// bottom clad when building slab problems; air terminates the top.
    pub layer_stack: Vec<Layer>,
    /// Name of the layer present only under the gate strip (removed for the
    /// outside-strip slab problem).
    pub strip_layer: String,
    pub qw_count: u32,
    pub qw_thickness_um: f64,
    pub strip_width_um: f64,
    pub channel_length_um: f64,
    pub voltage_v: f64,
    /// Electrode-to-electrode distance for the voltage→field conversion.
    pub structure_thickness_um: f64,
    /// Working vacuum wavelength for the optical solvers.
    pub wavelength_um: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        // 12 x 20 nm GaAs QWs averaged with the Al0.4Ga0.6As spacers over the
        // 510 nm core: (0.24*3.65 + 0.27*3.30)/0.51
        let n_core_avg = (0.24 * 3.65 + 0.27 * 3.30) / 0.51;
        Self {
            layer_stack: vec![
                Layer {
                    material: "Al0.8Ga0.2As clad".into(),
                    thickness_um: 0.5,
                    refractive_index: 3.10,
                },
                Layer {
                    material: "core (12x GaAs QW in Al0.4Ga0.6As)".into(),
                    thickness_um: 0.51,
                    refractive_index: n_core_avg,
                },
                // Effective optical thickness calibrated so the effective-index
                // lateral mode width matches a full 2D vector solve of the
                // 5 µm strip; the physical ITO film is thicker.
                Layer {
                    material: "ITO".into(),
                    thickness_um: 0.016,
                    refractive_index: 1.9,
                },
            ],
            strip_layer: "ITO".into(),
            qw_count: 12,
            qw_thickness_um: 0.020,
            strip_width_um: 5.0,
            channel_length_um: 200.0,
            voltage_v: 2.5,
            structure_thickness_um: 1.06,
            wavelength_um: 0.81,
        }
    }
}

impl DeviceConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("device config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_stack.is_empty() {
            return Err(Error::Config("layer_stack must be non-empty".into()));
        }
        for l in &self.layer_stack {
            if l.thickness_um <= 0.0 {
                return Err(Error::Config(format!(
                    "layer '{}' has non-positive thickness",
                    l.material
                )));
            }
            if l.refractive_index <= 1.0 {
                return Err(Error::Config(format!(
                    "layer '{}' has refractive index <= 1",
                    l.material
                )));
            }
        }
        if self.qw_thickness_um <= 0.0
            || self.strip_width_um <= 0.0
            || self.channel_length_um <= 0.0
            || self.structure_thickness_um <= 0.0
            || self.wavelength_um <= 0.0
        {
            return Err(Error::Config(
                "geometry fields must be strictly positive".into(),
            ));
        }
        Ok(())
    }

    /// Perpendicular electric field in V/µm from the applied bias.
    pub fn field_v_per_um(&self) -> f64 {
        self.voltage_v / self.structure_thickness_um
    }

    /// Layers of the slab problem under the gate strip (full stack).
    pub fn layers_under_strip(&self) -> Vec<Layer> {
        self.layer_stack.clone()
    }

    /// Layers of the slab problem outside the strip (strip layer removed).
    pub fn layers_outside_strip(&self) -> Vec<Layer> {
        self.layer_stack
            .iter()
            .filter(|l| l.material != self.strip_layer)
            .cloned()
            .collect()
    }
}
