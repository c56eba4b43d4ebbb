//! Run configuration: JSON document with a required `device` section and
//! defaulted per-pipeline sections, plus dotted-path `--set` overrides.

use dipolariton::device::DeviceConfig;
use dipolariton::hbt::CrossTalk;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub device: DeviceConfig,
    #[serde(default)]
    pub stark: StarkSection,
    #[serde(default)]
    pub dispersion: DispersionSection,
    #[serde(default)]
    pub blockade: BlockadeSection,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub extraction: ExtractionSection,
    #[serde(default)]
    pub hbt: HbtSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            device: DeviceConfig::default(),
            stark: StarkSection::default(),
            dispersion: DispersionSection::default(),
            blockade: BlockadeSection::default(),
            calibration: CalibrationSection::default(),
            extraction: ExtractionSection::default(),
            hbt: HbtSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StarkSection {
    pub field_min_v_per_um: f64,
    pub field_max_v_per_um: f64,
    pub points: usize,
}

impl Default for StarkSection {
    fn default() -> Self {
        Self {
            field_min_v_per_um: 0.0,
            field_max_v_per_um: 3.0,
            points: 31,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DispersionSection {
    /// Bias selects the published coupling parameter set (0 V or 2.5 V);
    /// the nearest of the two is used.
    pub bias_v: f64,
    /// Photon-energy window around the heavy-hole line, meV.
    pub window_mev: f64,
    pub points: usize,
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self {
            bias_v: 2.5,
            window_mev: 15.0,
            points: 2001,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BlockadeSection {
    /// Polariton linewidth γ_p, meV.
    pub gamma_mev: f64,
    pub u_over_gamma: f64,
    /// Detuning sweep bounds in units of γ.
    pub delta_over_gamma_min: f64,
    pub delta_over_gamma_max: f64,
    pub points: usize,
    pub fock_cutoff: usize,
    pub coarse_points: usize,
}

impl Default for BlockadeSection {
    fn default() -> Self {
        Self {
            gamma_mev: 0.215,
            u_over_gamma: 0.1,
            delta_over_gamma_min: -3.5,
            delta_over_gamma_max: 3.5,
            points: 15,
            fock_cutoff: dipolariton::blockade::DEFAULT_FOCK_CUTOFF,
            coarse_points: dipolariton::blockade::DEFAULT_COARSE_POINTS,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationSection {
    pub gammas_mev: Vec<f64>,
    pub u_over_gamma: Vec<f64>,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            gammas_mev: vec![0.120, 0.220],
            u_over_gamma: vec![0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionSection {
    /// Calibration slope and curvature of 1−g²₀,min vs U/γ.
    pub kappa: f64,
    pub b: f64,
    /// Group velocity at the operating point, µm/ps.
    pub v_g_um_per_ps: f64,
    /// Exciton fraction |χ_X|² at the operating point.
    pub chi2: f64,
    pub dipole_d_nm: f64,
    pub c_ex: f64,
}

impl Default for ExtractionSection {
    fn default() -> Self {
        Self {
            kappa: 0.61,
            b: -0.56,
            v_g_um_per_ps: 25.6,
            chi2: 0.68,
            dipole_d_nm: 8.0,
            c_ex: 50.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HbtSection {
    pub n_pulses: u64,
    pub p_click: f64,
    pub g2_target: f64,
    pub jitter_sigma_ps: f64,
    pub rep_period_ps: i64,
    pub crosstalk: Vec<CrossTalk>,
    pub seed: u64,
    pub bin_width_ps: i64,
    pub max_order: i32,
    /// Cross-talk delays masked a priori during analysis.
    pub known_crosstalk_delays_ps: Vec<i64>,
    /// 0 disables the bootstrap cross-check.
    pub bootstrap_replicates: usize,
    pub bootstrap_block_pulses: u64,
}

impl Default for HbtSection {
    fn default() -> Self {
        Self {
            n_pulses: 1_000_000,
            p_click: 0.01,
            g2_target: 1.0,
            jitter_sigma_ps: 300.0,
            rep_period_ps: dipolariton::hbt::DEFAULT_REP_PERIOD_PS,
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
            seed: 1,
            bin_width_ps: dipolariton::hbt::DEFAULT_BIN_WIDTH_PS,
            max_order: 10,
            known_crosstalk_delays_ps: vec![9_500, 114_000],
            bootstrap_replicates: 0,
            bootstrap_block_pulses: 100_000,
        }
    }
}

/// Load the config document (defaults when no file is given), apply the
/// dotted-path overrides, and validate. Returns the typed config plus its
/// canonical JSON value (hashed into the manifest).
pub fn load(
    path: Option<&std::path::Path>,
    sets: &[String],
) -> Result<(RunConfig, serde_json::Value), CliError> {
    let mut value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str::<serde_json::Value>(&text)
                .map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?
        }
        None => serde_json::to_value(RunConfig::default()).expect("default config serializes"),
    };
    for set in sets {
        apply_override(&mut value, set)?;
    }
    let cfg: RunConfig = serde_json::from_value(value.clone())
        .map_err(|e| CliError::Usage(format!("config schema violation: {e}")))?;
    cfg.device
        .validate()
        .map_err(|e| CliError::Usage(format!("config schema violation: {e}")))?;
    // re-canonicalize so defaults participate in the manifest hash
    let canonical = serde_json::to_value(&cfg).expect("config serializes");
    Ok((cfg, canonical))
}

/// Apply one `key.path=value` override. The key must already exist in the
/// document (guards against typos); the value is parsed as JSON, falling
/// back to a plain string.
fn apply_override(root: &mut serde_json::Value, set: &str) -> Result<(), CliError> {
    let (key, raw) = set
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set '{set}' is not of the form key=value")))?;
    let parsed: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut cursor = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        let next = match cursor {
            serde_json::Value::Object(map) => map.get_mut(*part),
            serde_json::Value::Array(arr) => part
                .parse::<usize>()
                .ok()
                .and_then(|idx| arr.get_mut(idx)),
            _ => None,
        };
        match next {
            Some(slot) if last => {
                *slot = parsed;
                return Ok(());
            }
            Some(slot) => cursor = slot,
            None => {
                return Err(CliError::Usage(format!(
                    "unknown config key '{}' in --set '{set}'",
                    parts[..=i].join(".")
                )))
            }
        }
    }
    unreachable!("loop either sets or errors")
}
