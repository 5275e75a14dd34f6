//! Scenario configuration, presets and config-file loading.
//!
//! A config file is a flat TOML document. Keys not listed in
//! [`ConfigFile`] are rejected. A `preset` fixes the antenna set and the
//! altitude; the EIRP density then follows from the reference table unless
//! the altitude is off-table, in which case it must be given explicitly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::antenna::{ReflectorAntenna, UserAntenna};
use crate::channel::{LinkBudgetParams, PowerBudget};
use crate::geometry::LatticeLayout;
use crate::{Error, Result, SPEED_OF_LIGHT};

pub use crate::beamforming::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AntennaSet {
    /// 2 m reflector, 30 dBi.
    A,
    /// 1 m reflector, 24.1 dBi.
    B,
}

impl AntennaSet {
    pub fn diameter(self) -> f64 {
        match self {
            AntennaSet::A => 2.0,
            AntennaSet::B => 1.0,
        }
    }

    pub fn max_gain_dbi(self) -> f64 {
        match self {
            AntennaSet::A => 30.0,
            AntennaSet::B => 24.1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AntennaSet::A => "a",
            AntennaSet::B => "b",
        }
    }

    /// Reference EIRP density (dBW/MHz) for this set at `altitude_m`, if tabulated.
    pub fn reference_eirp_density(self, altitude_m: f64) -> Option<f64> {
        match (self, altitude_m) {
            (AntennaSet::A, 600e3) => Some(34.0),
            (AntennaSet::B, 600e3) => Some(30.3),
            (AntennaSet::A, 1200e3) => Some(40.0),
            (AntennaSet::B, 1200e3) => Some(35.7),
            _ => None,
        }
    }
}

pub const PRESETS: [&str; 4] = ["set-a-600", "set-b-600", "set-a-1200", "set-b-1200"];

fn parse_preset(name: &str) -> Result<(AntennaSet, f64)> {
    match name {
        "set-a-600" => Ok((AntennaSet::A, 600e3)),
        "set-b-600" => Ok((AntennaSet::B, 600e3)),
        "set-a-1200" => Ok((AntennaSet::A, 1200e3)),
        "set-b-1200" => Ok((AntennaSet::B, 1200e3)),
        other => Err(Error::config(
            "preset",
            format!("unknown preset `{other}`; expected one of {}", PRESETS.join(", ")),
        )),
    }
}

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub frequency_hz: f64,
    pub altitude_m: f64,
    pub antenna_set: AntennaSet,
    pub eirp_density_dbw_mhz: f64,
    pub n_satellites: usize,
    pub normalization: Mode,
    /// Users per km^2.
    pub rho: f64,
    pub iterations: u64,
    pub seed: u64,
    pub carrier_bandwidth_hz: f64,
    pub channel_bandwidth_hz: f64,
    pub polarization_loss_db: f64,
    pub scintillation_loss_db: f64,
    pub shadowing_margin_db: f64,
    pub antenna_temperature_k: f64,
    pub noise_figure_db: f64,
    pub user_gain_dbi: f64,
    pub power_budget: PowerBudget,
    pub lattice: LatticeLayout,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            frequency_hz: 2e9,
            altitude_m: 600e3,
            antenna_set: AntennaSet::A,
            eirp_density_dbw_mhz: 34.0,
            n_satellites: 7,
            normalization: Mode::Mpc,
            rho: 1.0,
            iterations: 500,
            seed: 1,
            carrier_bandwidth_hz: 180e3,
            channel_bandwidth_hz: 30e6,
            polarization_loss_db: 3.0,
            scintillation_loss_db: 2.2,
            shadowing_margin_db: 3.0,
            antenna_temperature_k: 290.0,
            noise_figure_db: 7.0,
            user_gain_dbi: 0.0,
            power_budget: PowerBudget::FullBand,
            lattice: LatticeLayout::Contiguous,
            workers: 0,
            out_dir: PathBuf::from("results"),
        }
    }
}

impl ScenarioConfig {
    pub fn preset(name: &str) -> Result<Self> {
        ConfigFile {
            preset: Some(name.to_string()),
            ..Default::default()
        }
        .resolve()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_m > 0.0 && self.altitude_m.is_finite()) {
            return Err(Error::config("altitude_m", format!("{} must be positive", self.altitude_m)));
        }
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return Err(Error::config("frequency_hz", format!("{} must be positive", self.frequency_hz)));
        }
        if self.iterations == 0 {
            return Err(Error::config("iterations", "must be at least 1"));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::config("rho", format!("{} must be positive", self.rho)));
        }
        if self.n_satellites != 1 && self.n_satellites != 7 {
            return Err(Error::config("n_satellites", "the hexagonal layout supports 1 or 7"));
        }
        // TOML integers are signed 64-bit.
        if i64::try_from(self.seed).is_err() {
            return Err(Error::config("seed", format!("{} exceeds {}", self.seed, i64::MAX)));
        }
        if let Some(table) = self.antenna_set.reference_eirp_density(self.altitude_m) {
            if table != self.eirp_density_dbw_mhz {
                return Err(Error::config(
                    "eirp_density_dbw_mhz",
                    format!(
                        "{} contradicts the reference {table} dBW/MHz for set {} at {} km",
                        self.eirp_density_dbw_mhz,
                        self.antenna_set.as_str(),
                        self.altitude_m / 1e3
                    ),
                ));
            }
        }
        self.link_params().validate()
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn link_params(&self) -> LinkBudgetParams {
        LinkBudgetParams {
            carrier_frequency: self.frequency_hz,
            carrier_bandwidth: self.carrier_bandwidth_hz,
            channel_bandwidth: self.channel_bandwidth_hz,
            polarization_loss_db: self.polarization_loss_db,
            scintillation_loss_db: self.scintillation_loss_db,
            shadowing_margin_db: self.shadowing_margin_db,
            antenna_temperature: self.antenna_temperature_k,
            noise_figure_db: self.noise_figure_db,
            eirp_density: self.eirp_density_dbw_mhz,
            g_t_max_dbi: self.antenna_set.max_gain_dbi(),
        }
    }

    pub fn reflector(&self) -> Result<ReflectorAntenna> {
        ReflectorAntenna::new(
            self.antenna_set.diameter(),
            self.antenna_set.max_gain_dbi(),
            self.wavelength(),
        )
    }

    pub fn user_antenna(&self) -> UserAntenna {
        UserAntenna::new(self.user_gain_dbi)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serialises")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        ConfigFile::from_toml_str(s)?.resolve()
    }
}

/// Raw config document; every key optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub frequency_hz: Option<f64>,
    pub altitude_m: Option<f64>,
    pub antenna_set: Option<AntennaSet>,
    pub eirp_density_dbw_mhz: Option<f64>,
    pub n_satellites: Option<usize>,
    pub normalization: Option<Mode>,
    pub rho: Option<f64>,
    pub iterations: Option<u64>,
    pub seed: Option<u64>,
    pub carrier_bandwidth_hz: Option<f64>,
    pub channel_bandwidth_hz: Option<f64>,
    pub polarization_loss_db: Option<f64>,
    pub scintillation_loss_db: Option<f64>,
    pub shadowing_margin_db: Option<f64>,
    pub antenna_temperature_k: Option<f64>,
    pub noise_figure_db: Option<f64>,
    pub user_gain_dbi: Option<f64>,
    pub power_budget: Option<PowerBudget>,
    pub lattice: Option<LatticeLayout>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

fn toml_error(e: toml::de::Error) -> Error {
    // Surface the offending key when the parser names one.
    let msg = e.message().to_string();
    let key = msg
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<document>".to_string());
    Error::config(key, msg)
}

impl ConfigFile {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(toml_error)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Applies a preset, discarding any set, altitude or EIRP density that
    /// came from the file.
    pub fn override_preset(&mut self, preset: &str) {
        self.preset = Some(preset.to_string());
        self.antenna_set = None;
        self.altitude_m = None;
        self.eirp_density_dbw_mhz = None;
    }

    pub fn resolve(self) -> Result<ScenarioConfig> {
        let d = ScenarioConfig::default();

        let (mut set, mut altitude) = (None, None);
        if let Some(p) = &self.preset {
            let (s, a) = parse_preset(p)?;
            set = Some(s);
            altitude = Some(a);
        }
        if let Some(s) = self.antenna_set {
            if set.is_some_and(|p| p != s) {
                return Err(Error::config("antenna_set", "contradicts the preset"));
            }
            set = Some(s);
        }
        if let Some(a) = self.altitude_m {
            if altitude.is_some_and(|p| p != a) {
                return Err(Error::config("altitude_m", "contradicts the preset"));
            }
            altitude = Some(a);
        }
        let antenna_set = set.unwrap_or(d.antenna_set);
        let altitude_m = altitude.unwrap_or(d.altitude_m);
        if !(altitude_m > 0.0 && altitude_m.is_finite()) {
            return Err(Error::config("altitude_m", format!("{altitude_m} must be positive")));
        }

        let eirp_density_dbw_mhz = match (self.eirp_density_dbw_mhz, antenna_set.reference_eirp_density(altitude_m)) {
            (Some(v), Some(t)) if v != t => {
                return Err(Error::config(
                    "eirp_density_dbw_mhz",
                    format!("{v} contradicts the reference {t} dBW/MHz"),
                ))
            }
            (Some(v), _) => v,
            (None, Some(t)) => t,
            (None, None) => {
                return Err(Error::config(
                    "eirp_density_dbw_mhz",
                    format!("required for altitude {altitude_m} m (no reference value)"),
                ))
            }
        };

        let cfg = ScenarioConfig {
            frequency_hz: self.frequency_hz.unwrap_or(d.frequency_hz),
            altitude_m,
            antenna_set,
            eirp_density_dbw_mhz,
            n_satellites: self.n_satellites.unwrap_or(d.n_satellites),
            normalization: self.normalization.unwrap_or(d.normalization),
            rho: self.rho.unwrap_or(d.rho),
            iterations: self.iterations.unwrap_or(d.iterations),
            seed: self.seed.unwrap_or(d.seed),
            carrier_bandwidth_hz: self.carrier_bandwidth_hz.unwrap_or(d.carrier_bandwidth_hz),
            channel_bandwidth_hz: self.channel_bandwidth_hz.unwrap_or(d.channel_bandwidth_hz),
            polarization_loss_db: self.polarization_loss_db.unwrap_or(d.polarization_loss_db),
            scintillation_loss_db: self.scintillation_loss_db.unwrap_or(d.scintillation_loss_db),
            shadowing_margin_db: self.shadowing_margin_db.unwrap_or(d.shadowing_margin_db),
            antenna_temperature_k: self.antenna_temperature_k.unwrap_or(d.antenna_temperature_k),
            noise_figure_db: self.noise_figure_db.unwrap_or(d.noise_figure_db),
            user_gain_dbi: self.user_gain_dbi.unwrap_or(d.user_gain_dbi),
            power_budget: self.power_budget.unwrap_or(d.power_budget),
            lattice: self.lattice.unwrap_or(d.lattice),
            workers: self.workers.unwrap_or(d.workers),
            out_dir: self.out_dir.unwrap_or(d.out_dir),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reads and resolves a config file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    ConfigFile::load(path)?.resolve()
}
