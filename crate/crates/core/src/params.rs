//! System constants and the quantities derived from them.
//!
//! Configuration is a flat key/value table (TOML syntax). Every key is
//! required; powers are given in dBm and stored in watts.
//!
//! | key          | unit  | meaning                                  |
//! |--------------|-------|------------------------------------------|
//! | `f_c`        | Hz    | carrier frequency                        |
//! | `c_light`    | m/s   | propagation speed                        |
//! | `p_u_dbm`    | dBm   | UAV transmit power                       |
//! | `p_g_dbm`    | dBm   | ground-user transmit power               |
//! | `noise_dbm`  | dBm   | receiver noise power                     |
//! | `d_0`        | m     | cell radius                              |
//! | `d_sep`      | m     | distance between the two cell centers    |
//! | `n_users`    | -     | users per cell (integer)                 |
//! | `phi_b`      | rad   | antenna half beamwidth, in (0, pi/2)     |
//! | `h_0`        | m     | guard offset added to the low altitude   |
//! | `n_los`      | -     | UAV-ground path-loss exponent            |
//! | `n_nlos`     | -     | ground-ground path-loss exponent         |
//! | `mu_los`     | dB    | UAV-ground shadowing mean                |
//! | `sigma_los`  | dB    | UAV-ground shadowing standard deviation  |
//! | `mu_nlos`    | dB    | ground-ground shadowing mean             |
//! | `sigma_nlos` | dB    | ground-ground shadowing std deviation    |

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use crate::error::{Error, Result};

/// Shipped default parameter file.
pub const DEFAULT_CONFIG: &str = include_str!("../params/default.toml");

/// Every recognised configuration key, in schema order.
pub const KEYS: [&str; 16] = [
    "f_c",
    "c_light",
    "p_u_dbm",
    "p_g_dbm",
    "noise_dbm",
    "d_0",
    "d_sep",
    "n_users",
    "phi_b",
    "h_0",
    "n_los",
    "n_nlos",
    "mu_los",
    "sigma_los",
    "mu_nlos",
    "sigma_nlos",
];

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Unvalidated key/value configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, f64>,
}

impl RawConfig {
    pub fn defaults() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG).expect("shipped default config parses")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::InvalidValue {
            key: "<file>".into(),
            reason: e.message().to_string(),
        })?;
        let mut values = BTreeMap::new();
        for (key, value) in table {
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::UnknownKey(key));
            }
            let v = match value {
                toml::Value::Integer(i) => i as f64,
                toml::Value::Float(f) => f,
                other => {
                    return Err(Error::InvalidValue {
                        key,
                        reason: format!("expected a number, found {}", other.type_str()),
                    })
                }
            };
            values.insert(key, v);
        }
        Ok(Self { values })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Override one key from a `key=value` string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| Error::InvalidValue {
            key: assignment.to_string(),
            reason: "expected key=value".into(),
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::UnknownKey(key.to_string()));
        }
        let parsed: f64 = value.trim().parse().map_err(|_| Error::InvalidValue {
            key: key.to_string(),
            reason: format!("`{}` is not a number", value.trim()),
        })?;
        self.values.insert(key.to_string(), parsed);
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    fn require(&self, key: &str) -> Result<f64> {
        self.get(key).ok_or_else(|| Error::MissingKey(key.to_string()))
    }
}

/// Physical and layout constants. Powers are linear watts.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub f_c: f64,
    pub c_light: f64,
    pub p_u: f64,
    pub p_g: f64,
    pub noise_power: f64,
    pub d_0: f64,
    pub d_sep: f64,
    pub n_users: u32,
    pub phi_b: f64,
    pub h_0: f64,
    pub n_los: f64,
    pub n_nlos: f64,
    pub mu_los: f64,
    pub sigma_los: f64,
    pub mu_nlos: f64,
    pub sigma_nlos: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Antenna gain coefficient, 30000/4 * (pi/180)^2.
    pub g0: f64,
    pub h_low: f64,
    pub h_high: f64,
    /// Minimal ground-user separation, 2 d_0 / N.
    pub d_min: f64,
    /// Free-space wavenumber factor 4 pi f_c / c.
    pub k_freespace: f64,
}

/// Validated parameters together with their derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    params: SystemParams,
    derived: DerivedConstants,
}

fn positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange { field, value, bound: "finite and > 0" })
    }
}

fn finite(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::OutOfRange { field, value, bound: "finite" })
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange { field, value, bound: "finite and >= 0" })
    }
}

impl SystemParams {
    fn validate(&self) -> Result<()> {
        positive("f_c", self.f_c)?;
        positive("c_light", self.c_light)?;
        positive("p_u", self.p_u)?;
        positive("p_g", self.p_g)?;
        positive("noise_power", self.noise_power)?;
        positive("d_0", self.d_0)?;
        positive("d_sep", self.d_sep)?;
        if self.n_users == 0 {
            return Err(Error::OutOfRange { field: "n_users", value: 0.0, bound: ">= 1" });
        }
        if !(self.phi_b > 0.0 && self.phi_b < FRAC_PI_2) {
            return Err(Error::OutOfRange {
                field: "phi_b",
                value: self.phi_b,
                bound: "in the open interval (0, pi/2)",
            });
        }
        non_negative("h_0", self.h_0)?;
        positive("n_los", self.n_los)?;
        positive("n_nlos", self.n_nlos)?;
        finite("mu_los", self.mu_los)?;
        non_negative("sigma_los", self.sigma_los)?;
        finite("mu_nlos", self.mu_nlos)?;
        non_negative("sigma_nlos", self.sigma_nlos)?;
        Ok(())
    }

    pub fn derive(&self) -> DerivedConstants {
        let tan_b = self.phi_b.tan();
        DerivedConstants {
            g0: 30000.0 / 4.0 * (PI / 180.0).powi(2),
            h_low: self.d_0 / tan_b + self.h_0,
            h_high: (self.d_0 + self.d_sep) / tan_b,
            d_min: 2.0 * self.d_0 / f64::from(self.n_users),
            k_freespace: 4.0 * PI * self.f_c / self.c_light,
        }
    }
}

/// Validate a raw configuration and compute the derived constants.
pub fn validate_and_derive(raw: &RawConfig) -> Result<(SystemParams, DerivedConstants)> {
    let n_users = raw.require("n_users")?;
    if n_users.fract() != 0.0 || !(1.0..=f64::from(u32::MAX)).contains(&n_users) {
        return Err(Error::OutOfRange {
            field: "n_users",
            value: n_users,
            bound: "an integer >= 1",
        });
    }
    let p_u_dbm = finite("p_u_dbm", raw.require("p_u_dbm")?)?;
    let p_g_dbm = finite("p_g_dbm", raw.require("p_g_dbm")?)?;
    let noise_dbm = finite("noise_dbm", raw.require("noise_dbm")?)?;
    let params = SystemParams {
        f_c: raw.require("f_c")?,
        c_light: raw.require("c_light")?,
        p_u: dbm_to_watts(p_u_dbm),
        p_g: dbm_to_watts(p_g_dbm),
        noise_power: dbm_to_watts(noise_dbm),
        d_0: raw.require("d_0")?,
        d_sep: raw.require("d_sep")?,
        n_users: n_users as u32,
        phi_b: raw.require("phi_b")?,
        h_0: raw.require("h_0")?,
        n_los: raw.require("n_los")?,
        n_nlos: raw.require("n_nlos")?,
        mu_los: raw.require("mu_los")?,
        sigma_los: raw.require("sigma_los")?,
        mu_nlos: raw.require("mu_nlos")?,
        sigma_nlos: raw.require("sigma_nlos")?,
    };
    let system = System::new(params)?;
    Ok((system.params, system.derived))
}

impl System {
    pub fn new(params: SystemParams) -> Result<Self> {
        params.validate()?;
        let derived = params.derive();
        if derived.h_low >= derived.h_high {
            return Err(Error::GuardViolation {
                low: derived.h_low,
                high: derived.h_high,
            });
        }
        Ok(Self { params, derived })
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let (params, derived) = validate_and_derive(raw)?;
        Ok(Self { params, derived })
    }

    /// The urban 2 GHz reference deployment shipped in `params/default.toml`.
    pub fn defaults() -> Self {
        Self::from_raw(&RawConfig::defaults()).expect("shipped default config is valid")
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn derived(&self) -> &DerivedConstants {
        &self.derived
    }

    pub fn n_users(&self) -> u32 {
        self.params.n_users
    }

    /// Worst-case (lobe edge) serving distance for a UAV at `altitude`.
    pub fn lobe_edge_distance(&self, altitude: f64) -> f64 {
        altitude / self.params.phi_b.cos()
    }
}
