//! Flat `key = value` parameters from a config file and `--set` overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::CliError;

/// Parameters of one run. Every key read is recorded so that unknown or
/// misspelled keys can be rejected once the command has taken what it needs.
#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyUnit {
    MicroEv,
    ElectronVolt,
}

impl Params {
    pub fn from_config_text(text: &str) -> Result<Self, CliError> {
        let mut p = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "line {}: expected `key = value`, got `{}`",
                    n + 1,
                    raw.trim()
                ))
            })?;
            p.insert(k, v)?;
        }
        Ok(p)
    }

    pub fn from_config_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_config_text(&text)
    }

    fn insert(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Config("empty parameter name".into()));
        }
        self.values
            .insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| {
            CliError::Config(format!("--set expects key=value, got `{assignment}`"))
        })?;
        self.insert(k, v)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&mut self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn invalid(key: &str, value: &str, reason: impl Into<String>) -> CliError {
        CliError::Config(format!("parameter `{key}` = `{value}`: {}", reason.into()))
    }

    pub fn number(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Self::invalid(key, &v, "not a finite number"))
            })
            .transpose()
    }

    pub fn require_number(&mut self, key: &str) -> Result<f64, CliError> {
        self.number(key)?.ok_or_else(|| CliError::missing(key))
    }

    /// Non-negative integer; accepts scientific notation such as `1e5`.
    pub fn count(&mut self, key: &str) -> Result<Option<u64>, CliError> {
        self.raw(key)
            .map(|v| {
                let x: f64 = v
                    .parse()
                    .map_err(|_| Self::invalid(key, &v, "not a number"))?;
                if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) {
                    Ok(x as u64)
                } else {
                    Err(Self::invalid(key, &v, "not a non-negative integer"))
                }
            })
            .transpose()
    }

    /// Energy normalized to μeV. Accepts the suffixes `uev`, `μev`, `mev`,
    /// `ev`, `ghz` and `mhz`; a bare number is in `default_unit`.
    pub fn energy(&mut self, key: &str, default_unit: EnergyUnit) -> Result<Option<f64>, CliError> {
        self.raw(key)
            .map(|v| {
                parse_energy(&v, default_unit).map_err(|reason| Self::invalid(key, &v, reason))
            })
            .transpose()
    }

    pub fn require_energy(&mut self, key: &str, default_unit: EnergyUnit) -> Result<f64, CliError> {
        self.energy(key, default_unit)?
            .ok_or_else(|| CliError::missing(key))
    }

    pub fn choice<'a>(
        &mut self,
        key: &str,
        options: &[&'a str],
        default: &'a str,
    ) -> Result<&'a str, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => options.iter().find(|o| **o == v).copied().ok_or_else(|| {
                Self::invalid(key, &v, format!("expected one of {}", options.join(", ")))
            }),
        }
    }

    /// Rejects any key no command read.
    pub fn finish(&self) -> Result<(), CliError> {
        let unknown: Vec<&str> = self
            .values
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "unknown parameter(s) for this command: {}",
                unknown.join(", ")
            )))
        }
    }
}

pub fn parse_energy(text: &str, default_unit: EnergyUnit) -> Result<f64, String> {
    use rescat_core::design::PLANCK_UEV_PER_GHZ;
    // longest suffixes first so that `mev` is not read as `ev`
    const UNITS: [(&str, f64); 6] = [
        ("uev", 1.0),
        ("μev", 1.0),
        ("mev", 1e3),
        ("ghz", PLANCK_UEV_PER_GHZ),
        ("mhz", PLANCK_UEV_PER_GHZ * 1e-3),
        ("ev", 1e6),
    ];
    let t = text.trim().to_lowercase();
    let (num, scale) = UNITS
        .iter()
        .find_map(|(suffix, scale)| t.strip_suffix(suffix).map(|n| (n, *scale)))
        .unwrap_or(match default_unit {
            EnergyUnit::MicroEv => (t.as_str(), 1.0),
            EnergyUnit::ElectronVolt => (t.as_str(), 1e6),
        });
    let x: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number with a known energy unit", text.trim()))?;
    if !x.is_finite() {
        return Err("not finite".into());
    }
    Ok(x * scale)
}
