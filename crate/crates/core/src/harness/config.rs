//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Lists are comma separated.
//! `tolerances` takes `name:value` pairs naming constants from
//! [`crate::tolerances`] in lower case.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::DEFAULT_PAD_FACTOR;
use crate::tolerances::{FRIEDRICHS_FINAL_OVER_INITIAL, FRIEDRICHS_STEP, REFINEMENT_DRIFT, TREND_VIOLATION};

use super::estimate::EstimateCase;
use super::friedrichs::FriedrichsTolerances;
use super::sweep::SweepOptions;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub refinement_drift: f64,
    pub trend_violation: f64,
    pub friedrichs_step: f64,
    pub friedrichs_final_over_initial: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            refinement_drift: REFINEMENT_DRIFT,
            trend_violation: TREND_VIOLATION,
            friedrichs_step: FRIEDRICHS_STEP,
            friedrichs_final_over_initial: FRIEDRICHS_FINAL_OVER_INITIAL,
        }
    }
}

impl Tolerances {
    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "refinement_drift" => &mut self.refinement_drift,
            "trend_violation" => &mut self.trend_violation,
            "friedrichs_step" => &mut self.friedrichs_step,
            "friedrichs_final_over_initial" => &mut self.friedrichs_final_over_initial,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    /// Sweep resolutions.
    pub n: Vec<usize>,
    pub pad_factor: f64,
    pub seed: u64,
    pub radii: Vec<f64>,
    pub vanishing_order: u32,
    pub poly_degree: u32,
    /// E4 parameters, paired entrywise with `p_list`.
    pub epsilon_list: Vec<f64>,
    pub p_list: Vec<f64>,
    pub tolerances: Tolerances,
    /// Seeded forms per radius for E1-E3.
    pub forms: usize,
    /// Seeded forms per radius for E4.
    pub e4_forms: usize,
    pub friedrichs_fields: usize,
    pub friedrichs_eps: Vec<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            n: vec![32, 48],
            pad_factor: DEFAULT_PAD_FACTOR,
            seed: 1,
            radii: (1..=5).map(|k| 0.5f64.powi(k)).collect(),
            vanishing_order: 2,
            poly_degree: 2,
            epsilon_list: vec![0.25, 0.5, 1.0],
            p_list: vec![3.0, 4.0, 8.0],
            tolerances: Tolerances::default(),
            forms: 100,
            e4_forms: 4,
            friedrichs_fields: 5,
            friedrichs_eps: vec![0.2, 0.1, 0.05, 0.025],
        }
    }
}

fn bad(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| bad(key, format!("cannot parse {value:?}")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| scalar(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(bad(key, "empty list"));
    }
    Ok(items)
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad(line, format!("line {} is not `key = value`", lineno + 1)));
            };
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = list(key, value)?,
            "pad_factor" => self.pad_factor = scalar(key, value)?,
            "seed" => self.seed = scalar(key, value)?,
            "radii" => self.radii = list(key, value)?,
            "vanishing_order" => self.vanishing_order = scalar(key, value)?,
            "poly_degree" => self.poly_degree = scalar(key, value)?,
            "epsilon_list" => self.epsilon_list = list(key, value)?,
            "p_list" => self.p_list = list(key, value)?,
            "forms" => self.forms = scalar(key, value)?,
            "e4_forms" => self.e4_forms = scalar(key, value)?,
            "friedrichs_fields" => self.friedrichs_fields = scalar(key, value)?,
            "friedrichs_eps" => self.friedrichs_eps = list(key, value)?,
            "tolerances" => {
                for pair in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let Some((name, v)) = pair.split_once(':') else {
                        return Err(bad(key, format!("expected name:value, got {pair:?}")));
                    };
                    let name = name.trim().to_ascii_lowercase();
                    let full = format!("tolerances.{name}");
                    let v: f64 = scalar(&full, v)?;
                    let slot = self
                        .tolerances
                        .slot(&name)
                        .ok_or_else(|| bad(&full, "unknown tolerance"))?;
                    *slot = v;
                }
            }
            _ => return Err(bad(key, "unknown key")),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.n.len() < 2 || self.n.iter().any(|&n| n < 8) {
            return Err(bad("n", "need at least two resolutions, each >= 8"));
        }
        if !(self.pad_factor >= 2.0 && self.pad_factor.is_finite()) {
            return Err(bad("pad_factor", "must be >= 2"));
        }
        if self.radii.iter().any(|&r| !(r > 0.0 && r <= 0.5)) {
            return Err(bad("radii", "radii must lie in (0, 0.5]"));
        }
        if self.epsilon_list.len() != self.p_list.len() {
            return Err(bad("p_list", "must pair entrywise with epsilon_list"));
        }
        if self.forms == 0 {
            return Err(bad("forms", "must be positive"));
        }
        for (k, &v) in [
            ("tolerances.refinement_drift", &self.tolerances.refinement_drift),
            ("tolerances.trend_violation", &self.tolerances.trend_violation),
            ("tolerances.friedrichs_step", &self.tolerances.friedrichs_step),
            ("tolerances.friedrichs_final_over_initial", &self.tolerances.friedrichs_final_over_initial),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(bad(k, "must be finite and nonnegative"));
            }
        }
        self.e4_cases().map(drop)
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            pad_factor: self.pad_factor,
            drift: self.tolerances.refinement_drift,
            trend: self.tolerances.trend_violation,
        }
    }

    pub fn friedrichs_tolerances(&self) -> FriedrichsTolerances {
        FriedrichsTolerances {
            step: self.tolerances.friedrichs_step,
            final_over_initial: self.tolerances.friedrichs_final_over_initial,
        }
    }

    /// The configured E4 cases. A pair violating the E4 constraint is a
    /// config error on `p_list`.
    pub fn e4_cases(&self) -> Result<Vec<EstimateCase>> {
        self.epsilon_list
            .iter()
            .zip(&self.p_list)
            .map(|(&e, &p)| {
                EstimateCase::subelliptic(e, p).map_err(|err| bad("p_list", err.to_string()))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let cfg = Config::parse(
            "# small\nn = 16, 24\nseed=9\nradii = 0.5,0.25\ntolerances = refinement_drift:0.3, FRIEDRICHS_STEP : 0.2\n",
        )
        .unwrap();
        assert_eq!(cfg.n, vec![16, 24]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.radii, vec![0.5, 0.25]);
        assert_eq!(cfg.tolerances.refinement_drift, 0.3);
        assert_eq!(cfg.tolerances.friedrichs_step, 0.2);
        assert_eq!(cfg.forms, 100);
    }

    #[test]
    fn errors_name_the_key() {
        let key = |t: &str| match Config::parse(t) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("{other:?}"),
        };
        assert_eq!(key("bogus = 1"), "bogus");
        assert_eq!(key("seed = x"), "seed");
        assert_eq!(key("n = 32"), "n");
        assert_eq!(key("tolerances = nope:1"), "tolerances.nope");
        assert_eq!(key("epsilon_list = 0.5\np_list = 2"), "p_list");
        assert_eq!(key("epsilon_list = 0.5\np_list = 3,4"), "p_list");
    }
}
