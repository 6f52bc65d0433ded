//! Flat TOML run configuration for `simulate`.

use std::path::Path;

use anyhow::{Context, Result};
use fermipair::experiment::{inf_f64, tomography_plan, ExperimentConfig, Target};
use fermipair::DetectorProfile;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    /// `per_setting` seconds at each setting.
    Dwell,
    /// `per_setting` coincidences at each setting.
    Coincidences,
}

/// Every field is required; unknown keys are rejected.
///
/// ```toml
/// n_trapped = 100000
/// hole_ratio = 1e-5
/// collision_rate = 50.0
/// efficiency = 0.2
/// tau = 1e-4
/// duration = 3600.0
/// pair_separation_x = 0.0
/// sigma = 0.0
/// true_pair_fraction = 0.5
/// plan = "dwell"
/// per_setting = 400.0
/// eta1 = [1.0, 1.0]
/// eta2 = [1.0, 1.0]
/// seed = 0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_trapped: u64,
    pub hole_ratio: f64,
    pub collision_rate: f64,
    pub efficiency: f64,
    pub tau: f64,
    /// Seconds; `inf` runs until the plan completes or the vessel is empty.
    #[serde(with = "inf_f64")]
    pub duration: f64,
    pub pair_separation_x: f64,
    /// Gaussian detector width; 0 for point-like detectors.
    pub sigma: f64,
    pub true_pair_fraction: f64,
    pub plan: PlanKind,
    #[serde(with = "inf_f64")]
    pub per_setting: f64,
    /// Detection efficiencies of the `+` and `−` ports.
    pub eta1: [f64; 2],
    pub eta2: [f64; 2],
    pub seed: u64,
}

impl SimConfig {
    /// The vessel of the proposed experiment, one hour over nine settings.
    pub fn reference() -> Self {
        let p = ExperimentConfig::reference_vessel();
        Self {
            n_trapped: p.n_trapped,
            hole_ratio: p.hole_ratio,
            collision_rate: p.collision_rate,
            efficiency: p.efficiency,
            tau: p.tau,
            duration: p.duration,
            pair_separation_x: p.pair_separation_x,
            sigma: 0.0,
            true_pair_fraction: p.true_pair_fraction,
            plan: PlanKind::Dwell,
            per_setting: p.duration / 9.0,
            eta1: [1.0; 2],
            eta2: [1.0; 2],
            seed: p.seed,
        }
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("config {}", path.display()))
    }

    pub fn to_experiment(&self) -> fermipair::Result<ExperimentConfig> {
        let target = match self.plan {
            PlanKind::Dwell => Target::DwellS(self.per_setting),
            PlanKind::Coincidences => {
                let n = self.per_setting;
                if !(n.is_finite() && n >= 1.0 && n.fract() == 0.0) {
                    return Err(fermipair::Error::InvalidConfig(format!(
                        "per_setting must be a positive whole number of coincidences, got {n}"
                    )));
                }
                Target::Coincidences(n as u64)
            }
        };
        let cfg = ExperimentConfig {
            n_trapped: self.n_trapped,
            hole_ratio: self.hole_ratio,
            collision_rate: self.collision_rate,
            efficiency: self.efficiency,
            tau: self.tau,
            duration: self.duration,
            pair_separation_x: self.pair_separation_x,
            profile: DetectorProfile::from_sigma(self.sigma)?,
            true_pair_fraction: self.true_pair_fraction,
            settings_plan: tomography_plan(target, self.eta1, self.eta2)?,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_round_trips_through_toml() {
        let c = SimConfig::reference();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<SimConfig>(&text).unwrap(), c);
        c.to_experiment().unwrap();
    }

    #[test]
    fn missing_field_is_named() {
        let mut text = toml::to_string(&SimConfig::reference()).unwrap();
        text = text
            .lines()
            .filter(|l| !l.starts_with("tau"))
            .collect::<Vec<_>>()
            .join("\n");
        let err = toml::from_str::<SimConfig>(&text).unwrap_err().to_string();
        assert!(err.contains("tau"), "{err}");
    }

    #[test]
    fn infinite_duration_accepted() {
        let text = toml::to_string(&SimConfig::reference())
            .unwrap()
            .replace("duration = 3600.0", "duration = inf");
        let c: SimConfig = toml::from_str(&text).unwrap();
        assert!(c.duration.is_infinite());
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"duration\":\"inf\""));
    }

    #[test]
    fn fractional_coincidence_target_rejected() {
        let c = SimConfig {
            plan: PlanKind::Coincidences,
            per_setting: 2.5,
            ..SimConfig::reference()
        };
        assert!(c.to_experiment().is_err());
    }
}
