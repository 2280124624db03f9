use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{default_psi, Kappa};
use crate::learners::OppsConfig;
use crate::mpp::{judge_prosecutor_mpp, Feedback, MppSpec};
use crate::obp::{judge_prosecutor, Adversary, ObpGame, ResponseModel};
use crate::obp_bandit::{default_axes, ExpertGrid, Geometry};
use crate::obp_full::MetaConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ObpFull,
    ObpBandit,
    MppFull,
    MppPartial,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::ObpFull => "obp_full",
            Family::ObpBandit => "obp_bandit",
            Family::MppFull => "mpp_full",
            Family::MppPartial => "mpp_partial",
        }
    }

    pub fn is_mpp(self) -> bool {
        matches!(self, Family::MppFull | Family::MppPartial)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "obp_full" => Ok(Family::ObpFull),
            "obp_bandit" => Ok(Family::ObpBandit),
            "mpp_full" => Ok(Family::MppFull),
            "mpp_partial" => Ok(Family::MppPartial),
            other => Err(Error::config("family", format!("unknown family `{other}`"))),
        }
    }
}

/// Settings of the two OBP families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObpSettings {
    pub tau1: f64,
    pub grid_step: f64,
    pub response_model: ResponseModel,
    pub adversary: Adversary,
    /// Step-size interval of the full-feedback meta arm.
    pub eta_interval: [f64; 2],
    /// Fixed step of the full-feedback baseline; the interval midpoint when absent.
    pub baseline_eta: Option<f64>,
    pub geometry: Geometry,
    pub eta_grid: Option<Vec<f64>>,
    pub b_grid: Option<Vec<f64>>,
    /// Experts learning rate; `1/√T` when absent.
    pub expert_rate: Option<f64>,
}

impl Default for ObpSettings {
    fn default() -> Self {
        Self {
            tau1: 0.05,
            grid_step: 0.25,
            response_model: ResponseModel::Obedient,
            adversary: Adversary::Uniform,
            eta_interval: [0.05, 0.25],
            baseline_eta: None,
            geometry: Geometry::Polytope,
            eta_grid: None,
            b_grid: None,
            expert_rate: None,
        }
    }
}

/// Settings of the two MPP families. Absent values take their derived defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MppSettings {
    pub kappa: Option<Kappa>,
    pub delta: f64,
    pub psi: Option<f64>,
    pub alpha: f64,
    pub refresh_every: usize,
    pub radius_scale: f64,
}

impl Default for MppSettings {
    fn default() -> Self {
        Self {
            kappa: None,
            delta: 0.1,
            psi: None,
            alpha: 0.5,
            refresh_every: 1,
            radius_scale: 1.0,
        }
    }
}

/// One experiment as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    /// Game (OBP) or MPP specification file, relative to the config file.
    /// The built-in judge–prosecutor instance is used when absent.
    #[serde(default)]
    pub environment: Option<PathBuf>,
    pub tasks: usize,
    /// Rounds (OBP) or episodes (MPP) per task.
    pub rounds: usize,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub obp: ObpSettings,
    #[serde(default)]
    pub mpp: MppSettings,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// The loaded environment of a validated configuration.
#[derive(Debug, Clone)]
pub enum Environment {
    Obp(ObpGame),
    Mpp(MppSpec),
}

impl ExperimentConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text)?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &dir)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Output directory, resolved against the config file's directory.
    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output)
    }

    pub fn environment(&self) -> Result<Environment> {
        let text = match &self.environment {
            None => None,
            Some(p) => {
                let path = self.resolve(p);
                Some(std::fs::read_to_string(&path).map_err(|e| {
                    Error::config("environment", format!("cannot read {}: {e}", path.display()))
                })?)
            }
        };
        let field = |e: serde_json::Error| Error::config("environment", e.to_string());
        if self.family.is_mpp() {
            let spec = match text {
                None => judge_prosecutor_mpp(),
                Some(t) => serde_json::from_str(&t).map_err(field)?,
            };
            spec.validate()?;
            Ok(Environment::Mpp(spec))
        } else {
            let game = match text {
                None => judge_prosecutor(),
                Some(t) => serde_json::from_str(&t).map_err(field)?,
            };
            game.validate()?;
            if game.types() != 2 && self.family == Family::ObpBandit {
                return Err(Error::config("environment", "bandit feedback supports two receiver types only"));
            }
            Ok(Environment::Obp(game))
        }
    }

    /// Checks every field and the environment file; returns the environment.
    pub fn validate(&self) -> Result<Environment> {
        if self.tasks == 0 {
            return Err(Error::config("tasks", "must be at least 1"));
        }
        if self.rounds == 0 {
            return Err(Error::config("rounds", "must be at least 1"));
        }
        if self.replications == 0 {
            return Err(Error::config("replications", "must be at least 1"));
        }
        let env = self.environment()?;
        match (&env, self.family) {
            (Environment::Obp(_), Family::ObpFull) => {
                self.meta_constants()?;
                let eta = self.baseline_eta();
                if !(eta > 0.0 && eta.is_finite()) {
                    return Err(Error::config("obp.baseline_eta", format!("{eta} must be positive")));
                }
                self.obp_common()?;
            }
            (Environment::Obp(g), Family::ObpBandit) => {
                self.expert_grid(g.types())?;
                self.obp_common()?;
            }
            (Environment::Mpp(spec), _) => {
                self.opps(spec)?.validate()?;
            }
            _ => unreachable!("environment kind follows the family"),
        }
        Ok(env)
    }

    fn obp_common(&self) -> Result<()> {
        let o = &self.obp;
        if !(0.0..1.0).contains(&o.tau1) {
            return Err(Error::config("obp.tau1", format!("{} is not in [0, 1)", o.tau1)));
        }
        crate::obp::grid_cells(o.grid_step).map_err(|e| Error::config("obp.grid_step", e.to_string()))?;
        Ok(())
    }

    pub fn meta_constants(&self) -> Result<MetaConstants> {
        let [lo, hi] = self.obp.eta_interval;
        MetaConstants::from_interval(lo, hi, self.rounds).map_err(|e| match e {
            Error::Config { reason, .. } => Error::config("obp.eta_interval", reason),
            other => other,
        })
    }

    pub fn baseline_eta(&self) -> f64 {
        let [lo, hi] = self.obp.eta_interval;
        self.obp.baseline_eta.unwrap_or(0.5 * (lo + hi))
    }

    pub fn expert_grid(&self, k: usize) -> Result<ExpertGrid> {
        let (etas, bs) = default_axes(k, self.rounds);
        let etas = self.obp.eta_grid.clone().unwrap_or(etas);
        let bs = self.obp.b_grid.clone().unwrap_or(bs);
        if let Some(e) = etas.iter().find(|&&e| !(e > 0.0 && e * k as f64 <= 0.25 + 1e-12)) {
            return Err(Error::config("obp.eta_grid", format!("{e} violates 0 < ηK ≤ 1/4")));
        }
        let rate = self.obp.expert_rate.unwrap_or(1.0 / (self.tasks as f64).sqrt());
        ExpertGrid::new(&etas, &bs, rate).map_err(|e| match e {
            Error::Config { field, reason } => Error::config(format!("obp.{field}"), reason),
            other => other,
        })
    }

    /// Baseline step of the bandit family: the middle value of the η grid.
    pub fn bandit_baseline_eta(&self, k: usize) -> Result<f64> {
        let grid = self.obp.eta_grid.clone().unwrap_or_else(|| default_axes(k, self.rounds).0);
        let mut sorted = grid;
        sorted.sort_by(f64::total_cmp);
        Ok(sorted[sorted.len() / 2])
    }

    pub fn opps(&self, spec: &MppSpec) -> Result<OppsConfig> {
        let m = &self.mpp;
        let kappa = match m.kappa {
            Some(k) => k,
            None => Kappa::from_widths(spec.tau2, spec.tau3).map_err(|e| match e {
                Error::Config { reason, .. } => Error::config("mpp.kappa", reason),
                other => other,
            })?,
        };
        let cfg = OppsConfig {
            feedback: if self.family == Family::MppFull {
                Feedback::Full
            } else {
                Feedback::Partial
            },
            kappa,
            delta: m.delta,
            psi: m.psi.unwrap_or_else(|| default_psi(spec)),
            alpha: m.alpha,
            episodes: self.rounds,
            tasks: self.tasks,
            refresh_every: m.refresh_every,
            radius_scale: m.radius_scale,
        };
        cfg.validate().map_err(|e| match e {
            Error::Config { field, reason } => Error::config(format!("mpp.{field}"), reason),
            other => other,
        })?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json(s, Path::new("."))
    }

    #[test]
    fn minimal_configs_validate() {
        for fam in ["obp_full", "obp_bandit", "mpp_full", "mpp_partial"] {
            let c = parse(&format!(r#"{{"family":"{fam}","tasks":2,"rounds":3}}"#)).unwrap();
            c.validate().unwrap();
        }
    }

    #[test]
    fn field_paths_in_errors() {
        let c = parse(r#"{"family":"obp_full","tasks":2,"rounds":3,"obp":{"eta_interval":[0.3,0.1]}}"#).unwrap();
        let e = c.validate().unwrap_err();
        assert!(e.is_config());
        assert!(e.to_string().contains("obp.eta_interval"), "{e}");
        let c = parse(r#"{"family":"mpp_partial","tasks":2,"rounds":3,"mpp":{"alpha":0.2}}"#).unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("mpp.alpha"));
        assert!(parse(r#"{"family":"obp_full","tasks":2,"rounds":3,"typo":1}"#).is_err());
        let c = parse(r#"{"family":"mpp_full","tasks":2,"rounds":3,"environment":"missing.json"}"#).unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("environment"));
    }

    #[test]
    fn family_names_round_trip() {
        for f in [Family::ObpFull, Family::ObpBandit, Family::MppFull, Family::MppPartial] {
            assert_eq!(f.as_str().parse::<Family>().unwrap(), f);
        }
        assert!("mdp".parse::<Family>().is_err());
    }
}
