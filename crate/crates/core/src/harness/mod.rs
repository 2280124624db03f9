//! Experiment runner: seeded replications of a meta arm and a baseline arm,
//! raw and summary CSV output, a JSON ledger and plot-ready series.
//!
//! Replication `r` runs both arms under seed `base + r`. Task parameters,
//! adversary sequences and MPP rollouts come from streams shared by the
//! arms; the OBP learners' own draws use one stream per arm.

mod config;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Environment, ExperimentConfig, Family, MppSettings, ObpSettings};

use crate::error::{Error, Result};
use crate::learners::run_opps;
use crate::obp::ObpTaskStream;
use crate::obp_bandit::{run_bandit_baseline, run_bandit_meta};
use crate::obp_full::{run_full_baseline, run_full_meta};
use crate::rng::{self, ALGORITHM};

pub const SCHEMA_VERSION: u32 = 1;
pub const ARMS: [&str; 2] = ["meta", "baseline"];

/// Per-task outcome of one arm in one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskOutcome {
    pub regret: f64,
    pub violation: Option<f64>,
}

/// One row of the raw CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub family: Family,
    pub arm: &'static str,
    pub replication: usize,
    pub task: usize,
    pub regret: f64,
    pub violation: Option<f64>,
    pub seed: u64,
}

/// Task-averaged series of one metric: per replication, then mean and
/// standard deviation across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub per_replication: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Series {
    pub fn from_replications(per_replication: Vec<Vec<f64>>) -> Self {
        let n = per_replication.len();
        let len = per_replication.first().map_or(0, Vec::len);
        let mut mean = vec![0.0; len];
        let mut std = vec![0.0; len];
        for t in 0..len {
            let col: Vec<f64> = per_replication.iter().map(|r| r[t]).collect();
            mean[t] = col.iter().sum::<f64>() / n as f64;
            if n > 1 {
                let ss: f64 = col.iter().map(|v| (v - mean[t]).powi(2)).sum();
                std[t] = (ss / (n - 1) as f64).sqrt();
            }
        }
        Self {
            per_replication,
            mean,
            std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmLedger {
    pub arm: String,
    pub regret: Series,
    pub violation: Option<Series>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretLedger {
    pub schema: u32,
    pub family: Family,
    pub tasks: usize,
    pub replications: usize,
    pub seed: u64,
    pub arms: Vec<ArmLedger>,
}

impl RegretLedger {
    pub fn arm(&self, name: &str) -> Option<&ArmLedger> {
        self.arms.iter().find(|a| a.arm == name)
    }
}

/// `xₜ ↦ (1/t) Σ_{s≤t} x_s`.
pub fn task_average(xs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    xs.iter()
        .enumerate()
        .map(|(i, v)| {
            acc += v;
            acc / (i + 1) as f64
        })
        .collect()
}

pub struct RunOutput {
    pub ledger: RegretLedger,
    pub rows: Vec<RawRow>,
}

fn replicate(cfg: &ExperimentConfig, env: &Environment, r: usize) -> Result<[Vec<TaskOutcome>; 2]> {
    let seed = cfg.seed.wrapping_add(r as u64);
    let obp = |x: f64| TaskOutcome {
        regret: x,
        violation: None,
    };
    match env {
        Environment::Obp(game) => {
            let o = &cfg.obp;
            let stream = ObpTaskStream::generate(
                game,
                o.tau1,
                o.grid_step,
                o.response_model,
                cfg.tasks,
                cfg.rounds,
                o.adversary,
                seed,
            )?;
            let mut meta_rng = rng::stream(seed, &[ALGORITHM, 0]);
            let mut base_rng = rng::stream(seed, &[ALGORITHM, 1]);
            if cfg.family == Family::ObpFull {
                let meta = run_full_meta(&stream, &cfg.meta_constants()?, &mut meta_rng)?;
                let base = run_full_baseline(&stream, cfg.baseline_eta(), &mut base_rng)?;
                Ok([
                    meta.iter().map(|t| obp(t.expected_regret)).collect(),
                    base.iter().map(|t| obp(t.expected_regret)).collect(),
                ])
            } else {
                let k = game.types();
                let geometry = cfg.obp.geometry;
                let meta = run_bandit_meta(&stream, cfg.expert_grid(k)?, geometry, &mut meta_rng)?;
                let base = run_bandit_baseline(&stream, cfg.bandit_baseline_eta(k)?, geometry, &mut base_rng)?;
                Ok([
                    meta.iter().map(|t| obp(t.expected_regret)).collect(),
                    base.iter().map(|t| obp(t.expected_regret)).collect(),
                ])
            }
        }
        Environment::Mpp(spec) => {
            let meta_cfg = cfg.opps(spec)?;
            let outcome = |v: Vec<crate::learners::MppTaskRecord>| -> Vec<TaskOutcome> {
                v.iter()
                    .map(|t| TaskOutcome {
                        regret: t.regret,
                        violation: Some(t.violation),
                    })
                    .collect()
            };
            Ok([
                outcome(run_opps(spec, &meta_cfg, seed)?),
                outcome(run_opps(spec, &meta_cfg.baseline(), seed)?),
            ])
        }
    }
}

/// Runs every replication of a validated configuration.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let env = cfg.validate()?;
    let results: Vec<[Vec<TaskOutcome>; 2]> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            replicate(cfg, &env, r).map_err(|e| Error::Run {
                replication: r,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(cfg.replications * cfg.tasks * 2);
    for (r, arms) in results.iter().enumerate() {
        for t in 0..cfg.tasks {
            for (a, name) in ARMS.iter().enumerate() {
                let o = arms[a][t];
                rows.push(RawRow {
                    family: cfg.family,
                    arm: name,
                    replication: r,
                    task: t,
                    regret: o.regret,
                    violation: o.violation,
                    seed: cfg.seed.wrapping_add(r as u64),
                });
            }
        }
    }

    let arms = ARMS
        .iter()
        .enumerate()
        .map(|(a, name)| {
            let regret = results
                .iter()
                .map(|arms| task_average(&arms[a].iter().map(|o| o.regret).collect::<Vec<_>>()))
                .collect();
            let violation = cfg.family.is_mpp().then(|| {
                Series::from_replications(
                    results
                        .iter()
                        .map(|arms| task_average(&arms[a].iter().map(|o| o.violation.unwrap_or(0.0)).collect::<Vec<_>>()))
                        .collect(),
                )
            });
            ArmLedger {
                arm: name.to_string(),
                regret: Series::from_replications(regret),
                violation,
            }
        })
        .collect();

    Ok(RunOutput {
        ledger: RegretLedger {
            schema: SCHEMA_VERSION,
            family: cfg.family,
            tasks: cfg.tasks,
            replications: cfg.replications,
            seed: cfg.seed,
            arms,
        },
        rows,
    })
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn schema_line() -> String {
    format!("#schema={SCHEMA_VERSION}\n")
}

pub fn raw_csv(rows: &[RawRow]) -> Result<Vec<u8>> {
    let mut out = schema_line().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["family", "arm", "replication", "task", "regret", "violation", "seed"])?;
        for r in rows {
            w.write_record([
                r.family.as_str().to_string(),
                r.arm.to_string(),
                r.replication.to_string(),
                r.task.to_string(),
                r.regret.to_string(),
                r.violation.map(|v| v.to_string()).unwrap_or_default(),
                r.seed.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(out)
}

pub fn summary_csv(ledger: &RegretLedger) -> Result<Vec<u8>> {
    let mut out = schema_line().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["family", "arm", "task", "regret_mean", "regret_std", "violation_mean", "violation_std"])?;
        for arm in &ledger.arms {
            for t in 0..ledger.tasks {
                let (vm, vs) = match &arm.violation {
                    Some(v) => (v.mean[t].to_string(), v.std[t].to_string()),
                    None => (String::new(), String::new()),
                };
                w.write_record([
                    ledger.family.as_str().to_string(),
                    arm.arm.clone(),
                    t.to_string(),
                    arm.regret.mean[t].to_string(),
                    arm.regret.std[t].to_string(),
                    vm,
                    vs,
                ])?;
            }
        }
        w.flush()?;
    }
    Ok(out)
}

/// Writes `raw.csv`, `summary.csv` and `ledger.json` into `dir`.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join("raw.csv"), &raw_csv(&out.rows)?)?;
    write_atomic(&dir.join("summary.csv"), &summary_csv(&out.ledger)?)?;
    write_atomic(&dir.join("ledger.json"), &serde_json::to_vec_pretty(&out.ledger)?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub arm: String,
    pub metric: String,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub schema: u32,
    pub family: Family,
    /// Task index, starting at 1.
    pub x: Vec<usize>,
    pub series: Vec<PlotSeries>,
}

/// Mean ± one standard deviation bands for every arm and metric.
pub fn plot_data(ledger: &RegretLedger) -> PlotData {
    let band = |arm: &str, metric: &str, s: &Series| PlotSeries {
        arm: arm.to_string(),
        metric: metric.to_string(),
        mean: s.mean.clone(),
        lower: s.mean.iter().zip(&s.std).map(|(m, d)| m - d).collect(),
        upper: s.mean.iter().zip(&s.std).map(|(m, d)| m + d).collect(),
    };
    let mut series = Vec::new();
    for a in &ledger.arms {
        series.push(band(&a.arm, "regret", &a.regret));
        if let Some(v) = &a.violation {
            series.push(band(&a.arm, "violation", v));
        }
    }
    PlotData {
        schema: SCHEMA_VERSION,
        family: ledger.family,
        x: (1..=ledger.tasks).collect(),
        series,
    }
}

/// Reads a ledger and writes `plots.json` beside it; returns the new path.
pub fn emit_plots(ledger_path: &Path) -> Result<PathBuf> {
    let text = std::fs::read_to_string(ledger_path)
        .map_err(|e| Error::config("ledger", format!("cannot read {}: {e}", ledger_path.display())))?;
    let ledger: RegretLedger = serde_json::from_str(&text)?;
    let out = ledger_path.with_file_name("plots.json");
    write_atomic(&out, &serde_json::to_vec_pretty(&plot_data(&ledger))?)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_statistics() {
        let s = Series::from_replications(vec![vec![1.0, 2.0], vec![3.0, 2.0]]);
        assert_eq!(s.mean, vec![2.0, 2.0]);
        assert!((s.std[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.std[1], 0.0);
        let one = Series::from_replications(vec![vec![0.5, 0.25]]);
        assert_eq!(one.std, vec![0.0, 0.0]);
    }

    #[test]
    fn running_average() {
        assert_eq!(task_average(&[2.0, 0.0, 1.0]), vec![2.0, 1.0, 1.0]);
    }

    #[test]
    fn single_task_two_rows() {
        let cfg = ExperimentConfig::from_json(r#"{"family":"obp_full","tasks":1,"rounds":2}"#, Path::new(".")).unwrap();
        let out = run(&cfg).unwrap();
        assert_eq!(out.rows.len(), 2);
        let csv = String::from_utf8(raw_csv(&out.rows).unwrap()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "#schema=1");
        assert_eq!(lines[1], "family,arm,replication,task,regret,violation,seed");
        assert!(lines[2].starts_with("obp_full,meta,0,0,"));
        assert!(lines[2].ends_with(",,0"));
        let plots = plot_data(&out.ledger);
        assert!(plots.series.iter().all(|s| s.lower == s.mean && s.upper == s.mean));
    }
}
