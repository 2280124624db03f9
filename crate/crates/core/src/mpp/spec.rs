use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layout::Layout;
use crate::error::{Error, Result};
use crate::rng;

/// Global-mean description of a layered MPP family.
///
/// All tables are indexed by global state id (states numbered layer by
/// layer); only non-terminal states need rows. `transition[x][ω][a]` is a
/// distribution over the next layer in its own order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MppSpec {
    /// `|X_k|` for `k = 0..=L`.
    pub layers: Vec<usize>,
    pub outcomes: usize,
    pub actions: usize,
    #[serde(rename = "P_G")]
    pub transition: Vec<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "mu_G")]
    pub prior: Vec<Vec<f64>>,
    #[serde(rename = "us_G")]
    pub sender: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "ur_G")]
    pub receiver: Vec<Vec<Vec<f64>>>,
    /// Across-task sampling half-width.
    pub tau2: f64,
    /// Within-task reward half-width.
    pub tau3: f64,
}

/// Realized means of one task. Same shapes as [`MppSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MppTask {
    pub index: usize,
    pub transition: Vec<Vec<Vec<Vec<f64>>>>,
    pub prior: Vec<Vec<f64>>,
    pub sender: Vec<Vec<Vec<f64>>>,
    pub receiver: Vec<Vec<Vec<f64>>>,
    pub tau3: f64,
}

fn check_dist(row: &[f64], what: &str) -> Result<()> {
    if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidMpp(format!("{what} is not a distribution: {row:?}")));
    }
    Ok(())
}

impl MppSpec {
    pub fn layout(&self) -> Layout {
        Layout::new(&self.layers, self.outcomes, self.actions)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.len() < 2 || self.layers[0] != 1 || *self.layers.last().unwrap() != 1 {
            return Err(Error::InvalidMpp("need at least two layers with singleton first and last".into()));
        }
        if self.layers.contains(&0) || self.outcomes == 0 || self.actions == 0 {
            return Err(Error::InvalidMpp("empty layer, outcome or action set".into()));
        }
        if !(0.0..0.5).contains(&self.tau2) || !(0.0..=0.5).contains(&self.tau3) {
            return Err(Error::InvalidMpp(format!("widths tau2={} tau3={} out of range", self.tau2, self.tau3)));
        }
        let l = self.layout();
        let d = l.decision_states();
        let rows = |n: usize, what: &str| -> Result<()> {
            if n < d || n > l.states() {
                return Err(Error::InvalidMpp(format!("{what} has {n} state rows, need {d}")));
            }
            Ok(())
        };
        rows(self.transition.len(), "P_G")?;
        rows(self.prior.len(), "mu_G")?;
        rows(self.sender.len(), "us_G")?;
        rows(self.receiver.len(), "ur_G")?;
        for x in 0..d {
            let succ = l.successors(x).len();
            check_dist(&self.prior[x], &format!("mu_G[{x}]"))?;
            if self.prior[x].len() != self.outcomes {
                return Err(Error::InvalidMpp(format!("mu_G[{x}] has wrong length")));
            }
            for (name, table) in [("us_G", &self.sender), ("ur_G", &self.receiver)] {
                let t = &table[x];
                if t.len() != self.outcomes || t.iter().any(|r| r.len() != self.actions) {
                    return Err(Error::InvalidMpp(format!("{name}[{x}] has wrong shape")));
                }
                if t.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::InvalidMpp(format!("{name}[{x}] leaves [0, 1]")));
                }
            }
            let p = &self.transition[x];
            if p.len() != self.outcomes || p.iter().any(|r| r.len() != self.actions) {
                return Err(Error::InvalidMpp(format!("P_G[{x}] has wrong shape")));
            }
            for (w, row) in p.iter().enumerate() {
                for (a, dist) in row.iter().enumerate() {
                    if dist.len() != succ {
                        return Err(Error::InvalidMpp(format!(
                            "P_G[{x}][{w}][{a}] has {} entries, next layer has {succ}",
                            dist.len()
                        )));
                    }
                    check_dist(dist, &format!("P_G[{x}][{w}][{a}]"))?;
                }
            }
        }
        Ok(())
    }

    /// The task at the global means.
    pub fn mean_task(&self) -> MppTask {
        let d = self.layout().decision_states();
        MppTask {
            index: 0,
            transition: self.transition[..d].to_vec(),
            prior: self.prior[..d].to_vec(),
            sender: self.sender[..d].to_vec(),
            receiver: self.receiver[..d].to_vec(),
            tau3: self.tau3,
        }
    }
}

/// The two-layer judge-prosecutor instance: one decision state, a
/// deterministic move to the terminal state.
pub fn judge_prosecutor_mpp() -> MppSpec {
    MppSpec {
        layers: vec![1, 1],
        outcomes: 2,
        actions: 2,
        transition: vec![vec![vec![vec![1.0], vec![1.0]], vec![vec![1.0], vec![1.0]]]],
        prior: vec![vec![0.2, 0.8], vec![0.8, 0.2]],
        sender: vec![vec![vec![0.7, 0.3], vec![0.7, 0.3]]],
        receiver: vec![vec![vec![0.7, 0.3], vec![0.3, 0.7]]],
        tau2: 0.01,
        tau3: 0.1,
    }
}

fn jitter<R: Rng + ?Sized>(mean: f64, tau: f64, rng: &mut R) -> f64 {
    if tau == 0.0 {
        mean
    } else {
        rng.gen_range(mean - tau..=mean + tau)
    }
}

fn sample_dist<R: Rng + ?Sized>(row: &[f64], tau: f64, rng: &mut R) -> Vec<f64> {
    let mut out: Vec<f64> = row.iter().map(|&p| jitter(p, tau, rng).max(1e-6)).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= s);
    out
}

/// Draws task `t` from the `ENVIRONMENT/t` stream of `seed`.
pub fn sample_task(spec: &MppSpec, t: usize, seed: u64) -> MppTask {
    let mut r = rng::stream(seed, &[rng::ENVIRONMENT, t as u64]);
    sample_task_with(spec, t, &mut r)
}

/// Every scalar is drawn uniformly within `±τ₂` of its mean; distribution
/// rows are clipped at 1e-6 and renormalized, rewards clipped to `[0, 1]`.
pub fn sample_task_with<R: Rng + ?Sized>(spec: &MppSpec, t: usize, rng: &mut R) -> MppTask {
    let d = spec.layout().decision_states();
    let tau = spec.tau2;
    let transition = spec.transition[..d]
        .iter()
        .map(|by_w| {
            by_w.iter()
                .map(|by_a| by_a.iter().map(|dist| sample_dist(dist, tau, rng)).collect())
                .collect()
        })
        .collect();
    let prior = spec.prior[..d].iter().map(|row| sample_dist(row, tau, rng)).collect();
    let mut rewards = |table: &[Vec<Vec<f64>>]| -> Vec<Vec<Vec<f64>>> {
        table[..d]
            .iter()
            .map(|by_w| {
                by_w.iter()
                    .map(|row| row.iter().map(|&v| jitter(v, tau, rng).clamp(0.0, 1.0)).collect())
                    .collect()
            })
            .collect()
    };
    let sender = rewards(&spec.sender);
    let receiver = rewards(&spec.receiver);
    MppTask {
        index: t,
        transition,
        prior,
        sender,
        receiver,
        tau3: spec.tau3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_is_valid() {
        let s = judge_prosecutor_mpp();
        s.validate().unwrap();
        assert_eq!(s.layout().num_quads(), 4);
    }

    #[test]
    fn zero_width_is_the_mean() {
        let mut s = judge_prosecutor_mpp();
        s.tau2 = 0.0;
        let t = sample_task(&s, 0, 1);
        assert_eq!(t, s.mean_task());
    }

    #[test]
    fn deterministic_rows_stay_nearly_deterministic() {
        let mut r = rng::stream(2, &[]);
        for _ in 0..1000 {
            let d = sample_dist(&[1.0, 0.0], 0.01, &mut r);
            assert!(d[0] >= 0.98);
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_rows() {
        let mut s = judge_prosecutor_mpp();
        s.prior[0] = vec![0.5, 0.6];
        assert!(s.validate().is_err());
        let mut s = judge_prosecutor_mpp();
        s.transition[0][0][0] = vec![0.5, 0.5];
        assert!(s.validate().is_err());
    }
}
