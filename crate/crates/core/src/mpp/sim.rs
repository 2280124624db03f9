use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layout::Layout;
use super::spec::MppTask;
use crate::error::{Error, Result};

/// Which rewards the sender sees after an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    /// Rewards of every action at each visited `(x, ω)`.
    Full,
    /// Rewards of the recommended action only.
    Partial,
}

/// A direct signaling policy `φ(a | x, ω)` over the decision states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MppPolicy {
    pub probs: Vec<Vec<Vec<f64>>>,
}

impl MppPolicy {
    pub fn uniform(layout: &Layout) -> Self {
        let a = layout.actions();
        Self {
            probs: vec![vec![vec![1.0 / a as f64; a]; layout.outcomes()]; layout.decision_states()],
        }
    }

    /// Recommends `action[x]` regardless of the outcome.
    pub fn constant(layout: &Layout, action: &[usize]) -> Self {
        let mut p = vec![vec![vec![0.0; layout.actions()]; layout.outcomes()]; layout.decision_states()];
        for (x, row) in p.iter_mut().enumerate() {
            for dist in row.iter_mut() {
                dist[action[x]] = 1.0;
            }
        }
        Self { probs: p }
    }

    pub fn validate(&self, layout: &Layout) -> Result<()> {
        if self.probs.len() != layout.decision_states() {
            return Err(Error::InvalidMpp("policy has wrong number of states".into()));
        }
        for row in self.probs.iter().flatten() {
            if row.len() != layout.actions()
                || row.iter().any(|&p| p < -1e-12)
                || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12
            {
                return Err(Error::InvalidMpp(format!("policy row {row:?} is not a distribution")));
            }
        }
        Ok(())
    }
}

/// One layer step of an episode with the rewards revealed for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: usize,
    pub outcome: usize,
    pub action: usize,
    pub next: usize,
    /// `(action, reward)` pairs: all actions under full feedback, the
    /// recommended one under partial feedback.
    pub sender: Vec<(usize, f64)>,
    pub receiver: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeRecord {
    pub steps: Vec<Step>,
}

fn draw_index<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Round-off: fall back to the last index with positive mass.
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(dist.len() - 1)
}

fn draw_reward<R: Rng + ?Sized>(mean: f64, tau: f64, rng: &mut R) -> f64 {
    if tau == 0.0 {
        mean
    } else {
        rng.gen_range(mean - tau..=mean + tau).clamp(0.0, 1.0)
    }
}

/// Simulates one episode. Rewards for every action are drawn at each visited
/// layer regardless of the feedback mode, so both modes consume the random
/// stream identically.
pub fn rollout<R: Rng + ?Sized>(
    layout: &Layout,
    task: &MppTask,
    policy: &MppPolicy,
    feedback: Feedback,
    rng: &mut R,
) -> EpisodeRecord {
    let mut x = 0;
    let mut steps = Vec::with_capacity(layout.horizon());
    for _ in 0..layout.horizon() {
        let w = draw_index(&task.prior[x], rng);
        let a = draw_index(&policy.probs[x][w], rng);
        let y = layout.successors(x).start + draw_index(&task.transition[x][w][a], rng);
        let na = layout.actions();
        let us: Vec<f64> = (0..na).map(|b| draw_reward(task.sender[x][w][b], task.tau3, rng)).collect();
        let ur: Vec<f64> = (0..na).map(|b| draw_reward(task.receiver[x][w][b], task.tau3, rng)).collect();
        let (sender, receiver) = match feedback {
            Feedback::Full => (us.into_iter().enumerate().collect(), ur.into_iter().enumerate().collect()),
            Feedback::Partial => (vec![(a, us[a])], vec![(a, ur[a])]),
        };
        steps.push(Step {
            state: x,
            outcome: w,
            action: a,
            next: y,
            sender,
            receiver,
        });
        x = y;
    }
    EpisodeRecord { steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpp::spec::judge_prosecutor_mpp;
    use crate::rng;

    #[test]
    fn single_layer_episode() {
        let spec = judge_prosecutor_mpp();
        let l = spec.layout();
        let task = spec.mean_task();
        let pol = MppPolicy::uniform(&l);
        let mut r = rng::stream(0, &[]);
        let full = rollout(&l, &task, &pol, Feedback::Full, &mut r);
        assert_eq!(full.steps.len(), 1);
        assert_eq!(full.steps[0].next, 1);
        assert_eq!(full.steps[0].sender.len(), 2);
        let mut r = rng::stream(0, &[]);
        let part = rollout(&l, &task, &pol, Feedback::Partial, &mut r);
        assert_eq!(part.steps[0].sender.len(), 1);
        assert_eq!(part.steps[0].action, full.steps[0].action);
        assert!(part.steps[0].sender[0].1 >= 0.0 && part.steps[0].sender[0].1 <= 1.0);
    }

    #[test]
    fn deterministic_path() {
        let mut spec = judge_prosecutor_mpp();
        spec.prior[0] = vec![1.0, 0.0];
        let l = spec.layout();
        let task = spec.mean_task();
        let pol = MppPolicy::constant(&l, &[1]);
        let mut r = rng::stream(9, &[]);
        for _ in 0..20 {
            let e = rollout(&l, &task, &pol, Feedback::Partial, &mut r);
            assert_eq!((e.steps[0].state, e.steps[0].outcome, e.steps[0].action, e.steps[0].next), (0, 0, 1, 1));
        }
    }
}
