use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance under which two receiver payoffs count as tied.
pub const TIE_TOL: f64 = 1e-10;
/// Signals with marginal probability at or below this are never sent.
pub const MARGINAL_TOL: f64 = 1e-12;

/// A Bayesian persuasion game with a finite population of receiver types.
///
/// Utility tables are indexed `[outcome][action]`, i.e. rows are states of
/// nature and columns are actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObpGame {
    pub prior: Vec<f64>,
    pub sender_utility: Vec<Vec<f64>>,
    /// One `[outcome][action]` table per receiver type.
    pub receiver_utilities: Vec<Vec<Vec<f64>>>,
}

/// A direct scheme: for every outcome, a distribution over signal profiles
/// (one recommended action per receiver type).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectScheme {
    /// `probs[ω][s]` with `s` a profile index, see [`ObpGame::profile`].
    pub probs: Vec<Vec<f64>>,
}

/// How a receiver of type `k` reacts to a recommendation profile when the
/// sender's loss is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseModel {
    /// The receiver plays its recommended action `a_k`.
    #[default]
    Obedient,
    /// The receiver best-responds to the posterior of the whole profile,
    /// breaking ties for the sender.
    BestResponse,
}

/// Best responses of one receiver type to a posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub actions: Vec<usize>,
    /// The best response most favourable to the sender.
    pub pick: usize,
}

impl ObpGame {
    pub fn new(prior: Vec<f64>, sender_utility: Vec<Vec<f64>>, receiver_utilities: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let g = Self {
            prior,
            sender_utility,
            receiver_utilities,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n_out = self.prior.len();
        if n_out == 0 {
            return Err(Error::InvalidGame("no outcomes".into()));
        }
        if self.prior.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidGame("prior must be strictly positive".into()));
        }
        let total: f64 = self.prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidGame(format!("prior sums to {total}, expected 1")));
        }
        let n_act = self.sender_utility.first().map_or(0, Vec::len);
        if n_act == 0 {
            return Err(Error::InvalidGame("no actions".into()));
        }
        if self.receiver_utilities.is_empty() {
            return Err(Error::InvalidGame("no receiver types".into()));
        }
        let check_table = |t: &Vec<Vec<f64>>, name: &str| -> Result<()> {
            if t.len() != n_out || t.iter().any(|row| row.len() != n_act) {
                return Err(Error::InvalidGame(format!(
                    "{name} must be {n_out} x {n_act} (outcomes x actions)"
                )));
            }
            if t.iter().flatten().any(|v| !v.is_finite() || v.abs() > 1.0) {
                return Err(Error::InvalidGame(format!("{name} entries must lie in [-1, 1]")));
            }
            Ok(())
        };
        check_table(&self.sender_utility, "sender_utility")?;
        for (k, t) in self.receiver_utilities.iter().enumerate() {
            check_table(t, &format!("receiver_utilities[{k}]"))?;
        }
        Ok(())
    }

    pub fn outcomes(&self) -> usize {
        self.prior.len()
    }

    pub fn actions(&self) -> usize {
        self.sender_utility[0].len()
    }

    pub fn types(&self) -> usize {
        self.receiver_utilities.len()
    }

    /// Number of signal profiles `𝖠ᴷ`.
    pub fn signals(&self) -> usize {
        self.actions().pow(self.types() as u32)
    }

    /// Action recommended to each type by profile `s` (type 0 is the least
    /// significant digit in base `𝖠`).
    pub fn profile(&self, s: usize) -> Vec<usize> {
        let a = self.actions();
        let mut rest = s;
        (0..self.types())
            .map(|_| {
                let d = rest % a;
                rest /= a;
                d
            })
            .collect()
    }

    pub fn profile_index(&self, actions: &[usize]) -> usize {
        actions
            .iter()
            .rev()
            .fold(0, |acc, &a| acc * self.actions() + a)
    }

    /// Probability that signal `s` is sent.
    pub fn marginal(&self, scheme: &DirectScheme, s: usize) -> f64 {
        self.prior
            .iter()
            .zip(&scheme.probs)
            .map(|(mu, row)| mu * row[s])
            .sum()
    }

    pub fn posterior(&self, scheme: &DirectScheme, s: usize) -> Result<Vec<f64>> {
        let z = self.marginal(scheme, s);
        if z <= MARGINAL_TOL {
            return Err(Error::ZeroMarginal { signal: s });
        }
        Ok(self
            .prior
            .iter()
            .zip(&scheme.probs)
            .map(|(mu, row)| mu * row[s] / z)
            .collect())
    }

    pub fn best_response(&self, k: usize, posterior: &[f64]) -> BestResponse {
        let expected = |table: &Vec<Vec<f64>>, a: usize| -> f64 {
            posterior.iter().zip(table).map(|(p, row)| p * row[a]).sum()
        };
        let receiver = &self.receiver_utilities[k];
        let values: Vec<f64> = (0..self.actions()).map(|a| expected(receiver, a)).collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let actions: Vec<usize> = (0..self.actions())
            .filter(|&a| best - values[a] <= TIE_TOL)
            .collect();
        let mut pick = actions[0];
        let mut pick_val = expected(&self.sender_utility, pick);
        for &a in &actions[1..] {
            let v = expected(&self.sender_utility, a);
            if v > pick_val {
                pick = a;
                pick_val = v;
            }
        }
        BestResponse { actions, pick }
    }

    /// Aggregate obedience constraints: for every type `k` and deviation `a`,
    /// `Σ_ω Σ_s μ_ω φ_ω(s) (u^{r,k}(a_k, ω) − u^{r,k}(a, ω)) ≥ −1e-10`.
    pub fn is_persuasive(&self, scheme: &DirectScheme) -> bool {
        let profiles: Vec<Vec<usize>> = (0..self.signals()).map(|s| self.profile(s)).collect();
        for k in 0..self.types() {
            let table = &self.receiver_utilities[k];
            for dev in 0..self.actions() {
                let mut gain = 0.0;
                for (w, row) in scheme.probs.iter().enumerate() {
                    for (s, &p) in row.iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        let rec = profiles[s][k];
                        gain += self.prior[w] * p * (table[w][rec] - table[w][dev]);
                    }
                }
                if gain < -1e-10 {
                    return false;
                }
            }
        }
        true
    }

    /// Sender's expected utility against type `k` when the receiver best
    /// responds to each signal's posterior, breaking ties for the sender.
    pub fn sender_utility_against(&self, scheme: &DirectScheme, k: usize) -> f64 {
        let mut total = 0.0;
        for s in 0..self.signals() {
            let Ok(post) = self.posterior(scheme, s) else {
                continue;
            };
            let a = self.best_response(k, &post).pick;
            for (w, row) in scheme.probs.iter().enumerate() {
                total += self.prior[w] * row[s] * self.sender_utility[w][a];
            }
        }
        total
    }

    /// Sender's expected utility against type `k` when the receiver follows
    /// its recommendation: `Σ_ω Σ_s μ_ω φ_ω(s) u^s(a_k, ω)`.
    pub fn sender_utility_obedient(&self, scheme: &DirectScheme, k: usize) -> f64 {
        let mut total = 0.0;
        for (w, row) in scheme.probs.iter().enumerate() {
            for (s, &p) in row.iter().enumerate() {
                if p != 0.0 {
                    total += self.prior[w] * p * self.sender_utility[w][self.profile(s)[k]];
                }
            }
        }
        total
    }

    /// Raw loss vector `ν(φ)ₖ = −u^s(φ, k)`, before normalization.
    pub fn raw_loss(&self, scheme: &DirectScheme, model: ResponseModel) -> Vec<f64> {
        (0..self.types())
            .map(|k| match model {
                ResponseModel::Obedient => -self.sender_utility_obedient(scheme, k),
                ResponseModel::BestResponse => -self.sender_utility_against(scheme, k),
            })
            .collect()
    }

    pub fn check_scheme(&self, scheme: &DirectScheme) -> Result<()> {
        if scheme.probs.len() != self.outcomes() {
            return Err(Error::InvalidGame("scheme has wrong outcome count".into()));
        }
        for (w, row) in scheme.probs.iter().enumerate() {
            if row.len() != self.signals() {
                return Err(Error::InvalidGame(format!("scheme row {w} has wrong signal count")));
            }
            if row.iter().any(|&p| p < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidGame(format!("scheme row {w} is not a distribution")));
            }
        }
        Ok(())
    }
}

impl DirectScheme {
    /// Sends profile `per_outcome[ω]` with certainty in outcome `ω`.
    pub fn deterministic(game: &ObpGame, per_outcome: &[Vec<usize>]) -> Self {
        let probs = per_outcome
            .iter()
            .map(|acts| {
                let mut row = vec![0.0; game.signals()];
                row[game.profile_index(acts)] = 1.0;
                row
            })
            .collect();
        Self { probs }
    }
}

/// The judge-prosecutor game used in the OBP experiments.
pub fn judge_prosecutor() -> ObpGame {
    ObpGame {
        prior: vec![0.2, 0.8],
        sender_utility: vec![vec![-0.7, -0.3], vec![-0.7, -0.3]],
        receiver_utilities: vec![
            vec![vec![-0.7, -0.3], vec![-0.3, -0.7]],
            vec![vec![-0.8, -0.2], vec![-0.2, -0.8]],
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_round_trip() {
        let g = judge_prosecutor();
        assert_eq!(g.signals(), 4);
        for s in 0..4 {
            assert_eq!(g.profile_index(&g.profile(s)), s);
        }
        assert_eq!(g.profile(1), vec![1, 0]);
    }

    #[test]
    fn revealing_and_uninformative_posteriors() {
        let g = judge_prosecutor();
        let reveal = DirectScheme::deterministic(&g, &[vec![0, 0], vec![1, 1]]);
        assert_eq!(g.posterior(&reveal, 0).unwrap(), vec![1.0, 0.0]);
        let pool = DirectScheme::deterministic(&g, &[vec![0, 0], vec![0, 0]]);
        assert_eq!(g.posterior(&pool, 0).unwrap(), g.prior);
        assert!(matches!(g.posterior(&pool, 3), Err(Error::ZeroMarginal { signal: 3 })));
    }

    #[test]
    fn hand_bayes() {
        let g = judge_prosecutor();
        let scheme = DirectScheme {
            probs: vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.25, 0.0, 0.0, 0.75]],
        };
        let rho = g.posterior(&scheme, 0).unwrap();
        assert!((rho[0] - 0.5).abs() < 1e-15 && (rho[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn best_responses() {
        let g = judge_prosecutor();
        let br = g.best_response(0, &[0.2, 0.8]);
        assert_eq!(br.actions, vec![0]);
        assert_eq!(g.best_response(1, &[1.0, 0.0]).pick, 1);

        let mut flat = g.clone();
        flat.receiver_utilities[0] = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let br = flat.best_response(0, &[0.5, 0.5]);
        assert_eq!(br.actions, vec![0, 1]);
        assert_eq!(br.pick, 1);
    }

    #[test]
    fn persuasiveness() {
        let g = judge_prosecutor();
        let obedient = DirectScheme::deterministic(&g, &[vec![1, 1], vec![0, 0]]);
        assert!(g.is_persuasive(&obedient));
        let perverse = DirectScheme::deterministic(&g, &[vec![0, 0], vec![1, 1]]);
        assert!(!g.is_persuasive(&perverse));
    }

    #[test]
    fn loss_models_agree_on_obedient_schemes() {
        let g = judge_prosecutor();
        let obedient = DirectScheme::deterministic(&g, &[vec![1, 1], vec![0, 0]]);
        let a = g.raw_loss(&obedient, ResponseModel::Obedient);
        let b = g.raw_loss(&obedient, ResponseModel::BestResponse);
        // 0.2 * 0.3 + 0.8 * 0.7 for both types.
        for v in a.iter().chain(&b) {
            assert!((v - 0.62).abs() < 1e-12);
        }
    }
}
