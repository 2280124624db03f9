use rand::Rng;
use serde::{Deserialize, Serialize};

use super::enumerate::{enumerate_schemes, LossSpace};
use super::game::{ObpGame, ResponseModel};
use crate::error::{Error, Result};
use crate::rng;

/// How the oblivious adversary picks receiver types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adversary {
    /// Independent uniform draws over types.
    #[default]
    Uniform,
    /// Types `0, 1, …, K−1, 0, …` continuing across tasks.
    Cyclic,
}

/// One OBP task: a perturbed game, its lifted loss set and the receiver
/// types faced in each round.
#[derive(Debug, Clone)]
pub struct ObpTask {
    pub index: usize,
    pub game: ObpGame,
    pub space: LossSpace,
    pub types: Vec<usize>,
}

impl ObpTask {
    /// Rounds in which each type appeared.
    pub fn type_counts(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.game.types()];
        for &k in &self.types {
            c[k] += 1.0;
        }
        c
    }
}

#[derive(Debug, Clone)]
pub struct ObpTaskStream {
    pub mean: ObpGame,
    pub tau: f64,
    pub grid_step: f64,
    pub model: ResponseModel,
    pub seed: u64,
    pub tasks: Vec<ObpTask>,
}

fn jitter<R: Rng + ?Sized>(mean: f64, tau: f64, rng: &mut R) -> f64 {
    if tau == 0.0 {
        mean
    } else {
        rng.gen_range(mean - tau..=mean + tau)
    }
}

/// Draws every parameter uniformly within `±tau` of its mean. The prior is
/// clipped at 1e-6 and renormalized; utilities are clipped to `[−1, 1]`.
pub fn sample_game<R: Rng + ?Sized>(mean: &ObpGame, tau: f64, rng: &mut R) -> ObpGame {
    let mut prior: Vec<f64> = mean
        .prior
        .iter()
        .map(|&p| jitter(p, tau, rng).max(1e-6))
        .collect();
    let total: f64 = prior.iter().sum();
    for p in prior.iter_mut() {
        *p /= total;
    }
    let mut table = |t: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        t.iter()
            .map(|row| row.iter().map(|&v| jitter(v, tau, rng).clamp(-1.0, 1.0)).collect())
            .collect()
    };
    let sender_utility = table(&mean.sender_utility);
    let receiver_utilities = mean.receiver_utilities.iter().map(&mut table).collect();
    ObpGame {
        prior,
        sender_utility,
        receiver_utilities,
    }
}

impl ObpTaskStream {
    /// Generates `tasks` tasks of `rounds` rounds each. Task `t` draws its game
    /// from the `ENVIRONMENT/t` stream and its types from `ADVERSARY/t`.
    pub fn generate(
        mean: &ObpGame,
        tau: f64,
        grid_step: f64,
        model: ResponseModel,
        tasks: usize,
        rounds: usize,
        adversary: Adversary,
        seed: u64,
    ) -> Result<Self> {
        mean.validate()?;
        if !(0.0..1.0).contains(&tau) {
            return Err(Error::config("tau1", format!("{tau} is not in [0, 1)")));
        }
        let k = mean.types();
        let mut out = Vec::with_capacity(tasks);
        for t in 0..tasks {
            let mut env = rng::stream(seed, &[rng::ENVIRONMENT, t as u64]);
            let game = sample_game(mean, tau, &mut env);
            let space = enumerate_schemes(&game, grid_step, model)?;
            let mut adv = rng::stream(seed, &[rng::ADVERSARY, t as u64]);
            let types = (0..rounds)
                .map(|i| match adversary {
                    Adversary::Uniform => adv.gen_range(0..k),
                    Adversary::Cyclic => (t * rounds + i) % k,
                })
                .collect();
            out.push(ObpTask {
                index: t,
                game,
                space,
                types,
            });
        }
        Ok(Self {
            mean: mean.clone(),
            tau,
            grid_step,
            model,
            seed,
            tasks: out,
        })
    }
}
