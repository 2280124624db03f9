//! Online Bayesian persuasion instances: games, direct schemes, grid
//! enumeration of persuasive schemes, the loss map and task streams.

mod enumerate;
mod game;
mod stream;

pub use enumerate::{compositions, enumerate_schemes, grid_cells, grid_schemes, LossNormalization, LossSpace};
pub use game::{judge_prosecutor, BestResponse, DirectScheme, ObpGame, ResponseModel, MARGINAL_TOL, TIE_TOL};
pub use stream::{sample_game, Adversary, ObpTask, ObpTaskStream};
