pub mod error;
pub mod geom;
pub mod harness;
pub mod estimation;
pub mod learners;
pub mod linalg;
pub mod lp;
pub mod mpp;
pub mod obp;
pub mod obp_bandit;
pub mod obp_full;
pub mod rng;

pub use error::{Error, Result};
