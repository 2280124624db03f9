//! Loop-free episodic Markov persuasion processes: task sampling, episode
//! simulation, occupancy measures and the benchmark program.

mod benchmark;
mod layout;
mod occupancy;
mod sim;
mod spec;

pub(crate) use benchmark::add_layer_and_flow_rows;
pub use benchmark::{benchmark_opt, best_response_mpp, sender_value, violation, Benchmark};
pub use layout::Layout;
pub use occupancy::{occupancy_of, OccupancyMeasure};
pub use sim::{rollout, EpisodeRecord, Feedback, MppPolicy, Step};
pub use spec::{judge_prosecutor_mpp, sample_task, sample_task_with, MppSpec, MppTask};

/// Regret and violation of one episode's policy, measured with the task's
/// true means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    pub regret: f64,
    pub violation: f64,
}

pub fn episode_metrics(layout: &Layout, task: &MppTask, opt: f64, policy: &MppPolicy) -> EpisodeMetrics {
    let q = occupancy_of(layout, task, policy);
    EpisodeMetrics {
        regret: opt - sender_value(layout, task, &q),
        violation: violation(layout, task, policy, &q),
    }
}
