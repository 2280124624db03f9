//! Full-feedback meta-persuasion against the OGD restart baseline on the
//! judge-prosecutor game. Prints task-averaged expected regret at t = T.
//!
//! Usage: cargo run --example full_feedback [seeds]

use metapersuasion::obp::{judge_prosecutor, Adversary, ObpTaskStream, ResponseModel};
use metapersuasion::obp_full::{run_full_baseline, run_full_meta, MetaConstants};
use metapersuasion::rng;

fn main() -> metapersuasion::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let (tasks, rounds) = (25, 5);
    let constants = MetaConstants::from_interval(0.05, 0.25, rounds)?;
    let (mut meta, mut base) = (0.0, 0.0);
    for seed in 0..seeds {
        let stream = ObpTaskStream::generate(
            &judge_prosecutor(),
            0.05,
            0.25,
            ResponseModel::Obedient,
            tasks,
            rounds,
            Adversary::Uniform,
            seed,
        )?;
        let mut r = rng::stream(seed, &[rng::ALGORITHM, 0]);
        let m = run_full_meta(&stream, &constants, &mut r)?;
        let mut r = rng::stream(seed, &[rng::ALGORITHM, 1]);
        let b = run_full_baseline(&stream, constants.midpoint(), &mut r)?;
        meta += m.iter().map(|x| x.expected_regret).sum::<f64>() / tasks as f64;
        base += b.iter().map(|x| x.expected_regret).sum::<f64>() / tasks as f64;
    }
    println!("interval {:?}, beta {:.5}", constants.interval(), constants.beta);
    println!("meta     {:.4}", meta / seeds as f64);
    println!("baseline {:.4}", base / seeds as f64);
    Ok(())
}
