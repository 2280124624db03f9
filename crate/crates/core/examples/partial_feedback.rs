//! Partial-feedback meta-persuasion (CTOMD with an experts layer) against
//! CTOMD restarted from the barrier minimizer. Prints task-averaged
//! expected regret at t = T.
//!
//! Usage: cargo run --example partial_feedback [seeds] [polytope|ball]

use metapersuasion::obp::{judge_prosecutor, Adversary, ObpTaskStream, ResponseModel};
use metapersuasion::obp_bandit::{default_eta, run_bandit_baseline, run_bandit_meta, ExpertGrid, Geometry};
use metapersuasion::rng;

fn main() -> metapersuasion::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let geometry = match args.next().as_deref() {
        Some("ball") => Geometry::Ball,
        _ => Geometry::Polytope,
    };
    let (tasks, rounds) = (25, 5);
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
        let grid = ExpertGrid::default_for(2, rounds, tasks)?;
        let mut r = rng::stream(seed, &[rng::ALGORITHM, 0]);
        let m = run_bandit_meta(&stream, grid, geometry, &mut r)?;
        let mut r = rng::stream(seed, &[rng::ALGORITHM, 1]);
        let b = run_bandit_baseline(&stream, default_eta(2, rounds), geometry, &mut r)?;
        meta += m.iter().map(|x| x.expected_regret).sum::<f64>() / tasks as f64;
        base += b.iter().map(|x| x.expected_regret).sum::<f64>() / tasks as f64;
    }
    println!("geometry {geometry:?}");
    println!("meta     {:.4}", meta / seeds as f64);
    println!("baseline {:.4}", base / seeds as f64);
    Ok(())
}
