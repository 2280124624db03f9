//! Samples tasks of the judge-prosecutor MPP and compares the persuasive
//! benchmark with the uniform policy.

use metapersuasion::mpp::{
    benchmark_opt, episode_metrics, judge_prosecutor_mpp, occupancy_of, sample_task, MppPolicy,
};

fn main() -> metapersuasion::Result<()> {
    let spec = judge_prosecutor_mpp();
    let l = spec.layout();
    let mean = spec.mean_task();
    let bench = benchmark_opt(&l, &mean)?;
    println!("mean task: OPT = {:.4}, policy {:?}", bench.value, bench.policy.probs);
    let uniform = MppPolicy::uniform(&l);
    for t in 0..5 {
        let task = sample_task(&spec, t, 7);
        let b = benchmark_opt(&l, &task)?;
        let m = episode_metrics(&l, &task, b.value, &uniform);
        let q = occupancy_of(&l, &task, &uniform);
        println!(
            "task {t}: OPT {:.4}; uniform policy regret {:+.4}, violation {:.4}, occupancy residual {:.1e}",
            b.value,
            m.regret,
            m.violation,
            q.validity_residual(&l, &task)
        );
    }
    Ok(())
}
