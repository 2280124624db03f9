//! Compares shrinkage and within-task estimates of the sender reward over a
//! sequence of similar tasks, with their confidence radii.

use metapersuasion::estimation::{default_psi, EstimatorBank, Kappa, RadiusParams};
use metapersuasion::mpp::{judge_prosecutor_mpp, rollout, sample_task, Feedback, MppPolicy};
use metapersuasion::rng;

fn main() -> metapersuasion::Result<()> {
    let spec = judge_prosecutor_mpp();
    let l = spec.layout();
    let kappa = Kappa::from_widths(spec.tau2, spec.tau3)?;
    let mut meta = EstimatorBank::new(&l, Feedback::Partial, kappa);
    let mut plain = EstimatorBank::new(&l, Feedback::Partial, Kappa::zero());
    let pol = MppPolicy::uniform(&l);
    let (tasks, episodes) = (30, 40);
    let params = RadiusParams {
        delta: 0.1,
        psi: default_psi(&spec),
        episodes,
        tasks,
        scale: 1.0,
    };
    let mut r = rng::stream(3, &[]);
    let (mut se_meta, mut se_plain) = (0.0, 0.0);
    let c = l.triple(0, 0, 0);
    for t in 0..tasks {
        let task = sample_task(&spec, t, 3);
        for _ in 0..episodes {
            let rec = rollout(&l, &task, &pol, Feedback::Partial, &mut r);
            meta.ingest(&rec);
            plain.ingest(&rec);
        }
        let truth = task.sender[0][0][0];
        let (a, b) = (meta.estimates().sender[c], plain.estimates().sender[c]);
        se_meta += (a - truth).powi(2);
        se_plain += (b - truth).powi(2);
        if t % 5 == 0 || t + 1 == tasks {
            println!(
                "task {t:>2}: truth {truth:.4}  shrinkage {a:.4} ± {:.3}  within-task {b:.4} ± {:.3}",
                meta.radii(&params).sender[c],
                plain.radii(&params).sender[c]
            );
        }
        meta.end_task();
        plain.end_task();
    }
    println!("mean squared error: shrinkage {:.2e}, within-task {:.2e}", se_meta / tasks as f64, se_plain / tasks as f64);
    Ok(())
}
