//! Meta-OPPS against the κ = 0 baseline on the judge–prosecutor MPP.
//!
//! Usage: `cargo run --release --example mpp_learners -- [full|partial] [tasks] [episodes] [seeds] [radius_scale]`

use metapersuasion::estimation::{default_psi, Kappa};
use metapersuasion::learners::{run_opps, OppsConfig};
use metapersuasion::mpp::{judge_prosecutor_mpp, Feedback};
use rayon::prelude::*;

fn running_mean(xs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    xs.iter()
        .enumerate()
        .map(|(i, v)| {
            acc += v;
            acc / (i + 1) as f64
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let feedback = match args.first().map(String::as_str) {
        Some("partial") => Feedback::Partial,
        _ => Feedback::Full,
    };
    let tasks: usize = args.get(1).map_or(Ok(40), |s| s.parse())?;
    let episodes: usize = args.get(2).map_or(Ok(50), |s| s.parse())?;
    let seeds: u64 = args.get(3).map_or(Ok(4), |s| s.parse())?;
    let radius_scale: f64 = args.get(4).map_or(Ok(1.0), |s| s.parse())?;

    let spec = judge_prosecutor_mpp();
    let meta = OppsConfig {
        feedback,
        kappa: Kappa::from_widths(spec.tau2, spec.tau3)?,
        delta: 0.1,
        psi: default_psi(&spec),
        alpha: 0.5,
        episodes,
        tasks,
        refresh_every: 1,
        radius_scale,
    };
    let base = meta.baseline();

    let runs: Vec<_> = (0..seeds)
        .into_par_iter()
        .map(|s| -> metapersuasion::Result<_> { Ok((run_opps(&spec, &meta, s)?, run_opps(&spec, &base, s)?)) })
        .collect::<Result<_, _>>()?;

    let series = |pick: &dyn Fn(&metapersuasion::learners::MppTaskRecord) -> f64, arm: usize| -> Vec<f64> {
        let mut avg = vec![0.0; tasks];
        for (m, b) in &runs {
            let recs = if arm == 0 { m } else { b };
            let rm = running_mean(&recs.iter().map(pick).collect::<Vec<_>>());
            for (a, v) in avg.iter_mut().zip(rm) {
                *a += v / seeds as f64;
            }
        }
        avg
    };
    let quart = |s: &[f64]| {
        let lo = s.len() * 3 / 4;
        s[lo..].iter().sum::<f64>() / (s.len() - lo) as f64
    };
    let decile = |s: &[f64]| {
        let hi = (s.len() / 10).max(1);
        s[..hi].iter().sum::<f64>() / hi as f64
    };
    for (name, arm) in [("meta", 0), ("baseline", 1)] {
        let r = series(&|r| r.regret, arm);
        let v = series(&|r| r.violation, arm);
        println!(
            "{name:>8}: regret first-decile {:+.4} final-quartile {:+.4} | violation first-decile {:.4} final-quartile {:.4}",
            decile(&r),
            quart(&r),
            decile(&v),
            quart(&v)
        );
    }
    Ok(())
}
