//! Runs a shipped configuration through the library harness at reduced
//! scale and prints the final task-averaged series.

use std::path::Path;

use metapersuasion::harness::{self, ExperimentConfig};

fn main() -> metapersuasion::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "obp_bandit".into());
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("configs/{name}.json"));
    let mut cfg = ExperimentConfig::load(&path)?;
    cfg.replications = cfg.replications.min(4);
    let out = harness::run(&cfg)?;
    let last = cfg.tasks - 1;
    for arm in &out.ledger.arms {
        print!("{:>8}: regret {:+.4} ± {:.4}", arm.arm, arm.regret.mean[last], arm.regret.std[last]);
        if let Some(v) = &arm.violation {
            print!(", violation {:.4} ± {:.4}", v.mean[last], v.std[last]);
        }
        println!();
    }
    let csv = harness::raw_csv(&out.rows)?;
    println!("{} raw rows, {} bytes of CSV", out.rows.len(), csv.len());
    Ok(())
}
