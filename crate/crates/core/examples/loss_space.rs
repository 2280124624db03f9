//! Enumerates the persuasive grid schemes of the judge-prosecutor game and
//! prints the hull of their normalized loss vectors.

use metapersuasion::geom::facets_2d;
use metapersuasion::obp::{enumerate_schemes, judge_prosecutor, ResponseModel};

fn main() -> metapersuasion::Result<()> {
    let game = judge_prosecutor();
    let step = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.25);
    let space = enumerate_schemes(&game, step, ResponseModel::Obedient)?;
    println!(
        "grid step {step}: {} candidates, {} persuasive, {} distinct loss points",
        space.candidates,
        space.retained,
        space.points.len()
    );
    println!("raw loss min {:?}, span {:?}", space.normalization.min, space.normalization.span);
    for facet in facets_2d(&space.points)? {
        println!(
            "facet  {:+.4} z1 {:+.4} z2 <= {:+.4}",
            facet.normal[0], facet.normal[1], facet.offset
        );
    }
    Ok(())
}
