//! Hull operations and the log-barrier on a small polygon: Carathéodory
//! decomposition, Euclidean projection, Dikin sampling and a mirror step.

use metapersuasion::geom::{caratheodory, facets_2d, project, BarrierDomain, PointSet};
use metapersuasion::rng;

fn main() -> metapersuasion::Result<()> {
    let ps = PointSet::new(vec![
        vec![0.0, 0.0],
        vec![1.0, 0.2],
        vec![0.8, 1.0],
        vec![0.1, 0.7],
        vec![0.5, 0.5],
    ])?;

    let target = [0.45, 0.4];
    let dec = caratheodory(&ps, &target)?;
    println!("{target:?} = Σ {:?} over points {:?}", dec.weights, dec.indices);

    let outside = [1.5, 1.5];
    let p = project(&ps, &outside)?;
    println!("projection of {outside:?}: {:?} (corral {:?})", p.point, p.active);

    let domain = BarrierDomain::from_facets(&facets_2d(&ps)?)?;
    let u = domain.center().to_vec();
    println!("analytic center {u:?}, ϑ = {}", domain.theta());
    let mut r = rng::stream(0, &[]);
    for _ in 0..3 {
        let s = domain.dikin_sample(&u, &mut r)?;
        println!("  Dikin sample {:?} on axis {} (sign {:+})", s.point, s.axis, s.sign);
    }
    let next = domain.mirror_step(&u, &[1.0, -0.5], 0.1)?;
    println!("mirror step with loss (1, −0.5), η = 0.1: {next:?}");
    Ok(())
}
