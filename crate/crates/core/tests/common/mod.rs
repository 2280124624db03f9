#![allow(dead_code)]

use metapersuasion::geom::PointSet;
use metapersuasion::mpp::MppSpec;
use metapersuasion::obp::{
    judge_prosecutor, DirectScheme, LossNormalization, LossSpace, ObpTask, ObpTaskStream, ResponseModel,
};
use rand::Rng;

/// A loss space over hand-picked normalized points. Schemes are placeholders.
pub fn custom_space(points: Vec<Vec<f64>>) -> LossSpace {
    let g = judge_prosecutor();
    let k = points[0].len();
    let n = points.len();
    LossSpace {
        points: PointSet::new(points.clone()).unwrap(),
        schemes: vec![DirectScheme::deterministic(&g, &[vec![0, 0], vec![0, 0]]); n],
        raw: points,
        normalization: LossNormalization {
            min: vec![0.0; k],
            span: vec![1.0; k],
        },
        candidates: n,
        retained: n,
        model: ResponseModel::Obedient,
    }
}

/// `tasks` copies of one task with the given type sequence.
pub fn repeated_stream(space: &LossSpace, types: &[usize], tasks: usize) -> ObpTaskStream {
    let g = judge_prosecutor();
    ObpTaskStream {
        mean: g.clone(),
        tau: 0.0,
        grid_step: 0.25,
        model: ResponseModel::Obedient,
        seed: 0,
        tasks: (0..tasks)
            .map(|t| ObpTask {
                index: t,
                game: g.clone(),
                space: space.clone(),
                types: types.to_vec(),
            })
            .collect(),
    }
}

fn dist<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// A random loop-free MPP with the given layer sizes.
pub fn random_spec<R: Rng>(layers: &[usize], outcomes: usize, actions: usize, rng: &mut R) -> MppSpec {
    let mut transition = Vec::new();
    let mut prior = Vec::new();
    let mut sender = Vec::new();
    let mut receiver = Vec::new();
    for k in 0..layers.len() - 1 {
        for _ in 0..layers[k] {
            transition.push(
                (0..outcomes)
                    .map(|_| (0..actions).map(|_| dist(layers[k + 1], rng)).collect())
                    .collect(),
            );
            prior.push(dist(outcomes, rng));
            let table = |rng: &mut R| -> Vec<Vec<f64>> {
                (0..outcomes)
                    .map(|_| (0..actions).map(|_| rng.gen_range(0.1..0.9)).collect())
                    .collect()
            };
            sender.push(table(rng));
            receiver.push(table(rng));
        }
    }
    MppSpec {
        layers: layers.to_vec(),
        outcomes,
        actions,
        transition,
        prior,
        sender,
        receiver,
        tau2: 0.02,
        tau3: 0.1,
    }
}

/// A random policy over the spec's decision states.
pub fn random_policy<R: Rng>(spec: &MppSpec, rng: &mut R) -> metapersuasion::mpp::MppPolicy {
    let l = spec.layout();
    metapersuasion::mpp::MppPolicy {
        probs: (0..l.decision_states())
            .map(|_| (0..l.outcomes()).map(|_| dist(l.actions(), rng)).collect())
            .collect(),
    }
}
