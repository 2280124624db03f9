use super::layout::Layout;
use super::occupancy::{occupancy_of, OccupancyMeasure};
use super::sim::MppPolicy;
use super::spec::MppTask;
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, Relation, Sense};

/// Receiver's best response to recommendation `a` at `x`: the maximizer of
/// `Σ_ω μ(ω|x) φ(a|x,ω) uʳ(x,ω,·)`. The recommendation is returned when it is
/// itself a maximizer (within 1e-12) or when `a` has zero probability;
/// otherwise the smallest maximizing index.
pub fn best_response_mpp(task: &MppTask, policy: &MppPolicy, x: usize, a: usize) -> usize {
    let outcomes = task.prior[x].len();
    let actions = policy.probs[x][0].len();
    let weight: Vec<f64> = (0..outcomes).map(|w| task.prior[x][w] * policy.probs[x][w][a]).collect();
    if weight.iter().sum::<f64>() <= 1e-12 {
        return a;
    }
    let value = |b: usize| -> f64 { (0..outcomes).map(|w| weight[w] * task.receiver[x][w][b]).sum() };
    let vals: Vec<f64> = (0..actions).map(value).collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if vals[a] >= max - 1e-12 {
        return a;
    }
    (0..actions).find(|&b| vals[b] >= max - 1e-12).unwrap_or(a)
}

/// Sender value `Σ q(x,ω,a,x′) uˢ(x,ω,a)`.
pub fn sender_value(layout: &Layout, task: &MppTask, q: &OccupancyMeasure) -> f64 {
    layout
        .quads()
        .iter()
        .zip(&q.q)
        .map(|(&(x, w, a, _), v)| v * task.sender[x][w][a])
        .sum()
}

/// Persuasiveness violation `Σ q(x,ω,a)(uʳ(x,ω,b(a,x)) − uʳ(x,ω,a))` of a
/// policy whose true occupancy is `q`.
pub fn violation(layout: &Layout, task: &MppTask, policy: &MppPolicy, q: &OccupancyMeasure) -> f64 {
    let mut total = 0.0;
    for x in 0..layout.decision_states() {
        for a in 0..layout.actions() {
            let b = best_response_mpp(task, policy, x, a);
            if b == a {
                continue;
            }
            for w in 0..layout.outcomes() {
                total += q.triple(layout, x, w, a) * (task.receiver[x][w][b] - task.receiver[x][w][a]);
            }
        }
    }
    total
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub value: f64,
    pub occupancy: OccupancyMeasure,
    pub policy: MppPolicy,
}

/// Adds the exact validity rows: layer totals, flow conservation for
/// layers `1..L`, and the linearized `P^q = P`, `μ^q = μ` equalities.
pub(crate) fn add_layer_and_flow_rows(prog: &mut LinearProgram, layout: &Layout) {
    for k in 0..layout.horizon() {
        let terms: Vec<(usize, f64)> = layout
            .quads()
            .iter()
            .enumerate()
            .filter(|(_, &(x, ..))| layout.layer_of(x) == k)
            .map(|(i, _)| (i, 1.0))
            .collect();
        prog.add_sparse(&terms, Relation::Eq, 1.0);
    }
    for k in 1..layout.horizon() {
        for x in layout.layer(k) {
            let mut terms = Vec::new();
            for (i, &(src, _, _, y)) in layout.quads().iter().enumerate() {
                if y == x {
                    terms.push((i, 1.0));
                }
                if src == x {
                    terms.push((i, -1.0));
                }
            }
            prog.add_sparse(&terms, Relation::Eq, 0.0);
        }
    }
}

/// Solves the benchmark problem: maximize the sender's value over valid
/// occupancy measures of the task subject to exact persuasiveness.
pub fn benchmark_opt(layout: &Layout, task: &MppTask) -> Result<Benchmark> {
    let nq = layout.num_quads();
    let obj: Vec<f64> = layout.quads().iter().map(|&(x, w, a, _)| task.sender[x][w][a]).collect();
    let mut prog = LinearProgram::new(Sense::Maximize, obj);
    add_layer_and_flow_rows(&mut prog, layout);
    for (x, w, a) in layout.triples() {
        let range = layout.quads_of(x, w, a);
        for (j, i) in range.clone().enumerate() {
            let p = task.transition[x][w][a][j];
            let terms: Vec<(usize, f64)> = range
                .clone()
                .map(|h| (h, if h == i { 1.0 - p } else { -p }))
                .filter(|&(_, c)| c.abs() > 1e-15)
                .collect();
            if !terms.is_empty() {
                prog.add_sparse(&terms, Relation::Eq, 0.0);
            }
        }
    }
    for x in 0..layout.decision_states() {
        for w in 0..layout.outcomes() {
            let mu = task.prior[x][w];
            let mut terms = Vec::new();
            for w2 in 0..layout.outcomes() {
                let c = if w2 == w { 1.0 - mu } else { -mu };
                for a in 0..layout.actions() {
                    terms.extend(layout.quads_of(x, w2, a).map(|i| (i, c)));
                }
            }
            prog.add_sparse(&terms, Relation::Eq, 0.0);
        }
    }
    for x in 0..layout.decision_states() {
        for a in 0..layout.actions() {
            for b in 0..layout.actions() {
                if a == b {
                    continue;
                }
                let mut terms = Vec::new();
                for w in 0..layout.outcomes() {
                    let c = task.receiver[x][w][a] - task.receiver[x][w][b];
                    terms.extend(layout.quads_of(x, w, a).map(|i| (i, c)));
                }
                prog.add_sparse(&terms, Relation::Ge, 0.0);
            }
        }
    }
    debug_assert_eq!(prog.num_vars(), nq);
    let sol = lp::solve(&prog)?;
    if !sol.is_optimal() {
        return Err(Error::Infeasible(format!("benchmark program reported {:?}", sol.status)));
    }
    let occ = OccupancyMeasure {
        q: sol.x.iter().map(|v| v.max(0.0)).collect(),
    };
    let policy = occ.induced_policy(layout);
    // Re-derive the occupancy from the policy so the benchmark is exactly a
    // policy's occupancy under the task.
    let occupancy = occupancy_of(layout, task, &policy);
    let value = sender_value(layout, task, &occupancy);
    Ok(Benchmark {
        value,
        occupancy,
        policy,
    })
}
