//! Partial-feedback meta-persuasion: CTOMD (barrier OMD with Dikin
//! exploration and a one-point estimator) wrapped in an experts layer over
//! `(η, b)` pairs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{caratheodory, facets_2d, project, BarrierDomain, Decomposition};
use crate::linalg::{self, dot};
use crate::obp::{LossSpace, ObpTask, ObpTaskStream};
use crate::obp_full::{mean_point, per_task_optimum};

/// Which barrier geometry CTOMD runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// The hull's own facets with the log barrier.
    #[default]
    Polytope,
    /// The largest inscribed ball with `−ln(1 − ‖u‖²)`.
    Ball,
}

/// Barrier domain for a task's loss hull. Only `K = 2` hulls have facet
/// enumeration.
pub fn task_domain(space: &LossSpace, geometry: Geometry) -> Result<BarrierDomain> {
    let facets = facets_2d(&space.points)?;
    match geometry {
        Geometry::Polytope => BarrierDomain::from_facets(&facets),
        Geometry::Ball => {
            let a: Vec<Vec<f64>> = facets.iter().map(|f| f.normal.to_vec()).collect();
            let b: Vec<f64> = facets.iter().map(|f| f.offset).collect();
            BarrierDomain::inscribed_ball(&a, &b)
        }
    }
}

/// Outcome of one CTOMD round.
#[derive(Debug, Clone)]
pub struct CtomdStep {
    /// Index into the loss space of the point played.
    pub played: usize,
    /// Scalar loss `ν(φ)ᵀ1ₖ` observed.
    pub loss: f64,
    /// Estimator `K ℓ ε v^{1/2} e`, in domain coordinates.
    pub estimate: Vec<f64>,
    /// Exploration point in domain coordinates.
    pub explore: Vec<f64>,
    pub next: Vec<f64>,
}

/// Maps a point to the hull for play. Exploration points lie in the open
/// Dikin ellipsoid, so only round-off can push them out; those are projected.
fn decompose(space: &LossSpace, z: &[f64]) -> Result<Decomposition> {
    match caratheodory(&space.points, z) {
        Err(Error::InfeasibleTarget { residual }) if residual < 1e-7 => {
            let p = project(&space.points, z)?;
            caratheodory(&space.points, &p.point)
        }
        other => other,
    }
}

/// One CTOMD round from the interior point `u` (domain coordinates) against
/// receiver type `k`.
pub fn ctomd_round<R: Rng + ?Sized>(
    domain: &BarrierDomain,
    space: &LossSpace,
    u: &[f64],
    k: usize,
    eta: f64,
    rng: &mut R,
) -> Result<CtomdStep> {
    let dikin = domain.dikin_sample(u, rng)?;
    let dec = decompose(space, &domain.to_space(&dikin.point))?;
    let played = dec.sample(rng);
    let loss = space.points.point(played)[k];
    let kk = domain.dim() as f64;
    let estimate = linalg::scale(&dikin.eigenvector, kk * loss * dikin.sign * dikin.eigenvalue.sqrt());
    let next = if loss == 0.0 {
        u.to_vec()
    } else {
        domain.mirror_step(u, &estimate, eta)?
    };
    Ok(CtomdStep {
        played,
        loss,
        estimate,
        explore: dikin.point,
        next,
    })
}

/// Meta-loss `D_R(OPT_b(ℓ̃)‖z)/η + (32K²η + b)m`. `opt` is nudged toward the
/// barrier minimizer by 1e-9 if it sits on the boundary.
pub fn meta_loss(domain: &BarrierDomain, eta: f64, b: f64, m: usize, init: &[f64], opt: &[f64]) -> Result<f64> {
    let k = domain.dim() as f64;
    let mut opt = opt.to_vec();
    if !domain.is_interior(&opt) {
        let c = domain.center();
        opt = linalg::axpy(&opt, 1e-9, &linalg::sub(c, &opt));
    }
    let div = domain.bregman(&opt, init)?;
    Ok(div / eta + (32.0 * k * k * eta + b) * m as f64)
}

/// The experts grid `𝒢` with its probability vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpertGrid {
    pub experts: Vec<(f64, f64)>,
    pub probs: Vec<f64>,
    pub alpha: f64,
}

impl ExpertGrid {
    /// Cartesian product of the two grids with uniform weights.
    pub fn new(etas: &[f64], bs: &[f64], alpha: f64) -> Result<Self> {
        if etas.is_empty() || bs.is_empty() {
            return Err(Error::config("grid", "expert grid is empty"));
        }
        if !(alpha > 0.0) {
            return Err(Error::config("alpha", format!("{alpha} must be positive")));
        }
        if let Some(b) = bs.iter().find(|&&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::config("b_grid", format!("{b} is not in (0, 1)")));
        }
        if let Some(e) = etas.iter().find(|&&e| !(e > 0.0)) {
            return Err(Error::config("eta_grid", format!("{e} must be positive")));
        }
        let experts: Vec<(f64, f64)> = etas.iter().flat_map(|&e| bs.iter().map(move |&b| (e, b))).collect();
        let n = experts.len();
        Ok(Self {
            experts,
            probs: vec![1.0 / n as f64; n],
            alpha,
        })
    }

    /// Default grid for `K` types, `m` rounds and `T` tasks: five log-spaced
    /// step sizes in `[√(K ln m)/(8K√m), √(K ln m)/(2K√m)]` capped at
    /// `1/(4K)`, four log-spaced offsets in `[1/m, 1/√m]`, `α = 1/√T`.
    pub fn default_for(k: usize, m: usize, t: usize) -> Result<Self> {
        let (etas, bs) = default_axes(k, m);
        Self::new(&etas, &bs, 1.0 / (t as f64).sqrt())
    }

    pub fn len(&self) -> usize {
        self.experts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experts.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }

    /// Multiplicative update `p(g) ← p(g)·exp(−α U(g))`, renormalized. The
    /// smallest loss is subtracted first to avoid underflow.
    pub fn update(&mut self, losses: &[f64]) {
        let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
        for (p, u) in self.probs.iter_mut().zip(losses) {
            *p *= (-self.alpha * (u - min)).exp();
        }
        let total: f64 = self.probs.iter().sum();
        for p in self.probs.iter_mut() {
            *p /= total;
        }
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || hi <= lo {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Default `(η, b)` axes.
pub fn default_axes(k: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let (kf, mf) = (k as f64, m as f64);
    let base = (kf * mf.ln()).sqrt() / (kf * mf.sqrt());
    let cap = 1.0 / (4.0 * kf);
    let etas = log_space((base / 8.0).min(cap), (base / 2.0).min(cap), 5);
    let bs = log_space(1.0 / mf, 1.0 / mf.sqrt(), 4);
    (etas, bs)
}

/// Single-task step `√(K ln m)/(4K√m)`, capped at `1/(4K)`.
pub fn default_eta(k: usize, m: usize) -> f64 {
    let (kf, mf) = (k as f64, m as f64);
    ((kf * mf.ln()).sqrt() / (4.0 * kf * mf.sqrt())).min(1.0 / (4.0 * kf))
}

/// Per-task outcome of a partial-feedback arm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BanditTaskRecord {
    pub task: usize,
    pub eta: f64,
    pub b: f64,
    pub expert: usize,
    pub optimum: Vec<f64>,
    /// `Σᵢ ⟨z̄ᵢ, 1_{kᵢ}⟩ − ⟨c, z*⟩`, with `z̄ᵢ` in loss space.
    pub expected_regret: f64,
    /// Observed losses minus the best fixed point's loss.
    pub realized_regret: f64,
    /// Gauge of the initialization at the barrier minimizer.
    pub init_gauge: f64,
    /// Largest dual local norm of an estimator in the task.
    pub max_estimator_norm: f64,
    pub estimate: Vec<f64>,
    pub played: Vec<usize>,
    pub probs: Vec<f64>,
}

fn check_eta(eta: f64, k: usize) -> Result<()> {
    if !(eta > 0.0 && eta * k as f64 <= 0.25 + 1e-12) {
        return Err(Error::config("eta", format!("η = {eta} violates 0 < ηK ≤ 1/4 with K = {k}")));
    }
    Ok(())
}

/// Runs `m` CTOMD rounds of one task from `init` (domain coordinates).
pub fn run_ctomd<R: Rng + ?Sized>(
    task: &ObpTask,
    domain: &BarrierDomain,
    init: &[f64],
    eta: f64,
    rng: &mut R,
) -> Result<BanditTaskRecord> {
    check_eta(eta, domain.dim())?;
    let space = &task.space;
    let counts = task.type_counts();
    let optimum = per_task_optimum(&counts, &space.points);
    let best = dot(&counts, &optimum);
    let mut u = init.to_vec();
    let mut expected = 0.0;
    let mut realized = 0.0;
    let mut estimate = vec![0.0; domain.dim()];
    let mut played = Vec::with_capacity(task.types.len());
    let mut max_norm: f64 = 0.0;
    for (i, &k) in task.types.iter().enumerate() {
        expected += domain.to_space(&u)[k];
        let step = ctomd_round(domain, space, &u, k, eta, rng).map_err(|e| Error::Episode {
            task: task.index,
            episode: i,
            source: Box::new(e),
        })?;
        max_norm = max_norm.max(domain.dual_local_norm(&u, &step.estimate)?);
        realized += step.loss;
        played.push(step.played);
        estimate = linalg::add(&estimate, &step.estimate);
        u = step.next;
    }
    Ok(BanditTaskRecord {
        task: task.index,
        eta,
        b: 0.0,
        expert: 0,
        optimum,
        expected_regret: expected - best,
        realized_regret: realized - best,
        init_gauge: domain.gauge(domain.center(), init),
        max_estimator_norm: max_norm,
        estimate,
        played,
        probs: Vec::new(),
    })
}

/// Meta arm over the experts grid. Initializations are running means of
/// `OPT_b` outputs stored in loss space; each task maps them into its own
/// domain and pulls them into the b-restricted set.
pub fn run_bandit_meta<R: Rng + ?Sized>(
    stream: &ObpTaskStream,
    mut grid: ExpertGrid,
    geometry: Geometry,
    rng: &mut R,
) -> Result<Vec<BanditTaskRecord>> {
    let mut history: Vec<Vec<Vec<f64>>> = vec![Vec::new(); grid.len()];
    let mut out = Vec::with_capacity(stream.tasks.len());
    for task in &stream.tasks {
        let domain = task_domain(&task.space, geometry)?;
        let inits: Vec<Vec<f64>> = grid
            .experts
            .iter()
            .zip(&history)
            .map(|(&(_, b), h)| {
                if h.is_empty() {
                    domain.center().to_vec()
                } else {
                    domain.pull_into_restricted(b, &domain.to_domain(&mean_point(h)))
                }
            })
            .collect();
        let g = grid.sample(rng);
        let (eta, b) = grid.experts[g];
        let mut rec = run_ctomd(task, &domain, &inits[g], eta, rng)?;
        rec.b = b;
        rec.expert = g;
        let m = task.types.len();
        let mut losses = Vec::with_capacity(grid.len());
        for (j, &(eta_j, b_j)) in grid.experts.iter().enumerate() {
            let opt = domain.opt_b(b_j, &rec.estimate)?;
            losses.push(meta_loss(&domain, eta_j, b_j, m, &inits[j], &opt)?);
            history[j].push(domain.to_space(&opt));
        }
        grid.update(&losses);
        rec.probs = grid.probs.clone();
        out.push(rec);
    }
    Ok(out)
}

/// Baseline arm: CTOMD restarted from the barrier minimizer every task.
pub fn run_bandit_baseline<R: Rng + ?Sized>(
    stream: &ObpTaskStream,
    eta: f64,
    geometry: Geometry,
    rng: &mut R,
) -> Result<Vec<BanditTaskRecord>> {
    stream
        .tasks
        .iter()
        .map(|task| {
            let domain = task_domain(&task.space, geometry)?;
            run_ctomd(task, &domain, domain.center(), eta, rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_respects_step_cap() {
        let (etas, bs) = default_axes(2, 5);
        assert_eq!(etas.len(), 5);
        assert!(etas.iter().all(|&e| e * 2.0 <= 0.25 + 1e-15));
        assert!((bs[0] - 0.2).abs() < 1e-12 && (bs[3] - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((default_eta(2, 5) - (2.0 * 5f64.ln()).sqrt() / (8.0 * 5f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn meta_loss_at_optimum_is_the_offset_term() {
        let d = BarrierDomain::unit_ball(2);
        let z = [0.3, -0.2];
        let u = meta_loss(&d, 0.01, 0.1, 5, &z, &z).unwrap();
        assert!((u - (32.0 * 4.0 * 0.01 + 0.1) * 5.0).abs() < 1e-12);
        let u = meta_loss(&d, 0.01, 0.1, 5, &[0.0, 0.0], &[0.9, 0.0]).unwrap();
        let want = (1.0f64 / 0.19).ln() / 0.01 + (32.0 * 4.0 * 0.01 + 0.1) * 5.0;
        assert!((u - want).abs() < 1e-9);
    }

    #[test]
    fn expert_update_is_shift_invariant() {
        let mut a = ExpertGrid::new(&[0.05, 0.1], &[0.2, 0.4], 0.3).unwrap();
        let mut b = a.clone();
        a.update(&[1.0, 2.0, 3.0, 0.5]);
        b.update(&[101.0, 102.0, 103.0, 100.5]);
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(a.probs[3] > a.probs[0]);
    }

    #[test]
    fn rejects_large_steps() {
        assert!(check_eta(0.2, 2).is_err());
        assert!(check_eta(0.125, 2).is_ok());
    }
}
