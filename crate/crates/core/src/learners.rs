//! Optimistic persuasive policy search over a task sequence, with shrinkage
//! estimators (meta) or plain within-task means (κ = 0 baseline).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{ConfidenceRadii, EstimatorBank, Estimates, Kappa, RadiusParams};
use crate::lp::{self, LinearProgram, Relation, Sense};
use crate::mpp::{
    add_layer_and_flow_rows, benchmark_opt, episode_metrics, rollout, sample_task, Feedback, Layout, MppPolicy,
    MppSpec, OccupancyMeasure,
};
use crate::rng::{self, ROLLOUT};

/// Objective of one Meta-Opt-Opt solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpMode {
    /// Optimistic sender reward `Σ q (ûˢ + ξˢ)`.
    Reward,
    /// Reach probability of the triple `(x, ω, a)`.
    Explore { state: usize, outcome: usize, action: usize },
}

/// The assembled program. Columns are `q` over quadruples, then `ε` over
/// quadruples, then `ζ` over decision `(x, ω)` pairs.
#[derive(Debug, Clone)]
pub struct MetaOptOptProblem {
    pub program: LinearProgram,
    pub num_quads: usize,
    pub num_pairs: usize,
}

impl MetaOptOptProblem {
    pub fn eps_col(&self, quad: usize) -> usize {
        self.num_quads + quad
    }

    pub fn zeta_col(&self, pair: usize) -> usize {
        2 * self.num_quads + pair
    }
}

pub fn build_meta_opt_opt(layout: &Layout, est: &Estimates, radii: &ConfidenceRadii, mode: LpMode) -> MetaOptOptProblem {
    let nq = layout.num_quads();
    let np = layout.num_pairs();
    let mut obj = vec![0.0; 2 * nq + np];
    match mode {
        LpMode::Reward => {
            for (i, &(x, w, a, _)) in layout.quads().iter().enumerate() {
                let tri = layout.triple(x, w, a);
                obj[i] = est.sender[tri] + radii.sender[tri];
            }
        }
        LpMode::Explore { state, outcome, action } => {
            for i in layout.quads_of(state, outcome, action) {
                obj[i] = 1.0;
            }
        }
    }
    let mut prog = LinearProgram::new(Sense::Maximize, obj);
    add_layer_and_flow_rows(&mut prog, layout);
    let eps_col = |i: usize| nq + i;
    let zeta_col = |pair: usize| 2 * nq + pair;

    // Transition anchoring and its budget.
    for (x, w, a) in layout.triples() {
        let tri = layout.triple(x, w, a);
        let range = layout.quads_of(x, w, a);
        for (j, i) in range.clone().enumerate() {
            let p = est.transition[tri][j];
            let mut up: Vec<(usize, f64)> = range.clone().map(|h| (h, if h == i { 1.0 - p } else { -p })).collect();
            up.push((eps_col(i), -1.0));
            prog.add_sparse(&up, Relation::Le, 0.0);
            let mut down: Vec<(usize, f64)> = range.clone().map(|h| (h, if h == i { p - 1.0 } else { p })).collect();
            down.push((eps_col(i), -1.0));
            prog.add_sparse(&down, Relation::Le, 0.0);
        }
        let r = radii.transition[tri];
        let budget: Vec<(usize, f64)> = range
            .clone()
            .map(|h| (eps_col(h), 1.0))
            .chain(range.map(|h| (h, -r)))
            .collect();
        prog.add_sparse(&budget, Relation::Le, 0.0);
    }

    // Prior anchoring and its budget.
    for x in 0..layout.decision_states() {
        let all: Vec<usize> = (0..layout.outcomes())
            .flat_map(|w| (0..layout.actions()).flat_map(move |a| layout.quads_of(x, w, a)))
            .collect();
        for w in 0..layout.outcomes() {
            let mu = est.prior[x][w];
            let own: Vec<usize> = (0..layout.actions()).flat_map(|a| layout.quads_of(x, w, a)).collect();
            let coef = |h: usize, sign: f64| sign * (if own.contains(&h) { 1.0 - mu } else { -mu });
            let zeta = zeta_col(layout.pair(x, w));
            let mut up: Vec<(usize, f64)> = all.iter().map(|&h| (h, coef(h, 1.0))).collect();
            up.push((zeta, -1.0));
            prog.add_sparse(&up, Relation::Le, 0.0);
            let mut down: Vec<(usize, f64)> = all.iter().map(|&h| (h, coef(h, -1.0))).collect();
            down.push((zeta, -1.0));
            prog.add_sparse(&down, Relation::Le, 0.0);
        }
        let r = radii.prior[x];
        let budget: Vec<(usize, f64)> = (0..layout.outcomes())
            .map(|w| (zeta_col(layout.pair(x, w)), 1.0))
            .chain(all.iter().map(|&h| (h, -r)))
            .collect();
        prog.add_sparse(&budget, Relation::Le, 0.0);
    }

    // Optimistic incentive compatibility.
    for x in 0..layout.decision_states() {
        for a in 0..layout.actions() {
            for b in 0..layout.actions() {
                if a == b {
                    continue;
                }
                let mut terms = Vec::new();
                for w in 0..layout.outcomes() {
                    let ta = layout.triple(x, w, a);
                    let tb = layout.triple(x, w, b);
                    let c = est.receiver[ta] + radii.receiver[ta] - est.receiver[tb] + radii.receiver[tb];
                    terms.extend(layout.quads_of(x, w, a).map(|i| (i, c)));
                }
                prog.add_sparse(&terms, Relation::Ge, 0.0);
            }
        }
    }
    MetaOptOptProblem {
        program: prog,
        num_quads: nq,
        num_pairs: np,
    }
}

/// Solves a built program and returns its occupancy part, after auditing
/// every constraint to 1e-7.
pub fn solve_meta_opt_opt(problem: &MetaOptOptProblem) -> Result<OccupancyMeasure> {
    let sol = lp::solve(&problem.program)?;
    if !sol.is_optimal() {
        return Err(Error::Infeasible(format!("Meta-Opt-Opt reported {:?}", sol.status)));
    }
    let residual = problem.program.max_violation(&sol.x);
    if residual > 1e-7 {
        return Err(Error::NumericalBreakdown(format!("Meta-Opt-Opt audit residual {residual:e}")));
    }
    Ok(OccupancyMeasure {
        q: sol.x[..problem.num_quads].iter().map(|v| v.max(0.0)).collect(),
    })
}

/// Learner settings shared by both feedback modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OppsConfig {
    pub feedback: Feedback,
    pub kappa: Kappa,
    pub delta: f64,
    pub psi: f64,
    /// Exploration exponent; the phase uses `⌈m^α⌉` visits per cell.
    pub alpha: f64,
    pub episodes: usize,
    pub tasks: usize,
    /// Re-solve the program every this many episodes.
    pub refresh_every: usize,
    /// Multiplier on every confidence radius.
    pub radius_scale: f64,
}

impl OppsConfig {
    pub fn validate(&self) -> Result<()> {
        self.kappa.validate()?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config("delta", format!("{} must lie in (0, 1)", self.delta)));
        }
        if !(self.psi >= 0.0 && self.psi.is_finite()) {
            return Err(Error::config("psi", format!("{} must be finite and nonnegative", self.psi)));
        }
        if !(0.5..=1.0).contains(&self.alpha) {
            return Err(Error::config("alpha", format!("{} must lie in [0.5, 1]", self.alpha)));
        }
        if self.episodes == 0 || self.tasks == 0 {
            return Err(Error::config("episodes", "episodes and tasks must be positive"));
        }
        if !(self.radius_scale > 0.0 && self.radius_scale.is_finite()) {
            return Err(Error::config("radius_scale", format!("{} must be positive", self.radius_scale)));
        }
        if self.refresh_every == 0 {
            return Err(Error::config("refresh_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Same settings with shrinkage disabled.
    pub fn baseline(&self) -> Self {
        Self {
            kappa: Kappa::zero(),
            ..*self
        }
    }

    /// Episodes spent exploring in each task: `⌈m^α⌉·|X||Ω||A|`, clamped at
    /// `m`, and zero under full feedback.
    pub fn exploration_episodes(&self, layout: &Layout) -> usize {
        match self.feedback {
            Feedback::Full => 0,
            Feedback::Partial => {
                let n = (self.episodes as f64).powf(self.alpha).ceil() as usize;
                (n * layout.states() * layout.outcomes() * layout.actions()).min(self.episodes)
            }
        }
    }
}

/// Regret and violation of one task, summed over its episodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MppTaskRecord {
    pub task: usize,
    pub opt: f64,
    pub regret: f64,
    pub violation: f64,
    pub exploration_episodes: usize,
}

/// Runs the learner over `cfg.tasks` tasks drawn under `seed`. Task
/// parameters and rollout draws come from streams shared by every arm, so
/// arms differ only through their policies.
pub fn run_opps(spec: &MppSpec, cfg: &OppsConfig, seed: u64) -> Result<Vec<MppTaskRecord>> {
    cfg.validate()?;
    spec.validate()?;
    let layout = spec.layout();
    let mut bank = EstimatorBank::new(&layout, cfg.feedback, cfg.kappa);
    let explore = cfg.exploration_episodes(&layout);
    let params = RadiusParams {
        delta: cfg.delta,
        psi: cfg.psi,
        episodes: cfg.episodes,
        tasks: cfg.tasks,
        scale: cfg.radius_scale,
    };
    let mut records = Vec::with_capacity(cfg.tasks);
    for t in 0..cfg.tasks {
        let task = sample_task(spec, t, seed);
        let opt = benchmark_opt(&layout, &task)
            .map_err(|e| Error::Episode {
                task: t,
                episode: 0,
                source: Box::new(e),
            })?
            .value;
        let mut counter = vec![0usize; layout.num_triples()];
        let mut policy = MppPolicy::uniform(&layout);
        let (mut regret, mut violation) = (0.0, 0.0);
        for i in 0..cfg.episodes {
            let mode = if i < explore {
                let target = (0..counter.len()).min_by_key(|&c| (counter[c], c)).unwrap_or(0);
                counter[target] += 1;
                let na = layout.actions();
                let no = layout.outcomes();
                LpMode::Explore {
                    state: target / (no * na),
                    outcome: (target / na) % no,
                    action: target % na,
                }
            } else {
                LpMode::Reward
            };
            let refresh = i < explore || (i - explore) % cfg.refresh_every == 0;
            if refresh {
                let problem = build_meta_opt_opt(&layout, &bank.estimates(), &bank.radii(&params), mode);
                policy = solve_meta_opt_opt(&problem)
                    .map_err(|e| Error::Episode {
                        task: t,
                        episode: i,
                        source: Box::new(e),
                    })?
                    .induced_policy(&layout);
            }
            let m = episode_metrics(&layout, &task, opt, &policy);
            regret += m.regret;
            violation += m.violation;
            let mut r = rng::stream(seed, &[ROLLOUT, t as u64, i as u64]);
            let record = rollout(&layout, &task, &policy, cfg.feedback, &mut r);
            bank.ingest(&record);
        }
        bank.end_task();
        records.push(MppTaskRecord {
            task: t,
            opt,
            regret,
            violation,
            exploration_episodes: explore,
        });
    }
    Ok(records)
}
