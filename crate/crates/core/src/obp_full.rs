//! Full-feedback meta-persuasion: projected OGD in loss space with a
//! Carathéodory lottery for play, warm starts from the running mean of
//! per-task optima, and ε-EWOO tuning of the step size.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{caratheodory, project, PointSet};
use crate::linalg::{self, dot};
use crate::obp::{LossSpace, ObpTask, ObpTaskStream};

/// Step-size interval and meta constants of the ε-EWOO layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetaConstants {
    pub eps: f64,
    pub rho: f64,
    pub a: f64,
    pub beta: f64,
    /// Weight `γ = m/2` of the task losses.
    pub gamma: f64,
}

impl MetaConstants {
    /// `A = √(K/m)`, `ρ = T^{-1/4}`, `ε = ρA`, `β = 4/(mA)·min(ε²/A², 1)`.
    pub fn from_horizon(k: usize, m: usize, t: usize) -> Self {
        let a = (k as f64 / m as f64).sqrt();
        let rho = (t as f64).powf(-0.25);
        Self::from_parts(rho * a, a, m)
    }

    /// Constants whose ε-EWOO interval `[ε, √(A²+ε²)]` equals `[lo, hi]`.
    pub fn from_interval(lo: f64, hi: f64, m: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::config(
                "eta_interval",
                format!("[{lo}, {hi}] must satisfy 0 < lo < hi"),
            ));
        }
        Ok(Self::from_parts(lo, (hi * hi - lo * lo).sqrt(), m))
    }

    fn from_parts(eps: f64, a: f64, m: usize) -> Self {
        let rho = eps / a;
        let beta = 4.0 / (m as f64 * a) * (eps * eps / (a * a)).min(1.0);
        Self {
            eps,
            rho,
            a,
            beta,
            gamma: m as f64 / 2.0,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.eps, (self.a * self.a + self.eps * self.eps).sqrt())
    }

    pub fn midpoint(&self) -> f64 {
        let (lo, hi) = self.interval();
        0.5 * (lo + hi)
    }
}

/// One task's ε-EWOO loss `Ũ(η) = ((d²/m + ε²)/η + η)·m/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EwooLoss {
    /// `‖z* − z̄₁‖²` for the task.
    pub dist_sq: f64,
    pub m: usize,
    pub eps_sq: f64,
}

impl EwooLoss {
    pub fn eval(&self, eta: f64) -> f64 {
        let m = self.m as f64;
        ((self.dist_sq / m + self.eps_sq) / eta + eta) * m / 2.0
    }

    /// Minimizer `√(d²/m + ε²)` of the loss over `η > 0`.
    pub fn argmin(&self) -> f64 {
        (self.dist_sq / self.m as f64 + self.eps_sq).sqrt()
    }
}

const GL_NODES: usize = 256;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on
/// the Legendre polynomial from the usual cosine initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl256() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(GL_NODES))
}

/// ε-EWOO step: the `exp(−β Σ Ũ)`-weighted mean of `η` over `[lo, hi]`.
/// An empty history or `β = 0` gives the midpoint.
pub fn ewoo_update(history: &[EwooLoss], beta: f64, lo: f64, hi: f64) -> Result<f64> {
    let mid = 0.5 * (lo + hi);
    if history.is_empty() || beta == 0.0 {
        return Ok(mid);
    }
    let half = 0.5 * (hi - lo);
    let (nodes, weights) = gl256();
    let etas: Vec<f64> = nodes.iter().map(|x| mid + half * x).collect();
    let exps: Vec<f64> = etas
        .iter()
        .map(|&eta| -beta * history.iter().map(|u| u.eval(eta)).sum::<f64>())
        .collect();
    let shift = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((eta, e), w) in etas.iter().zip(&exps).zip(weights) {
        let v = w * (e - shift).exp();
        num += v * eta;
        den += v;
    }
    if !(den > 0.0) || !num.is_finite() {
        return Err(Error::QuadratureDegenerate);
    }
    Ok((num / den).clamp(lo, hi))
}

/// One round of projected OGD with Carathéodory play.
#[derive(Debug, Clone)]
pub struct OgdStep {
    /// Index into the loss space of the point (and scheme) played.
    pub played: usize,
    pub realized_loss: f64,
    pub expected_loss: f64,
    pub next: Vec<f64>,
}

/// Plays from `z` against type `k` and takes the step
/// `Π(z − η 1ₖ)`.
pub fn ogd_round<R: Rng + ?Sized>(
    space: &LossSpace,
    z: &[f64],
    k: usize,
    eta: f64,
    rng: &mut R,
) -> Result<OgdStep> {
    let dec = caratheodory(&space.points, z)?;
    let played = dec.sample(rng);
    let realized_loss = space.points.point(played)[k];
    let mut pre = z.to_vec();
    pre[k] -= eta;
    let next = if eta == 0.0 {
        z.to_vec()
    } else {
        project(&space.points, &pre)?.point
    };
    Ok(OgdStep {
        played,
        realized_loss,
        expected_loss: z[k],
        next,
    })
}

/// Best fixed point in hindsight for type counts `c`: the vertex minimizing
/// `⟨c, z⟩`, ties broken lexicographically.
pub fn per_task_optimum(counts: &[f64], ps: &PointSet) -> Vec<f64> {
    ps.point(ps.argmin_linear(counts)).to_vec()
}

/// Per-task outcome of a full-feedback arm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullTaskRecord {
    pub task: usize,
    pub eta: f64,
    pub init: Vec<f64>,
    pub optimum: Vec<f64>,
    /// `Σᵢ ⟨z̄ᵢ, 1_{kᵢ}⟩ − ⟨c, z*⟩`.
    pub expected_regret: f64,
    /// `Σᵢ z_{i,j′}[kᵢ] − ⟨c, z*⟩`.
    pub realized_regret: f64,
    /// OGD envelope `‖z* − z̄₁‖²/(2η) + ηm/2`.
    pub ogd_bound: f64,
    pub played: Vec<usize>,
    pub iterates: Vec<Vec<f64>>,
}

/// Runs `m` OGD rounds of one task from `init` with step `eta`.
pub fn run_task<R: Rng + ?Sized>(task: &ObpTask, init: &[f64], eta: f64, rng: &mut R) -> Result<FullTaskRecord> {
    let counts = task.type_counts();
    let optimum = per_task_optimum(&counts, &task.space.points);
    let best = dot(&counts, &optimum);
    let mut z = init.to_vec();
    let mut expected = 0.0;
    let mut realized = 0.0;
    let mut played = Vec::with_capacity(task.types.len());
    let mut iterates = Vec::with_capacity(task.types.len());
    for &k in &task.types {
        iterates.push(z.clone());
        let step = ogd_round(&task.space, &z, k, eta, rng)?;
        expected += step.expected_loss;
        realized += step.realized_loss;
        played.push(step.played);
        z = step.next;
    }
    let d2 = linalg::norm2(&linalg::sub(&optimum, init)).powi(2);
    let m = task.types.len() as f64;
    Ok(FullTaskRecord {
        task: task.index,
        eta,
        init: init.to_vec(),
        optimum,
        expected_regret: expected - best,
        realized_regret: realized - best,
        ogd_bound: d2 / (2.0 * eta) + eta * m / 2.0,
        played,
        iterates,
    })
}

/// Meta arm: warm start from the mean of past optima (projected into the
/// current hull) and ε-EWOO step sizes.
pub fn run_full_meta<R: Rng + ?Sized>(
    stream: &ObpTaskStream,
    constants: &MetaConstants,
    rng: &mut R,
) -> Result<Vec<FullTaskRecord>> {
    let (lo, hi) = constants.interval();
    let mut eta = ewoo_update(&[], constants.beta, lo, hi)?;
    let mut optima: Vec<Vec<f64>> = Vec::new();
    let mut losses = Vec::new();
    let mut out = Vec::with_capacity(stream.tasks.len());
    for task in &stream.tasks {
        let ps = &task.space.points;
        let init = if optima.is_empty() {
            project(ps, &vec![0.0; ps.dim()])?.point
        } else {
            let mean = mean_point(&optima);
            project(ps, &mean)?.point
        };
        let rec = run_task(task, &init, eta, rng).map_err(|e| wrap(task.index, e))?;
        optima.push(rec.optimum.clone());
        losses.push(EwooLoss {
            dist_sq: linalg::norm2(&linalg::sub(&rec.optimum, &init)).powi(2),
            m: task.types.len(),
            eps_sq: constants.eps * constants.eps,
        });
        eta = ewoo_update(&losses, constants.beta, lo, hi)?;
        out.push(rec);
    }
    Ok(out)
}

/// Baseline arm: every task restarts OGD from `argmin ½‖z‖²` with a fixed step.
pub fn run_full_baseline<R: Rng + ?Sized>(
    stream: &ObpTaskStream,
    eta: f64,
    rng: &mut R,
) -> Result<Vec<FullTaskRecord>> {
    stream
        .tasks
        .iter()
        .map(|task| {
            let ps = &task.space.points;
            let init = project(ps, &vec![0.0; ps.dim()])?.point;
            run_task(task, &init, eta, rng).map_err(|e| wrap(task.index, e))
        })
        .collect()
}

pub(crate) fn mean_point(points: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; points[0].len()];
    for p in points {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    let n = points.len() as f64;
    out.iter_mut().for_each(|v| *v /= n);
    out
}

fn wrap(task: usize, e: Error) -> Error {
    Error::Task {
        task,
        source: Box::new(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> LossSpace {
        use crate::obp::{judge_prosecutor, LossNormalization, ResponseModel};
        let g = judge_prosecutor();
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ];
        LossSpace {
            points: PointSet::new(pts.clone()).unwrap(),
            schemes: vec![crate::obp::DirectScheme::deterministic(&g, &[vec![0, 0], vec![0, 0]]); 4],
            raw: pts,
            normalization: LossNormalization {
                min: vec![0.0, 0.0],
                span: vec![1.0, 1.0],
            },
            candidates: 4,
            retained: 4,
            model: ResponseModel::Obedient,
        }
    }

    #[test]
    fn horizon_constants() {
        let c = MetaConstants::from_horizon(2, 5, 25);
        assert!((c.a - 0.632_455_532).abs() < 1e-8);
        assert!((c.eps - 0.282_842_712).abs() < 1e-8);
        assert!((c.beta - 0.252_982_212).abs() < 1e-8);
        let c = MetaConstants::from_interval(0.05, 0.25, 5).unwrap();
        let (lo, hi) = c.interval();
        assert!((lo - 0.05).abs() < 1e-15 && (hi - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(256);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-12);
        let quartic: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((quartic - 0.4).abs() < 1e-12);
    }

    #[test]
    fn ewoo_midpoint_and_concentration() {
        assert_eq!(ewoo_update(&[], 1.0, 0.1, 0.3).unwrap(), 0.2);
        let loss = EwooLoss {
            dist_sq: 0.05,
            m: 5,
            eps_sq: 0.01,
        };
        assert_eq!(ewoo_update(&[loss], 0.0, 0.1, 0.3).unwrap(), 0.2);
        let eta = ewoo_update(&[loss], 1e3, 0.05, 0.4).unwrap();
        assert!((eta - loss.argmin()).abs() < 1e-3, "{eta} vs {}", loss.argmin());
    }

    #[test]
    fn ogd_steps() {
        let space = square();
        let mut rng = crate::rng::stream(0, &[]);
        let s = ogd_round(&space, &[0.5, 0.5], 0, 0.25, &mut rng).unwrap();
        assert!((s.next[0] - 0.25).abs() < 1e-12 && (s.next[1] - 0.5).abs() < 1e-12);
        let s = ogd_round(&space, &[0.1, 0.5], 0, 0.25, &mut rng).unwrap();
        assert!(s.next[0].abs() < 1e-12 && (s.next[1] - 0.5).abs() < 1e-12);
        let s = ogd_round(&space, &[0.1, 0.5], 1, 0.0, &mut rng).unwrap();
        assert_eq!(s.next, vec![0.1, 0.5]);
    }

    #[test]
    fn optimum_is_a_vertex() {
        let ps = square().points;
        assert_eq!(per_task_optimum(&[1.0, 1.0], &ps), vec![0.0, 0.0]);
        assert_eq!(per_task_optimum(&[5.0, 0.0], &ps), vec![0.0, 0.0]);
    }
}
