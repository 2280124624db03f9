use super::layout::Layout;
use super::sim::MppPolicy;
use super::spec::MppTask;

/// Occupancy measure over the layout's quadruples.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMeasure {
    pub q: Vec<f64>,
}

impl OccupancyMeasure {
    /// `q(x, ω, a)`.
    pub fn triple(&self, layout: &Layout, x: usize, w: usize, a: usize) -> f64 {
        layout.quads_of(x, w, a).map(|i| self.q[i]).sum()
    }

    /// `q(x, ω)`.
    pub fn pair(&self, layout: &Layout, x: usize, w: usize) -> f64 {
        (0..layout.actions()).map(|a| self.triple(layout, x, w, a)).sum()
    }

    /// `q(x)` for a decision state.
    pub fn state(&self, layout: &Layout, x: usize) -> f64 {
        (0..layout.outcomes()).map(|w| self.pair(layout, x, w)).sum()
    }

    /// Mass entering `x` from the previous layer.
    pub fn inflow(&self, layout: &Layout, x: usize) -> f64 {
        layout
            .quads()
            .iter()
            .zip(&self.q)
            .filter(|((_, _, _, y), _)| *y == x)
            .map(|(_, v)| v)
            .sum()
    }

    /// `φ^q(a | x, ω)`, uniform where `q(x, ω) ≤ 1e-12`.
    pub fn induced_policy(&self, layout: &Layout) -> MppPolicy {
        let na = layout.actions();
        let probs = (0..layout.decision_states())
            .map(|x| {
                (0..layout.outcomes())
                    .map(|w| {
                        let row: Vec<f64> = (0..na).map(|a| self.triple(layout, x, w, a).max(0.0)).collect();
                        let s: f64 = row.iter().sum();
                        if s <= 1e-12 {
                            vec![1.0 / na as f64; na]
                        } else {
                            row.iter().map(|v| v / s).collect()
                        }
                    })
                    .collect()
            })
            .collect();
        MppPolicy { probs }
    }

    /// Largest residual of the validity conditions: layer totals, flow
    /// conservation, and agreement of the induced transition and prior with
    /// the task's on the visited support.
    pub fn validity_residual(&self, layout: &Layout, task: &MppTask) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..layout.horizon() {
            let total: f64 = layout
                .layer(k)
                .map(|x| self.state(layout, x))
                .sum();
            worst = worst.max((total - 1.0).abs());
        }
        for k in 1..layout.horizon() {
            for x in layout.layer(k) {
                worst = worst.max((self.inflow(layout, x) - self.state(layout, x)).abs());
            }
        }
        for x in 0..layout.decision_states() {
            let qx = self.state(layout, x);
            for w in 0..layout.outcomes() {
                let qxw = self.pair(layout, x, w);
                worst = worst.max((qxw - task.prior[x][w] * qx).abs());
                for a in 0..layout.actions() {
                    let qxwa = self.triple(layout, x, w, a);
                    let succ = layout.successors(x);
                    for (j, y) in succ.clone().enumerate() {
                        let v = self.q[layout.quad(x, w, a, y)];
                        worst = worst.max((v - task.transition[x][w][a][j] * qxwa).abs());
                    }
                }
            }
        }
        if self.q.iter().any(|&v| v < 0.0) {
            worst = worst.max(-self.q.iter().copied().fold(0.0, f64::min));
        }
        worst
    }
}

/// Forward recursion `q(x₀) = 1`, `q(x,ω) = q(x)μ(ω|x)`,
/// `q(x,ω,a) = q(x,ω)φ(a|x,ω)`, `q(x,ω,a,x′) = q(x,ω,a)P(x′|x,ω,a)`.
pub fn occupancy_of(layout: &Layout, task: &MppTask, policy: &MppPolicy) -> OccupancyMeasure {
    let mut reach = vec![0.0; layout.states()];
    reach[0] = 1.0;
    let mut q = vec![0.0; layout.num_quads()];
    for k in 0..layout.horizon() {
        for x in layout.layer(k) {
            if reach[x] == 0.0 {
                continue;
            }
            let succ = layout.successors(x);
            for w in 0..layout.outcomes() {
                let qxw = reach[x] * task.prior[x][w];
                for a in 0..layout.actions() {
                    let qxwa = qxw * policy.probs[x][w][a];
                    for (j, y) in succ.clone().enumerate() {
                        let v = qxwa * task.transition[x][w][a][j];
                        q[layout.quad(x, w, a, y)] = v;
                        reach[y] += v;
                    }
                }
            }
        }
    }
    OccupancyMeasure { q }
}
