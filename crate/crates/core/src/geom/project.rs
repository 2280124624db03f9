use super::PointSet;
use crate::error::Result;
use crate::linalg::{self, dot};

/// Euclidean projection onto a hull, with the active face that produced it.
#[derive(Debug, Clone)]
pub struct Projection {
    pub point: Vec<f64>,
    /// Indices of the corral (affinely independent active points).
    pub active: Vec<usize>,
    pub weights: Vec<f64>,
    pub major_cycles: usize,
}

/// Relative duality-gap target for the minimum-norm-point iteration.
///
/// The gap `‖w‖² − min ⟨w, pⱼ⟩` bounds the *squared* distance to the optimum,
/// so a 1e-9 target would only give ~3e-5 accuracy in the point itself.
const GAP_TOL: f64 = 1e-15;

/// Projects `x` onto `conv(ps)` with Wolfe's minimum-norm-point algorithm run
/// on the translated points `zⱼ − x`.
pub fn project(ps: &PointSet, x: &[f64]) -> Result<Projection> {
    ps.check_dim(x)?;
    let p: Vec<Vec<f64>> = ps.points().iter().map(|z| linalg::sub(z, x)).collect();
    let scale = p.iter().map(|v| dot(v, v)).fold(0.0_f64, f64::max).max(1e-300);

    let start = (0..p.len())
        .min_by(|&a, &b| dot(&p[a], &p[a]).total_cmp(&dot(&p[b], &p[b])))
        .expect("point set is nonempty");
    let mut corral = vec![start];
    let mut w = vec![1.0];
    let mut cycles = 0;
    let max_cycles = 10 * p.len().max(1);

    let combine = |corral: &[usize], w: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (&i, &wi) in corral.iter().zip(w) {
            for (o, v) in out.iter_mut().zip(&p[i]) {
                *o += wi * v;
            }
        }
        out
    };

    while cycles < max_cycles {
        cycles += 1;
        let y = combine(&corral, &w);
        let yy = dot(&y, &y);
        if yy <= 1e-30 * scale {
            break;
        }
        let (j, yj) = (0..p.len())
            .map(|j| (j, dot(&y, &p[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if yy - yj <= GAP_TOL * scale || corral.contains(&j) {
            break;
        }
        corral.push(j);
        w.push(0.0);

        // Minor cycles: move toward the affine minimizer of the corral,
        // dropping points whose weight would turn negative.
        loop {
            let Some(v) = affine_min_norm(&p, &corral) else {
                // Numerically dependent corral: drop the newest point and stop.
                corral.pop();
                w.pop();
                break;
            };
            if v.iter().all(|&vi| vi > 1e-14) {
                w = v;
                break;
            }
            let mut theta = 1.0_f64;
            for (&wi, &vi) in w.iter().zip(&v) {
                if vi <= 1e-14 && wi - vi > 0.0 {
                    theta = theta.min(wi / (wi - vi));
                }
            }
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi = (1.0 - theta) * *wi + theta * vi;
            }
            let keep: Vec<bool> = w.iter().map(|&wi| wi > 1e-14).collect();
            if keep.iter().all(|&k| k) {
                // theta was clamped by round-off; remove the smallest weight.
                let min = (0..w.len()).min_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
                corral.remove(min);
                w.remove(min);
            } else {
                let mut idx = 0;
                corral.retain(|_| {
                    idx += 1;
                    keep[idx - 1]
                });
                w.retain(|&wi| wi > 1e-14);
            }
            let total: f64 = w.iter().sum();
            for wi in w.iter_mut() {
                *wi /= total;
            }
        }
    }

    let y = combine(&corral, &w);
    Ok(Projection {
        point: linalg::add(x, &y),
        active: corral,
        weights: w,
        major_cycles: cycles,
    })
}

/// Weights of the minimum-norm point of the affine hull of `p[corral]`:
/// solves `[G 1; 1ᵀ 0][v; μ] = [0; 1]` with `G` the Gram matrix.
fn affine_min_norm(p: &[Vec<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let n = corral.len();
    let mut m = vec![vec![0.0; n + 1]; n + 1];
    for (a, &i) in corral.iter().enumerate() {
        for (b, &j) in corral.iter().enumerate() {
            m[a][b] = dot(&p[i], &p[j]);
        }
        m[a][n] = 1.0;
        m[n][a] = 1.0;
    }
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    let sol = linalg::solve(&m, &rhs)?;
    let v = sol[..n].to_vec();
    v.iter().all(|x| x.is_finite()).then_some(v)
}
