use super::PointSet;
use crate::error::{Error, Result};
use crate::linalg::{self, norm_inf};
use crate::lp::{self, LinearProgram, Relation, Sense, FEAS_TOL};

/// Outcome of a hull membership query.
#[derive(Debug, Clone)]
pub enum Membership {
    /// `z = Σ λⱼ zⱼ` with `λ` on the simplex (one weight per point).
    Inside { weights: Vec<f64> },
    /// `⟨normal, z⟩ > offset ≥ ⟨normal, zⱼ⟩` for every point.
    Outside { normal: Vec<f64>, offset: f64, residual: f64 },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside { .. })
    }
}

/// Solves `min ‖s‖₁` subject to `Σ λⱼ zⱼ + s = z`, `Σ λⱼ = 1`, `λ ≥ 0`. A zero
/// optimum certifies membership; otherwise the row multipliers of the
/// coordinate equalities give a separating direction.
pub fn membership(ps: &PointSet, z: &[f64]) -> Result<Membership> {
    ps.check_dim(z)?;
    let n = ps.len();
    let k = ps.dim();
    let mut cost = vec![0.0; n + 2 * k];
    for c in cost.iter_mut().skip(n) {
        *c = 1.0;
    }
    let mut prog = LinearProgram::new(Sense::Minimize, cost);
    for d in 0..k {
        let mut row = vec![0.0; n + 2 * k];
        for (j, p) in ps.points().iter().enumerate() {
            row[j] = p[d];
        }
        row[n + d] = 1.0;
        row[n + k + d] = -1.0;
        prog.add_constraint(row, Relation::Eq, z[d]);
    }
    let mut row = vec![0.0; n + 2 * k];
    row[..n].fill(1.0);
    prog.add_constraint(row, Relation::Eq, 1.0);

    let sol = lp::solve(&prog)?;
    if !sol.is_optimal() {
        return Err(Error::NumericalBreakdown("membership program not solved to optimality".into()));
    }
    if sol.objective <= FEAS_TOL {
        let weights = sol.x[..n].to_vec();
        return Ok(Membership::Inside { weights });
    }
    // Dual: max ⟨y, z⟩ + y₀ s.t. ⟨y, zⱼ⟩ + y₀ ≤ 0, |y| ≤ 1.
    let normal = sol.duals[..k].to_vec();
    let offset = -sol.duals[k];
    Ok(Membership::Outside {
        normal,
        offset,
        residual: sol.objective,
    })
}

/// A convex combination of at most `K + 1` points of a [`PointSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl Decomposition {
    pub fn support(&self) -> usize {
        self.indices.len()
    }

    pub fn reconstruct(&self, ps: &PointSet) -> Vec<f64> {
        let mut out = vec![0.0; ps.dim()];
        for (&i, &w) in self.indices.iter().zip(&self.weights) {
            for (o, v) in out.iter_mut().zip(ps.point(i)) {
                *o += w * v;
            }
        }
        out
    }

    /// Draws an index of the point set with probability equal to its weight.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (&i, &w) in self.indices.iter().zip(&self.weights) {
            acc += w;
            if u < acc {
                return i;
            }
        }
        *self.indices.last().expect("decomposition is never empty")
    }
}

const WEIGHT_FLOOR: f64 = 1e-13;

/// Writes a hull point as a convex combination of at most `K + 1` points.
///
/// Any feasible weight vector is reduced by repeatedly moving along an affine
/// dependency of the supporting points until one weight hits zero, then the
/// surviving weights are refit by least squares to squeeze out round-off.
pub fn caratheodory(ps: &PointSet, z: &[f64]) -> Result<Decomposition> {
    let weights = match membership(ps, z)? {
        Membership::Inside { weights } => weights,
        Membership::Outside { residual, .. } => return Err(Error::InfeasibleTarget { residual }),
    };
    let k = ps.dim();
    let mut support: Vec<(usize, f64)> = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > WEIGHT_FLOOR)
        .map(|(i, &w)| (i, w))
        .collect();
    if support.is_empty() {
        return Err(Error::InfeasibleTarget { residual: f64::NAN });
    }

    loop {
        // Columns [zⱼ; 1] of the supporting points.
        let a: Vec<Vec<f64>> = (0..=k)
            .map(|d| {
                support
                    .iter()
                    .map(|&(j, _)| if d < k { ps.point(j)[d] } else { 1.0 })
                    .collect()
            })
            .collect();
        let null = linalg::null_space(&a, 1e-12);
        let Some(dir) = null.into_iter().next() else {
            break;
        };
        // Step t along -dir until the first weight with positive dir reaches zero.
        let mut t = f64::INFINITY;
        let mut hit = 0;
        for (idx, (&(_, w), &d)) in support.iter().zip(&dir).enumerate() {
            if d > 1e-14 && w / d < t {
                t = w / d;
                hit = idx;
            }
        }
        if !t.is_finite() {
            // dir has no positive entry: flip it (it is a null vector either way).
            let flipped: Vec<f64> = dir.iter().map(|d| -d).collect();
            for (idx, (&(_, w), &d)) in support.iter().zip(&flipped).enumerate() {
                if d > 1e-14 && w / d < t {
                    t = w / d;
                    hit = idx;
                }
            }
            for ((_, w), d) in support.iter_mut().zip(&flipped) {
                *w -= t * d;
            }
        } else {
            for ((_, w), d) in support.iter_mut().zip(&dir) {
                *w -= t * d;
            }
        }
        support[hit].1 = 0.0;
        support.retain(|&(_, w)| w > WEIGHT_FLOOR);
    }

    refit(ps, z, &mut support);
    let total: f64 = support.iter().map(|&(_, w)| w).sum();
    let dec = Decomposition {
        indices: support.iter().map(|&(i, _)| i).collect(),
        weights: support.iter().map(|&(_, w)| w / total).collect(),
    };
    let err = norm_inf(&linalg::sub(&dec.reconstruct(ps), z));
    if err > 1e-9 {
        return Err(Error::InfeasibleTarget { residual: err });
    }
    Ok(dec)
}

/// Least-squares refit of the weights on a fixed, affinely independent
/// support. Kept only when every refit weight stays nonnegative and the
/// reconstruction improves.
fn refit(ps: &PointSet, z: &[f64], support: &mut [(usize, f64)]) {
    let k = ps.dim();
    let a: Vec<Vec<f64>> = (0..=k)
        .map(|d| {
            support
                .iter()
                .map(|&(j, _)| if d < k { ps.point(j)[d] } else { 1.0 })
                .collect()
        })
        .collect();
    let mut rhs = z.to_vec();
    rhs.push(1.0);
    let residual = |w: &[f64]| -> f64 {
        a.iter()
            .zip(&rhs)
            .map(|(row, b)| (linalg::dot(row, w) - b).abs())
            .fold(0.0, f64::max)
    };
    let current: Vec<f64> = support.iter().map(|&(_, w)| w).collect();
    if let Some(w) = linalg::least_squares(&a, &rhs) {
        if w.iter().all(|&v| v >= 0.0) && residual(&w) <= residual(&current) {
            for ((_, old), new) in support.iter_mut().zip(w) {
                *old = new;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PointSet {
        PointSet::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn vertex_has_unit_mass() {
        let ps = square();
        let d = caratheodory(&ps, &[1.0, 1.0]).unwrap();
        assert_eq!(d.indices, vec![2]);
        assert!((d.weights[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn edge_midpoint_uses_two_points() {
        let ps = square();
        let d = caratheodory(&ps, &[0.5, 0.0]).unwrap();
        assert_eq!(d.support(), 2);
        for w in &d.weights {
            assert!((w - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn centroid_needs_three() {
        let ps = square();
        let d = caratheodory(&ps, &[0.5, 0.5]).unwrap();
        assert!(d.support() <= 3);
        assert!(d.weights.iter().all(|&w| w > 0.0));
        assert!(norm_inf(&linalg::sub(&d.reconstruct(&ps), &[0.5, 0.5])) < 1e-12);
    }

    #[test]
    fn outside_point_is_separated() {
        let ps = square();
        let z = [2.5, 0.5];
        match membership(&ps, &z).unwrap() {
            Membership::Outside { normal, offset, .. } => {
                assert!(linalg::dot(&normal, &z) > offset + 1e-9);
                for p in ps.points() {
                    assert!(linalg::dot(&normal, p) <= offset + 1e-9);
                }
            }
            Membership::Inside { .. } => panic!("point should be outside"),
        }
        assert!(matches!(
            caratheodory(&ps, &z),
            Err(Error::InfeasibleTarget { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let ps = square();
        assert!(matches!(
            membership(&ps, &[0.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
