use rand::Rng;

use super::Facet;
use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm2, Matrix};
use crate::lp::{self, LinearProgram, Relation, Sense};

/// Minimum slack accepted as strictly interior.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    /// `{u : aᵢ·u ≤ bᵢ}` with barrier `−Σ ln(bᵢ − aᵢ·u)`.
    Polytope { a: Matrix, b: Vec<f64> },
    /// `{u : ‖u‖ ≤ 1}` with barrier `−ln(1 − ‖u‖²)`.
    Ball,
}

/// A barrier-equipped convex domain.
///
/// Points handed to the barrier methods are in *domain coordinates* `u`. The
/// loss space is reached through `z = offset + scale · u`; for a polytope
/// this map is the identity, for the ball geometry it places the unit ball
/// inside the hull.
#[derive(Debug, Clone)]
pub struct BarrierDomain {
    kind: DomainKind,
    dim: usize,
    theta: f64,
    center: Vec<f64>,
    offset: Vec<f64>,
    scale: f64,
}

#[derive(Debug, Clone)]
pub struct BarrierEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Matrix,
}

#[derive(Debug, Clone)]
pub struct DikinSample {
    pub point: Vec<f64>,
    pub axis: usize,
    pub sign: f64,
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
}

impl BarrierDomain {
    pub fn polytope(a: Matrix, b: Vec<f64>) -> Result<Self> {
        let dim = a.first().map_or(0, Vec::len);
        if a.is_empty() || dim == 0 || a.len() != b.len() || a.iter().any(|r| r.len() != dim) {
            return Err(Error::DegenerateHull("malformed facet description".into()));
        }
        let (cheb, radius) = chebyshev_center(&a, &b)?;
        if radius <= 1e-10 {
            return Err(Error::DegenerateHull(format!(
                "polytope has empty interior (inscribed radius {radius:e})"
            )));
        }
        let mut dom = Self {
            theta: a.len() as f64,
            kind: DomainKind::Polytope { a, b },
            dim,
            center: cheb.clone(),
            offset: vec![0.0; dim],
            scale: 1.0,
        };
        dom.center = dom.analytic_center(cheb)?;
        Ok(dom)
    }

    pub fn from_facets(facets: &[Facet]) -> Result<Self> {
        let a = facets.iter().map(|f| f.normal.to_vec()).collect();
        let b = facets.iter().map(|f| f.offset).collect();
        Self::polytope(a, b)
    }

    /// The exact unit ball in `ℝᴷ`.
    pub fn unit_ball(dim: usize) -> Self {
        Self {
            kind: DomainKind::Ball,
            dim,
            theta: 1.0,
            center: vec![0.0; dim],
            offset: vec![0.0; dim],
            scale: 1.0,
        }
    }

    /// Ball geometry for a polytope: the unit ball in domain coordinates is
    /// mapped onto the largest ball inscribed in `{aᵢ·z ≤ bᵢ}`, so every
    /// domain point corresponds to a hull point.
    pub fn inscribed_ball(a: &Matrix, b: &[f64]) -> Result<Self> {
        let (c, r) = chebyshev_center(a, b)?;
        if r <= 1e-10 {
            return Err(Error::DegenerateHull(format!("inscribed radius {r:e}")));
        }
        let dim = c.len();
        Ok(Self {
            kind: DomainKind::Ball,
            dim,
            theta: 1.0,
            center: vec![0.0; dim],
            offset: c,
            scale: r,
        })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.kind, DomainKind::Ball)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Self-concordance parameter ϑ.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Minimizer of the barrier, in domain coordinates.
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn affine_map(&self) -> (&[f64], f64) {
        (&self.offset, self.scale)
    }

    pub fn to_space(&self, u: &[f64]) -> Vec<f64> {
        linalg::axpy(&self.offset, self.scale, u)
    }

    pub fn to_domain(&self, z: &[f64]) -> Vec<f64> {
        linalg::scale(&linalg::sub(z, &self.offset), 1.0 / self.scale)
    }

    /// Smallest constraint slack at `u` (negative outside).
    pub fn min_slack(&self, u: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Polytope { a, b } => a
                .iter()
                .zip(b)
                .map(|(row, bi)| bi - dot(row, u))
                .fold(f64::INFINITY, f64::min),
            DomainKind::Ball => 1.0 - dot(u, u),
        }
    }

    pub fn is_interior(&self, u: &[f64]) -> bool {
        self.min_slack(u) > BOUNDARY_TOL
    }

    fn check_interior(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        let slack = self.min_slack(u);
        if slack.is_nan() || slack <= BOUNDARY_TOL {
            return Err(Error::Boundary { slack });
        }
        Ok(())
    }

    pub fn value(&self, u: &[f64]) -> Result<f64> {
        self.check_interior(u)?;
        Ok(match &self.kind {
            DomainKind::Polytope { a, b } => a
                .iter()
                .zip(b)
                .map(|(row, bi)| -(bi - dot(row, u)).ln())
                .sum(),
            DomainKind::Ball => -(1.0 - dot(u, u)).ln(),
        })
    }

    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_interior(u)?;
        Ok(match &self.kind {
            DomainKind::Polytope { a, b } => {
                let mut g = vec![0.0; self.dim];
                for (row, bi) in a.iter().zip(b) {
                    let s = bi - dot(row, u);
                    for (gj, aj) in g.iter_mut().zip(row) {
                        *gj += aj / s;
                    }
                }
                g
            }
            DomainKind::Ball => linalg::scale(u, 2.0 / (1.0 - dot(u, u))),
        })
    }

    pub fn hessian(&self, u: &[f64]) -> Result<Matrix> {
        self.check_interior(u)?;
        let n = self.dim;
        let mut h = vec![vec![0.0; n]; n];
        match &self.kind {
            DomainKind::Polytope { a, b } => {
                for (row, bi) in a.iter().zip(b) {
                    let s = bi - dot(row, u);
                    let s2 = s * s;
                    for i in 0..n {
                        for j in 0..n {
                            h[i][j] += row[i] * row[j] / s2;
                        }
                    }
                }
            }
            DomainKind::Ball => {
                let d = 1.0 - dot(u, u);
                for i in 0..n {
                    for j in 0..n {
                        h[i][j] = 4.0 * u[i] * u[j] / (d * d);
                    }
                    h[i][i] += 2.0 / d;
                }
            }
        }
        Ok(h)
    }

    pub fn eval(&self, u: &[f64]) -> Result<BarrierEval> {
        Ok(BarrierEval {
            value: self.value(u)?,
            gradient: self.gradient(u)?,
            hessian: self.hessian(u)?,
        })
    }

    /// `D_R(x‖y) = R(x) − R(y) − ⟨∇R(y), x − y⟩`.
    pub fn bregman(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let gy = self.gradient(y)?;
        Ok(self.value(x)? - self.value(y)? - dot(&gy, &linalg::sub(x, y)))
    }

    /// `‖h‖_u = √(hᵀ ∇²R(u) h)`.
    pub fn local_norm(&self, u: &[f64], h: &[f64]) -> Result<f64> {
        let hess = self.hessian(u)?;
        Ok(dot(h, &linalg::mat_vec(&hess, h)).max(0.0).sqrt())
    }

    /// `‖g‖_{u,*} = √(gᵀ ∇²R(u)⁻¹ g)`.
    pub fn dual_local_norm(&self, u: &[f64], g: &[f64]) -> Result<f64> {
        let hess = self.hessian(u)?;
        let x = linalg::solve(&hess, g).ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
        Ok(dot(g, &x).max(0.0).sqrt())
    }

    /// Minkowski gauge `π_{anchor}(u)`: the smallest λ > 0 with
    /// `anchor + (u − anchor)/λ` in the domain. Zero at the anchor.
    pub fn gauge(&self, anchor: &[f64], u: &[f64]) -> f64 {
        let d = linalg::sub(u, anchor);
        match &self.kind {
            DomainKind::Polytope { a, b } => a
                .iter()
                .zip(b)
                .map(|(row, bi)| dot(row, &d) / (bi - dot(row, anchor)))
                .fold(0.0, f64::max),
            DomainKind::Ball => {
                let dd = dot(&d, &d);
                if dd == 0.0 {
                    return 0.0;
                }
                // ‖anchor + s d‖ = 1 has the positive root s; π = 1/s.
                let ad = dot(anchor, &d);
                let aa = dot(anchor, anchor);
                let disc = (ad * ad - dd * (aa - 1.0)).max(0.0);
                let s = (-ad + disc.sqrt()) / dd;
                1.0 / s
            }
        }
    }

    /// Gauge bound defining the b-restricted set `{u : π(u) ≤ bound}`.
    ///
    /// The general definition uses `1/(1+b)`. On the exact ball geometry the
    /// restricted set is `{‖u‖ ≤ 1 − b}` so that the optimum keeps its
    /// closed form `−(1−b) ℓ/‖ℓ‖`.
    pub fn restricted_bound(&self, b: f64) -> f64 {
        match self.kind {
            DomainKind::Polytope { .. } => 1.0 / (1.0 + b),
            DomainKind::Ball => 1.0 - b,
        }
    }

    /// Pulls `u` toward the barrier minimizer until it lies in the
    /// b-restricted set. Points already inside are returned unchanged.
    pub fn pull_into_restricted(&self, b: f64, u: &[f64]) -> Vec<f64> {
        let bound = self.restricted_bound(b);
        let pi = self.gauge(&self.center, u);
        if pi <= bound {
            return u.to_vec();
        }
        linalg::axpy(&self.center, bound / pi, &linalg::sub(u, &self.center))
    }

    /// `argmin ⟨ℓ, u⟩` over the b-restricted set anchored at the barrier
    /// minimizer. Returns the anchor when `‖ℓ‖ < 1e-12`.
    pub fn opt_b(&self, b: f64, loss: &[f64]) -> Result<Vec<f64>> {
        let anchor = &self.center;
        let norm = norm2(loss);
        if norm < 1e-12 {
            return Ok(anchor.clone());
        }
        match &self.kind {
            DomainKind::Ball => Ok(linalg::axpy(
                anchor,
                -(1.0 - b) / norm,
                loss,
            )),
            DomainKind::Polytope { a, b: rhs } => {
                // aᵢ·(z₁ + (1+b)(u − z₁)) ≤ bᵢ  ⇔  (1+b) aᵢ·u ≤ bᵢ + b aᵢ·z₁.
                let mut prog = LinearProgram::new(Sense::Minimize, loss.to_vec());
                for j in 0..self.dim {
                    prog.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY);
                }
                for (row, bi) in a.iter().zip(rhs) {
                    prog.add_constraint(
                        linalg::scale(row, 1.0 + b),
                        Relation::Le,
                        bi + b * dot(row, anchor),
                    );
                }
                let sol = lp::solve(&prog)?;
                if !sol.is_optimal() {
                    return Err(Error::NumericalBreakdown(format!(
                        "restricted optimum reported {:?}",
                        sol.status
                    )));
                }
                Ok(sol.x)
            }
        }
    }

    /// Samples a point on the unit Dikin ellipsoid along a random principal
    /// axis: `y = u + ε v_j^{-1/2} e_j`.
    pub fn dikin_sample<R: Rng + ?Sized>(&self, u: &[f64], rng: &mut R) -> Result<DikinSample> {
        let hess = self.hessian(u)?;
        let (values, vectors) = linalg::symmetric_eigen(&hess);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min.is_nan() || min <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        let axis = rng.gen_range(0..self.dim);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let v = values[axis];
        let e = vectors[axis].clone();
        let point = linalg::axpy(u, sign / v.sqrt(), &e);
        Ok(DikinSample {
            point,
            axis,
            sign,
            eigenvalue: v,
            eigenvector: e,
        })
    }

    /// Mirror step `argmin_z {η⟨ℓ, z⟩ + D_R(z, u)}`, i.e. the solution of
    /// `∇R(z) = ∇R(u) − ηℓ`, by damped Newton.
    pub fn mirror_step(&self, u: &[f64], loss: &[f64], eta: f64) -> Result<Vec<f64>> {
        let target = linalg::axpy(&self.gradient(u)?, -eta, loss);
        self.solve_gradient(u.to_vec(), &target)
    }

    /// Finds `z` with `∇R(z) = target`, starting from the interior point `z`.
    fn solve_gradient(&self, mut z: Vec<f64>, target: &[f64]) -> Result<Vec<f64>> {
        const MAX_ITER: usize = 200;
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITER {
            let r = linalg::sub(&self.gradient(&z)?, target);
            residual = linalg::norm_inf(&r);
            if residual <= 1e-10 {
                return Ok(z);
            }
            let hess = self.hessian(&z)?;
            let step = linalg::solve(&hess, &r).ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
            let decrement = dot(&r, &step).max(0.0).sqrt();
            let mut t = if decrement > 0.25 { 1.0 / (1.0 + decrement) } else { 1.0 };
            let mut next = linalg::axpy(&z, -t, &step);
            let mut halvings = 0;
            while !self.is_interior(&next) {
                t *= 0.5;
                halvings += 1;
                if halvings > 60 {
                    return Err(Error::NewtonDivergence {
                        iterations: MAX_ITER,
                        residual,
                    });
                }
                next = linalg::axpy(&z, -t, &step);
            }
            z = next;
        }
        Err(Error::NewtonDivergence {
            iterations: MAX_ITER,
            residual,
        })
    }

    fn analytic_center(&self, start: Vec<f64>) -> Result<Vec<f64>> {
        self.solve_gradient(start, &vec![0.0; self.dim])
    }
}

/// Center and radius of the largest Euclidean ball inside `{aᵢ·z ≤ bᵢ}`.
pub(crate) fn chebyshev_center(a: &Matrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let dim = a.first().map_or(0, Vec::len);
    let mut cost = vec![0.0; dim + 1];
    cost[dim] = 1.0;
    let mut prog = LinearProgram::new(Sense::Maximize, cost);
    for j in 0..dim {
        prog.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY);
    }
    for (row, bi) in a.iter().zip(b) {
        let mut coeffs = row.clone();
        coeffs.push(norm2(row));
        prog.add_constraint(coeffs, Relation::Le, *bi);
    }
    let sol = lp::solve(&prog)?;
    if !sol.is_optimal() {
        return Err(Error::DegenerateHull(format!(
            "inscribed-ball program is {:?}",
            sol.status
        )));
    }
    Ok((sol.x[..dim].to_vec(), sol.x[dim]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn unit_square() -> BarrierDomain {
        BarrierDomain::polytope(
            vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
            vec![1.0, 0.0, 1.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn ball_at_center() {
        let d = BarrierDomain::unit_ball(2);
        let e = d.eval(&[0.0, 0.0]).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.gradient, vec![0.0, 0.0]);
        assert_eq!(e.hessian, vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
    }

    #[test]
    fn square_center() {
        let d = unit_square();
        assert!((d.center()[0] - 0.5).abs() < 1e-12);
        let e = d.eval(&[0.5, 0.5]).unwrap();
        assert!((e.value + 4.0 * 0.5_f64.ln()).abs() < 1e-14);
        assert!(linalg::norm_inf(&e.gradient) < 1e-14);
        assert_eq!(d.theta(), 4.0);
    }

    #[test]
    fn boundary_rejected() {
        let d = unit_square();
        assert!(matches!(d.value(&[1.0, 0.5]), Err(Error::Boundary { .. })));
        let b = BarrierDomain::unit_ball(2);
        assert!(matches!(b.gradient(&[1.0, 0.0]), Err(Error::Boundary { .. })));
    }

    #[test]
    fn gauge_examples() {
        let d = unit_square();
        assert_eq!(d.gauge(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert!((d.gauge(&[0.5, 0.5], &[1.0, 0.5]) - 1.0).abs() < 1e-12);
        let b = BarrierDomain::unit_ball(2);
        assert!((b.gauge(&[0.0, 0.0], &[0.3, 0.4]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn opt_b_closed_forms() {
        let b = BarrierDomain::unit_ball(2);
        let o = b.opt_b(0.1, &[1.0, 0.0]).unwrap();
        assert!((o[0] + 0.9).abs() < 1e-15 && o[1] == 0.0);
        assert_eq!(b.opt_b(0.1, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);

        let d = unit_square();
        let o = d.opt_b(0.5, &[1.0, 1.0]).unwrap();
        assert!((o[0] - 1.0 / 6.0).abs() < 1e-9 && (o[1] - 1.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn dikin_at_ball_center() {
        let d = BarrierDomain::unit_ball(3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let s = d.dikin_sample(&[0.0, 0.0, 0.0], &mut rng).unwrap();
        assert!((s.eigenvalue - 2.0).abs() < 1e-12);
        assert!((norm2(&s.point) - 0.5_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_loss_is_a_fixed_point() {
        let d = unit_square();
        let u = [0.3, 0.8];
        let next = d.mirror_step(&u, &[0.0, 0.0], 0.1).unwrap();
        assert_eq!(next, u.to_vec());
    }

    #[test]
    fn ball_step_matches_closed_form() {
        let d = BarrierDomain::unit_ball(2);
        let loss = [0.6, -0.8];
        let eta = 0.7;
        let next = d.mirror_step(&[0.0, 0.0], &loss, eta).unwrap();
        let g = linalg::scale(&loss, -eta);
        let gn = norm2(&g);
        let t = ((1.0 + gn * gn).sqrt() - 1.0) / gn;
        for (n, gi) in next.iter().zip(&g) {
            assert!((n - t * gi / gn).abs() < 1e-9);
        }
    }

    #[test]
    fn inscribed_ball_fits_square() {
        let d = BarrierDomain::inscribed_ball(
            &vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
            &[1.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let (c, r) = d.affine_map();
        assert!((c[0] - 0.5).abs() < 1e-12 && (r - 0.5).abs() < 1e-12);
        assert_eq!(d.to_space(&[1.0, 0.0]), vec![1.0, 0.5]);
    }
}
