//! Geometry over the lifted loss space: convex-hull membership, Euclidean
//! projection, sparse convex decompositions, planar facet enumeration and the
//! log-barrier domains used by the bandit learner.

mod barrier;
mod facets;
mod hull;
mod project;

pub use barrier::{BarrierDomain, BarrierEval, DikinSample, DomainKind};
pub use facets::{facets_2d, Facet};
pub use hull::{caratheodory, membership, Decomposition, Membership};
pub use project::{project, Projection};

use crate::error::{Error, Result};

/// A finite point cloud in `ℝᴷ`. Its convex hull is the feasible region of the
/// full-feedback learner.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidPointSet("no points".into()))?;
        if dim == 0 {
            return Err(Error::InvalidPointSet("zero-dimensional points".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidPointSet(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPointSet(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Largest pairwise Euclidean distance.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0_f64;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                d = d.max(crate::linalg::norm2(&crate::linalg::sub(p, q)));
            }
        }
        d
    }

    /// Index of the point minimizing `⟨c, z⟩`; ties go to the
    /// lexicographically smallest point, then the smallest index.
    pub fn argmin_linear(&self, c: &[f64]) -> usize {
        let mut best = 0;
        let mut best_val = crate::linalg::dot(c, &self.points[0]);
        for (i, p) in self.points.iter().enumerate().skip(1) {
            let v = crate::linalg::dot(c, p);
            let tie = (v - best_val).abs() <= 1e-12 * (1.0 + best_val.abs());
            if (!tie && v < best_val) || (tie && lex_less(p, &self.points[best])) {
                best = i;
                best_val = v;
            }
        }
        best
    }

    pub(crate) fn check_dim(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        Ok(())
    }
}

/// Lexicographic order treating coordinates within 1e-12 as equal.
fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() <= 1e-12 {
            continue;
        }
        return x < y;
    }
    false
}
