use super::PointSet;
use crate::error::{Error, Result};

/// Half-plane `⟨normal, z⟩ ≤ offset` with a unit outward normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl Facet {
    pub fn slack(&self, z: &[f64]) -> f64 {
        self.offset - self.normal[0] * z[0] - self.normal[1] * z[1]
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull vertices by Andrew's monotone chain. Collinear
/// boundary points and duplicates are dropped.
pub(crate) fn hull_vertices_2d(ps: &PointSet) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = ps.points().iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let scale = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let eps = 1e-12 * scale * scale;
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Facets of a planar hull, oriented so the interior lies on the `≤` side.
pub fn facets_2d(ps: &PointSet) -> Result<Vec<Facet>> {
    if ps.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: ps.dim(),
        });
    }
    let verts = hull_vertices_2d(ps);
    if verts.len() < 3 {
        return Err(Error::DegenerateHull(format!(
            "{} distinct hull vertices; points are collinear or coincident",
            verts.len()
        )));
    }
    let n = verts.len();
    Ok((0..n)
        .map(|i| {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            // Counter-clockwise order: the outward normal is the edge rotated clockwise.
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = dx.hypot(dy);
            let normal = [dy / len, -dx / len];
            let offset = normal[0] * a[0] + normal[1] * a[1];
            Facet { normal, offset }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_has_four_facets() {
        let ps = PointSet::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
        ])
        .unwrap();
        let f = facets_2d(&ps).unwrap();
        assert_eq!(f.len(), 4);
        for facet in &f {
            assert!(facet.slack(&[0.5, 0.5]) > 0.0);
            assert!((facet.slack(&[0.5, 0.5]) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_is_degenerate() {
        let ps = PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(matches!(facets_2d(&ps), Err(Error::DegenerateHull(_))));
    }
}
