use super::game::{DirectScheme, ObpGame, ResponseModel};
use crate::error::{Error, Result};
use crate::geom::PointSet;

/// Coordinate-wise affine map `ℓ ↦ (ℓ − min) / span` taking raw losses into
/// `[0, 1]ᴷ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossNormalization {
    pub min: Vec<f64>,
    pub span: Vec<f64>,
}

impl LossNormalization {
    pub fn apply(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.min.iter().zip(&self.span))
            .map(|(v, (lo, s))| {
                let z = (v - lo) / s;
                // Snap round-off at the ends so extreme points are exact.
                if z.abs() < 1e-12 {
                    0.0
                } else if (z - 1.0).abs() < 1e-12 {
                    1.0
                } else {
                    z
                }
            })
            .collect()
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.min.iter().zip(&self.span))
            .map(|(v, (lo, s))| lo + v * s)
            .collect()
    }
}

/// The lifted loss set `ν(𝒫)` of the retained persuasive grid schemes.
///
/// Distinct loss points are kept once; `schemes[j]` is a scheme realizing
/// point `j`, which plays the role of the inverse map `ν†`.
#[derive(Debug, Clone)]
pub struct LossSpace {
    pub points: PointSet,
    pub schemes: Vec<DirectScheme>,
    pub raw: Vec<Vec<f64>>,
    pub normalization: LossNormalization,
    /// Number of candidate schemes on the grid before filtering.
    pub candidates: usize,
    /// Number of persuasive schemes (before merging equal loss points).
    pub retained: usize,
    pub model: ResponseModel,
}

/// All vectors of `parts` nonnegative integers summing to `total`, in
/// lexicographic order.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            rec(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// Number of grid cells `1/g`, rejecting steps that do not divide 1.
pub fn grid_cells(step: f64) -> Result<usize> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::config("grid_step", format!("{step} is not in (0, 1]")));
    }
    let n = (1.0 / step).round();
    if (n * step - 1.0).abs() > 1e-9 {
        return Err(Error::config("grid_step", format!("{step} does not divide 1")));
    }
    Ok(n as usize)
}

/// Every direct scheme whose per-outcome distributions lie on the grid
/// `{0, g, …, 1}`, in a fixed order.
pub fn grid_schemes(game: &ObpGame, step: f64) -> Result<Vec<DirectScheme>> {
    let n = grid_cells(step)?;
    let rows: Vec<Vec<f64>> = compositions(n, game.signals())
        .into_iter()
        .map(|c| c.into_iter().map(|v| v as f64 / n as f64).collect())
        .collect();
    let outcomes = game.outcomes();
    let mut schemes = Vec::new();
    let mut idx = vec![0usize; outcomes];
    loop {
        schemes.push(DirectScheme {
            probs: idx.iter().map(|&i| rows[i].clone()).collect(),
        });
        // Odometer over outcomes, last outcome fastest.
        let mut d = outcomes;
        loop {
            if d == 0 {
                return Ok(schemes);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < rows.len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Enumerates grid schemes, keeps the persuasive ones and lifts them to
/// normalized loss space.
pub fn enumerate_schemes(game: &ObpGame, step: f64, model: ResponseModel) -> Result<LossSpace> {
    game.validate()?;
    let all = grid_schemes(game, step)?;
    let candidates = all.len();
    let kept: Vec<DirectScheme> = all.into_iter().filter(|s| game.is_persuasive(s)).collect();
    if kept.is_empty() {
        return Err(Error::EmptyRetention(step));
    }
    let retained = kept.len();

    let mut raw: Vec<Vec<f64>> = Vec::new();
    let mut schemes = Vec::new();
    for s in kept {
        let l = game.raw_loss(&s, model);
        let dup = raw
            .iter()
            .any(|r| r.iter().zip(&l).all(|(a, b)| (a - b).abs() <= 1e-12));
        if !dup {
            raw.push(l);
            schemes.push(s);
        }
    }

    let k = game.types();
    let mut min = vec![f64::INFINITY; k];
    let mut max = vec![f64::NEG_INFINITY; k];
    for r in &raw {
        for d in 0..k {
            min[d] = min[d].min(r[d]);
            max[d] = max[d].max(r[d]);
        }
    }
    let span = min
        .iter()
        .zip(&max)
        .map(|(lo, hi)| if hi - lo > 1e-12 { hi - lo } else { 1.0 })
        .collect();
    let normalization = LossNormalization { min, span };
    let points = PointSet::new(raw.iter().map(|r| normalization.apply(r)).collect())?;
    Ok(LossSpace {
        points,
        schemes,
        raw,
        normalization,
        candidates,
        retained,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obp::game::judge_prosecutor;

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(4, 4).len(), 35);
        assert_eq!(compositions(1, 4).len(), 4);
        assert!(compositions(3, 3).iter().all(|c| c.iter().sum::<usize>() == 3));
    }

    #[test]
    fn grid_step_must_divide_one() {
        assert_eq!(grid_cells(0.25).unwrap(), 4);
        assert_eq!(grid_cells(0.1).unwrap(), 10);
        assert!(grid_cells(0.3).is_err());
        assert!(grid_cells(0.0).is_err());
    }

    #[test]
    fn deterministic_grid_has_sixteen_candidates() {
        let g = judge_prosecutor();
        assert_eq!(grid_schemes(&g, 1.0).unwrap().len(), 16);
        assert_eq!(grid_schemes(&g, 0.25).unwrap().len(), 1225);
    }

    #[test]
    fn retained_losses_are_normalized() {
        let g = judge_prosecutor();
        let ls = enumerate_schemes(&g, 0.25, ResponseModel::Obedient).unwrap();
        for p in ls.points.points() {
            assert!(p.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
        }
        for s in &ls.schemes {
            assert!(g.is_persuasive(s));
        }
        assert_eq!(ls.points.len(), ls.schemes.len());
    }
}
