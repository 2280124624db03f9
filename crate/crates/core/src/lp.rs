//! Dense two-phase primal simplex.
//!
//! Problems here are tiny (a few hundred columns at most), so the solver keeps
//! a full tableau and favours robustness: Dantzig pricing, with a permanent
//! switch to Bland's rule once `2 (n + m)` consecutive degenerate pivots have
//! been made in a phase.

use crate::error::{Error, Result};

/// Absolute primal/dual feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-8;
const OPT_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-9;
const BREAKDOWN_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// A program over `objective.len()` variables, each bounded to `[0, ∞)`.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    /// Sparse helper: `terms` lists `(column, coefficient)` pairs; repeated
    /// columns accumulate.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) -> &mut Self {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, v) in terms {
            coeffs[j] += v;
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::MalformedLp("no variables".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedLp("non-finite objective coefficient".into()));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::MalformedLp("bound vectors have wrong length".into()));
        }
        for (j, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::MalformedLp(format!("invalid bounds on variable {j}")));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::MalformedLp(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::MalformedLp(format!("row {i} has non-finite entries")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for ((&v, &lo), &hi) in x.iter().zip(&self.lower).zip(&self.upper) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point (original variables). Empty unless optimal.
    pub x: Vec<f64>,
    /// Objective value in the program's own sense. NaN unless optimal.
    pub objective: f64,
    /// Row multipliers, one per constraint, for the program as posed: at an
    /// optimum `objective = Σ rhs_i · duals_i + (bound terms)`.
    pub duals: Vec<f64>,
    /// Objective of the dual solution read off the final basis, including the
    /// contribution of variable bounds.
    pub dual_objective: f64,
    /// Most negative reduced cost at termination (0 when dual feasible).
    pub dual_infeasibility: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn non_optimal(status: LpStatus, rows: usize) -> Self {
        Self {
            status,
            x: Vec::new(),
            objective: f64::NAN,
            duals: vec![0.0; rows],
            dual_objective: f64::NAN,
            dual_infeasibility: f64::NAN,
        }
    }
}

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lo + y`
    Shift { col: usize, lo: f64 },
    /// `x = hi - y`
    Mirror { col: usize, hi: f64 },
    /// `x = y⁺ - y⁻`
    Free { pos: usize, neg: usize },
}

struct StandardForm {
    /// Rows over the standard columns, rhs made nonnegative.
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    rel: Vec<Relation>,
    /// +1 or -1: the factor applied to the generating row.
    sign: Vec<f64>,
    /// Which original constraint a row came from (`None` for bound rows).
    origin: Vec<Option<usize>>,
    cost: Vec<f64>,
    cost_offset: f64,
    maps: Vec<VarMap>,
    ncols: usize,
}

fn standardize(lp: &LinearProgram) -> StandardForm {
    let n = lp.num_vars();
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let m = if lo.is_finite() {
            VarMap::Shift { col: ncols, lo }
        } else if hi.is_finite() {
            VarMap::Mirror { col: ncols, hi }
        } else {
            ncols += 1;
            VarMap::Free {
                pos: ncols - 1,
                neg: ncols,
            }
        };
        ncols += 1;
        maps.push(m);
    }

    // Expresses sum_j a_j x_j as sum over columns plus a constant.
    let lift = |coeffs: &[f64]| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; ncols];
        let mut constant = 0.0;
        for (a, m) in coeffs.iter().zip(&maps) {
            match *m {
                VarMap::Shift { col, lo } => {
                    out[col] += a;
                    constant += a * lo;
                }
                VarMap::Mirror { col, hi } => {
                    out[col] -= a;
                    constant += a * hi;
                }
                VarMap::Free { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        (out, constant)
    };

    let mut sf = StandardForm {
        rows: Vec::new(),
        rhs: Vec::new(),
        rel: Vec::new(),
        sign: Vec::new(),
        origin: Vec::new(),
        cost: Vec::new(),
        cost_offset: 0.0,
        maps: maps.clone(),
        ncols,
    };
    let push = |sf: &mut StandardForm, row: Vec<f64>, rel: Relation, rhs: f64, origin: Option<usize>| {
        let (row, rel, rhs, sign) = if rhs < 0.0 {
            let flipped = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            (row.iter().map(|v| -v).collect(), flipped, -rhs, -1.0)
        } else {
            (row, rel, rhs, 1.0)
        };
        sf.rows.push(row);
        sf.rel.push(rel);
        sf.rhs.push(rhs);
        sf.sign.push(sign);
        sf.origin.push(origin);
    };

    for (i, c) in lp.constraints.iter().enumerate() {
        let (row, constant) = lift(&c.coeffs);
        push(&mut sf, row, c.relation, c.rhs - constant, Some(i));
    }
    for (j, m) in maps.iter().enumerate() {
        if let VarMap::Shift { col, lo } = *m {
            let hi = lp.upper[j];
            if hi.is_finite() {
                let mut row = vec![0.0; ncols];
                row[col] = 1.0;
                push(&mut sf, row, Relation::Le, hi - lo, None);
            }
        }
    }

    let dir = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let obj: Vec<f64> = lp.objective.iter().map(|c| dir * c).collect();
    let (cost, offset) = lift(&obj);
    sf.cost = cost;
    sf.cost_offset = offset;
    sf
}

struct Tableau {
    /// rows × (cols + 1); last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced costs over all columns; last entry is minus the objective.
    obj: Vec<f64>,
    cols: usize,
    allowed: Vec<bool>,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.t[r][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        self.t[r][c] = 1.0;
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
        }
        for row in self.t.iter_mut() {
            let last = row.len() - 1;
            if row[last].abs() < 1e-13 {
                row[last] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Sets the reduced-cost row for `cost` given the current basis.
    fn price(&mut self, cost: &[f64]) {
        let mut obj = cost.to_vec();
        obj.push(0.0);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (o, v) in obj.iter_mut().zip(&self.t[r]) {
                    *o -= cb * v;
                }
            }
        }
        self.obj = obj;
    }

    fn run(&mut self) -> Result<PhaseOutcome> {
        let m = self.t.len();
        let degenerate_limit = 2 * (self.cols + m);
        let mut degenerate_run = 0usize;
        let mut bland = false;
        for _ in 0..MAX_ITERATIONS {
            let entering = if bland {
                (0..self.cols).find(|&j| self.allowed[j] && self.obj[j] < -OPT_TOL)
            } else {
                (0..self.cols)
                    .filter(|&j| self.allowed[j] && self.obj[j] < -OPT_TOL)
                    .min_by(|&a, &b| self.obj[a].total_cmp(&self.obj[b]))
            };
            let Some(c) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };

            let mut best: Option<(usize, f64)> = None;
            let mut tiny_candidate = false;
            for r in 0..m {
                let a = self.t[r][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            let better = if ratio < bratio - 1e-12 {
                                true
                            } else if ratio <= bratio + 1e-12 {
                                if bland {
                                    self.basis[r] < self.basis[br]
                                } else {
                                    a > self.t[br][c]
                                }
                            } else {
                                false
                            };
                            if better {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                } else if a > BREAKDOWN_TOL {
                    tiny_candidate = true;
                }
            }
            let Some((r, ratio)) = best else {
                if tiny_candidate {
                    if bland {
                        return Err(Error::NumericalBreakdown(format!(
                            "only pivots below {PIVOT_TOL:e} remain in column {c}"
                        )));
                    }
                    bland = true;
                    continue;
                }
                return Ok(PhaseOutcome::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run >= degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::NumericalBreakdown(format!(
            "no convergence within {MAX_ITERATIONS} pivots"
        )))
    }
}

/// Solves `lp`. Infeasible and unbounded programs are reported through
/// [`LpSolution::status`]; only malformed input and numerical breakdown are
/// errors.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let sf = standardize(lp);
    let m = sf.rows.len();
    let n = sf.ncols;

    // Column layout: structural | slack/surplus (one per inequality row) | artificial.
    let mut slack_col = vec![None; m];
    let mut art_col = vec![None; m];
    let mut next = n;
    for r in 0..m {
        if sf.rel[r] != Relation::Eq {
            slack_col[r] = Some(next);
            next += 1;
        }
    }
    let first_art = next;
    for r in 0..m {
        if sf.rel[r] != Relation::Le {
            art_col[r] = Some(next);
            next += 1;
        }
    }
    let cols = next;

    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    // The column that held the identity for row r at start; B^{-1} e_r lives there.
    let mut unit_col = vec![0; m];
    for r in 0..m {
        t[r][..n].copy_from_slice(&sf.rows[r]);
        t[r][cols] = sf.rhs[r];
        match sf.rel[r] {
            Relation::Le => {
                let s = slack_col[r].unwrap();
                t[r][s] = 1.0;
                basis[r] = s;
                unit_col[r] = s;
            }
            Relation::Ge => {
                t[r][slack_col[r].unwrap()] = -1.0;
                let a = art_col[r].unwrap();
                t[r][a] = 1.0;
                basis[r] = a;
                unit_col[r] = a;
            }
            Relation::Eq => {
                let a = art_col[r].unwrap();
                t[r][a] = 1.0;
                basis[r] = a;
                unit_col[r] = a;
            }
        }
    }

    let mut tab = Tableau {
        t,
        basis,
        obj: vec![0.0; cols + 1],
        cols,
        allowed: vec![true; cols],
    };
    let mut row_alive = vec![true; m];

    if first_art < cols {
        let mut phase1 = vec![0.0; cols];
        for c in phase1.iter_mut().skip(first_art) {
            *c = 1.0;
        }
        tab.price(&phase1);
        tab.run()?;
        let infeas = -tab.obj[cols];
        if infeas > FEAS_TOL {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible, lp.constraints.len()));
        }
        // Drive remaining artificials out of the basis; rows with no usable
        // pivot are redundant and dropped.
        let mut r = 0;
        while r < tab.t.len() {
            if tab.basis[r] >= first_art {
                let pick = (0..first_art)
                    .filter(|&j| tab.t[r][j].abs() > PIVOT_TOL)
                    .max_by(|&a, &b| tab.t[r][a].abs().total_cmp(&tab.t[r][b].abs()));
                match pick {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.t.remove(r);
                        tab.basis.remove(r);
                        let orig = (0..m).filter(|&i| row_alive[i]).nth(r).unwrap();
                        row_alive[orig] = false;
                        continue;
                    }
                }
            }
            r += 1;
        }
        for a in first_art..cols {
            tab.allowed[a] = false;
        }
    }

    let mut cost = sf.cost.clone();
    cost.resize(cols, 0.0);
    tab.price(&cost);
    if let PhaseOutcome::Unbounded = tab.run()? {
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded, lp.constraints.len()));
    }

    // Primal read-off.
    let mut y = vec![0.0; cols];
    for (r, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.t[r][cols].max(0.0);
    }
    let x: Vec<f64> = sf
        .maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lo } => lo + y[col],
            VarMap::Mirror { col, hi } => hi - y[col],
            VarMap::Free { pos, neg } => y[pos] - y[neg],
        })
        .collect();

    // Dual read-off: y_r = c_{unit} - d_{unit}.
    let dir = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut duals = vec![0.0; lp.constraints.len()];
    let mut dual_std = 0.0;
    for r in 0..m {
        if !row_alive[r] {
            continue;
        }
        let u = unit_col[r];
        let yr = cost[u] - tab.obj[u];
        dual_std += sf.rhs[r] * yr;
        if let Some(orig) = sf.origin[r] {
            duals[orig] = dir * sf.sign[r] * yr;
        }
    }
    let dual_infeasibility = (0..first_art)
        .map(|j| tab.obj[j])
        .fold(0.0_f64, |acc, d| acc.min(d))
        .abs();

    let objective = lp.objective_value(&x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        duals,
        dual_objective: dir * (dual_std + sf.cost_offset),
        dual_infeasibility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_corner() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, 0.0], Relation::Le, 1.0);
        lp.add_constraint(vec![0.0, 1.0], Relation::Le, 1.0);
        let s = solve(&lp).unwrap();
        assert!(s.is_optimal());
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        assert!((s.objective - 2.0).abs() < 1e-12);
        assert!((s.dual_objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn single_lower_bound() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Ge, 3.0);
        let s = solve(&lp).unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-12);
        assert!((s.objective - 3.0).abs() < 1e-12);
        assert!((s.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Ge, 3.0);
        lp.add_constraint(vec![1.0], Relation::Le, 2.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.add_constraint(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_mirrored_variables() {
        // min x0 + x1, x0 free with x0 >= -2 via row, x1 <= 5 with no lower bound, x1 >= x0.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_bounds(1, f64::NEG_INFINITY, 5.0);
        lp.add_constraint(vec![1.0, 0.0], Relation::Ge, -2.0);
        lp.add_constraint(vec![-1.0, 1.0], Relation::Ge, 0.0);
        let s = solve(&lp).unwrap();
        assert!(s.is_optimal());
        assert!((s.objective + 4.0).abs() < 1e-10, "{:?}", s);
        assert!((s.dual_objective - s.objective).abs() < 1e-9);
    }

    #[test]
    fn equality_and_redundant_rows() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 2.0, 3.0]);
        lp.add_constraint(vec![1.0, 1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![2.0, 2.0, 2.0], Relation::Eq, 2.0);
        lp.add_constraint(vec![0.0, 1.0, 0.0], Relation::Ge, 0.25);
        let s = solve(&lp).unwrap();
        assert!(s.is_optimal());
        assert!((s.objective - 1.25).abs() < 1e-12);
        assert!(lp.max_violation(&s.x) < 1e-12);
        assert!((s.dual_objective - 1.25).abs() < 1e-9);
    }

    #[test]
    fn rejects_ragged_rows() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve(&lp), Err(Error::MalformedLp(_))));
        let lp = LinearProgram::new(Sense::Minimize, vec![]);
        assert!(matches!(solve(&lp), Err(Error::MalformedLp(_))));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's classic cycling example under Dantzig pricing.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = solve(&lp).unwrap();
        assert!(s.is_optimal());
        assert!((s.objective + 0.05).abs() < 1e-10);
    }
}
