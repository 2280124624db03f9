//! Solves a small production-planning LP and prints primal and dual values.

use metapersuasion::lp::{self, LinearProgram, Relation, Sense};

fn main() -> metapersuasion::Result<()> {
    // max 3x + 5y  s.t.  x ≤ 4,  2y ≤ 12,  3x + 2y ≤ 18,  x, y ≥ 0
    let mut prog = LinearProgram::new(Sense::Maximize, vec![3.0, 5.0]);
    prog.add_constraint(vec![1.0, 0.0], Relation::Le, 4.0);
    prog.add_constraint(vec![0.0, 2.0], Relation::Le, 12.0);
    prog.add_constraint(vec![3.0, 2.0], Relation::Le, 18.0);
    let sol = lp::solve(&prog)?;
    println!("status {:?}", sol.status);
    println!("x = {:?}, objective {}", sol.x, sol.objective);
    println!("duals {:?}, dual objective {}", sol.duals, sol.dual_objective);
    println!("max constraint violation {:e}", prog.max_violation(&sol.x));
    Ok(())
}
