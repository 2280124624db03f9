use metapersuasion::geom::{caratheodory, facets_2d, membership, project, BarrierDomain, PointSet};
use metapersuasion::linalg::{dot, sub};
use metapersuasion::lp::{self, LinearProgram, Relation, Sense};
use proptest::prelude::*;

fn points(k: usize, n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.0, k), n)
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_optimum_dominates_feasible_points(
        c in prop::collection::vec(-1.0f64..1.0, 3),
        a in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..5),
        b in prop::collection::vec(0.1f64..2.0, 5),
        probes in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 20),
    ) {
        let mut prog = LinearProgram::new(Sense::Maximize, c.clone());
        for (row, rhs) in a.iter().zip(&b) {
            prog.add_constraint(row.clone(), Relation::Le, *rhs);
        }
        for j in 0..3 {
            prog.set_bounds(j, 0.0, 1.0);
        }
        let sol = lp::solve(&prog).unwrap();
        prop_assert!(sol.is_optimal());
        prop_assert!(prog.max_violation(&sol.x) <= 1e-8);
        prop_assert!((sol.objective - sol.dual_objective).abs() <= 1e-7);
        for p in probes.iter().filter(|p| prog.max_violation(p) <= 0.0) {
            prop_assert!(dot(&c, p) <= sol.objective + 1e-9);
        }
    }

    #[test]
    fn caratheodory_reconstructs_interior_targets(pts in points(3, 7), w in weights(7)) {
        let ps = PointSet::new(pts.clone()).unwrap();
        let mut z = vec![0.0; 3];
        for (p, wi) in pts.iter().zip(&w) {
            for (zj, pj) in z.iter_mut().zip(p) {
                *zj += wi * pj;
            }
        }
        let d = caratheodory(&ps, &z).unwrap();
        prop_assert!(d.support() <= 4);
        prop_assert!(d.weights.iter().all(|&x| x >= 0.0));
        prop_assert!((d.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let r = d.reconstruct(&ps);
        prop_assert!(r.iter().zip(&z).all(|(a, b)| (a - b).abs() <= 1e-9));
    }

    #[test]
    fn projection_is_obtuse_and_idempotent(pts in points(2, 6), x in prop::collection::vec(-1.0f64..2.0, 2)) {
        let ps = PointSet::new(pts).unwrap();
        let p = project(&ps, &x).unwrap().point;
        let r = sub(&x, &p);
        for z in ps.points() {
            prop_assert!(dot(&r, &sub(z, &p)) <= 1e-9);
        }
        prop_assert!(membership(&ps, &p).unwrap().is_inside());
        let again = project(&ps, &p).unwrap().point;
        prop_assert!(again.iter().zip(&p).all(|(a, b)| (a - b).abs() <= 1e-9));
    }

    #[test]
    fn mirror_step_stays_interior(eta in 0.0f64..0.2, l in prop::collection::vec(-1.0f64..1.0, 2)) {
        let ps = PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.8, 0.8]]).unwrap();
        let d = BarrierDomain::from_facets(&facets_2d(&ps).unwrap()).unwrap();
        let u = d.center().to_vec();
        let next = d.mirror_step(&u, &l, eta).unwrap();
        prop_assert!(d.is_interior(&next));
        // First-order condition ∇R(next) = ∇R(u) − ηℓ.
        let g1 = d.gradient(&next).unwrap();
        let g0 = d.gradient(&u).unwrap();
        for j in 0..2 {
            prop_assert!((g1[j] - (g0[j] - eta * l[j])).abs() <= 1e-8);
        }
    }
}

#[test]
fn dikin_samples_on_unit_local_sphere() {
    let d = BarrierDomain::unit_ball(2);
    let mut rng = metapersuasion::rng::stream(3, &[]);
    for u in [vec![0.0, 0.0], vec![0.5, -0.3], vec![0.0, 0.95]] {
        for _ in 0..200 {
            let s = d.dikin_sample(&u, &mut rng).unwrap();
            assert!(d.is_interior(&s.point));
            let n = d.local_norm(&u, &sub(&s.point, &u)).unwrap();
            assert!((n - 1.0).abs() < 1e-8);
        }
    }
}
