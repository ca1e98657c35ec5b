mod common;

use common::*;
use ellipmap::bodies::{contained_in_ellipsoid, ConvexBody};
use ellipmap::ellipsoids::{ellipsoid_linear_image, Ellipsoid};
use ellipmap::oracle::quadrature_m;
use ellipmap::solver::{solve_u, solve_u_bar, verify_dual_equivalence, DualStatus, SolveConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `F ⊇ K ⊇ u_K(E)` gives `M_E(F) ≤ M_E(K) ≤ J_K(E)`; the middle term comes from quadrature.
#[test]
fn dual_value_sits_below_the_primal() {
    let cfg = SolveConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..6 {
        let n = 2 + i % 2;
        let k = random_v_polytope(&mut rng, n, n + 1 + i % 3);
        let e = random_ellipsoid(&mut rng, n, 10.0);
        let d = solve_u_bar(&k, &e, &cfg).unwrap();
        let j = solve_u(&k, &e, &cfg).unwrap().j_value;
        let (m, se) = quadrature_m(&e, &k, 20_000, i as u64).unwrap();
        assert!(d.i_value <= m + 3.0 * se, "{i}: {} > {m}", d.i_value);
        assert!(m <= j + 3.0 * se, "{i}: {m} > {j}");
    }
}

/// Slabs `|w·x| ≤ h_K(w)` are limits of ellipsoids containing `K`, with value `wᵀCw / h_K(w)²`.
fn best_slab(k: &ConvexBody, e: &Ellipsoid) -> (f64, Vec<f64>) {
    let c = e.inverse_form();
    let value = |t: f64| {
        let w = vec![t.cos(), t.sin()];
        let h = k.support(&w);
        (c.quad_form(&w) / (h * h) / 2.0).sqrt()
    };
    let grid = |lo: f64, step: f64, count: usize| {
        (0..count).map(|i| lo + step * i as f64).map(|t| (value(t), t)).fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    };
    // the maximum often sits at a kink of h_K, so refine locally
    let step = std::f64::consts::PI / 20_000.0;
    let (_, t0) = grid(0.0, step, 20_000);
    let (v, t) = grid(t0 - 2.0 * step, step / 10_000.0, 40_001);
    (v, vec![t.cos(), t.sin()])
}

#[test]
fn degenerate_maximizers_match_the_best_slab() {
    let cfg = SolveConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..6 {
        let k = random_v_polytope(&mut rng, 2, 3);
        let e = random_ellipsoid(&mut rng, 2, 10.0);
        let d = solve_u_bar(&k, &e, &cfg).unwrap();
        let (slab, w) = best_slab(&k, &e);
        assert!(d.i_value >= slab * (1.0 - 1e-6), "{} < {slab}", d.i_value);
        if let DualStatus::NonAttained { degenerate_direction } = d.status {
            assert!((d.i_value - slab).abs() <= 1e-6 * slab, "{} vs {slab}", d.i_value);
            // the cylinder is unbounded along the slab
            let along = degenerate_direction[0] * w[0] + degenerate_direction[1] * w[1];
            assert!(along.abs() < 1e-3);
        }
    }
}

#[test]
fn attained_maximizers_pass_the_equivalence_test() {
    let cfg = SolveConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..4 {
        // the maximizers for the cross-polytope at the ball are the forms with unit diagonal,
        // and ū is equivariant
        let t = random_map(&mut rng, 2);
        let k = ConvexBody::cross_polytope(2).linear_image(&t).unwrap();
        let e = ellipsoid_linear_image(&t, &Ellipsoid::unit_ball(2)).unwrap();
        let d = solve_u_bar(&k, &e, &cfg).unwrap();
        let DualStatus::Attained { maximizer } = d.status else { panic!("{:?}", d.status) };
        assert!((d.i_value - 1.0).abs() < 1e-8);
        let back = maximizer.form().congruence(&t);
        assert!((back.get(0, 0) - 1.0).abs() < 1e-6 && (back.get(1, 1) - 1.0).abs() < 1e-6, "{back:?}");
        assert!(contained_in_ellipsoid(&k, &maximizer, 1e-7).unwrap().contained);
        let eq = verify_dual_equivalence(&k, &e, &maximizer, &cfg).unwrap();
        assert!(eq.holds, "distance {}", eq.distance);
        // a larger ellipse still contains K but is no longer optimal
        let eq = verify_dual_equivalence(&k, &e, &maximizer.scaled(1.05).unwrap(), &cfg).unwrap();
        assert!(eq.body_contained && !eq.holds);
    }
}

#[test]
fn cross_polytope_dual_passes_through_the_vertices() {
    // every form with unit diagonal passes through ±e_i; the most round one is the ball
    let cfg = SolveConfig::default();
    let d = solve_u_bar(&ConvexBody::cross_polytope(3), &Ellipsoid::unit_ball(3), &cfg).unwrap();
    let DualStatus::Attained { maximizer } = d.status else { panic!("{:?}", d.status) };
    for i in 0..3 {
        assert!((maximizer.form().get(i, i) - 1.0).abs() < 1e-8);
    }
    assert!((d.i_value - 1.0).abs() < 1e-8);
}
