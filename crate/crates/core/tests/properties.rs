mod common;

use common::*;
use ellipmap::bodies::{contains_ellipsoid, unit_vectors, ConvexBody};
use ellipmap::ellipsoids::{ellipsoid_linear_image, m_ellipsoid, m_star, polar_wrt, sample_mu};
use ellipmap::solver::{solve_u, SolveConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bipolar_is_identity(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_body(&mut rng, n);
        let kk = k.polar().polar();
        for _ in 0..8 {
            let x = gaussian(&mut rng, n);
            let (a, b) = (k.norm(&x), kk.norm(&x));
            prop_assert!((a - b).abs() <= 1e-7 * a.max(1.0), "{a} vs {b} for {}", k.variant_name());
        }
    }

    #[test]
    fn norm_is_a_norm(seed in any::<u64>(), n in 2usize..=4, t in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_body(&mut rng, n);
        let (x, y) = (gaussian(&mut rng, n), gaussian(&mut rng, n));
        let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!(k.norm(&s) <= (k.norm(&x) + k.norm(&y)) * (1.0 + 1e-9));
        let tx: Vec<f64> = x.iter().map(|a| t * a).collect();
        prop_assert!((k.norm(&tx) - t.abs() * k.norm(&x)).abs() <= 1e-9 * k.norm(&x).max(1.0));
        let w = k.boundary_point(&x).unwrap();
        prop_assert!((k.norm(&w) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn support_and_norm_are_dual(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_body(&mut rng, n);
        let (x, theta) = (gaussian(&mut rng, n), gaussian(&mut rng, n));
        let h = k.support(&theta);
        prop_assert!(dot(&x, &theta).abs() <= k.norm(&x) * h * (1.0 + 1e-9));
        // the support point is in K and attains h
        let (v, p) = k.support_point(&theta);
        prop_assert!((v - h).abs() <= 1e-9 * h.max(1.0));
        prop_assert!(k.norm(&p) <= 1.0 + 1e-8);
        prop_assert!((dot(&p, &theta) - h).abs() <= 1e-8 * h.max(1.0));
        // h_K is the norm of the polar
        prop_assert!((k.polar().norm(&theta) - h).abs() <= 1e-7 * h.max(1.0));
    }

    #[test]
    fn ellipsoid_identities(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_ellipsoid(&mut rng, n, 25.0);
        let f = random_ellipsoid(&mut rng, n, 25.0);
        let pf = polar_wrt(&e, &f).unwrap();
        prop_assert!((m_star(&e, &f).unwrap() - m_ellipsoid(&e, &pf).unwrap()).abs() <= 1e-10 * m_star(&e, &f).unwrap());
        prop_assert!(rel(polar_wrt(&e, &pf).unwrap().form(), f.form()) <= 1e-9);
        prop_assert!((m_ellipsoid(&e, &e).unwrap() - 1.0).abs() <= 1e-12);
        // M is invariant under a common linear map
        let t = random_map(&mut rng, n);
        let (te, tf) = (ellipsoid_linear_image(&t, &e).unwrap(), ellipsoid_linear_image(&t, &f).unwrap());
        prop_assert!((m_ellipsoid(&te, &tf).unwrap() - m_ellipsoid(&e, &f).unwrap()).abs() <= 1e-9 * m_ellipsoid(&e, &f).unwrap());
    }

    #[test]
    fn containment_agrees_with_sampling(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_body(&mut rng, n);
        // a random ellipsoid scaled so that it sits near the boundary of K
        let f0 = random_ellipsoid(&mut rng, n, 9.0);
        let pts = sample_mu(&f0, 400, seed).unwrap();
        let r = pts.iter().map(|x| k.norm(x)).fold(0.0, f64::max);
        let f = f0.scaled(r * rng.random_range(0.9..1.1)).unwrap();
        let v = contains_ellipsoid(&k, &f, 1e-9).unwrap();
        let worst = sample_mu(&f, 4000, seed ^ 1).unwrap().iter().map(|x| k.norm(x)).fold(0.0, f64::max);
        if v.contained {
            prop_assert!(worst <= 1.0 + 1e-6, "contained but a sample has norm {worst}");
        } else {
            prop_assert!(v.worst_margin < 0.0);
            prop_assert!((k.norm(&v.witness) - 1.0).abs() <= 1e-8);
            prop_assert!(f.form().quad_form(&v.witness) < 1.0);
        }
        if worst > 1.0 + 1e-6 {
            prop_assert!(!v.contained);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn solver_laws(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = SolveConfig::default();
        let k = random_body(&mut rng, n);
        let e = random_ellipsoid(&mut rng, n, 10.0);
        let base = solve_u(&k, &e, &cfg).unwrap();

        // equivariance under linear maps
        let t = random_map(&mut rng, n);
        let moved = solve_u(&k.linear_image(&t).unwrap(), &ellipsoid_linear_image(&t, &e).unwrap(), &cfg).unwrap();
        let expect = ellipsoid_linear_image(&t, &base.minimizer).unwrap();
        prop_assert!(rel(moved.minimizer.form(), expect.form()) <= 1e-4);

        // the reference only matters up to scale
        let scaled = solve_u(&k, &e.scaled(2.5).unwrap(), &cfg).unwrap();
        prop_assert!(rel(scaled.minimizer.form(), base.minimizer.form()) <= 1e-6);

        // J is homogeneous of degree -1 in K
        let big = solve_u(&k.scaled(2.0).unwrap(), &e, &cfg).unwrap();
        prop_assert!((big.j_value - base.j_value / 2.0).abs() <= 1e-6 * base.j_value);

        // tangent slabs at boundary points circumscribe K, so J can only drop
        let mut facets = Vec::new();
        let dirs: Vec<Vec<f64>> = unit_vectors(n).into_iter().chain((0..n + 2).map(|_| gaussian(&mut rng, n))).collect();
        for d in dirs {
            let w = k.boundary_point(&d).unwrap();
            facets.push(k.norm_and_subgradient(&w).1);
        }
        let outer = ConvexBody::polytope_h(facets).unwrap();
        let j = solve_u(&outer, &e, &cfg).unwrap().j_value;
        prop_assert!(j <= base.j_value * (1.0 + 1e-8), "{j} > {}", base.j_value);
    }
}
