#![allow(dead_code)]

use ellipmap::bodies::ConvexBody;
use ellipmap::ellipsoids::Ellipsoid;
use ellipmap::numerics::{Matrix, SymMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Haar-ish orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
pub fn rotation(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < n {
        let mut v = gaussian(rng, n);
        for c in &cols {
            let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
        }
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nv > 1e-6 {
            cols.push(v.iter().map(|a| a / nv).collect());
        }
    }
    Matrix::from_columns(&cols).unwrap()
}

/// SPD form with eigenvalues spread over `[s, s·cond]` for a random scale `s`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> SymMatrix {
    let s = rng.random_range(0.5..2.0);
    let mut eig: Vec<f64> = (0..n).map(|_| s * cond.powf(rng.random_range(0.0..1.0))).collect();
    eig[0] = s;
    if n > 1 {
        eig[1] = s * cond;
    }
    let r = rotation(rng, n);
    SymMatrix::from_diag(&eig).congruence(&r.transpose())
}

pub fn random_ellipsoid(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> Ellipsoid {
    Ellipsoid::new(random_spd(rng, n, cond)).unwrap()
}

/// Symmetric polytope `|h_j·x| ≤ 1` with `pairs` random facet normals.
pub fn random_h_polytope(rng: &mut ChaCha8Rng, n: usize, pairs: usize) -> ConvexBody {
    loop {
        let facets: Vec<Vec<f64>> = (0..pairs)
            .map(|_| {
                let g = gaussian(rng, n);
                let ng = g.iter().map(|a| a * a).sum::<f64>().sqrt();
                let r = rng.random_range(0.5..2.0);
                g.iter().map(|a| r * a / ng).collect()
            })
            .collect();
        if let Ok(k) = ConvexBody::polytope_h(facets) {
            return k;
        }
    }
}

pub fn random_v_polytope(rng: &mut ChaCha8Rng, n: usize, pairs: usize) -> ConvexBody {
    loop {
        let gens: Vec<Vec<f64>> = (0..pairs).map(|_| gaussian(rng, n)).collect();
        if let Ok(k) = ConvexBody::polytope_v(gens) {
            return k;
        }
    }
}

/// A well-conditioned random linear map.
pub fn random_map(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    rotation(rng, n).matmul(&Matrix::from_diag(&d)).matmul(&rotation(rng, n))
}

/// Random body of one of the supported kinds.
pub fn random_body(rng: &mut ChaCha8Rng, n: usize) -> ConvexBody {
    match rng.random_range(0..3) {
        0 => {
            let pairs = rng.random_range(n..=n + 4);
            random_h_polytope(rng, n, pairs)
        }
        1 => {
            let pairs = rng.random_range(n..=n + 3);
            random_v_polytope(rng, n, pairs)
        }
        _ => {
            let p = [1.0, 1.5, 3.0, 4.0, f64::INFINITY][rng.random_range(0..5)];
            ConvexBody::lp_ball(n, p, rng.random_range(0.5..2.0)).unwrap().linear_image(&random_map(rng, n)).unwrap()
        }
    }
}

/// Body whose boundary is the ellipsoid `F`.
pub fn ellipsoid_body(f: &Ellipsoid) -> ConvexBody {
    // F = Q^{-1/2}·B
    let t = f.form().map_eigenvalues(|l| 1.0 / l.sqrt()).unwrap();
    ConvexBody::euclidean_ball(f.dim()).linear_image(t.as_matrix()).unwrap()
}

pub fn rel(a: &SymMatrix, b: &SymMatrix) -> f64 {
    a.relative_distance(b)
}

/// Adaptive Simpson quadrature.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}
