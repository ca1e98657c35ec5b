//! Centrally-symmetric convex bodies and their oracles.
//!
//! A body is stored in one of four representations. All of them are symmetric
//! by construction, and degenerate data (zero rows, rows that do not span) is
//! rejected by the constructors, never at use.

mod containment;
mod io;

pub use containment::{
    contained_in_ellipsoid, contained_in_ellipsoid_with, contains_ellipsoid, contains_ellipsoid_with, direction_net,
    max_quadratic, scan_boundary, BoundaryScan, ContainmentVerdict, ScanOptions,
};
pub use io::{BodyFile, PValue};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{dot, norm2, outer, solve_lp, LpProblem, Matrix, SymMatrix};

/// Box half-width for the small LPs behind the polytope oracles.
const LP_BOX: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `{x : |h_j·x| ≤ 1 ∀j}`
    PolytopeH { facets: Vec<Vec<f64>> },
    /// `conv{±w_k}`
    PolytopeV { generators: Vec<Vec<f64>> },
    /// `{x : ‖x‖_p ≤ r}`, `p ∈ [1, ∞]`
    LpBall { p: f64, radius: f64 },
    /// `T · inner`
    LinearImage { map: Matrix, inverse: Matrix, inner: Box<ConvexBody> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    dim: usize,
    shape: Shape,
}

impl ConvexBody {
    pub fn polytope_h(facets: Vec<Vec<f64>>) -> Result<Self> {
        let dim = validate_rows(&facets, "facets")?;
        Ok(ConvexBody { dim, shape: Shape::PolytopeH { facets } })
    }

    pub fn polytope_v(generators: Vec<Vec<f64>>) -> Result<Self> {
        let dim = validate_rows(&generators, "generators")?;
        Ok(ConvexBody { dim, shape: Shape::PolytopeV { generators } })
    }

    /// `p = f64::INFINITY` gives the cube of half-width `radius`.
    pub fn lp_ball(dim: usize, p: f64, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidBody("dimension must be positive".into()));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidBody(format!("p must lie in [1, inf], got {p}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidBody(format!("radius must be positive, got {radius}")));
        }
        Ok(ConvexBody { dim, shape: Shape::LpBall { p, radius } })
    }

    /// The cube `[-1, 1]^n` as facets `e_i`.
    pub fn cube(n: usize) -> Self {
        Self::polytope_h(unit_vectors(n)).expect("standard basis spans")
    }

    /// The cross-polytope `conv{±e_i}` as generators.
    pub fn cross_polytope(n: usize) -> Self {
        Self::polytope_v(unit_vectors(n)).expect("standard basis spans")
    }

    /// The cross-polytope by its `2^{n-1}` facet pairs `|s·x| ≤ 1`, `s ∈ {±1}^n`.
    pub fn cross_polytope_h(n: usize) -> Self {
        let facets = (0..1usize << (n - 1))
            .map(|mask| (0..n).map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 }).collect())
            .collect();
        Self::polytope_h(facets).expect("sign vectors span")
    }

    pub fn euclidean_ball(n: usize) -> Self {
        Self::lp_ball(n, 2.0, 1.0).expect("valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn variant_name(&self) -> &'static str {
        match self.shape {
            Shape::PolytopeH { .. } => "polytope_h",
            Shape::PolytopeV { .. } => "polytope_v",
            Shape::LpBall { .. } => "lp_ball",
            Shape::LinearImage { .. } => "linear_image",
        }
    }

    /// The gauge `‖x‖_K = inf{λ > 0 : x ∈ λK}`.
    pub fn norm(&self, x: &[f64]) -> f64 {
        self.norm_and_subgradient(x).0
    }

    /// `‖x‖_K` together with a dual vector `y ∈ K°` with `y·x = ‖x‖_K`.
    pub fn norm_and_subgradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            Shape::PolytopeH { facets } => {
                let (j, v) = facets
                    .iter()
                    .map(|h| dot(h, x))
                    .enumerate()
                    .fold((0, 0.0f64), |best, (j, v)| if v.abs() > best.1.abs() { (j, v) } else { best });
                let s = if v < 0.0 { -1.0 } else { 1.0 };
                (v.abs(), facets[j].iter().map(|h| h * s).collect())
            }
            Shape::PolytopeV { generators } => {
                // ‖x‖_K = max{x·y : |w_k·y| ≤ 1}, the support function of the polar
                if x.iter().all(|&v| v == 0.0) {
                    return (0.0, vec![0.0; self.dim]);
                }
                let (v, y) = max_over_slabs(generators, x);
                (v, y)
            }
            Shape::LpBall { p, radius } => lp_norm_and_subgradient(x, *p, *radius),
            Shape::LinearImage { inverse, inner, .. } => {
                let (v, y) = inner.norm_and_subgradient(&inverse.matvec(x));
                (v, inverse.tr_matvec(&y))
            }
        }
    }

    /// Support function `h_K(θ) = sup_{x∈K} θ·x`.
    pub fn support(&self, theta: &[f64]) -> f64 {
        self.support_point(theta).0
    }

    /// `h_K(θ)` and a maximizer `x ∈ K`.
    pub fn support_point(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        debug_assert_eq!(theta.len(), self.dim);
        match &self.shape {
            Shape::PolytopeH { facets } => {
                if theta.iter().all(|&v| v == 0.0) {
                    return (0.0, vec![0.0; self.dim]);
                }
                max_over_slabs(facets, theta)
            }
            Shape::PolytopeV { generators } => {
                let (k, v) = generators
                    .iter()
                    .map(|w| dot(w, theta))
                    .enumerate()
                    .fold((0, 0.0f64), |best, (k, v)| if v.abs() > best.1.abs() { (k, v) } else { best });
                let s = if v < 0.0 { -1.0 } else { 1.0 };
                (v.abs(), generators[k].iter().map(|w| w * s).collect())
            }
            Shape::LpBall { p, radius } => {
                // the polar of the p-ball of radius r is the q-ball of radius 1/r
                let q = conjugate_exponent(*p);
                let (v, y) = lp_norm_and_subgradient(theta, q, 1.0 / radius);
                (v, y)
            }
            Shape::LinearImage { map, inner, .. } => {
                let (v, x) = inner.support_point(&map.tr_matvec(theta));
                (v, map.matvec(&x))
            }
        }
    }

    /// `direction / ‖direction‖_K`.
    pub fn boundary_point(&self, direction: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, direction.len())?;
        if direction.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroDirection);
        }
        let nrm = self.norm(direction);
        Ok(direction.iter().map(|v| v / nrm).collect())
    }

    /// The polar body `K° = {y : x·y ≤ 1 ∀x ∈ K}`.
    pub fn polar(&self) -> ConvexBody {
        let shape = match &self.shape {
            Shape::PolytopeH { facets } => Shape::PolytopeV { generators: facets.clone() },
            Shape::PolytopeV { generators } => Shape::PolytopeH { facets: generators.clone() },
            Shape::LpBall { p, radius } => Shape::LpBall { p: conjugate_exponent(*p), radius: 1.0 / radius },
            Shape::LinearImage { map, inverse, inner } => Shape::LinearImage {
                map: inverse.transpose(),
                inverse: map.transpose(),
                inner: Box::new(inner.polar()),
            },
        };
        ConvexBody { dim: self.dim, shape }
    }

    /// `T·K`. Polytopes are pushed through exactly; other bodies are wrapped.
    pub fn linear_image(&self, t: &Matrix) -> Result<ConvexBody> {
        check_dim(self.dim, t.rows())?;
        check_dim(self.dim, t.cols())?;
        check_conditioning(t)?;
        if t.is_identity() {
            return Ok(self.clone());
        }
        let inverse = t.inverse().map_err(|_| Error::SingularTransform)?;
        let shape = match &self.shape {
            Shape::PolytopeH { facets } => {
                Shape::PolytopeH { facets: facets.iter().map(|h| inverse.tr_matvec(h)).collect() }
            }
            Shape::PolytopeV { generators } => {
                Shape::PolytopeV { generators: generators.iter().map(|w| t.matvec(w)).collect() }
            }
            Shape::LpBall { .. } => Shape::LinearImage { map: t.clone(), inverse, inner: Box::new(self.clone()) },
            Shape::LinearImage { map, inverse: inner_inv, inner } => Shape::LinearImage {
                map: t.matmul(map),
                inverse: inner_inv.matmul(&inverse),
                inner: inner.clone(),
            },
        };
        Ok(ConvexBody { dim: self.dim, shape })
    }

    /// `T·inner` kept as a wrapper, whatever the inner representation.
    pub fn wrapped(t: Matrix, inner: ConvexBody) -> Result<ConvexBody> {
        check_dim(inner.dim, t.rows())?;
        check_dim(inner.dim, t.cols())?;
        check_conditioning(&t)?;
        let inverse = t.inverse().map_err(|_| Error::SingularTransform)?;
        Ok(ConvexBody { dim: inner.dim, shape: Shape::LinearImage { map: t, inverse, inner: Box::new(inner) } })
    }

    /// `t·K` for a scalar `t > 0`.
    pub fn scaled(&self, t: f64) -> Result<ConvexBody> {
        self.linear_image(&Matrix::identity(self.dim).scale(t))
    }

    /// Exact facet description when one is known without enumeration:
    /// `PolytopeH`, the cube as `LpBall(∞)`, and linear images of those.
    pub(crate) fn exact_facets(&self) -> Option<Vec<Vec<f64>>> {
        match &self.shape {
            Shape::PolytopeH { facets } => Some(facets.clone()),
            Shape::LpBall { p, radius } if p.is_infinite() => {
                Some(unit_vectors(self.dim).into_iter().map(|e| e.iter().map(|v| v / radius).collect()).collect())
            }
            Shape::LinearImage { inverse, inner, .. } => {
                inner.exact_facets().map(|fs| fs.iter().map(|h| inverse.tr_matvec(h)).collect())
            }
            _ => None,
        }
    }

    /// Exact vertex description: `PolytopeV`, the cross-polytope as `LpBall(1)`,
    /// the cube as `LpBall(∞)` for small `n`, and linear images of those.
    pub(crate) fn exact_vertices(&self) -> Option<Vec<Vec<f64>>> {
        match &self.shape {
            Shape::PolytopeV { generators } => Some(generators.clone()),
            Shape::LpBall { p, radius } if *p == 1.0 => {
                Some(unit_vectors(self.dim).into_iter().map(|e| e.iter().map(|v| v * radius).collect()).collect())
            }
            Shape::LpBall { p, radius } if p.is_infinite() && self.dim <= 12 => {
                let n = self.dim;
                Some(
                    (0..1usize << (n - 1))
                        .map(|mask| {
                            (0..n)
                                .map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -radius } else { *radius })
                                .collect()
                        })
                        .collect(),
                )
            }
            Shape::LinearImage { map, inner, .. } => {
                inner.exact_vertices().map(|vs| vs.iter().map(|w| map.matvec(w)).collect())
            }
            _ => None,
        }
    }
}

pub fn unit_vectors(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// `1/p + 1/q = 1` on `[1, ∞]`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn validate_rows(rows: &[Vec<f64>], what: &str) -> Result<usize> {
    let Some(first) = rows.first() else {
        return Err(Error::InvalidBody(format!("{what} list is empty")));
    };
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidBody("dimension must be positive".into()));
    }
    for r in rows {
        if r.len() != dim {
            return Err(Error::InvalidBody(format!("{what} have inconsistent lengths")));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBody(format!("{what} contain non-finite entries")));
        }
        if norm2(r) == 0.0 {
            return Err(Error::InvalidBody(format!("{what} contain a zero vector")));
        }
    }
    // rows span ⟺ Σ r rᵀ (normalized rows) is positive definite
    let mut gram = Matrix::zeros(dim, dim);
    for r in rows {
        let u: Vec<f64> = r.iter().map(|v| v / norm2(r)).collect();
        gram = gram.add(&outer(&u, &u));
    }
    let eig = SymMatrix::new(gram)?.eigen()?;
    if eig.min_value() <= 1e-12 * eig.values[0] {
        return Err(Error::InvalidBody(format!("{what} do not span the space")));
    }
    Ok(dim)
}

fn check_conditioning(t: &Matrix) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::SingularTransform);
    }
    let gram = SymMatrix::new(t.transpose().matmul(t))?;
    let eig = gram.eigen()?;
    // singular values are square roots of the Gram eigenvalues
    let (smax, smin) = (eig.values[0].max(0.0).sqrt(), eig.min_value().max(0.0).sqrt());
    if !(smin > 1e-10 * smax) {
        return Err(Error::SingularTransform);
    }
    Ok(())
}

/// `max c·z` subject to `|r·z| ≤ 1` for every row `r`, returning value and maximizer.
fn max_over_slabs(rows: &[Vec<f64>], c: &[f64]) -> (f64, Vec<f64>) {
    let mut lp = LpProblem::new(c.iter().map(|v| -v).collect(), LP_BOX);
    for r in rows {
        lp.push(r.clone(), -1.0);
        lp.push(r.iter().map(|v| -v).collect(), -1.0);
    }
    let sol = solve_lp(&lp).expect("slab LP is feasible at the origin and bounded by the box");
    (-sol.value, sol.x)
}

fn lp_norm_and_subgradient(x: &[f64], p: f64, radius: f64) -> (f64, Vec<f64>) {
    let n = x.len();
    if p == 1.0 {
        let v = x.iter().map(|v| v.abs()).sum::<f64>() / radius;
        let y = x.iter().map(|&v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 } / radius).collect();
        return (v, y);
    }
    if p.is_infinite() {
        let (i, m) = x.iter().enumerate().fold((0, 0.0f64), |b, (i, &v)| if v.abs() > b.1.abs() { (i, v) } else { b });
        let mut y = vec![0.0; n];
        if m != 0.0 {
            y[i] = m.signum() / radius;
        }
        return (m.abs() / radius, y);
    }
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return (0.0, vec![0.0; n]);
    }
    // scaled to avoid overflow for large p
    let s: f64 = x.iter().map(|v| (v.abs() / scale).powf(p)).sum();
    let nrm = scale * s.powf(1.0 / p);
    let y = x
        .iter()
        .map(|&v| v.signum() * (v.abs() / nrm).powf(p - 1.0) / radius)
        .map(|v| if v.is_nan() { 0.0 } else { v })
        .collect();
    (nrm / radius, y)
}
