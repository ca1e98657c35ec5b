//! Centered ellipsoids `E = {x : xᵀ Q_E x ≤ 1}` and the functionals built on them.
//!
//! Everything that depends on an ellipsoid's scalar product `⟨x, y⟩_E = xᵀ Q_E y`
//! reduces to matrix traces in the standard basis:
//!
//! * An ellipsoid `F = {x : ⟨x, T x⟩_E ≤ 1}` has `Q_F = Q_E T`, so the operator
//!   is `T = Q_E⁻¹ Q_F`. The operator inner product `⟨T, Id⟩_E` is the trace of
//!   `T` in any `E`-orthonormal basis, hence `M_E²(F) = trace(Q_E⁻¹ Q_F) / n`.
//! * The polar of `F` taken in `⟨·,·⟩_E` is `{y : sup_{x∈F} xᵀ Q_E y ≤ 1}
//!   = {y : yᵀ Q_E Q_F⁻¹ Q_E y ≤ 1}`.
//! * `M*_E(F) = M_E(polar) = sqrt(trace(Q_F⁻¹ Q_E) / n)`.
//!
//! Each identity is checked against Monte-Carlo quadrature in the test suite.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{cholesky, dot, Matrix, SymMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    form: SymMatrix,
    inverse: SymMatrix,
    chol: Matrix,
}

impl Ellipsoid {
    /// Validate `q` as a positive definite form and cache its factorizations.
    pub fn new(q: SymMatrix) -> Result<Self> {
        let chol = cholesky(&q)?;
        let inverse = q.inverse().map_err(|_| Error::NotPositiveDefinite { index: 0, pivot: 0.0 })?;
        let n = q.dim();
        let err = q.as_matrix().matmul(inverse.as_matrix()).sub(&Matrix::identity(n)).frobenius_norm();
        if !(err <= 1e-9) {
            return Err(Error::NotPositiveDefinite { index: 0, pivot: err });
        }
        Ok(Ellipsoid { form: q, inverse, chol })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(SymMatrix::from_rows(rows)?)
    }

    pub fn from_diag(d: &[f64]) -> Result<Self> {
        Self::new(SymMatrix::from_diag(d))
    }

    pub fn unit_ball(n: usize) -> Self {
        Self::new(SymMatrix::identity(n)).expect("identity is positive definite")
    }

    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        Self::new(SymMatrix::identity(n).scale(1.0 / (radius * radius)))
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    /// `Q`
    pub fn form(&self) -> &SymMatrix {
        &self.form
    }

    /// `Q⁻¹`
    pub fn inverse_form(&self) -> &SymMatrix {
        &self.inverse
    }

    pub fn cholesky_factor(&self) -> &Matrix {
        &self.chol
    }

    /// `⟨x, y⟩_E = xᵀ Q y`.
    pub fn inner_product(&self, x: &[f64], y: &[f64]) -> f64 {
        self.form.as_matrix().bilinear(x, y)
    }

    /// `‖x‖_E = sqrt(xᵀ Q x)`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        self.form.quad_form(x).max(0.0).sqrt()
    }

    /// `t·E`: semiaxes multiplied by `t`, i.e. the form divided by `t²`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t != 0.0) {
            return Err(Error::InvalidInput("scale factor must be finite and nonzero".into()));
        }
        Self::new(self.form.scale(1.0 / (t * t)))
    }

    /// Semiaxis lengths, descending.
    pub fn semiaxes(&self) -> Result<Vec<f64>> {
        let e = self.form.eigen()?;
        let mut out: Vec<f64> = e.values.iter().map(|l| 1.0 / l.sqrt()).collect();
        out.sort_by(|a, b| b.total_cmp(a));
        Ok(out)
    }

    /// Relative Frobenius distance between forms, `‖Q_self − Q_other‖ / ‖Q_other‖`.
    pub fn distance(&self, other: &Ellipsoid) -> f64 {
        self.form.relative_distance(&other.form)
    }
}

/// `⟨x, y⟩_E`
pub fn inner_product(e: &Ellipsoid, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(e.dim(), x.len())?;
    check_dim(e.dim(), y.len())?;
    Ok(e.inner_product(x, y))
}

/// `M_E(F) = sqrt(trace(Q_E⁻¹ Q_F) / n)`.
pub fn m_ellipsoid(e: &Ellipsoid, f: &Ellipsoid) -> Result<f64> {
    check_dim(e.dim(), f.dim())?;
    let t = e.inverse.as_matrix().matmul(f.form.as_matrix()).trace();
    Ok((t / e.dim() as f64).sqrt())
}

/// `M*_E(F) = sqrt(trace(Q_F⁻¹ Q_E) / n)`.
pub fn m_star(e: &Ellipsoid, f: &Ellipsoid) -> Result<f64> {
    check_dim(e.dim(), f.dim())?;
    let t = f.inverse.as_matrix().matmul(e.form.as_matrix()).trace();
    Ok((t / e.dim() as f64).sqrt())
}

/// Polar of `F` with respect to `⟨·,·⟩_E`: the form `Q_E Q_F⁻¹ Q_E`.
pub fn polar_wrt(e: &Ellipsoid, f: &Ellipsoid) -> Result<Ellipsoid> {
    check_dim(e.dim(), f.dim())?;
    Ellipsoid::new(f.inverse.congruence(e.form.as_matrix()))
}

/// `T·E = {y : yᵀ T⁻ᵀ Q_E T⁻¹ y ≤ 1}`.
pub fn ellipsoid_linear_image(t: &Matrix, e: &Ellipsoid) -> Result<Ellipsoid> {
    check_dim(e.dim(), t.rows())?;
    check_dim(e.dim(), t.cols())?;
    let t_inv = t.inverse().map_err(|_| Error::SingularTransform)?;
    Ellipsoid::new(e.form.congruence(&t_inv))
}

/// `count` points of `∂E` distributed according to the `O(E)`-invariant
/// probability measure: Gaussian directions normalized on the sphere and
/// pushed through the symmetric square root `Q_E^{-1/2}`.
pub fn sample_mu(e: &Ellipsoid, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = e.dim();
    let root = e.form.map_eigenvalues(|l| 1.0 / l.sqrt())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let len = dot(&g, &g).sqrt();
        if len < 1e-300 {
            continue;
        }
        let y = root.matvec(&g);
        let scale = e.gauge(&y);
        out.push(y.iter().map(|v| v / scale).collect());
    }
    Ok(out)
}

/// On-disk ellipsoid: `{"dim": n, "Q": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipsoidFile {
    pub dim: usize,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
}

impl EllipsoidFile {
    pub fn from_ellipsoid(e: &Ellipsoid) -> Self {
        EllipsoidFile { dim: e.dim(), q: e.form().as_matrix().to_rows() }
    }

    pub fn to_ellipsoid(&self) -> Result<Ellipsoid> {
        check_dim(self.dim, self.q.len())?;
        let m = Matrix::from_rows(&self.q)?;
        check_dim(self.dim, m.cols())?;
        let asym = (0..self.dim)
            .flat_map(|i| (0..self.dim).map(move |j| (i, j)))
            .map(|(i, j)| (m[(i, j)] - m[(j, i)]).abs())
            .fold(0.0, f64::max);
        if asym > 1e-12 * m.max_abs().max(1.0) {
            return Err(Error::InvalidInput("ellipsoid form is not symmetric".into()));
        }
        Ellipsoid::new(SymMatrix::new(m)?)
    }
}

impl Serialize for Ellipsoid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EllipsoidFile::from_ellipsoid(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ellipsoid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        EllipsoidFile::deserialize(d)?.to_ellipsoid().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(deg: f64) -> Matrix {
        let (s, c) = deg.to_radians().sin_cos();
        Matrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap()
    }

    #[test]
    fn construction() {
        let e = Ellipsoid::unit_ball(3);
        assert_eq!(e.dim(), 3);
        let e = Ellipsoid::from_diag(&[0.25, 1.0]).unwrap();
        let ax = e.semiaxes().unwrap();
        assert!((ax[0] - 2.0).abs() < 1e-14 && (ax[1] - 1.0).abs() < 1e-14);
        assert!(matches!(Ellipsoid::from_diag(&[1.0, 0.0]), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn inner_product_examples() {
        let ball = Ellipsoid::unit_ball(2);
        assert_eq!(inner_product(&ball, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let e = Ellipsoid::from_diag(&[2.0, 2.0]).unwrap();
        let x = [0.5f64.sqrt(), 0.0];
        assert!((inner_product(&e, &x, &x).unwrap() - 1.0).abs() < 1e-15);
        let e = Ellipsoid::from_diag(&[0.25, 1.0]).unwrap();
        assert_eq!(inner_product(&e, &[2.0, 0.0], &[2.0, 0.0]).unwrap(), 1.0);
        assert!(inner_product(&e, &[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn m_closed_forms() {
        let ball = Ellipsoid::unit_ball(2);
        assert_eq!(m_ellipsoid(&ball, &ball).unwrap(), 1.0);
        let f = Ellipsoid::from_diag(&[0.25, 1.0]).unwrap();
        assert!((m_ellipsoid(&ball, &f).unwrap() - 0.625f64.sqrt()).abs() < 1e-15);
        let e = Ellipsoid::from_diag(&[1.0, 0.25]).unwrap();
        assert!((m_ellipsoid(&e, &ball).unwrap() - 2.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn m_star_examples() {
        let f = Ellipsoid::from_diag(&[0.3, 1.7]).unwrap();
        assert!((m_star(&f, &f).unwrap() - 1.0).abs() < 1e-15);
        // cross-polytope John ball and a diagonal member of the equality family
        let d = Ellipsoid::from_diag(&[2.0, 2.0]).unwrap();
        let g = Ellipsoid::from_diag(&[3.0, 1.5]).unwrap();
        assert!((m_star(&d, &g).unwrap() - 1.0).abs() < 1e-15);
        let ball = Ellipsoid::unit_ball(2);
        let f = Ellipsoid::from_diag(&[0.25, 1.0]).unwrap();
        assert!((m_star(&ball, &f).unwrap() - 2.5f64.sqrt()).abs() < 1e-15);
        let p = polar_wrt(&ball, &f).unwrap();
        assert!((m_ellipsoid(&ball, &p).unwrap() - m_star(&ball, &f).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn polar_examples() {
        let ball = Ellipsoid::unit_ball(2);
        let f = Ellipsoid::from_diag(&[0.25, 1.0]).unwrap();
        assert_eq!(polar_wrt(&ball, &f).unwrap().form(), &SymMatrix::from_diag(&[4.0, 1.0]));
        let e = Ellipsoid::from_rows(&[vec![2.0, 0.3], vec![0.3, 0.7]]).unwrap();
        assert!(polar_wrt(&e, &e).unwrap().distance(&e) < 1e-14);
        let e2 = Ellipsoid::from_diag(&[2.0, 2.0]).unwrap();
        assert!(polar_wrt(&e2, &ball).unwrap().distance(&Ellipsoid::from_diag(&[4.0, 4.0]).unwrap()) < 1e-15);
        let back = polar_wrt(&e, &polar_wrt(&e, &f).unwrap()).unwrap();
        assert!(back.distance(&f) < 1e-9);
    }

    #[test]
    fn linear_image_examples() {
        let e = Ellipsoid::from_rows(&[vec![1.0, 0.2], vec![0.2, 3.0]]).unwrap();
        assert!(ellipsoid_linear_image(&Matrix::identity(2), &e).unwrap().distance(&e) < 1e-15);
        let t = Matrix::from_diag(&[2.0, 1.0]);
        let img = ellipsoid_linear_image(&t, &Ellipsoid::unit_ball(2)).unwrap();
        assert!(img.distance(&Ellipsoid::from_diag(&[0.25, 1.0]).unwrap()) < 1e-15);
        let img = ellipsoid_linear_image(&rot(45.0), &Ellipsoid::from_diag(&[0.25, 1.0]).unwrap()).unwrap();
        let eig = img.form().eigen().unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-12 && (eig.values[1] - 0.25).abs() < 1e-12);
        let sing = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(ellipsoid_linear_image(&sing, &e).unwrap_err(), Error::SingularTransform);
    }

    #[test]
    fn samples_lie_on_boundary_and_are_seeded() {
        let e = Ellipsoid::from_rows(&[vec![1.0, 0.4], vec![0.4, 0.5]]).unwrap();
        let pts = sample_mu(&e, 500, 7).unwrap();
        for p in &pts {
            assert!((e.form().quad_form(p) - 1.0).abs() < 1e-10);
        }
        assert_eq!(pts, sample_mu(&e, 500, 7).unwrap());
        assert_ne!(pts, sample_mu(&e, 500, 8).unwrap());
    }

    #[test]
    fn sphere_samples_are_isotropic() {
        let count = 100_000;
        let pts = sample_mu(&Ellipsoid::unit_ball(3), count, 1).unwrap();
        let tol = 3.0 / (count as f64).sqrt();
        for i in 0..3 {
            for j in 0..3 {
                let m: f64 = pts.iter().map(|p| p[i] * p[j]).sum::<f64>() / count as f64;
                let want = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((m - want).abs() < tol, "({i},{j}) {m}");
            }
        }
    }

    #[test]
    fn euclidean_second_moment_matches_trace() {
        let e = Ellipsoid::from_diag(&[1.0, 0.25]).unwrap();
        let count = 100_000;
        let pts = sample_mu(&e, count, 3).unwrap();
        let vals: Vec<f64> = pts.iter().map(|p| dot(p, p)).collect();
        let mean = vals.iter().sum::<f64>() / count as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
        let se = (var / count as f64).sqrt();
        assert!((mean - 2.5).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn file_round_trip_and_validation() {
        let e = Ellipsoid::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let js = serde_json::to_string(&e).unwrap();
        assert_eq!(js, r#"{"dim":2,"Q":[[2.0,0.5],[0.5,1.0]]}"#);
        let back: Ellipsoid = serde_json::from_str(&js).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<Ellipsoid>(r#"{"dim":2,"Q":[[1,2],[0,1]]}"#).is_err());
        assert!(serde_json::from_str::<Ellipsoid>(r#"{"dim":2,"Q":[[1,0],[0,-1]]}"#).is_err());
        assert!(serde_json::from_str::<Ellipsoid>(r#"{"dim":2,"Q":[[1,0],[0,1]],"x":1}"#).is_err());
        assert!(serde_json::from_str::<Ellipsoid>(r#"{"dim":3,"Q":[[1,0],[0,1]]}"#).is_err());
    }

    #[test]
    fn scaled_divides_form() {
        let e = Ellipsoid::from_diag(&[1.0, 4.0]).unwrap();
        assert_eq!(e.scaled(2.0).unwrap().form(), &SymMatrix::from_diag(&[0.25, 1.0]));
        assert!(e.scaled(0.0).is_err());
    }
}
