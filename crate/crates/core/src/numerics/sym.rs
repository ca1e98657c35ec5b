use crate::error::{Error, Result};

use super::matrix::Matrix;

/// Symmetric square matrix. Construction averages `A` with `Aᵀ`, so the stored
/// entries are symmetric bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
        }
        if !m.is_finite() {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let n = m.rows();
        let s = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)])
            }
        });
        Ok(SymMatrix(s))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn from_diag(d: &[f64]) -> Self {
        SymMatrix(Matrix::from_diag(d))
    }

    /// Build from the `n(n+1)/2` upper-triangle entries in packed order
    /// `(0,0),(0,1),..,(0,n-1),(1,1),..`.
    pub fn from_packed(n: usize, packed: &[f64]) -> Self {
        assert_eq!(packed.len(), n * (n + 1) / 2);
        let mut m = Matrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                m[(i, j)] = packed[k];
                m[(j, i)] = packed[k];
                k += 1;
            }
        }
        SymMatrix(m)
    }

    pub fn to_packed(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// `x xᵀ`
    pub fn from_outer(x: &[f64]) -> Self {
        let n = x.len();
        SymMatrix(Matrix::from_fn(n, n, |i, j| x[i] * x[j]))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// `xᵀ S x`
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.0.bilinear(x, x)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.0.matvec(x)
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(self.0.scale(s))
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.sub(&other.0))
    }

    /// `Tᵀ S T`, symmetrized.
    pub fn congruence(&self, t: &Matrix) -> SymMatrix {
        SymMatrix::new(t.transpose().matmul(&self.0).matmul(t)).expect("square by construction")
    }

    /// Relative Frobenius distance `‖self − other‖ / ‖other‖`.
    pub fn relative_distance(&self, other: &SymMatrix) -> f64 {
        self.sub(other).frobenius_norm() / other.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    pub fn inverse(&self) -> Result<SymMatrix> {
        SymMatrix::new(self.0.inverse()?)
    }

    pub fn cholesky(&self) -> Result<Matrix> {
        cholesky(self)
    }

    pub fn eigen(&self) -> Result<SymEigen> {
        sym_eigen(self)
    }

    /// Apply `f` to the eigenvalues: `V f(Λ) Vᵀ`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        let e = self.eigen()?;
        Ok(e.recompose(|l| f(l)))
    }
}

/// Lower-triangular `L` with `S = L Lᵀ`.
///
/// A pivot at or below `1e-12·trace(S)/dim` is treated as a degenerate form.
pub fn cholesky(s: &SymMatrix) -> Result<Matrix> {
    let n = s.dim();
    let threshold = 1e-12 * s.trace() / n as f64;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = s.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > threshold) || !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut v = s.get(i, j);
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / djj;
        }
    }
    Ok(l)
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `values`.
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("nonempty")
    }

    pub fn min_vector(&self) -> Vec<f64> {
        self.vector(self.values.len() - 1)
    }

    pub fn recompose(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let m = Matrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)]).sum());
        SymMatrix::new(m).expect("square")
    }
}

/// Cyclic Jacobi eigensolver, capped at `100·dim²` sweeps.
pub fn sym_eigen(s: &SymMatrix) -> Result<SymEigen> {
    let n = s.dim();
    let mut a = s.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();
    let max_sweeps = 100 * n * n;
    let mut converged = n == 1 || scale == 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < max_sweeps {
        sweeps += 1;
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "symmetric eigensolver", iterations: sweeps });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    // sign convention: largest-magnitude component of each vector is positive
    for k in 0..n {
        let col = vectors.column(k);
        let lead = col.iter().fold(0.0f64, |m, &x| if x.abs() > m.abs() + 1e-12 { x } else { m });
        if lead < 0.0 {
            for i in 0..n {
                vectors[(i, k)] = -vectors[(i, k)];
            }
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Symmetric positive square root `S^{1/2}` via the eigendecomposition.
pub fn sqrt_psd(s: &SymMatrix) -> Result<SymMatrix> {
    s.map_eigenvalues(|l| l.max(0.0).sqrt())
}

/// The unique positive definite `C` with `C H C = P` (both `H`, `P` positive definite).
pub fn riccati_solve(h: &SymMatrix, p: &SymMatrix) -> Result<SymMatrix> {
    let he = h.eigen()?;
    if he.min_value() <= 1e-14 * he.values[0].abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotPositiveDefinite { index: 0, pivot: he.min_value() });
    }
    let h_half = he.recompose(f64::sqrt);
    let h_inv_half = he.recompose(|l| 1.0 / l.sqrt());
    let mid = p.congruence(h_half.as_matrix());
    let mid_half = sqrt_psd(&mid)?;
    Ok(mid_half.congruence(h_inv_half.as_matrix()))
}

/// Serialized as a list of rows.
impl serde::Serialize for SymMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.to_rows().serialize(s)
    }
}
