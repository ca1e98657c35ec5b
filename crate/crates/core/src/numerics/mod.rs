//! Dense symmetric linear algebra, a small LP solver and NNLS.

pub mod lp;
pub mod matrix;
pub mod nnls;
pub mod sym;

pub use lp::{solve_lp, solve_lp_warm, Constraint, LpProblem, LpSolution, Row};
pub use matrix::{dot, norm2, outer, Matrix};
pub use nnls::{solve_nnls, NnlsSolution};
pub use sym::{cholesky, riccati_solve, sqrt_psd, sym_eigen, SymEigen, SymMatrix};

/// Packed index of entry `(i, j)`, `i ≤ j`, in the upper-triangle order used by
/// [`SymMatrix::from_packed`].
pub fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

/// Coefficients `a` with `a·packed(B) = xᵀ B x`.
pub fn quad_coeffs(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(if i == j { x[i] * x[i] } else { 2.0 * x[i] * x[j] });
        }
    }
    out
}

/// Coefficients `a` with `a·packed(B) = trace(P B)` for symmetric `P`.
pub fn trace_coeffs(p: &SymMatrix) -> Vec<f64> {
    let n = p.dim();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(if i == j { p.get(i, i) } else { 2.0 * p.get(i, j) });
        }
    }
    out
}
