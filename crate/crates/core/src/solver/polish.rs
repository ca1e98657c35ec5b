//! High-accuracy refinement of a cutting-plane iterate.
//!
//! Write `G = Q_F⁻¹` and `C = Q_E⁻¹`. For a normal `y` of `K` scaled so that
//! `h_K(y) = 1`, the constraint `h_F(y) ≤ h_K(y)` reads `yᵀGy ≤ 1`, linear in
//! `G`, while the objective `trace(C G⁻¹)` is convex in `G`. With finitely many
//! normals `y_j` and multipliers `μ_j ≥ 0`, minimizing the Lagrangian over `G`
//! gives `G⁻¹ C G⁻¹ = H(μ) := Σ μ_j y_j y_jᵀ` and the concave dual
//!
//! `φ(μ) = 2·trace((S H S)^{1/2}) − Σ μ_j`,  `S = C^{1/2}`,
//!
//! with `∂φ/∂μ_j = y_jᵀ G y_j − 1` and `G = S (S H S)^{-1/2} S`. Its maximizer is
//! found by projected Newton. At the optimum `C = Σ μ_j x_j x_jᵀ` with contact
//! points `x_j = G y_j`, so the multipliers are exactly certificate weights.

use crate::error::{Error, Result};
use crate::numerics::{dot, norm2, Matrix, SymMatrix};

#[derive(Debug, Clone)]
pub(crate) struct Polished {
    /// `Q_F`
    pub form: SymMatrix,
    pub normals: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Polished {
    /// `(x_j, μ_j)` for the normals carrying weight.
    pub fn contacts(&self, inverse: &SymMatrix) -> Vec<(Vec<f64>, f64)> {
        let wmax = self.weights.iter().cloned().fold(0.0, f64::max);
        self.normals
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 1e-12 * wmax)
            .map(|(y, &w)| (inverse.matvec(y), w))
            .collect()
    }
}

struct Eval {
    phi: f64,
    grad: Vec<f64>,
    /// `Vᵀ S y_j` in the eigenbasis of `S H S`
    z: Vec<Vec<f64>>,
    lambda: Vec<f64>,
    vectors: Matrix,
}

fn evaluate(s: &SymMatrix, normals: &[Vec<f64>], mu: &[f64]) -> Option<Eval> {
    let n = s.dim();
    let sy: Vec<Vec<f64>> = normals.iter().map(|y| s.matvec(y)).collect();
    let mut m = Matrix::zeros(n, n);
    for (v, &w) in sy.iter().zip(mu) {
        if w != 0.0 {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += w * v[i] * v[j];
                }
            }
        }
    }
    let eig = SymMatrix::new(m).ok()?.eigen().ok()?;
    let top = eig.values[0];
    if !(top > 0.0) || eig.min_value() <= 1e-13 * top {
        return None;
    }
    let vectors = eig.vectors;
    let lambda = eig.values;
    let z: Vec<Vec<f64>> = sy.iter().map(|v| vectors.tr_matvec(v)).collect();
    let phi = 2.0 * lambda.iter().map(|l| l.sqrt()).sum::<f64>() - mu.iter().sum::<f64>();
    let grad = z.iter().map(|zj| zj.iter().zip(&lambda).map(|(a, l)| a * a / l.sqrt()).sum::<f64>() - 1.0).collect();
    Some(Eval { phi, grad, z, lambda, vectors })
}

fn hessian(ev: &Eval, free: &[usize]) -> Matrix {
    let n = ev.lambda.len();
    let r: Vec<f64> = ev.lambda.iter().map(|l| l.sqrt()).collect();
    // divided differences of λ ↦ λ^{-1/2}
    let f = Matrix::from_fn(n, n, |a, b| -1.0 / (r[a] * r[b] * (r[a] + r[b])));
    let k = free.len();
    let mut h = Matrix::zeros(k, k);
    for (p, &j) in free.iter().enumerate() {
        for (q, &l) in free.iter().enumerate().skip(p) {
            let w: Vec<f64> = (0..n).map(|a| ev.z[j][a] * ev.z[l][a]).collect();
            let v = f.bilinear(&w, &w);
            h[(p, q)] = v;
            h[(q, p)] = v;
        }
    }
    h
}

fn projected_gradient(mu: &[f64], grad: &[f64]) -> f64 {
    mu.iter().zip(grad).map(|(&m, &g)| if m > 0.0 { g.abs() } else { g.max(0.0) }).fold(0.0, f64::max)
}

/// Maximize `φ` over `μ ≥ 0` from `mu0`. Fails when the normals carrying weight
/// stop spanning the space, which means the normal set cannot support an ellipsoid.
pub(crate) fn polish(c: &SymMatrix, normals: Vec<Vec<f64>>, mu0: Vec<f64>) -> Result<Polished> {
    let s = c.map_eigenvalues(f64::sqrt)?;
    let s_inv = c.map_eigenvalues(|l| 1.0 / l.sqrt())?;
    let fail = |what| Error::NoConvergence { what, iterations: 0 };
    let mut mu = mu0;
    let mut ev = match evaluate(&s, &normals, &mu) {
        Some(ev) => ev,
        None => {
            // spread a little weight over every normal so that H becomes definite
            let bump = 1e-3 * mu.iter().cloned().fold(0.0, f64::max).max(1e-3);
            mu.iter_mut().for_each(|m| *m += bump);
            evaluate(&s, &normals, &mu).ok_or(fail("polish start"))?
        }
    };
    let max_iter = 200;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let pg = projected_gradient(&mu, &ev.grad);
        if pg <= 1e-13 {
            break;
        }
        let free: Vec<usize> = (0..mu.len()).filter(|&j| mu[j] > 0.0 || ev.grad[j] > 0.0).collect();
        let mut h = hessian(&ev, &free).scale(-1.0);
        let reg = 1e-13 * (0..free.len()).map(|i| h[(i, i)]).fold(0.0, f64::max).max(1e-300);
        for i in 0..free.len() {
            h[(i, i)] += reg;
        }
        let g_free: Vec<f64> = free.iter().map(|&j| ev.grad[j]).collect();
        let step = h.solve(&g_free).unwrap_or_else(|_| g_free.clone());
        let mut dir = vec![0.0; mu.len()];
        for (p, &j) in free.iter().enumerate() {
            dir[j] = step[p];
        }
        // projected backtracking line search
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = mu.iter().zip(&dir).map(|(m, d)| (m + alpha * d).max(0.0)).collect();
            if let Some(te) = evaluate(&s, &normals, &trial) {
                let moved: Vec<f64> = trial.iter().zip(&mu).map(|(a, b)| a - b).collect();
                if te.phi >= ev.phi + 1e-4 * dot(&ev.grad, &moved) - 1e-15 * ev.phi.abs() {
                    accepted = Some((trial, te));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, te)) => {
                let change = norm2(&trial.iter().zip(&mu).map(|(a, b)| a - b).collect::<Vec<_>>());
                mu = trial;
                ev = te;
                if change <= 1e-15 * norm2(&mu) {
                    break;
                }
            }
            None => break,
        }
    }
    // Q_F = S⁻¹ (S H S)^{1/2} S⁻¹
    let n = ev.lambda.len();
    let v = &ev.vectors;
    let half = Matrix::from_fn(n, n, |i, j| (0..n).map(|a| v[(i, a)] * ev.lambda[a].sqrt() * v[(j, a)]).sum());
    let form = SymMatrix::new(half)?.congruence(s_inv.as_matrix());
    if !form.as_matrix().is_finite() {
        return Err(fail("polish"));
    }
    Ok(Polished { form, normals, weights: mu })
}

/// Fold `y ~ −y` and merge normals closer than `1e-10` relative, summing weights.
pub(crate) fn merge_normals(items: Vec<(Vec<f64>, f64)>) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut normals: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (mut y, w) in items {
        let lead = y.iter().fold(0.0f64, |b, &v| if v.abs() > b.abs() { v } else { b });
        if lead < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        let scale = norm2(&y);
        match normals.iter().position(|o| norm2(&o.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>()) <= 1e-10 * scale) {
            Some(i) => weights[i] += w,
            None => {
                normals.push(y);
                weights.push(w);
            }
        }
    }
    (normals, weights)
}
