//! Lawson–Hanson active-set nonnegative least squares.

use crate::error::{Error, Result};

use super::matrix::{axpy, dot, norm2};

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub weights: Vec<f64>,
    /// `‖Σ λ_i c_i − target‖₂`
    pub residual: f64,
    /// Indices with strictly positive weight.
    pub support: Vec<usize>,
}

/// Minimize `‖Σ λ_i columns_i − target‖` over `λ ≥ 0`.
pub fn solve_nnls(columns: &[Vec<f64>], target: &[f64]) -> Result<NnlsSolution> {
    if columns.is_empty() {
        return Err(Error::InvalidInput("NNLS needs at least one column".into()));
    }
    let d = target.len();
    for c in columns {
        if c.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: c.len() });
        }
    }
    let k = columns.len();
    let col_norm_max = columns.iter().map(|c| norm2(c)).fold(0.0, f64::max);
    let tol = 1e-13 * col_norm_max.max(1.0) * norm2(target).max(1.0);

    let mut x = vec![0.0; k];
    let mut passive: Vec<usize> = Vec::new();
    let mut rejected = vec![false; k];
    let max_outer = 3 * k + 3 * d + 100;

    for _ in 0..max_outer {
        let r = residual_vec(columns, &x, target);
        let w: Vec<f64> = columns.iter().map(|c| -dot(c, &r)).collect();
        let candidate = (0..k)
            .filter(|j| !passive.contains(j) && !rejected[*j])
            .filter(|&j| w[j] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]).then(b.cmp(&a)));
        let Some(t) = candidate else { break };
        passive.push(t);
        rejected.iter_mut().for_each(|r| *r = false);

        loop {
            let sub: Vec<&[f64]> = passive.iter().map(|&j| columns[j].as_slice()).collect();
            let z = match least_squares(&sub, target) {
                Some(z) => z,
                None => {
                    // newest column is dependent on the passive set
                    let t = passive.pop().expect("nonempty");
                    rejected[t] = true;
                    break;
                }
            };
            if z.iter().all(|&v| v > 0.0) {
                for (&j, &v) in passive.iter().zip(&z) {
                    x[j] = v;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&j, &zj) in passive.iter().zip(&z) {
                if zj <= 0.0 {
                    let xj = x[j];
                    let a = if xj - zj > 0.0 { xj / (xj - zj) } else { 0.0 };
                    alpha = alpha.min(a);
                }
            }
            for (&j, &zj) in passive.iter().zip(&z) {
                x[j] += alpha * (zj - x[j]);
            }
            let before = passive.len();
            passive.retain(|&j| x[j] > 1e-15 * (1.0 + x[j].abs()));
            for j in 0..k {
                if !passive.contains(&j) {
                    x[j] = 0.0;
                }
            }
            if passive.len() == before {
                // rounding kept everyone; drop the smallest to guarantee progress
                if let Some(pos) = (0..passive.len()).min_by(|&a, &b| x[passive[a]].total_cmp(&x[passive[b]])) {
                    x[passive[pos]] = 0.0;
                    passive.remove(pos);
                }
            }
            if passive.is_empty() {
                break;
            }
        }
    }
    let residual = norm2(&residual_vec(columns, &x, target));
    let support = (0..k).filter(|&j| x[j] > 0.0).collect();
    Ok(NnlsSolution { weights: x, residual, support })
}

fn residual_vec(columns: &[Vec<f64>], x: &[f64], target: &[f64]) -> Vec<f64> {
    let mut r: Vec<f64> = target.iter().map(|v| -v).collect();
    for (c, &xi) in columns.iter().zip(x) {
        if xi != 0.0 {
            axpy(xi, c, &mut r);
        }
    }
    r
}

/// Householder least squares `min ‖A z − b‖` for full-column-rank `A` given
/// by columns. `None` when a column is numerically dependent on earlier ones.
pub fn least_squares(cols: &[&[f64]], b: &[f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let n = cols.len();
    if n > m {
        return None;
    }
    // column-major working copy
    let mut a: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
    let mut rhs = b.to_vec();
    let norms: Vec<f64> = a.iter().map(|c| norm2(c)).collect();
    for k in 0..n {
        let alpha_norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha_norm <= 1e-12 * norms[k].max(f64::MIN_POSITIVE) {
            return None;
        }
        let alpha = if a[k][k] > 0.0 { -alpha_norm } else { alpha_norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(k) {
                let s = 2.0 * dot(&v, &col[k..]) / vnorm2;
                for (ci, vi) in col[k..].iter_mut().zip(&v) {
                    *ci -= s * vi;
                }
            }
            let s = 2.0 * dot(&v, &rhs[k..]) / vnorm2;
            for (ri, vi) in rhs[k..].iter_mut().zip(&v) {
                *ri -= s * vi;
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..n {
            s -= a[j][i] * z[j];
        }
        z[i] = s / a[i][i];
    }
    Some(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = solve_nnls(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 1.0]).unwrap();
        assert_eq!(s.weights, vec![1.0, 1.0]);
        assert!(s.residual < 1e-15);

        let s = solve_nnls(&[vec![1.0, 0.0]], &[1.0, -1.0]).unwrap();
        assert!((s.weights[0] - 1.0).abs() < 1e-15);
        assert!((s.residual - 1.0).abs() < 1e-15);

        let s = solve_nnls(&[vec![1.0, 0.0], vec![-1.0, 0.0]], &[2.0, 0.0]).unwrap();
        assert!((s.weights[0] - 2.0).abs() < 1e-15);
        assert_eq!(s.weights[1], 0.0);
        assert_eq!(s.support, vec![0]);
    }

    #[test]
    fn target_outside_cone_projects() {
        // cone spanned by (1,1) and (1,0); target (-1, 1) projects to (0,0)..(0,?)
        let s = solve_nnls(&[vec![1.0, 1.0], vec![1.0, 0.0]], &[-1.0, 1.0]).unwrap();
        // best is λ(1,1) with λ = 0 or positive: minimize (λ+1)² + (λ-1)² → λ = 0
        assert!(s.weights.iter().all(|&w| w >= 0.0));
        assert!((s.residual - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dependent_columns_handled() {
        let cols = vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let s = solve_nnls(&cols, &[4.0, 1.0, 0.0]).unwrap();
        assert!(s.residual < 1e-12);
        let recon: Vec<f64> =
            (0..3).map(|i| cols.iter().zip(&s.weights).map(|(c, w)| c[i] * w).sum()).collect();
        assert!((recon[0] - 4.0).abs() < 1e-12 && (recon[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(solve_nnls(&[vec![1.0]], &[1.0, 2.0]).is_err());
        assert!(solve_nnls(&[], &[1.0]).is_err());
    }
}
