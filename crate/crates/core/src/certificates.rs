//! Optimality certificates for `F = u_K(E)`, checkable without the solver.
//!
//! `F` is optimal iff it lies in `K` and some measure on the contact set
//! `∂K ∩ ∂F` is isotropic for `E`. For an atomic measure this says
//! `Σ λ_i u_i u_iᵀ = Q_E⁻¹` with `λ_i ≥ 0`: applying the isotropy condition
//! `Σ λ_i ⟨u_i, θ⟩_E² = ⟨θ, θ⟩_E` to every `θ` gives
//! `Q_E (Σ λ_i u_i u_iᵀ) Q_E = Q_E`. The constant of isotropy is absorbed in the
//! weights. Whether such weights exist is a nonnegative least-squares question.

use serde::Serialize;

use crate::bodies::{contains_ellipsoid, scan_boundary, ConvexBody, ScanOptions};
use crate::ellipsoids::Ellipsoid;
use crate::error::{check_dim, Result};
use crate::numerics::{norm2, solve_nnls, SymMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// `‖Σλ_i u_iu_iᵀ − Q_E⁻¹‖_F / ‖Q_E⁻¹‖_F`
    pub residual: f64,
    #[serde(skip)]
    pub metric: Ellipsoid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Verified { certificate: Certificate },
    FailedContainment { worst_margin: f64, witness: Vec<f64> },
    FailedIsotropy { residual: f64, certificate: Certificate },
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Verified { .. } => "Verified",
            Verdict::FailedContainment { .. } => "FailedContainment",
            Verdict::FailedIsotropy { .. } => "FailedIsotropy",
        }
    }
}

/// Points of `∂K ∩ ∂F` up to `tol`, one per antipodal pair.
pub fn contact_points(k: &ConvexBody, f: &Ellipsoid, tol: f64) -> Result<Vec<Vec<f64>>> {
    contact_points_with_hints(k, f, tol, &[])
}

/// As [`contact_points`], also testing caller-supplied candidates such as solver cuts.
pub fn contact_points_with_hints(
    k: &ConvexBody,
    f: &Ellipsoid,
    tol: f64,
    hints: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    check_dim(k.dim(), f.dim())?;
    let q = f.form();
    let mut found = Vec::new();
    if let Some(facets) = k.exact_facets() {
        let qi = f.inverse_form();
        for h in &facets {
            let s = qi.quad_form(h);
            if (s - 1.0).abs() <= tol {
                found.push(qi.matvec(h).iter().map(|v| v / s.sqrt()).collect());
            }
        }
    } else {
        let scan = scan_boundary(k, f, &ScanOptions::default())?;
        for (w, m) in scan.candidates {
            if m.abs() <= tol {
                found.push(w);
            }
        }
        for h in hints {
            if h.iter().all(|&v| v == 0.0) {
                continue;
            }
            let w = k.boundary_point(h)?;
            if (q.quad_form(&w) - 1.0).abs() <= tol {
                found.push(w);
            }
        }
    }
    Ok(fold_points(found))
}

/// Antipodal folding plus merging of points closer than `1e-4` in angle.
fn fold_points(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut p in points {
        let lead = p.iter().fold(0.0f64, |b, &v| if v.abs() > b.abs() { v } else { b });
        if lead < 0.0 {
            p.iter_mut().for_each(|v| *v = -*v);
        }
        let np = norm2(&p);
        let close = out.iter().any(|o| {
            let c = o.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>() / (norm2(o) * np);
            c.clamp(-1.0, 1.0).acos() < 1e-4
        });
        if !close {
            out.push(p);
        }
    }
    out
}

/// Symmetric matrices as vectors with off-diagonal entries scaled by `√2`,
/// so the Euclidean norm is the Frobenius norm.
fn svec(s: &SymMatrix) -> Vec<f64> {
    let n = s.dim();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(if i == j { s.get(i, i) } else { std::f64::consts::SQRT_2 * s.get(i, j) });
        }
    }
    out
}

/// Best nonnegative weights with `Σ λ_i u_i u_iᵀ ≈ Q_E⁻¹`.
pub fn isotropy_certificate(e: &Ellipsoid, points: &[Vec<f64>]) -> Result<Certificate> {
    for p in points {
        check_dim(e.dim(), p.len())?;
    }
    let target = svec(e.inverse_form());
    let scale = norm2(&target);
    if points.is_empty() {
        return Ok(Certificate { points: Vec::new(), weights: Vec::new(), residual: 1.0, metric: e.clone() });
    }
    let columns: Vec<Vec<f64>> = points.iter().map(|u| svec(&SymMatrix::from_outer(u))).collect();
    let sol = solve_nnls(&columns, &target)?;
    Ok(Certificate { points: points.to_vec(), weights: sol.weights, residual: sol.residual / scale, metric: e.clone() })
}

/// Containment of `F` in `K`, then isotropy of the contact points with residual at most `100·tol`.
pub fn verify_u(k: &ConvexBody, e: &Ellipsoid, f: &Ellipsoid, tol: f64) -> Result<Verdict> {
    verify_u_with_hints(k, e, f, tol, &[])
}

pub fn verify_u_with_hints(
    k: &ConvexBody,
    e: &Ellipsoid,
    f: &Ellipsoid,
    tol: f64,
    hints: &[Vec<f64>],
) -> Result<Verdict> {
    check_dim(k.dim(), e.dim())?;
    let verdict = contains_ellipsoid(k, f, tol)?;
    if !verdict.contained {
        return Ok(Verdict::FailedContainment { worst_margin: verdict.worst_margin, witness: verdict.witness });
    }
    let points = contact_points_with_hints(k, f, tol, hints)?;
    let certificate = isotropy_certificate(e, &points)?;
    if certificate.residual <= 100.0 * tol {
        Ok(Verdict::Verified { certificate })
    } else {
        Ok(Verdict::FailedIsotropy { residual: certificate.residual, certificate })
    }
}
