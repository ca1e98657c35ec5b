//! Brute-force references for planar instances and Monte-Carlo evaluation of `M`.
//!
//! The planar search walks ellipse shapes `(b/a, φ)` on a grid. For a fixed
//! shape `Q₀` the largest contained copy `Q₀/s²` is found exactly from the
//! boundary samples, `s² = min_x xᵀQ₀x`, and since `M_E` decreases with the
//! scale this copy is the best ellipse of that shape. Containment is only
//! tested at the samples, so the reference can err towards slightly too large
//! ellipses; dense sampling keeps that error far below the comparison tolerances.

use serde::{Deserialize, Serialize};

use crate::bodies::ConvexBody;
use crate::ellipsoids::{m_ellipsoid, sample_mu, Ellipsoid};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{Matrix, SymMatrix};
use crate::par::{map_slice, ExecMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub axis_steps: usize,
    pub angle_steps: usize,
    pub refine_rounds: usize,
    pub boundary_samples: usize,
    pub mode: ExecMode,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { axis_steps: 120, angle_steps: 90, refine_rounds: 3, boundary_samples: 2048, mode: ExecMode::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    #[serde(rename = "Q")]
    pub form: SymMatrix,
    #[serde(rename = "J")]
    pub j_value: f64,
    /// Semiaxes `a ≥ b` and rotation `φ` of the best ellipse.
    pub semiaxes: [f64; 2],
    pub angle: f64,
    /// Final grid spacing in `b/a` and in `φ`.
    pub resolution: [f64; 2],
    pub evaluated: usize,
}

/// Form of the ellipse with semiaxes `a`, `b` rotated by `φ`.
pub fn ellipse_form(a: f64, b: f64, phi: f64) -> SymMatrix {
    let (s, c) = phi.sin_cos();
    let r = Matrix::from_rows(&[vec![c, -s], vec![s, c]]).expect("2x2");
    SymMatrix::from_diag(&[1.0 / (a * a), 1.0 / (b * b)]).congruence(&r.transpose())
}

#[derive(Clone, Copy)]
struct Cell {
    j: f64,
    a: f64,
    b: f64,
    phi: f64,
}

const MAX_SLIDES: usize = 20;

fn better(x: &Cell, y: &Cell) -> bool {
    // deterministic tie-break on (a, b, φ)
    (x.j, x.a, x.b, x.phi) < (y.j, y.a, y.b, y.phi)
}

pub fn brute_force_u(k: &ConvexBody, e: &Ellipsoid, g: &GridConfig) -> Result<OracleResult> {
    check_dim(2, k.dim())?;
    check_dim(2, e.dim())?;
    if g.axis_steps == 0 || g.angle_steps == 0 || g.boundary_samples == 0 {
        return Err(Error::InvalidInput("grid sizes must be positive".into()));
    }
    let samples: Vec<Vec<f64>> = (0..g.boundary_samples)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / g.boundary_samples as f64;
            k.boundary_point(&[t.cos(), t.sin()])
        })
        .collect::<Result<_>>()?;
    let c = e.inverse_form();

    let evaluate = |ratio: f64, phi: f64| -> Cell {
        let q0 = ellipse_form(1.0, ratio, phi);
        let s2 = samples.iter().map(|x| q0.quad_form(x)).fold(f64::INFINITY, f64::min);
        // the largest copy Q₀/s² that keeps every sample at xᵀQx ≥ 1
        let s = s2.sqrt();
        let q = q0.scale(1.0 / s2);
        let j = (c.as_matrix().matmul(q.as_matrix()).trace() / 2.0).sqrt();
        Cell { j: if j.is_finite() { j } else { f64::INFINITY }, a: s, b: s * ratio, phi }
    };

    let mut evaluated = 0;
    let search = |ratios: &[f64], angles: &[f64], evaluated: &mut usize| -> Option<Cell> {
        let cells: Vec<(f64, f64)> = ratios.iter().flat_map(|&r| angles.iter().map(move |&p| (r, p))).collect();
        *evaluated += cells.len();
        let vals: Vec<Cell> = map_slice(g.mode, &cells, |&(r, p)| evaluate(r, p));
        vals.into_iter().filter(|c| c.j.is_finite()).fold(None, |best: Option<Cell>, c| match best {
            Some(b) if !better(&c, &b) => Some(b),
            _ => Some(c),
        })
    };

    let mut dr = 1.0 / g.axis_steps as f64;
    let mut dp = std::f64::consts::PI / g.angle_steps as f64;
    let ratios: Vec<f64> = (1..=g.axis_steps).map(|i| i as f64 * dr).collect();
    let angles: Vec<f64> = (0..g.angle_steps).map(|i| i as f64 * dp).collect();
    let mut best = search(&ratios, &angles, &mut evaluated).ok_or(Error::NoFeasiblePoint)?;
    for _ in 0..g.refine_rounds {
        let (wr, wp) = (2.0 * dr, 2.0 * dp);
        dr /= 10.0;
        dp /= 10.0;
        // slide the window while the incumbent sits on its edge
        for _ in 0..MAX_SLIDES {
            let (r0, p0) = (best.b / best.a, best.phi);
            let ratios: Vec<f64> = (0..41).map(|i| r0 - wr + i as f64 * dr).filter(|&r| r > 0.0 && r <= 1.0).collect();
            let angles: Vec<f64> =
                (0..41).map(|i| (p0 - wp + i as f64 * dp).rem_euclid(std::f64::consts::PI)).collect();
            let Some(c) = search(&ratios, &angles, &mut evaluated) else { break };
            if !better(&c, &best) {
                break;
            }
            best = c;
            let dphi = (best.phi - p0).rem_euclid(std::f64::consts::PI);
            let dphi = dphi.min(std::f64::consts::PI - dphi);
            let on_edge = ((best.b / best.a - r0).abs() > wr - 1.5 * dr && best.b < best.a) || dphi > wp - 1.5 * dp;
            if !on_edge {
                break;
            }
        }
    }
    let form = ellipse_form(best.a, best.b, best.phi);
    let f = Ellipsoid::new(form.clone())?;
    Ok(OracleResult {
        j_value: m_ellipsoid(e, &f)?,
        form,
        semiaxes: [best.a, best.b],
        angle: best.phi,
        resolution: [dr, dp],
        evaluated,
    })
}

/// Monte-Carlo `M_E(K)`: the root of the mean of `‖x‖_K²` over `μ_E`, with a
/// delta-method standard error.
pub fn quadrature_m(e: &Ellipsoid, k: &ConvexBody, count: usize, seed: u64) -> Result<(f64, f64)> {
    quadrature_m_with(e, k, count, seed, ExecMode::default())
}

pub fn quadrature_m_with(e: &Ellipsoid, k: &ConvexBody, count: usize, seed: u64, mode: ExecMode) -> Result<(f64, f64)> {
    check_dim(e.dim(), k.dim())?;
    if count < 100 {
        return Err(Error::InvalidInput("quadrature needs at least 100 samples".into()));
    }
    let xs = sample_mu(e, count, seed)?;
    let vals: Vec<f64> = map_slice(mode, &xs, |x| {
        let v = k.norm(x);
        v * v
    });
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let se_mean = (var / n).sqrt();
    let est = mean.sqrt();
    Ok((est, se_mean / (2.0 * est)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_form_axes() {
        let q = ellipse_form(2.0, 1.0, 0.0);
        assert!(q.relative_distance(&SymMatrix::from_diag(&[0.25, 1.0])) < 1e-15);
        let q = ellipse_form(2.0, 1.0, std::f64::consts::FRAC_PI_2);
        assert!(q.relative_distance(&SymMatrix::from_diag(&[1.0, 0.25])) < 1e-15);
    }

    #[test]
    fn square_reference() {
        let r = brute_force_u(&ConvexBody::cube(2), &Ellipsoid::unit_ball(2), &GridConfig::default()).unwrap();
        assert!((r.j_value - 1.0).abs() < 1e-9);
        assert!(r.form.relative_distance(&SymMatrix::identity(2)) < 1e-6);
    }

    #[test]
    fn rejects_other_dimensions() {
        let e = Ellipsoid::unit_ball(3);
        assert!(brute_force_u(&ConvexBody::cube(3), &e, &GridConfig::default()).is_err());
    }

    #[test]
    fn quadrature_ball_is_exact() {
        let (m, se) = quadrature_m(&Ellipsoid::unit_ball(3), &ConvexBody::euclidean_ball(3), 1000, 1).unwrap();
        assert!((m - 1.0).abs() < 1e-12 && se < 1e-12);
        assert!(quadrature_m(&Ellipsoid::unit_ball(2), &ConvexBody::cube(2), 10, 0).is_err());
    }
}
