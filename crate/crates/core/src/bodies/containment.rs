//! Ellipsoid-in-body separation.
//!
//! For `F = {x : xᵀQx ≤ 1}` and a body `K`, `F ⊂ K` iff `xᵀQx ≥ 1` on `∂K`.
//! With `Q = LLᵀ` and `x = L⁻ᵀu`, the worst boundary point maximizes the
//! convex function `f(u) = ‖L⁻ᵀu‖_K` over the unit sphere, and then
//! `min_{∂K} xᵀQx = 1/f²`. Maximizing a convex 1-homogeneous function over the
//! sphere has a monotone fixed-point ascent: `u ← ∂f(u)/|∂f(u)|`, which
//! never decreases `f` and stops at a local maximum.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ConvexBody;
use crate::ellipsoids::Ellipsoid;
use crate::error::{check_dim, Result};
use crate::numerics::{norm2, SymMatrix};
use crate::par::{map_range, ExecMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentVerdict {
    pub contained: bool,
    /// `min xᵀQx − 1` over the boundary points examined; negative means violation.
    pub worst_margin: f64,
    pub witness: Vec<f64>,
    /// `false` when the verdict comes from the multistart search rather than a closed form.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub starts_per_dim: usize,
    /// Size of the fixed direction net; `None` picks a default per dimension.
    pub net_size: Option<usize>,
    pub seed: u64,
    pub max_steps: usize,
    pub mode: ExecMode,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { starts_per_dim: 64, net_size: None, seed: 0, max_steps: 500, mode: ExecMode::default() }
    }
}

/// Local minima of `xᵀQx − 1` over `∂K`, sorted by margin, one per antipodal pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryScan {
    pub candidates: Vec<(Vec<f64>, f64)>,
    pub exact: bool,
}

impl BoundaryScan {
    pub fn worst(&self) -> (&[f64], f64) {
        let (w, m) = &self.candidates[0];
        (w, *m)
    }
}

pub fn contains_ellipsoid(k: &ConvexBody, f: &Ellipsoid, tol: f64) -> Result<ContainmentVerdict> {
    contains_ellipsoid_with(k, f, tol, &ScanOptions::default())
}

pub fn contains_ellipsoid_with(
    k: &ConvexBody,
    f: &Ellipsoid,
    tol: f64,
    opts: &ScanOptions,
) -> Result<ContainmentVerdict> {
    check_dim(k.dim(), f.dim())?;
    if let Some(facets) = k.exact_facets() {
        // s_j = h_jᵀQ⁻¹h_j is the squared support of F in direction h_j
        let qi = f.inverse_form();
        let (j, s) = facets
            .iter()
            .map(|h| qi.quad_form(h))
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (j, s)| if s > b.1 { (j, s) } else { b });
        let witness = k.boundary_point(&qi.matvec(&facets[j]))?;
        return Ok(ContainmentVerdict { contained: s <= 1.0 + tol, worst_margin: 1.0 / s - 1.0, witness, exact: true });
    }
    let scan = scan_boundary(k, f, opts)?;
    let (w, m) = scan.worst();
    Ok(ContainmentVerdict { contained: m >= -tol, worst_margin: m, witness: w.to_vec(), exact: false })
}

/// All local minima of the margin on `∂K` that the search reaches.
///
/// Bodies with a known facet list return one candidate per facet pair, exactly.
pub fn scan_boundary(k: &ConvexBody, f: &Ellipsoid, opts: &ScanOptions) -> Result<BoundaryScan> {
    check_dim(k.dim(), f.dim())?;
    let q = f.form();
    let margin = |x: &[f64]| q.quad_form(x) - 1.0;
    if let Some(facets) = k.exact_facets() {
        let qi = f.inverse_form();
        let mut candidates = Vec::with_capacity(facets.len());
        for h in &facets {
            let w = k.boundary_point(&qi.matvec(h))?;
            let m = margin(&w);
            candidates.push((w, m));
        }
        return Ok(BoundaryScan { candidates: dedupe(candidates), exact: true });
    }

    let n = k.dim();
    let linv = f.cholesky_factor().inverse()?;
    let to_x = |u: &[f64]| linv.tr_matvec(u);
    // value of the ascent objective at a direction u
    let value = |u: &[f64]| k.norm(&to_x(u));

    let net = direction_net(n, opts.net_size, opts.seed);
    let net_vals: Vec<f64> = map_range(opts.mode, net.len(), |i| {
        let u = normalized(&f.cholesky_factor().tr_matvec(&net[i]));
        value(&u)
    });
    let mut order: Vec<usize> = (0..net.len()).collect();
    order.sort_by(|&a, &b| net_vals[b].total_cmp(&net_vals[a]));

    let mut starts: Vec<Vec<f64>> = order.iter().take(4 * n).map(|&i| net[i].clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5ca1_ab1e);
    for _ in 0..opts.starts_per_dim * n {
        starts.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
    }

    let ascend = |theta: &[f64]| -> Vec<f64> {
        let mut u = normalized(&f.cholesky_factor().tr_matvec(theta));
        let mut fu = value(&u);
        for _ in 0..opts.max_steps {
            let (_, y) = k.norm_and_subgradient(&to_x(&u));
            let g = linv.matvec(&y);
            let gn = norm2(&g);
            if gn == 0.0 {
                break;
            }
            let next: Vec<f64> = g.iter().map(|v| v / gn).collect();
            let fn_ = value(&next);
            let moved = norm2(&sub(&next, &u)).min(norm2(&add(&next, &u)));
            if fn_ < fu {
                break;
            }
            u = next;
            let gain = fn_ - fu;
            fu = fn_;
            if moved < 1e-12 || gain <= 1e-15 * fu {
                break;
            }
        }
        to_x(&u)
    };
    let mut points: Vec<Vec<f64>> = map_range(opts.mode, starts.len(), |i| ascend(&starts[i]));
    // the best net direction itself guards against an ascent that stalls early
    points.push(net[order[0]].clone());

    let mut candidates = Vec::with_capacity(points.len());
    for x in points {
        let w = k.boundary_point(&x)?;
        let m = margin(&w);
        candidates.push((w, m));
    }
    Ok(BoundaryScan { candidates: dedupe(candidates), exact: false })
}

/// `K ⊂ F` check. `worst_margin = 1 − max_{x∈K} xᵀQx`, witness is the maximizer on `∂K`.
///
/// A convex quadratic is maximized at extreme points, so vertex lists decide
/// this exactly; other bodies use the ascent `x ← argmax_{K} (Qx)·z`.
pub fn contained_in_ellipsoid(k: &ConvexBody, f: &Ellipsoid, tol: f64) -> Result<ContainmentVerdict> {
    contained_in_ellipsoid_with(k, f, tol, &ScanOptions::default())
}

pub fn contained_in_ellipsoid_with(
    k: &ConvexBody,
    f: &Ellipsoid,
    tol: f64,
    opts: &ScanOptions,
) -> Result<ContainmentVerdict> {
    check_dim(k.dim(), f.dim())?;
    let q = f.form();
    if let Some(vertices) = k.exact_vertices() {
        let (i, v) = vertices
            .iter()
            .map(|w| q.quad_form(w))
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
        return Ok(ContainmentVerdict {
            contained: v <= 1.0 + tol,
            worst_margin: 1.0 - v,
            witness: vertices[i].clone(),
            exact: true,
        });
    }
    let (x, v) = max_quadratic(k, q, opts);
    let witness = k.boundary_point(&x)?;
    Ok(ContainmentVerdict { contained: v <= 1.0 + tol, worst_margin: 1.0 - v, witness, exact: false })
}

/// `max_{x∈K} xᵀSx` for positive semidefinite `S`, by the ascent
/// `x ← argmax_{z∈K} (Sx)·z` from the direction net and seeded random starts.
/// Exact for bodies with a known vertex list.
pub fn max_quadratic(k: &ConvexBody, s: &SymMatrix, opts: &ScanOptions) -> (Vec<f64>, f64) {
    if let Some(vertices) = k.exact_vertices() {
        return vertices
            .into_iter()
            .map(|w| {
                let v = s.quad_form(&w);
                (w, v)
            })
            .fold((Vec::new(), f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    }
    let n = k.dim();
    let net = direction_net(n, opts.net_size, opts.seed);
    let net_vals: Vec<f64> = map_range(opts.mode, net.len(), |i| {
        let x = k.boundary_point(&net[i]).expect("net directions are nonzero");
        s.quad_form(&x)
    });
    let mut order: Vec<usize> = (0..net.len()).collect();
    order.sort_by(|&a, &b| net_vals[b].total_cmp(&net_vals[a]));
    let mut starts: Vec<Vec<f64>> = order.iter().take(4 * n).map(|&i| net[i].clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x0dd_ba11);
    for _ in 0..opts.starts_per_dim * n {
        starts.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
    }
    let ascend = |theta: &[f64]| -> (Vec<f64>, f64) {
        let mut x = k.boundary_point(theta).expect("start directions are nonzero");
        let mut v = s.quad_form(&x);
        for _ in 0..opts.max_steps {
            let (_, next) = k.support_point(&s.matvec(&x));
            let nv = s.quad_form(&next);
            if !(nv > v * (1.0 + 1e-15)) {
                break;
            }
            x = next;
            v = nv;
        }
        (x, v)
    };
    let found: Vec<(Vec<f64>, f64)> = map_range(opts.mode, starts.len(), |i| ascend(&starts[i]));
    found.into_iter().fold((Vec::new(), f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
}

/// Fixed direction net: equal angles on the half circle for `n = 2`, a
/// Fibonacci sphere for `n = 3`, seeded Gaussian directions otherwise.
pub fn direction_net(n: usize, size: Option<usize>, seed: u64) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0]],
        2 => {
            let m = size.unwrap_or(720);
            (0..m)
                .map(|i| {
                    let t = std::f64::consts::PI * i as f64 / m as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect()
        }
        3 => {
            let m = size.unwrap_or(2000);
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let m = size.unwrap_or(512 * n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed_f00d);
            (0..m)
                .map(|_| {
                    let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                    normalized(&g)
                })
                .collect()
        }
    }
}

/// Merge antipodal and near-duplicate points, keeping the smaller margin; sort ascending.
fn dedupe(mut cands: Vec<(Vec<f64>, f64)>) -> Vec<(Vec<f64>, f64)> {
    for (w, _) in cands.iter_mut() {
        let lead = w.iter().fold(0.0f64, |b, &v| if v.abs() > b.abs() { v } else { b });
        if lead < 0.0 {
            w.iter_mut().for_each(|v| *v = -*v);
        }
    }
    cands.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    for (w, m) in cands {
        let scale = norm2(&w).max(1e-300);
        if out.iter().all(|(o, _)| norm2(&sub(o, &w)) > 1e-7 * scale) {
            out.push((w, m));
        }
    }
    out
}

fn normalized(x: &[f64]) -> Vec<f64> {
    let n = norm2(x);
    x.iter().map(|v| v / n).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}
