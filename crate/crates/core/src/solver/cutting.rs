//! Kelley cutting planes for `min trace(Q_E⁻¹B)` subject to `xᵀBx ≥ 1` on `∂K`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{SolveConfig, SolveStatus};
use crate::bodies::{scan_boundary, ConvexBody, ScanOptions};
use crate::ellipsoids::Ellipsoid;
use crate::error::{Error, Result};
use crate::numerics::{dot, norm2, quad_coeffs, solve_lp_warm, trace_coeffs, LpProblem, Row, SymMatrix};

/// Cuts are stored as boundary points with the sign folded so that the
/// largest-magnitude coordinate is positive.
pub(crate) struct CutSet {
    pub points: Vec<Vec<f64>>,
    units: Vec<Vec<f64>>,
}

impl CutSet {
    pub fn new() -> Self {
        CutSet { points: Vec::new(), units: Vec::new() }
    }

    pub fn from_points(points: Vec<Vec<f64>>) -> Self {
        let mut set = CutSet::new();
        for x in points {
            set.add(x);
        }
        set
    }

    /// Adds `x` unless it lies within `1e-6` rad of an existing cut; returns whether it was added.
    pub fn add(&mut self, x: Vec<f64>) -> bool {
        let lead = x.iter().fold(0.0f64, |b, &v| if v.abs() > b.abs() { v } else { b });
        let x: Vec<f64> = if lead < 0.0 { x.iter().map(|v| -v).collect() } else { x };
        let nx = norm2(&x);
        let u: Vec<f64> = x.iter().map(|v| v / nx).collect();
        // |cos| > cos(1e-6)
        if self.units.iter().any(|o| 1.0 - dot(o, &u).abs() < 5e-13) {
            return false;
        }
        self.points.push(x);
        self.units.push(u);
        true
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

pub(crate) struct CuttingOutcome {
    /// Feasible form after the final rescale.
    pub form: SymMatrix,
    pub objective: f64,
    pub status: SolveStatus,
    pub cuts: Vec<Vec<f64>>,
    /// Cut points carrying a positive LP multiplier in the last relaxation.
    pub active: Vec<(Vec<f64>, f64)>,
    pub lp_iterations: usize,
}

pub(crate) fn scan_options(cfg: &SolveConfig) -> ScanOptions {
    ScanOptions { seed: cfg.seed, mode: cfg.mode, ..ScanOptions::default() }
}

pub(crate) fn cutting_planes(k: &ConvexBody, e: &Ellipsoid, cfg: &SolveConfig, seed: u64) -> Result<CuttingOutcome> {
    let n = k.dim();
    let c = e.inverse_form();
    let mut lp = LpProblem::new(trace_coeffs(c), cfg.box_r);
    let mut cuts = CutSet::new();
    let push = |lp: &mut LpProblem, cuts: &mut CutSet, x: Vec<f64>| -> bool {
        if cuts.add(x.clone()) {
            lp.push(quad_coeffs(&x), 1.0);
            true
        } else {
            false
        }
    };
    for i in 0..n {
        let mut d = vec![0.0; n];
        d[i] = 1.0;
        push(&mut lp, &mut cuts, k.boundary_point(&d)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4 * n {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        if norm2(&g) > 0.0 {
            push(&mut lp, &mut cuts, k.boundary_point(&g)?);
        }
    }

    let opts = scan_options(cfg);
    let mut basis: Option<Vec<Row>> = None;
    let mut lp_iterations = 0;
    let mut best: Option<(SymMatrix, f64)> = None;
    let mut status = SolveStatus::MaxCutsReached;
    let mut last_active = Vec::new();
    let mut last_objective = f64::NEG_INFINITY;
    let mut stalled = 0usize;

    while cuts.len() <= cfg.max_cuts {
        let sol = solve_lp_warm(&lp, basis.as_deref())?;
        lp_iterations += sol.iterations;
        basis = Some(sol.basis.clone());
        last_active = (0..cuts.len())
            .filter(|&i| sol.multipliers[i] > 0.0)
            .map(|i| (cuts.points[i].clone(), sol.multipliers[i]))
            .collect();
        let b = SymMatrix::from_packed(n, &sol.x);
        let objective = sol.value;
        if (objective - last_objective).abs() <= cfg.tol_obj * objective.abs() {
            stalled += 1;
        } else {
            stalled = 0;
        }
        last_objective = objective;

        let f = match Ellipsoid::new(b.clone()) {
            Ok(f) => f,
            Err(_) => {
                // a nonpositive direction v gives a boundary point with xᵀBx ≤ 0 < 1
                let eig = b.eigen()?;
                let mut added = false;
                for (idx, &l) in eig.values.iter().enumerate().rev() {
                    if idx + 1 < eig.values.len() && l > 1e-9 * eig.values[0].abs() {
                        break;
                    }
                    added |= push(&mut lp, &mut cuts, k.boundary_point(&eig.vector(idx))?);
                }
                if !added {
                    return Err(Error::NoConvergence { what: "eigenvector cuts", iterations: cuts.len() });
                }
                continue;
            }
        };
        let scan = scan_boundary(k, &f, &opts)?;
        let (_, margin) = scan.worst();
        if margin > -1.0 {
            let factor = if margin < 0.0 { 1.0 / (1.0 + margin) } else { 1.0 };
            let obj = objective * factor;
            if best.as_ref().is_none_or(|(_, o)| obj < *o) {
                best = Some((b.scale(factor), obj));
            }
        }
        if margin >= -cfg.tol_feas {
            status = SolveStatus::Optimal;
            best = Some(rescaled(&b, objective, margin));
            break;
        }
        let mut added = 0;
        for (w, m) in &scan.candidates {
            if *m >= -cfg.tol_feas || added >= 2 * n {
                break;
            }
            if push(&mut lp, &mut cuts, w.clone()) {
                added += 1;
            }
        }
        if added == 0 || stalled >= 50 {
            // every violated point is already a cut: the relaxation cannot improve further
            status = SolveStatus::Optimal;
            if margin > -1.0 {
                best = Some(rescaled(&b, objective, margin));
            }
            break;
        }
    }
    let (form, objective) = best.ok_or(Error::NoConvergence { what: "cutting planes", iterations: cuts.len() })?;
    Ok(CuttingOutcome { form, objective, status, cuts: cuts.points, active: last_active, lp_iterations })
}

/// `B / (1 + m)` for a negative worst margin `m`, which puts the worst boundary point exactly on `∂F`.
fn rescaled(b: &SymMatrix, objective: f64, margin: f64) -> (SymMatrix, f64) {
    if margin < 0.0 {
        let factor = 1.0 / (1.0 + margin);
        (b.scale(factor), objective * factor)
    } else {
        (b.clone(), objective)
    }
}
