//! The map `E ↦ u_K(E)`: the ellipsoid `F ⊂ K` minimizing `M_E(F)`.
//!
//! Since `M_E²(F) = trace(Q_E⁻¹Q_F)/n` is linear in `B = Q_F` and `F ⊂ K` means
//! `xᵀBx ≥ 1` for every `x ∈ ∂K`, the problem is a semi-infinite LP. It is
//! solved by cutting planes, then refined through the concave dual described in
//! `polish`, and finally rescaled so that containment holds exactly.

mod cutting;
mod dual;
mod polish;

pub use dual::{solve_u_bar, verify_dual_equivalence, DualEquivalence, DualReport, DualStatus, UniquenessHint};

use serde::{Deserialize, Serialize};

use crate::bodies::{contains_ellipsoid_with, scan_boundary, ConvexBody, ContainmentVerdict};
use crate::ellipsoids::{m_ellipsoid, Ellipsoid};
use crate::error::{check_dim, Error, Result};
use crate::numerics::SymMatrix;
use crate::par::{map_range, ExecMode};

use cutting::{cutting_planes, scan_options, CutSet};
use polish::{merge_normals, polish};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub tol_feas: f64,
    /// Relative objective stall.
    pub tol_obj: f64,
    pub max_cuts: usize,
    /// LP box half-width.
    #[serde(rename = "box_R")]
    pub box_r: f64,
    pub restarts: usize,
    pub seed: u64,
    pub mode: ExecMode,
    /// Refine the cutting-plane result through the dual; off gives plain Kelley.
    pub polish: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol_feas: 1e-8,
            tol_obj: 1e-9,
            max_cuts: 2000,
            box_r: 1e6,
            restarts: 3,
            seed: 0,
            mode: ExecMode::default(),
            polish: true,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.tol_feas) && positive(self.tol_obj) && positive(self.box_r)) {
            return Err(Error::InvalidInput("tolerances and box bound must be positive".into()));
        }
        if self.max_cuts < 2 * dim {
            return Err(Error::InvalidInput(format!("max_cuts must be at least {}", 2 * dim)));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidInput("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    MaxCutsReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub minimizer: Ellipsoid,
    pub j_value: f64,
    pub status: SolveStatus,
    /// Boundary points of `K` used as constraints, plus refined contact points.
    pub cuts: Vec<Vec<f64>>,
    /// Cuts with `xᵀQ_Fx = 1` within `10·tol_feas`.
    pub active_cuts: Vec<Vec<f64>>,
    pub lp_iterations: usize,
    /// Largest relative Frobenius distance between restart minimizers.
    pub restart_spread: f64,
    pub polished: bool,
    /// Contact points and weights from the refinement, `Σ w_i x_i x_iᵀ = Q_E⁻¹`.
    pub contacts: Vec<(Vec<f64>, f64)>,
}

struct Run {
    form: SymMatrix,
    objective: f64,
    status: SolveStatus,
    cuts: Vec<Vec<f64>>,
    lp_iterations: usize,
    polished: bool,
    contacts: Vec<(Vec<f64>, f64)>,
}

pub fn solve_u(k: &ConvexBody, e: &Ellipsoid, cfg: &SolveConfig) -> Result<SolveReport> {
    check_dim(k.dim(), e.dim())?;
    cfg.validate(k.dim())?;
    let runs: Vec<Result<Run>> =
        map_range(cfg.mode, cfg.restarts, |r| solve_once(k, e, cfg, cfg.seed.wrapping_add(r as u64)));
    let runs: Vec<Run> = runs.into_iter().collect::<Result<_>>()?;
    let best = (0..runs.len())
        .min_by(|&a, &b| {
            let key = |r: &Run| (r.status != SolveStatus::Optimal, r.objective);
            key(&runs[a]).partial_cmp(&key(&runs[b])).unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("at least one restart");
    let spread = runs.iter().map(|r| r.form.relative_distance(&runs[best].form)).fold(0.0, f64::max);
    let lp_iterations = runs.iter().map(|r| r.lp_iterations).sum();
    let run = runs.into_iter().nth(best).expect("index in range");
    let minimizer = Ellipsoid::new(run.form)?;
    let q = minimizer.form();
    let active_cuts =
        run.cuts.iter().filter(|x| (q.quad_form(x) - 1.0).abs() <= 10.0 * cfg.tol_feas).cloned().collect();
    Ok(SolveReport {
        j_value: m_ellipsoid(e, &minimizer)?,
        minimizer,
        status: run.status,
        cuts: run.cuts,
        active_cuts,
        lp_iterations,
        restart_spread: spread,
        polished: run.polished,
        contacts: run.contacts,
    })
}

fn solve_once(k: &ConvexBody, e: &Ellipsoid, cfg: &SolveConfig, seed: u64) -> Result<Run> {
    let out = cutting_planes(k, e, cfg, seed)?;
    let mut run = Run {
        form: out.form,
        objective: out.objective,
        status: out.status,
        cuts: out.cuts,
        lp_iterations: out.lp_iterations,
        polished: false,
        contacts: Vec::new(),
    };
    if cfg.polish && run.status == SolveStatus::Optimal {
        if let Ok((form, objective, contacts)) = refine(k, e, cfg, &run.form, &out.active) {
            // the cutting-plane iterate is feasible, so its value bounds the optimum from above
            if objective <= run.objective * (1.0 + 1e-9) {
                run.form = form;
                run.objective = objective;
                run.polished = true;
                let mut cuts = CutSet::from_points(std::mem::take(&mut run.cuts));
                for (x, _) in &contacts {
                    if let Ok(w) = k.boundary_point(x) {
                        cuts.add(w);
                    }
                }
                run.cuts = cuts.points;
                run.contacts = contacts;
            }
        }
    }
    Ok(run)
}

type Refined = (SymMatrix, f64, Vec<(Vec<f64>, f64)>);

/// Dual refinement with a normal-exchange loop, then exact rescaling.
fn refine(
    k: &ConvexBody,
    e: &Ellipsoid,
    cfg: &SolveConfig,
    start: &SymMatrix,
    active: &[(Vec<f64>, f64)],
) -> Result<Refined> {
    let c = e.inverse_form();
    let opts = scan_options(cfg);
    let normal = |x: &[f64]| k.norm_and_subgradient(x).1;
    let mut items: Vec<(Vec<f64>, f64)> = active.iter().map(|(x, w)| (normal(x), *w)).collect();
    match k.exact_facets() {
        Some(facets) => items.extend(facets.into_iter().map(|h| (h, 0.0))),
        None => {
            let f = Ellipsoid::new(start.clone())?;
            let scan = scan_boundary(k, &f, &opts)?;
            items.extend(scan.candidates.iter().filter(|(_, m)| *m < 1e-2).map(|(w, _)| (normal(w), 0.0)));
        }
    }
    let (mut normals, mut weights) = merge_normals(items);
    let exact = k.exact_facets().is_some();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let p = polish(c, normals.clone(), weights.clone())?;
        let f = Ellipsoid::new(p.form.clone())?;
        let verdict = contains_ellipsoid_with(k, &f, cfg.tol_feas, &opts)?;
        let m = verdict.worst_margin;
        let done = exact || m >= -1e-13 || rounds >= 25;
        if !done {
            let scan = scan_boundary(k, &f, &opts)?;
            let fresh: Vec<(Vec<f64>, f64)> =
                scan.candidates.iter().filter(|(_, mm)| *mm < -1e-13).map(|(w, _)| (normal(w), 0.0)).collect();
            let before = normals.len();
            let mut all: Vec<(Vec<f64>, f64)> = normals.iter().cloned().zip(p.weights.iter().cloned()).collect();
            all.extend(fresh);
            let (nn, ww) = merge_normals(all);
            if nn.len() > before {
                normals = nn;
                weights = ww;
                continue;
            }
        }
        if !(m > -1.0) {
            return Err(Error::NoConvergence { what: "refinement", iterations: rounds });
        }
        let factor = if m < 0.0 { 1.0 / (1.0 + m) } else { 1.0 };
        let form = p.form.scale(factor);
        let objective = crate::numerics::dot(&crate::numerics::trace_coeffs(c), &form.to_packed());
        let g = form.inverse()?;
        let contacts = p.contacts(&g).into_iter().map(|(x, w)| (x, w * factor)).collect();
        return Ok((form, objective, contacts));
    }
}

pub fn j_value(k: &ConvexBody, e: &Ellipsoid, cfg: &SolveConfig) -> Result<f64> {
    Ok(solve_u(k, e, cfg)?.j_value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JohnCheck {
    pub is_fixed_point: bool,
    /// `‖Q_{u_K(E)} − Q_E‖_F / ‖Q_E‖_F`, or infinity when `E ⊄ K`.
    pub distance: f64,
    pub containment: ContainmentVerdict,
    pub report: Option<SolveReport>,
}

/// Whether `E` is a fixed point of `u_K`, which characterizes the Löwner–John ellipsoid.
pub fn check_john(k: &ConvexBody, e: &Ellipsoid, cfg: &SolveConfig) -> Result<JohnCheck> {
    check_dim(k.dim(), e.dim())?;
    let containment = contains_ellipsoid_with(k, e, 10.0 * cfg.tol_feas, &scan_options(cfg))?;
    if !containment.contained {
        return Ok(JohnCheck { is_fixed_point: false, distance: f64::INFINITY, containment, report: None });
    }
    let report = solve_u(k, e, cfg)?;
    let distance = report.minimizer.distance(e);
    Ok(JohnCheck { is_fixed_point: distance <= 100.0 * cfg.tol_feas, distance, containment, report: Some(report) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `E_1, E_2, …` (the start is not repeated).
    pub iterates: Vec<Ellipsoid>,
    /// Relative distance between consecutive forms, starting with `d(E_1, E_0)`.
    pub steps: Vec<f64>,
    pub fixed_point_reached: bool,
}

pub fn iterate_u(k: &ConvexBody, e0: &Ellipsoid, steps: usize, cfg: &SolveConfig) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be at least 1".into()));
    }
    let mut current = e0.clone();
    let mut t = Trajectory { iterates: Vec::new(), steps: Vec::new(), fixed_point_reached: false };
    for _ in 0..steps {
        let next = solve_u(k, &current, cfg)?.minimizer;
        let d = next.distance(&current);
        t.iterates.push(next.clone());
        t.steps.push(d);
        current = next;
        if d < 100.0 * cfg.tol_feas {
            t.fixed_point_reached = true;
            break;
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_defaults_and_names() {
        let cfg: SolveConfig = serde_json::from_str(r#"{"box_R": 1e4, "seed": 7}"#).unwrap();
        assert_eq!(cfg.box_r, 1e4);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tol_feas, 1e-8);
        assert!(serde_json::from_str::<SolveConfig>(r#"{"box_r": 1}"#).is_err());
        assert!(SolveConfig { max_cuts: 3, ..Default::default() }.validate(2).is_err());
    }

    #[test]
    fn square_gives_the_disk() {
        let r = solve_u(&ConvexBody::cube(2), &Ellipsoid::unit_ball(2), &SolveConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.polished);
        assert!(r.minimizer.form().relative_distance(&SymMatrix::identity(2)) < 1e-10);
        assert!((r.j_value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rectangle_value() {
        let rect = ConvexBody::polytope_h(vec![vec![0.5, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = solve_u(&rect, &Ellipsoid::unit_ball(2), &SolveConfig::default()).unwrap();
        assert!(r.minimizer.form().relative_distance(&SymMatrix::from_diag(&[0.25, 1.0])) < 1e-10);
        assert!((r.j_value * r.j_value - 0.625).abs() < 1e-10);
    }

    #[test]
    fn cross_polytope_gives_inscribed_ball() {
        let r = solve_u(&ConvexBody::cross_polytope(2), &Ellipsoid::unit_ball(2), &SolveConfig::default()).unwrap();
        assert!(r.minimizer.form().relative_distance(&SymMatrix::identity(2).scale(2.0)) < 1e-9, "{:?}", r.minimizer);
        assert!((r.j_value - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn plain_kelley_is_coarser_but_close() {
        let cfg = SolveConfig { polish: false, ..Default::default() };
        let rect = ConvexBody::polytope_h(vec![vec![0.5, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = solve_u(&rect, &Ellipsoid::unit_ball(2), &cfg).unwrap();
        assert!(!r.polished);
        assert!((r.j_value * r.j_value - 0.625).abs() < 1e-3);
    }

    #[test]
    fn john_checks() {
        let cfg = SolveConfig::default();
        let sq = ConvexBody::cube(2);
        assert!(check_john(&sq, &Ellipsoid::unit_ball(2), &cfg).unwrap().is_fixed_point);
        let off = check_john(&sq, &Ellipsoid::from_diag(&[1.0, 4.0]).unwrap(), &cfg).unwrap();
        assert!(!off.is_fixed_point);
        let outside = check_john(&sq, &Ellipsoid::ball(2, 2.0).unwrap(), &cfg).unwrap();
        assert!(!outside.is_fixed_point && !outside.containment.contained && outside.report.is_none());
    }

    #[test]
    fn iteration_on_rectangle() {
        let rect = ConvexBody::polytope_h(vec![vec![0.5, 0.0], vec![0.0, 1.0]]).unwrap();
        let t = iterate_u(&rect, &Ellipsoid::unit_ball(2), 5, &SolveConfig::default()).unwrap();
        assert!(t.fixed_point_reached);
        assert_eq!(t.iterates.len(), 2);
        assert!(t.iterates[0].form().relative_distance(&SymMatrix::from_diag(&[0.25, 1.0])) < 1e-9);
        let t = iterate_u(&ConvexBody::cube(2), &Ellipsoid::unit_ball(2), 5, &SolveConfig::default()).unwrap();
        assert_eq!(t.iterates.len(), 1);
    }
}
