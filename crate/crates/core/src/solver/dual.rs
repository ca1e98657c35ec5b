//! The circumscribed problem: maximize `M_E(F)` over ellipsoids `F ⊃ K`.
//!
//! In `B = Q_F` this is `max trace(Q_E⁻¹B)` subject to `0 ≤ xᵀBx ≤ 1` on `∂K`.
//! The upper constraints are finite for bodies with a vertex list; smooth balls
//! get them by cutting planes. The lower constraints are eigenvector cuts.
//! A supremum that is only approached by degenerate forms is reported as
//! such, and a second LP over the optimal face looks for the best-conditioned
//! maximizer and for evidence of non-uniqueness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::cutting::{scan_options, CutSet};
use super::{solve_u, SolveConfig};
use crate::bodies::{contained_in_ellipsoid_with, direction_net, max_quadratic, ConvexBody, ScanOptions, Shape};
use crate::ellipsoids::Ellipsoid;
use crate::error::{check_dim, Error, Result};
use crate::numerics::{dot, quad_coeffs, solve_lp_warm, trace_coeffs, LpProblem, Row, SymMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum DualStatus {
    Attained { maximizer: Ellipsoid },
    /// The supremum is approached by ellipsoids degenerating along this direction.
    NonAttained { degenerate_direction: Vec<f64> },
    MaxCutsReached,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UniquenessHint {
    Unknown,
    MultipleFound { second: Ellipsoid },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualReport {
    pub status: DualStatus,
    /// `sup M_E(F)`, or the best bound found when the cut budget ran out.
    pub i_value: f64,
    pub uniqueness_hint: UniquenessHint,
    /// Optimal form of the first-stage LP; may be singular.
    pub form: SymMatrix,
    pub cuts: usize,
    pub lp_iterations: usize,
}

/// LP over packed `B`, optionally with an extra variable `t` (last) that
/// lower-bounds the spectrum of `B`.
struct DualLp {
    n: usize,
    lp: LpProblem,
    with_t: bool,
    /// Fixed spectral floor when there is no `t`.
    floor: f64,
    upper: CutSet,
    basis: Option<Vec<Row>>,
    iterations: usize,
}

struct Stage {
    b: SymMatrix,
    t: f64,
    value: f64,
    hit_budget: bool,
}

impl DualLp {
    fn new(n: usize, objective: Vec<f64>, with_t: bool, floor: f64, box_r: f64) -> Self {
        DualLp {
            n,
            lp: LpProblem::new(objective, box_r),
            with_t,
            floor,
            upper: CutSet::new(),
            basis: None,
            iterations: 0,
        }
    }

    fn row(&self, mut coeffs: Vec<f64>, t_coeff: f64) -> Vec<f64> {
        if self.with_t {
            coeffs.push(t_coeff);
        }
        coeffs
    }

    /// `xᵀBx ≤ 1`
    fn add_upper(&mut self, x: Vec<f64>) -> bool {
        if self.upper.add(x.clone()) {
            let r = self.row(quad_coeffs(&x).iter().map(|v| -v).collect(), 0.0);
            self.lp.push(r, -1.0);
            true
        } else {
            false
        }
    }

    /// `vᵀBv ≥ t` (or `≥ floor`) for unit `v`
    fn add_spectral(&mut self, v: &[f64]) {
        let r = self.row(quad_coeffs(v), -1.0);
        let rhs = if self.with_t { 0.0 } else { self.floor };
        self.lp.push(r, rhs);
    }

    fn add_row(&mut self, coeffs: Vec<f64>, rhs: f64) {
        let r = self.row(coeffs, 0.0);
        self.lp.push(r, rhs);
    }

    fn run(&mut self, k: &ConvexBody, exact: bool, cfg: &SolveConfig, opts: &ScanOptions) -> Result<Stage> {
        let m = self.n * (self.n + 1) / 2;
        loop {
            if self.lp.constraints.len() > cfg.max_cuts {
                let sol = solve_lp_warm(&self.lp, self.basis.as_deref())?;
                self.iterations += sol.iterations;
                let b = SymMatrix::from_packed(self.n, &sol.x[..m]);
                return Ok(Stage { t: 0.0, value: sol.value, b, hit_budget: true });
            }
            let sol = solve_lp_warm(&self.lp, self.basis.as_deref())?;
            self.iterations += sol.iterations;
            self.basis = Some(sol.basis.clone());
            let b = SymMatrix::from_packed(self.n, &sol.x[..m]);
            let t = if self.with_t { sol.x[m] } else { self.floor };
            let eig = b.eigen()?;
            let scale = b.frobenius_norm().max(1.0);
            let mut added = false;
            for (i, &l) in eig.values.iter().enumerate() {
                if l - t < -cfg.tol_feas * scale {
                    self.add_spectral(&eig.vector(i));
                    added = true;
                }
            }
            if added {
                continue;
            }
            if !exact {
                let psd = eig.recompose(|l| l.max(0.0));
                let (x, v) = max_quadratic(k, &psd, opts);
                if v > 1.0 + cfg.tol_feas && self.add_upper(x) {
                    continue;
                }
            }
            return Ok(Stage { b, t, value: sol.value, hit_budget: false });
        }
    }
}

fn upper_points(k: &ConvexBody) -> Result<(Vec<Vec<f64>>, bool)> {
    match k.shape() {
        Shape::PolytopeV { .. } | Shape::LpBall { .. } => {}
        _ => return Err(Error::UnsupportedBodyVariant(k.variant_name())),
    }
    if let Some(v) = k.exact_vertices() {
        return Ok((v, true));
    }
    let n = k.dim();
    let net = direction_net(n, None, 0);
    let want = 4 * n * (n + 1);
    let stride = (net.len() / want).max(1);
    let pts = net.iter().step_by(stride).map(|d| k.boundary_point(d)).collect::<Result<Vec<_>>>()?;
    Ok((pts, false))
}

/// `ū_K(E)` and `I_K(E)` for generator polytopes and `ℓ_p` balls.
pub fn solve_u_bar(k: &ConvexBody, e: &Ellipsoid, cfg: &SolveConfig) -> Result<DualReport> {
    check_dim(k.dim(), e.dim())?;
    cfg.validate(k.dim())?;
    let n = k.dim();
    let (initial, exact) = upper_points(k)?;
    let opts = scan_options(cfg);
    let c_coeffs = trace_coeffs(e.inverse_form());
    let neg: Vec<f64> = c_coeffs.iter().map(|v| -v).collect();

    // stage 1: the supremum
    let mut s1 = DualLp::new(n, neg.clone(), false, 0.0, cfg.box_r);
    for x in &initial {
        s1.add_upper(x.clone());
    }
    let stage1 = s1.run(k, exact, cfg, &opts)?;
    let value = -stage1.value;
    let i_value = (value.max(0.0) / n as f64).sqrt();
    let mut lp_iterations = s1.iterations;
    if stage1.hit_budget {
        return Ok(DualReport {
            status: DualStatus::MaxCutsReached,
            i_value,
            uniqueness_hint: UniquenessHint::Unknown,
            form: stage1.b,
            cuts: s1.lp.constraints.len(),
            lp_iterations,
        });
    }
    let upper_cuts = s1.upper.points.clone();
    let face_floor = value * (1.0 - 1e-9);

    // stage 2: the best-conditioned point of the optimal face
    let mut obj2 = vec![0.0; c_coeffs.len()];
    obj2.push(-1.0);
    let mut s2 = DualLp::new(n, obj2, true, 0.0, cfg.box_r);
    for x in &upper_cuts {
        s2.add_upper(x.clone());
    }
    s2.add_row(c_coeffs.clone(), face_floor);
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        s2.add_spectral(&v);
    }
    let stage2 = s2.run(k, exact, cfg, &opts)?;
    lp_iterations += s2.iterations;
    let cuts = s1.lp.constraints.len() + s2.lp.constraints.len();
    if stage2.hit_budget {
        return Ok(DualReport {
            status: DualStatus::MaxCutsReached,
            i_value,
            uniqueness_hint: UniquenessHint::Unknown,
            form: stage1.b,
            cuts,
            lp_iterations,
        });
    }
    let b2 = stage2.b;
    if stage2.t < 1e-6 * b2.frobenius_norm() {
        let direction = b2.eigen()?.min_vector();
        return Ok(DualReport {
            status: DualStatus::NonAttained { degenerate_direction: direction },
            i_value,
            uniqueness_hint: UniquenessHint::Unknown,
            form: stage1.b,
            cuts,
            lp_iterations,
        });
    }
    let maximizer = into_containing(k, &b2, cfg, &opts)?;

    // uniqueness probe: extreme points of the face in random directions,
    // keeping the spectrum away from zero
    let mut hint = UniquenessHint::Unknown;
    let probes = cfg.restarts.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xface);
    'probe: for _ in 0..probes {
        let d: Vec<f64> = (0..c_coeffs.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        for sign in [1.0, -1.0] {
            let obj: Vec<f64> = d.iter().map(|v| -sign * v).collect();
            let mut s3 = DualLp::new(n, obj, false, 0.5 * stage2.t, cfg.box_r);
            for x in &s2.upper.points {
                s3.add_upper(x.clone());
            }
            s3.add_row(c_coeffs.clone(), face_floor);
            for i in 0..n {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                s3.add_spectral(&v);
            }
            let st = s3.run(k, exact, cfg, &opts)?;
            lp_iterations += s3.iterations;
            if st.hit_budget {
                continue;
            }
            let other = st.b;
            let same_value = (dot(&c_coeffs, &other.to_packed()) - value).abs() <= 1e-8 * value.abs().max(1.0);
            if same_value && other.relative_distance(maximizer.form()) > 1e-3 {
                if let Ok(second) = into_containing(k, &other, cfg, &opts) {
                    hint = UniquenessHint::MultipleFound { second };
                    break 'probe;
                }
            }
        }
    }
    Ok(DualReport {
        status: DualStatus::Attained { maximizer },
        i_value,
        uniqueness_hint: hint,
        form: stage1.b,
        cuts,
        lp_iterations,
    })
}

/// Scale a positive definite `B` down just enough that `K ⊂ {xᵀBx ≤ 1}`.
fn into_containing(k: &ConvexBody, b: &SymMatrix, cfg: &SolveConfig, opts: &ScanOptions) -> Result<Ellipsoid> {
    let f = Ellipsoid::new(b.clone())?;
    let v = contained_in_ellipsoid_with(k, &f, cfg.tol_feas, opts)?;
    let top = 1.0 - v.worst_margin;
    if top > 1.0 {
        Ellipsoid::new(b.scale(1.0 / top))
    } else {
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualEquivalence {
    pub holds: bool,
    pub body_contained: bool,
    /// Relative distance between `u_{K°_F}(E)` and `F`.
    pub distance: f64,
    pub minimizer: Option<Ellipsoid>,
}

/// `F ∈ ū_K(E)` iff `u_{K°_F}(E) = F`, with `K°_F = Q_F⁻¹·K°` the polar of `K`
/// taken with respect to the scalar product of `F`.
pub fn verify_dual_equivalence(
    k: &ConvexBody,
    e: &Ellipsoid,
    f: &Ellipsoid,
    cfg: &SolveConfig,
) -> Result<DualEquivalence> {
    check_dim(k.dim(), e.dim())?;
    check_dim(k.dim(), f.dim())?;
    let inside = contained_in_ellipsoid_with(k, f, 10.0 * cfg.tol_feas, &scan_options(cfg))?;
    if !inside.contained {
        return Ok(DualEquivalence { holds: false, body_contained: false, distance: f64::INFINITY, minimizer: None });
    }
    let polar_f = k.polar().linear_image(f.inverse_form().as_matrix())?;
    let r = solve_u(&polar_f, e, cfg)?;
    let distance = r.minimizer.distance(f);
    Ok(DualEquivalence { holds: distance <= 1e-4, body_contained: true, distance, minimizer: Some(r.minimizer) })
}
