//! Dense dual simplex for small linear programs
//!
//! ```text
//! minimize c·x  subject to  a_i·x ≥ b_i (i = 1..k),  |x_j| ≤ R
//! ```
//!
//! The solver walks vertices defined by `n` active rows (constraints or box
//! faces). The starting vertex is the box corner that minimizes `c·x`, which
//! is dual feasible, so no phase one is needed. A previous optimal basis stays
//! dual feasible when rows are appended, which makes warm starts cheap inside
//! cutting-plane loops.

use crate::error::{Error, Result};

use super::matrix::{dot, norm2, Matrix};

/// Inequality `coeffs·x ≥ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        Constraint { coeffs, rhs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    /// Minimized.
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Box half-width `R`.
    pub box_bound: f64,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, box_bound: f64) -> Self {
        LpProblem { objective, constraints: Vec::new(), box_bound }
    }

    pub fn push(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.constraints.push(Constraint { coeffs, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::InvalidInput("LP has no variables".into()));
        }
        if !(self.box_bound.is_finite() && self.box_bound > 0.0) {
            return Err(Error::InvalidInput("LP box bound must be finite and positive".into()));
        }
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.coeffs.len() });
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("LP data must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Identifies a row of the solver's system: a user constraint or a box face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Row {
    Constraint(usize),
    /// `x_j ≥ −R`
    Lower(usize),
    /// `x_j ≤ R`
    Upper(usize),
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Constraints (indices into `LpProblem::constraints`) holding with equality
    /// to within `1e-9·(1 + |b|)`.
    pub active: Vec<usize>,
    /// Lagrange multiplier of every constraint; zero off the optimal basis.
    /// At optimum `c = Σ multipliers_i a_i + box terms`.
    pub multipliers: Vec<f64>,
    /// Variables whose box face is in the optimal basis with positive multiplier.
    pub box_active: Vec<usize>,
    /// Optimal basis, reusable as a warm start after appending constraints.
    pub basis: Vec<Row>,
    pub iterations: usize,
}

const PRIMAL_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-11;

pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    solve_lp_warm(p, None)
}

/// Solve starting from `basis` when it is still a nonsingular dual-feasible
/// basis, falling back to the cold start otherwise.
pub fn solve_lp_warm(p: &LpProblem, basis: Option<&[Row]>) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();
    let cold: Vec<Row> = (0..n)
        .map(|j| if p.objective[j] < 0.0 { Row::Upper(j) } else { Row::Lower(j) })
        .collect();
    if let Some(b) = basis {
        if b.len() == n && b.iter().all(|r| row_in_range(p, *r)) {
            match dual_simplex(p, b.to_vec()) {
                Ok(sol) => return Ok(sol),
                Err(Error::Infeasible) => return Err(Error::Infeasible),
                Err(_) => {}
            }
        }
    }
    dual_simplex(p, cold)
}

fn row_in_range(p: &LpProblem, r: Row) -> bool {
    match r {
        Row::Constraint(i) => i < p.constraints.len(),
        Row::Lower(j) | Row::Upper(j) => j < p.num_vars(),
    }
}

fn row_data(p: &LpProblem, r: Row) -> (Vec<f64>, f64) {
    let n = p.num_vars();
    match r {
        Row::Constraint(i) => (p.constraints[i].coeffs.clone(), p.constraints[i].rhs),
        Row::Lower(j) => {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            (a, -p.box_bound)
        }
        Row::Upper(j) => {
            let mut a = vec![0.0; n];
            a[j] = -1.0;
            (a, -p.box_bound)
        }
    }
}

fn dual_simplex(p: &LpProblem, mut basis: Vec<Row>) -> Result<LpSolution> {
    let n = p.num_vars();
    let k = p.constraints.len();
    let norms: Vec<f64> = p.constraints.iter().map(|c| norm2(&c.coeffs).max(1e-300)).collect();
    let max_iter = 50 * (k + 2 * n) + 1000;
    let mut stalled = 0usize;
    let mut iterations = 0;
    loop {
        let rows: Vec<(Vec<f64>, f64)> = basis.iter().map(|&r| row_data(p, r)).collect();
        let a_w = Matrix::from_rows(&rows.iter().map(|r| r.0.clone()).collect::<Vec<_>>())?;
        let lu = a_w.lu().map_err(|_| Error::NoConvergence { what: "LP basis", iterations })?;
        let b_w: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let x = lu.solve(&b_w);
        let lambda = lu.solve_transposed(&p.objective);
        let lam_scale = lambda.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if lambda.iter().any(|&l| l < -1e-9 * lam_scale) {
            // only reachable from a stale warm-start basis
            return Err(Error::NoConvergence { what: "LP warm start", iterations });
        }

        // most violated constraint (scaled), or smallest index once stalling
        let bland = stalled > 50;
        let mut entering: Option<(usize, f64)> = None;
        for i in 0..k {
            let c = &p.constraints[i];
            let viol = (c.rhs - dot(&c.coeffs, &x)) / norms[i];
            if viol > PRIMAL_TOL * (1.0 + c.rhs.abs() / norms[i]) && !basis.contains(&Row::Constraint(i)) {
                match entering {
                    None => entering = Some((i, viol)),
                    Some((_, v)) if !bland && viol > v => entering = Some((i, viol)),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
        }
        // box faces enter only once every constraint holds
        let box_violation = (0..n).find(|&j| x[j].abs() > p.box_bound * (1.0 + 1e-12));

        let enter_row = match (entering, box_violation) {
            (Some((i, _)), _) => Row::Constraint(i),
            (None, Some(j)) => if x[j] > 0.0 { Row::Upper(j) } else { Row::Lower(j) },
            (None, None) => {
                return Ok(finish(p, x, lambda, basis, iterations));
            }
        };
        if basis.contains(&enter_row) {
            return Err(Error::NoConvergence { what: "LP (cycling on box face)", iterations });
        }

        iterations += 1;
        if iterations > max_iter {
            return Err(Error::NoConvergence { what: "dual simplex", iterations });
        }

        let (a_r, _) = row_data(p, enter_row);
        let alpha = lu.solve_transposed(&a_r);
        let a_scale = alpha.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut leave: Option<(usize, f64, f64)> = None;
        for (j, (&aj, &lj)) in alpha.iter().zip(&lambda).enumerate() {
            if aj > PIVOT_TOL * a_scale.max(1.0) {
                let t = lj.max(0.0) / aj;
                let better = match leave {
                    None => true,
                    Some((jb, tb, ab)) => {
                        let tie = (t - tb).abs() <= 1e-13 * (1.0 + tb);
                        if bland {
                            t < tb - 1e-13 * (1.0 + tb) || (tie && basis[j] < basis[jb])
                        } else {
                            t < tb - 1e-13 * (1.0 + tb) || (tie && aj > ab)
                        }
                    }
                };
                if better {
                    leave = Some((j, t, aj));
                }
            }
        }
        let Some((j, t, _)) = leave else {
            return Err(Error::Infeasible);
        };
        if t <= 1e-14 {
            stalled += 1;
        } else {
            stalled = 0;
        }
        basis[j] = enter_row;
    }
}

fn finish(p: &LpProblem, x: Vec<f64>, lambda: Vec<f64>, basis: Vec<Row>, iterations: usize) -> LpSolution {
    let mut multipliers = vec![0.0; p.constraints.len()];
    let mut box_active = Vec::new();
    for (&r, &l) in basis.iter().zip(&lambda) {
        match r {
            Row::Constraint(i) => multipliers[i] = l.max(0.0),
            Row::Lower(j) | Row::Upper(j) => {
                if l > 0.0 {
                    box_active.push(j);
                }
            }
        }
    }
    box_active.sort_unstable();
    let active = p
        .constraints
        .iter()
        .enumerate()
        .filter(|(i, c)| {
            multipliers[*i] > 0.0 || (dot(&c.coeffs, &x) - c.rhs).abs() <= 1e-9 * (1.0 + c.rhs.abs())
        })
        .map(|(i, _)| i)
        .collect();
    let value = dot(&p.objective, &x);
    LpSolution { x, value, active, multipliers, box_active, basis, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_constraint() {
        let mut p = LpProblem::new(vec![1.0], 10.0);
        p.push(vec![1.0], 1.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.active, vec![0]);
        assert!((s.multipliers[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separable() {
        let mut p = LpProblem::new(vec![1.0, 1.0], 10.0);
        p.push(vec![1.0, 0.0], 0.25);
        p.push(vec![0.0, 1.0], 1.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.value - 1.25).abs() < 1e-12);
    }

    #[test]
    fn box_saturation() {
        let p = LpProblem::new(vec![-1.0], 10.0);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.x, vec![10.0]);
        assert_eq!(s.box_active, vec![0]);
        assert!(s.active.is_empty());
    }

    #[test]
    fn infeasible_detected() {
        let mut p = LpProblem::new(vec![1.0, 0.0], 10.0);
        p.push(vec![1.0, 0.0], 1.0);
        p.push(vec![-1.0, 0.0], 0.0);
        assert_eq!(solve_lp(&p).unwrap_err(), Error::Infeasible);
        // box makes the problem infeasible
        let mut p = LpProblem::new(vec![1.0], 10.0);
        p.push(vec![1.0], 11.0);
        assert_eq!(solve_lp(&p).unwrap_err(), Error::Infeasible);
    }

    #[test]
    fn warm_start_after_appending() {
        let mut p = LpProblem::new(vec![1.0, 2.0], 100.0);
        p.push(vec![1.0, 1.0], 1.0);
        let s1 = solve_lp(&p).unwrap();
        p.push(vec![1.0, -1.0], 3.0);
        p.push(vec![0.0, 1.0], -0.5);
        let warm = solve_lp_warm(&p, Some(&s1.basis)).unwrap();
        let cold = solve_lp(&p).unwrap();
        assert!((warm.value - cold.value).abs() < 1e-12);
        assert!(warm.iterations <= cold.iterations);
    }

    #[test]
    fn multipliers_reproduce_objective() {
        let mut p = LpProblem::new(vec![2.0, 1.0, 1.0], 1e6);
        p.push(vec![1.0, 1.0, 0.0], 1.0);
        p.push(vec![0.0, 1.0, 1.0], 2.0);
        p.push(vec![1.0, 0.0, 1.0], 1.5);
        p.push(vec![1.0, 0.0, 0.0], 0.0);
        p.push(vec![0.0, 1.0, 0.0], 0.0);
        p.push(vec![0.0, 0.0, 1.0], 0.0);
        let s = solve_lp(&p).unwrap();
        let mut g = vec![0.0; 3];
        for (c, &l) in p.constraints.iter().zip(&s.multipliers) {
            for j in 0..3 {
                g[j] += l * c.coeffs[j];
            }
        }
        for j in 0..3 {
            assert!((g[j] - p.objective[j]).abs() < 1e-10);
        }
    }
}
