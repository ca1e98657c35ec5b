use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ellipmap::bodies::ConvexBody;
use ellipmap::certificates::{contact_points_with_hints, isotropy_certificate, verify_u_with_hints, Verdict};
use ellipmap::ellipsoids::Ellipsoid;
use ellipmap::oracle::{brute_force_u, quadrature_m_with, GridConfig, OracleResult};
use ellipmap::report::ReportJson;
use ellipmap::solver::{
    check_john, iterate_u, solve_u, solve_u_bar, DualStatus, SolveConfig, SolveStatus, UniquenessHint,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Command, Common};

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_VERIFICATION: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<ellipmap::Error> for CliError {
    fn from(e: ellipmap::Error) -> Self {
        use ellipmap::Error::*;
        match e {
            NoConvergence { .. } | Infeasible | NoFeasiblePoint => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&PathBuf>) -> CliResult<SolveConfig> {
    path.map_or(Ok(SolveConfig::default()), |p| read_json(p))
}

struct Inputs {
    body: ConvexBody,
    reference: Ellipsoid,
    config: SolveConfig,
}

fn load(c: &Common) -> CliResult<Inputs> {
    let body: ConvexBody = read_json(&c.body)?;
    let reference: Ellipsoid = read_json(&c.ellipsoid)?;
    if body.dim() != reference.dim() {
        return Err(CliError::Input(format!(
            "body has dimension {} but ellipsoid has dimension {}",
            body.dim(),
            reference.dim()
        )));
    }
    let config = load_config(c.config.as_ref())?;
    config.validate(body.dim())?;
    Ok(Inputs { body, reference, config })
}

fn emit_text(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Input(e.to_string()))
        }
    }
}

fn emit<T: Serialize>(out: Option<&PathBuf>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    emit_text(out, &text)
}

/// Contact tolerance used for certificates attached to reports.
fn contact_tol(cfg: &SolveConfig) -> f64 {
    100.0 * cfg.tol_feas
}

fn status_code(s: SolveStatus) -> u8 {
    match s {
        SolveStatus::Optimal => 0,
        SolveStatus::MaxCutsReached => EXIT_NUMERICAL,
    }
}

#[derive(Serialize)]
struct JValueOut {
    status: SolveStatus,
    #[serde(rename = "J")]
    j: f64,
}

#[derive(Serialize)]
struct JohnOut {
    is_fixed_point: bool,
    /// Absent when `E` is not inside `K`.
    distance: Option<f64>,
    contained: bool,
    worst_margin: f64,
    witness: Vec<f64>,
    #[serde(rename = "Q_F", skip_serializing_if = "Option::is_none")]
    q_f: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct IterateOut {
    iterates: Vec<Ellipsoid>,
    steps: Vec<f64>,
    fixed_point_reached: bool,
}

#[derive(Serialize)]
struct DualOut {
    status: &'static str,
    i_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    maximizer: Option<Ellipsoid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    degenerate_direction: Option<Vec<f64>>,
    uniqueness_hint: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    second: Option<Ellipsoid>,
    cuts: usize,
    lp_iterations: usize,
}

#[derive(Serialize)]
struct QuadratureOut {
    #[serde(rename = "M")]
    m: f64,
    standard_error: f64,
    samples: usize,
    seed: u64,
}

#[derive(Serialize)]
struct OracleOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    brute_force: Option<OracleResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadrature: Option<QuadratureOut>,
}

pub fn run(cmd: Command) -> CliResult<u8> {
    match cmd {
        Command::ComputeU(c) => {
            let inp = load(&c)?;
            let r = solve_u(&inp.body, &inp.reference, &inp.config)?;
            let hints: Vec<Vec<f64>> = r.contacts.iter().map(|(x, _)| x.clone()).chain(r.cuts.iter().cloned()).collect();
            let points = contact_points_with_hints(&inp.body, &r.minimizer, contact_tol(&inp.config), &hints)?;
            let cert = isotropy_certificate(&inp.reference, &points)?;
            emit(c.out.as_ref(), &ReportJson::new(&r, &inp.config, Some(&cert)))?;
            Ok(status_code(r.status))
        }
        Command::JValue(c) => {
            let inp = load(&c)?;
            let r = solve_u(&inp.body, &inp.reference, &inp.config)?;
            emit(c.out.as_ref(), &JValueOut { status: r.status, j: r.j_value })?;
            Ok(status_code(r.status))
        }
        Command::CheckJohn { common, expect_fixed } => {
            let inp = load(&common)?;
            let chk = check_john(&inp.body, &inp.reference, &inp.config)?;
            let out = JohnOut {
                is_fixed_point: chk.is_fixed_point,
                distance: chk.distance.is_finite().then_some(chk.distance),
                contained: chk.containment.contained,
                worst_margin: chk.containment.worst_margin,
                witness: chk.containment.witness.clone(),
                q_f: chk.report.as_ref().map(|r| r.minimizer.form().as_matrix().to_rows()),
            };
            emit(common.out.as_ref(), &out)?;
            if let Some(r) = &chk.report {
                if r.status == SolveStatus::MaxCutsReached {
                    return Ok(EXIT_NUMERICAL);
                }
            }
            Ok(if expect_fixed && !chk.is_fixed_point { EXIT_VERIFICATION } else { 0 })
        }
        Command::Iterate { common, steps } => {
            let inp = load(&common)?;
            let t = iterate_u(&inp.body, &inp.reference, steps, &inp.config)?;
            emit(
                common.out.as_ref(),
                &IterateOut { iterates: t.iterates, steps: t.steps, fixed_point_reached: t.fixed_point_reached },
            )?;
            Ok(0)
        }
        Command::Dual(c) => {
            let inp = load(&c)?;
            let r = solve_u_bar(&inp.body, &inp.reference, &inp.config)?;
            let (status, maximizer, direction, code) = match r.status {
                DualStatus::Attained { maximizer } => ("Attained", Some(maximizer), None, 0),
                DualStatus::NonAttained { degenerate_direction } => ("NonAttained", None, Some(degenerate_direction), 0),
                DualStatus::MaxCutsReached => ("MaxCutsReached", None, None, EXIT_NUMERICAL),
            };
            let (hint, second) = match r.uniqueness_hint {
                UniquenessHint::Unknown => ("Unknown", None),
                UniquenessHint::MultipleFound { second } => ("MultipleFound", Some(second)),
            };
            let out = DualOut {
                status,
                i_value: r.i_value,
                maximizer,
                degenerate_direction: direction,
                uniqueness_hint: hint,
                second,
                cuts: r.cuts,
                lp_iterations: r.lp_iterations,
            };
            emit(c.out.as_ref(), &out)?;
            Ok(code)
        }
        Command::Certify { common, candidate, tol } => {
            let inp = load(&common)?;
            let f: Ellipsoid = read_json(&candidate)?;
            if f.dim() != inp.body.dim() {
                return Err(CliError::Input("candidate dimension does not match the body".into()));
            }
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Input("tol must be positive".into()));
            }
            let verdict = verify_u_with_hints(&inp.body, &inp.reference, &f, tol, &[])?;
            emit(common.out.as_ref(), &verdict)?;
            Ok(if matches!(verdict, Verdict::Verified { .. }) { 0 } else { EXIT_VERIFICATION })
        }
        Command::Oracle { common, samples, seed } => {
            let body: ConvexBody = read_json(&common.body)?;
            let reference: Ellipsoid = read_json(&common.ellipsoid)?;
            let grid: GridConfig = common.config.as_ref().map_or(Ok(GridConfig::default()), |p| read_json(p))?;
            if body.dim() != reference.dim() {
                return Err(CliError::Input("body and ellipsoid dimensions differ".into()));
            }
            if body.dim() != 2 && samples.is_none() {
                return Err(CliError::Input("the grid reference is planar; pass --samples for other dimensions".into()));
            }
            let brute_force = if body.dim() == 2 { Some(brute_force_u(&body, &reference, &grid)?) } else { None };
            let quadrature = match samples {
                Some(count) => {
                    let (m, se) = quadrature_m_with(&reference, &body, count, seed, grid.mode)?;
                    Some(QuadratureOut { m, standard_error: se, samples: count, seed })
                }
                None => None,
            };
            emit(common.out.as_ref(), &OracleOut { brute_force, quadrature })?;
            Ok(0)
        }
        Command::Render { body, ellipsoids, solve, config, out } => {
            let body: ConvexBody = read_json(&body)?;
            if body.dim() != 2 {
                return Err(CliError::Input("render draws planar bodies only".into()));
            }
            let mut shapes: Vec<Ellipsoid> = Vec::new();
            for p in &ellipsoids {
                let e: Ellipsoid = read_json(p)?;
                if e.dim() != 2 {
                    return Err(CliError::Input(format!("{}: render draws planar ellipsoids only", p.display())));
                }
                shapes.push(e);
            }
            let cfg = load_config(config.as_ref())?;
            cfg.validate(2)?;
            let mut code = 0;
            if solve {
                let r = solve_u(&body, &shapes[0], &cfg)?;
                code = status_code(r.status);
                shapes.push(r.minimizer);
            }
            let mut contacts = Vec::new();
            for e in &shapes {
                contacts.extend(contact_points_with_hints(&body, e, contact_tol(&cfg), &[])?);
            }
            emit_text(out.as_ref(), &crate::svg::render(&body, &shapes, &contacts)?)?;
            Ok(code)
        }
    }
}
