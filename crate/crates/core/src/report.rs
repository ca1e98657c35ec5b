//! JSON form of a solve.

use serde::{Deserialize, Serialize};

use crate::certificates::Certificate;
use crate::ellipsoids::Ellipsoid;
use crate::error::Result;
use crate::solver::{SolveConfig, SolveReport, SolveStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateJson {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub residual: f64,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        CertificateJson { points: c.points.clone(), weights: c.weights.clone(), residual: c.residual }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportJson {
    pub status: SolveStatus,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "Q_F")]
    pub q_f: Vec<Vec<f64>>,
    pub cuts: Vec<Vec<f64>>,
    pub active_cuts: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
    pub lp_iterations: usize,
    pub restart_spread: f64,
    pub polished: bool,
    pub config: SolveConfig,
}

impl ReportJson {
    pub fn new(r: &SolveReport, cfg: &SolveConfig, certificate: Option<&Certificate>) -> Self {
        ReportJson {
            status: r.status,
            j: r.j_value,
            q_f: r.minimizer.form().as_matrix().to_rows(),
            cuts: r.cuts.clone(),
            active_cuts: r.active_cuts.clone(),
            certificate: certificate.map(CertificateJson::from),
            lp_iterations: r.lp_iterations,
            restart_spread: r.restart_spread,
            polished: r.polished,
            config: *cfg,
        }
    }

    /// The minimizer, re-validated as an ellipsoid.
    pub fn minimizer(&self) -> Result<Ellipsoid> {
        Ellipsoid::from_rows(&self.q_f)
    }
}
