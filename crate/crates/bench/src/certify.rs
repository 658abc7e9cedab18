//! Re-validation of a recorded run from its trajectory and summary.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use minimax_core::SspCertificate;

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};
use crate::experiment::{check_primal, CertificateReport, RunSummary};
use crate::trajectory::read_trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub algorithm: String,
    pub trajectory_rows: usize,
    pub report: CertificateReport,
    /// A certificate was issued, its bounds hold at the recorded output and
    /// they meet the method's target.
    pub valid: bool,
}

/// `run.csv` → `run.summary.json`.
pub fn summary_path(trajectory: &Path) -> PathBuf {
    trajectory.with_extension("summary.json")
}

pub fn certify(trajectory: &Path, config: &ExperimentConfig) -> Result<CertifyReport> {
    let file = std::fs::File::open(trajectory).map_err(|e| BenchError::Io(trajectory.display().to_string(), e))?;
    let rows = read_trajectory(file)?;
    if rows.is_empty() {
        return Err(BenchError::Trajectory(format!("{} has no rows", trajectory.display())));
    }
    if rows.windows(2).any(|w| w[1].iter <= w[0].iter) {
        return Err(BenchError::Trajectory("iteration numbers are not increasing".into()));
    }

    let sp = summary_path(trajectory);
    let text = std::fs::read_to_string(&sp).map_err(|e| BenchError::Io(sp.display().to_string(), e))?;
    let summary: RunSummary = serde_json::from_str(&text)?;
    if summary.trajectory_rows != rows.len() {
        return Err(BenchError::Trajectory(format!(
            "summary lists {} rows, file has {}",
            summary.trajectory_rows,
            rows.len()
        )));
    }
    let recorded = summary
        .certificate
        .as_ref()
        .ok_or_else(|| BenchError::Trajectory(format!("run {} has no certificate section", summary.algorithm)))?;

    let problem = config.build_problem()?;
    if summary.final_x.len() != problem.dim_x() {
        return Err(BenchError::Config(format!(
            "recorded output has dimension {}, problem expects {}",
            summary.final_x.len(),
            problem.dim_x()
        )));
    }
    let x = DVector::from_column_slice(&summary.final_x);
    let primal = check_primal(problem.as_ref(), &x, &DVector::zeros(problem.dim_y()))?;
    let cert = recorded
        .grad_norm_bound
        .zip(recorded.hessian_eigen_bound)
        .map(|(g, h)| SspCertificate {
            x: x.clone(),
            grad_norm_bound: g,
            hessian_eigen_bound: h,
            terminated_by_dual: recorded.terminated_by_dual.unwrap_or(false),
            outer_iterations: summary.outer_iterations,
            total_inner_iterations: summary.total_inner_iterations,
        });
    let report = CertificateReport::build(summary.kind, recorded.eps, problem.constants(), cert.as_ref(), Some(primal));
    let valid = report.issued
        && report.grad_bound_holds == Some(true)
        && report.hessian_bound_holds == Some(true)
        && report.certificate_meets_target == Some(true);
    Ok(CertifyReport { algorithm: summary.algorithm, trajectory_rows: rows.len(), report, valid })
}
