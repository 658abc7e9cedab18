//! Batch runner: one trajectory CSV and one summary JSON per algorithm, plus
//! an `index.json` listing every output.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use minimax_core::inner::refine;
use minimax_core::linalg::min_eigenvalue;
use minimax_core::{
    run_gda, run_mcn, run_minimax_tr, run_minimax_trace, schur_hessian, MinimaxProblem, ProblemConstants,
    RunResult, RunStatus, StepClassCounts,
};

use crate::config::{AlgorithmKind, ExperimentConfig, SolverConfig};
use crate::error::{BenchError, Result};
use crate::trajectory::write_trajectory;

pub const INDEX_FILE: &str = "index.json";

/// Gradient norm and smallest Hessian eigenvalue of `P` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimalCheck {
    pub value: Option<f64>,
    pub grad_norm: f64,
    pub min_hess_eigenvalue: f64,
    /// True when the problem's closed-form oracles were used; otherwise the
    /// inner problem was solved to the rounding level first.
    pub analytic: bool,
}

pub fn check_primal(problem: &dyn MinimaxProblem, x: &DVector<f64>, y_hint: &DVector<f64>) -> Result<PrimalCheck> {
    if let (Some(g), Some(h)) = (problem.primal_gradient(x), problem.primal_hessian(x)) {
        return Ok(PrimalCheck {
            value: problem.primal_value(x),
            grad_norm: g.norm(),
            min_hess_eigenvalue: min_eigenvalue(&h),
            analytic: true,
        });
    }
    let y = match problem.y_star(x) {
        Some(y) => y,
        None => refine(problem, x, y_hint, 0.0)?.y,
    };
    Ok(PrimalCheck {
        value: Some(problem.value(x, &y)),
        grad_norm: problem.grad_x(x, &y).norm(),
        min_hess_eigenvalue: min_eigenvalue(&schur_hessian(problem, x, &y)?),
        analytic: false,
    })
}

/// Multipliers `(a, b)` such that the method's guarantee reads
/// `‖∇P‖ ≤ a·ε`, `λ_min(∇²P) ≥ −b·√ε`. GDA carries no second-order guarantee.
pub fn ssp_factors(kind: AlgorithmKind, c: &ProblemConstants) -> Option<(f64, f64)> {
    match kind {
        AlgorithmKind::MinimaxTr | AlgorithmKind::Mcn => Some((7.0 / 4.0, 13.0 / 6.0 * c.h_lip.sqrt())),
        AlgorithmKind::MinimaxTrace => Some((1.0, 1.0)),
        AlgorithmKind::Gda => None,
    }
}

// Analytic values are compared against computed bounds with a little room
// for rounding in either evaluation.
fn within(value: f64, bound: f64) -> bool {
    value <= bound + 1e-9 * (1.0 + bound.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub eps: f64,
    /// Whether the solver returned a certificate at all.
    pub issued: bool,
    pub grad_norm_bound: Option<f64>,
    pub hessian_eigen_bound: Option<f64>,
    pub terminated_by_dual: Option<bool>,
    /// `‖∇P(x_out)‖`, `λ_min(∇²P(x_out))` and whether they came from closed forms.
    pub primal: Option<PrimalCheck>,
    /// The evaluated gradient norm is below the certified bound.
    pub grad_bound_holds: Option<bool>,
    /// The evaluated smallest eigenvalue is above the certified bound.
    pub hessian_bound_holds: Option<bool>,
    /// The certified bounds meet the method's stationarity target.
    pub certificate_meets_target: Option<bool>,
    /// The evaluated quantities meet the method's stationarity target.
    pub output_meets_target: Option<bool>,
    pub grad_target: Option<f64>,
    pub hessian_target: Option<f64>,
}

impl CertificateReport {
    pub fn build(
        kind: AlgorithmKind,
        eps: f64,
        constants: &ProblemConstants,
        cert: Option<&minimax_core::SspCertificate>,
        primal: Option<PrimalCheck>,
    ) -> Self {
        let factors = ssp_factors(kind, constants);
        let grad_target = factors.map(|(a, _)| a * eps);
        let hessian_target = factors.map(|(_, b)| -b * eps.sqrt());
        let output_meets_target = match (primal, grad_target, hessian_target) {
            (Some(p), Some(gt), Some(ht)) => Some(within(p.grad_norm, gt) && within(ht, p.min_hess_eigenvalue)),
            (Some(p), None, None) => Some(within(p.grad_norm, eps)),
            _ => None,
        };
        CertificateReport {
            eps,
            issued: cert.is_some(),
            grad_norm_bound: cert.map(|c| c.grad_norm_bound),
            hessian_eigen_bound: cert.map(|c| c.hessian_eigen_bound),
            terminated_by_dual: cert.map(|c| c.terminated_by_dual),
            primal,
            grad_bound_holds: cert.zip(primal).map(|(c, p)| within(p.grad_norm, c.grad_norm_bound)),
            hessian_bound_holds: cert.zip(primal).map(|(c, p)| within(c.hessian_eigen_bound, p.min_hess_eigenvalue)),
            certificate_meets_target: cert.zip(factors).map(|(c, (a, b))| c.certifies(eps, a, b)),
            output_meets_target,
            grad_target,
            hessian_target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub kind: AlgorithmKind,
    pub seed: u64,
    pub status: Option<RunStatus>,
    pub error: Option<String>,
    pub outer_iterations: usize,
    pub total_inner_iterations: usize,
    pub wall_time_s: f64,
    pub optimal_value: Option<f64>,
    pub initial_gap: Option<f64>,
    /// `P(x_out) − P*`.
    pub final_gap: Option<f64>,
    pub final_surrogate_p: Option<f64>,
    /// Final gap still at least `plateau_fraction` of the initial gap.
    pub plateau: Option<bool>,
    /// First recorded iteration whose gap is within `1e-2`, or the outer
    /// iteration count when only the returned point gets there.
    pub iters_to_gap_1e_2: Option<usize>,
    pub step_class_counts: Option<StepClassCounts>,
    pub certificate: Option<CertificateReport>,
    pub final_x: Vec<f64>,
    pub trajectory_rows: usize,
    pub trajectory_file: String,
    pub config: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub algorithm: String,
    pub kind: AlgorithmKind,
    pub trajectory: String,
    pub summary: String,
    pub status: Option<RunStatus>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentIndex {
    pub problem: Value,
    pub dim_x: usize,
    pub dim_y: usize,
    pub constants: ProblemConstants,
    pub optimal_value: Option<f64>,
    pub seed: u64,
    pub runs: Vec<IndexEntry>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub index: ExperimentIndex,
    pub summaries: Vec<RunSummary>,
    pub results: Vec<Option<RunResult>>,
}

impl ExperimentReport {
    pub fn summary(&self, algorithm: &str) -> Option<&RunSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm)
    }

    pub fn result(&self, algorithm: &str) -> Option<&RunResult> {
        let i = self.summaries.iter().position(|s| s.algorithm == algorithm)?;
        self.results[i].as_ref()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub parallel: Option<usize>,
}

/// File-name-safe form of a label.
pub fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

pub fn solve(problem: &dyn MinimaxProblem, cfg: &SolverConfig, x0: &DVector<f64>, y0: &DVector<f64>) -> minimax_core::Result<RunResult> {
    match cfg {
        SolverConfig::Tr(c) => run_minimax_tr(problem, x0, y0, c),
        SolverConfig::Trace(c) => run_minimax_trace(problem, x0, y0, c),
        SolverConfig::Gda(c) => run_gda(problem, x0, y0, c),
        SolverConfig::Mcn(c) => run_mcn(problem, x0, y0, c),
    }
}

/// Runs every algorithm of the config, writing outputs under `out_dir`.
/// Solver failures end up in the corresponding summary; only I/O and
/// configuration problems abort the batch.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path, overrides: RunOverrides) -> Result<ExperimentReport> {
    config.validate()?;
    let problem = config.build_problem()?;
    let seed = overrides.seed.unwrap_or(config.run.seed);
    let (x0, y0) = config.initial_point(problem.as_ref(), seed)?;
    let solver_cfgs = config
        .algorithms
        .iter()
        .map(|a| config.solver_config(a))
        .collect::<Result<Vec<_>>>()?;

    let threads = overrides.parallel.unwrap_or(config.run.parallel).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Config(format!("run.parallel: {e}")))?;
    let problem_ref: &dyn MinimaxProblem = problem.as_ref();
    let outcomes: Vec<minimax_core::Result<RunResult>> =
        pool.install(|| solver_cfgs.par_iter().map(|c| solve(problem_ref, c, &x0, &y0)).collect());

    std::fs::create_dir_all(out_dir).map_err(|e| BenchError::Io(out_dir.display().to_string(), e))?;
    let p_star = problem.optimal_value();
    let initial_gap = p_star.zip(problem.primal_value(&x0)).map(|(ps, p)| p - ps);
    let constants = *problem.constants();

    let mut summaries = Vec::new();
    let mut results = Vec::new();
    let mut entries = Vec::new();
    for ((entry, cfg), outcome) in config.algorithms.iter().zip(&solver_cfgs).zip(outcomes) {
        let label = entry.label();
        let stem = file_stem(&label);
        let csv_name = format!("{stem}.csv");
        let summary_name = format!("{stem}.summary.json");

        let (result, error) = match outcome {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let rows = result.as_ref().map(|r| r.trajectory.as_slice()).unwrap_or(&[]);
        write_trajectory(create(&out_dir.join(&csv_name))?, rows)?;

        let mut summary = RunSummary {
            algorithm: label.clone(),
            kind: entry.kind,
            seed,
            status: None,
            error,
            outer_iterations: 0,
            total_inner_iterations: 0,
            wall_time_s: 0.0,
            optimal_value: p_star,
            initial_gap,
            final_gap: None,
            final_surrogate_p: None,
            plateau: None,
            iters_to_gap_1e_2: None,
            step_class_counts: None,
            certificate: None,
            final_x: Vec::new(),
            trajectory_rows: rows.len(),
            trajectory_file: csv_name.clone(),
            config: serde_json::to_value(cfg)?,
        };
        if let Some(r) = &result {
            let primal = match check_primal(problem_ref, &r.x, &r.y) {
                Ok(p) => Some(p),
                Err(e) => {
                    summary.error = Some(format!("output check failed: {e}"));
                    None
                }
            };
            let final_gap = p_star.zip(primal.and_then(|p| p.value)).map(|(ps, v)| v - ps);
            summary.status = Some(r.status.clone());
            summary.outer_iterations = r.outer_iterations;
            summary.total_inner_iterations = r.total_inner_iterations;
            summary.wall_time_s = r.wall_time_s;
            summary.final_gap = final_gap;
            summary.final_surrogate_p = r.trajectory.last().map(|row| row.surrogate_p);
            summary.plateau = final_gap.zip(initial_gap).map(|(f, i)| f >= config.run.plateau_fraction * i);
            summary.iters_to_gap_1e_2 = r
                .trajectory
                .iter()
                .find(|row| row.true_p_gap.is_some_and(|g| g <= 1e-2))
                .map(|row| row.iter)
                .or_else(|| final_gap.filter(|g| *g <= 1e-2).map(|_| r.outer_iterations));
            summary.step_class_counts = r.step_counts;
            summary.certificate = Some(CertificateReport::build(entry.kind, cfg.eps(), &constants, r.certificate.as_ref(), primal));
            summary.final_x = r.x.iter().copied().collect();
        }
        serde_json::to_writer_pretty(create(&out_dir.join(&summary_name))?, &summary)?;
        entries.push(IndexEntry {
            algorithm: label,
            kind: entry.kind,
            trajectory: csv_name,
            summary: summary_name,
            status: summary.status.clone(),
            error: summary.error.clone(),
        });
        summaries.push(summary);
        results.push(result);
    }

    let index = ExperimentIndex {
        problem: serde_json::to_value(&config.problem)?,
        dim_x: problem.dim_x(),
        dim_y: problem.dim_y(),
        constants,
        optimal_value: p_star,
        seed,
        runs: entries,
    };
    serde_json::to_writer_pretty(create(&out_dir.join(INDEX_FILE))?, &index)?;
    Ok(ExperimentReport { index, summaries, results })
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| BenchError::Io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_are_file_safe() {
        assert_eq!(file_stem("MINIMAX-TR"), "minimax-tr");
        assert_eq!(file_stem("GDA (slow)/2"), "gda__slow__2");
    }

    #[test]
    fn factors_per_method() {
        let c = ProblemConstants::derive(1.0, 1.0, 1.0, 0.0).unwrap();
        assert!(ssp_factors(AlgorithmKind::Gda, &c).is_none());
        let (a, b) = ssp_factors(AlgorithmKind::MinimaxTr, &c).unwrap();
        assert_eq!(a, 1.75);
        assert!((b - 13.0 / 6.0 * c.h_lip.sqrt()).abs() < 1e-15);
    }
}
