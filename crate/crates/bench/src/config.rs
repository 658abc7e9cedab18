//! Experiment configuration file.
//!
//! ```json
//! {
//!   "problem": { "kind": "du", "n": 10, "L": 2.0, "gamma": 1.0, "dim_y": 5 },
//!   "algorithms": [
//!     { "kind": "minimax_tr", "settings": { "eps": 0.01 } },
//!     { "kind": "gda", "name": "GDA-slow", "settings": { "grad_tol": 0.01 } }
//!   ],
//!   "run": { "seed": 7, "x0": { "fill": 0.001 }, "y0": "normal", "max_wall_time_s": 60 }
//! }
//! ```
//!
//! `settings` use the field names of the corresponding solver configs and
//! are validated per algorithm.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use minimax_core::{GdaConfig, McnConfig, MinimaxProblem, TrConfig, TraceConfig};

use crate::du::{build_du_minimax, ConstantOverrides, DuParams};
use crate::error::BenchError;
use crate::quadratic::{build_quadratic_minimax, QuadraticParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub algorithms: Vec<AlgorithmEntry>,
    #[serde(default)]
    pub run: RunSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemConfig {
    Du(DuProblemConfig),
    Quadratic(QuadraticParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuProblemConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub gamma: f64,
    #[serde(default = "default_dim_y")]
    pub dim_y: usize,
    #[serde(default)]
    pub constants: ConstantOverrides,
}

fn default_dim_y() -> usize {
    5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    MinimaxTr,
    MinimaxTrace,
    Gda,
    Mcn,
}

impl AlgorithmKind {
    pub fn display_name(self) -> &'static str {
        match self {
            AlgorithmKind::MinimaxTr => "MINIMAX-TR",
            AlgorithmKind::MinimaxTrace => "MINIMAX-TRACE",
            AlgorithmKind::Gda => "GDA",
            AlgorithmKind::Mcn => "MCN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub kind: AlgorithmKind,
    /// Output label; defaults to the algorithm's display name.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "empty_object")]
    pub settings: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl AlgorithmEntry {
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.display_name().to_string())
    }
}

/// Parsed, typed solver settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SolverConfig {
    Tr(TrConfig),
    Trace(TraceConfig),
    Gda(GdaConfig),
    Mcn(McnConfig),
}

impl SolverConfig {
    /// Accuracy target used for certificate checks (`grad_tol` for GDA).
    pub fn eps(&self) -> f64 {
        match self {
            SolverConfig::Tr(c) => c.eps,
            SolverConfig::Trace(c) => c.eps,
            SolverConfig::Gda(c) => c.grad_tol,
            SolverConfig::Mcn(c) => c.eps,
        }
    }

    fn wall_time_mut(&mut self) -> &mut Option<f64> {
        match self {
            SolverConfig::Tr(c) => &mut c.max_wall_time_s,
            SolverConfig::Trace(c) => &mut c.max_wall_time_s,
            SolverConfig::Gda(c) => &mut c.max_wall_time_s,
            SolverConfig::Mcn(c) => &mut c.max_wall_time_s,
        }
    }
}

/// A vector given literally, as a constant fill, or by a named generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Values(Vec<f64>),
    Fill { fill: f64 },
    /// `"zeros"` or `"normal"` (seeded standard normal).
    Named(String),
}

impl VectorSpec {
    fn build(&self, what: &str, dim: usize, rng: &mut ChaCha8Rng) -> Result<DVector<f64>, BenchError> {
        match self {
            VectorSpec::Values(v) if v.len() == dim => Ok(DVector::from_column_slice(v)),
            VectorSpec::Values(v) => Err(BenchError::Config(format!(
                "run.{what} has length {}, problem expects {dim}",
                v.len()
            ))),
            VectorSpec::Fill { fill } => Ok(DVector::from_element(dim, *fill)),
            VectorSpec::Named(name) => match name.as_str() {
                "zeros" => Ok(DVector::zeros(dim)),
                "normal" => Ok(DVector::from_fn(dim, |_, _| StandardNormal.sample(rng))),
                other => Err(BenchError::Config(format!(
                    "run.{what}: unknown generator {other:?} (expected \"zeros\" or \"normal\")"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub seed: u64,
    pub x0: VectorSpec,
    pub y0: VectorSpec,
    /// Applied to every algorithm that does not set its own budget.
    pub max_wall_time_s: Option<f64>,
    /// Worker threads for independent runs.
    pub parallel: usize,
    /// A run is flagged as a plateau when its final gap stays above this
    /// fraction of the initial gap.
    pub plateau_fraction: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            x0: VectorSpec::Fill { fill: 1e-3 },
            y0: VectorSpec::Named("normal".into()),
            max_wall_time_s: None,
            parallel: 1,
            plateau_fraction: 0.9,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("algorithms: at least one algorithm is required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for a in &self.algorithms {
            let label = a.label();
            if !seen.insert(label.clone()) {
                return Err(BenchError::Config(format!("algorithms: duplicate name {label:?}")));
            }
            self.solver_config(a)?;
        }
        if self.run.parallel == 0 {
            return Err(BenchError::Config("run.parallel must be at least 1".into()));
        }
        Ok(())
    }

    /// Typed settings for one entry, with the run-level wall budget applied.
    pub fn solver_config(&self, entry: &AlgorithmEntry) -> Result<SolverConfig, BenchError> {
        let err = |e: serde_json::Error| BenchError::Config(format!("algorithms[{}].settings: {e}", entry.label()));
        let s = entry.settings.clone();
        let mut cfg = match entry.kind {
            AlgorithmKind::MinimaxTr => SolverConfig::Tr(serde_json::from_value(s).map_err(err)?),
            AlgorithmKind::MinimaxTrace => SolverConfig::Trace(serde_json::from_value(s).map_err(err)?),
            AlgorithmKind::Gda => SolverConfig::Gda(serde_json::from_value(s).map_err(err)?),
            AlgorithmKind::Mcn => SolverConfig::Mcn(serde_json::from_value(s).map_err(err)?),
        };
        let slot = cfg.wall_time_mut();
        if slot.is_none() {
            *slot = self.run.max_wall_time_s;
        }
        Ok(cfg)
    }

    pub fn build_problem(&self) -> Result<Box<dyn MinimaxProblem>, BenchError> {
        Ok(match &self.problem {
            ProblemConfig::Du(d) => {
                let params = DuParams::new(d.n, d.l, d.gamma)?;
                Box::new(build_du_minimax(params, d.dim_y, &d.constants)?)
            }
            ProblemConfig::Quadratic(q) => Box::new(build_quadratic_minimax(q)?),
        })
    }

    /// Starting pair; `y0` draws come from a stream seeded by `seed`.
    pub fn initial_point(&self, problem: &dyn MinimaxProblem, seed: u64) -> Result<(DVector<f64>, DVector<f64>), BenchError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0 = self.run.x0.build("x0", problem.dim_x(), &mut rng)?;
        let y0 = self.run.y0.build("y0", problem.dim_y(), &mut rng)?;
        Ok((x0, y0))
    }
}
