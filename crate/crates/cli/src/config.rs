//! Experiment configuration: one JSON document with the model, solver,
//! analysis and output sections. Every default is written out in the
//! effective config so a run can be repeated from its echo alone.

use std::path::{Path, PathBuf};

use predprey::analysis::{ClassifyOptions, EstimatorConfig, VerifyOptions};
use predprey::integrator::default_stride;
use predprey::model::fnv1a64;
use predprey::{ModelSpec, RngSpec, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub dt_max: f64,
    pub horizon: f64,
    /// `null` selects the default stride (at most 10^5 recorded points).
    pub record_stride: Option<usize>,
    pub seed: u64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            dt_max: 1e-3,
            horizon: 100.0,
            record_stride: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceSection {
    pub dts: Vec<f64>,
    pub n_paths: usize,
    pub horizon: f64,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        ConvergenceSection {
            dts: vec![1e-2, 5e-3, 2.5e-3, 1.25e-3],
            n_paths: 1000,
            horizon: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub n_paths: usize,
    pub estimator: EstimatorConfig,
    pub classify: ClassifyOptions,
    pub verify: VerifyOptions,
    pub convergence: ConvergenceSection,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            n_paths: 1000,
            estimator: EstimatorConfig::default(),
            classify: ClassifyOptions::default(),
            verify: VerifyOptions::default(),
            convergence: ConvergenceSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// The parts of a config that determine results. The output location is
/// left out so runs into different directories carry the same hash.
#[derive(Serialize)]
struct Provenance<'a> {
    model: &'a ModelSpec,
    solver: &'a SolverSection,
    analysis: &'a AnalysisSection,
}

impl ExperimentConfig {
    pub fn from_model(model: ModelSpec) -> Self {
        ExperimentConfig {
            model,
            solver: SolverSection::default(),
            analysis: AnalysisSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Fills every optional field with the value that will actually be used.
    pub fn materialize(&mut self) {
        if self.solver.record_stride.is_none() {
            self.solver.record_stride =
                Some(default_stride(self.solver.dt_max, self.solver.horizon));
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let base = SolverConfig::new(
            self.solver.dt_max,
            self.solver.horizon,
            RngSpec::new(self.solver.seed, 0),
        );
        match self.solver.record_stride {
            Some(s) => base.with_stride(s),
            None => base,
        }
    }

    /// The result-determining sections as pretty JSON.
    pub fn provenance_json(&self) -> String {
        serde_json::to_string_pretty(&Provenance {
            model: &self.model,
            solver: &self.solver,
            analysis: &self.analysis,
        })
        .expect("config serialises")
    }

    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(&Provenance {
            model: &self.model,
            solver: &self.solver,
            analysis: &self.analysis,
        })
        .expect("config serialises");
        format!("{:016x}", fnv1a64(compact.as_bytes()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}
