//! Study file: model, inputs and the ordered list of steps.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uq_core::design::Design;
use uq_core::dist::FAMILIES;
use uq_core::estimation::Family;
use uq_core::flood;
use uq_core::joint::{JointDistribution, JointSpec};
use uq_core::metamodel::{ChaosSettings, KrigingSettings};
use uq_core::transform::Comparison;
use uq_core::wrapper::WrapperProtocol;
use uq_core::Model;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub study: String,
    /// Master seed; every stochastic step without its own seed needs it.
    #[serde(default)]
    pub seed: Option<u64>,
    pub model: ModelConfig,
    pub inputs: InputsConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub steps: Vec<StepConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// `"flood"`: outputs `H` and `Zc` of the flood-dyke benchmark.
    Builtin(String),
    Expressions {
        inputs: Vec<String>,
        outputs: Vec<String>,
        formulas: Vec<String>,
    },
    Wrapper {
        inputs: Vec<String>,
        outputs: Vec<String>,
        protocol: WrapperProtocol,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputsConfig {
    /// `"flood"` (bed levels linked by a normal copula) or `"flood_independent"`.
    Builtin(String),
    Joint(JointSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StepConfig {
    CentralTendency(CentralTendencyStep),
    Minmax(MinmaxStep),
    Reliability(ReliabilityStep),
    Sensitivity(SensitivityStep),
    Metamodel(MetamodelStep),
    Fit(FitStep),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentralTendencyStep {
    #[serde(default)]
    pub name: Option<String>,
    pub output: String,
    #[serde(default = "yes")]
    pub taylor: bool,
    /// Monte Carlo sample size; no sampling when absent.
    #[serde(default)]
    pub mc: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinmaxStep {
    #[serde(default)]
    pub name: Option<String>,
    pub output: String,
    #[serde(default)]
    pub design: Option<Design>,
    /// Bound-constrained search over `μ ± 3σ` clipped to the support.
    #[serde(default)]
    pub optimize: bool,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReliabilityMethod {
    Form,
    MonteCarlo,
    ImportanceSampling,
    Directional,
    Subset,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilityStep {
    #[serde(default)]
    pub name: Option<String>,
    pub method: ReliabilityMethod,
    pub output: String,
    pub threshold: f64,
    #[serde(default = "greater")]
    pub comparison: Comparison,
    /// Sample size, number of directions, or samples per subset step.
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityMethod {
    Src,
    Srrc,
    Pearson,
    Spearman,
    Sobol,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityStep {
    #[serde(default)]
    pub name: Option<String>,
    pub method: SensitivityMethod,
    pub output: String,
    pub n: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrigingStep {
    pub settings: KrigingSettings,
    /// Training design, pushed through the input distribution.
    pub design: Design,
    /// Monte Carlo points for the validation error.
    #[serde(default = "validation_size")]
    pub validation: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetamodelStep {
    #[serde(default)]
    pub name: Option<String>,
    pub output: String,
    #[serde(default)]
    pub chaos: Option<ChaosSettings>,
    #[serde(default)]
    pub kriging: Option<KrigingStep>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FitData {
    /// Column of a CSV file with a header row; relative paths start at the study file.
    Csv { path: PathBuf, column: String },
    /// Draws of one input from the study's input distribution.
    Sample { input: String, n: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitStep {
    #[serde(default)]
    pub name: Option<String>,
    pub data: FitData,
    pub families: Vec<String>,
    #[serde(default = "level")]
    pub level: f64,
    #[serde(default)]
    pub kernel: bool,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn yes() -> bool {
    true
}

fn greater() -> Comparison {
    Comparison::Greater
}

fn level() -> f64 {
    0.05
}

fn validation_size() -> usize {
    1000
}

impl StepConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            StepConfig::CentralTendency(_) => "central_tendency",
            StepConfig::Minmax(_) => "minmax",
            StepConfig::Reliability(_) => "reliability",
            StepConfig::Sensitivity(_) => "sensitivity",
            StepConfig::Metamodel(_) => "metamodel",
            StepConfig::Fit(_) => "fit",
        }
    }

    pub fn name(&self) -> String {
        let given = match self {
            StepConfig::CentralTendency(s) => &s.name,
            StepConfig::Minmax(s) => &s.name,
            StepConfig::Reliability(s) => &s.name,
            StepConfig::Sensitivity(s) => &s.name,
            StepConfig::Metamodel(s) => &s.name,
            StepConfig::Fit(s) => &s.name,
        };
        given.clone().unwrap_or_else(|| self.kind().to_owned())
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            StepConfig::CentralTendency(s) => s.seed,
            StepConfig::Minmax(s) => s.seed,
            StepConfig::Reliability(s) => s.seed,
            StepConfig::Sensitivity(s) => s.seed,
            StepConfig::Metamodel(s) => s.seed,
            StepConfig::Fit(s) => s.seed,
        }
    }

    /// Whether the step draws random numbers.
    pub fn is_stochastic(&self) -> bool {
        match self {
            StepConfig::CentralTendency(s) => s.mc.is_some(),
            StepConfig::Minmax(s) => s.design.as_ref().is_some_and(Design::is_random),
            StepConfig::Reliability(s) => s.method != ReliabilityMethod::Form,
            StepConfig::Sensitivity(_) => true,
            StepConfig::Metamodel(s) => {
                let chaos = s.chaos.as_ref().is_some_and(|c| match &c.projection {
                    uq_core::metamodel::Projection::LeastSquares { design }
                    | uq_core::metamodel::Projection::Integration { design } => design.is_random(),
                    uq_core::metamodel::Projection::GaussProduct { .. } => false,
                });
                chaos || s.kriging.is_some()
            }
            StepConfig::Fit(s) => matches!(s.data, FitData::Sample { .. }),
        }
    }

    fn output(&self) -> Option<&str> {
        match self {
            StepConfig::CentralTendency(s) => Some(&s.output),
            StepConfig::Minmax(s) => Some(&s.output),
            StepConfig::Reliability(s) => Some(&s.output),
            StepConfig::Sensitivity(s) => Some(&s.output),
            StepConfig::Metamodel(s) => Some(&s.output),
            StepConfig::Fit(_) => None,
        }
    }
}

/// One problem found in a study file, located by its key path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

fn diag(path: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses a study document; syntax and schema errors carry the offending key path.
pub fn parse(text: &str) -> Result<StudyConfig, Diagnostic> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        diag(path, e.into_inner().to_string())
    })
}

pub fn load(path: &Path) -> Result<StudyConfig, Diagnostic> {
    let text = std::fs::read_to_string(path).map_err(|e| diag("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

/// Resolves a path given in the study file against the file's directory.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl StudyConfig {
    /// Builds the model, resolving wrapper paths against `base`.
    pub fn build_model(&self, base: &Path) -> Result<Model, Diagnostic> {
        match &self.model {
            ModelConfig::Builtin(name) if name == "flood" => flood::model().map_err(|e| diag("model.builtin", e.to_string())),
            ModelConfig::Builtin(name) => Err(diag(
                "model.builtin",
                format!("unknown builtin model {name:?}; supported: flood"),
            )),
            ModelConfig::Expressions {
                inputs,
                outputs,
                formulas,
            } => Model::from_expressions(inputs, outputs, formulas).map_err(|e| diag("model.expressions", e.to_string())),
            ModelConfig::Wrapper {
                inputs,
                outputs,
                protocol,
            } => {
                let mut p = protocol.clone();
                p.template = resolve(base, &p.template);
                p.work_dir = resolve(base, &p.work_dir);
                Model::from_wrapper(inputs, outputs, p).map_err(|e| diag("model.wrapper", e.to_string()))
            }
        }
    }

    pub fn build_inputs(&self) -> Result<JointDistribution, Diagnostic> {
        match &self.inputs {
            InputsConfig::Builtin(name) => match name.as_str() {
                "flood" => flood::joint(),
                "flood_independent" => flood::independent_joint(),
                _ => {
                    return Err(diag(
                        "inputs.builtin",
                        format!("unknown builtin inputs {name:?}; supported: flood, flood_independent"),
                    ))
                }
            }
            .map_err(|e| diag("inputs.builtin", e.to_string())),
            InputsConfig::Joint(spec) => {
                for (i, m) in spec.margins.iter().enumerate() {
                    if !FAMILIES.contains(&m.family.as_str()) {
                        return Err(diag(
                            format!("inputs.joint.margins[{i}].family"),
                            format!(
                                "unknown distribution family {:?}; supported: {}",
                                m.family,
                                FAMILIES.join(", ")
                            ),
                        ));
                    }
                    if let Err(e) = m.build() {
                        return Err(diag(format!("inputs.joint.margins[{i}]"), e.to_string()));
                    }
                }
                if spec.labels.len() != spec.margins.len() {
                    return Err(diag(
                        "inputs.joint.labels",
                        format!("{} labels for {} margins", spec.labels.len(), spec.margins.len()),
                    ));
                }
                spec.build().map_err(|e| diag("inputs.joint", e.to_string()))
            }
        }
    }

    /// Every problem that can be found without running a step.
    pub fn validate(&self, base: &Path) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let model = self.build_model(base).map_err(|d| out.push(d)).ok();
        let joint = self.build_inputs().map_err(|d| out.push(d)).ok();
        if let (Some(m), Some(j)) = (&model, &joint) {
            if m.input_names() != j.labels() {
                out.push(diag(
                    "inputs",
                    format!(
                        "input names {:?} do not match the model inputs {:?}",
                        j.labels(),
                        m.input_names()
                    ),
                ));
            }
        }
        for (i, step) in self.steps.iter().enumerate() {
            let at = format!("steps[{i}].{}", step.kind());
            if step.is_stochastic() && step.seed().is_none() && self.seed.is_none() {
                out.push(diag(
                    "seed",
                    format!("missing seed: step {at} ({:?}) is stochastic and sets no seed of its own", step.name()),
                ));
            }
            if let (Some(name), Some(m)) = (step.output(), &model) {
                if !m.output_names().iter().any(|o| o == name) {
                    out.push(diag(
                        format!("{at}.output"),
                        format!("unknown output {name:?}; model outputs: {}", m.output_names().join(", ")),
                    ));
                }
            }
            match step {
                StepConfig::CentralTendency(s) => {
                    if s.mc.is_some_and(|n| n < 2) {
                        out.push(diag(format!("{at}.mc"), "Monte Carlo size must be at least 2"));
                    }
                }
                StepConfig::Minmax(s) => {
                    if s.design.is_none() && !s.optimize {
                        out.push(diag(at.clone(), "give a design, optimize, or both"));
                    }
                }
                StepConfig::Reliability(s) => {
                    if s.budget == Some(0) {
                        out.push(diag(format!("{at}.budget"), "budget must be positive"));
                    }
                }
                StepConfig::Sensitivity(s) => {
                    if s.n < 2 {
                        out.push(diag(format!("{at}.n"), "sample size must be at least 2"));
                    }
                    if s.method == SensitivityMethod::Sobol {
                        if let Some(j) = &joint {
                            if !j.copula().is_independent() {
                                out.push(diag(
                                    format!("{at}.method"),
                                    "pick-freeze Sobol' indices need independent inputs",
                                ));
                            }
                        }
                    }
                }
                StepConfig::Metamodel(s) => {
                    if s.chaos.is_some() == s.kriging.is_some() {
                        out.push(diag(at.clone(), "give exactly one of chaos or kriging"));
                    }
                }
                StepConfig::Fit(s) => {
                    for (k, f) in s.families.iter().enumerate() {
                        if Family::from_name(f).is_none() {
                            out.push(diag(
                                format!("{at}.families[{k}]"),
                                format!(
                                    "unknown distribution family {f:?}; supported: Normal, Uniform, Triangular, Gumbel, Beta, Exponential, Gamma"
                                ),
                            ));
                        }
                    }
                    if s.families.is_empty() && !s.kernel {
                        out.push(diag(format!("{at}.families"), "nothing to fit"));
                    }
                    match &s.data {
                        FitData::Sample { input, n } => {
                            if let Some(j) = &joint {
                                if !j.labels().iter().any(|l| l == input) {
                                    out.push(diag(format!("{at}.data.sample.input"), format!("unknown input {input:?}")));
                                }
                            }
                            if *n < 2 {
                                out.push(diag(format!("{at}.data.sample.n"), "sample size must be at least 2"));
                            }
                        }
                        FitData::Csv { path, .. } => {
                            if !resolve(base, path).exists() {
                                out.push(diag(
                                    format!("{at}.data.csv.path"),
                                    format!("{} does not exist", resolve(base, path).display()),
                                ));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Default configuration of the flood study shipped with the binary.
pub const FLOOD_STUDY: &str = include_str!("../studies/flood.json");
