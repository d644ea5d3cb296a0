//! Running a study: steps in order, one report entry and a few CSV files per step.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use uq_core::estimation::{fit_mle, kernel_smooth, ks_test, qq_plot_data, Family};
use uq_core::joint::JointDistribution;
use uq_core::metamodel::{chaos_fit, chaos_sobol, kriging_fit};
use uq_core::numeric::norm_quantile;
use uq_core::propagation::{
    directional_sampling_pf, form, importance_sampling_pf, mc_central_tendency, mc_pf, minmax_doe, minmax_optimize,
    subset_sampling_pf, taylor_moments, Direction, DirectionalSettings, FormSettings, ReliabilityResult,
    SamplingSettings, SubsetSettings,
};
use uq_core::sensitivity::{cobweb_data, pearson, sobol_pickfreeze, spearman, src, srrc};
use uq_core::transform::{Event, IsoTransform, StandardEvent};
use uq_core::{Model, RngStream, Sample};

use crate::config::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
    pub name: String,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub results: Value,
    pub n_evaluations: u64,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBlock {
    /// `validation` or `runtime`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub study: String,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Value>,
    pub steps: Vec<StepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBlock>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values serialize");
        s.push('\n');
        s
    }

    pub fn step(&self, name: &str) -> Option<&StepReport> {
        self.steps.iter().find(|s| s.name == name)
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Report,
    /// Directory holding report.json, when one was written.
    pub out_dir: Option<PathBuf>,
}

type StepResult = Result<StepReport, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

struct Context<'a> {
    model: &'a Model,
    joint: &'a JointDistribution,
    base: &'a Path,
    out_dir: &'a Path,
    prefix: String,
    artifacts: Vec<String>,
}

impl Context<'_> {
    fn output(&self, name: &str) -> Result<usize, String> {
        self.model
            .output_names()
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| format!("unknown output {name:?}"))
    }

    /// Creates `<prefix>_<suffix>` in the output directory and records it.
    fn artifact(&mut self, suffix: &str, write: impl FnOnce(fs::File) -> Result<(), String>) -> Result<(), String> {
        let file = format!("{}_{suffix}", self.prefix);
        let f = fs::File::create(self.out_dir.join(&file)).map_err(err)?;
        write(f)?;
        self.artifacts.push(file);
        Ok(())
    }

    fn csv(&mut self, suffix: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), String> {
        self.artifact(suffix, |f| {
            let mut w = csv::Writer::from_writer(f);
            w.write_record(header).map_err(err)?;
            for r in rows {
                w.write_record(r.iter().map(|v| v.to_string())).map_err(err)?;
            }
            w.flush().map_err(err)
        })
    }

    fn finish(self, name: String, method: &str, seed: Option<u64>, results: Value, n_evaluations: u64) -> StepReport {
        StepReport {
            name,
            method: method.to_owned(),
            seed,
            results,
            n_evaluations,
            artifacts: self.artifacts,
        }
    }
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result values serialize")
}

fn inputs_summary(joint: &JointDistribution) -> Value {
    json!({
        "labels": joint.labels(),
        "margins": joint.margins().iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "mean": joint.mean(),
        "std": joint.std(),
        "independent": joint.copula().is_independent(),
    })
}

fn reliability_summary(r: &ReliabilityResult) -> Value {
    json!({
        "pf": r.pf,
        "variance": r.variance,
        "ci95": [r.ci95.0, r.ci95.1],
        "coefficient_of_variation": r.coefficient_of_variation(),
        "size": r.size,
        "warnings": r.warnings,
    })
}

fn central_tendency(ctx: &mut Context, s: &CentralTendencyStep, rng: &mut RngStream) -> Result<(String, Value), String> {
    let out = ctx.output(&s.output)?;
    let mut results = json!({ "output": s.output });
    let mut methods = Vec::new();
    if s.taylor {
        let t = taylor_moments(ctx.model, ctx.joint, out).map_err(err)?;
        results["taylor"] = json!({
            "mean": t.mean_first_order,
            "mean_second_order": t.mean_second_order,
            "std": t.std,
            "variance": t.variance,
        });
        methods.push("taylor");
    }
    if let Some(n) = s.mc {
        let c = mc_central_tendency(ctx.model, ctx.joint, out, n, rng).map_err(err)?;
        results["mc"] = json!({ "size": c.size, "mean": c.mean, "std": c.std });
        let h = c.histogram;
        ctx.csv(
            "histogram.csv",
            &["low", "high", "count"],
            h.counts.iter().enumerate().map(|(i, &k)| vec![h.edges[i], h.edges[i + 1], k as f64]),
        )?;
        methods.push("monte_carlo");
    }
    Ok((methods.join("+"), results))
}

fn minmax(ctx: &mut Context, s: &MinmaxStep, rng: &mut RngStream) -> Result<(String, Value), String> {
    let out = ctx.output(&s.output)?;
    let mut results = json!({ "output": s.output });
    let mut methods = Vec::new();
    if let Some(design) = &s.design {
        let e = minmax_doe(ctx.model, ctx.joint, out, design, rng).map_err(err)?;
        results["design"] = value(&e);
        methods.push("design");
    }
    if s.optimize {
        let (mu, sd) = (ctx.joint.mean(), ctx.joint.std());
        let (slo, shi) = ctx.joint.support();
        let lower: Vec<f64> = (0..mu.len()).map(|i| (mu[i] - 3.0 * sd[i]).max(slo[i])).collect();
        let upper: Vec<f64> = (0..mu.len()).map(|i| (mu[i] + 3.0 * sd[i]).min(shi[i])).collect();
        let lo = minmax_optimize(ctx.model, out, &lower, &upper, &mu, Direction::Min).map_err(err)?;
        let hi = minmax_optimize(ctx.model, out, &lower, &upper, &mu, Direction::Max).map_err(err)?;
        results["optimize"] = json!({ "lower": lower, "upper": upper, "min": value(&lo), "max": value(&hi) });
        methods.push("optimize");
    }
    Ok((methods.join("+"), results))
}

fn reliability(ctx: &mut Context, s: &ReliabilityStep, rng: &mut RngStream) -> Result<(String, Value, u64), String> {
    let out = ctx.output(&s.output)?;
    let event = StandardEvent::new(
        ctx.model.clone(),
        IsoTransform::new(ctx.joint.clone()).map_err(err)?,
        Event {
            output: out,
            comparison: s.comparison,
            threshold: s.threshold,
        },
    )
    .map_err(err)?;
    let start = event.evaluations();
    let mut results = json!({
        "output": s.output,
        "comparison": value(&s.comparison),
        "threshold": s.threshold,
    });
    let history = |ctx: &mut Context, r: &ReliabilityResult| {
        ctx.artifact("convergence.csv", |f| r.write_history(f).map_err(err))
    };
    let method = match s.method {
        ReliabilityMethod::Form => {
            let f = form(&event, &FormSettings::default()).map_err(err)?;
            results["form"] = value(&f);
            "form"
        }
        ReliabilityMethod::MonteCarlo => {
            let r = mc_pf(&event, &SamplingSettings::fixed(s.budget.unwrap_or(100_000)), rng).map_err(err)?;
            results["mc"] = reliability_summary(&r);
            history(ctx, &r)?;
            "monte_carlo"
        }
        ReliabilityMethod::ImportanceSampling => {
            let f = form(&event, &FormSettings::default()).map_err(err)?;
            let settings = SamplingSettings::fixed(s.budget.unwrap_or(10_000));
            let r = importance_sampling_pf(&event, &f.design_point_u, &settings, rng).map_err(err)?;
            results["design_point_u"] = value(&f.design_point_u);
            results["importance_sampling"] = reliability_summary(&r);
            history(ctx, &r)?;
            "importance_sampling"
        }
        ReliabilityMethod::Directional => {
            let settings = DirectionalSettings {
                directions: s.budget.unwrap_or(1000),
                ..Default::default()
            };
            let r = directional_sampling_pf(&event, &settings, rng).map_err(err)?;
            results["directional"] = reliability_summary(&r);
            history(ctx, &r)?;
            "directional"
        }
        ReliabilityMethod::Subset => {
            let settings = SubsetSettings {
                n_per_step: s.budget.unwrap_or(10_000),
                ..Default::default()
            };
            let (r, steps) = subset_sampling_pf(&event, &settings, rng).map_err(err)?;
            results["subset"] = reliability_summary(&r);
            results["subset"]["levels"] = value(&steps);
            ctx.csv(
                "levels.csv",
                &["threshold", "probability", "acceptance_rate", "coefficient_of_variation"],
                steps
                    .iter()
                    .map(|l| vec![l.threshold, l.probability, l.acceptance_rate, l.coefficient_of_variation]),
            )?;
            "subset"
        }
    };
    Ok((method.to_owned(), results, event.evaluations() - start))
}

fn sensitivity(ctx: &mut Context, s: &SensitivityStep, rng: &mut RngStream) -> Result<(String, Value), String> {
    let out = ctx.output(&s.output)?;
    let mut results = json!({ "output": s.output });
    let method = match s.method {
        SensitivityMethod::Sobol => {
            let r = sobol_pickfreeze(ctx.model, ctx.joint, out, s.n, rng).map_err(err)?;
            results["sobol"] = value(&r);
            "sobol_pickfreeze"
        }
        m => {
            let x = ctx.joint.sample(s.n, rng);
            let y = ctx.model.evaluate(&x).map_err(err)?;
            let col = y.column(out);
            let (name, r) = match m {
                SensitivityMethod::Src => ("src", src(&x, &col)),
                SensitivityMethod::Srrc => ("srrc", srrc(&x, &col)),
                SensitivityMethod::Pearson => ("pearson", pearson(&x, &col)),
                _ => ("spearman", spearman(&x, &col)),
            };
            let r = r.map_err(err)?;
            results["indices"] = value(&r);
            results["ranking"] = value(&r.ranking().iter().map(|&i| r.labels[i].clone()).collect::<Vec<_>>());
            let labelled = y.set_labels(ctx.model.output_names().to_vec()).map_err(err)?;
            let joined = x.hstack(&labelled).map_err(err)?;
            ctx.artifact("scatter.csv", |f| joined.write_csv(f).map_err(err))?;
            let target = Sample::from_columns(&[col]).map_err(err)?.set_labels([s.output.clone()]).map_err(err)?;
            let cobweb = cobweb_data(&x, &target, (0.95, 1.0)).map_err(err)?;
            ctx.artifact("cobweb.csv", |f| cobweb.write_csv(f).map_err(err))?;
            name
        }
    };
    Ok((method.to_owned(), results))
}

/// Unit-cube design mapped through the iso-probabilistic transform of the inputs.
fn design_points(joint: &JointDistribution, unit: &Sample) -> Result<Sample, String> {
    let t = IsoTransform::new(joint.clone()).map_err(err)?;
    let mut x = Sample::with_labels(joint.labels().to_vec());
    for row in unit.rows() {
        let u: Vec<f64> = row.iter().map(|&p| norm_quantile(p)).collect();
        x.push(&t.from_standard(&u).map_err(err)?).map_err(err)?;
    }
    Ok(x)
}

fn metamodel(ctx: &mut Context, s: &MetamodelStep, rng: &mut RngStream) -> Result<(String, Value), String> {
    let out = ctx.output(&s.output)?;
    let mut results = json!({ "output": s.output });
    if let Some(settings) = &s.chaos {
        let e = chaos_fit(ctx.model, ctx.joint, settings, rng).map_err(err)?;
        let sobol = chaos_sobol(&e, out).map_err(err)?;
        results["chaos"] = json!({
            "terms": e.indices.len(),
            "mean": e.mean(out),
            "variance": e.variance(out),
            "residual": e.residuals[out],
            "relative_error": e.relative_errors[out],
            "sobol": value(&sobol),
        });
        let text = e.to_json().map_err(err)?;
        ctx.artifact("chaos.json", |mut f| std::io::Write::write_all(&mut f, text.as_bytes()).map_err(err))?;
        return Ok(("chaos".into(), results));
    }
    let k = s.kriging.as_ref().ok_or("give exactly one of chaos or kriging")?;
    let unit = k.design.generate(ctx.joint.dim(), rng).map_err(err)?;
    let x = design_points(ctx.joint, &unit)?;
    let y = ctx.model.evaluate(&x).map_err(err)?.column(out);
    let m = kriging_fit(&x, &y, &k.settings).map_err(err)?;
    let xv = ctx.joint.sample(k.validation, rng);
    let yv = ctx.model.evaluate(&xv).map_err(err)?.column(out);
    let mean = yv.iter().sum::<f64>() / yv.len() as f64;
    let (mut sse, mut sst) = (0.0, 0.0);
    for (row, v) in xv.rows().zip(&yv) {
        sse += (m.predict(row).map_err(err)?.mean - v).powi(2);
        sst += (v - mean).powi(2);
    }
    results["kriging"] = json!({
        "theta": m.theta,
        "sigma2": m.sigma2,
        "beta": m.beta,
        "nugget": m.nugget,
        "log_likelihood": m.log_likelihood,
        "training_size": y.len(),
        "validation_rmse": (sse / yv.len() as f64).sqrt(),
        "validation_q2": 1.0 - sse / sst,
        "leave_one_out": m.leave_one_out().map_err(err)?,
    });
    let text = m.to_json().map_err(err)?;
    ctx.artifact("kriging.json", |mut f| std::io::Write::write_all(&mut f, text.as_bytes()).map_err(err))?;
    Ok(("kriging".into(), results))
}

fn fit(ctx: &mut Context, s: &FitStep, rng: &mut RngStream) -> Result<(String, Value), String> {
    let data = match &s.data {
        FitData::Csv { path, column } => {
            let f = fs::File::open(resolve(ctx.base, path)).map_err(err)?;
            let sample = Sample::read_csv(f).map_err(err)?;
            let j = sample
                .labels()
                .iter()
                .position(|l| l == column)
                .ok_or_else(|| format!("column {column:?} not found"))?;
            sample.column(j)
        }
        FitData::Sample { input, n } => {
            let j = ctx
                .joint
                .labels()
                .iter()
                .position(|l| l == input)
                .ok_or_else(|| format!("unknown input {input:?}"))?;
            ctx.joint.margin(j).sample(*n, rng)
        }
    };
    let mut fits = Vec::new();
    let mut best: Option<(f64, usize, uq_core::dist::Univariate)> = None;
    for name in &s.families {
        let family = Family::from_name(name).ok_or_else(|| format!("unknown family {name:?}"))?;
        let r = fit_mle(family, &data).map_err(err)?;
        let ks = ks_test(&data, &r.distribution, s.level).map_err(err)?;
        let (_, params) = r.distribution.describe();
        if best.as_ref().is_none_or(|b| ks.p_value > b.0) {
            best = Some((ks.p_value, fits.len(), r.distribution.clone()));
        }
        fits.push(json!({
            "family": name,
            "distribution": r.distribution.to_string(),
            "parameters": params.into_iter().map(|(k, v)| (k, Value::from(v))).collect::<serde_json::Map<String, Value>>(),
            "log_likelihood": r.log_likelihood,
            "ks": value(&ks),
        }));
    }
    let mut results = json!({ "size": data.len(), "fits": fits });
    if let Some((_, i, dist)) = best {
        results["best"] = Value::from(s.families[i].clone());
        ctx.csv(
            "qq.csv",
            &["model_quantile", "empirical_quantile"],
            qq_plot_data(&data, &dist).into_iter().map(|(a, b)| vec![a, b]),
        )?;
    }
    if s.kernel {
        let k = kernel_smooth(&data, None, None).map_err(err)?;
        let (lo, hi) = k.support();
        let (lo, hi) = (lo.max(data.iter().cloned().fold(f64::INFINITY, f64::min)), hi);
        let hi = hi.min(data.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        results["kernel"] = json!({ "bandwidth": k.bandwidth() });
        ctx.csv(
            "kernel.csv",
            &["x", "pdf"],
            (0..200).map(|i| {
                let x = lo + (hi - lo) * i as f64 / 199.0;
                vec![x, k.pdf(x)]
            }),
        )?;
    }
    Ok(("mle+kolmogorov".into(), results))
}

fn run_step(ctx: Context, index: usize, step: &StepConfig, master: Option<u64>) -> StepResult {
    let (seed, mut rng) = match (step.seed(), master) {
        (Some(s), _) => (Some(s), RngStream::new(s)),
        (None, Some(m)) => (Some(m), RngStream::new(m).substream(index as u64)),
        (None, None) => (None, RngStream::new(0)),
    };
    let seed = if step.is_stochastic() { seed } else { None };
    let mut ctx = ctx;
    let start = ctx.model.evaluations();
    let (method, results, evaluations) = match step {
        StepConfig::CentralTendency(s) => central_tendency(&mut ctx, s, &mut rng).map(|(m, r)| (m, r, None))?,
        StepConfig::Minmax(s) => minmax(&mut ctx, s, &mut rng).map(|(m, r)| (m, r, None))?,
        StepConfig::Reliability(s) => reliability(&mut ctx, s, &mut rng).map(|(m, r, n)| (m, r, Some(n)))?,
        StepConfig::Sensitivity(s) => sensitivity(&mut ctx, s, &mut rng).map(|(m, r)| (m, r, None))?,
        StepConfig::Metamodel(s) => metamodel(&mut ctx, s, &mut rng).map(|(m, r)| (m, r, None))?,
        StepConfig::Fit(s) => fit(&mut ctx, s, &mut rng).map(|(m, r)| (m, r, Some(0)))?,
    };
    let n = evaluations.unwrap_or_else(|| ctx.model.evaluations() - start);
    Ok(ctx.finish(step.name(), &method, seed, results, n))
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn write_report(out_dir: &Path, report: &Report) -> bool {
    fs::create_dir_all(out_dir).is_ok() && fs::write(out_dir.join("report.json"), report.to_json()).is_ok()
}

fn invalid(config: Option<&StudyConfig>, diagnostics: Vec<Diagnostic>, out_dir: Option<&Path>) -> Outcome {
    let report = Report {
        study: config.map(|c| c.study.clone()).unwrap_or_default(),
        seed: config.and_then(|c| c.seed),
        inputs: None,
        steps: Vec::new(),
        error: Some(ErrorBlock {
            kind: "validation".into(),
            step: None,
            diagnostics,
        }),
    };
    let written = out_dir.filter(|d| write_report(d, &report)).map(Path::to_path_buf);
    Outcome {
        exit_code: EXIT_INVALID,
        report,
        out_dir: written,
    }
}

/// Validates and runs a parsed study. Relative paths in the study resolve against `base`.
pub fn run_config(config: &StudyConfig, base: &Path, out_dir: &Path) -> Outcome {
    let diagnostics = config.validate(base);
    if !diagnostics.is_empty() {
        return invalid(Some(config), diagnostics, Some(out_dir));
    }
    let (model, joint) = match (config.build_model(base), config.build_inputs()) {
        (Ok(m), Ok(j)) => (m, j),
        (Err(d), _) | (_, Err(d)) => return invalid(Some(config), vec![d], Some(out_dir)),
    };
    let mut report = Report {
        study: config.study.clone(),
        seed: config.seed,
        inputs: Some(inputs_summary(&joint)),
        steps: Vec::new(),
        error: None,
    };
    if let Err(e) = fs::create_dir_all(out_dir) {
        report.error = Some(ErrorBlock {
            kind: "runtime".into(),
            step: None,
            diagnostics: vec![Diagnostic {
                path: "output_dir".into(),
                message: format!("cannot create {}: {e}", out_dir.display()),
            }],
        });
        return Outcome {
            exit_code: EXIT_FAILED,
            report,
            out_dir: None,
        };
    }
    let mut exit_code = EXIT_OK;
    for (i, step) in config.steps.iter().enumerate() {
        let ctx = Context {
            model: &model,
            joint: &joint,
            base,
            out_dir,
            prefix: format!("{:02}_{}", i + 1, sanitize(&step.name())),
            artifacts: Vec::new(),
        };
        match run_step(ctx, i, step, config.seed) {
            Ok(r) => report.steps.push(r),
            Err(message) => {
                report.error = Some(ErrorBlock {
                    kind: "runtime".into(),
                    step: Some(step.name()),
                    diagnostics: vec![Diagnostic {
                        path: format!("steps[{i}].{}", step.kind()),
                        message,
                    }],
                });
                exit_code = EXIT_FAILED;
                break;
            }
        }
    }
    let written = write_report(out_dir, &report).then(|| out_dir.to_path_buf());
    if written.is_none() && exit_code == EXIT_OK {
        exit_code = EXIT_FAILED;
    }
    Outcome {
        exit_code,
        report,
        out_dir: written,
    }
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Loads, validates and runs the study file. `out` overrides the study's output directory.
pub fn run_file(path: &Path, out: Option<&Path>, threads: Option<usize>) -> Outcome {
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let config = match load(path) {
        Ok(c) => c,
        Err(d) => return invalid(None, vec![d], out),
    };
    let out_dir = match (out, &config.output_dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => resolve(&base, o),
        (None, None) => base.join(format!("{}-out", sanitize(&config.study))),
    };
    with_threads(threads, || run_config(&config, &base, &out_dir))
}

/// Diagnostics for a study file, without running it.
pub fn validate_file(path: &Path) -> Vec<Diagnostic> {
    let base = path.parent().unwrap_or(Path::new("."));
    match load(path) {
        Ok(c) => c.validate(base),
        Err(d) => vec![d],
    }
}
