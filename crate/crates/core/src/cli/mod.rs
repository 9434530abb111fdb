//! Command-line surface. [`run`] parses arguments, resolves the experiment
//! configuration (file values, then flags) and dispatches to a subcommand.
//!
//! Exit codes: `0` success, `2` invalid input, `3` collapsed comparison.

pub mod config;
pub mod files;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::bounds::{BoundAdapter, BoundQuery, FunctionClassSpec};
use crate::collapse::{detect_collapse, fold_plan, subsample_trials_with, CollapseReport, Verdict};
use crate::domain::{ClassifierSpec, ComparisonProblem, PairedPredictions, PerformancePair, ProbingConfiguration};
use crate::error::{domain, Error, Result};
use crate::lab::report::write_report;
use crate::lab::study::{run_case_study, CaseStudyKind, CaseStudyParams, StudyCollapseSettings, StudyPowerSettings};
use crate::lab::train::TrainerConfig;
use crate::sizer::recommend;
use crate::stats::PowerSettings;
pub use config::ExperimentConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_COLLAPSED: i32 = 3;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "PROBE_SIZER_THREADS";

fn kebab<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn study_kind(s: &str) -> std::result::Result<CaseStudyKind, String> {
    CaseStudyKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = CaseStudyKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Parser)]
#[command(name = "probe-sizer", version, about = "Plan and audit paired probing-classifier comparisons")]
pub struct Cli {
    /// TOML experiment configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Default, Args)]
struct Overrides {
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Power simulations per classifier seed.
    #[arg(long, global = true)]
    num_sims: Option<usize>,
    #[arg(long = "bits", global = true)]
    bits_per_param: Option<u32>,
    #[arg(long = "range", global = true)]
    metric_range: Option<f64>,
    #[arg(long, global = true)]
    collapsed_below: Option<f64>,
    #[arg(long, global = true)]
    not_collapsed_at: Option<f64>,
    #[arg(long = "trials", global = true)]
    collapse_trials: Option<usize>,
    #[arg(long = "seed", global = true)]
    rng_seed: Option<u64>,
    #[arg(long, global = true)]
    prequential_c: Option<f64>,
    #[arg(long, global = true)]
    t1_fraction: Option<f64>,
    /// `mean-of-gaps` or `gap-of-means`.
    #[arg(long, global = true, value_parser = kebab::<crate::domain::GapMode>)]
    gap_mode: Option<crate::domain::GapMode>,
    /// `auto`, `without-replacement` or `with-replacement`.
    #[arg(long, global = true, value_parser = kebab::<crate::stats::SamplingMode>)]
    sampling: Option<crate::stats::SamplingMode>,
}

impl Overrides {
    fn apply(&self, c: &mut ExperimentConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(
            delta,
            eta,
            alpha,
            num_sims,
            bits_per_param,
            metric_range,
            collapsed_below,
            not_collapsed_at,
            collapse_trials,
            rng_seed,
            prequential_c,
            t1_fraction,
            gap_mode,
            sampling
        );
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelName {
    Logreg,
    Mlp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AdapterName {
    Plain,
    Control,
    Variational,
    Prequential,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "logreg")]
    model: ModelName,
    /// Representation dimension.
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 20)]
    hidden: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
}

fn classifier(model: ModelName, dim: usize, hidden: usize, classes: usize) -> Result<ClassifierSpec> {
    match model {
        ModelName::Logreg => ClassifierSpec::logistic_regression(dim, classes),
        ModelName::Mlp => ClassifierSpec::mlp(dim, hidden, classes),
    }
}

impl ModelArgs {
    fn spec(&self) -> Result<ClassifierSpec> {
        classifier(self.model, self.dim, self.hidden, self.classes)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generalization margin for a training-set size.
    Bound {
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "plain")]
        adapter: AdapterName,
        /// Control-task confidence for `--adapter control`; defaults to delta.
        #[arg(long)]
        control_delta: Option<f64>,
    },
    /// Training-set size needed to resolve a pilot gap.
    Recommend {
        /// Paired predictions CSV; enables the collapse pre-check.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Pilot CSV with `r1,r2` accuracy rows.
        #[arg(long)]
        pilot: Option<PathBuf>,
        /// Pilot accuracies `R1,R2`; repeat once per seed.
        #[arg(long = "pair")]
        pairs: Vec<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        model_b: Option<ModelName>,
        #[arg(long)]
        dim_b: Option<usize>,
        #[arg(long)]
        hidden_b: Option<usize>,
        #[arg(long, default_value = "task")]
        task: String,
        /// Pilot draw size for the collapse pre-check; defaults to half the items.
        #[arg(long)]
        trial_size: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power curve over test-set sizes (CSV).
    Power {
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Comma-separated sizes; defaults to a doubling grid up to the pool size.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON report with the resolved configuration.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Collapse detection by repeated pilot draws, or a fold plan.
    Collapse {
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Print the cross-validation plan for this many folds instead.
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        trial_size: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic case study written to an artifact directory.
    Simulate {
        #[arg(value_parser = study_kind)]
        kind: CaseStudyKind,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write SVG plots.
        #[arg(long)]
        plot: bool,
        /// Compare a probe against itself.
        #[arg(long)]
        identical: bool,
        /// Single grid point instead of the full hyperparameter search.
        #[arg(long)]
        compact: bool,
        /// Training rows per class, comma-separated.
        #[arg(long, value_delimiter = ',')]
        subsets: Vec<usize>,
        /// Classifier seeds per subset.
        #[arg(long)]
        seeds: Option<usize>,
        /// Noise variances, comma-separated.
        #[arg(long, value_delimiter = ',')]
        noise: Vec<f64>,
    },
}

/// Outcome of a subcommand: its exit code.
type Outcome = Result<i32>;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CollapsedComparison => EXIT_COLLAPSED,
        _ => EXIT_INVALID,
    }
}

fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // Fails harmlessly when the pool already exists.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    init_threads();
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut c = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cli.overrides.apply(&mut c);
    c.validate()?;
    Ok(c)
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display())))?;
    }
    out.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let cfg = resolve(&cli)?;
    match &cli.command {
        Command::Bound {
            n,
            model,
            adapter,
            control_delta,
        } => cmd_bound(&cfg, *n, model, *adapter, *control_delta, stdout),
        Command::Recommend {
            predictions,
            pilot,
            pairs,
            model,
            model_b,
            dim_b,
            hidden_b,
            task,
            trial_size,
            out,
        } => {
            let spec_a = model.spec()?;
            let spec_b = classifier(
                model_b.unwrap_or(model.model),
                dim_b.unwrap_or(model.dim),
                hidden_b.unwrap_or(model.hidden),
                model.classes,
            )?;
            let problem = ComparisonProblem::new(
                ProbingConfiguration::new(task, "a", spec_a)?,
                ProbingConfiguration::new(task, "b", spec_b)?,
            )?;
            let source = PilotSource {
                predictions: predictions.clone().or_else(|| cfg.predictions.clone()),
                pilot: pilot.clone().or_else(|| cfg.pilot.clone()),
                pairs: pairs.clone(),
            };
            cmd_recommend(&cfg, &problem, source, *trial_size, out.as_deref().or(cfg.out.as_deref()), stdout, stderr)
        }
        Command::Power {
            predictions,
            sizes,
            out,
            report,
        } => {
            let path = predictions
                .clone()
                .or_else(|| cfg.predictions.clone())
                .ok_or_else(|| domain("predictions", "file is required"))?;
            cmd_power(&cfg, &path, sizes, out.as_deref().or(cfg.out.as_deref()), report.as_deref(), stdout)
        }
        Command::Collapse {
            predictions,
            folds,
            trial_size,
            out,
        } => {
            if let Some(f) = folds {
                let plan = fold_plan(*f)?;
                emit(stdout, out.as_deref(), &plan.to_table())?;
                return Ok(EXIT_OK);
            }
            let path = predictions
                .clone()
                .or_else(|| cfg.predictions.clone())
                .ok_or_else(|| domain("predictions", "file is required unless --folds is given"))?;
            let pred = files::load_predictions(&path)?;
            let (report, trial) = collapse_check(&cfg, &pred, *trial_size)?;
            let doc = json!({
                "config": cfg,
                "num_items": pred.num_items(),
                "num_seeds": pred.num_seeds(),
                "trial_size": trial,
                "report": report,
            });
            emit(stdout, out.as_deref().or(cfg.out.as_deref()), &to_json(&doc))?;
            Ok(if report.verdict == Verdict::Collapsed { EXIT_COLLAPSED } else { EXIT_OK })
        }
        Command::Simulate {
            kind,
            out,
            plot,
            identical,
            compact,
            subsets,
            seeds,
            noise,
        } => {
            let mut params = CaseStudyParams::default();
            if !subsets.is_empty() {
                params.subset_sizes = subsets.clone();
            }
            if let Some(s) = seeds {
                params.num_seeds = *s;
            }
            if !noise.is_empty() {
                params.noise_grid = noise.clone();
            }
            if *compact {
                params.trainer = TrainerConfig::compact(params.trainer.model);
            }
            params.identical = *identical;
            params.eta = cfg.eta;
            params.power = StudyPowerSettings {
                num_sims_per_seed: cfg.num_sims,
                alpha: cfg.alpha,
                sampling: cfg.sampling,
            };
            params.sizer = cfg.sizer_settings();
            params.collapse = StudyCollapseSettings {
                thresholds: cfg.thresholds(),
                num_trials: cfg.collapse_trials,
                ..StudyCollapseSettings::default()
            };
            let dir = out
                .clone()
                .or_else(|| cfg.out.clone())
                .unwrap_or_else(|| PathBuf::from(format!("simulate-{}", kind.as_str())));
            let report = run_case_study(*kind, &params, cfg.rng_seed)?;
            write_report(&report, &dir, *plot)?;
            let config_path = dir.join("config.json");
            std::fs::write(&config_path, to_json(&cfg))
                .map_err(|e| Error::Io(format!("cannot write {}: {e}", config_path.display())))?;
            let verdicts: Vec<_> = report
                .final_verdicts()
                .into_iter()
                .map(|(name, r)| json!({"comparison": name, "verdict": r.verdict}))
                .collect();
            let summary = json!({
                "kind": kind,
                "out": dir.display().to_string(),
                "coverage": report.coverage.fraction(),
                "verdicts": verdicts,
            });
            emit(stdout, None, &to_json(&summary))?;
            Ok(EXIT_OK)
        }
    }
}

fn cmd_bound(
    cfg: &ExperimentConfig,
    n: u64,
    model: &ModelArgs,
    adapter: AdapterName,
    control_delta: Option<f64>,
    out: &mut dyn Write,
) -> Outcome {
    let spec = model.spec()?;
    let adapter = match adapter {
        AdapterName::Plain => BoundAdapter::Plain,
        AdapterName::Control => BoundAdapter::ControlTask { control_delta },
        AdapterName::Variational => BoundAdapter::VariationalMdl,
        AdapterName::Prequential => BoundAdapter::Prequential {
            c: cfg.prequential_c,
            t1_fraction: cfg.t1_fraction,
        },
    };
    let query = BoundQuery {
        n,
        delta: cfg.delta,
        metric_range: cfg.metric_range,
        class_spec: FunctionClassSpec::from_classifier(&spec, cfg.bits_per_param)?,
        adapter,
    };
    let result = query.evaluate()?;
    let doc = json!({
        "config": cfg,
        "classifier": spec,
        "query": query,
        "margin": result.margin,
        "effective_delta": result.effective_delta,
        "loose": result.loose,
    });
    emit(out, None, &to_json(&doc))?;
    Ok(EXIT_OK)
}

struct PilotSource {
    predictions: Option<PathBuf>,
    pilot: Option<PathBuf>,
    pairs: Vec<String>,
}

fn parse_pair(s: &str) -> Result<PerformancePair> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| domain("pair", format!("`{s}` must look like R1,R2")))?;
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| domain("pair", format!("`{s}` must look like R1,R2")))
    };
    PerformancePair::accuracy(num(a)?, num(b)?)
}

fn collapse_check(
    cfg: &ExperimentConfig,
    pred: &PairedPredictions,
    trial_size: Option<usize>,
) -> Result<(CollapseReport, usize)> {
    let trial = trial_size.unwrap_or_else(|| (pred.num_items() / 2).max(1));
    let trials = subsample_trials_with(pred, trial, cfg.collapse_trials, cfg.alpha, cfg.sampling, cfg.rng_seed)?;
    Ok((detect_collapse(&trials, &cfg.thresholds())?, trial))
}

fn cmd_recommend(
    cfg: &ExperimentConfig,
    problem: &ComparisonProblem,
    source: PilotSource,
    trial_size: Option<usize>,
    out_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let given = usize::from(source.predictions.is_some())
        + usize::from(source.pilot.is_some())
        + usize::from(!source.pairs.is_empty());
    if given != 1 {
        return Err(domain("pilot input", "must be exactly one of --predictions, --pilot or --pair"));
    }
    let (pilot, collapse, input) = if let Some(path) = &source.predictions {
        let pred = files::load_predictions(path)?;
        let (report, _) = collapse_check(cfg, &pred, trial_size)?;
        (pred.accuracy_pairs(), Some(report), json!({"predictions": path}))
    } else if let Some(path) = &source.pilot {
        (files::load_pilot(path)?, None, json!({"pilot": path}))
    } else {
        let pairs = source.pairs.iter().map(|s| parse_pair(s)).collect::<Result<Vec<_>>>()?;
        (pairs, None, json!({"pairs": source.pairs}))
    };
    let rec = recommend(&pilot, problem, &cfg.sizer_settings(), collapse.as_ref())?;
    let doc = json!({
        "config": cfg,
        "input": input,
        "pilot": pilot,
        "problem": {
            "task": problem.config_a().task_id(),
            "classifier_a": problem.config_a().classifier(),
            "classifier_b": problem.config_b().classifier(),
        },
        "collapse": collapse,
        "recommendation": rec,
    });
    emit(out, out_path, &to_json(&doc))?;
    if rec.collapse_warning {
        let _ = writeln!(err, "warning: collapsed comparison; the recommended size is not meaningful");
        return Ok(EXIT_COLLAPSED);
    }
    Ok(EXIT_OK)
}

/// Powers of two from 8 below the pool size, then the pool size.
pub fn default_sizes(pool: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut s = 8.min(pool).max(1);
    while s < pool {
        v.push(s);
        s *= 2;
    }
    v.push(pool);
    v
}

fn cmd_power(
    cfg: &ExperimentConfig,
    path: &Path,
    sizes: &[usize],
    out_path: Option<&Path>,
    report: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let pred = files::load_predictions(path)?;
    let sizes = if sizes.is_empty() { default_sizes(pred.num_items()) } else { sizes.to_vec() };
    let settings = PowerSettings {
        num_sims_per_seed: cfg.num_sims,
        alpha: cfg.alpha,
        sampling: cfg.sampling,
        rng_seed: cfg.rng_seed,
    };
    let curve = settings.curve(&pred, &sizes)?;
    if let Some(p) = report {
        let doc = json!({"config": cfg, "predictions": path, "curve": curve});
        std::fs::write(p, to_json(&doc)).map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display())))?;
    }
    emit(out, out_path, &curve.to_csv())?;
    Ok(EXIT_OK)
}
