//! Argument definitions and command dispatch.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use takeover_core::booster::train;
use takeover_core::dataset::{preprocess, summarize};
use takeover_core::explain::{self, DependenceData};
use takeover_core::pipeline::{self, HyperGrid};
use takeover_core::schema::{self, merged_schema, study_schema};
use takeover_core::synth::{synthesize, GeneratorSpec};
use takeover_core::{Dataset, DatasetError, Ensemble, Hyperparams, PreprocessOptions, Provenance, VariableSpec};

use crate::manifest::{sha256_hex, InputInfo, Manifest};
use crate::model::{load_model, save_model};
use crate::report;
use crate::seeds::{parse_bounds, parse_seeds};
use crate::table::{infer_schema, parse_table, write_table, TARGET_COLUMN};

/// Takeover-time modelling: gradient-boosted trees with exact Shapley explanations.
#[derive(Debug, Parser, Serialize)]
#[command(name = "takeover", version, about)]
pub struct Cli {
    /// Cap on worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, env = "TAKEOVER_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Validate a raw table, merge the time budgets, drop outliers, and
    /// write the cleaned table plus summary statistics.
    Ingest(IngestArgs),
    /// Generate a seeded synthetic table with a known target function.
    Synth(SynthArgs),
    /// Train a model on a table and save it as JSON.
    Train(TrainArgs),
    /// Repeated k-fold cross-validation of the booster.
    Cv(CvCommand),
    /// Exhaustive hyperparameter grid search by cross-validated RMSE.
    Grid(GridArgs),
    /// Forward feature selection along the global importance ranking.
    Select(SelectArgs),
    /// Shapley explanations: global ranking, dependence data, per-instance
    /// values, interaction matrices or force-plot data.
    Explain(ExplainArgs),
    /// Cross-validation on cumulative target bins.
    Bins(BinsArgs),
    /// Least-squares baseline, optionally next to the booster.
    Baseline(BaselineArgs),
    /// Predict takeover time for one instance or every row of a table.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Input table (CSV with a header row).
    #[arg(long)]
    pub data: PathBuf,
    /// Schema as a JSON list of variables; by default inferred from the header.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Name of the target column.
    #[arg(long, default_value = TARGET_COLUMN)]
    pub target: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HyperArgs {
    /// JSON file with hyperparameters, either bare or under a `best` key
    /// (as written by `grid`). Flags below override it.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub n_estimators: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub subsample: Option<f64>,
    #[arg(long)]
    pub colsample_bytree: Option<f64>,
    #[arg(long)]
    pub reg_lambda: Option<f64>,
    #[arg(long)]
    pub reg_gamma: Option<f64>,
    #[arg(long)]
    pub min_child_weight: Option<f64>,
    /// Booster seed for row and column sampling.
    #[arg(long)]
    pub model_seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CvArgs {
    /// Number of folds.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Shuffle seeds: `a..b` (inclusive), `a,b,c` or a single number.
    #[arg(long, default_value = "0..99")]
    pub seeds: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FeatureArgs {
    /// Comma-separated variable names to use (default: all).
    #[arg(long)]
    pub features: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Targets above this many seconds are dropped.
    #[arg(long, default_value_t = 9.0)]
    pub outlier_threshold: f64,
    /// Keep TBTC and TBTB as separate columns.
    #[arg(long)]
    pub no_merge: bool,
    /// Cleaned table.
    #[arg(long, default_value = "clean.csv")]
    pub out: PathBuf,
    /// Summary statistics JSON (default: next to the table).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Generator description as JSON; the built-in takeover-like generator when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Use the eighteen-variable schema instead of the merged one.
    #[arg(long)]
    pub study_schema: bool,
    #[arg(long)]
    pub rows: Option<usize>,
    /// Noise standard deviation in seconds.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Probability that a predictor cell is blank.
    #[arg(long)]
    pub missing: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output table.
    #[arg(long, default_value = "synthetic.csv")]
    pub out: PathBuf,
    /// Also write the generator description and clean targets here.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Model file (JSON).
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CvCommand {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Report file (JSON).
    #[arg(long, default_value = "cv.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Base hyperparameters for the axes the grid does not search.
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Grid as JSON (`n_estimators`, `learning_rate`, `max_depth`,
    /// `subsample`, `colsample_bytree` lists); the default grid when omitted.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Report file (JSON).
    #[arg(long, default_value = "grid.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    /// Selection table; a `.json` path writes the full report.
    #[arg(long, default_value = "selection.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("mode").required(true).args(["global", "dependence", "shap", "interactions", "force"])))]
pub struct ExplainArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Reference or instance table.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Schema as a JSON list of variables; by default inferred from the header.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Name of the target column.
    #[arg(long, default_value = TARGET_COLUMN)]
    pub target: String,
    /// Global importance ranking over the table.
    #[arg(long)]
    pub global: bool,
    /// Dependence-plot data for this variable.
    #[arg(long, value_name = "VARIABLE")]
    pub dependence: Option<String>,
    /// Shapley values per instance.
    #[arg(long)]
    pub shap: bool,
    /// Interaction matrices per instance.
    #[arg(long)]
    pub interactions: bool,
    /// Force-plot data per instance.
    #[arg(long)]
    pub force: bool,
    /// Explain only this table row (counted from 1).
    #[arg(long)]
    pub row: Option<usize>,
    /// Explain this instance, given as `NAME=value,...`; unlisted variables are missing.
    #[arg(long, conflicts_with = "row")]
    pub instance: Option<String>,
    /// Output file; `.csv` for the ranking or dependence table.
    #[arg(long, default_value = "explain.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BinsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Strictly increasing upper bounds in seconds.
    #[arg(long, default_value = "2,3,4,5,6,7,8,9")]
    pub bounds: String,
    /// Bin table; a `.json` path writes the full report.
    #[arg(long, default_value = "bins.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Also cross-validate the booster on the same folds and features.
    #[arg(long)]
    pub compare: bool,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Report file (JSON).
    #[arg(long, default_value = "baseline.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("input").required(true).args(["instance", "data"])))]
pub struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// One instance as `NAME=value,...`; unlisted variables are missing.
    #[arg(long)]
    pub instance: Option<String>,
    /// Predict every row of this table.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Schema as a JSON list of variables; by default inferred from the header.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Name of the target column.
    #[arg(long, default_value = TARGET_COLUMN)]
    pub target: String,
    /// Output file; an instance prediction goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Executes one command, writing its outputs and a `<out>.manifest.json`.
pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let mut ctx = Run::new(&cli.out_dir);
    let name = command_name(&cli.command);
    let primary = match &cli.command {
        Command::Ingest(a) => ingest(&mut ctx, a)?,
        Command::Synth(a) => synth(&mut ctx, a)?,
        Command::Train(a) => train_cmd(&mut ctx, a)?,
        Command::Cv(a) => cv(&mut ctx, a)?,
        Command::Grid(a) => grid(&mut ctx, a)?,
        Command::Select(a) => select(&mut ctx, a)?,
        Command::Explain(a) => explain_cmd(&mut ctx, a)?,
        Command::Bins(a) => bins(&mut ctx, a)?,
        Command::Baseline(a) => baseline(&mut ctx, a)?,
        Command::Predict(a) => predict(&mut ctx, a)?,
    };
    if let Some(out) = primary {
        ctx.write_manifest(name, &cli, &out)?;
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Synth(_) => "synth",
        Command::Train(_) => "train",
        Command::Cv(_) => "cv",
        Command::Grid(_) => "grid",
        Command::Select(_) => "select",
        Command::Explain(_) => "explain",
        Command::Bins(_) => "bins",
        Command::Baseline(_) => "baseline",
        Command::Predict(_) => "predict",
    }
}

/// Per-run bookkeeping for the manifest.
struct Run {
    out_dir: PathBuf,
    inputs: Vec<InputInfo>,
    outputs: Vec<String>,
    started: SystemTime,
    clock: Instant,
}

impl Run {
    fn new(out_dir: &Path) -> Self {
        Self { out_dir: out_dir.to_path_buf(), inputs: Vec::new(), outputs: Vec::new(), started: SystemTime::now(), clock: Instant::now() }
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.out_dir.join(path)
        }
    }

    /// Writes `text` to the resolved `path` and returns where it went.
    fn write(&mut self, path: &Path, text: &str) -> Result<PathBuf> {
        let path = self.resolve(path);
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    fn load_data(&mut self, path: &Path, schema: Option<&Path>, target: &str) -> Result<Dataset> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let text = String::from_utf8(bytes).map_err(|_| anyhow!("dataset: {} is not UTF-8", path.display()))?;
        let schema = match schema {
            Some(p) => read_schema(p)?,
            None => infer_schema(&text),
        };
        let d = parse_table(&text, &schema, target, Provenance::User).map_err(core)?;
        self.inputs.push(InputInfo {
            path: path.display().to_string(),
            sha256: sha256_hex(text.as_bytes()),
            schema_fingerprint: d.fingerprint(),
            rows: d.n_rows(),
        });
        Ok(d)
    }

    fn load_model(&mut self, path: &Path) -> Result<Ensemble> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m = load_model(&text)?;
        self.inputs.push(InputInfo {
            path: path.display().to_string(),
            sha256: sha256_hex(text.as_bytes()),
            schema_fingerprint: m.schema_fingerprint().to_string(),
            rows: 0,
        });
        Ok(m)
    }

    fn write_manifest(&self, command: &str, cli: &Cli, primary: &Path) -> Result<()> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: cli,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            started_unix_seconds: self.started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            wall_time_seconds: self.clock.elapsed().as_secs_f64(),
        };
        let mut path = primary.as_os_str().to_owned();
        path.push(".manifest.json");
        let path = PathBuf::from(path);
        fs::write(&path, report::json(&manifest)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Core errors as diagnostics that start with the failing module.
fn core<E: Into<takeover_core::Error>>(e: E) -> anyhow::Error {
    anyhow::Error::new(e.into())
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn json_only(path: &Path, what: &str) -> Result<()> {
    if is_csv(path) {
        bail!("output: {what} is written as JSON; use a .json path instead of {}", path.display());
    }
    Ok(())
}

impl HyperArgs {
    fn resolve(&self) -> Result<Hyperparams> {
        let mut p = match &self.params {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| anyhow!("booster: invalid parameter file {}: {e}", path.display()))?;
                let v = v.get("best").cloned().unwrap_or(v);
                Hyperparams::deserialize(v).map_err(|e| anyhow!("booster: invalid parameter file {}: {e}", path.display()))?
            }
            None => Hyperparams::default(),
        };
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f { p.$g = v; })* };
        }
        set!(n_estimators => n_estimators, learning_rate => learning_rate, max_depth => max_depth, subsample => subsample,
             colsample_bytree => colsample_bytree, reg_lambda => reg_lambda, reg_gamma => reg_gamma,
             min_child_weight => min_child_weight, model_seed => seed);
        p.validate().map_err(core)?;
        Ok(p)
    }
}

impl CvArgs {
    fn seeds(&self) -> Result<Vec<u64>> {
        parse_seeds(&self.seeds).map_err(|e| anyhow!("pipeline: --seeds: {e}"))
    }
}

impl FeatureArgs {
    fn indices(&self, d: &Dataset) -> Result<Vec<usize>> {
        match &self.features {
            None => Ok((0..d.n_features()).collect()),
            Some(list) => {
                let names: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                Ok(d.indices_of(&names).map_err(core)?)
            }
        }
    }
}

fn ingest(ctx: &mut Run, a: &IngestArgs) -> Result<Option<PathBuf>> {
    let raw = ctx.load_data(&a.data.data, a.data.schema.as_deref(), &a.data.target)?;
    let opts = PreprocessOptions { merge_time_budgets: !a.no_merge, outlier_threshold: a.outlier_threshold };
    let clean = preprocess(&raw, &opts).map_err(core)?;
    let stats = summarize(&clean).map_err(core)?;
    let out = ctx.write(&a.out, &write_table(&clean, &a.data.target))?;
    let summary = a.summary.clone().unwrap_or_else(|| a.out.with_extension("summary.json"));
    ctx.write(&summary, &report::json(&stats)?)?;
    Ok(Some(out))
}

/// What `synth --truth` writes.
#[derive(Serialize)]
struct Truth<'a> {
    seed: u64,
    generator: &'a GeneratorSpec,
    clean_targets: &'a [f64],
}

fn synth(ctx: &mut Run, a: &SynthArgs) -> Result<Option<PathBuf>> {
    let mut spec = match &a.spec {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<GeneratorSpec>(&text).map_err(|e| anyhow!("dataset: invalid generator file {}: {e}", path.display()))?
        }
        None if a.study_schema => GeneratorSpec::takeover_study(519, 0.3, 0.1),
        None => GeneratorSpec::takeover(519, 0.3, 0.1),
    };
    if let Some(rows) = a.rows {
        spec.rows = rows;
    }
    if let Some(sd) = a.noise {
        spec.noise_sd = sd;
    }
    if let Some(rate) = a.missing {
        spec.missing_rate = rate;
    }
    let schema = if a.study_schema { study_schema() } else { merged_schema() };
    let s = synthesize(&schema, &spec, a.seed).map_err(core)?;
    let out = ctx.write(&a.out, &write_table(&s.dataset, TARGET_COLUMN))?;
    if let Some(truth) = &a.truth {
        ctx.write(truth, &report::json(&Truth { seed: a.seed, generator: &s.truth, clean_targets: &s.clean_targets })?)?;
    }
    Ok(Some(out))
}

fn train_cmd(ctx: &mut Run, a: &TrainArgs) -> Result<Option<PathBuf>> {
    json_only(&a.out, "a model")?;
    let d = ctx.load_data(&a.data.data, a.data.schema.as_deref(), &a.data.target)?;
    let p = a.hyper.resolve()?;
    let d = d.select_features(&a.features.indices(&d)?).map_err(core)?;
    let m = train(&d, &p).map_err(core)?;
    Ok(Some(ctx.write(&a.out, &save_model(&m)?)?))
}

fn cv(ctx: &mut Run, a: &CvCommand) -> Result<Option<PathBuf>> {
    json_only(&a.out, "a cross-validation report")?;
    let d = ctx.load_data(&a.data.data, a.data.schema.as_deref(), &a.data.target)?;
    let r = pipeline::cross_validate(&d, &a.hyper.resolve()?, a.cv.k, &a.cv.seeds()?, &a.features.indices(&d)?).map_err(core)?;
    Ok(Some(ctx.write(&a.out, &report::json(&r)?)?))
}

fn grid(ctx: &mut Run, a: &GridArgs) -> Result<Option<PathBuf>> {
    json_only(&a.out, "a grid search")?;
    let d = ctx.load_data(&a.data.data, a.data.schema.as_deref(), &a.data.target)?;
    let mut grid = match &a.grid {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<HyperGrid>(&text).map_err(|e| anyhow!("pipeline: invalid grid file {}: {e}", path.display()))?
        }
        None => HyperGrid::default(),
    };
    grid.base = a.hyper.resolve()?;
    let g = pipeline::grid_search(&d, &grid, a.cv.k, &a.cv.seeds()?, &a.features.indices(&d)?).map_err(core)?;
    Ok(Some(ctx.write(&a.out, &report::json(&g)?)?))
}

fn select(ctx: &mut Run, a: &SelectArgs) -> Result<Option<PathBuf>> {
    let d = ctx.load_data(&a.data.data, a.data.schema.as_deref(), &a.data.target)?;
    let r = pipeline::forward_select(&d, &a.hyper.resolve()?, a.cv.k, &a.cv.seeds()?).map_err(core)?;
    let text = if is_csv(&a.out) { report::selection_csv(&r)? } else { report::json(&r)? };
    Ok(Some(ctx.write(&a.out, &text)?))
}

fn bins(ctx: &mut Run, a: &BinsArgs) -> Result<Option<PathBuf>> {
    let d = ctx.load_data(&a.data.data, a.data.schema.as_deref(), &a.data.target)?;
    let bounds = parse_bounds(&a.bounds).map_err(|e| anyhow!("pipeline: --bounds: {e}"))?;
    let r = pipeline::bin_analysis(&d, &a.hyper.resolve()?, a.cv.k, &a.cv.seeds()?, &a.features.indices(&d)?, &bounds).map_err(core)?;
    for row in r.rows.iter().filter_map(|b| b.warning.as_ref().map(|w| (b.upper_bound, w))) {
        eprintln!("warning: bin <= {} s {}", row.0, row.1);
    }
    let text = if is_csv(&a.out) { report::bins_csv(&r)? } else { report::json(&r)? };
    Ok(Some(ctx.write(&a.out, &text)?))
}

#[derive(Serialize)]
struct BaselineOutput {
    linear: LinearOutput,
    #[serde(skip_serializing_if = "Option::is_none")]
    boosted: Option<pipeline::CVReport>,
}

#[derive(Serialize)]
struct LinearOutput {
    model: pipeline::LinearModel,
    report: pipeline::CVReport,
}

fn baseline(ctx: &mut Run, a: &BaselineArgs) -> Result<Option<PathBuf>> {
    json_only(&a.out, "a baseline comparison")?;
    let d = ctx.load_data(&a.data.data, a.data.schema.as_deref(), &a.data.target)?;
    let (features, seeds) = (a.features.indices(&d)?, a.cv.seeds()?);
    let (model, report) = pipeline::fit_linear_baseline(&d, &features, a.cv.k, &seeds).map_err(core)?;
    let boosted = if a.compare { Some(pipeline::cross_validate(&d, &a.hyper.resolve()?, a.cv.k, &seeds, &features).map_err(core)?) } else { None };
    let out = BaselineOutput { linear: LinearOutput { model, report }, boosted };
    Ok(Some(ctx.write(&a.out, &report::json(&out)?)?))
}

/// Parses `NAME=value,...` against the model's variables. Unlisted or empty
/// values are missing.
fn read_schema(path: &Path) -> Result<Vec<VariableSpec>> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&s).map_err(|e| anyhow!("dataset: invalid schema file {}: {e}", path.display()))
}

/// The model's variable definitions: `--schema` or a built-in schema
/// projected onto the model's names, if the fingerprint matches. Otherwise
/// unconstrained continuous variables, so only names are checked.
fn model_schema(m: &Ensemble, schema: Option<&Path>) -> Result<Vec<VariableSpec>> {
    let mut candidates = vec![merged_schema(), study_schema()];
    if let Some(p) = schema {
        candidates.insert(0, read_schema(p)?);
    }
    for c in &candidates {
        let projected: Option<Vec<VariableSpec>> = m.feature_names().iter().map(|n| schema::index_of(c, n).map(|j| c[j].clone())).collect();
        if let Some(p) = projected.filter(|p| schema::fingerprint(p) == m.schema_fingerprint()) {
            return Ok(p);
        }
    }
    Ok(m.feature_names().iter().map(|n| VariableSpec::continuous(n, "")).collect())
}

pub fn parse_instance(text: &str, schema: &[VariableSpec]) -> Result<Vec<Option<f64>>, DatasetError> {
    let mut x = vec![None; schema.len()];
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = part.split_once('=').ok_or_else(|| DatasetError::Malformed { row: 1, message: format!("`{part}` is not NAME=value") })?;
        let (name, value) = (name.trim(), value.trim());
        let j = schema::index_of(schema, name).ok_or_else(|| DatasetError::UnknownVariable(name.to_string()))?;
        x[j] = if value.is_empty() {
            None
        } else {
            let v = value.parse::<f64>().map_err(|_| DatasetError::NotNumeric { row: 1, column: name.to_string(), cell: value.to_string() })?;
            if !v.is_finite() {
                return Err(DatasetError::NonFiniteValue { row: 1, column: name.to_string(), value: v });
            }
            if !schema[j].admits(v) {
                return Err(DatasetError::CodeOutOfRange { row: 1, column: name.to_string(), value: v, levels: schema[j].levels.clone() });
            }
            Some(v)
        };
    }
    Ok(x)
}

/// Restricts `d` to the model's variables, by name, and checks the schema.
fn project(m: &Ensemble, d: &Dataset) -> Result<Dataset> {
    let idx = d.indices_of(m.feature_names()).map_err(core)?;
    let p = d.select_features(&idx).map_err(core)?;
    if !m.matches(&p) {
        return Err(core(takeover_core::ExplainError::SchemaMismatch));
    }
    Ok(p)
}

#[derive(Serialize)]
struct PredictionOutput {
    prediction: f64,
    instance: Vec<Option<f64>>,
    feature_names: Vec<String>,
}

fn predict(ctx: &mut Run, a: &PredictArgs) -> Result<Option<PathBuf>> {
    let m = ctx.load_model(&a.model)?;
    if let Some(text) = &a.instance {
        let x = parse_instance(text, &model_schema(&m, a.schema.as_deref())?).map_err(core)?;
        let prediction = m.predict(&x).map_err(core)?;
        return match &a.out {
            None => {
                println!("{}", crate::table::number(prediction));
                Ok(None)
            }
            Some(out) => {
                json_only(out, "a single prediction")?;
                let doc = PredictionOutput { prediction, instance: x, feature_names: m.feature_names().to_vec() };
                Ok(Some(ctx.write(out, &report::json(&doc)?)?))
            }
        };
    }
    let data = a.data.as_ref().expect("clap requires --instance or --data");
    let d = project(&m, &ctx.load_data(data, a.schema.as_deref(), &a.target)?)?;
    let predictions = m.predict_rows(&d).map_err(core)?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("predictions.csv"));
    let text = if is_csv(&out) { report::predictions_csv(&predictions)? } else { report::json(&predictions)? };
    Ok(Some(ctx.write(&out, &text)?))
}

/// Per-instance interaction output.
#[derive(Serialize)]
struct InteractionOutput {
    feature_names: Vec<String>,
    phi: Vec<f64>,
    values: Vec<Vec<f64>>,
}

fn explain_cmd(ctx: &mut Run, a: &ExplainArgs) -> Result<Option<PathBuf>> {
    let m = ctx.load_model(&a.model)?;
    let data = match &a.data {
        Some(path) => Some(project(&m, &ctx.load_data(path, a.schema.as_deref(), &a.target)?)?),
        None => None,
    };
    let need_data = || data.as_ref().ok_or_else(|| anyhow!("explain: this mode needs --data"));

    if a.global {
        let g = explain::global_importance(&m, need_data()?).map_err(core)?;
        let text = if is_csv(&a.out) { report::importance_csv(&g)? } else { report::json(&g)? };
        return Ok(Some(ctx.write(&a.out, &text)?));
    }
    if let Some(name) = &a.dependence {
        let d = need_data()?;
        let j = schema::index_of(d.schema(), name).ok_or_else(|| core(DatasetError::UnknownVariable(name.clone())))?;
        let dep: DependenceData = explain::dependence_data(&m, d, j).map_err(core)?;
        let text = if is_csv(&a.out) { report::dependence_csv(&dep)? } else { report::json(&dep)? };
        return Ok(Some(ctx.write(&a.out, &text)?));
    }

    json_only(&a.out, "per-instance explanation")?;
    let instances: Vec<Vec<Option<f64>>> = match (&a.instance, a.row) {
        (Some(text), _) => vec![parse_instance(text, &model_schema(&m, a.schema.as_deref())?).map_err(core)?],
        (None, Some(row)) => {
            let d = need_data()?;
            let r = row.checked_sub(1).and_then(|i| d.rows().get(i)).ok_or_else(|| anyhow!("explain: row {row} is outside 1..={}", d.n_rows()))?;
            vec![r.values.clone()]
        }
        (None, None) => need_data()?.rows().iter().map(|r| r.values.clone()).collect(),
    };
    let text = if a.shap {
        let v = instances.iter().map(|x| explain::tree_shap(&m, x)).collect::<Result<Vec<_>, _>>().map_err(core)?;
        report::json(&v)?
    } else if a.interactions {
        let v = instances
            .iter()
            .map(|x| {
                let phi = explain::tree_shap(&m, x)?.phi;
                let values = explain::interactions(&m, x)?.values;
                Ok(InteractionOutput { feature_names: m.feature_names().to_vec(), phi, values })
            })
            .collect::<Result<Vec<_>, takeover_core::ExplainError>>()
            .map_err(core)?;
        report::json(&v)?
    } else {
        let v = instances.iter().map(|x| explain::force_data(&m, x)).collect::<Result<Vec<_>, _>>().map_err(core)?;
        report::json(&v)?
    };
    Ok(Some(ctx.write(&a.out, &text)?))
}
