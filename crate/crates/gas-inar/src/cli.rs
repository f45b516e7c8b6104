//! Command definitions and handlers. Every handler builds its complete
//! output set in memory; files are written only after all of it succeeds.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gas_inar_core::diagnostics::{self, RollingConfig, DEFAULT_GRID};
use gas_inar_core::estimation::{self, fit, FitOptions, FitResult, LrTest};
use gas_inar_core::forecasting::{forecast_horizons, ForecastOrigin};
use gas_inar_core::models::Dynamics;
use gas_inar_core::simulation::{self, DgpKind, SimulatedSeries};
use gas_inar_core::{CountSeries, ErrorFamily, ErrorSpec, GasParams, ModelKind, ModelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::document::ModelDocument;
use crate::io::{self, IoError, OutputSet};
use crate::replicate::{self, Table1Config, Table2Config, FULL_SCALE};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] gas_inar_core::Error),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Stable identifier for the error document.
    pub fn kind(&self) -> &'static str {
        use gas_inar_core::Error as E;
        match self {
            CliError::Model(E::Domain(_)) => "domain",
            CliError::Model(E::Input(_)) => "input",
            CliError::Model(E::NoSurvivalInformation(_)) => "no_survival_information",
            CliError::Model(E::Arity { .. }) => "arity",
            CliError::Model(E::NotNested(_)) => "not_nested",
            CliError::Model(E::CovarianceUnavailable(_)) => "covariance_unavailable",
            CliError::Io(IoError::Parse { .. } | IoError::Empty) => "input",
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn document(&self) -> Value {
        json!({
            "version": VERSION,
            "error": { "kind": self.kind(), "message": self.to_string() },
        })
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "gas-inar", version, about = "INAR count models with score-driven survival probability")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a series from a model or a time-varying DGP.
    Simulate(SimulateArgs),
    /// Fit a model by maximum likelihood.
    Fit(FitArgs),
    /// Forecast pmfs for horizons 1..=h.
    Forecast(ForecastArgs),
    /// In-sample comparison of models and expanding-window forecast evaluation.
    Evaluate(EvaluateArgs),
    /// Run a Monte Carlo study.
    Replicate(ReplicateArgs),
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Output directory.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DgpArg {
    FastSine,
    SlowSine,
    FastSteps,
    SlowSteps,
}

impl From<DgpArg> for DgpKind {
    fn from(d: DgpArg) -> Self {
        match d {
            DgpArg::FastSine => DgpKind::FastSine,
            DgpArg::SlowSine => DgpKind::SlowSine,
            DgpArg::FastSteps => DgpKind::FastSteps,
            DgpArg::SlowSteps => DgpKind::SlowSteps,
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "gas-poisson", conflicts_with = "dgp")]
    pub model: ModelKind,
    /// Model document (JSON) with the parameters; defaults depend on --model.
    #[arg(long, conflicts_with = "dgp")]
    pub params: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub dgp: Option<DgpArg>,
    #[arg(long, default_value_t = 500)]
    pub length: usize,
}

#[derive(Debug, Args, Clone)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "gas-poisson")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    /// Parameter draws for the survival-probability bands.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
}

#[derive(Debug, Args, Clone)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "gas-poisson")]
    pub model: ModelKind,
    /// Use these parameters instead of fitting.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub horizon: usize,
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
}

#[derive(Debug, Args, Clone)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    /// Models to compare (repeatable); all six by default.
    #[arg(long)]
    pub model: Vec<ModelKind>,
    /// First training-sample size; 60% of the series by default.
    #[arg(long)]
    pub split: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub horizon: usize,
    #[arg(long, default_value_t = 2000)]
    pub draws: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    Table1,
    Table2,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// 200 replications for table1, 100 for table2.
    Desk,
    /// 1000 replications; slow.
    Full,
}

#[derive(Debug, Args, Clone)]
pub struct ReplicateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(value_enum)]
    pub study: Study,
    #[arg(long, value_enum, default_value = "desk")]
    pub scale: Scale,
    /// Overrides the replication count implied by --scale.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Series length; 1000 for table1, 500 for table2 by default.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
}

fn fit_options(restarts: usize, seed: u64) -> FitOptions {
    FitOptions { restarts, seed, ..FitOptions::default() }
}

fn envelope(command: &str, seed: u64, config: Value) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("version".into(), json!(VERSION));
    m.insert("command".into(), json!(command));
    m.insert("seed".into(), json!(seed));
    m.insert("config".into(), config);
    m
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Io(IoError::Json(e)))
}

fn read_model_document(path: &Path) -> CliResult<ModelSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.to_path_buf(), source })?;
    let doc: ModelDocument = serde_json::from_str(&text).map_err(IoError::Json)?;
    Ok(doc.to_spec()?)
}

/// Parameters used by `simulate` when no model document is given.
pub fn default_model(kind: ModelKind) -> ModelSpec {
    let error = match kind.family {
        ErrorFamily::Poisson => ErrorSpec::poisson(6.0),
        ErrorFamily::NegativeBinomial => ErrorSpec::negative_binomial(6.0, 12.0),
    };
    match kind.dynamics {
        Dynamics::Gas => ModelSpec::gas(GasParams::with_mean_logit(-0.5, 0.9, 0.15, error)),
        Dynamics::Static => ModelSpec::Static { alpha: 0.4, error },
        Dynamics::Rc => ModelSpec::Rc { omega: -1.0, tau: 0.1, error },
    }
}

pub fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let (outputs, dir) = match &cli.command {
        Command::Simulate(a) => (cmd_simulate(a)?, &a.common.output),
        Command::Fit(a) => (cmd_fit(a)?, &a.common.output),
        Command::Forecast(a) => (cmd_forecast(a)?, &a.common.output),
        Command::Evaluate(a) => (cmd_evaluate(a)?, &a.common.output),
        Command::Replicate(a) => (cmd_replicate(a)?, &a.common.output),
    };
    Ok(outputs.write_to(dir)?)
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<OutputSet> {
    if args.length < 2 {
        return Err(CliError::Usage("--length must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.common.seed);
    let (sim, source): (SimulatedSeries, Value) = match args.dgp {
        Some(d) => (simulation::simulate_dgp(d.into(), args.length, &mut rng)?, json!({ "dgp": d })),
        None => {
            let model = match &args.params {
                Some(p) => read_model_document(p)?,
                None => default_model(args.model),
            };
            let doc = ModelDocument::from(&model);
            (simulation::simulate_model(&model, args.length, &mut rng)?, json!({ "model": doc }))
        }
    };
    let mut doc =
        envelope("simulate", args.common.seed, json!({ "length": args.length, "burn_in": simulation::BURN_IN }));
    doc.insert("source".into(), source);
    doc.insert(
        "summary".into(),
        json!({
            "n": sim.series.len(),
            "mean": sim.series.mean(),
            "variance": sim.series.variance(),
            "max": sim.series.max(),
        }),
    );
    let mut out = OutputSet::default();
    out.add("simulate.json", io::json_bytes(&doc)?);
    out.add("series.csv", io::simulated_csv(&sim)?);
    Ok(out)
}

/// Static counterpart (same error family) of a dynamic model kind.
fn static_of(kind: ModelKind) -> ModelKind {
    ModelKind::new(Dynamics::Static, kind.family)
}

fn lr_value(lr: &LrTest, restricted: &FitResult) -> Value {
    json!({
        "restricted": restricted.kind(),
        "restricted_loglik": restricted.loglik_sum,
        "statistic": lr.statistic,
        "df": lr.df,
        "pvalue": lr.pvalue,
    })
}

fn fit_value(f: &FitResult) -> Value {
    let names = f.kind().param_names();
    json!({
        "estimate": ModelDocument::from(&f.model),
        "std_errors": f.std_errors.as_ref().map(|se| ModelDocument::named(f.kind(), se)),
        "loglik": f.loglik_sum,
        "loglik_avg": f.loglik_avg,
        "aic": f.aic,
        "n_params": names.len(),
        "n_obs": f.n_obs,
        "converged": f.converged,
        "optimizer": f.trace,
    })
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<OutputSet> {
    let series = io::read_counts_csv(&args.input)?;
    let seed = args.common.seed;
    let options = fit_options(args.restarts, seed);
    let f = fit(args.model, &series, &options)?;

    let mut doc = envelope(
        "fit",
        seed,
        json!({
            "input": args.input,
            "model": args.model,
            "restarts": args.restarts,
            "draws": args.draws,
        }),
    );
    doc.insert("fit".into(), fit_value(&f));

    let lr = if args.model.dynamics == Dynamics::Static {
        Value::Null
    } else {
        let restricted = fit(static_of(args.model), &series, &options)?;
        lr_value(&estimation::lr_test(&restricted, &f)?, &restricted)
    };
    doc.insert("lr_vs_static".into(), lr);

    let contraction = match f.model {
        ModelSpec::Gas { params } => to_value(&diagnostics::contraction_check(&series, &params, DEFAULT_GRID)?)?,
        _ => Value::Null,
    };
    doc.insert("contraction".into(), contraction);

    let mut out = OutputSet::default();
    out.add("filter_path.csv", io::filter_path_csv(&series, &f.model.path(&series)?)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bands = match diagnostics::alpha_confidence_bands(&series, &f, &[0.8, 0.95], args.draws, &mut rng) {
        Ok(b) => {
            out.add("bands.csv", io::bands_csv(&b)?);
            json!({ "file": "bands.csv", "levels": [0.8, 0.95], "n_draws": b.n_draws, "approximate": true })
        }
        Err(e @ gas_inar_core::Error::CovarianceUnavailable(_)) => json!({ "unavailable": e.to_string() }),
        Err(e) => return Err(e.into()),
    };
    doc.insert("bands".into(), bands);
    out.add("fit.json", io::json_bytes(&doc)?);
    Ok(out)
}

pub fn cmd_forecast(args: &ForecastArgs) -> CliResult<OutputSet> {
    if args.horizon == 0 {
        return Err(CliError::Usage("--horizon must be at least 1".into()));
    }
    let series = io::read_counts_csv(&args.input)?;
    let seed = args.common.seed;
    let (model, fitted) = match &args.params {
        Some(p) => (read_model_document(p)?, Value::Null),
        None => {
            let f = fit(args.model, &series, &fit_options(args.restarts, seed))?;
            (f.model, fit_value(&f))
        }
    };
    let origin = ForecastOrigin::from_series(&model, &series)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forecasts: Vec<_> = forecast_horizons(&model, &origin, args.horizon, args.draws, &mut rng)?
        .into_iter()
        .map(|f| f.with_seed(seed))
        .collect();

    let mut doc = envelope(
        "forecast",
        seed,
        json!({
            "input": args.input,
            "model": model.kind(),
            "params_file": args.params,
            "horizon": args.horizon,
            "draws": args.draws,
            "restarts": args.restarts,
        }),
    );
    doc.insert("model".into(), to_value(&ModelDocument::from(&model))?);
    doc.insert("fit".into(), fitted);
    doc.insert(
        "origin".into(),
        json!({ "t": series.len() - 1, "y_last": origin.y_last, "alpha_next": origin.alpha_next() }),
    );
    doc.insert(
        "forecasts".into(),
        Value::Array(
            forecasts
                .iter()
                .map(|f| {
                    json!({
                        "horizon": f.horizon,
                        "mean": f.point_mean,
                        "median": f.point_median,
                        "n_draws": f.n_draws,
                    })
                })
                .collect(),
        ),
    );
    doc.insert("pmf_file".into(), json!("forecast_pmf.csv"));
    let mut out = OutputSet::default();
    out.add("forecast_pmf.csv", io::forecast_pmf_csv(&forecasts)?);
    out.add("forecast.json", io::json_bytes(&doc)?);
    Ok(out)
}

/// In-sample fits of `kinds`, ranked by AIC, with LR tests of every dynamic
/// model against its static counterpart when both were fitted.
pub fn in_sample_comparison(series: &CountSeries, kinds: &[ModelKind], options: &FitOptions) -> CliResult<Value> {
    let fits = kinds.iter().map(|&k| fit(k, series, options)).collect::<Result<Vec<_>, _>>()?;
    let mut order: Vec<usize> = (0..fits.len()).collect();
    order.sort_by(|&a, &b| fits[a].aic.total_cmp(&fits[b].aic));
    let mut rows = Vec::new();
    for (rank, &i) in order.iter().enumerate() {
        let f = &fits[i];
        let mut row = fit_value(f);
        row["model"] = json!(f.kind());
        row["aic_rank"] = json!(rank + 1);
        let lr = fits
            .iter()
            .find(|r| f.kind().dynamics != Dynamics::Static && r.kind() == static_of(f.kind()))
            .map(|r| estimation::lr_test(r, f).map(|lr| lr_value(&lr, r)))
            .transpose()?;
        row["lr_vs_static"] = lr.unwrap_or(Value::Null);
        rows.push(row);
    }
    Ok(Value::Array(rows))
}

#[derive(Serialize)]
struct EvalRow {
    model: ModelKind,
    horizon: usize,
    mse: f64,
    log_score: f64,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<OutputSet> {
    let series = io::read_counts_csv(&args.input)?;
    let seed = args.common.seed;
    let kinds = if args.model.is_empty() { ModelKind::ALL.to_vec() } else { args.model.clone() };
    let split = args.split.unwrap_or(series.len() * 3 / 5);
    let options = fit_options(args.restarts, seed);
    let in_sample = in_sample_comparison(&series, &kinds, &options)?;

    let config = RollingConfig { split, h_max: args.horizon, draws: args.draws, fit: options };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reports = diagnostics::rolling_evaluate(&series, &kinds, &config, &mut rng)?;

    let mut doc = envelope(
        "evaluate",
        seed,
        json!({
            "input": args.input,
            "models": kinds,
            "split": split,
            "horizon": args.horizon,
            "draws": args.draws,
            "restarts": args.restarts,
        }),
    );
    doc.insert("in_sample".into(), in_sample);
    doc.insert("rolling".into(), to_value(&reports)?);

    let rows: Vec<EvalRow> = reports
        .iter()
        .flat_map(|r| {
            r.horizons.iter().enumerate().map(move |(i, &h)| EvalRow {
                model: r.kind,
                horizon: h,
                mse: r.mse[i],
                log_score: r.log_score[i],
            })
        })
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).map_err(IoError::Csv)?;
    }
    let table = w.into_inner().map_err(|e| IoError::Csv(e.into_error().into()))?;

    let mut out = OutputSet::default();
    out.add("evaluate.csv", table);
    out.add("evaluate.json", io::json_bytes(&doc)?);
    Ok(out)
}

pub fn cmd_replicate(args: &ReplicateArgs) -> CliResult<OutputSet> {
    let seed = args.common.seed;
    let default_reps = match (args.scale, args.study) {
        (Scale::Full, _) => FULL_SCALE,
        (Scale::Desk, Study::Table1) => 200,
        (Scale::Desk, Study::Table2) => 100,
    };
    let replications = args.replications.unwrap_or(default_reps);
    if replications >= FULL_SCALE {
        eprintln!("warning: {replications} replications can take hours on a single core");
    }
    let fit = fit_options(args.restarts, seed);
    let mut out = OutputSet::default();
    match args.study {
        Study::Table1 => {
            let config = Table1Config {
                replications,
                length: args.length.unwrap_or(1000),
                seed,
                fit,
                ..Table1Config::default()
            };
            let report = replicate::table1(&config)?;
            let mut doc = envelope("replicate", seed, to_value(&config)?);
            doc.insert("study".into(), json!("table1"));
            doc.insert("report".into(), to_value(&report)?);
            let mut w = csv::Writer::from_writer(Vec::new());
            for p in &report.params {
                w.serialize(p).map_err(IoError::Csv)?;
            }
            out.add("table1.csv", w.into_inner().map_err(|e| IoError::Csv(e.into_error().into()))?);
            out.add("table1.json", io::json_bytes(&doc)?);
        }
        Study::Table2 => {
            let config =
                Table2Config { replications, length: args.length.unwrap_or(500), seed, fit, ..Table2Config::default() };
            let report = replicate::table2(&config)?;
            let mut doc = envelope("replicate", seed, to_value(&config)?);
            doc.insert("study".into(), json!("table2"));
            doc.insert("report".into(), to_value(&report)?);
            let mut w = csv::Writer::from_writer(Vec::new());
            for c in &report.cells {
                w.serialize(c).map_err(IoError::Csv)?;
            }
            out.add("table2.csv", w.into_inner().map_err(|e| IoError::Csv(e.into_error().into()))?);
            out.add("table2.json", io::json_bytes(&doc)?);
        }
    }
    Ok(out)
}
