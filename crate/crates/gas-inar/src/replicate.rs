//! Monte Carlo replication studies: ML recovery under a GAS-INAR DGP
//! (`table1`) and filter quality under misspecified DGPs (`table2`).
//!
//! Replication `r` draws from a ChaCha8 stream `r` of the study seed, so
//! results do not depend on thread scheduling.

use gas_inar_core::diagnostics::filter_quality;
use gas_inar_core::estimation::{fit, FitOptions};
use gas_inar_core::simulation::{simulate_dgp, simulate_model, DgpKind};
use gas_inar_core::{ErrorSpec, GasParams, ModelKind, ModelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Replication counts below this are rejected.
pub const MIN_REPLICATIONS: usize = 20;
pub const FULL_SCALE: usize = 1000;

pub fn replication_rng(seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r);
    rng
}

/// Sample mean and standard deviation (`n - 1` divisor).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn check_replications(n: usize) -> gas_inar_core::Result<()> {
    if n < MIN_REPLICATIONS {
        return Err(gas_inar_core::Error::Input(format!(
            "at least {MIN_REPLICATIONS} replications are needed, got {n}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Config {
    pub replications: usize,
    pub length: usize,
    /// Unconditional mean of `logit α_t` in the DGP; the intercept is
    /// `mean_logit·(1 - β)`.
    pub mean_logit: f64,
    pub beta: f64,
    pub tau: f64,
    pub mean: f64,
    pub seed: u64,
    pub fit: FitOptions,
}

impl Default for Table1Config {
    fn default() -> Self {
        Table1Config {
            replications: 200,
            length: 1000,
            mean_logit: -0.5,
            beta: 0.9,
            tau: 0.15,
            mean: 6.0,
            seed: 0,
            fit: FitOptions::default(),
        }
    }
}

impl Table1Config {
    pub fn truth(&self) -> GasParams {
        GasParams::with_mean_logit(self.mean_logit, self.beta, self.tau, ErrorSpec::poisson(self.mean))
    }
}

/// Sampling summary of one estimated parameter, with Monte Carlo standard
/// errors of the mean, SD and √MSE columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub sd: f64,
    pub rmse: f64,
    pub mean_mcse: f64,
    pub sd_mcse: f64,
    pub rmse_mcse: f64,
    /// Average of the reported asymptotic standard errors.
    pub mean_reported_se: Option<f64>,
}

impl ParamSummary {
    pub fn new(name: &str, truth: f64, estimates: &[f64], reported_se: &[f64]) -> Self {
        let n = estimates.len() as f64;
        let (mean, sd) = mean_sd(estimates);
        let sq: Vec<f64> = estimates.iter().map(|e| (e - truth).powi(2)).collect();
        let (mse, sq_sd) = mean_sd(&sq);
        let rmse = mse.sqrt();
        ParamSummary {
            name: name.to_string(),
            truth,
            mean,
            bias: mean - truth,
            sd,
            rmse,
            mean_mcse: sd / n.sqrt(),
            sd_mcse: sd / (2.0 * (n - 1.0)).sqrt(),
            rmse_mcse: if rmse > 0.0 { sq_sd / n.sqrt() / (2.0 * rmse) } else { 0.0 },
            mean_reported_se: (!reported_se.is_empty())
                .then(|| reported_se.iter().sum::<f64>() / reported_se.len() as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub config: Table1Config,
    pub params: Vec<ParamSummary>,
    /// Replications whose fit succeeded.
    pub n_used: usize,
    pub failures: usize,
    pub not_converged: usize,
}

impl Table1Report {
    pub fn param(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Estimates, reported standard errors and the convergence flag of one fit.
type Replicate = (Vec<f64>, Option<Vec<f64>>, bool);

/// Simulates `replications` GAS-INAR Poisson series and fits each one.
pub fn table1(config: &Table1Config) -> gas_inar_core::Result<Table1Report> {
    check_replications(config.replications)?;
    let truth = ModelSpec::gas(config.truth());
    truth.validate()?;
    let kind = truth.kind();
    let outcomes: Vec<Option<Replicate>> = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replication_rng(config.seed, r);
            let sim = simulate_model(&truth, config.length, &mut rng).ok()?;
            let f = fit(kind, &sim.series, &config.fit).ok()?;
            Some((f.model.natural_params(), f.std_errors, f.converged))
        })
        .collect();

    let used: Vec<_> = outcomes.iter().flatten().collect();
    if used.len() < 2 {
        return Err(gas_inar_core::Error::Input("fewer than 2 replications could be fitted".into()));
    }
    let truth_values = truth.natural_params();
    let params = kind
        .param_names()
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let est: Vec<f64> = used.iter().map(|u| u.0[i]).collect();
            let se: Vec<f64> = used.iter().filter_map(|u| u.1.as_ref().map(|s| s[i])).collect();
            ParamSummary::new(name, truth_values[i], &est, &se)
        })
        .collect();
    Ok(Table1Report {
        config: *config,
        params,
        n_used: used.len(),
        failures: outcomes.len() - used.len(),
        not_converged: used.iter().filter(|u| !u.2).count(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Config {
    pub replications: usize,
    pub length: usize,
    pub dgps: Vec<DgpKind>,
    pub seed: u64,
    pub fit: FitOptions,
}

impl Default for Table2Config {
    fn default() -> Self {
        Table2Config {
            replications: 100,
            length: 500,
            dgps: DgpKind::ALL.to_vec(),
            seed: 0,
            fit: FitOptions::default(),
        }
    }
}

/// Models compared in the filter-quality study, in table order.
pub fn table2_models() -> [ModelKind; 3] {
    ["inar-poisson", "gas-poisson", "rc-poisson"].map(|s| s.parse().expect("known model name"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Cell {
    pub dgp: DgpKind,
    pub model: ModelKind,
    /// Mean over replications of `√(time-average (α̂_t - α_t)²)`.
    pub rmse_alpha: f64,
    pub rmse_alpha_mcse: f64,
    /// Mean over replications of the time-average KL divergence.
    pub kl: f64,
    pub kl_mcse: f64,
    pub n_used: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Report {
    pub config: Table2Config,
    pub cells: Vec<Table2Cell>,
}

impl Table2Report {
    pub fn cell(&self, dgp: DgpKind, model: ModelKind) -> Option<&Table2Cell> {
        self.cells.iter().find(|c| c.dgp == dgp && c.model == model)
    }
}

/// Simulates each DGP, fits the static, GAS and rc Poisson INAR models and
/// scores their filtered survival paths and conditional pmfs.
pub fn table2(config: &Table2Config) -> gas_inar_core::Result<Table2Report> {
    check_replications(config.replications)?;
    let models = table2_models();
    let jobs: Vec<(usize, u64)> =
        (0..config.dgps.len()).flat_map(|d| (0..config.replications as u64).map(move |r| (d, r))).collect();
    // One stream per (dgp, replication).
    let results: Vec<Vec<Option<(f64, f64)>>> = jobs
        .par_iter()
        .map(|&(d, r)| {
            let dgp = config.dgps[d];
            let mut rng = replication_rng(config.seed, (d as u64) << 32 | r);
            let Ok(sim) = simulate_dgp(dgp, config.length, &mut rng) else {
                return vec![None; models.len()];
            };
            models
                .iter()
                .map(|&kind| {
                    let f = fit(kind, &sim.series, &config.fit).ok()?;
                    let q = filter_quality(dgp, &f.model, &sim).ok()?;
                    Some((q.mse_alpha.sqrt(), q.mean_kl))
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::new();
    for (d, &dgp) in config.dgps.iter().enumerate() {
        for (m, &model) in models.iter().enumerate() {
            let vals: Vec<(f64, f64)> =
                jobs.iter().zip(&results).filter(|((jd, _), _)| *jd == d).filter_map(|(_, res)| res[m]).collect();
            let n = vals.len();
            let rm: Vec<f64> = vals.iter().map(|v| v.0).collect();
            let kl: Vec<f64> = vals.iter().map(|v| v.1).collect();
            let (rmse_alpha, rm_sd) = mean_sd(&rm);
            let (kl_mean, kl_sd) = mean_sd(&kl);
            cells.push(Table2Cell {
                dgp,
                model,
                rmse_alpha,
                rmse_alpha_mcse: rm_sd / (n as f64).sqrt(),
                kl: kl_mean,
                kl_mcse: kl_sd / (n as f64).sqrt(),
                n_used: n,
                failures: config.replications - n,
            });
        }
    }
    Ok(Table2Report { config: config.clone(), cells })
}
