//! Suite plans: a TOML description of a batch of experiments, plus the
//! runner that turns one into a `SuiteReport`.
//!
//! ```toml
//! schema = 1
//! seed = 42
//!
//! [[experiment]]
//! type = "rho_kk"
//! label = "moments.n4"
//! n = 4
//! trials = 100000
//! ks = [0, 1, 2]
//! allow_large_lambda = true
//! region = { shape = "half_ball", target_volume = 0.5 }
//! ```
//!
//! Every experiment derives its random streams from the suite seed and its
//! own label, so reports are byte-identical for any worker count and any
//! subset of experiments re-run in isolation.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::estimators::{
    estimate_rank_event, estimate_rho_k_km1, estimate_rho_kk, estimate_tv_lower_bound,
    poisson_reference, verify_subset_sums, ExperimentParams, McReport, SuiteReport, DEFAULT_GATE,
};
use crate::lattice::haar::ChainParams;
use crate::region::RegionSpec;
use crate::Result;

pub const PLAN_SCHEMA: u32 = 1;

/// Fields shared by every experiment type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonSpec {
    pub label: String,
    pub n: usize,
    pub trials: usize,
    pub region: RegionSpec,
    #[serde(default = "default_burnin")]
    pub burnin: u64,
    #[serde(default = "default_thin")]
    pub thin: u64,
    #[serde(default = "default_gate")]
    pub gate: f64,
    #[serde(default)]
    pub allow_large_lambda: bool,
}

fn default_burnin() -> u64 {
    ChainParams::default().burnin
}

fn default_thin() -> u64 {
    ChainParams::default().thin
}

fn default_gate() -> f64 {
    DEFAULT_GATE
}

fn default_theta() -> f64 {
    std::f64::consts::FRAC_PI_4
}

fn default_cells() -> usize {
    2
}

fn default_kmax() -> usize {
    12
}

impl CommonSpec {
    fn to_params(&self, seed: u64) -> Result<ExperimentParams> {
        Ok(ExperimentParams {
            label: self.label.clone(),
            n: self.n,
            region: self.region.build(self.n)?,
            trials: self.trials,
            seed,
            chain: ChainParams { burnin: self.burnin, thin: self.thin },
            gate: self.gate,
            allow_large_lambda: self.allow_large_lambda,
        })
    }
}

/// One experiment in a plan. The `type` tag picks the estimator; the
/// common block supplies the process parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ExperimentConfig {
    /// Independent-subset count moments against lambda^k / k!.
    #[serde(rename = "rho_kk")]
    RhoKk {
        #[serde(flatten)]
        common: CommonSpec,
        ks: Vec<usize>,
    },
    /// Rank-drop moments against the closed-form upper bound.
    #[serde(rename = "rho_k_km1")]
    RhoKKm1 {
        #[serde(flatten)]
        common: CommonSpec,
        ks: Vec<usize>,
    },
    /// Two-process subset-sum identity on the built-in functionals.
    #[serde(rename = "subset_sum")]
    SubsetSum {
        #[serde(flatten)]
        common: CommonSpec,
        k: usize,
        #[serde(default = "default_theta")]
        theta: f64,
    },
    /// Frequency of the small independent configuration event.
    #[serde(rename = "rank_event")]
    RankEvent {
        #[serde(flatten)]
        common: CommonSpec,
    },
    /// Plug-in total variation lower bound on cell count vectors.
    #[serde(rename = "tv_lower")]
    TvLower {
        #[serde(flatten)]
        common: CommonSpec,
        #[serde(default = "default_cells")]
        cells: usize,
    },
    /// Poisson-side self checks: empty probability and count histogram.
    #[serde(rename = "poisson_ref")]
    PoissonRef {
        #[serde(flatten)]
        common: CommonSpec,
        #[serde(default = "default_kmax")]
        kmax: usize,
    },
}

impl ExperimentConfig {
    pub fn common(&self) -> &CommonSpec {
        match self {
            ExperimentConfig::RhoKk { common, .. }
            | ExperimentConfig::RhoKKm1 { common, .. }
            | ExperimentConfig::SubsetSum { common, .. }
            | ExperimentConfig::RankEvent { common }
            | ExperimentConfig::TvLower { common, .. }
            | ExperimentConfig::PoissonRef { common, .. } => common,
        }
    }

    pub fn label(&self) -> &str {
        &self.common().label
    }

    pub fn run(&self, seed: u64) -> Result<Vec<McReport>> {
        let params = self.common().to_params(seed)?;
        match self {
            ExperimentConfig::RhoKk { ks, .. } => estimate_rho_kk(&params, ks),
            ExperimentConfig::RhoKKm1 { ks, .. } => estimate_rho_k_km1(&params, ks),
            ExperimentConfig::SubsetSum { k, theta, .. } => verify_subset_sums(&params, *k, *theta),
            ExperimentConfig::RankEvent { .. } => estimate_rank_event(&params),
            ExperimentConfig::TvLower { cells, .. } => estimate_tv_lower_bound(&params, *cells),
            ExperimentConfig::PoissonRef { kmax, .. } => poisson_reference(&params, *kmax),
        }
    }
}

/// A whole plan file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub schema: u32,
    pub seed: u64,
    /// Rayon worker count; absent means the library default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

impl SuiteConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SuiteConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("plan parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("plan serialize: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != PLAN_SCHEMA {
            return Err(Error::Config(format!(
                "plan schema {} unsupported (expected {PLAN_SCHEMA})",
                self.schema
            )));
        }
        if self.experiments.is_empty() {
            return Err(Error::EmptySuite);
        }
        let mut seen = std::collections::BTreeSet::new();
        for exp in &self.experiments {
            let label = exp.label();
            if label.is_empty()
                || !label.chars().all(|c| c.is_ascii_alphanumeric() || ".-_".contains(c))
            {
                return Err(Error::Config(format!(
                    "label {label:?} must be nonempty and use only [A-Za-z0-9._-]"
                )));
            }
            if !seen.insert(label) {
                return Err(Error::Config(format!("duplicate experiment label {label:?}")));
            }
        }
        Ok(())
    }
}

/// Run every experiment in order, appending to one report. `after_each`
/// sees the partial report (with `complete = false`) after every
/// experiment, so callers can flush progress to disk; the final report has
/// `complete = true`.
pub fn run_suite_with<F>(
    config: &SuiteConfig,
    workers: Option<usize>,
    mut after_each: F,
) -> Result<SuiteReport>
where
    F: FnMut(&SuiteReport) -> Result<()> + Send,
{
    config.validate()?;
    let mut body = |report: &mut SuiteReport| -> Result<()> {
        for exp in &config.experiments {
            report.reports.extend(exp.run(config.seed)?);
            after_each(report)?;
        }
        Ok(())
    };
    let mut report = SuiteReport::new(config.seed);
    match workers.or(config.workers) {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| body(&mut report))?;
        }
        None => body(&mut report)?,
    }
    report.complete = true;
    Ok(report)
}

pub fn run_suite(config: &SuiteConfig, workers: Option<usize>) -> Result<SuiteReport> {
    run_suite_with(config, workers, |_| Ok(()))
}
