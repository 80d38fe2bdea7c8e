//! Monte Carlo comparison layer: chunked deterministic trial engines, the
//! experiments themselves, and the report types they produce.

pub mod experiments;
pub mod mc;
pub mod report;
pub mod tv;

pub use experiments::{
    estimate_rank_event, estimate_rho_k_km1, estimate_rho_kk, poisson_reference, rank_drop_bound,
    verify_subset_sums, BuiltinFunctional, ExperimentParams, BUILTIN_FUNCTIONALS, ENUM_CAP, GUARD_C0,
    MAX_SUBSET_POINTS,
};
pub use mc::{run_lattice_trials, run_poisson_trials, TRIAL_CHUNK};
pub use report::{zscore, McReport, SuiteReport, Verdict, DEFAULT_GATE};
pub use tv::{estimate_tv_lower_bound, BOOTSTRAP_RESAMPLES, MIN_KEY_OCCURRENCES};
