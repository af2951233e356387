//! Truncated Volterra processes: direct simulation, exact means, the
//! off-diagonal decomposition and square-summability diagnostics.

mod chaos;
mod decompose;
mod l2check;
mod mean;
mod path;
mod process;
mod separable;
mod truncated;

pub use chaos::discrete_chaos;
pub use decompose::decompose_path;
pub use l2check::{
    check_l2_conditions, check_l2_conditions_fn, check_l2_power_bound, log_counterexample, ConditionKind,
    ConditionTrace, L2Report, ADVISORY,
};
pub use mean::exact_mean;
pub use path::dot_shifted;
pub use path::{eval_from_record, simulate_path, simulate_path_with_stream, VolterraPath};
pub use process::{map_paths, Process};
pub use separable::{ExpSum, SeparableProcess};
pub use truncated::{TruncatedKernel, MAX_TABLE_ENTRIES};
