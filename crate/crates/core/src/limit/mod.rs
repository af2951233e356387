//! Autocovariance and variance scaling, memory classification, the
//! discretized limit processes and the limit-theorem experiments.

mod acf;
mod classify;
mod clt;
mod hermite;
mod hyper;
mod nclt;
mod spec;
mod variance;

pub use acf::{empirical_acf, semi_analytic_acf, AcfAccumulator, AcfSeries};
pub use classify::{classify_memory, ClassificationResult, Memory, MemorySpec};
pub use hermite::{
    discretized_variance, simulate_hermite, simulate_limit, DiscretizedChaosGrid, GridConfig, LimitSample, MAX_TENSOR_ENTRIES,
};
pub use spec::{build_limit_spec, LimitSpec, LimitTerm, LimitTermRow};
pub use variance::{dyadic, partial_sum_variance, partial_sums, VarianceScaling};
pub use clt::{clt_compare, CltConfig, CltReport, SplitCheck};
pub use hyper::{chaos_samples, hypercontractivity_ratio, norm_ratio, off_diagonal_square_sum, HyperReport};
pub use nclt::{nclt_compare, nclt_samples, MarginalStats, NcltConfig, NcltReport, SelfSimilarity};
