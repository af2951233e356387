pub mod noise;
pub mod rng;
pub mod stats;

pub use noise::{sample_noise, NoiseLaw, NoiseSpec};
pub use rng::{derive_stream, RngStream};
pub use stats::{
    anderson_darling_normal, bootstrap_ci, fit_loglog_slope, ks_two_sample, mean, mean_se, pairwise_sum,
    second_moment_se, variance_se, CompensatedSum, SlopeFit, TestResult,
};
