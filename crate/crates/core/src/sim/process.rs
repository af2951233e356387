use rayon::prelude::*;

use super::{eval_from_record, exact_mean, SeparableProcess, TruncatedKernel};
use crate::error::Result;
use crate::mc::{derive_stream, sample_noise, NoiseLaw, NoiseSpec, RngStream};

/// A stationary Volterra process that can be sampled path by path.
pub trait Process: Sync {
    fn order(&self) -> usize;
    /// None for the untruncated process.
    fn horizon(&self) -> Option<usize>;
    fn sample(&self, law: NoiseLaw, n: usize, stream: &mut RngStream) -> Vec<f64>;
    fn mean(&self, noise: &NoiseSpec) -> Result<f64>;
}

impl Process for TruncatedKernel {
    fn order(&self) -> usize {
        self.k()
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.m())
    }

    fn sample(&self, law: NoiseLaw, n: usize, stream: &mut RngStream) -> Vec<f64> {
        let eps = sample_noise(law, stream, n + self.m());
        eval_from_record(self, &eps, n).expect("record sized above")
    }

    fn mean(&self, noise: &NoiseSpec) -> Result<f64> {
        exact_mean(self, noise)
    }
}

impl Process for SeparableProcess {
    fn order(&self) -> usize {
        self.coefficient_order()
    }

    fn horizon(&self) -> Option<usize> {
        self.truncation()
    }

    fn sample(&self, law: NoiseLaw, n: usize, stream: &mut RngStream) -> Vec<f64> {
        SeparableProcess::sample(self, law, n, stream)
    }

    fn mean(&self, noise: &NoiseSpec) -> Result<f64> {
        SeparableProcess::mean(self, noise)
    }
}

/// Applies `f` to paths 0..paths of the run rooted at `seed`; path i always
/// uses substream (seed, i), whatever the thread count.
pub fn map_paths<P, T, F>(process: &P, law: NoiseLaw, n: usize, paths: usize, seed: u64, f: F) -> Vec<T>
where
    P: Process + ?Sized,
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut s = derive_stream(seed, &[i as u64]);
            f(&process.sample(law, n, &mut s))
        })
        .collect()
}
