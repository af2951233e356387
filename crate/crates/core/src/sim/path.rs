use serde::Serialize;

use super::TruncatedKernel;
use crate::error::{arg, Result};
use crate::mc::{derive_stream, sample_noise, NoiseLaw, RngStream};

/// A simulated path with the innovations that produced it.
///
/// `eps[q]` is ε_{q+1−M}, so the record covers ε_{1−M}..ε_N.
#[derive(Clone, Debug, Serialize)]
pub struct VolterraPath {
    pub x: Vec<f64>,
    pub eps: Vec<f64>,
    pub seed: u64,
    pub stream_path: Vec<u64>,
    pub horizon: usize,
}

impl VolterraPath {
    /// ε_t for 1−M ≤ t ≤ N.
    pub fn eps_at(&self, t: i64) -> f64 {
        self.eps[(t + self.horizon as i64 - 1) as usize]
    }

    pub fn to_csv(&self, with_eps: bool) -> String {
        let mut s = String::from(if with_eps { "n,X,eps\n" } else { "n,X\n" });
        for (i, x) in self.x.iter().enumerate() {
            let n = i + 1;
            if with_eps {
                s.push_str(&format!("{n},{x},{}\n", self.eps_at(n as i64)));
            } else {
                s.push_str(&format!("{n},{x}\n"));
            }
        }
        s
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..n {
        s += a[i] * b[i];
    }
    s
}

/// Σ_i a(i) ∏_j w_{i_j} over the whole table.
pub(crate) fn contract(values: &[f64], w: &[f64], k: usize) -> f64 {
    if k == 1 {
        return dot(values, w);
    }
    let stride = values.len() / w.len();
    let mut s = 0.0;
    for (i, wi) in w.iter().enumerate() {
        if *wi != 0.0 {
            s += wi * contract(&values[i * stride..(i + 1) * stride], w, k - 1);
        }
    }
    s
}

/// X(1..=n) from an innovation record laid out as in [`VolterraPath`].
pub fn eval_from_record(kernel: &TruncatedKernel, eps: &[f64], n: usize) -> Result<Vec<f64>> {
    let m = kernel.m();
    if eps.len() < n + m {
        return arg(format!("record of length {} is shorter than N + M = {}", eps.len(), n + m));
    }
    let len = n + m;
    let rev: Vec<f64> = eps[..len].iter().rev().copied().collect();
    Ok((1..=n)
        .map(|t| {
            // w_j = ε_{t−j} = eps[t+M−1−j] = rev[N+1−t+j−1]
            let start = n + 1 - t;
            contract(kernel.values(), &rev[start..start + m], kernel.k())
        })
        .collect())
}

pub fn simulate_path_with_stream(
    kernel: &TruncatedKernel,
    law: NoiseLaw,
    n: usize,
    mut stream: RngStream,
) -> Result<VolterraPath> {
    if n == 0 {
        return arg("path length must be >= 1");
    }
    let eps = sample_noise(law, &mut stream, n + kernel.m());
    let x = eval_from_record(kernel, &eps, n)?;
    Ok(VolterraPath {
        x,
        eps,
        seed: stream.root(),
        stream_path: stream.path().to_vec(),
        horizon: kernel.m(),
    })
}

/// Path number `index` of the run with root `seed`.
pub fn simulate_path(kernel: &TruncatedKernel, law: NoiseLaw, n: usize, seed: u64, index: u64) -> Result<VolterraPath> {
    simulate_path_with_stream(kernel, law, n, derive_stream(seed, &[index]))
}

/// Σ_t x_t x_{t+h}.
pub fn dot_shifted(x: &[f64], h: usize) -> f64 {
    dot(&x[..x.len() - h], &x[h..])
}
