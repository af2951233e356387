use rayon::prelude::*;
use serde::Serialize;

use crate::error::{arg, Result};
use crate::mc::{bootstrap_ci, derive_stream, sample_noise, NoiseLaw};
use crate::sim::{discrete_chaos, TruncatedKernel};

#[derive(Clone, Debug, Serialize)]
pub struct HyperReport {
    pub p: f64,
    pub samples: usize,
    pub ratio: f64,
    pub ci: Option<(f64, f64)>,
    pub ci_rel_width: Option<f64>,
}

/// (mean |q|^p)^{1/p} / (mean q²)^{1/2}, computed after an exact power-of-two
/// rescaling so that the value does not depend on the scale of q.
pub fn norm_ratio(q: &[f64], p: f64) -> f64 {
    let top = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return f64::NAN;
    }
    let e = top.log2().floor() as i32;
    let s = 2f64.powi(-e);
    let n = q.len() as f64;
    let lp = q.iter().map(|v| (v * s).abs().powf(p)).sum::<f64>() / n;
    let l2 = q.iter().map(|v| (v * s) * (v * s)).sum::<f64>() / n;
    lp.powf(1.0 / p) / l2.sqrt()
}

/// Off-diagonal forms Q(h) on independent noise records, sample i drawn
/// from substream (seed, i).
pub fn chaos_samples(h: &TruncatedKernel, law: NoiseLaw, samples: usize, seed: u64) -> Result<Vec<f64>> {
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut s = derive_stream(seed, &[i as u64]);
            discrete_chaos(h, &sample_noise(law, &mut s, h.m()))
        })
        .collect()
}

/// Σ′ h̃(i)² over the table.
pub fn off_diagonal_square_sum(h: &TruncatedKernel) -> f64 {
    let s = h.symmetrize();
    let k = s.k();
    let m = s.m();
    let mut idx = vec![1usize; k];
    let mut total = 0.0;
    for v in s.values() {
        let mut distinct = true;
        for a in 0..k {
            for b in 0..a {
                distinct &= idx[a] != idx[b];
            }
        }
        if distinct {
            total += v * v;
        }
        for pos in (0..k).rev() {
            if idx[pos] < m {
                idx[pos] += 1;
                break;
            }
            idx[pos] = 1;
        }
    }
    total
}

pub fn hypercontractivity_ratio(
    h: &TruncatedKernel,
    law: NoiseLaw,
    p: f64,
    samples: usize,
    seed: u64,
    bootstrap_reps: usize,
) -> Result<HyperReport> {
    if !(p > 2.0) {
        return arg(format!("p must exceed 2, got {p}"));
    }
    if samples < 2 {
        return arg("at least two samples are needed");
    }
    if !(off_diagonal_square_sum(h) > 0.0) {
        return arg("the off-diagonal part of h vanishes");
    }
    let q = chaos_samples(h, law, samples, seed)?;
    let ratio = norm_ratio(&q, p);
    let ci = if bootstrap_reps > 0 {
        let mut s = derive_stream(seed, &[u64::MAX]);
        Some(bootstrap_ci(&q, |x| norm_ratio(x, p), bootstrap_reps, 0.95, &mut s))
    } else {
        None
    };
    Ok(HyperReport {
        p,
        samples,
        ratio,
        ci,
        ci_rel_width: ci.map(|(a, b)| (b - a) / ratio),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_invariance_is_bitwise_for_powers_of_two() {
        let h = TruncatedKernel::from_fn(2, 5, |i| 1.0 / (i[0] + i[1]) as f64).unwrap();
        let h4 = TruncatedKernel::from_values(2, 5, h.values().iter().map(|v| 4.0 * v).collect(), true).unwrap();
        let a = hypercontractivity_ratio(&h, NoiseLaw::Rademacher, 3.0, 500, 3, 0).unwrap();
        let b = hypercontractivity_ratio(&h4, NoiseLaw::Rademacher, 3.0, 500, 3, 0).unwrap();
        assert_eq!(a.ratio.to_bits(), b.ratio.to_bits());
    }

    #[test]
    fn rejects_diagonal_only_tables() {
        let h = TruncatedKernel::from_fn(2, 3, |i| if i[0] == i[1] { 1.0 } else { 0.0 }).unwrap();
        assert!(hypercontractivity_ratio(&h, NoiseLaw::Gaussian, 4.0, 10, 1, 0).is_err());
    }
}
