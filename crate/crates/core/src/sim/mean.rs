use super::TruncatedKernel;
use crate::combinatorics::{enumerate_partitions, s_prime_sum};
use crate::error::{arg, Result};
use crate::mc::NoiseSpec;

/// E X(n) = Σ_π Σ′ a_π(i) μ_{p_1}…μ_{p_m} over the truncated lattice.
pub fn exact_mean(kernel: &TruncatedKernel, noise: &NoiseSpec) -> Result<f64> {
    let k = kernel.k();
    if noise.moments.max_order() < k {
        return arg(format!("moments up to order {k} are needed"));
    }
    let mut total = 0.0;
    for pi in enumerate_partitions(k)? {
        let mut weight = 1.0;
        for p in pi.sizes() {
            weight *= noise.moment_f64(p)?;
        }
        if weight == 0.0 {
            continue;
        }
        let all: Vec<usize> = (1..=pi.m()).collect();
        total += weight * s_prime_sum(kernel, &pi, &all, &[])?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::NoiseLaw;

    #[test]
    fn second_order_mean_is_the_trace() {
        let a = TruncatedKernel::from_fn(2, 5, |i| (i[0] as f64).sqrt() - i[1] as f64).unwrap();
        let m = exact_mean(&a, &NoiseSpec::for_order(NoiseLaw::Uniform, 2)).unwrap();
        let tr: f64 = (1..=5).map(|i| a.get(&[i, i])).sum();
        assert!((m - tr).abs() < 1e-12);
    }

    #[test]
    fn third_order() {
        let a = TruncatedKernel::from_fn(3, 2, |_| 1.0).unwrap();
        assert_eq!(exact_mean(&a, &NoiseSpec::for_order(NoiseLaw::Exponential, 3)).unwrap(), 4.0);
        assert_eq!(exact_mean(&a, &NoiseSpec::for_order(NoiseLaw::Gaussian, 3)).unwrap(), 0.0);
        assert_eq!(exact_mean(&a, &NoiseSpec::for_order(NoiseLaw::Rademacher, 3)).unwrap(), 0.0);
    }
}
