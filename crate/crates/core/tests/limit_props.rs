use volterra_core::combinatorics::{Partition, TermIndex};
use volterra_core::kernel::{trace_kernel, Kernel};
use volterra_core::limit::{
    build_limit_spec, discretized_variance, semi_analytic_acf, simulate_hermite, DiscretizedChaosGrid,
};
use volterra_core::mc::{derive_stream, fit_loglog_slope, sample_noise, variance_se, NoiseLaw, NoiseSpec};
use volterra_core::quad::QuadratureConfig;
use volterra_core::sim::{decompose_path, TruncatedKernel};

fn mid_alpha(k: usize) -> f64 {
    -(k as f64) / 2.0 - 0.2
}

#[test]
fn limit_terms_cover_every_pairing_count() {
    let q = QuadratureConfig::default();
    for k in 1..=5 {
        let spec = build_limit_spec(&Kernel::power_sum(k, mid_alpha(k)), &q).unwrap();
        assert_eq!(spec.terms.len(), k.div_ceil(2), "k={k}");
        let orders: Vec<usize> = spec.terms.iter().map(|t| t.order).collect();
        let expected: Vec<usize> = (0..k.div_ceil(2)).map(|r| k - 2 * r).collect();
        assert_eq!(orders, expected);
        for t in &spec.terms {
            assert!((t.trace.hurst() - spec.hurst).abs() < 1e-14);
        }
    }
}

#[test]
fn discretized_chaos_isometry() {
    let q = QuadratureConfig::default();
    for (d, cells) in [(1usize, 256usize), (2, 128), (3, 40)] {
        let tr = trace_kernel(&Kernel::power_sum(d, mid_alpha(d)), 0, &q).unwrap();
        let grid = DiscretizedChaosGrid::new(cells, 1.0, 50.0, 0.75).unwrap();
        let exact = discretized_variance(&tr, 1.0, &grid, &q).unwrap();
        let z = simulate_hermite(&tr, &[1.0], &grid, 10_000, 11 + d as u64, &q).unwrap();
        let (v, se) = variance_se(&z[0]);
        assert!((v - exact).abs() <= 3.0 * se, "d={d}: {v} ± {se} vs {exact}");
    }
}

#[test]
fn every_limit_term_has_the_same_self_similarity() {
    let q = QuadratureConfig::default();
    let k = 3;
    let g = Kernel::power_sum(k, -1.7);
    let spec = build_limit_spec(&g, &q).unwrap();
    let target = 0.5f64.powf(2.0 * spec.hurst);
    let grid = DiscretizedChaosGrid::new(64, 1.0, 200.0, 0.75).unwrap();
    for t in &spec.terms {
        let z = simulate_hermite(&t.trace, &[0.5, 1.0], &grid, 10_000, 3, &q).unwrap();
        let ratio = variance_se(&z[0]).0 / variance_se(&z[1]).0;
        assert!((ratio / target - 1.0).abs() <= 0.1, "order {}: {ratio} vs {target}", t.order);
    }
}

#[test]
fn short_memory_terms_vanish_under_long_memory_scaling() {
    // k = 2, H = 0.8: the diagonal term Σ a(i,i) A₂(ε) has summable covariances
    let a = TruncatedKernel::from_kernel(&Kernel::power_sum(2, -1.2), 64).unwrap();
    let noise = NoiseSpec::for_order(NoiseLaw::Gaussian, 2);
    let term = TermIndex::new("{{1,2}}".parse::<Partition>().unwrap(), vec![2], &noise.moments).unwrap();
    let h = 0.8;
    let ns = [256usize, 1024, 4096];
    let mut vars = Vec::new();
    for &n in &ns {
        let sums: Vec<f64> = (0..400u64)
            .map(|p| {
                let eps = sample_noise(NoiseLaw::Gaussian, &mut derive_stream(31, &[n as u64, p]), n + 64);
                let part = decompose_path(&a, &noise, &eps, n, std::slice::from_ref(&term)).unwrap();
                part[0].iter().sum::<f64>() / (n as f64).powf(h)
            })
            .collect();
        vars.push(variance_se(&sums).0);
    }
    for w in vars.windows(2) {
        assert!(w[1] <= 0.7 * w[0], "{vars:?}");
    }
}

#[test]
fn semi_analytic_autocovariance_decays_at_the_long_memory_rate() {
    let a = TruncatedKernel::from_kernel(&Kernel::power_sum(2, -1.2), 2048).unwrap();
    let pts: Vec<(f64, f64)> = (4..=40).map(|n| (n as f64, semi_analytic_acf(&a, n).unwrap())).collect();
    let fit = fit_loglog_slope(&pts).unwrap();
    // frozen from this computation; 2H − 2 = −0.4 is the asymptote
    assert!((fit.slope - -0.3864).abs() < 1e-3, "{}", fit.slope);
    assert!((fit.slope - -0.4).abs() < 0.1);
}
