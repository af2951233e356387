use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;
use volterra_core::kernel::{eval_h_t, l2_norm_h_t, trace_kernel, validate_ghkb, Kernel};
use volterra_core::quad::QuadratureConfig;

/// Kernels of order k and degree alpha built from every variant.
fn kernels(k: usize, alpha: f64) -> Vec<Kernel> {
    let ps = Kernel::power_sum(k, alpha);
    let mut gammas: Vec<f64> = (0..k).map(|j| alpha / k as f64 + 0.05 * (j as f64 - (k - 1) as f64 / 2.0)).collect();
    let drift = alpha - gammas.iter().sum::<f64>();
    gammas[0] += drift;
    let pp = Kernel::product_power(gammas);
    let a: Vec<f64> = (0..k).map(|j| 0.1 * (j + 1) as f64).collect();
    let b = a.iter().sum::<f64>() - alpha;
    let rf = Kernel::ratio_form(a, b).unwrap();
    vec![
        ps.clone(),
        pp.clone(),
        rf.clone(),
        Kernel::scale(2.5, ps.clone()),
        Kernel::sum(vec![ps.clone(), Kernel::scale(0.5, rf.clone())]).unwrap(),
        Kernel::max(vec![ps.clone(), rf.clone()]).unwrap(),
        Kernel::min(vec![ps.clone(), pp.clone()]).unwrap(),
        pp.symmetrized().unwrap(),
    ]
}

fn in_range(k: usize) -> impl Strategy<Value = f64> {
    let lo = -(k as f64 + 1.0) / 2.0;
    let hi = -(k as f64) / 2.0;
    (0.05f64..0.95).prop_map(move |u| lo + u * (hi - lo))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity(k in 1usize..=4, u in 0.05f64..0.95, lam in 0.01f64..100.0,
                   x in proptest::collection::vec(0.01f64..10.0, 4)) {
        let lo = -(k as f64 + 1.0) / 2.0;
        let alpha = lo + u * 0.5;
        for g in kernels(k, alpha) {
            let x = &x[..k];
            let scaled: Vec<f64> = x.iter().map(|v| lam * v).collect();
            let a = g.eval(&scaled).unwrap();
            let b = lam.powf(alpha) * g.eval(x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs(), "{g:?}: {a} vs {b}");
        }
    }

    #[test]
    fn trace_homogeneity_and_hurst(alpha in in_range(3), lam in 0.1f64..10.0, x in 0.05f64..5.0) {
        let q = QuadratureConfig::default();
        for g in [Kernel::power_sum(3, alpha), Kernel::ratio_form(vec![0.3, 0.3, 0.3], 0.9 - alpha).unwrap()] {
            let t = trace_kernel(&g, 1, &q).unwrap();
            prop_assert!((t.hurst() - g.hurst()).abs() < 1e-14);
            let a = t.eval(&[lam * x]).unwrap();
            let b = lam.powf(alpha + 1.0) * t.eval(&[x]).unwrap();
            prop_assert!((a - b).abs() <= 1e-7 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn ht_vanishes_outside_support_and_grows_in_t(
        alpha in in_range(2), t in 0.1f64..2.0, dt in 0.01f64..1.0,
        y in proptest::collection::vec(-3.0f64..2.0, 2)
    ) {
        let q = QuadratureConfig::default();
        let tr = trace_kernel(&Kernel::power_sum(2, alpha), 0, &q).unwrap();
        let lo = y[0].min(y[1]);
        let a = eval_h_t(&tr, t, &y, &q).unwrap();
        let b = eval_h_t(&tr, t + dt, &y, &q).unwrap();
        if lo >= t {
            prop_assert_eq!(a, 0.0);
        }
        prop_assert!(a >= 0.0);
        prop_assert!(b >= a * (1.0 - 1e-12), "{a} then {b}");
    }
}

#[test]
fn combinators_of_valid_kernels_validate() {
    // product kernels are not bounded by C‖x‖^α near the axes
    let alpha = -1.2;
    for g in kernels(2, alpha).into_iter().filter(|g| !matches!(g, Kernel::ProductPower { .. } | Kernel::Symmetrized(_))) {
        let r = validate_ghkb(&g);
        assert!(r.valid, "{g:?}: {:?}", r.failures);
    }
    assert!(!validate_ghkb(&Kernel::product_power(vec![-0.6, -0.6])).valid);
}

/// ‖h_1‖² for (Σx)^α: C/(H(2H−1)) with C = k^{2α+k}/(k−1)!·B(k+α, −2α−k),
/// the coefficient of the covariance ∫ g(y)g(y+u1)dy = C u^{2α+k}.
fn beta_form(k: usize, alpha: f64) -> f64 {
    let kf = k as f64;
    let h = alpha + kf / 2.0 + 1.0;
    let (a, b) = (kf + alpha, -2.0 * alpha - kf);
    let beta = (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp();
    let fact: f64 = (1..k).map(|j| j as f64).product();
    kf.powf(2.0 * alpha + kf) / fact * beta / (h * (2.0 * h - 1.0))
}

#[test]
fn h_norm_matches_beta_oracle() {
    let q = QuadratureConfig::default();
    for (k, alpha, frozen) in [(1usize, -0.7, 10.6502), (2, -1.2, 4.44074)] {
        let oracle = beta_form(k, alpha);
        assert!((oracle - frozen).abs() < 1e-4 * frozen, "oracle {oracle} vs frozen {frozen}");
        let tr = trace_kernel(&Kernel::power_sum(k, alpha), 0, &q).unwrap();
        let n = l2_norm_h_t(&tr, 1.0, &q).unwrap();
        assert!((n.value - oracle).abs() < 1e-5 * oracle, "k={k}: {} vs {oracle}", n.value);
        let n2 = l2_norm_h_t(&tr, 0.5, &q).unwrap();
        let h = tr.hurst();
        assert!((n2.value / n.value - 0.5f64.powf(2.0 * h)).abs() < 1e-5);
    }
}
