use serde::Serialize;

use super::Kernel;
use crate::mc::derive_stream;

/// Outcome of checking the class conditions. Invalid kernels are reported,
/// not rejected.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub k: usize,
    pub alpha: f64,
    pub alpha_range: (f64, f64),
    pub alpha_in_range: bool,
    /// max g(x)/‖x‖₁^α over the simplex grid
    pub bound_constant: f64,
    /// same maximum on a four times coarser grid
    pub bound_constant_coarse: f64,
    pub bounded: bool,
    pub homogeneity_max_rel_error: f64,
    pub homogeneous: bool,
    /// sup |L| over lattice points, when a perturbation is present
    pub perturbation_sup: Option<f64>,
    pub failures: Vec<String>,
}

const HOMOGENEITY_TOL: f64 = 1e-12;
const BOUND_GROWTH_TOL: f64 = 0.01;
const POINTS_PER_PAIR: usize = 10_000;

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Resolution n with about `target` interior lattice points in the simplex.
fn resolution_for(k: usize, target: f64) -> usize {
    if k == 1 {
        // the simplex is a single point
        return 1;
    }
    let mut n = 1;
    while binom(n + k - 1, k - 1) < target {
        n += 1;
    }
    n
}

/// max |g(x)| over x = (m + 1/2)/(n + k/2), m a composition of n.
fn simplex_max(g: &Kernel, n: usize) -> f64 {
    let k = g.arity();
    let denom = n as f64 + k as f64 / 2.0;
    let mut m = vec![0usize; k];
    let mut x = vec![0.0; k];
    let mut best: f64 = 0.0;
    fn rec(pos: usize, left: usize, m: &mut [usize], x: &mut [f64], denom: f64, g: &Kernel, best: &mut f64) {
        let k = m.len();
        if pos == k - 1 {
            m[pos] = left;
            for j in 0..k {
                x[j] = (m[j] as f64 + 0.5) / denom;
            }
            let v = g.value(x).abs();
            if v > *best || v.is_nan() {
                *best = if v.is_nan() { f64::INFINITY } else { v };
            }
            return;
        }
        for q in 0..=left {
            m[pos] = q;
            rec(pos + 1, left - q, m, x, denom, g, best);
        }
    }
    rec(0, n, &mut m, &mut x, denom, g, &mut best);
    best
}

fn strip_perturbation(g: &Kernel) -> Kernel {
    match g {
        Kernel::Perturbed { inner, .. } => strip_perturbation(inner),
        Kernel::Scale { c, inner } => Kernel::Scale { c: *c, inner: Box::new(strip_perturbation(inner)) },
        Kernel::Sum(ch) => Kernel::Sum(ch.iter().map(strip_perturbation).collect()),
        Kernel::Max(ch) => Kernel::Max(ch.iter().map(strip_perturbation).collect()),
        Kernel::Min(ch) => Kernel::Min(ch.iter().map(strip_perturbation).collect()),
        Kernel::Symmetrized(inner) => Kernel::Symmetrized(Box::new(strip_perturbation(inner))),
        other => other.clone(),
    }
}

fn perturbation_sup(g: &Kernel) -> Option<f64> {
    match g {
        Kernel::Perturbed { inner, c, delta } => {
            let here = 1.0 + c.abs() * (g.arity() as f64).powf(-delta);
            Some(perturbation_sup(inner).map_or(here, |s| s * here))
        }
        Kernel::Scale { inner, .. } | Kernel::Symmetrized(inner) => perturbation_sup(inner),
        Kernel::Sum(ch) | Kernel::Max(ch) | Kernel::Min(ch) => {
            ch.iter().filter_map(perturbation_sup).reduce(f64::max)
        }
        _ => None,
    }
}

pub fn validate_ghkb(g: &Kernel) -> ValidationReport {
    let k = g.arity();
    let alpha = g.alpha();
    let kf = k as f64;
    let alpha_range = (-(kf + 1.0) / 2.0, -kf / 2.0);
    let alpha_in_range = g.alpha_in_range();
    let base = strip_perturbation(g);
    let mut failures = Vec::new();
    if !alpha_in_range {
        failures.push(format!(
            "alpha = {alpha} outside ({}, {})",
            alpha_range.0, alpha_range.1
        ));
    }

    let pairs = if k >= 2 { binom(k, 2) } else { 1.0 };
    let target = POINTS_PER_PAIR as f64 * pairs;
    let n_fine = resolution_for(k, target).max(8);
    let n_coarse = (n_fine / 4).max(2);
    let c_fine = simplex_max(&base, n_fine);
    let c_coarse = simplex_max(&base, n_coarse);
    let bounded = c_fine.is_finite() && c_fine <= c_coarse * (1.0 + BOUND_GROWTH_TOL) + 1e-300;
    if !bounded {
        failures.push(format!(
            "no bound |g| <= C|x|^alpha: grid maximum grows from {c_coarse:e} to {c_fine:e} under refinement"
        ));
    }

    let mut stream = derive_stream(0x6b65726e, &[k as u64]);
    let mut worst: f64 = 0.0;
    let mut x = vec![0.0; k];
    let mut lx = vec![0.0; k];
    for _ in 0..1000 {
        for j in 0..k {
            x[j] = (8.0 * stream.uniform_open() - 4.0).exp();
        }
        let lambda = (8.0 * stream.uniform_open() - 4.0).exp();
        for j in 0..k {
            lx[j] = lambda * x[j];
        }
        let lhs = base.value(&lx);
        let rhs = lambda.powf(alpha) * base.value(&x);
        let scale = lhs.abs().max(rhs.abs());
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    let homogeneous = worst <= HOMOGENEITY_TOL;
    if !homogeneous {
        failures.push(format!("homogeneity violated, max relative error {worst:e}"));
    }

    let perturbation_sup = perturbation_sup(g);
    if let Some(s) = perturbation_sup {
        if !s.is_finite() {
            failures.push("perturbation factor unbounded".into());
        }
    }

    ValidationReport {
        valid: failures.is_empty(),
        k,
        alpha,
        alpha_range,
        alpha_in_range,
        bound_constant: c_fine,
        bound_constant_coarse: c_coarse,
        bounded,
        homogeneity_max_rel_error: worst,
        homogeneous,
        perturbation_sup,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_sum_is_valid_with_unit_constant() {
        let r = validate_ghkb(&Kernel::power_sum(2, -1.2));
        assert!(r.valid, "{:?}", r.failures);
        assert!((r.bound_constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_order_kernels_validate() {
        let r = validate_ghkb(&Kernel::power_sum(1, -0.7));
        assert!(r.valid, "{:?}", r.failures);
        assert!((r.bound_constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_outside_range() {
        let r = validate_ghkb(&Kernel::power_sum(2, -0.4));
        assert!(!r.valid);
        assert!(!r.alpha_in_range);
        assert!(r.bounded && r.homogeneous);
    }

    #[test]
    fn ratio_form_example() {
        let g = Kernel::ratio_form(vec![0.3, 0.3], 1.9).unwrap();
        let r = validate_ghkb(&g);
        assert!(r.valid, "{:?}", r.failures);
        assert!((r.alpha + 1.3).abs() < 1e-12);
        // maximum of x^0.3 (1-x)^0.3 / (x^1.9 + (1-x)^1.9) sits at x = 1/2
        let expected = 0.25f64.powf(0.3) / (2.0 * 0.5f64.powf(1.9));
        assert!((r.bound_constant - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn product_kernels_are_unbounded() {
        let r = validate_ghkb(&Kernel::product_power(vec![-0.6, -0.6]));
        assert!(!r.bounded);
        assert!(!r.valid);
    }

    #[test]
    fn combinators_of_valid_kernels_validate() {
        let a = Kernel::power_sum(3, -1.7);
        let b = Kernel::scale(2.0, Kernel::ratio_form(vec![0.2, 0.2, 0.2], 2.3).unwrap());
        for g in [
            Kernel::sum(vec![a.clone(), b.clone()]).unwrap(),
            Kernel::max(vec![a.clone(), b.clone()]).unwrap(),
            Kernel::min(vec![a.clone(), b.clone()]).unwrap(),
            Kernel::perturbed(a.clone(), -0.3, 0.5).unwrap(),
        ] {
            let r = validate_ghkb(&g);
            assert!(r.valid, "{:?}", r.failures);
        }
    }
}
