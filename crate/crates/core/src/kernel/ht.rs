use serde::Serialize;

use super::trace::{trace_kernel, TraceKernel};
use super::{for_each_permutation, Kernel};
use crate::error::{arg, Error, Result};
use crate::mc::derive_stream;
use crate::quad::{integrate_half_line, integrate_log, Estimate, QuadratureConfig};

/// h_t(y) = ∫_0^t g(s·1 − y) 1{s > max y} ds.
pub fn eval_h_t(trace: &TraceKernel, t: f64, y: &[f64], quad: &QuadratureConfig) -> Result<f64> {
    Ok(eval_h_t_with_error(trace, t, y, quad)?.value)
}

/// eval_h_t for an untraced kernel.
pub fn eval_h_t_kernel(g: &Kernel, t: f64, y: &[f64], quad: &QuadratureConfig) -> Result<f64> {
    eval_h_t(&trace_kernel(g, 0, quad)?, t, y, quad)
}

pub fn eval_h_t_with_error(trace: &TraceKernel, t: f64, y: &[f64], quad: &QuadratureConfig) -> Result<Estimate> {
    let d = trace.arity();
    if y.len() != d {
        return arg(format!("h_t of arity {d} evaluated at {} coordinates", y.len()));
    }
    if !(t >= 0.0) {
        return arg(format!("h_t needs t >= 0, got {t}"));
    }
    let ymax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if t == 0.0 || ymax >= t {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let gaps: Vec<f64> = y.iter().map(|v| ymax - v).collect();
    h_gaps(trace, t, t - ymax, &gaps, quad)
}

/// h_t at y_j = t − w − gaps_j, with w = t − max y > 0 and min gap 0.
fn h_gaps(trace: &TraceKernel, t: f64, w: f64, gaps: &[f64], quad: &QuadratureConfig) -> Result<Estimate> {
    let d = gaps.len();
    // s runs over (max(0, ymax), t); u = s − ymax runs over (lo, w)
    let (lo, len) = if w > t { (w - t, t) } else { (0.0, w) };
    if let Some(c) = trace.closed_coefficient() {
        let e = trace.alpha() + 1.0;
        let lower: f64 = gaps.iter().sum::<f64>() + d as f64 * lo;
        let span = d as f64 * len;
        // upper^e − lower^e without cancellation when lower ≫ span
        let diff = if lower > 0.0 {
            lower.powf(e) * (e * (span / lower).ln_1p()).exp_m1()
        } else {
            span.powf(e)
        };
        return Ok(Estimate { value: c * diff / (d as f64 * e), error: 0.0 });
    }
    let mut x = vec![0.0; d];
    let mut failure = None;
    let mut inner_err = 0.0f64;
    let est = integrate_log(
        |u| {
            for j in 0..d {
                x[j] = gaps[j] + u;
            }
            match trace.eval_with_error(&x) {
                Ok(e) => {
                    inner_err = inner_err.max(e.error);
                    e.value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        lo,
        w,
        quad,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Estimate { value: est.value, error: est.error + inner_err * len })
}

/// Symmetrized h_t in gap coordinates.
fn h_tilde(trace: &TraceKernel, t: f64, w: f64, gaps: &[f64], quad: &QuadratureConfig) -> Result<f64> {
    if w <= 0.0 {
        return Ok(0.0);
    }
    if trace.is_symmetric() || gaps.len() == 1 {
        return Ok(h_gaps(trace, t, w, gaps, quad)?.value);
    }
    let mut buf = gaps.to_vec();
    let mut total = 0.0;
    let mut count = 0;
    let mut failure = None;
    for_each_permutation(&mut buf, &mut |p| match h_gaps(trace, t, w, p, quad) {
        Ok(v) => {
            total += v.value;
            count += 1;
        }
        Err(e) => {
            failure.get_or_insert(e);
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(total / count as f64),
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HtNorm {
    pub value: f64,
    pub error: f64,
    pub method: &'static str,
}

/// ‖h̃_t‖² over R^d.
pub fn l2_norm_h_t(trace: &TraceKernel, t: f64, quad: &QuadratureConfig) -> Result<HtNorm> {
    if !(t >= 0.0) {
        return arg(format!("t must be >= 0, got {t}"));
    }
    if t == 0.0 {
        return Ok(HtNorm { value: 0.0, error: 0.0, method: "exact" });
    }
    let d = trace.arity();
    if d > 6 {
        return arg("symmetrized norms are limited to arity <= 6");
    }
    let mut failure: Option<Error> = None;
    match d {
        1 => {
            let est = integrate_half_line(
                |w| match h_gaps(trace, t, w, &[0.0], quad) {
                    Ok(h) => h.value * h.value,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                &[t],
                quad,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            Ok(HtNorm { value: est.value, error: est.error, method: "quadrature" })
        }
        2 => {
            // 2 ∫_{w>0} ∫_{δ>0} h̃(t−w−δ, t−w)² dδ dw
            let inner_quad = QuadratureConfig { abs_tol: 0.0, ..*quad };
            let mut inner_err = 0.0f64;
            let est = integrate_half_line(
                |w| {
                    let breaks = if w < t { vec![t - w] } else { vec![] };
                    let inner = integrate_half_line(
                        |delta| match h_tilde(trace, t, w, &[delta, 0.0], quad) {
                            Ok(h) => h * h,
                            Err(e) => {
                                failure.get_or_insert(e);
                                0.0
                            }
                        },
                        &breaks,
                        &inner_quad,
                    );
                    match inner {
                        Ok(e) => {
                            inner_err += e.error;
                            e.value
                        }
                        Err(e) => {
                            failure.get_or_insert(e);
                            0.0
                        }
                    }
                },
                &[t],
                quad,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            Ok(HtNorm {
                value: 2.0 * est.value,
                error: 2.0 * est.error,
                method: "quadrature",
            })
        }
        _ => qmc_norm(trace, t, quad),
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0 / base as f64;
    let mut out = 0.0;
    let inv = f;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
const QMC_POINTS: u64 = 1 << 14;
const QMC_SHIFTS: u64 = 16;

/// Randomly shifted Halton rule over the ordered region y₁ < … < y_d < t,
/// each gap mapped from (0,1) by z = t (u/(1−u))².
fn qmc_norm(trace: &TraceKernel, t: f64, quad: &QuadratureConfig) -> Result<HtNorm> {
    let d = trace.arity();
    let fact: f64 = (1..=d).map(|v| v as f64).product();
    let mut stream = derive_stream(0x716d63, &[d as u64]);
    let mut estimates = Vec::new();
    let mut gaps = vec![0.0; d];
    for _ in 0..QMC_SHIFTS {
        let shift: Vec<f64> = (0..d).map(|_| stream.uniform_open()).collect();
        let mut acc = 0.0;
        for i in 1..=QMC_POINTS {
            let mut jac = 1.0;
            let mut w = 0.0;
            let mut gap = 0.0;
            for j in 0..d {
                let u = (radical_inverse(i, PRIMES[j]) + shift[j]).fract();
                let ratio = u / (1.0 - u);
                let z = t * ratio * ratio;
                jac *= t * 2.0 * ratio / ((1.0 - u) * (1.0 - u));
                if j == 0 {
                    w = z;
                } else {
                    gap += z;
                }
                gaps[d - 1 - j] = gap;
            }
            let h = h_tilde(trace, t, w, &gaps, quad)?;
            let v = h * h * jac;
            if v.is_finite() {
                acc += v;
            }
        }
        estimates.push(fact * acc / QMC_POINTS as f64);
    }
    let (mean, se) = crate::mc::stats::mean_se(&estimates);
    Ok(HtNorm { value: mean, error: se, method: "quasi-monte-carlo" })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_and_zero_time() {
        let q = QuadratureConfig::default();
        let g = trace_kernel(&Kernel::power_sum(2, -1.2), 0, &q).unwrap();
        assert_eq!(eval_h_t(&g, 1.0, &[1.0, 3.0], &q).unwrap(), 0.0);
        assert_eq!(eval_h_t(&g, 1.0, &[2.0, 1.5], &q).unwrap(), 0.0);
        assert_eq!(l2_norm_h_t(&g, 0.0, &q).unwrap().value, 0.0);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let q = QuadratureConfig::default();
        let g = Kernel::power_sum(2, -1.2);
        let closed = trace_kernel(&g, 0, &q).unwrap();
        let numeric = TraceKernel {
            base: Kernel::Max(vec![g.clone()]),
            r: 0,
            form: super::super::TraceForm::Identity,
        };
        for y in [[-1.0, -1.0], [0.3, -0.2], [0.5, 0.5 - 1e-3], [-4.0, -0.01]] {
            let a = eval_h_t(&closed, 1.0, &y, &q).unwrap();
            let b = eval_h_t(&numeric, 1.0, &y, &q).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs(), "{y:?}: {a} vs {b}");
        }
    }

    #[test]
    fn fbm_case_of_the_order_five_example() {
        let alpha = -2.75;
        let q = QuadratureConfig::default();
        let g2 = trace_kernel(&Kernel::power_sum(5, alpha), 2, &q).unwrap();
        let c = 1.0 / (4.0 * (alpha + 1.0) * (alpha + 2.0));
        for y in [-2.0, -0.3, 0.4] {
            let t = 1.0f64;
            let pos = |v: f64| v.max(0.0);
            let expect = c * (pos(t - y).powf(alpha + 3.0) - pos(-y).powf(alpha + 3.0)) / (alpha + 3.0);
            let got = eval_h_t(&g2, t, &[y], &q).unwrap();
            assert!((got - expect).abs() < 1e-12 * expect.abs());
        }
    }
}
