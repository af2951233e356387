//! Summation, moments and the handful of tests the experiments need.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::rng::RngStream;
use crate::error::{arg, Result};

/// Pairwise summation; error grows like log n instead of n.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 128;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for x in xs {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Unbiased sample variance and its delta-method standard error.
pub fn variance_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let d2: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
    let d4: Vec<f64> = d2.iter().map(|x| x * x).collect();
    let m2 = pairwise_sum(&d2) / n;
    let m4 = pairwise_sum(&d4) / n;
    let var = m2 * n / (n - 1.0);
    let se = ((m4 - m2 * m2).max(0.0) / n).sqrt();
    (var, se)
}

/// Second moment about a known centre, with standard error.
pub fn second_moment_se(xs: &[f64], centre: f64) -> (f64, f64) {
    let sq: Vec<f64> = xs.iter().map(|x| (x - centre).powi(2)).collect();
    mean_se(&sq)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub se: f64,
    pub ci: (f64, f64),
}

/// OLS of log y on log x with a 95% t-interval for the slope.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 4 {
        return arg("slope fit needs at least 4 points");
    }
    if let Some((x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return arg(format!("log-log fit needs positive data, got ({x}, {y})"));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = lx.len() as f64;
    let mx = mean(&lx);
    let my = mean(&ly);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 2.0)
        .expect("dof > 0")
        .inverse_cdf(0.975);
    Ok(SlopeFit {
        slope,
        intercept,
        se,
        ci: (slope - t * se, slope + t * se),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    TestResult {
        statistic: d,
        p_value: kolmogorov_q(lambda),
    }
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = 2.0 * (-2.0 * jf * jf * lambda * lambda).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    s.clamp(0.0, 1.0)
}

/// Anderson–Darling normality test with mean and variance estimated from
/// the sample. Returns the small-sample adjusted statistic A*².
pub fn anderson_darling_normal(xs: &[f64]) -> TestResult {
    let n = xs.len();
    let (m, _) = mean_se(xs);
    let (var, _) = variance_se(xs);
    let sd = var.sqrt();
    let mut z: Vec<f64> = xs.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let phi = Normal::standard();
    let nf = n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let fi = phi.cdf(z[i]).clamp(1e-300, 1.0 - 1e-16);
        let fr = phi.cdf(z[n - 1 - i]).clamp(1e-300, 1.0 - 1e-16);
        s += (2.0 * i as f64 + 1.0) * (fi.ln() + (1.0 - fr).ln());
    }
    let a2 = -nf - s / nf;
    let a = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    // D'Agostino & Stephens (1986), table 4.9
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    TestResult {
        statistic: a,
        p_value: p.clamp(0.0, 1.0),
    }
}

/// Percentile bootstrap interval for a statistic of one sample.
pub fn bootstrap_ci<F>(
    data: &[f64],
    stat: F,
    reps: usize,
    level: f64,
    stream: &mut RngStream,
) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = data.len();
    let mut buf = vec![0.0; n];
    let mut stats: Vec<f64> = (0..reps)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = data[stream.random_range(0..n)];
            }
            stat(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let idx = (p * (reps - 1) as f64).round() as usize;
        stats[idx.min(reps - 1)]
    };
    let tail = (1.0 - level) / 2.0;
    (q(tail), q(1.0 - tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::noise::{sample_noise, NoiseLaw};
    use crate::mc::rng::derive_stream;

    #[test]
    fn pairwise_beats_naive_on_long_sums() {
        let xs = vec![0.1; 10_000_000];
        let exact = 1_000_000.0;
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - exact).abs() < (naive - exact).abs());
        let mut c = CompensatedSum::default();
        for x in &xs {
            c.add(*x);
        }
        assert!((c.value() - exact).abs() < 1e-6);
    }

    #[test]
    fn exact_power_law_slope() {
        let pts: Vec<_> = (1..10).map(|i| (i as f64, (i as f64).powf(-0.4))).collect();
        let f = fit_loglog_slope(&pts).unwrap();
        assert!((f.slope + 0.4).abs() < 1e-12);
        assert!(f.ci.1 - f.ci.0 < 1e-10);
        let flat: Vec<_> = (1..10).map(|i| (i as f64, 2.5)).collect();
        assert!(fit_loglog_slope(&flat).unwrap().slope.abs() < 1e-12);
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
        assert!(fit_loglog_slope(&pts[..3]).is_err());
    }

    #[test]
    fn noisy_power_law_slope() {
        let mut s = derive_stream(3, &[]);
        let pts: Vec<_> = (8..=14)
            .map(|e| {
                let x = 2f64.powi(e);
                let eps = sample_noise(NoiseLaw::Gaussian, &mut s, 1)[0];
                (x, 3.0 * x.powf(1.6) * (1.0 + 0.01 * eps))
            })
            .collect();
        let f = fit_loglog_slope(&pts).unwrap();
        assert!((f.slope - 1.6).abs() < 0.05);
    }

    #[test]
    fn slope_interval_coverage() {
        let mut s = derive_stream(4, &[]);
        let mut covered = 0;
        for _ in 0..500 {
            let pts: Vec<_> = (1..=10)
                .map(|i| {
                    let x = i as f64;
                    let e = sample_noise(NoiseLaw::Gaussian, &mut s, 1)[0];
                    (x, x.powf(-0.7) * (0.05 * e).exp())
                })
                .collect();
            let f = fit_loglog_slope(&pts).unwrap();
            if f.ci.0 <= -0.7 && -0.7 <= f.ci.1 {
                covered += 1;
            }
        }
        assert!(covered >= 450, "coverage {covered}/500");
    }

    #[test]
    fn ks_separates_and_accepts() {
        let mut s = derive_stream(8, &[]);
        let a = sample_noise(NoiseLaw::Gaussian, &mut s, 2000);
        let b = sample_noise(NoiseLaw::Gaussian, &mut s, 5000);
        assert!(ks_two_sample(&a, &b).p_value > 0.01);
        let c: Vec<f64> = b.iter().map(|x| 1.3 * x).collect();
        assert!(ks_two_sample(&a, &c).p_value < 0.01);
        let d = ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]);
        assert_eq!(d.statistic, 0.0);
    }

    #[test]
    fn anderson_darling_behaviour() {
        let mut s = derive_stream(10, &[]);
        let g = sample_noise(NoiseLaw::Gaussian, &mut s, 2000);
        assert!(anderson_darling_normal(&g).p_value > 0.01);
        let e = sample_noise(NoiseLaw::Exponential, &mut s, 2000);
        assert!(anderson_darling_normal(&e).p_value < 0.01);
    }

    #[test]
    fn bootstrap_interval_contains_mean() {
        let mut s = derive_stream(12, &[]);
        let g = sample_noise(NoiseLaw::Gaussian, &mut s, 4000);
        let (lo, hi) = bootstrap_ci(&g, mean, 400, 0.95, &mut s);
        assert!(lo < 0.05 && hi > -0.05 && hi - lo < 0.2);
    }
}
