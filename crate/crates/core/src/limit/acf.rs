use serde::Serialize;

use crate::error::{arg, Result};
use crate::mc::{fit_loglog_slope, mean_se, SlopeFit};
use crate::sim::TruncatedKernel;

/// Autocovariance estimates at lags 0..=L with across-path standard errors.
#[derive(Clone, Debug, Serialize)]
pub struct AcfSeries {
    pub lags: Vec<usize>,
    pub gamma_hat: Vec<f64>,
    pub se: Vec<f64>,
    pub gamma_theory: Option<Vec<f64>>,
    pub fit: Option<SlopeFit>,
    pub fit_window: (usize, usize),
    pub centre: f64,
    pub paths: usize,
    pub n: usize,
    pub flags: Vec<String>,
}

impl AcfSeries {
    /// Fits log γ̂ against log lag over `lo..=hi`.
    pub fn fit_window(&mut self, lo: usize, hi: usize) -> Result<SlopeFit> {
        if lo == 0 || hi >= self.lags.len() || lo >= hi {
            return arg(format!("fit window {lo}..={hi} is not inside lags 1..={}", self.lags.len() - 1));
        }
        let pts: Vec<(f64, f64)> = (lo..=hi).map(|h| (h as f64, self.gamma_hat[h])).collect();
        self.fit_window = (lo, hi);
        let fit = fit_loglog_slope(&pts)?;
        self.fit = Some(fit);
        Ok(fit)
    }

    /// Adds c·n^exponent with c matched to γ̂ over the fit window.
    pub fn with_theory(&mut self, exponent: f64) {
        let (lo, hi) = self.fit_window;
        let logs: Vec<f64> = (lo..=hi)
            .filter(|&h| self.gamma_hat[h] > 0.0)
            .map(|h| self.gamma_hat[h].ln() - exponent * (h as f64).ln())
            .collect();
        if logs.is_empty() {
            return;
        }
        let c = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
        self.gamma_theory = Some(
            self.lags
                .iter()
                .map(|&h| if h == 0 { f64::NAN } else { c * (h as f64).powf(exponent) })
                .collect(),
        );
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lag,gamma_hat,se,gamma_theory\n");
        for (i, h) in self.lags.iter().enumerate() {
            let th = self
                .gamma_theory
                .as_ref()
                .map(|v| v[i])
                .filter(|v| v.is_finite())
                .map(|v| v.to_string())
                .unwrap_or_default();
            s.push_str(&format!("{h},{},{},{th}\n", self.gamma_hat[i], self.se[i]));
        }
        s
    }
}

/// Streaming sufficient statistics for mean-corrected autocovariances.
#[derive(Clone, Debug)]
pub struct AcfAccumulator {
    max_lag: usize,
    n: Option<usize>,
    shift: Option<f64>,
    // per path: Σ x_t x_{t+h}, Σ_{t ≤ N−h} x_t, Σ_{t > h} x_t, all shifted
    cross: Vec<Vec<f64>>,
    head: Vec<Vec<f64>>,
    tail: Vec<Vec<f64>>,
}

impl AcfAccumulator {
    pub fn new(max_lag: usize) -> Self {
        Self {
            max_lag,
            n: None,
            shift: None,
            cross: Vec::new(),
            head: Vec::new(),
            tail: Vec::new(),
        }
    }

    pub fn push(&mut self, path: &[f64]) -> Result<()> {
        let n = path.len();
        if n < 10 * self.max_lag.max(1) {
            return arg(format!("path length {n} is below 10 L = {}", 10 * self.max_lag));
        }
        if *self.n.get_or_insert(n) != n {
            return arg("all paths must have the same length");
        }
        let shift = *self.shift.get_or_insert_with(|| path.iter().sum::<f64>() / n as f64);
        let x: Vec<f64> = path.iter().map(|v| v - shift).collect();
        let total: f64 = x.iter().sum();
        let mut cross = Vec::with_capacity(self.max_lag + 1);
        let mut head = Vec::with_capacity(self.max_lag + 1);
        let mut tail = Vec::with_capacity(self.max_lag + 1);
        let (mut h_sum, mut t_sum) = (total, total);
        for h in 0..=self.max_lag {
            if h > 0 {
                h_sum -= x[n - h];
                t_sum -= x[h - 1];
            }
            cross.push(crate::sim::dot_shifted(&x, h));
            head.push(h_sum);
            tail.push(t_sum);
        }
        self.cross.push(cross);
        self.head.push(head);
        self.tail.push(tail);
        Ok(())
    }

    pub fn paths(&self) -> usize {
        self.cross.len()
    }

    /// Pooled grand mean, or `known` when the process mean is available.
    pub fn finish(&self, known: Option<f64>) -> Result<AcfSeries> {
        let p = self.paths();
        if p == 0 {
            return arg("no paths accumulated");
        }
        let n = self.n.expect("set with the first path");
        let shift = self.shift.expect("set with the first path");
        let m = match known {
            Some(mu) => mu - shift,
            None => self.head.iter().map(|h| h[0]).sum::<f64>() / (p * n) as f64,
        };
        let mut gamma_hat = Vec::new();
        let mut se = Vec::new();
        for h in 0..=self.max_lag {
            let len = (n - h) as f64;
            let per: Vec<f64> = (0..p)
                .map(|i| (self.cross[i][h] - m * (self.head[i][h] + self.tail[i][h]) + len * m * m) / len)
                .collect();
            let (g, s) = mean_se(&per);
            gamma_hat.push(g);
            se.push(if p > 1 { s } else { f64::NAN });
        }
        let mut flags = Vec::new();
        if let Some(h) = (1..=self.max_lag).find(|&h| gamma_hat[h].abs() > gamma_hat[0]) {
            flags.push(format!("|gamma_hat({h})| exceeds gamma_hat(0)"));
        }
        if p < 2 {
            flags.push("single path: no standard errors".into());
        }
        let hi = (self.max_lag / 2).max(5).min(self.max_lag);
        Ok(AcfSeries {
            lags: (0..=self.max_lag).collect(),
            gamma_hat,
            se,
            gamma_theory: None,
            fit: None,
            fit_window: (4.min(hi - 1), hi),
            centre: m + shift,
            paths: p,
            n,
            flags,
        })
    }
}

/// Autocovariances averaged over paths, centred at the pooled mean.
pub fn empirical_acf(paths: &[Vec<f64>], max_lag: usize) -> Result<AcfSeries> {
    let mut acc = AcfAccumulator::new(max_lag);
    for p in paths {
        acc.push(p)?;
    }
    acc.finish(None)
}

/// k!·Σ′ a(i) a(i + n·1) over the table.
pub fn semi_analytic_acf(kernel: &TruncatedKernel, n: usize) -> Result<f64> {
    if !kernel.is_symmetric() {
        return arg("the chaos autocovariance needs a symmetric kernel");
    }
    let k = kernel.k();
    let m = kernel.m();
    if n >= m {
        return Ok(0.0);
    }
    let mut used = vec![false; m + 1];
    let mut idx = vec![0usize; k];
    fn rec(kernel: &TruncatedKernel, n: usize, pos: usize, idx: &mut [usize], used: &mut [bool]) -> f64 {
        let k = idx.len();
        let m = kernel.m();
        if pos == k {
            let shifted: Vec<usize> = idx.iter().map(|v| v + n).collect();
            return kernel.get(idx) * kernel.get(&shifted);
        }
        let mut s = 0.0;
        for v in 1..=m - n {
            if used[v] {
                continue;
            }
            used[v] = true;
            idx[pos] = v;
            s += rec(kernel, n, pos + 1, idx, used);
            used[v] = false;
        }
        s
    }
    let fact: f64 = (1..=k).map(|v| v as f64).product();
    Ok(fact * rec(kernel, n, 0, &mut idx, &mut used))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_centre_and_pooled_centre_agree_on_constant_shift() {
        let paths: Vec<Vec<f64>> = (0..3)
            .map(|p| (0..100).map(|t| ((t * 7 + p * 3) % 11) as f64).collect())
            .collect();
        let a = empirical_acf(&paths, 5).unwrap();
        let direct = |h: usize| {
            let m: f64 = paths.iter().flatten().sum::<f64>() / 300.0;
            let per: Vec<f64> = paths
                .iter()
                .map(|x| (0..100 - h).map(|t| (x[t] - m) * (x[t + h] - m)).sum::<f64>() / (100 - h) as f64)
                .collect();
            per.iter().sum::<f64>() / 3.0
        };
        for h in 0..=5 {
            assert!((a.gamma_hat[h] - direct(h)).abs() < 1e-10, "lag {h}");
        }
    }

    #[test]
    fn guard() {
        assert!(empirical_acf(&[vec![0.0; 99]], 10).is_err());
    }

    #[test]
    fn semi_analytic_small_cases() {
        let a = TruncatedKernel::from_fn(2, 2, |_| 1.0).unwrap();
        assert_eq!(semi_analytic_acf(&a, 0).unwrap(), 2.0 * 2.0);
        assert_eq!(semi_analytic_acf(&a, 1).unwrap(), 0.0);
    }
}
