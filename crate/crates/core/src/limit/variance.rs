use serde::Serialize;

use crate::error::{arg, Result};
use crate::mc::{fit_loglog_slope, variance_se, SlopeFit};

#[derive(Clone, Debug, Serialize)]
pub struct VarianceScaling {
    pub ns: Vec<usize>,
    pub var: Vec<f64>,
    pub se: Vec<f64>,
    pub fit: Option<SlopeFit>,
    pub paths: usize,
    /// Fewer than 100 paths: the interval on the slope is unreliable.
    pub few_paths: bool,
}

impl VarianceScaling {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,var,se\n");
        for i in 0..self.ns.len() {
            s.push_str(&format!("{},{},{}\n", self.ns[i], self.var[i], self.se[i]));
        }
        s
    }
}

/// Σ_{n ≤ N} x_n for each N in `ns`.
pub fn partial_sums(path: &[f64], ns: &[usize]) -> Result<Vec<f64>> {
    if let Some(&n) = ns.iter().find(|&&n| n > path.len()) {
        return arg(format!("partial sum up to {n} requested from a path of length {}", path.len()));
    }
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        out.push(crate::mc::pairwise_sum(&path[..n]));
    }
    Ok(out)
}

/// Across-path variance of the partial sums (one row per path, one column
/// per N) and the log-log slope against N.
pub fn partial_sum_variance(sums: &[Vec<f64>], ns: &[usize]) -> Result<VarianceScaling> {
    if sums.len() < 2 {
        return arg("variance scaling needs at least two paths");
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return arg("the N list must be increasing");
    }
    if sums.iter().any(|s| s.len() != ns.len()) {
        return arg("each path needs one partial sum per N");
    }
    let mut var = Vec::new();
    let mut se = Vec::new();
    for j in 0..ns.len() {
        let col: Vec<f64> = sums.iter().map(|s| s[j]).collect();
        let (v, e) = variance_se(&col);
        var.push(v);
        se.push(e);
    }
    let pts: Vec<(f64, f64)> = ns.iter().zip(&var).map(|(&n, &v)| (n as f64, v)).collect();
    let fit = if var.iter().all(|&v| v > 0.0) { fit_loglog_slope(&pts).ok() } else { None };
    Ok(VarianceScaling {
        ns: ns.to_vec(),
        var,
        se,
        fit,
        paths: sums.len(),
        few_paths: sums.len() < 100,
    })
}

/// 2^lo, …, 2^hi.
pub fn dyadic(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|e| 1usize << e).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_paths_have_zero_variance() {
        let ns = dyadic(2, 5);
        let sums: Vec<Vec<f64>> = (0..10).map(|_| partial_sums(&[0.0; 32], &ns).unwrap()).collect();
        let v = partial_sum_variance(&sums, &ns).unwrap();
        assert!(v.var.iter().all(|x| *x == 0.0));
        assert!(v.fit.is_none());
        assert!(v.few_paths);
    }
}
