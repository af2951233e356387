use serde::Serialize;

use super::classify::{classify_memory, ClassificationResult, Memory, MemorySpec};
use super::variance::{partial_sum_variance, VarianceScaling};
use crate::error::{arg, Result};
use crate::mc::{anderson_darling_normal, mean_se, variance_se, NoiseLaw, NoiseSpec, TestResult};
use crate::sim::{map_paths, Process};

#[derive(Clone, Debug, Serialize)]
pub struct CltConfig {
    pub law: NoiseLaw,
    pub n: usize,
    pub paths: usize,
    pub seed: u64,
    /// Lags kept in σ̂² = Σ_{|h| ≤ L} γ̂(h).
    pub max_lag: usize,
    pub linearity_ns: Vec<usize>,
}

impl Default for CltConfig {
    fn default() -> Self {
        Self {
            law: NoiseLaw::Gaussian,
            n: 1 << 12,
            paths: 2000,
            seed: 1,
            max_lag: 64,
            linearity_ns: vec![1 << 8, 1 << 9, 1 << 10, 1 << 11, 1 << 12],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitCheck {
    pub first: f64,
    pub first_se: f64,
    pub second: f64,
    pub second_se: f64,
    /// |difference| / joint SE
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CltReport {
    pub classification: ClassificationResult,
    pub mean: f64,
    pub var: f64,
    pub var_se: f64,
    pub anderson_darling: TestResult,
    pub sigma2_hat: f64,
    pub sigma2_se: f64,
    pub sigma2_nonpositive: bool,
    pub split: SplitCheck,
    pub linearity: VarianceScaling,
    #[serde(skip)]
    pub normalized: Vec<f64>,
}

pub fn clt_compare<P: Process + ?Sized>(process: &P, spec: &MemorySpec, cfg: &CltConfig) -> Result<CltReport> {
    let mut classification = classify_memory(spec);
    if classification.memory != Memory::ShortMemory {
        return arg(format!("kernel is not classified short-memory ({})", classification.basis));
    }
    if cfg.n < 10 * cfg.max_lag {
        return arg("N must be at least 10 L");
    }
    if cfg.paths < 4 {
        return arg("at least 4 paths are needed");
    }
    if cfg.linearity_ns.iter().any(|&m| m > cfg.n) {
        return arg("linearity sizes must not exceed N");
    }
    let mean = process.mean(&NoiseSpec::for_order(cfg.law, process.order()))?;
    let n = cfg.n;
    let l = cfg.max_lag;
    let rows = map_paths(process, cfg.law, n, cfg.paths, cfg.seed, |x| {
        let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
        let mut sigma2 = 0.0;
        for h in 0..=l {
            let g = crate::sim::dot_shifted(&c, h) / (n - h) as f64;
            sigma2 += if h == 0 { g } else { 2.0 * g };
        }
        let mut cum = 0.0;
        let mut sums = Vec::new();
        let mut next = 0;
        for (i, v) in c.iter().enumerate() {
            cum += v;
            while next < cfg.linearity_ns.len() && cfg.linearity_ns[next] == i + 1 {
                sums.push(cum);
                next += 1;
            }
        }
        (cum / (n as f64).sqrt(), sigma2, sums)
    });
    let normalized: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let sig: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let sums: Vec<Vec<f64>> = rows.into_iter().map(|r| r.2).collect();
    let (var, var_se) = variance_se(&normalized);
    let (sigma2_hat, sigma2_se) = mean_se(&sig);
    let half = sig.len() / 2;
    let (a, ase) = mean_se(&sig[..half]);
    let (b, bse) = mean_se(&sig[half..]);
    let split = SplitCheck {
        first: a,
        first_se: ase,
        second: b,
        second_se: bse,
        z: (a - b).abs() / (ase * ase + bse * bse).sqrt(),
    };
    classification.sigma2_estimate = Some(sigma2_hat);
    Ok(CltReport {
        classification,
        mean,
        var,
        var_se,
        anderson_darling: anderson_darling_normal(&normalized),
        sigma2_hat,
        sigma2_se,
        sigma2_nonpositive: sigma2_hat <= 0.0,
        split,
        linearity: partial_sum_variance(&sums, &cfg.linearity_ns)?,
        normalized,
    })
}
