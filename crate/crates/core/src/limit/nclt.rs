use serde::Serialize;

use super::hermite::{discretized_variance, simulate_limit, DiscretizedChaosGrid, GridConfig};
use super::spec::build_limit_spec;
use crate::error::{arg, Result};
use crate::kernel::{validate_ghkb, Kernel};
use crate::mc::{ks_two_sample, mean_se, variance_se, NoiseLaw, NoiseSpec, TestResult};
use crate::quad::QuadratureConfig;
use crate::sim::{map_paths, Process};

#[derive(Clone, Debug, Serialize)]
pub struct NcltConfig {
    pub law: NoiseLaw,
    pub ns: Vec<usize>,
    pub ts: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    /// 0 skips the simulated limit and the distribution comparison.
    pub limit_reps: usize,
    pub limit_seed: u64,
    pub grid: GridConfig,
}

impl Default for NcltConfig {
    fn default() -> Self {
        Self {
            law: NoiseLaw::Gaussian,
            ns: vec![1 << 10, 1 << 12, 1 << 14],
            ts: vec![0.5, 1.0],
            paths: 2000,
            seed: 1,
            limit_reps: 10_000,
            limit_seed: 2,
            grid: GridConfig::default(),
        }
    }
}

/// Moments of N^{−H}(S_{⌊Nt⌋} − ⌊Nt⌋ E X) across paths, or of Z(t) when
/// `n` is 0.
#[derive(Clone, Debug, Serialize)]
pub struct MarginalStats {
    pub t: f64,
    pub n: usize,
    pub var: f64,
    pub var_se: f64,
    pub m4: f64,
    pub m4_se: f64,
}

fn marginal(t: f64, n: usize, xs: &[f64]) -> MarginalStats {
    let (var, var_se) = variance_se(xs);
    let q: Vec<f64> = xs.iter().map(|x| x.powi(4)).collect();
    let (m4, m4_se) = mean_se(&q);
    MarginalStats { t, n, var, var_se, m4, m4_se }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfSimilarity {
    pub t: f64,
    pub target: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NcltReport {
    pub hurst: f64,
    pub limit: String,
    pub law: NoiseLaw,
    pub mean: f64,
    /// One entry per (N, t).
    pub mc: Vec<MarginalStats>,
    pub quadrature_var: Vec<(f64, f64)>,
    pub limit_sample: Vec<MarginalStats>,
    /// Exact variance of the discretized limit, per t.
    pub grid_var: Vec<(f64, f64)>,
    pub ks: Vec<(f64, TestResult)>,
    /// MC variance at the largest N and t = 1 over the quadrature variance.
    pub variance_ratio: Option<f64>,
    pub self_similarity: Vec<SelfSimilarity>,
    pub grid_window: Option<f64>,
    pub grid_cells: usize,
    pub captured_mass: Option<f64>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub samples: Vec<Vec<f64>>,
}

/// Normalized centred partial sums, samples[(N, t) index][path].
pub fn nclt_samples<P: Process + ?Sized>(process: &P, hurst: f64, cfg: &NcltConfig) -> Result<(f64, Vec<Vec<f64>>)> {
    let nmax = *cfg.ns.iter().max().ok_or_else(|| crate::Error::Argument("empty N list".into()))?;
    let mean = process.mean(&NoiseSpec::for_order(cfg.law, process.order()))?;
    let points: Vec<(usize, usize)> = cfg
        .ns
        .iter()
        .flat_map(|&n| cfg.ts.iter().map(move |&t| (n, (n as f64 * t).floor() as usize)))
        .collect();
    let rows = map_paths(process, cfg.law, nmax, cfg.paths, cfg.seed, |x| {
        let mut cum = Vec::with_capacity(x.len() + 1);
        let mut s = 0.0;
        cum.push(0.0);
        for v in x {
            s += v - mean;
            cum.push(s);
        }
        points.iter().map(|&(n, m)| cum[m] / (n as f64).powf(hurst)).collect::<Vec<f64>>()
    });
    let cols = (0..points.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    Ok((mean, cols))
}

pub fn nclt_compare<P: Process + ?Sized>(
    process: &P,
    kernel: &Kernel,
    cfg: &NcltConfig,
    quad: &QuadratureConfig,
) -> Result<NcltReport> {
    let report = validate_ghkb(kernel);
    if !report.valid {
        return arg(format!("kernel is not in the non-central regime: {}", report.failures.join("; ")));
    }
    if process.order() != kernel.arity() {
        return arg("process and kernel orders differ");
    }
    if cfg.ts.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return arg("times must lie in (0, 1]");
    }
    let spec = build_limit_spec(kernel, quad)?;
    let h = spec.hurst;
    let (mean, samples) = nclt_samples(process, h, cfg)?;
    let mut mc = Vec::new();
    let mut idx = 0;
    for &n in &cfg.ns {
        for &t in &cfg.ts {
            mc.push(marginal(t, n, &samples[idx]));
            idx += 1;
        }
    }
    let nmax = *cfg.ns.iter().max().expect("checked");
    let at = |t: f64| mc.iter().find(|m| m.n == nmax && m.t == t);
    let quadrature_var: Vec<(f64, f64)> = cfg
        .ts
        .iter()
        .map(|&t| spec.variance(t, quad).map(|v| (t, v)))
        .collect::<Result<_>>()?;
    let variance_ratio = at(1.0).and_then(|m| quadrature_var.iter().find(|q| q.0 == 1.0).map(|q| m.var / q.1));
    let mut self_similarity = Vec::new();
    if let Some(top) = at(1.0) {
        for &t in cfg.ts.iter().filter(|t| **t < 1.0) {
            let m = at(t).expect("t listed");
            self_similarity.push(SelfSimilarity { t, target: t.powf(2.0 * h), ratio: m.var / top.var });
        }
    }
    let mut limit_sample = Vec::new();
    let mut ks = Vec::new();
    let mut warnings = Vec::new();
    let mut grid_var = Vec::new();
    let mut grid_window = None;
    let mut captured_mass = None;
    if cfg.limit_reps > 0 {
        let grid = DiscretizedChaosGrid::for_spec(&spec, 1.0, &cfg.grid, quad)?;
        warnings.extend(grid.warnings.iter().cloned());
        grid_window = Some(grid.window);
        captured_mass = Some(grid.captured_mass);
        for &t in &cfg.ts {
            let mut v = 0.0;
            for term in &spec.terms {
                v += term.d * term.d * discretized_variance(&term.trace, t, &grid, quad)?;
            }
            grid_var.push((t, v));
        }
        let z = simulate_limit(&spec, &cfg.ts, &grid, cfg.limit_reps, cfg.limit_seed, quad)?;
        for (i, &t) in cfg.ts.iter().enumerate() {
            limit_sample.push(marginal(t, 0, &z.total[i]));
            let mc_idx = cfg.ns.iter().position(|&n| n == nmax).expect("present") * cfg.ts.len() + i;
            ks.push((t, ks_two_sample(&samples[mc_idx], &z.total[i])));
        }
    }
    Ok(NcltReport {
        hurst: h,
        limit: spec.describe(),
        law: cfg.law,
        mean,
        mc,
        quadrature_var,
        limit_sample,
        grid_var,
        ks,
        variance_ratio,
        self_similarity,
        grid_window,
        grid_cells: cfg.grid.cells,
        captured_mass,
        warnings,
        samples,
    })
}
