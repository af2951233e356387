use ndarray::{Array1, Array2, ArrayView1};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::spec::LimitSpec;
use crate::error::{arg, Error, Result};
use crate::kernel::{eval_h_t, l2_norm_h_t, TraceKernel};
use crate::mc::derive_stream;
use crate::quad::QuadratureConfig;

/// Dense coefficient tensors are limited to this many entries.
pub const MAX_TENSOR_ENTRIES: usize = 100_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct GridConfig {
    /// Total number of cells.
    pub cells: usize,
    /// Share of the cells spent on the uniform part [−t_max, t_max].
    pub fine_fraction: f64,
    /// Lower bound on the captured share of ‖h_t‖².
    pub capture: f64,
    /// Upper limit on the window depth W.
    pub max_window: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            cells: 4096,
            fine_fraction: 0.75,
            capture: 0.995,
            max_window: 1e12,
        }
    }
}

/// Cells on [−W, t_max]: uniform on [−t_max, t_max], geometrically growing
/// below −t_max.
#[derive(Clone, Debug, Serialize)]
pub struct DiscretizedChaosGrid {
    pub edges: Vec<f64>,
    pub t_max: f64,
    pub fine_step: f64,
    pub window: f64,
    pub growth: f64,
    /// Lower bound on the captured share of ‖h_{t_max}‖², smallest over terms.
    pub captured_mass: f64,
    pub warnings: Vec<String>,
}

impl DiscretizedChaosGrid {
    pub fn new(cells: usize, t_max: f64, window: f64, fine_fraction: f64) -> Result<Self> {
        if !(t_max > 0.0) || !(window > t_max) {
            return arg("the grid needs 0 < t_max < W");
        }
        if !(fine_fraction > 0.0 && fine_fraction < 1.0) {
            return arg("fine_fraction must lie in (0, 1)");
        }
        let n_fine = (((cells as f64) * fine_fraction / 2.0).round() as usize * 2).max(2);
        if n_fine >= cells {
            return arg(format!("{cells} cells leave nothing for the outer window"));
        }
        let n_geo = cells - n_fine;
        let step = 2.0 * t_max / n_fine as f64;
        let depth = window - t_max;
        // widths step·q^j, j = 1..=n_geo, summing to depth
        let total = |q: f64| {
            if (q - 1.0).abs() < 1e-15 {
                step * n_geo as f64
            } else {
                step * q * (q.powi(n_geo as i32) - 1.0) / (q - 1.0)
            }
        };
        let growth = if total(1.0) >= depth {
            1.0
        } else {
            let (mut lo, mut hi) = (1.0, 2.0);
            while total(hi) < depth {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if total(mid) < depth {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let mut edges = Vec::with_capacity(cells + 1);
        if growth == 1.0 {
            let w = depth / n_geo as f64;
            for j in (1..=n_geo).rev() {
                edges.push(-t_max - w * j as f64);
            }
        } else {
            let mut outer = Vec::with_capacity(n_geo);
            let mut pos = -t_max;
            let mut width = step;
            for _ in 0..n_geo {
                width *= growth;
                pos -= width;
                outer.push(pos);
            }
            *outer.last_mut().expect("n_geo >= 1") = -window;
            edges.extend(outer.into_iter().rev());
        }
        for j in 0..=n_fine {
            edges.push(-t_max + j as f64 * step);
        }
        edges[cells] = t_max;
        Ok(Self {
            edges,
            t_max,
            fine_step: step,
            window,
            growth,
            captured_mass: f64::NAN,
            warnings: Vec::new(),
        })
    }

    /// Window chosen so every term keeps at least `cfg.capture` of its mass
    /// at t_max, from the tail bound |g_r(x)| ≤ C ‖x‖₁^{α+r}.
    pub fn for_spec(spec: &LimitSpec, t_max: f64, cfg: &GridConfig, quad: &QuadratureConfig) -> Result<Self> {
        let two_h = 2.0 * spec.hurst;
        let mut window: f64 = 2.0 * t_max;
        let mut bounds = Vec::new();
        for term in &spec.terms {
            let d = term.order;
            let c = bound_constant(&term.trace)?;
            let norm = l2_norm_h_t(&term.trace, t_max, quad)?.value;
            let fact: f64 = (1..d).map(|x| x as f64).product();
            let scale = t_max * t_max * c * c / (fact * (2.0 - two_h));
            let w = ((1.0 - cfg.capture) * norm / scale).powf(1.0 / (two_h - 2.0));
            window = window.max(w);
            bounds.push((scale, norm));
        }
        let mut warnings = Vec::new();
        if window > cfg.max_window {
            warnings.push(format!(
                "window {window:e} exceeds the limit {:e}; mass capture is below target",
                cfg.max_window
            ));
            window = cfg.max_window;
        }
        let captured = bounds
            .iter()
            .map(|(scale, norm)| 1.0 - scale * window.powf(two_h - 2.0) / norm)
            .fold(1.0, f64::min);
        let mut g = Self::new(cfg.cells, t_max, window, cfg.fine_fraction)?;
        if captured < cfg.capture {
            warnings.push(format!("captured mass estimate {captured:.4} below {}", cfg.capture));
        }
        g.captured_mass = captured;
        g.warnings = warnings;
        Ok(g)
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Checks that t ∈ [0, t_max] falls on a cell edge.
    pub fn check_aligned(&self, t: f64) -> Result<()> {
        if !(0.0..=self.t_max).contains(&t) {
            return arg(format!("t = {t} outside [0, {}]", self.t_max));
        }
        let j = (t + self.t_max) / self.fine_step;
        if (j - j.round()).abs() > 1e-6 {
            return arg(format!("t = {t} is not on a grid edge (step {})", self.fine_step));
        }
        Ok(())
    }

    /// Gaussian increments ΔB for replication `rep`.
    pub fn increments(&self, seed: u64, rep: u64) -> Vec<f64> {
        let mut s = derive_stream(seed, &[rep]);
        self.widths()
            .iter()
            .map(|w| {
                let z: f64 = StandardNormal.sample(&mut s);
                w.sqrt() * z
            })
            .collect()
    }
}

/// max |g_r(x)| / ‖x‖₁^{α+r} over a simplex lattice.
fn bound_constant(trace: &TraceKernel) -> Result<f64> {
    if let Some(c) = trace.closed_coefficient() {
        return Ok(c.abs());
    }
    let d = trace.arity();
    let n = match d {
        1 => 1,
        2 => 200,
        3 => 40,
        _ => 12,
    };
    let mut best: f64 = 0.0;
    let mut m = vec![0usize; d];
    let denom = n as f64 + d as f64 / 2.0;
    fn rec(pos: usize, left: usize, m: &mut [usize], denom: f64, t: &TraceKernel, best: &mut f64) -> Result<()> {
        let d = m.len();
        if pos == d - 1 {
            m[pos] = left;
            let x: Vec<f64> = m.iter().map(|v| (*v as f64 + 0.5) / denom).collect();
            let norm: f64 = x.iter().sum();
            *best = best.max(t.eval(&x)?.abs() / norm.powf(t.alpha()));
            return Ok(());
        }
        for v in 0..=left {
            m[pos] = v;
            rec(pos + 1, left - v, m, denom, t, best)?;
        }
        Ok(())
    }
    rec(0, n, &mut m, denom, trace, &mut best)?;
    Ok(best)
}

/// h_t at cell centres with every diagonal entry zeroed, laid out with the
/// last index contiguous.
fn coefficient_tensor(trace: &TraceKernel, t: f64, grid: &DiscretizedChaosGrid, quad: &QuadratureConfig) -> Result<Vec<f64>> {
    let d = trace.arity();
    let g = grid.cells();
    let size = (0..d).try_fold(1usize, |acc, _| acc.checked_mul(g).filter(|n| *n <= MAX_TENSOR_ENTRIES));
    let size = size.ok_or_else(|| {
        Error::Resource(format!(
            "a {g}^{d} coefficient tensor exceeds {MAX_TENSOR_ENTRIES} entries; use fewer cells"
        ))
    })?;
    let centers = grid.centers();
    // only cells below t carry mass
    let active = centers.iter().take_while(|c| **c < t).count();
    let mut h = vec![0.0; size];
    let mut idx = vec![0usize; d];
    let mut y = vec![0.0; d];
    let symmetric = trace.is_symmetric();
    fill(trace, t, quad, &centers, active, symmetric, 0, &mut idx, &mut y, &mut h, g)?;
    if let Some(bad) = h.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric {
            message: format!("h_t evaluation returned {bad}"),
            estimate: f64::INFINITY,
        });
    }
    Ok(h)
}

#[allow(clippy::too_many_arguments)]
fn fill(
    trace: &TraceKernel,
    t: f64,
    quad: &QuadratureConfig,
    centers: &[f64],
    active: usize,
    symmetric: bool,
    pos: usize,
    idx: &mut [usize],
    y: &mut [f64],
    h: &mut [f64],
    g: usize,
) -> Result<()> {
    let d = idx.len();
    if pos == d {
        let mut distinct = true;
        for a in 0..d {
            for b in 0..a {
                distinct &= idx[a] != idx[b];
            }
        }
        if !distinct {
            return Ok(());
        }
        let off = idx.iter().fold(0, |acc, &v| acc * g + v);
        if h[off] != 0.0 {
            return Ok(());
        }
        let v = eval_h_t(trace, t, y, quad)?;
        if symmetric && d > 1 {
            let mut perm = idx.to_vec();
            crate::kernel::for_each_permutation(&mut perm, &mut |p| {
                h[p.iter().fold(0, |acc, &v| acc * g + v)] = v;
            });
        } else {
            h[off] = v;
        }
        return Ok(());
    }
    for c in 0..active {
        idx[pos] = c;
        y[pos] = centers[c];
        fill(trace, t, quad, centers, active, symmetric, pos + 1, idx, y, h, g)?;
    }
    Ok(())
}

/// Exact variance d!·Σ′ h̃(c)² ∏ w_{c_j} of the discretized chaos at time t
/// under Gaussian increments, h̃ the symmetrized tensor.
pub fn discretized_variance(
    trace: &TraceKernel,
    t: f64,
    grid: &DiscretizedChaosGrid,
    quad: &QuadratureConfig,
) -> Result<f64> {
    grid.check_aligned(t)?;
    let d = trace.arity();
    if t == 0.0 {
        return Ok(0.0);
    }
    let g = grid.cells();
    let h = coefficient_tensor(trace, t, grid, quad)?;
    let w = grid.widths();
    let mut idx = vec![0usize; d];
    let mut total = 0.0;
    let mut fact = 1.0;
    for j in 2..=d {
        fact *= j as f64;
    }
    for (off, &v) in h.iter().enumerate() {
        let mut r = off;
        for pos in (0..d).rev() {
            idx[pos] = r % g;
            r /= g;
        }
        let sym = if trace.is_symmetric() || d == 1 {
            v
        } else {
            let mut acc = 0.0;
            let mut perm = idx.clone();
            crate::kernel::for_each_permutation(&mut perm, &mut |p| {
                acc += h[p.iter().fold(0, |a, &c| a * g + c)];
            });
            acc / fact
        };
        if sym != 0.0 {
            total += sym * sym * idx.iter().map(|&c| w[c]).product::<f64>();
        }
    }
    Ok(fact * total)
}

const BATCH: usize = 256;

/// Σ′ h(c) ∏ ΔB_{c_j} for each replication, from a diagonal-free tensor.
fn contract_batch(h: &[f64], d: usize, g: usize, incs: &Array2<f64>) -> Vec<f64> {
    let nb = incs.ncols();
    if d == 1 {
        let hv = ArrayView1::from(h);
        return (0..nb).map(|j| hv.dot(&incs.column(j))).collect();
    }
    let rows = h.len() / g;
    let hm = ndarray::ArrayView2::from_shape((rows, g), h).expect("tensor is g^d");
    let first = hm.dot(incs);
    (0..nb)
        .map(|j| {
            let b = incs.column(j);
            let mut v: Array1<f64> = first.column(j).to_owned();
            let mut len = rows;
            while len > 1 {
                len /= g;
                let m = ndarray::ArrayView2::from_shape((len, g), v.as_slice().expect("contiguous")).expect("shape");
                v = m.dot(&b);
            }
            v[0]
        })
        .collect()
}

/// Samples of Z_d(t) for each t, all sharing one increment record per
/// replication. Returns samples[t][rep].
pub fn simulate_hermite(
    trace: &TraceKernel,
    ts: &[f64],
    grid: &DiscretizedChaosGrid,
    reps: usize,
    seed: u64,
    quad: &QuadratureConfig,
) -> Result<Vec<Vec<f64>>> {
    let out = simulate_terms(&[(1.0, trace)], ts, grid, reps, seed, quad)?;
    Ok(out.into_iter().next().expect("one term"))
}

/// Per-term samples [term][t][rep] of Σ′ h_t ΔB⊗…⊗ΔB, unweighted.
fn simulate_terms(
    terms: &[(f64, &TraceKernel)],
    ts: &[f64],
    grid: &DiscretizedChaosGrid,
    reps: usize,
    seed: u64,
    quad: &QuadratureConfig,
) -> Result<Vec<Vec<Vec<f64>>>> {
    for &t in ts {
        grid.check_aligned(t)?;
    }
    let g = grid.cells();
    let mut out = vec![vec![Vec::with_capacity(reps); ts.len()]; terms.len()];
    let mut tensors = Vec::new();
    for (_, trace) in terms {
        let d = trace.arity();
        if d == 0 {
            return arg("order-zero terms are not simulated");
        }
        let mut per_t = Vec::new();
        for &t in ts {
            per_t.push(if t == 0.0 { None } else { Some(coefficient_tensor(trace, t, grid, quad)?) });
        }
        tensors.push((d, per_t));
    }
    let mut start = 0;
    while start < reps {
        let nb = BATCH.min(reps - start);
        let mut incs = Array2::<f64>::zeros((g, nb));
        for j in 0..nb {
            let col = grid.increments(seed, (start + j) as u64);
            incs.column_mut(j).assign(&Array1::from(col));
        }
        for (ti, (d, per_t)) in tensors.iter().enumerate() {
            for (si, h) in per_t.iter().enumerate() {
                match h {
                    None => out[ti][si].extend(std::iter::repeat_n(0.0, nb)),
                    Some(h) => out[ti][si].extend(contract_batch(h, *d, g, &incs)),
                }
            }
        }
        start += nb;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct LimitSample {
    pub ts: Vec<f64>,
    /// [term][t][rep], each already multiplied by d_{k,r}
    pub per_term: Vec<Vec<Vec<f64>>>,
    /// [t][rep]
    pub total: Vec<Vec<f64>>,
}

/// Z(t) for a limit specification, every term driven by the same increments.
pub fn simulate_limit(
    spec: &LimitSpec,
    ts: &[f64],
    grid: &DiscretizedChaosGrid,
    reps: usize,
    seed: u64,
    quad: &QuadratureConfig,
) -> Result<LimitSample> {
    let terms: Vec<(f64, &TraceKernel)> = spec.terms.iter().map(|t| (t.d, &t.trace)).collect();
    let mut per_term = simulate_terms(&terms, ts, grid, reps, seed, quad)?;
    for (ti, (d, _)) in terms.iter().enumerate() {
        for s in per_term[ti].iter_mut() {
            for v in s.iter_mut() {
                *v *= d;
            }
        }
    }
    let total = (0..ts.len())
        .map(|si| (0..reps).map(|r| per_term.iter().map(|p| p[si][r]).sum()).collect())
        .collect();
    Ok(LimitSample { ts: ts.to_vec(), per_term, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{trace_kernel, Kernel};

    #[test]
    fn grid_shape() {
        let g = DiscretizedChaosGrid::new(64, 1.0, 1e4, 0.75).unwrap();
        assert_eq!(g.cells(), 64);
        assert!((g.edges[0] + 1e4).abs() < 1e-9);
        assert_eq!(g.edges[64], 1.0);
        assert!(g.widths().iter().all(|w| *w > 0.0));
        assert!(g.check_aligned(0.5).is_ok());
        assert!(g.check_aligned(0.51).is_err());
    }

    #[test]
    fn zero_time_is_zero() {
        let q = QuadratureConfig::default();
        let tr = trace_kernel(&Kernel::power_sum(2, -1.2), 0, &q).unwrap();
        let g = DiscretizedChaosGrid::new(64, 1.0, 100.0, 0.75).unwrap();
        let s = simulate_hermite(&tr, &[0.0, 1.0], &g, 10, 1, &q).unwrap();
        assert!(s[0].iter().all(|v| *v == 0.0));
        assert!(s[1].iter().any(|v| *v != 0.0));
    }

    #[test]
    fn batching_matches_direct_off_diagonal_sum() {
        let q = QuadratureConfig::default();
        let tr = trace_kernel(&Kernel::power_sum(3, -1.7), 0, &q).unwrap();
        let g = DiscretizedChaosGrid::new(12, 1.0, 20.0, 0.5).unwrap();
        let s = simulate_hermite(&tr, &[1.0], &g, 3, 9, &q).unwrap();
        let c = g.centers();
        for rep in 0..3 {
            let b = g.increments(9, rep as u64);
            let mut want = 0.0;
            for i in 0..12 {
                for j in 0..12 {
                    for k in 0..12 {
                        if i != j && j != k && i != k {
                            want += eval_h_t(&tr, 1.0, &[c[i], c[j], c[k]], &q).unwrap() * b[i] * b[j] * b[k];
                        }
                    }
                }
            }
            assert!((s[0][rep] - want).abs() < 1e-10 * (1.0 + want.abs()));
        }
    }
}
