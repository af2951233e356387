use serde::Serialize;

use super::TruncatedKernel;
use crate::combinatorics::{enumerate_partitions, Partition};
use crate::error::{arg, Result};
use crate::mc::fit_loglog_slope;

pub const ADVISORY: &str = "advisory: the square-summability conditions concern infinite sums; \
on a finite table only the growth of partial sums with the horizon can be observed";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    /// Σ′ a_π(i)² over all blocks.
    Squares,
    /// Σ′ over the free blocks of [(S′_T |a_π|)]², or S′_T |a_π| itself
    /// when T covers every block.
    Contracted,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionTrace {
    pub kind: ConditionKind,
    pub partition: String,
    pub t_set: Vec<usize>,
    pub partial_sums: Vec<f64>,
    /// Log-log slope of the increments rescaled by Δ ln ln M.
    pub growth_slope: Option<f64>,
    pub divergent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct L2Report {
    pub note: String,
    pub method: String,
    pub passes: bool,
    pub horizons: Vec<usize>,
    pub gammas: Option<Vec<f64>>,
    pub conditions: Vec<ConditionTrace>,
}

impl L2Report {
    pub fn flagged(&self) -> impl Iterator<Item = &ConditionTrace> {
        self.conditions.iter().filter(|c| c.divergent)
    }
}

/// Product bound |a(i)| ≤ ∏ i_j^{γ_j}: every γ_j < −1/2 suffices.
pub fn check_l2_power_bound(gammas: &[f64]) -> L2Report {
    let ok = !gammas.is_empty() && gammas.iter().all(|&g| g < -0.5);
    L2Report {
        note: if ok {
            "all exponents below -1/2: the form is well defined".into()
        } else {
            "some exponent is >= -1/2: the product bound alone is inconclusive".into()
        },
        method: "power-bound".into(),
        passes: ok,
        horizons: Vec::new(),
        gammas: Some(gammas.to_vec()),
        conditions: Vec::new(),
    }
}

/// Partial-sum diagnostics on the nested horizons M, M/2, M/4, … ≥ 2.
pub fn check_l2_conditions(kernel: &TruncatedKernel) -> Result<L2Report> {
    let mut hs = Vec::new();
    let mut h = kernel.m();
    while h >= 2 {
        hs.push(h);
        h /= 2;
    }
    hs.reverse();
    check_l2_conditions_fn(kernel.k(), |i| kernel.get(i), &hs)
}

/// Partial-sum diagnostics for a coefficient function with 1-based indices.
pub fn check_l2_conditions_fn<F: Fn(&[usize]) -> f64>(k: usize, a: F, horizons: &[usize]) -> Result<L2Report> {
    if horizons.is_empty() || horizons.windows(2).any(|w| w[0] >= w[1]) || horizons[0] < 2 {
        return arg("horizons must be increasing and at least 2");
    }
    let mut conditions = Vec::new();
    for pi in enumerate_partitions(k)? {
        let sizes = pi.sizes();
        let m = pi.m();
        let eligible: Vec<usize> = (0..m).filter(|&t| sizes[t] >= 2).collect();
        let mut sets: Vec<Option<Vec<usize>>> = vec![None];
        for mask in 1u32..(1 << eligible.len()) {
            let t: Vec<usize> = (0..eligible.len())
                .filter(|b| mask & (1 << b) != 0)
                .map(|b| eligible[b] + 1)
                .collect();
            sets.push(Some(t));
        }
        for t in sets {
            let sums: Vec<f64> = horizons
                .iter()
                .map(|&h| match &t {
                    None => squares(&a, &pi, h),
                    Some(t) => contracted(&a, &pi, t, h),
                })
                .collect();
            let (growth_slope, divergent) = growth(horizons, &sums);
            conditions.push(ConditionTrace {
                kind: if t.is_none() { ConditionKind::Squares } else { ConditionKind::Contracted },
                partition: pi.to_string(),
                t_set: t.unwrap_or_default(),
                partial_sums: sums,
                growth_slope,
                divergent,
            });
        }
    }
    Ok(L2Report {
        note: ADVISORY.into(),
        method: "partial-sums".into(),
        passes: conditions.iter().all(|c| !c.divergent),
        horizons: horizons.to_vec(),
        gammas: None,
        conditions,
    })
}

fn growth(hs: &[usize], sums: &[f64]) -> (Option<f64>, bool) {
    let scale = sums.last().copied().unwrap_or(0.0).abs();
    let mut pts = Vec::new();
    let mut last = 0.0;
    for w in 1..hs.len() {
        let (m0, m1) = (hs[w - 1] as f64, hs[w] as f64);
        let inc = sums[w] - sums[w - 1];
        last = inc;
        if inc > 1e-14 * scale {
            pts.push((m1, inc / (m1.ln() / m0.ln()).ln()));
        }
    }
    if last <= 1e-14 * scale {
        return (None, false);
    }
    match fit_loglog_slope(&pts) {
        Ok(fit) => (Some(fit.slope), fit.slope >= 0.0),
        Err(_) => (None, false),
    }
}

/// Calls `f` on every tuple in {1..h}^n with distinct entries that avoid `used`.
fn distinct<F: FnMut(&[usize])>(n: usize, h: usize, used: &mut [bool], buf: &mut Vec<usize>, f: &mut F) {
    if buf.len() == n {
        f(buf);
        return;
    }
    for v in 1..=h {
        if used[v] {
            continue;
        }
        used[v] = true;
        buf.push(v);
        distinct(n, h, used, buf, f);
        buf.pop();
        used[v] = false;
    }
}

fn squares<F: Fn(&[usize]) -> f64>(a: &F, pi: &Partition, h: usize) -> f64 {
    let mut used = vec![false; h + 1];
    let mut s = 0.0;
    distinct(pi.m(), h, &mut used, &mut Vec::new(), &mut |v| {
        let x = a(&pi.assemble(v));
        s += x * x;
    });
    s
}

fn contracted<F: Fn(&[usize]) -> f64>(a: &F, pi: &Partition, t_set: &[usize], h: usize) -> f64 {
    let m = pi.m();
    let free_slots: Vec<usize> = (0..m).filter(|t| !t_set.contains(&(t + 1))).collect();
    let t_slots: Vec<usize> = t_set.iter().map(|t| t - 1).collect();
    let mut used = vec![false; h + 1];
    let mut values = vec![0usize; m];
    let mut outer = 0.0;
    let mut free_buf = Vec::new();
    distinct(free_slots.len(), h, &mut used.clone(), &mut free_buf, &mut |fv| {
        for (s, &v) in free_slots.iter().zip(fv) {
            values[*s] = v;
            used[v] = true;
        }
        let mut inner = 0.0;
        distinct(t_slots.len(), h, &mut used, &mut Vec::new(), &mut |tv| {
            let mut vals = values.clone();
            for (s, &v) in t_slots.iter().zip(tv) {
                vals[*s] = v;
            }
            inner += a(&pi.assemble(&vals)).abs();
        });
        for &v in fv {
            used[v] = false;
        }
        outer += if free_slots.is_empty() { inner } else { inner * inner };
    });
    outer
}

/// a(i₁, i₂) = (i₁ + i₂)^{-1} (ln i₂)^{-1}, with the undefined column i₂ = 1 set to zero.
pub fn log_counterexample(i: &[usize]) -> f64 {
    if i[1] < 2 {
        0.0
    } else {
        1.0 / ((i[0] + i[1]) as f64 * (i[1] as f64).ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_bound() {
        assert!(check_l2_power_bound(&[-0.6, -0.6]).passes);
        assert!(!check_l2_power_bound(&[-0.6, -0.4]).passes);
    }

    #[test]
    fn finite_support_passes() {
        let a = TruncatedKernel::from_fn(2, 64, |i| if i[0] <= 3 && i[1] <= 3 { 1.0 } else { 0.0 }).unwrap();
        let r = check_l2_conditions(&a).unwrap();
        assert!(r.passes);
        assert!(r.note.starts_with("advisory"));
        assert_eq!(r.conditions.len(), 3);
    }

    #[test]
    fn constant_kernel_is_flagged() {
        let a = TruncatedKernel::from_fn(2, 64, |_| 1.0).unwrap();
        let r = check_l2_conditions(&a).unwrap();
        assert!(r.conditions.iter().all(|c| c.divergent));
    }

    #[test]
    fn contracted_matches_brute_force() {
        let f = |i: &[usize]| 1.0 / (i[0] + 2 * i[1] + 3 * i[2]) as f64;
        let pi: Partition = "{{1,2},{3}}".parse().unwrap();
        let h = 5;
        let got = contracted(&f, &pi, &[1], h);
        let mut want = 0.0;
        for free in 1..=h {
            let inner: f64 = (1..=h).filter(|&v| v != free).map(|v| f(&[v, v, free])).sum();
            want += inner * inner;
        }
        assert!((got - want).abs() < 1e-12 * want);
    }
}
