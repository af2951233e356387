use crate::combinatorics::Partition;
use crate::error::{arg, Error, Result};
use crate::kernel::Kernel;

/// Memory guard on the dense table, in entries.
pub const MAX_TABLE_ENTRIES: usize = 100_000_000;

/// Coefficients a(i) on {1..M}^k, last index contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedKernel {
    k: usize,
    m: usize,
    values: Vec<f64>,
    source: Option<Kernel>,
    symmetric: bool,
}

fn table_len(k: usize, m: usize) -> Result<usize> {
    let mut n: usize = 1;
    for _ in 0..k {
        n = n
            .checked_mul(m)
            .filter(|n| *n <= MAX_TABLE_ENTRIES)
            .ok_or_else(|| {
                Error::Resource(format!(
                    "M^k = {m}^{k} exceeds the {MAX_TABLE_ENTRIES}-entry table guard; use a smaller M or k"
                ))
            })?;
    }
    Ok(n)
}

impl TruncatedKernel {
    pub fn from_kernel(g: &Kernel, m: usize) -> Result<Self> {
        let k = g.arity();
        let mut t = Self::from_fn(k, m, |i| {
            let x: Vec<f64> = i.iter().map(|&v| v as f64).collect();
            g.value(&x)
        })?;
        t.source = Some(g.clone());
        t.symmetric = g.is_symmetric();
        Ok(t)
    }

    pub fn from_fn<F: FnMut(&[usize]) -> f64>(k: usize, m: usize, mut f: F) -> Result<Self> {
        if k == 0 || m == 0 {
            return arg("truncated kernels need k >= 1 and M >= 1");
        }
        let n = table_len(k, m)?;
        let mut values = Vec::with_capacity(n);
        let mut idx = vec![1usize; k];
        for _ in 0..n {
            values.push(f(&idx));
            for pos in (0..k).rev() {
                if idx[pos] < m {
                    idx[pos] += 1;
                    break;
                }
                idx[pos] = 1;
            }
        }
        let mut t = Self { k, m, values, source: None, symmetric: false };
        t.symmetric = t.check_symmetry(0.0);
        Ok(t)
    }

    /// A table declared symmetric is checked exactly.
    pub fn from_values(k: usize, m: usize, values: Vec<f64>, symmetric: bool) -> Result<Self> {
        let n = table_len(k, m)?;
        if values.len() != n {
            return arg(format!("expected {n} values, got {}", values.len()));
        }
        let t = Self { k, m, values, source: None, symmetric };
        if symmetric && !t.check_symmetry(0.0) {
            return arg("table flagged symmetric is not permutation invariant");
        }
        Ok(t)
    }

    pub fn zero(k: usize, m: usize) -> Result<Self> {
        Self::from_values(k, m, vec![0.0; table_len(k, m)?], true)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> Option<&Kernel> {
        self.source.as_ref()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Flat offset of the 1-based multi-index i.
    #[inline]
    pub fn offset(&self, i: &[usize]) -> usize {
        i.iter().fold(0, |acc, &v| acc * self.m + (v - 1))
    }

    #[inline]
    pub fn get(&self, i: &[usize]) -> f64 {
        self.values[self.offset(i)]
    }

    /// a_π at the given block values.
    pub fn get_pi(&self, pi: &Partition, block_values: &[usize]) -> f64 {
        self.get(&pi.assemble(block_values))
    }

    fn check_symmetry(&self, rel_tol: f64) -> bool {
        let mut idx = vec![1usize; self.k];
        let mut sorted = vec![0usize; self.k];
        for n in 0..self.values.len() {
            sorted.copy_from_slice(&idx);
            sorted.sort_unstable();
            let a = self.values[n];
            let b = self.get(&sorted);
            if (a - b).abs() > rel_tol * a.abs().max(b.abs()) {
                return false;
            }
            for pos in (0..self.k).rev() {
                if idx[pos] < self.m {
                    idx[pos] += 1;
                    break;
                }
                idx[pos] = 1;
            }
        }
        true
    }

    /// Exactly symmetric table: every orbit gets the mean of its entries.
    pub fn symmetrize(&self) -> TruncatedKernel {
        if self.symmetric {
            return self.clone();
        }
        let mut sums = std::collections::HashMap::<Vec<usize>, (f64, usize)>::new();
        let mut idx = vec![1usize; self.k];
        let mut all = Vec::with_capacity(self.values.len());
        for n in 0..self.values.len() {
            let mut s = idx.clone();
            s.sort_unstable();
            let e = sums.entry(s.clone()).or_insert((0.0, 0));
            e.0 += self.values[n];
            e.1 += 1;
            all.push(s);
            for pos in (0..self.k).rev() {
                if idx[pos] < self.m {
                    idx[pos] += 1;
                    break;
                }
                idx[pos] = 1;
            }
        }
        let values = all.iter().map(|s| {
            let (sum, c) = sums[s];
            sum / c as f64
        });
        TruncatedKernel {
            k: self.k,
            m: self.m,
            values: values.collect(),
            source: self.source.as_ref().and_then(|g| g.symmetrized().ok()),
            symmetric: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_values_are_exact() {
        let g = Kernel::power_sum(3, -1.7);
        let t = TruncatedKernel::from_kernel(&g, 5).unwrap();
        assert_eq!(t.get(&[2, 5, 1]), g.eval(&[2.0, 5.0, 1.0]).unwrap());
        assert!(t.is_symmetric());
        assert_eq!(t.offset(&[1, 1, 2]), 1);
    }

    #[test]
    fn guard_and_symmetrization() {
        assert!(matches!(TruncatedKernel::zero(3, 1000), Err(Error::Resource(_))));
        let t = TruncatedKernel::from_fn(2, 3, |i| (i[0] * 10 + i[1]) as f64).unwrap();
        assert!(!t.is_symmetric());
        let s = t.symmetrize();
        assert_eq!(s.get(&[1, 2]), 16.5);
        assert_eq!(s.get(&[2, 1]), 16.5);
        assert!(TruncatedKernel::from_values(2, 2, vec![1.0, 2.0, 3.0, 4.0], true).is_err());
    }
}
