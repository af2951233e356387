use super::TruncatedKernel;
use crate::combinatorics::{appell_family, TermIndex};
use crate::error::{arg, Result};
use crate::mc::NoiseSpec;

/// Per-term paths X_π^j(1..=n) from an innovation record laid out as in
/// [`super::VolterraPath`]. Summation over each term's indices is strictly
/// off-diagonal.
pub fn decompose_path(
    kernel: &TruncatedKernel,
    noise: &NoiseSpec,
    eps: &[f64],
    n: usize,
    terms: &[TermIndex],
) -> Result<Vec<Vec<f64>>> {
    let k = kernel.k();
    let m = kernel.m();
    if !kernel.is_symmetric() {
        return arg("decomposition needs a symmetric kernel; symmetrize it first");
    }
    if eps.len() < n + m {
        return arg(format!("record of length {} is shorter than N + M = {}", eps.len(), n + m));
    }
    for t in terms {
        if t.k() != k {
            return arg(format!("term {} has order {}, kernel has {k}", t.partition, t.k()));
        }
        let sizes = t.partition.sizes();
        if t.j.iter().zip(&sizes).any(|(&j, &p)| j > p || (j == 0 && p < 2)) || t.j.iter().all(|&j| j == 0) {
            return arg(format!("term ({}, {:?}) is not admissible", t.partition, t.j));
        }
    }
    let family = appell_family(&noise.moments, k)?;
    // appell[j][q] = A_j(eps[q])
    let appell: Vec<Vec<f64>> = (0..=k).map(|j| eps.iter().map(|&e| family.eval(j, e)).collect()).collect();
    let mut out = Vec::with_capacity(terms.len());
    for term in terms {
        let mut path = vec![0.0; n];
        if term.c != 0.0 {
            let mut st = State {
                kernel,
                term,
                appell: &appell,
                used: vec![false; m + 1],
                values: vec![0; term.m()],
            };
            for (t, slot) in path.iter_mut().enumerate() {
                // ε_{n−i} sits at eps[n − i + M − 1]
                let base = t + 1 + m - 1;
                *slot = term.c * st.sum(0, 1.0, base);
            }
        }
        out.push(path);
    }
    Ok(out)
}

struct State<'a> {
    kernel: &'a TruncatedKernel,
    term: &'a TermIndex,
    appell: &'a [Vec<f64>],
    used: Vec<bool>,
    values: Vec<usize>,
}

impl State<'_> {
    fn sum(&mut self, pos: usize, weight: f64, base: usize) -> f64 {
        if pos == self.values.len() {
            return weight * self.kernel.get_pi(&self.term.partition, &self.values);
        }
        let j = self.term.j[pos];
        let mut s = 0.0;
        for v in 1..=self.kernel.m() {
            if self.used[v] {
                continue;
            }
            let w = if j == 0 { weight } else { weight * self.appell[j][base - v] };
            if w == 0.0 {
                continue;
            }
            self.used[v] = true;
            self.values[pos] = v;
            s += self.sum(pos + 1, w, base);
            self.used[v] = false;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{enumerate_terms, Partition};
    use crate::mc::{derive_stream, NoiseLaw};
    use crate::sim::{eval_from_record, exact_mean, simulate_path};

    #[test]
    fn second_order_split() {
        let a = TruncatedKernel::from_fn(2, 4, |i| 1.0 / (i[0] + i[1]) as f64).unwrap();
        let noise = NoiseSpec::for_order(NoiseLaw::Exponential, 2);
        let p = simulate_path(&a, NoiseLaw::Exponential, 12, 5, 0).unwrap();
        let terms = enumerate_terms(2, &noise.moments).unwrap();
        let parts = decompose_path(&a, &noise, &p.eps, 12, &terms).unwrap();
        let mean = exact_mean(&a, &noise).unwrap();
        for n in 0..12 {
            let s: f64 = parts.iter().map(|q| q[n]).sum();
            assert!((s - (p.x[n] - mean)).abs() < 1e-12 * (1.0 + p.x[n].abs()));
        }
    }

    #[test]
    fn zero_coefficient_term_is_zero() {
        let a = TruncatedKernel::from_fn(3, 3, |_| 1.0).unwrap();
        let noise = NoiseSpec::for_order(NoiseLaw::Gaussian, 3);
        let t = TermIndex::new("{{1,2,3}}".parse::<Partition>().unwrap(), vec![2], &noise.moments).unwrap();
        assert_eq!(t.c, 0.0);
        let eps = crate::mc::sample_noise(NoiseLaw::Gaussian, &mut derive_stream(1, &[]), 13);
        let parts = decompose_path(&a, &noise, &eps, 10, &[t]).unwrap();
        assert!(parts[0].iter().all(|v| *v == 0.0));
        let _ = eval_from_record(&a, &eps, 10).unwrap();
    }

    #[test]
    fn rejects_asymmetric_and_inadmissible() {
        let a = TruncatedKernel::from_fn(2, 3, |i| i[0] as f64).unwrap();
        let noise = NoiseSpec::for_order(NoiseLaw::Gaussian, 2);
        let terms = enumerate_terms(2, &noise.moments).unwrap();
        assert!(decompose_path(&a, &noise, &[0.0; 20], 5, &terms).is_err());
        let s = a.symmetrize();
        let bad = TermIndex {
            partition: "{{1},{2}}".parse().unwrap(),
            j: vec![0, 1],
            c: 0.0,
        };
        assert!(decompose_path(&s, &noise, &[0.0; 20], 5, &[bad]).is_err());
    }
}
