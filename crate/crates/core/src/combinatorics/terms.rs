use num_traits::Zero;
use serde::Serialize;

use super::coeff::c_coeff_exact;
use super::moments::{rat_to_f64, MomentVector};
use super::partition::{enumerate_partitions, Partition};
use crate::error::{arg, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// m + r = k: survives the N^{-H} normalization.
    #[serde(rename = "LRD")]
    LongMemory,
    /// m + r < k: summable autocovariance.
    #[serde(rename = "SRD")]
    ShortMemory,
}

/// One off-diagonal term X_π^j: a partition and an Appell order per block.
#[derive(Clone, Debug, PartialEq)]
pub struct TermIndex {
    pub partition: Partition,
    pub j: Vec<usize>,
    pub c: f64,
}

impl TermIndex {
    pub fn new(partition: Partition, j: Vec<usize>, moments: &MomentVector) -> Result<Self> {
        let sizes = partition.sizes();
        if j.len() != sizes.len() {
            return arg("one Appell order per block is required");
        }
        if j.iter().all(|&x| x == 0) {
            return arg("the all-zero order vector is not a term");
        }
        if let Some(t) = (0..j.len()).find(|&t| j[t] == 0 && sizes[t] < 2) {
            return arg(format!("block {} is a singleton with order 0", t + 1));
        }
        let c = c_coeff_exact(&sizes, &j, moments)?;
        Ok(Self {
            partition,
            j,
            c: rat_to_f64(&c),
        })
    }

    pub fn k(&self) -> usize {
        self.partition.k()
    }

    pub fn m(&self) -> usize {
        self.partition.m()
    }

    /// Blocks summed with order 0 (1-based, as in T ⊆ {1..m}).
    pub fn t_set(&self) -> Vec<usize> {
        (0..self.j.len()).filter(|&t| self.j[t] == 0).map(|t| t + 1).collect()
    }

    pub fn r(&self) -> usize {
        self.j.iter().filter(|&&x| x == 0).count()
    }

    /// Number of positive-order factors, the chaos order of the term.
    pub fn chaos_order(&self) -> usize {
        self.m() - self.r()
    }

    pub fn regime(&self) -> Regime {
        if self.m() + self.r() == self.k() {
            Regime::LongMemory
        } else {
            Regime::ShortMemory
        }
    }

    pub fn row(&self) -> TermRow {
        TermRow {
            partition: self.partition.to_string(),
            j: self.j.clone(),
            r: self.r(),
            m: self.m(),
            regime: self.regime(),
            c_coeff: self.c,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TermRow {
    pub partition: String,
    pub j: Vec<usize>,
    pub r: usize,
    pub m: usize,
    pub regime: Regime,
    pub c_coeff: f64,
}

/// All (π, j) with j ∈ J_π⁺ and c(p, j) ≠ 0.
pub fn enumerate_terms(k: usize, moments: &MomentVector) -> Result<Vec<TermIndex>> {
    if !moments.get(1)?.is_zero() {
        return arg("term enumeration assumes centred noise (mu_1 = 0)");
    }
    let mut out = Vec::new();
    for pi in enumerate_partitions(k)? {
        let sizes = pi.sizes();
        let mut j = vec![0usize; sizes.len()];
        loop {
            let admissible = j.iter().any(|&x| x > 0)
                && (0..j.len()).all(|t| j[t] > 0 || sizes[t] >= 2);
            if admissible {
                let c = c_coeff_exact(&sizes, &j, moments)?;
                if !c.is_zero() {
                    out.push(TermIndex {
                        partition: pi.clone(),
                        j: j.clone(),
                        c: rat_to_f64(&c),
                    });
                }
            }
            // odometer over 0 <= j_t <= p_t
            let mut t = 0;
            while t < j.len() {
                if j[t] < sizes[t] {
                    j[t] += 1;
                    break;
                }
                j[t] = 0;
                t += 1;
            }
            if t == j.len() {
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::NoiseLaw;

    #[test]
    fn order_two_terms() {
        let terms = enumerate_terms(2, &NoiseLaw::Gaussian.moments(6)).unwrap();
        let rows: Vec<(String, Vec<usize>, Regime)> = terms
            .iter()
            .map(|t| (t.partition.to_string(), t.j.clone(), t.regime()))
            .collect();
        assert_eq!(
            rows,
            vec![
                ("{{1},{2}}".to_string(), vec![1, 1], Regime::LongMemory),
                ("{{1,2}}".to_string(), vec![2], Regime::ShortMemory),
            ]
        );
    }

    #[test]
    fn long_memory_terms_of_order_five_are_pairings() {
        let terms = enumerate_terms(5, &NoiseLaw::Gaussian.moments(12)).unwrap();
        let mut counts = [0usize; 3];
        for t in terms.iter().filter(|t| t.regime() == Regime::LongMemory) {
            assert!(t.partition.sizes().iter().all(|&p| p <= 2));
            for (p, j) in t.partition.sizes().iter().zip(&t.j) {
                assert_eq!(*j, if *p == 2 { 0 } else { 1 });
            }
            assert_eq!(t.c, 1.0);
            counts[t.r()] += 1;
        }
        assert_eq!(counts, [1, 10, 15]);
        assert!(terms.iter().all(|t| t.j.iter().any(|&x| x > 0)));
    }

    #[test]
    fn invalid_terms_are_rejected() {
        let g = NoiseLaw::Gaussian.moments(6);
        let p: Partition = "{{1},{2}}".parse().unwrap();
        assert!(TermIndex::new(p.clone(), vec![0, 1], &g).is_err());
        assert!(TermIndex::new(p, vec![0, 0], &g).is_err());
    }
}
