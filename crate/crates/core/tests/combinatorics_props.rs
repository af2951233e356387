use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use volterra_core::combinatorics::{
    appell_family, d_coeff, enumerate_partitions, enumerate_terms, power_expansion, s_prime_sum, MomentVector,
    Partition, Regime,
};
use volterra_core::mc::NoiseLaw;
use volterra_core::sim::TruncatedKernel;

/// Set partitions of {0..k} as restricted growth strings.
fn rgs(k: usize) -> Vec<Vec<usize>> {
    fn rec(pos: usize, k: usize, cur: &mut Vec<usize>, top: usize, out: &mut Vec<Vec<usize>>) {
        if pos == k {
            out.push(cur.clone());
            return;
        }
        for b in 0..=top {
            cur.push(b);
            rec(pos + 1, k, cur, if b == top { top + 1 } else { top }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, &mut Vec::new(), 0, &mut out);
    out
}

/// Σ over pairwise distinct i of a(i) by Möbius inversion on the partition
/// lattice: Σ_σ μ(σ) Σ_{i constant on the blocks of σ} a(i),
/// μ(σ) = ∏_B (−1)^{|B|−1}(|B|−1)!.
fn mobius_off_diagonal(a: &TruncatedKernel) -> f64 {
    let (k, m) = (a.k(), a.m());
    let mut total = 0.0;
    for s in rgs(k) {
        let blocks = s.iter().max().unwrap() + 1;
        let mut mu = 1.0;
        for b in 0..blocks {
            let size = s.iter().filter(|&&x| x == b).count();
            let f: f64 = (1..size).map(|j| j as f64).product();
            mu *= if size % 2 == 1 { f } else { -f };
        }
        let mut inner = 0.0;
        for code in 0..m.pow(blocks as u32) {
            let mut c = code;
            let vals: Vec<usize> = (0..blocks)
                .map(|_| {
                    let v = c % m + 1;
                    c /= m;
                    v
                })
                .collect();
            let i: Vec<usize> = s.iter().map(|&b| vals[b]).collect();
            inner += a.get(&i);
        }
        total += mu * inner;
    }
    total
}

fn table(k: usize, m: usize, vals: &[f64]) -> TruncatedKernel {
    let mut it = vals.iter().cycle();
    TruncatedKernel::from_fn(k, m, |_| *it.next().unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn off_diagonal_sum_matches_mobius_inversion(k in 1usize..=4, m in 1usize..=6,
                                                 vals in proptest::collection::vec(-1.0f64..1.0, 7..40)) {
        let a = table(k, m, &vals);
        let finest = Partition::new((1..=k).map(|j| vec![j]).collect()).unwrap();
        let all: Vec<usize> = (1..=k).collect();
        let fast = s_prime_sum(&a, &finest, &all, &[]).unwrap();
        let oracle = mobius_off_diagonal(&a);
        prop_assert!((fast - oracle).abs() <= 1e-10 * (1.0 + oracle.abs()), "{fast} vs {oracle}");
    }

    #[test]
    fn appell_identities_for_arbitrary_moments(num in proptest::collection::vec(-50i64..50, 6), den in 1i64..9) {
        let mut mu = vec![BigRational::one(), BigRational::zero(), BigRational::one()];
        mu.extend(num.iter().map(|&n| BigRational::new(BigInt::from(n), BigInt::from(den))));
        let moments = MomentVector::new(mu).unwrap();
        let kmax = moments.max_order();
        let fam = appell_family(&moments, kmax).unwrap();
        for p in 1..=kmax {
            let c = fam.coeffs(p);
            let prev = fam.coeffs(p - 1);
            for j in 1..=p {
                prop_assert_eq!(&c[j] * BigRational::from_integer(j.into()), &prev[j - 1] * BigRational::from_integer(p.into()));
            }
            let mut e = BigRational::zero();
            for (j, cj) in c.iter().enumerate() {
                e += cj * moments.get(j).unwrap();
            }
            prop_assert!(e.is_zero());
            let w = power_expansion(p, &fam).unwrap();
            let mut poly = vec![BigRational::zero(); p + 1];
            for (j, wj) in w.iter().enumerate() {
                for (d, cd) in fam.coeffs(j).iter().enumerate() {
                    poly[d] += wj * cd;
                }
            }
            for (d, v) in poly.iter().enumerate() {
                prop_assert_eq!(v.clone(), if d == p { BigRational::one() } else { BigRational::zero() });
            }
        }
    }
}

#[test]
fn partitions_are_canonical_and_distinct() {
    for k in 1..=7 {
        let ps = enumerate_partitions(k).unwrap();
        assert_eq!(ps.len(), rgs(k).len());
        let mut seen = std::collections::HashSet::new();
        for p in &ps {
            let b = p.blocks();
            assert!(b.windows(2).all(|w| w[0][0] < w[1][0]), "{p}");
            assert!(b.iter().all(|blk| blk.windows(2).all(|w| w[0] < w[1])));
            assert_eq!(p.sizes().iter().sum::<usize>(), k);
            let text = p.to_string();
            assert_eq!(text.parse::<Partition>().unwrap(), *p);
            assert!(seen.insert(text));
        }
    }
}

#[test]
fn regime_tags_and_long_memory_multiplicities() {
    for law in NoiseLaw::ALL {
        for k in 1..=6 {
            let moments = law.moments(k);
            let terms = enumerate_terms(k, &moments).unwrap();
            let mut per_r = vec![0u64; k / 2 + 1];
            for t in &terms {
                let m = t.partition.blocks().len();
                let r = t.j.iter().filter(|&&j| j == 0).count();
                assert!(m + r <= k);
                let lrd = m + r == k;
                assert_eq!(t.regime() == Regime::LongMemory, lrd);
                assert_eq!(t.row().regime == Regime::ShortMemory, !lrd);
                if lrd {
                    // singletons of order one and pairs of order zero
                    for (blk, &j) in t.partition.blocks().iter().zip(&t.j) {
                        assert!((blk.len() == 1 && j == 1) || (blk.len() == 2 && j == 0));
                    }
                    assert_eq!(t.c, 1.0);
                    per_r[r] += 1;
                }
            }
            for (r, &n) in per_r.iter().enumerate() {
                if 2 * r == k {
                    // all pairs, order zero: the constant E X, not a term
                    assert_eq!(n, 0);
                    continue;
                }
                assert_eq!(BigRational::from_integer(n.into()), d_coeff(k, r).unwrap(), "k={k} r={r}");
            }
        }
    }
    assert_eq!(d_coeff(5, 1).unwrap().to_integer().to_i64(), Some(10));
}
