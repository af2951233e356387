use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::moments::{rat_to_f64, MomentVector};
use crate::error::{arg, Result};

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// c(p, j) = ∏_t C(p_t, j_t) μ_{p_t − j_t}, exact.
pub fn c_coeff_exact(p: &[usize], j: &[usize], moments: &MomentVector) -> Result<BigRational> {
    if p.len() != j.len() {
        return arg("size and order vectors differ in length");
    }
    let mut out = BigRational::one();
    for (&pt, &jt) in p.iter().zip(j) {
        if jt > pt {
            return arg(format!("order {jt} exceeds block size {pt}"));
        }
        out *= BigRational::from_integer(binomial(pt, jt)) * moments.get(pt - jt)?;
    }
    Ok(out)
}

pub fn c_coeff(p: &[usize], j: &[usize], moments: &MomentVector) -> Result<f64> {
    c_coeff_exact(p, j, moments).map(|c| rat_to_f64(&c))
}

/// d_{k,r} = k! / (2^r (k−2r)! r!), the number of ways to pick r disjoint
/// unordered pairs from k labelled items.
pub fn d_coeff(k: usize, r: usize) -> Result<BigRational> {
    if 2 * r > k {
        return arg(format!("d_(k,r) needs 2r <= k, got k={k}, r={r}"));
    }
    let num = factorial(k);
    let den = BigInt::from(2).pow(r as u32) * factorial(k - 2 * r) * factorial(r);
    Ok(BigRational::new(num, den))
}
