use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use crate::combinatorics::moments::{int, MomentVector};
use crate::error::Result;

/// Built-in innovation laws, all with mean 0 and variance 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseLaw {
    Gaussian,
    Rademacher,
    /// Uniform on [−√3, √3].
    Uniform,
    /// Exp(1) − 1.
    Exponential,
}

impl NoiseLaw {
    pub const ALL: [NoiseLaw; 4] = [
        NoiseLaw::Gaussian,
        NoiseLaw::Rademacher,
        NoiseLaw::Uniform,
        NoiseLaw::Exponential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseLaw::Gaussian => "gaussian",
            NoiseLaw::Rademacher => "rademacher",
            NoiseLaw::Uniform => "uniform",
            NoiseLaw::Exponential => "exponential",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Some(NoiseLaw::Gaussian),
            "rademacher" => Some(NoiseLaw::Rademacher),
            "uniform" => Some(NoiseLaw::Uniform),
            "exponential" | "shifted-exponential" => Some(NoiseLaw::Exponential),
            _ => None,
        }
    }

    /// Exact moment E ε^p.
    pub fn moment(self, p: usize) -> BigRational {
        match self {
            NoiseLaw::Gaussian => {
                if p % 2 == 1 {
                    int(0)
                } else {
                    let mut v = BigInt::from(1);
                    let mut j = p as i64 - 1;
                    while j > 1 {
                        v *= j;
                        j -= 2;
                    }
                    BigRational::from_integer(v)
                }
            }
            NoiseLaw::Rademacher => int(if p.is_multiple_of(2) { 1 } else { 0 }),
            NoiseLaw::Uniform => {
                if p % 2 == 1 {
                    int(0)
                } else {
                    let num = BigInt::from(3).pow(p as u32 / 2);
                    BigRational::new(num, BigInt::from(p as i64 + 1))
                }
            }
            NoiseLaw::Exponential => {
                // E (E−1)^p for E ~ Exp(1) is the number of derangements of p items
                let (mut a, mut b) = (BigInt::from(1), BigInt::from(0));
                if p == 0 {
                    return BigRational::from_integer(a);
                }
                for q in 2..=p {
                    let next = BigInt::from(q as i64 - 1) * (&a + &b);
                    a = b;
                    b = next;
                }
                BigRational::from_integer(b)
            }
        }
    }

    pub fn moments(self, max_order: usize) -> MomentVector {
        MomentVector::new((0..=max_order).map(|p| self.moment(p)).collect())
            .expect("built-in laws have mu_0 = 1")
    }

    pub fn sample(self, stream: &mut RngStream) -> f64 {
        match self {
            NoiseLaw::Gaussian => StandardNormal.sample(stream),
            NoiseLaw::Rademacher => {
                if stream.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            NoiseLaw::Uniform => (2.0 * stream.uniform_open() - 1.0) * 3f64.sqrt(),
            NoiseLaw::Exponential => {
                let e: f64 = Exp1.sample(stream);
                e - 1.0
            }
        }
    }
}

/// An innovation law together with its moments up to a fixed order.
#[derive(Clone, Debug)]
pub struct NoiseSpec {
    pub law: NoiseLaw,
    pub moments: MomentVector,
}

impl NoiseSpec {
    /// Moments are carried to order 2k+2 for a process of order k.
    pub fn for_order(law: NoiseLaw, k: usize) -> Self {
        Self::with_moments(law, 2 * k + 2)
    }

    pub fn with_moments(law: NoiseLaw, max_order: usize) -> Self {
        Self {
            law,
            moments: law.moments(max_order),
        }
    }

    pub fn moment_f64(&self, p: usize) -> Result<f64> {
        self.moments.get_f64(p)
    }
}

pub fn sample_noise(law: NoiseLaw, stream: &mut RngStream, n: usize) -> Vec<f64> {
    (0..n).map(|_| law.sample(stream)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::rng::derive_stream;

    #[test]
    fn analytic_moments() {
        assert_eq!(NoiseLaw::Gaussian.moment(6), int(15));
        assert_eq!(NoiseLaw::Rademacher.moment(4), int(1));
        assert_eq!(NoiseLaw::Rademacher.moment(3), int(0));
        assert_eq!(
            NoiseLaw::Uniform.moment(4),
            BigRational::new(BigInt::from(9), BigInt::from(5))
        );
        let d: Vec<_> = (0..7).map(|p| NoiseLaw::Exponential.moment(p)).collect();
        assert_eq!(d, [1, 0, 1, 2, 9, 44, 265].map(int).to_vec());
        for law in NoiseLaw::ALL {
            let m = law.moments(12);
            assert!(m.is_standardized());
            assert!(m.hankel_nonnegative(), "{law:?}");
        }
    }

    #[test]
    fn sampling_is_bitwise_reproducible() {
        for law in NoiseLaw::ALL {
            let a = sample_noise(law, &mut derive_stream(5, &[2]), 1000);
            let b = sample_noise(law, &mut derive_stream(5, &[2]), 1000);
            assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn monte_carlo_moments_match() {
        let n = 400_000;
        for law in NoiseLaw::ALL {
            let xs = sample_noise(law, &mut derive_stream(11, &[law as u64]), n);
            for p in 1..=6usize {
                let vals: Vec<f64> = xs.iter().map(|x| x.powi(p as i32)).collect();
                let (mean, se) = crate::mc::stats::mean_se(&vals);
                let exact = crate::combinatorics::moments::rat_to_f64(&law.moment(p));
                if se == 0.0 {
                    assert_eq!(mean, exact);
                } else {
                    assert!((mean - exact).abs() < 4.0 * se, "{law:?} p={p}: {mean} vs {exact}");
                }
            }
        }
    }
}
