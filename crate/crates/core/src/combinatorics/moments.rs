use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Moments μ_0..μ_K of an innovation law, held exactly.
///
/// Orders beyond `max_order` are unavailable and every lookup past it is an
/// error rather than a guess.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    values: Vec<BigRational>,
}

impl MomentVector {
    pub fn new(values: Vec<BigRational>) -> Result<Self> {
        if values.is_empty() || !values[0].is_one() {
            return Err(Error::Argument("moment vector must start with mu_0 = 1".into()));
        }
        Ok(Self { values })
    }

    /// Builds a moment vector from floating values (each converted exactly).
    pub fn from_f64(values: &[f64]) -> Result<Self> {
        let mut out = Vec::with_capacity(values.len());
        for (p, v) in values.iter().enumerate() {
            let r = BigRational::from_float(*v)
                .ok_or_else(|| Error::Argument(format!("moment {p} is not finite")))?;
            out.push(r);
        }
        Self::new(out)
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, p: usize) -> Result<&BigRational> {
        self.values.get(p).ok_or(Error::MomentUnavailable(p))
    }

    pub fn get_f64(&self, p: usize) -> Result<f64> {
        self.get(p).map(rat_to_f64)
    }

    pub fn as_slice(&self) -> &[BigRational] {
        &self.values
    }

    pub fn is_standardized(&self) -> bool {
        self.values.len() > 2 && self.values[1].is_zero() && self.values[2].is_one()
    }

    /// Determinants of the Hankel matrices (μ_{i+j})_{i,j≤n} for every n the
    /// available moments allow. A law's moment sequence makes them all ≥ 0.
    pub fn hankel_determinants(&self) -> Vec<BigRational> {
        let mut out = Vec::new();
        let mut n = 0;
        while 2 * n <= self.max_order() {
            let m: Vec<Vec<BigRational>> = (0..=n)
                .map(|i| (0..=n).map(|j| self.values[i + j].clone()).collect())
                .collect();
            out.push(determinant(m));
            n += 1;
        }
        out
    }

    pub fn hankel_nonnegative(&self) -> bool {
        self.hankel_determinants().iter().all(|d| !d.is_negative())
    }
}

pub(crate) fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn determinant(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            let f = &m[r][col] / &p;
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let v = &m[col][c] * &f;
                m[r][c] -= v;
            }
        }
    }
    det
}
