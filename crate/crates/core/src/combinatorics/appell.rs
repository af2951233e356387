use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::coeff::binomial;
use super::moments::{rat_to_f64, MomentVector};
use crate::error::{arg, Result};

/// Appell polynomials A_0..A_K of a moment sequence, with exact coefficients.
#[derive(Clone, Debug)]
pub struct AppellFamily {
    moments: MomentVector,
    coeffs: Vec<Vec<BigRational>>,
    coeffs_f64: Vec<Vec<f64>>,
}

pub fn appell_family(moments: &MomentVector, max_order: usize) -> Result<AppellFamily> {
    if max_order > moments.max_order() {
        return arg(format!(
            "Appell order {max_order} needs moments up to {max_order}, only {} available",
            moments.max_order()
        ));
    }
    let mut coeffs: Vec<Vec<BigRational>> = vec![vec![BigRational::from_integer(1.into())]];
    for p in 1..=max_order {
        let prev = &coeffs[p - 1];
        let mut row = vec![BigRational::zero(); p + 1];
        for j in 1..=p {
            let pr = BigRational::from_integer(BigInt::from(p));
            let jr = BigRational::from_integer(BigInt::from(j));
            row[j] = &prev[j - 1] * pr / jr;
        }
        let mut c0 = BigRational::zero();
        for j in 1..=p {
            c0 -= &row[j] * moments.get(j)?;
        }
        row[0] = c0;
        coeffs.push(row);
    }
    let coeffs_f64 = coeffs
        .iter()
        .map(|r| r.iter().map(rat_to_f64).collect())
        .collect();
    Ok(AppellFamily {
        moments: moments.clone(),
        coeffs,
        coeffs_f64,
    })
}

impl AppellFamily {
    pub fn max_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn moments(&self) -> &MomentVector {
        &self.moments
    }

    /// Coefficients of A_p in increasing powers of x.
    pub fn coeffs(&self, p: usize) -> &[BigRational] {
        &self.coeffs[p]
    }

    pub fn coeffs_f64(&self, p: usize) -> &[f64] {
        &self.coeffs_f64[p]
    }

    pub fn eval(&self, p: usize, x: f64) -> f64 {
        self.coeffs_f64[p].iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Human-readable polynomial, highest power first.
    pub fn format(&self, p: usize) -> String {
        let mut parts = Vec::new();
        for (j, c) in self.coeffs[p].iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match j {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{j}"),
            };
            let mag = if c < &BigRational::zero() { -c.clone() } else { c.clone() };
            let sign = if c < &BigRational::zero() { "-" } else { "+" };
            let body = if mono.is_empty() {
                mag.to_string()
            } else if mag == BigRational::from_integer(1.into()) {
                mono
            } else {
                format!("{mag}*{mono}")
            };
            parts.push((sign, body));
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (sign, body)) in parts.iter().enumerate() {
            if i == 0 {
                if *sign == "-" {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            s.push_str(body);
        }
        s
    }
}

/// Weights w_j = C(p,j) μ_{p−j} with x^p = Σ_j w_j A_j(x).
pub fn power_expansion(p: usize, family: &AppellFamily) -> Result<Vec<BigRational>> {
    if p > family.max_order() {
        return arg(format!("power {p} exceeds Appell order {}", family.max_order()));
    }
    (0..=p)
        .map(|j| {
            Ok(BigRational::from_integer(binomial(p, j)) * family.moments.get(p - j)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::moments::int;
    use crate::mc::NoiseLaw;

    fn ints(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn hermite_for_gaussian() {
        let f = appell_family(&NoiseLaw::Gaussian.moments(4), 4).unwrap();
        assert_eq!(f.coeffs(0), ints(&[1]).as_slice());
        assert_eq!(f.coeffs(1), ints(&[0, 1]).as_slice());
        assert_eq!(f.coeffs(2), ints(&[-1, 0, 1]).as_slice());
        assert_eq!(f.coeffs(3), ints(&[0, -3, 0, 1]).as_slice());
        assert_eq!(f.coeffs(4), ints(&[3, 0, -6, 0, 1]).as_slice());
        assert_eq!(f.format(4), "x^4 - 6*x^2 + 3");
    }

    #[test]
    fn second_polynomial_with_general_mean() {
        // A_2 = x^2 − 2μ1 x + 2μ1² − μ2 for μ1 = 1/2, μ2 = 3
        let m = MomentVector::from_f64(&[1.0, 0.5, 3.0]).unwrap();
        let f = appell_family(&m, 2).unwrap();
        assert_eq!(f.coeffs_f64(2), &[2.0 * 0.25 - 3.0, -1.0, 1.0]);
    }

    #[test]
    fn expansion_of_x_squared() {
        let f = appell_family(&NoiseLaw::Rademacher.moments(2), 2).unwrap();
        assert_eq!(power_expansion(0, &f).unwrap(), ints(&[1]));
        assert_eq!(power_expansion(2, &f).unwrap(), ints(&[1, 0, 1]));
    }

    #[test]
    fn order_beyond_moments_is_rejected() {
        assert!(appell_family(&NoiseLaw::Gaussian.moments(3), 4).is_err());
    }
}
