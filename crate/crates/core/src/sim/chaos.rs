use super::TruncatedKernel;
use crate::error::{arg, Result};

/// Off-diagonal polynomial form Σ′ h(i) ∏_j ξ_{i_j}, where table index v
/// picks `noise[v − 1]`.
pub fn discrete_chaos(h: &TruncatedKernel, noise: &[f64]) -> Result<f64> {
    if noise.len() != h.m() {
        return arg(format!("table spans {} sites, noise record has {}", h.m(), noise.len()));
    }
    let mut used = vec![false; h.m()];
    Ok(rec(h.values(), noise, h.k(), &mut used))
}

fn rec(values: &[f64], noise: &[f64], depth: usize, used: &mut [bool]) -> f64 {
    if depth == 1 {
        let mut s = 0.0;
        for (i, (&v, &x)) in values.iter().zip(noise).enumerate() {
            if !used[i] {
                s += v * x;
            }
        }
        return s;
    }
    let stride = values.len() / noise.len();
    let mut s = 0.0;
    for (i, &x) in noise.iter().enumerate() {
        if used[i] || x == 0.0 {
            continue;
        }
        used[i] = true;
        s += x * rec(&values[i * stride..(i + 1) * stride], noise, depth - 1, used);
        used[i] = false;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_form() {
        let h = TruncatedKernel::from_fn(1, 4, |i| i[0] as f64).unwrap();
        assert_eq!(discrete_chaos(&h, &[1.0, -1.0, 2.0, 0.5]).unwrap(), 1.0 - 2.0 + 6.0 + 2.0);
    }

    #[test]
    fn diagonals_are_dropped() {
        let h = TruncatedKernel::from_fn(2, 3, |_| 1.0).unwrap();
        // (Σξ)² − Σξ²
        let xi = [1.0, 2.0, 3.0];
        assert_eq!(discrete_chaos(&h, &xi).unwrap(), 36.0 - 14.0);
    }
}
