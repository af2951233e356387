use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::gamma;

use crate::error::{arg, Result};
use crate::kernel::Kernel;
use crate::mc::{NoiseLaw, NoiseSpec, RngStream};

/// s^α ≈ Σ_l w_l e^{−t_l s}, from the trapezoid rule applied to
/// s^α = Γ(−α)^{-1} ∫ e^{−αu} exp(−e^u s) du.
#[derive(Clone, Debug)]
pub struct ExpSum {
    pub rates: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ExpSum {
    pub const STEP: f64 = 0.4;

    /// Accurate to about 1e-8 relative on [s_min, 1e12].
    pub fn power(alpha: f64, s_min: f64) -> Result<Self> {
        if !(alpha < 0.0) || !(s_min > 0.0) {
            return arg("exponential sums need a negative exponent and a positive lower bound");
        }
        let s_max = 1e12f64;
        let u_hi = (60.0 / s_min).ln();
        let u_lo = -s_max.ln() + 1e-6f64.ln() / (-alpha);
        let h = Self::STEP;
        let n = ((u_hi - u_lo) / h).ceil() as usize + 1;
        let norm = h / gamma(-alpha);
        let mut rates = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for l in 0..n {
            let u = u_lo + l as f64 * h;
            rates.push(u.exp());
            weights.push(norm * (-alpha * u).exp());
        }
        Ok(Self { rates, weights })
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.rates.iter().zip(&self.weights).map(|(t, w)| w * (-t * s).exp()).sum()
    }
}

/// c·(Σ x)^α terms, the kernels the exponential-sum backend accepts.
fn power_sum_terms(g: &Kernel, scale: f64, out: &mut Vec<(f64, usize, f64)>) -> Result<()> {
    match g {
        Kernel::PowerSum { k, alpha } => out.push((scale, *k, *alpha)),
        Kernel::Scale { c, inner } => power_sum_terms(inner, scale * c, out)?,
        Kernel::Sum(children) => {
            for c in children {
                power_sum_terms(c, scale, out)?;
            }
        }
        _ => return arg("only sums of scaled power-sum kernels have an exponential-sum representation"),
    }
    Ok(())
}

/// X(n) = Σ_l w_l F_l(n)^k with F_l(n) = Σ_{1≤i≤M} r_l^i ε_{n−i}, each F_l an
/// AR(1) filter. With no horizon the innovations before the burn-in window
/// enter through a Gaussian state with the exact stationary covariance.
#[derive(Clone, Debug)]
pub struct SeparableProcess {
    k: usize,
    decay: Vec<f64>,
    rates: Vec<f64>,
    weights: Vec<f64>,
    horizon: Option<usize>,
    burn_in: usize,
    far_past: Option<DMatrix<f64>>,
}

impl SeparableProcess {
    pub fn new(g: &Kernel, horizon: Option<usize>) -> Result<Self> {
        let mut parts = Vec::new();
        power_sum_terms(g, 1.0, &mut parts)?;
        let k = g.arity();
        if horizon == Some(0) {
            return arg("horizon must be at least 1");
        }
        let mut rates = Vec::new();
        let mut weights = Vec::new();
        for (c, _, alpha) in parts {
            let e = ExpSum::power(alpha, k as f64)?;
            rates.extend(e.rates);
            weights.extend(e.weights.into_iter().map(|w| c * w));
        }
        let decay = rates.iter().map(|t| (-t).exp()).collect();
        let far_past = match horizon {
            Some(_) => None,
            None => Some(stationary_factor(&rates)),
        };
        Ok(Self {
            k,
            decay,
            rates,
            weights,
            horizon,
            burn_in: 1 << 14,
            far_past,
        })
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn modes(&self) -> usize {
        self.rates.len()
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn coefficient_order(&self) -> usize {
        self.k
    }

    pub fn truncation(&self) -> Option<usize> {
        self.horizon
    }

    /// The coefficient actually realized, Σ_l w_l exp(−t_l Σ i_j).
    pub fn coefficient(&self, i: &[usize]) -> f64 {
        if let Some(m) = self.horizon {
            if i.iter().any(|&v| v == 0 || v > m) {
                return 0.0;
            }
        }
        let s: usize = i.iter().sum();
        self.rates.iter().zip(&self.weights).map(|(t, w)| w * (-t * s as f64).exp()).sum()
    }

    #[inline]
    fn output(&self, state: &[f64]) -> f64 {
        let mut s = 0.0;
        for (w, f) in self.weights.iter().zip(state) {
            s += w * f.powi(self.k as i32);
        }
        s
    }

    /// X(1..=n) from an innovation record ε_{1−M}..ε_N.
    pub fn eval_from_record(&self, eps: &[f64], n: usize) -> Result<Vec<f64>> {
        let m = match self.horizon {
            Some(m) => m,
            None => return arg("an untruncated process has no finite innovation record"),
        };
        if eps.len() < n + m {
            return arg(format!("record of length {} is shorter than N + M = {}", eps.len(), n + m));
        }
        // state_l = F_l(1) = Σ_{i=1}^M r^i ε_{1−i}, with ε_{1−i} at eps[M − i]
        let mut state: Vec<f64> = self
            .decay
            .iter()
            .map(|&r| {
                let mut s = 0.0;
                let mut p = 1.0;
                for i in 1..=m {
                    p *= r;
                    s += p * eps[m - i];
                }
                s
            })
            .collect();
        let tail: Vec<f64> = self.rates.iter().map(|t| (-t * m as f64).exp()).collect();
        let mut x = Vec::with_capacity(n);
        for t in 1..=n {
            x.push(self.output(&state));
            // F(t+1) = r (F(t) + ε_t − r^M ε_{t−M})
            let e_new = eps[t + m - 1];
            let e_old = eps[t - 1];
            for ((s, r), q) in state.iter_mut().zip(&self.decay).zip(&tail) {
                *s = r * (*s + e_new - q * e_old);
            }
        }
        Ok(x)
    }

    pub fn sample(&self, law: NoiseLaw, n: usize, stream: &mut RngStream) -> Vec<f64> {
        match (&self.far_past, self.horizon) {
            (_, Some(m)) => {
                let eps = crate::mc::sample_noise(law, stream, n + m);
                self.eval_from_record(&eps, n).expect("record sized above")
            }
            (Some(factor), None) => {
                let z = DVector::from_iterator(factor.ncols(), (0..factor.ncols()).map(|_| StandardNormal.sample(stream)));
                let mut state: Vec<f64> = (factor * z).iter().copied().collect();
                for _ in 0..self.burn_in {
                    let e = law.sample(stream);
                    for (s, r) in state.iter_mut().zip(&self.decay) {
                        *s = r * (*s + e);
                    }
                }
                let mut x = Vec::with_capacity(n);
                for _ in 0..n {
                    x.push(self.output(&state));
                    let e = law.sample(stream);
                    for (s, r) in state.iter_mut().zip(&self.decay) {
                        *s = r * (*s + e);
                    }
                }
                x
            }
            (None, None) => unreachable!("untruncated processes carry a far-past factor"),
        }
    }

    /// Stationary mean Σ_l w_l E F_l^k from the cumulants of the noise.
    pub fn mean(&self, noise: &NoiseSpec) -> Result<f64> {
        let k = self.k;
        let mu: Vec<f64> = (0..=k).map(|p| noise.moment_f64(p)).collect::<Result<_>>()?;
        let kappa = cumulants(&mu);
        let mut total = 0.0;
        for (t, w) in self.rates.iter().zip(&self.weights) {
            // cumulants of F: κ_q Σ_i r^{qi}
            let kf: Vec<f64> = (0..=k)
                .map(|q| {
                    if q == 0 {
                        return 0.0;
                    }
                    let qt = q as f64 * t;
                    let geo = (-qt).exp() / -(-qt).exp_m1();
                    let trunc = match self.horizon {
                        Some(m) => -(-qt * m as f64).exp_m1(),
                        None => 1.0,
                    };
                    kappa[q] * geo * trunc
                })
                .collect();
            total += w * moment_from_cumulants(&kf, k);
        }
        Ok(total)
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn cumulants(mu: &[f64]) -> Vec<f64> {
    let mut kappa = vec![0.0; mu.len()];
    for n in 1..mu.len() {
        let mut s = mu[n];
        for j in 1..n {
            s -= binom(n - 1, j - 1) * kappa[j] * mu[n - j];
        }
        kappa[n] = s;
    }
    kappa
}

fn moment_from_cumulants(kappa: &[f64], n: usize) -> f64 {
    let mut m = vec![0.0; n + 1];
    m[0] = 1.0;
    for p in 1..=n {
        m[p] = (1..=p).map(|j| binom(p - 1, j - 1) * kappa[j] * m[p - j]).sum();
    }
    m[n]
}

/// Square-root factor of Cov(F_l, F_m) = R/(1−R), R = r_l r_m, built on the
/// correlation scale.
fn stationary_factor(rates: &[f64]) -> DMatrix<f64> {
    let n = rates.len();
    let cov = |a: usize, b: usize| {
        let s = rates[a] + rates[b];
        (-s).exp() / -(-s).exp_m1()
    };
    let sd: Vec<f64> = (0..n).map(|a| cov(a, a).sqrt()).collect();
    let corr = DMatrix::from_fn(n, n, |a, b| cov(a, b) / (sd[a] * sd[b]));
    let eig = SymmetricEigen::new(corr);
    let mut f = eig.eigenvectors;
    for (c, lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        f.column_mut(c).scale_mut(s);
    }
    for (a, s) in sd.iter().enumerate() {
        f.row_mut(a).scale_mut(*s);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::derive_stream;
    use crate::sim::{eval_from_record, exact_mean, TruncatedKernel};

    #[test]
    fn exponential_sum_accuracy() {
        for &alpha in &[-0.6, -1.2, -1.45, -2.75] {
            let e = ExpSum::power(alpha, 2.0).unwrap();
            for &s in &[2.0, 3.0, 17.0, 1e3, 1e5, 1e8] {
                let rel = e.eval(s) / s.powf(alpha) - 1.0;
                assert!(rel.abs() < 1e-7, "alpha {alpha} s {s} rel {rel}");
            }
        }
    }

    #[test]
    fn truncated_recursion_matches_direct_sum() {
        let g = Kernel::power_sum(2, -1.2);
        let m = 64;
        let sep = SeparableProcess::new(&g, Some(m)).unwrap();
        let direct = TruncatedKernel::from_kernel(&g, m).unwrap();
        let eps = crate::mc::sample_noise(NoiseLaw::Gaussian, &mut derive_stream(3, &[]), 500 + m);
        let a = sep.eval_from_record(&eps, 500).unwrap();
        let b = eval_from_record(&direct, &eps, 500).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-7 * (1.0 + y.abs()), "{x} vs {y}");
        }
        let noise = NoiseSpec::for_order(NoiseLaw::Exponential, 2);
        let m1 = sep.mean(&noise).unwrap();
        let m2 = exact_mean(&direct, &noise).unwrap();
        assert!((m1 - m2).abs() < 1e-7 * m2.abs());
    }

    #[test]
    fn third_order_mean_uses_skewness() {
        let g = Kernel::power_sum(3, -1.7);
        let m = 6;
        let sep = SeparableProcess::new(&g, Some(m)).unwrap();
        let direct = TruncatedKernel::from_kernel(&g, m).unwrap();
        let noise = NoiseSpec::for_order(NoiseLaw::Exponential, 3);
        let m1 = sep.mean(&noise).unwrap();
        let m2 = exact_mean(&direct, &noise).unwrap();
        assert!((m1 - m2).abs() < 1e-7 * m2.abs(), "{m1} vs {m2}");
    }

    #[test]
    fn far_past_has_the_stationary_covariance() {
        let rates = [0.01, 0.2, 1.5];
        let f = stationary_factor(&rates);
        let c = &f * f.transpose();
        for a in 0..3 {
            for b in 0..3 {
                let r = (-(rates[a] + rates[b])).exp();
                assert!((c[(a, b)] / (r / (1.0 - r)) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn untruncated_variance() {
        // Var X(n) for k = 1 is Σ_i i^{2α}: check the path variance.
        let g = Kernel::power_sum(1, -0.8);
        let p = SeparableProcess::new(&g, None).unwrap().with_burn_in(256);
        let stream = derive_stream(11, &[]);
        let xs: Vec<f64> = (0..4000).map(|i| p.sample(NoiseLaw::Gaussian, 1, &mut stream.substream(i))[0]).collect();
        let (v, se) = crate::mc::variance_se(&xs);
        let want: f64 = (1..2_000_000).map(|i| (i as f64).powf(-1.6)).sum::<f64>() + 2_000_000f64.powf(-0.6) / 0.6;
        assert!((v - want).abs() < 4.0 * se, "{v} vs {want} ± {se}");
    }
}
