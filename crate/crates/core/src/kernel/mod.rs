//! Homogeneous kernels on the positive orthant.
//!
//! A [`Kernel`] is a small expression tree. Leaves are the power-sum,
//! product-power and ratio families; inner nodes scale, add, or take the
//! pointwise max/min of kernels sharing arity and homogeneity exponent, and
//! a perturbation node multiplies by L(x) = 1 + c‖x‖₁^{−δ}.

mod json;
mod ht;
mod trace;
mod validate;

pub use ht::{eval_h_t, eval_h_t_kernel, eval_h_t_with_error, l2_norm_h_t, HtNorm};
pub use json::{from_json, to_json, KernelDoc};
pub use trace::{trace_kernel, TraceForm, TraceKernel};
pub use validate::{validate_ghkb, ValidationReport};

use crate::error::{arg, Error, Result};

const ALPHA_MATCH: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    /// (x₁+…+x_k)^α
    PowerSum { k: usize, alpha: f64 },
    /// ∏ x_j^{γ_j}
    ProductPower { gammas: Vec<f64> },
    /// ∏ x_j^{a_j} / Σ x_j^b
    RatioForm { a: Vec<f64>, b: f64 },
    Scale { c: f64, inner: Box<Kernel> },
    Sum(Vec<Kernel>),
    Max(Vec<Kernel>),
    Min(Vec<Kernel>),
    /// inner(x)·(1 + c‖x‖₁^{−δ})
    Perturbed { inner: Box<Kernel>, c: f64, delta: f64 },
    /// Average over all argument permutations.
    Symmetrized(Box<Kernel>),
}

impl Kernel {
    pub fn power_sum(k: usize, alpha: f64) -> Self {
        Kernel::PowerSum { k, alpha }
    }

    pub fn product_power(gammas: Vec<f64>) -> Self {
        Kernel::ProductPower { gammas }
    }

    pub fn ratio_form(a: Vec<f64>, b: f64) -> Result<Self> {
        if a.is_empty() || a.iter().any(|x| !(*x > 0.0)) || !(b > 0.0) {
            return arg("ratio form needs a_j > 0 and b > 0");
        }
        Ok(Kernel::RatioForm { a, b })
    }

    pub fn scale(c: f64, inner: Kernel) -> Self {
        Kernel::Scale { c, inner: Box::new(inner) }
    }

    pub fn sum(children: Vec<Kernel>) -> Result<Self> {
        Self::check_children(&children)?;
        Ok(Kernel::Sum(children))
    }

    pub fn max(children: Vec<Kernel>) -> Result<Self> {
        Self::check_children(&children)?;
        Ok(Kernel::Max(children))
    }

    pub fn min(children: Vec<Kernel>) -> Result<Self> {
        Self::check_children(&children)?;
        Ok(Kernel::Min(children))
    }

    pub fn perturbed(inner: Kernel, c: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !c.is_finite() {
            return arg("perturbation needs a finite c and delta > 0");
        }
        Ok(Kernel::Perturbed { inner: Box::new(inner), c, delta })
    }

    fn check_children(children: &[Kernel]) -> Result<()> {
        let Some(first) = children.first() else {
            return arg("combinator needs at least one child");
        };
        let (k, alpha) = (first.arity(), first.alpha());
        for c in children {
            if c.arity() != k || (c.alpha() - alpha).abs() > ALPHA_MATCH * alpha.abs().max(1.0) {
                return arg(format!(
                    "combinator children must share (k, alpha): ({k}, {alpha}) vs ({}, {})",
                    c.arity(),
                    c.alpha()
                ));
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        match self {
            Kernel::PowerSum { k, .. } => *k,
            Kernel::ProductPower { gammas } => gammas.len(),
            Kernel::RatioForm { a, .. } => a.len(),
            Kernel::Scale { inner, .. } | Kernel::Perturbed { inner, .. } | Kernel::Symmetrized(inner) => {
                inner.arity()
            }
            Kernel::Sum(ch) | Kernel::Max(ch) | Kernel::Min(ch) => ch[0].arity(),
        }
    }

    /// Homogeneity exponent.
    pub fn alpha(&self) -> f64 {
        match self {
            Kernel::PowerSum { alpha, .. } => *alpha,
            Kernel::ProductPower { gammas } => gammas.iter().sum(),
            Kernel::RatioForm { a, b } => a.iter().sum::<f64>() - b,
            Kernel::Scale { inner, .. } | Kernel::Perturbed { inner, .. } | Kernel::Symmetrized(inner) => {
                inner.alpha()
            }
            Kernel::Sum(ch) | Kernel::Max(ch) | Kernel::Min(ch) => ch[0].alpha(),
        }
    }

    /// α + k/2 + 1.
    pub fn hurst(&self) -> f64 {
        self.alpha() + self.arity() as f64 / 2.0 + 1.0
    }

    /// Whether α lies in (−(k+1)/2, −k/2).
    pub fn alpha_in_range(&self) -> bool {
        let k = self.arity() as f64;
        let a = self.alpha();
        a > -(k + 1.0) / 2.0 && a < -k / 2.0
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity() {
            return arg(format!("kernel of arity {} evaluated at {} coordinates", self.arity(), x.len()));
        }
        if let Some(v) = x.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::Domain(format!("coordinate {v} is not strictly positive")));
        }
        Ok(self.value(x))
    }

    /// Evaluation without argument checks, for hot loops.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Kernel::Perturbed { inner, c, delta } => {
                let n: f64 = x.iter().sum();
                inner.value(x) * (1.0 + c * n.powf(-delta))
            }
            _ => self.value_unperturbed(x),
        }
    }

    /// g(x) with every perturbation factor dropped.
    pub fn eval_unperturbed(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)?;
        Ok(self.value_unperturbed(x))
    }

    fn value_unperturbed(&self, x: &[f64]) -> f64 {
        match self {
            Kernel::PowerSum { alpha, .. } => x.iter().sum::<f64>().powf(*alpha),
            Kernel::ProductPower { gammas } => x.iter().zip(gammas).map(|(v, g)| v.powf(*g)).product(),
            Kernel::RatioForm { a, b } => {
                let num: f64 = x.iter().zip(a).map(|(v, e)| v.powf(*e)).product();
                let den: f64 = x.iter().map(|v| v.powf(*b)).sum();
                num / den
            }
            Kernel::Scale { c, inner } => c * inner.value_unperturbed(x),
            Kernel::Sum(ch) => ch.iter().map(|c| c.value_unperturbed(x)).sum(),
            Kernel::Max(ch) => ch.iter().map(|c| c.value_unperturbed(x)).fold(f64::NEG_INFINITY, f64::max),
            Kernel::Min(ch) => ch.iter().map(|c| c.value_unperturbed(x)).fold(f64::INFINITY, f64::min),
            Kernel::Perturbed { inner, .. } => inner.value_unperturbed(x),
            Kernel::Symmetrized(inner) => {
                let mut buf = x.to_vec();
                let mut total = 0.0;
                let mut count = 0usize;
                for_each_permutation(&mut buf, &mut |p| {
                    total += inner.value_unperturbed(p);
                    count += 1;
                });
                total / count as f64
            }
        }
    }

    /// Structural symmetry: true when the kernel is invariant under argument
    /// permutations by construction.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Kernel::PowerSum { .. } | Kernel::Symmetrized(_) => true,
            Kernel::ProductPower { gammas } => gammas.windows(2).all(|w| w[0] == w[1]),
            Kernel::RatioForm { a, .. } => a.windows(2).all(|w| w[0] == w[1]),
            Kernel::Scale { inner, .. } | Kernel::Perturbed { inner, .. } => inner.is_symmetric(),
            Kernel::Sum(ch) | Kernel::Max(ch) | Kernel::Min(ch) => ch.iter().all(Kernel::is_symmetric),
        }
    }

    /// The symmetrization of this kernel, lazily evaluated. Only offered for
    /// k ≤ 6, where k! evaluations per point stay affordable.
    pub fn symmetrized(&self) -> Result<Kernel> {
        if self.is_symmetric() {
            return Ok(self.clone());
        }
        if self.arity() > 6 {
            return arg(format!("symmetrization is limited to k <= 6, got k = {}", self.arity()));
        }
        Ok(Kernel::Symmetrized(Box::new(self.clone())))
    }

    /// Some(c) when the kernel equals c·(Σx)^α identically.
    pub fn power_sum_coefficient(&self) -> Option<f64> {
        match self {
            Kernel::PowerSum { .. } => Some(1.0),
            Kernel::Scale { c, inner } => inner.power_sum_coefficient().map(|v| c * v),
            Kernel::Sum(ch) => ch.iter().map(Kernel::power_sum_coefficient).sum(),
            Kernel::Symmetrized(inner) => inner.power_sum_coefficient(),
            _ => None,
        }
    }

    /// Whether any node carries a perturbation factor.
    pub fn is_perturbed(&self) -> bool {
        match self {
            Kernel::Perturbed { .. } => true,
            Kernel::Scale { inner, .. } | Kernel::Symmetrized(inner) => inner.is_perturbed(),
            Kernel::Sum(ch) | Kernel::Max(ch) | Kernel::Min(ch) => ch.iter().any(Kernel::is_perturbed),
            _ => false,
        }
    }
}

/// Heap's algorithm; calls `f` on every permutation of `buf` in place.
pub(crate) fn for_each_permutation<T, F: FnMut(&[T])>(buf: &mut [T], f: &mut F) {
    let n = buf.len();
    let mut c = vec![0usize; n];
    f(buf);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                buf.swap(0, i);
            } else {
                buf.swap(c[i], i);
            }
            f(buf);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_sum_values() {
        let g = Kernel::power_sum(2, -1.2);
        assert!((g.eval(&[1.0, 1.0]).unwrap() - 0.435275281648062).abs() < 1e-12);
        let g5 = Kernel::power_sum(5, -2.75);
        let x = [0.3, 1.0, 2.0, 0.1, 4.0];
        assert_eq!(g5.eval(&x).unwrap(), (0.3f64 + 1.0 + 2.0 + 0.1 + 4.0).powf(-2.75));
        assert!((g.hurst() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn argument_errors() {
        let g = Kernel::power_sum(2, -1.2);
        assert!(matches!(g.eval(&[1.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(g.eval(&[1.0]), Err(Error::Argument(_))));
        assert!(Kernel::sum(vec![g.clone(), Kernel::power_sum(2, -1.3)]).is_err());
        assert!(Kernel::sum(vec![g, Kernel::power_sum(3, -1.2)]).is_err());
        assert!(Kernel::ratio_form(vec![0.3, -0.1], 1.0).is_err());
    }

    #[test]
    fn perturbation_is_removable() {
        let g = Kernel::power_sum(2, -1.2);
        let p = Kernel::perturbed(g.clone(), 0.5, 0.3).unwrap();
        let x = [2.0, 3.0];
        assert_eq!(p.eval_unperturbed(&x).unwrap(), g.eval(&x).unwrap());
        let l = 1.0 + 0.5 * 5f64.powf(-0.3);
        assert!((p.eval(&x).unwrap() - g.eval(&x).unwrap() * l).abs() < 1e-15);
    }

    #[test]
    fn symmetrization() {
        let g = Kernel::product_power(vec![-0.9, -0.4]);
        assert!(!g.is_symmetric());
        let s = g.symmetrized().unwrap();
        let a = s.eval(&[1.0, 3.0]).unwrap();
        let b = s.eval(&[3.0, 1.0]).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!((a - 0.5 * (3f64.powf(-0.4) + 3f64.powf(-0.9))).abs() < 1e-15);
        let big = Kernel::product_power(vec![-0.5, -0.6, -0.5, -0.5, -0.5, -0.5, -0.5]);
        assert!(big.symmetrized().is_err());
    }

    #[test]
    fn permutations_are_complete() {
        let mut buf = [1.0, 2.0, 3.0, 4.0];
        let mut seen = std::collections::HashSet::new();
        for_each_permutation(&mut buf, &mut |p| {
            seen.insert(p.iter().map(|v| *v as u8).collect::<Vec<_>>());
        });
        assert_eq!(seen.len(), 24);
    }
}
