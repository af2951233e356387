use num_traits::ToPrimitive;
use serde::Serialize;

use crate::combinatorics::d_coeff;
use crate::error::{arg, Result};
use crate::kernel::{l2_norm_h_t, trace_kernel, validate_ghkb, Kernel, TraceKernel};
use crate::quad::QuadratureConfig;

/// One summand d_{k,r} Z_{k−2r} of the limit.
#[derive(Clone, Debug)]
pub struct LimitTerm {
    pub r: usize,
    pub d: f64,
    pub d_exact: String,
    pub trace: TraceKernel,
    pub order: usize,
}

/// Z(t) = Σ_{r < k/2} d_{k,r} Z_{k−2r}(t), the centred expansion with the
/// order-zero summand dropped.
#[derive(Clone, Debug)]
pub struct LimitSpec {
    pub k: usize,
    pub alpha: f64,
    pub hurst: f64,
    pub terms: Vec<LimitTerm>,
    pub centered: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitTermRow {
    pub r: usize,
    pub d: String,
    pub order: usize,
    pub trace_alpha: f64,
    pub closed_coefficient: Option<f64>,
}

pub fn build_limit_spec(g: &Kernel, quad: &QuadratureConfig) -> Result<LimitSpec> {
    let report = validate_ghkb(g);
    if !report.valid {
        return arg(format!("kernel fails validation: {}", report.failures.join("; ")));
    }
    if !g.is_symmetric() {
        return arg("the limit is built from a symmetric kernel; symmetrize it first");
    }
    let k = g.arity();
    let mut terms = Vec::new();
    for r in 0..k.div_ceil(2) {
        let d = d_coeff(k, r)?;
        terms.push(LimitTerm {
            r,
            d: d.to_f64().expect("finite"),
            d_exact: d.to_string(),
            trace: trace_kernel(g, r, quad)?,
            order: k - 2 * r,
        });
    }
    Ok(LimitSpec {
        k,
        alpha: g.alpha(),
        hurst: g.hurst(),
        terms,
        centered: true,
    })
}

impl LimitSpec {
    /// Var Z(t) = Σ_r d²(k−2r)! ‖h_t^{(r)}‖²; distinct orders are orthogonal.
    pub fn variance(&self, t: f64, quad: &QuadratureConfig) -> Result<f64> {
        let mut v = 0.0;
        for term in &self.terms {
            let fact: f64 = (1..=term.order).map(|x| x as f64).product();
            v += term.d * term.d * fact * l2_norm_h_t(&term.trace, t, quad)?.value;
        }
        Ok(v)
    }

    /// "Z_5 + 10 Z_3 + 15 Z_1"
    pub fn describe(&self) -> String {
        self.terms
            .iter()
            .map(|t| if t.d_exact == "1" { format!("Z_{}", t.order) } else { format!("{} Z_{}", t.d_exact, t.order) })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn rows(&self) -> Vec<LimitTermRow> {
        self.terms
            .iter()
            .map(|t| LimitTermRow {
                r: t.r,
                d: t.d_exact.clone(),
                order: t.order,
                trace_alpha: t.trace.alpha(),
                closed_coefficient: t.trace.closed_coefficient(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_five_and_two() {
        let q = QuadratureConfig::default();
        let s = build_limit_spec(&Kernel::power_sum(5, -2.75), &q).unwrap();
        assert_eq!(s.describe(), "Z_5 + 10 Z_3 + 15 Z_1");
        let s = build_limit_spec(&Kernel::power_sum(2, -1.2), &q).unwrap();
        assert_eq!(s.terms.len(), 1);
        assert_eq!(s.terms[0].order, 2);
        assert!(build_limit_spec(&Kernel::product_power(vec![-0.6, -0.6]), &q).is_err());
    }
}
