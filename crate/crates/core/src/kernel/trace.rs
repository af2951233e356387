use super::Kernel;
use crate::error::{arg, Result};
use crate::quad::{integrate_half_line, Estimate, QuadratureConfig};

#[derive(Clone, Debug, PartialEq)]
pub enum TraceForm {
    /// The base kernel itself (r = 0).
    Identity,
    /// coef·(Σx)^{α+r}
    Closed { coef: f64 },
    /// Nested half-line quadrature of the paired coordinates.
    Quadrature { quad: QuadratureConfig },
}

/// g_r(x) = ∫_{R₊^r} g(y₁,y₁,…,y_r,y_r,x) dy, a kernel of arity k − 2r.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceKernel {
    pub base: Kernel,
    pub r: usize,
    pub form: TraceForm,
}

/// Coefficient of the r-fold trace of (Σx)^α:
/// ∏_{j<r} −1/(2(α+j+1)), since ∫_0^∞ (c+2y)^β dy = −c^{β+1}/(2(β+1)).
pub fn power_sum_trace_coefficient(alpha: f64, r: usize) -> f64 {
    (0..r).map(|j| -1.0 / (2.0 * (alpha + j as f64 + 1.0))).product()
}

pub fn trace_kernel(g: &Kernel, r: usize, quad: &QuadratureConfig) -> Result<TraceKernel> {
    quad.validate()?;
    let k = g.arity();
    if 2 * r >= k {
        return arg(format!("trace with 2r = {} >= k = {k} leaves no free variables", 2 * r));
    }
    let form = if r == 0 {
        TraceForm::Identity
    } else if let Some(c) = g.power_sum_coefficient() {
        TraceForm::Closed { coef: c * power_sum_trace_coefficient(g.alpha(), r) }
    } else {
        TraceForm::Quadrature { quad: *quad }
    };
    Ok(TraceKernel { base: g.clone(), r, form })
}

impl TraceKernel {
    pub fn arity(&self) -> usize {
        self.base.arity() - 2 * self.r
    }

    pub fn alpha(&self) -> f64 {
        self.base.alpha() + self.r as f64
    }

    pub fn hurst(&self) -> f64 {
        self.alpha() + self.arity() as f64 / 2.0 + 1.0
    }

    pub fn is_symmetric(&self) -> bool {
        self.base.is_symmetric()
    }

    /// Closed-form coefficient when g_r = c·(Σx)^{α+r}.
    pub fn closed_coefficient(&self) -> Option<f64> {
        match self.form {
            TraceForm::Identity => self.base.power_sum_coefficient(),
            TraceForm::Closed { coef } => Some(coef),
            TraceForm::Quadrature { .. } => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_with_error(x)?.value)
    }

    pub fn eval_with_error(&self, x: &[f64]) -> Result<Estimate> {
        if x.len() != self.arity() {
            return arg(format!("trace of arity {} evaluated at {} coordinates", self.arity(), x.len()));
        }
        if let Some(v) = x.iter().find(|v| !(**v > 0.0)) {
            return Err(crate::error::Error::Domain(format!("coordinate {v} is not strictly positive")));
        }
        match &self.form {
            TraceForm::Identity => Ok(Estimate { value: self.base.value(x), error: 0.0 }),
            TraceForm::Closed { coef } => Ok(Estimate {
                value: coef * x.iter().sum::<f64>().powf(self.alpha()),
                error: 0.0,
            }),
            TraceForm::Quadrature { quad } => {
                let mut buf = vec![0.0; self.base.arity()];
                buf[2 * self.r..].copy_from_slice(x);
                nested(&self.base, self.r, 0, &mut buf, quad)
            }
        }
    }

    /// Value for hot loops; NaN where quadrature fails.
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.form {
            TraceForm::Identity => self.base.value(x),
            TraceForm::Closed { coef } => coef * x.iter().sum::<f64>().powf(self.alpha()),
            TraceForm::Quadrature { .. } => self.eval(x).unwrap_or(f64::NAN),
        }
    }

    /// A quadrature-based evaluator of the same trace, regardless of any
    /// closed form.
    pub fn numeric(&self, quad: &QuadratureConfig) -> TraceKernel {
        let form = if self.r == 0 { TraceForm::Identity } else { TraceForm::Quadrature { quad: *quad } };
        TraceKernel { base: self.base.clone(), r: self.r, form }
    }
}

fn nested(g: &Kernel, r: usize, level: usize, buf: &mut [f64], quad: &QuadratureConfig) -> Result<Estimate> {
    if level == r {
        return Ok(Estimate { value: g.value(buf), error: 0.0 });
    }
    let free: f64 = buf[2 * r..].iter().sum();
    // inner values shrink like a power of y: only relative accuracy makes sense
    let inner_quad = QuadratureConfig { abs_tol: 0.0, ..*quad };
    let mut inner_err = 0.0f64;
    let mut failure = None;
    let est = integrate_half_line(
        |y| {
            buf[2 * level] = y;
            buf[2 * level + 1] = y;
            match nested(g, r, level + 1, buf, &inner_quad) {
                Ok(e) => {
                    inner_err = inner_err.max(e.error);
                    e.value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &[free],
        quad,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Estimate { value: est.value, error: est.error + inner_err })
}
