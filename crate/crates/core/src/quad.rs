//! Adaptive Gauss–Kronrod quadrature and the substitutions used for the
//! power-law integrals of this crate.
//!
//! Half-line integrals are computed in logarithmic coordinates, y = e^v.
//! A power tail y^β becomes e^{(β+1)v}, which decays exponentially in v,
//! and an integrable singularity at 0 does the same at the other end, so
//! [1/cutoff, cutoff] captures everything up to a relative error of order
//! cutoff^{-(rate)}.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Half-line integrals run over [1/domain_cutoff, domain_cutoff].
    pub domain_cutoff: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
            domain_cutoff: 1e40,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol > 0.0 && self.domain_cutoff > 1.0) {
            return Err(Error::Argument("quadrature tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive GK15 on a finite interval.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut splits = 0;
    while err > cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
        if !total.is_finite() {
            return Err(Error::Numeric {
                message: "integrand is not finite".into(),
                estimate: f64::INFINITY,
            });
        }
        if splits >= cfg.max_subdivisions {
            return Err(Error::Numeric {
                message: format!("quadrature did not converge in {splits} subdivisions"),
                estimate: err,
            });
        }
        let p = heap.pop().expect("heap holds every panel");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // panel cannot be split further in floating point
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
        splits += 1;
        if splits % 64 == 0 {
            // re-sum to shed accumulated rounding in the running totals
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(Estimate { value, error })
}

/// ∫ f(u) du over [lo, hi] with 0 ≤ lo < hi, in logarithmic coordinates
/// u = e^v. With lo = 0 the lower end is cut at hi/cutoff.
pub fn integrate_log<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    if hi <= lo {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let vlo = if lo > 0.0 { lo.ln() } else { hi.ln() - 2.0 * cfg.domain_cutoff.ln() };
    let vhi = hi.ln();
    integrate(
        |v| {
            let u = v.exp();
            let y = f(u) * u;
            if y.is_finite() { y } else { 0.0 }
        },
        vlo,
        vhi,
        cfg,
    )
}

/// ∫_0^∞ f(y) dy, with break points where the integrand has kinks.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|b| *b > 0.0 && b.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let lo = 1.0 / cfg.domain_cutoff;
    let hi = cfg.domain_cutoff;
    let mut edges = vec![lo];
    edges.extend(pts.into_iter().filter(|p| *p > lo && *p < hi));
    edges.push(hi);
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for w in edges.windows(2) {
        total = total + integrate_log(&mut f, w[0], w[1], cfg)?;
    }
    Ok(total)
}
