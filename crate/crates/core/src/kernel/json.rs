use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::Kernel;
use crate::error::{Error, Result};

/// Serialized kernel document. Field order is the canonical order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    pub kind: String,
    pub k: usize,
    pub alpha: f64,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub children: Vec<KernelDoc>,
}

fn num(v: f64) -> Value {
    Value::from(v)
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

impl From<&Kernel> for KernelDoc {
    fn from(g: &Kernel) -> Self {
        let mut params = Map::new();
        let mut children = Vec::new();
        let kind = match g {
            Kernel::PowerSum { .. } => "powersum",
            Kernel::ProductPower { gammas } => {
                params.insert("gammas".into(), nums(gammas));
                "productpower"
            }
            Kernel::RatioForm { a, b } => {
                params.insert("a".into(), nums(a));
                params.insert("b".into(), num(*b));
                "ratioform"
            }
            Kernel::Scale { c, inner } => {
                params.insert("c".into(), num(*c));
                children.push(KernelDoc::from(inner.as_ref()));
                "scale"
            }
            Kernel::Sum(ch) | Kernel::Max(ch) | Kernel::Min(ch) => {
                children.extend(ch.iter().map(KernelDoc::from));
                match g {
                    Kernel::Sum(_) => "sum",
                    Kernel::Max(_) => "max",
                    _ => "min",
                }
            }
            Kernel::Perturbed { inner, c, delta } => {
                params.insert("c".into(), num(*c));
                params.insert("delta".into(), num(*delta));
                children.push(KernelDoc::from(inner.as_ref()));
                "perturbed"
            }
            Kernel::Symmetrized(inner) => {
                children.push(KernelDoc::from(inner.as_ref()));
                "symmetrized"
            }
        };
        KernelDoc {
            kind: kind.into(),
            k: g.arity(),
            alpha: g.alpha(),
            params,
            children,
        }
    }
}

fn get_f64(p: &Map<String, Value>, key: &str) -> Result<f64> {
    p.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Argument(format!("missing numeric parameter '{key}'")))
}

fn get_vec(p: &Map<String, Value>, key: &str) -> Result<Vec<f64>> {
    p.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Argument(format!("missing array parameter '{key}'")))?
        .iter()
        .map(|v| v.as_f64().ok_or_else(|| Error::Argument(format!("non-numeric entry in '{key}'"))))
        .collect()
}

impl TryFrom<&KernelDoc> for Kernel {
    type Error = Error;

    fn try_from(d: &KernelDoc) -> Result<Kernel> {
        let children = || -> Result<Vec<Kernel>> { d.children.iter().map(Kernel::try_from).collect() };
        let single = || -> Result<Kernel> {
            match d.children.as_slice() {
                [c] => Kernel::try_from(c),
                _ => Err(Error::Argument(format!("'{}' takes exactly one child", d.kind))),
            }
        };
        let g = match d.kind.as_str() {
            "powersum" => Kernel::power_sum(d.k, d.alpha),
            "productpower" => Kernel::product_power(get_vec(&d.params, "gammas")?),
            "ratioform" => Kernel::ratio_form(get_vec(&d.params, "a")?, get_f64(&d.params, "b")?)?,
            "scale" => Kernel::scale(get_f64(&d.params, "c")?, single()?),
            "sum" => Kernel::sum(children()?)?,
            "max" => Kernel::max(children()?)?,
            "min" => Kernel::min(children()?)?,
            "perturbed" => Kernel::perturbed(single()?, get_f64(&d.params, "c")?, get_f64(&d.params, "delta")?)?,
            "symmetrized" => Kernel::Symmetrized(Box::new(single()?)),
            other => return Err(Error::Argument(format!("unknown kernel kind '{other}'"))),
        };
        if g.arity() != d.k {
            return Err(Error::Argument(format!("declared k = {} but kernel has arity {}", d.k, g.arity())));
        }
        if (g.alpha() - d.alpha).abs() > 1e-12 * d.alpha.abs().max(1.0) {
            return Err(Error::Argument(format!(
                "declared alpha = {} but kernel has alpha {}",
                d.alpha,
                g.alpha()
            )));
        }
        Ok(g)
    }
}

/// Canonical compact JSON.
pub fn to_json(g: &Kernel) -> String {
    serde_json::to_string(&KernelDoc::from(g)).expect("kernel documents always serialize")
}

pub fn from_json(s: &str) -> Result<Kernel> {
    let doc: KernelDoc = serde_json::from_str(s)?;
    Kernel::try_from(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let g = Kernel::perturbed(
            Kernel::sum(vec![
                Kernel::scale(0.5, Kernel::power_sum(2, -1.2)),
                Kernel::ratio_form(vec![0.3, 0.3], 1.8).unwrap(),
            ])
            .unwrap(),
            0.25,
            0.5,
        )
        .unwrap();
        let s = to_json(&g);
        let back = from_json(&s).unwrap();
        assert_eq!(back, g);
        assert_eq!(to_json(&back), s);
        assert_eq!(
            to_json(&Kernel::power_sum(2, -1.2)),
            r#"{"kind":"powersum","k":2,"alpha":-1.2,"params":{},"children":[]}"#
        );
    }

    #[test]
    fn inconsistent_documents_are_rejected() {
        assert!(from_json(r#"{"kind":"ratioform","k":2,"alpha":-1.0,"params":{"a":[0.3,0.3],"b":1.9}}"#).is_err());
        assert!(from_json(r#"{"kind":"powersum","k":2,"alpha":-1.2,"bogus":1}"#).is_err());
        assert!(from_json(r#"{"kind":"nope","k":2,"alpha":-1.2}"#).is_err());
        let ok = from_json(r#"{"kind":"ratioform","k":2,"alpha":-1.3,"params":{"a":[0.3,0.3],"b":1.9}}"#);
        assert!(ok.is_ok());
    }
}
