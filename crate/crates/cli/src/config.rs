use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use volterra_core::kernel::{from_json, Kernel};
use volterra_core::mc::NoiseLaw;

use crate::CliError;

/// Every setting a command can take. Flags fill it first; a `--config`
/// file then overrides the fields it sets. The effective value is echoed
/// into the run manifest and re-runs the same command.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// A kernel document, a family name or a path to a document.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseLaw>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub untruncated: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub with_eps: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moments: Option<String>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub off_diagonal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_lag: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lag_lo: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lag_hi: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log2_n_lo: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log2_n_hi: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ts: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_table: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_horizon: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
}

impl RunConfig {
    /// Fields set in `other` replace those in `self`.
    pub fn overlay(&mut self, other: RunConfig) {
        let mut base = serde_json::to_value(&*self).expect("config serializes");
        let top = serde_json::to_value(other).expect("config serializes");
        if let (Value::Object(b), Value::Object(t)) = (&mut base, top) {
            for (key, v) in t {
                b.insert(key, v);
            }
        }
        *self = serde_json::from_value(base).expect("merged config is well formed");
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    pub fn noise(&self) -> NoiseLaw {
        self.noise.unwrap_or(NoiseLaw::Gaussian)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn require<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
        v.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
    }

    pub fn kernel(&self) -> Result<Kernel, CliError> {
        let family = match &self.kernel {
            Some(Value::Object(_)) => {
                let text = self.kernel.as_ref().expect("matched").to_string();
                return Ok(from_json(&text)?);
            }
            Some(Value::String(s)) if s.trim_start().starts_with('{') => return Ok(from_json(s)?),
            Some(Value::String(s)) if s.ends_with(".json") => {
                let text = std::fs::read_to_string(s)
                    .map_err(|e| CliError::Usage(format!("cannot read kernel {s}: {e}")))?;
                return Ok(from_json(&text)?);
            }
            Some(Value::String(s)) => s.to_ascii_lowercase(),
            Some(other) => return Err(CliError::Usage(format!("unusable kernel value {other}"))),
            None if self.gammas.is_some() => "productpower".into(),
            None if self.a.is_some() => "ratioform".into(),
            None => "powersum".into(),
        };
        match family.as_str() {
            "powersum" => Ok(Kernel::power_sum(Self::require(self.k, "k")?, Self::require(self.alpha, "alpha")?)),
            "productpower" => {
                let g = self.gammas.clone().ok_or_else(|| CliError::Usage("missing --gammas".into()))?;
                Ok(Kernel::product_power(g))
            }
            "ratioform" => {
                let a = self.a.clone().ok_or_else(|| CliError::Usage("missing --a".into()))?;
                Ok(Kernel::ratio_form(a, Self::require(self.b, "b")?)?)
            }
            other => Err(CliError::Usage(format!(
                "unknown kernel family '{other}' (powersum, productpower, ratioform, or a JSON document)"
            ))),
        }
    }
}
