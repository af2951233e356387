use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mc::NoiseLaw;

const DEFAULT: &str = include_str!("../../manifest/tolerances.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub seed: u64,
    pub decomposition: DecompositionTol,
    pub goldens: GoldenTol,
    pub acf: AcfTol,
    pub varscale: VarscaleTol,
    pub nclt: NcltTol,
    pub universality: UniversalityTol,
    pub clt: CltTol,
    pub combinatorics: CombinatoricsTol,
    pub isometry: IsometryTol,
    pub hypercontractivity: HyperTol,
    pub counterexample: CounterexampleTol,
    /// Wall-clock limits by criterion number.
    #[serde(default)]
    pub runtime_seconds: std::collections::BTreeMap<String, f64>,
    /// Checks that are expected to fail; see the README.
    pub known_infeasible: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionTol {
    pub kernels: usize,
    pub orders: Vec<usize>,
    pub max_horizon: usize,
    pub n: usize,
    pub laws: Vec<NoiseLaw>,
    pub max_rel_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoldenTol {
    pub alpha: f64,
    pub d5: Vec<i64>,
    pub trace_points: usize,
    pub trace_rel_tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AcfTol {
    pub k: usize,
    pub alpha: f64,
    pub horizon: usize,
    pub paths: usize,
    pub n: usize,
    pub lag_lo: usize,
    pub lag_hi: usize,
    pub target_slope: f64,
    pub slope_tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VarscaleTol {
    pub k: usize,
    pub alpha: f64,
    pub horizon: usize,
    pub paths: usize,
    pub log2_n_lo: u32,
    pub log2_n_hi: u32,
    pub lrd_target: f64,
    pub srd_gammas: Vec<f64>,
    pub srd_target: f64,
    pub slope_tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NcltTol {
    pub k: usize,
    pub alpha: f64,
    pub n: usize,
    pub paths: usize,
    pub ts: Vec<f64>,
    pub variance_rel_tol: f64,
    pub grid_cells: usize,
    pub limit_reps: usize,
    pub ks_level: f64,
    pub self_similarity_rel_tol: f64,
    pub sweep_horizons: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniversalityTol {
    pub laws: Vec<NoiseLaw>,
    pub max_z: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CltTol {
    pub gammas: Vec<f64>,
    pub horizon: usize,
    pub paths: usize,
    pub n: usize,
    pub max_lag: usize,
    pub ad_level: f64,
    pub split_max_z: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CombinatoricsTol {
    pub bell_max_k: usize,
    pub bell: Vec<u64>,
    pub pairing_max_k: usize,
    pub appell_max_order: usize,
    pub sprime_max_horizon: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsometryTol {
    pub max_order: usize,
    pub horizon: usize,
    pub draws: usize,
    pub max_z: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HyperTol {
    pub scale: f64,
    pub gaussian_p: f64,
    pub gaussian_samples: usize,
    pub gaussian_horizon: usize,
    pub gaussian_rel_tol: f64,
    pub tables: usize,
    pub table_horizon: usize,
    pub table_p: f64,
    pub table_samples: usize,
    pub bootstrap_reps: usize,
    pub max_ci_rel_width: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CounterexampleTol {
    pub log2_m_lo: u32,
    pub log2_m_hi: u32,
}

impl Manifest {
    /// The manifest shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT).expect("built-in manifest parses")
    }

    pub fn builtin_text() -> &'static str {
        DEFAULT
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn is_known_infeasible(&self, check: &str) -> bool {
        self.known_infeasible.iter().any(|c| c == check)
    }
}
