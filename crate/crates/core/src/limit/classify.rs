use serde::Serialize;

/// What is known about the kernel: a homogeneous kernel in the long-memory
/// class, or coordinate-wise power bounds |a(i)| ≤ C ∏ i_j^{γ_j}.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MemorySpec {
    Ghk { k: usize, alpha: f64 },
    PowerBounds { gammas: Vec<f64>, off_diagonal: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Memory {
    LongMemory { hurst: f64 },
    ShortMemory,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub memory: Memory,
    pub basis: String,
    pub sigma2_estimate: Option<f64>,
}

pub fn classify_memory(spec: &MemorySpec) -> ClassificationResult {
    let (memory, basis) = match spec {
        MemorySpec::Ghk { k, alpha } => {
            let kf = *k as f64;
            if *k >= 1 && *alpha > -(kf + 1.0) / 2.0 && *alpha < -kf / 2.0 {
                (
                    Memory::LongMemory { hurst: alpha + kf / 2.0 + 1.0 },
                    "homogeneous kernel with exponent in (-(k+1)/2, -k/2)".to_string(),
                )
            } else {
                (Memory::Inconclusive, "homogeneity exponent outside (-(k+1)/2, -k/2)".to_string())
            }
        }
        MemorySpec::PowerBounds { gammas, off_diagonal } => {
            let k = gammas.len() as f64;
            if !gammas.is_empty() && gammas.iter().all(|&g| g < -1.0) {
                (Memory::ShortMemory, "every exponent below -1".to_string())
            } else if *off_diagonal
                && !gammas.is_empty()
                && gammas.iter().all(|&g| g < -0.5)
                && gammas.iter().sum::<f64>() < -k / 2.0 - 0.5
            {
                (
                    Memory::ShortMemory,
                    "off-diagonal form: every exponent below -1/2 and their sum below -k/2-1/2".to_string(),
                )
            } else {
                (Memory::Inconclusive, "power bounds meet neither short-memory test".to_string())
            }
        }
    };
    ClassificationResult { memory, basis, sigma2_estimate: None }
}
