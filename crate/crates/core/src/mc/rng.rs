//! Counter-based stream derivation.
//!
//! A stream is identified by a root seed and a path of indices. The
//! generator key is the SHA-256 digest of the pair, so any worker can
//! rebuild the stream for path `[run, replicate]` without coordinating
//! with the others.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

const DOMAIN: &[u8] = b"volterra/stream/v1";

#[derive(Clone, Debug)]
pub struct RngStream {
    root: u64,
    path: Vec<u64>,
    rng: ChaCha12Rng,
}

pub fn derive_stream(root: u64, path: &[u64]) -> RngStream {
    let mut hasher = Sha256::new();
    hasher.update(DOMAIN);
    hasher.update(root.to_le_bytes());
    hasher.update((path.len() as u64).to_le_bytes());
    for p in path {
        hasher.update(p.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    RngStream {
        root,
        path: path.to_vec(),
        rng: ChaCha12Rng::from_seed(key),
    }
}

impl RngStream {
    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Child stream `path ++ [index]`.
    pub fn substream(&self, index: u64) -> RngStream {
        let mut path = self.path.clone();
        path.push(index);
        derive_stream(self.root, &path)
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
