//! Deterministic per-party randomness derived from one master seed.
//!
//! Every node is `SHA-256(parent ‖ len(label) ‖ label)`; the root is the hash of
//! a fixed tag and the little-endian seed. The driver uses these labels:
//!
//! | label path                     | consumer                               |
//! |--------------------------------|----------------------------------------|
//! | `setup`                        | public ring element                    |
//! | `ca`                           | certificate issuer key                 |
//! | `server`                       | server signing key                     |
//! | `user/<u>`                     | long-term keys of user `u`             |
//! | `user/<u>/signing`             | account signing key of user `u`        |
//! | `user/<u>/period/<e>`          | shares and encryption randomness       |
//! | `inputs/period/<e>`            | synthetic inputs                       |
//! | `dropout`                      | dropout victims chosen from counts     |
//!
//! `setup` and `dropout` are consumed by callers that build a scheme or a
//! schedule from the same seed, such as the command-line driver.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree([u8; 32]);

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"dtahe seed tree");
        h.update(seed.to_le_bytes());
        Self(h.finalize().into())
    }

    pub fn child(&self, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(self.0);
        h.update((label.len() as u32).to_le_bytes());
        h.update(label.as_bytes());
        Self(h.finalize().into())
    }

    /// Follows a `/`-separated path of labels.
    pub fn path(&self, path: &str) -> Self {
        path.split('/').fold(*self, |node, label| node.child(label))
    }

    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.0)
    }
}
