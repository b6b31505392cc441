//! Public randomness shared by Alice and Bob.
//!
//! Sub-protocols draw from seeds derived from the master seed and a fixed
//! label, so both parties obtain identical streams without communicating.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SharedRandomness {
    seed: [u8; 32],
}

impl SharedRandomness {
    pub fn new(master: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"master");
        h.update(master.to_le_bytes());
        SharedRandomness { seed: h.finalize().into() }
    }

    /// Child randomness for `label`; equal labels give equal children.
    pub fn derive(&self, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(self.seed);
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        SharedRandomness { seed: h.finalize().into() }
    }

    /// 64-bit identifier of this stream, used as a seed commitment on the wire.
    pub fn id(&self) -> u64 {
        u64::from_le_bytes(self.seed[..8].try_into().unwrap())
    }

    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.seed)
    }
}
