//! Counter-based per-edge random streams.
//!
//! An instance is keyed by `(seed, kind, n)`. Edge `e` owns the fixed window
//! of `draws_per_edge` 64-bit words starting at word `e * draws_per_edge` of a
//! single ChaCha8 keystream, so any edge range can be regenerated on its own
//! and the result does not depend on how generation is chunked or scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::GraphKind;

/// Words consumed per edge: two split draws followed by `r` cost draws.
pub(crate) fn draws_per_edge(r: usize) -> usize {
    2 + r
}

pub(crate) fn instance_key(seed: u64, kind: GraphKind, n: usize) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"budgetopt/instance/v1");
    h.update(seed.to_le_bytes());
    h.update([kind.tag()]);
    h.update((n as u64).to_le_bytes());
    h.finalize().into()
}

/// Derives an independent 64-bit seed from a base seed and a path of indices.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(b"budgetopt/derive/v1");
    h.update(base.to_le_bytes());
    for p in path {
        h.update(p.to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Uniform in [0, 1) with 53 random bits.
#[inline]
pub fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub(crate) struct EdgeStream {
    rng: ChaCha8Rng,
}

impl EdgeStream {
    /// Positions the stream at the first draw of `first_edge`.
    pub(crate) fn at_edge(key: [u8; 32], draws: usize, first_edge: usize) -> Self {
        let mut rng = ChaCha8Rng::from_seed(key);
        // ChaCha word positions count 32-bit words.
        rng.set_word_pos(first_edge as u128 * draws as u128 * 2);
        Self { rng }
    }

    #[inline]
    pub(crate) fn next_unit(&mut self) -> f64 {
        unit_f64(self.rng.next_u64())
    }
}

/// A seeded general-purpose RNG for searches and Monte-Carlo loops.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_are_position_independent() {
        let key = instance_key(7, GraphKind::Complete, 10);
        let mut whole = EdgeStream::at_edge(key, 3, 0);
        let seq: Vec<f64> = (0..30).map(|_| whole.next_unit()).collect();
        let mut tail = EdgeStream::at_edge(key, 3, 6);
        let part: Vec<f64> = (0..12).map(|_| tail.next_unit()).collect();
        assert_eq!(&seq[18..30], &part[..]);
    }

    #[test]
    fn keys_separate_kinds_and_sizes() {
        let a = instance_key(1, GraphKind::Complete, 10);
        assert_ne!(a, instance_key(1, GraphKind::Bipartite, 10));
        assert_ne!(a, instance_key(1, GraphKind::Complete, 11));
        assert_ne!(a, instance_key(2, GraphKind::Complete, 10));
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
    }

    #[test]
    fn unit_range() {
        assert_eq!(unit_f64(0), 0.0);
        assert!(unit_f64(u64::MAX) < 1.0);
    }
}
