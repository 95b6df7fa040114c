//! Deterministic per-trial random streams.
//!
//! Every trial owns exactly one [`RngStream`], derived from the experiment
//! seed and the trial index. The derivation mixes both values through
//! splitmix64 so that distinct trial indices yield independent streams and
//! the same (seed, stream id) pair replays the identical draw sequence on
//! any platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 step: advances the state by the golden-ratio increment and
/// returns a finalized 64-bit output.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seedable random stream keyed by (seed, stream id).
///
/// The 256-bit ChaCha key is filled from a splitmix64 sequence seeded with
/// `seed ^ splitmix64(stream_id)`, so streams with different ids share no
/// key material.
#[derive(Debug, Clone)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut id_state = stream_id;
        let mut state = seed ^ splitmix64(&mut id_state);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        RngStream {
            seed,
            stream_id,
            rng: ChaCha8Rng::from_seed(key),
        }
    }
}

impl rand::RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
