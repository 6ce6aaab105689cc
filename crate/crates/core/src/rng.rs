//! Counter-based random streams: one ChaCha8 stream per sample index, keyed
//! by the run seed and an experiment tag, so results do not depend on how
//! samples are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
    key: [u8; 32],
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl Streams {
    pub fn new(seed: u64, tag: &str) -> Self {
        let mut state = seed ^ fnv1a(tag).rotate_left(17);
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
        }
        Self { seed, key }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent sub-family, e.g. for a second estimator in one run.
    pub fn derive(&self, tag: &str) -> Self {
        let mut state = u64::from_le_bytes(self.key[..8].try_into().expect("8 bytes")) ^ fnv1a(tag);
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
        }
        Self { seed: self.seed, key }
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}
