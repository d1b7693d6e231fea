//! Counter-based seed splitting. Every task gets its own ChaCha stream derived from
//! the root seed and a task index, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    root: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    /// Generator for task `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.root);
        r.set_stream(index);
        r
    }

    /// Independent child stream, for nested task trees.
    pub fn child(&self, index: u64) -> SeedStream {
        SeedStream { root: splitmix(self.root ^ splitmix(index.wrapping_add(1))) }
    }

    pub fn root(&self) -> u64 {
        self.root
    }
}
