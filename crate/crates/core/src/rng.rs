//! Counter-based random streams keyed by `(seed, path, step)`.
//!
//! Every draw is a pure function of the key and a counter, so a path's
//! random numbers do not depend on which thread simulates it or in which
//! order. A step owns an unbounded lane counter, which lets rejection
//! samplers consume as many words as they need without shifting the draws
//! of the next step.

use rand::RngCore;

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    seed: u64,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Derives an independent key, e.g. for a second simulation sharing the
    /// user seed.
    pub fn fork(&self, tag: u64) -> Self {
        Self {
            seed: mix(self.seed ^ mix(tag.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }

    pub fn path(&self, index: u64) -> PathStream {
        PathStream {
            key: mix(self
                .seed
                .wrapping_add(mix(index.wrapping_mul(GAMMA) ^ 0x2545_f491_4f6c_dd1d))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStream {
    key: u64,
}

impl PathStream {
    #[inline]
    pub fn step(&self, index: u64) -> StepRng {
        StepRng {
            key: mix(self.key ^ mix(index.wrapping_add(GAMMA))),
            lane: 0,
        }
    }
}

/// Generator for the draws of a single step.
#[derive(Debug, Clone)]
pub struct StepRng {
    key: u64,
    lane: u64,
}

impl RngCore for StepRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.lane = self.lane.wrapping_add(1);
        mix(self.key.wrapping_add(self.lane.wrapping_mul(GAMMA)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
