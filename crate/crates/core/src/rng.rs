//! Keyed random streams: one independent ChaCha8 stream per
//! `(seed, stream_id, purpose)`, so trajectories and their noise sources
//! never share state regardless of how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    /// Trajectory index within an ensemble.
    pub stream_id: u64,
}

/// What a stream is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    Brownian,
    /// Extra normals for splitting a grid cell's Brownian increment at jump times.
    BrownianBridge,
    Measure1Times,
    Measure1Marks,
    Measure2Times,
    Measure2Marks,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Brownian => 1,
            Purpose::BrownianBridge => 2,
            Purpose::Measure1Times => 3,
            Purpose::Measure1Marks => 4,
            Purpose::Measure2Times => 5,
            Purpose::Measure2Marks => 6,
        }
    }
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngSpec { seed, stream_id }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        RngSpec { stream_id, ..self }
    }

    /// The generator for one purpose. The ChaCha key is derived from
    /// `(seed, purpose)` and the trajectory index selects the ChaCha stream.
    pub fn stream(&self, purpose: Purpose) -> ChaCha8Rng {
        let mut state = self.seed ^ purpose.tag().wrapping_mul(0xd1b54a32d192ed03);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}
