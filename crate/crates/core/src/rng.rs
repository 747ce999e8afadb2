//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a Xoshiro256** generator
//! (a 64-bit-output linear shift-register generator with 256 bits of state).
//! The base state is expanded from the user seed with SplitMix64, exactly as
//! `SeedableRng::seed_from_u64` does for this generator. Independent streams
//! are split off the base state with the generator's `jump()` function, which
//! advances it by 2^128 draws:
//!
//! | stream            | jumps |
//! |-------------------|-------|
//! | node coordinates  | 0     |
//! | commodity pairing | 1     |
//! | auxiliary `k`     | 2 + k |
//!
//! Output therefore depends only on the seed and the stream, never on the
//! platform or on how many values another stream consumed.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;

pub type StreamRng = Xoshiro256StarStar;

/// Named streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Nodes,
    Pairing,
    Aux(u32),
}

impl Stream {
    fn jumps(self) -> u64 {
        match self {
            Stream::Nodes => 0,
            Stream::Pairing => 1,
            Stream::Aux(k) => 2 + u64::from(k),
        }
    }
}

/// Generator for `stream` under `seed`.
pub fn stream(seed: u64, stream: Stream) -> StreamRng {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    for _ in 0..stream.jumps() {
        rng.jump();
    }
    rng
}
