//! Seeded random streams. All randomness flows from one master seed through
//! named sub-streams, so changes in one component do not perturb the draws of
//! another.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Covering = 1,
    Selection = 2,
    Crossover = 3,
    Mutation = 4,
    Deletion = 5,
    Control = 6,
    Splits = 7,
    Shuffle = 8,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
