//! Seeding scheme shared by every stochastic component.
//!
//! A run is identified by a 64-bit seed and a replica index. The seed keys a
//! ChaCha8 generator and the replica index selects its stream, so replicas
//! are independent and any one of them can be regenerated in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}
