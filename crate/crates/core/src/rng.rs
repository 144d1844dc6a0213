use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Address of an independent random stream: trial `stream_index` of a run
/// seeded with `master_seed`.
///
/// Streams are ChaCha8 keyed by the master seed with the stream index as the
/// ChaCha stream id, so any trial can be regenerated without replaying the
/// others.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RngStream {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// A stream for a different experiment sharing the same master seed.
    pub fn derive(&self, salt: u64) -> RngStream {
        RngStream {
            master_seed: self
                .master_seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .rotate_left(17)
                ^ salt,
            stream_index: self.stream_index,
        }
    }
}
