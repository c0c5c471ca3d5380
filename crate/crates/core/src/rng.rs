//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by a 256-bit key derived from
//! `(seed, context, replica, epoch)`. Two streams with different identifiers
//! are different keys of the same pseudo-random function, so they can be
//! handed to different workers without any coordination, and replaying a
//! stream from the same identifier reproduces its draws bit for bit.

use rand::{Error as RandError, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Phase of the computation that owns a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u32)]
pub enum Context {
    Initial = 1,
    Decorrelation = 2,
    Dephasing = 3,
    Resampling = 4,
    Parallel = 5,
    Serial = 6,
    Trial = 7,
    User = 8,
}

/// Hierarchical stream identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StreamId {
    pub context: Context,
    pub replica: u64,
    pub epoch: u64,
}

impl StreamId {
    pub fn new(context: Context, replica: u64, epoch: u64) -> Self {
        Self {
            context,
            replica,
            epoch,
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_key(seed: u64, id: &StreamId) -> [u8; 32] {
    let words = [
        mix64(seed),
        mix64(seed ^ mix64(id.context as u64)),
        mix64(seed.rotate_left(17) ^ mix64(id.replica ^ 0x5851_f42d_4c95_7f2d)),
        mix64(seed.rotate_left(41) ^ mix64(id.epoch ^ 0x1405_7b7e_f767_814f)),
    ];
    let mut key = [0u8; 32];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    key
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    id: StreamId,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, id: StreamId) -> Self {
        let inner = ChaCha8Rng::from_seed(derive_key(seed, &id));
        Self { seed, id, inner }
    }

    pub fn with(seed: u64, context: Context, replica: u64, epoch: u64) -> Self {
        Self::new(seed, StreamId::new(context, replica, epoch))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn id(&self) -> StreamId {
        self.id
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (Lemire's multiply-shift with rejection).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        loop {
            let m = (self.inner.next_u64() as u128) * (n as u128);
            let lo = m as u64;
            if lo >= n.wrapping_neg() % n {
                return (m >> 64) as u64;
            }
        }
    }

    /// Two uniform random bits.
    #[inline]
    pub fn quarter(&mut self) -> u8 {
        (self.inner.next_u32() >> 30) as u8
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), RandError> {
        self.inner.try_fill_bytes(dest)
    }
}

/// The streams of one phase invocation: `(seed, epoch)` fixed, context and
/// replica chosen per draw site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFamily {
    pub seed: u64,
    pub epoch: u64,
}

impl StreamFamily {
    pub fn new(seed: u64, epoch: u64) -> Self {
        Self { seed, epoch }
    }

    pub fn stream(&self, context: Context, replica: u64) -> RngStream {
        RngStream::with(self.seed, context, replica, self.epoch)
    }
}
