//! Counter-based random number generation.
//!
//! Every random decision in the library is a pure function of
//! `(seed, stream, index, draw counter)`. Mark `i` and the coin for pair
//! `(i, j)` are therefore reproducible independently of iteration order or
//! parallel schedule.

/// Logical streams. Keeping these disjoint guarantees that e.g. mark
/// sampling and edge coins never share randomness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    /// Copula draws for node marks.
    Marks = 1,
    /// Bernoulli edge coins, indexed by the canonical pair (i < j).
    Edges = 2,
    /// Monte-Carlo limit evaluators.
    MonteCarlo = 3,
    /// Rewiring proposals.
    Rewire = 4,
    /// Bootstrap replicate seeds.
    Bootstrap = 5,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_A: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_B: u64 = 0x94D0_49BB_1331_11EB;

/// SplitMix64 finalizer. Bijective on u64 with good avalanche.
#[inline(always)]
fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(MIX_A);
    x = (x ^ (x >> 27)).wrapping_mul(MIX_B);
    x ^ (x >> 31)
}

/// A stateless counter-based generator keyed by (seed, stream, index).
///
/// `next_u64` hashes the key together with an internal draw counter, so a
/// `KeyedRng` is cheap to construct per node / per pair and never shares
/// state with any other instance.
#[derive(Clone, Debug)]
pub struct KeyedRng {
    key: u64,
    counter: u64,
}

impl KeyedRng {
    pub fn new(seed: u64, stream: Stream, index: u64) -> Self {
        let key = mix64(seed ^ (stream as u64).wrapping_mul(GOLDEN)) ^ mix64(index.wrapping_mul(MIX_A));
        KeyedRng { key: mix64(key), counter: 0 }
    }

    #[inline(always)]
    pub fn next_u64(&mut self) -> u64 {
        let out = mix64(self.key ^ self.counter.wrapping_mul(GOLDEN));
        self.counter += 1;
        out
    }

    /// Uniform draw in the open interval (0, 1).
    #[inline(always)]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n).
    #[inline(always)]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        // 128-bit multiply rejection-free range reduction (tiny bias < 2^-64,
        // irrelevant at simulation scale).
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

/// One-shot uniform for the edge coin of the canonical pair (i < j).
#[inline(always)]
pub fn pair_coin(seed: u64, i: u32, j: u32) -> f64 {
    debug_assert!(i < j);
    let idx = ((i as u64) << 32) | j as u64;
    KeyedRng::new(seed, Stream::Edges, idx).uniform()
}

/// Derive a child seed, used to hand independent streams to replicates.
pub fn child_seed(seed: u64, label: u64) -> u64 {
    mix64(seed ^ label.wrapping_mul(GOLDEN))
}
