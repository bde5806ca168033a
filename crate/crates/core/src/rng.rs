//! Seed derivation and the simulator RNG.
//!
//! Every stochastic component draws from a [`SimRng`] seeded through
//! [`derive_seed`], so a (config, master seed) pair pins the entire run.

use rand::SeedableRng;

/// Counter-based stream cipher RNG: identical sequences on every platform.
pub type SimRng = rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream))
}

/// RNG for a derived stream.
pub fn stream_rng(master: u64, stream: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, stream))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derived_streams_are_stable_and_distinct() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        assert_eq!(a, derive_seed(7, 0));
        assert_ne!(a, b);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn same_seed_same_draws() {
        let mut r1 = stream_rng(42, 3);
        let mut r2 = stream_rng(42, 3);
        for _ in 0..100 {
            assert_eq!(r1.gen::<u64>(), r2.gen::<u64>());
        }
    }
}
