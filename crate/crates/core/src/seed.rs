//! Stable seed fan-out.
//!
//! Child seeds are a pure function of the master seed, a component label and
//! integer coordinates, so adding grid cells or reads never shifts the seeds of
//! existing ones. The mixing is spelled out here rather than delegated to
//! `std::hash`, whose output is not stable across toolchains.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// One step of the SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, component: &str, coords: &[u64]) -> u64 {
    let mut label = FNV_OFFSET;
    for b in component.bytes() {
        label ^= u64::from(b);
        label = label.wrapping_mul(FNV_PRIME);
    }
    let mut h = splitmix64(master ^ splitmix64(label));
    for &c in coords {
        h = splitmix64(h ^ splitmix64(c.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child_rng(master: u64, component: &str, coords: &[u64]) -> ChaCha8Rng {
    rng_from(derive_seed(master, component, coords))
}
