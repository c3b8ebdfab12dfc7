/// Bloom filter over unordered node-pair keys. No false negatives;
/// false positives are pruned later by the verification join, so filter
/// quality only affects cost, never correctness.
#[derive(Debug, Clone)]
pub struct BloomFilter {
    bits: Vec<u64>,
    num_bits: u64,
    num_hashes: u32,
    seed1: u64,
    seed2: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Packs an unordered node pair into one 64-bit key.
pub fn pair_key(u: u32, v: u32) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    ((a as u64) << 32) | b as u64
}

impl BloomFilter {
    pub fn new(num_bits: u64, num_hashes: u32, salt: u64) -> BloomFilter {
        let num_bits = num_bits.max(8);
        BloomFilter {
            bits: vec![0; num_bits.div_ceil(64) as usize],
            num_bits,
            num_hashes: num_hashes.max(1),
            seed1: splitmix64(salt),
            seed2: splitmix64(salt.wrapping_add(0xa076_1d64_78bd_642f)),
        }
    }

    // Double hashing: bit_i = h1 + i*h2 mod m.
    fn positions(&self, key: u64) -> impl Iterator<Item = u64> + '_ {
        let h1 = splitmix64(key ^ self.seed1);
        let h2 = splitmix64(key ^ self.seed2) | 1;
        (0..self.num_hashes as u64).map(move |i| h1.wrapping_add(i.wrapping_mul(h2)) % self.num_bits)
    }

    pub fn insert(&mut self, key: u64) {
        let positions: Vec<u64> = self.positions(key).collect();
        for p in positions {
            self.bits[(p / 64) as usize] |= 1 << (p % 64);
        }
    }

    pub fn contains(&self, key: u64) -> bool {
        self.positions(key)
            .all(|p| self.bits[(p / 64) as usize] & (1 << (p % 64)) != 0)
    }

    pub fn num_bits(&self) -> u64 {
        self.num_bits
    }

    pub fn num_hashes(&self) -> u32 {
        self.num_hashes
    }
}
