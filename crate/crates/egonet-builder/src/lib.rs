//! Ego-net materialization for all nodes of a large graph, organized as
//! local map/shuffle/reduce stages: Bloom-filtered wedge emission, an
//! exact verification join, and a group-by-ego reduce. The stage
//! boundaries mirror a MapReduce deployment but run locally.

mod bloom;
mod stages;

pub use bloom::{pair_key, BloomFilter};
pub use stages::{
    build_all_egonets, build_bloom, build_egonets_to_writer, emit_wedges, group_by_ego,
    verify_join, TriangleCandidate,
};

/// Knobs for the builder. `cap` bounds the number of neighbors kept per
/// ego-net (highest activity wins, ties by smaller global id).
#[derive(Debug, Clone)]
pub struct BuilderConfig {
    pub cap: usize,
    pub bloom_bits_per_edge: f64,
    pub bloom_hashes: u32,
    pub bloom_salt: u64,
    pub include_pendants: bool,
    pub partitions: usize,
}

impl Default for BuilderConfig {
    fn default() -> BuilderConfig {
        BuilderConfig {
            cap: 300,
            bloom_bits_per_edge: 10.0,
            bloom_hashes: 7,
            bloom_salt: 0,
            include_pendants: true,
            partitions: 1,
        }
    }
}
