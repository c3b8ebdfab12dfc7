use graph_core::EgoNet;

/// SplitMix64 finalizer; good bit avalanche for hash-based assignment.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic train/valid/test split keyed on (ego id, seed) only;
/// stream order never matters. Ratios must sum to 1.
pub fn split_dataset(
    egonets: Vec<EgoNet>,
    ratios: (f64, f64, f64),
    seed: u64,
) -> (Vec<EgoNet>, Vec<EgoNet>, Vec<EgoNet>) {
    let (r_train, r_valid, r_test) = ratios;
    assert!(
        (r_train + r_valid + r_test - 1.0).abs() < 1e-9,
        "ratios must sum to 1"
    );
    let mut train = Vec::new();
    let mut valid = Vec::new();
    let mut test = Vec::new();
    for e in egonets {
        let h = splitmix64(u64::from(e.ego_global_id) ^ splitmix64(seed));
        let u = h as f64 / (u64::MAX as f64 + 1.0);
        if u < r_train {
            train.push(e);
        } else if u < r_train + r_valid {
            valid.push(e);
        } else {
            test.push(e);
        }
    }
    (train, valid, test)
}
