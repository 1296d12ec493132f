//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarmtrack::{generate, Candidate, CostMatrix, LabeledObservationSet, ScenarioConfig};

/// Uniform `[0, 10)` costs, `rows × cols`.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> CostMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| rng.random_range(0.0..10.0)).collect();
    CostMatrix::new(rows, cols, data).expect("valid matrix")
}

/// The ten-object, thirty-date default campaign.
pub fn default_campaign() -> LabeledObservationSet {
    generate(&ScenarioConfig::default()).expect("default scenario")
}

/// Truth with every angle nudged, so assignments are not trivially diagonal.
pub fn nudged_truth(set: &LabeledObservationSet) -> Candidate {
    let mut c = set.truth.clone();
    for (i, el) in c.elements.iter_mut().enumerate() {
        el.theta += 0.3f64.to_radians() * (i as f64 - 4.5);
        el.a += 5.0;
    }
    c
}
