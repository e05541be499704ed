//! Benchmark fixtures.

use polarq_core::channel::{self, grid_distribution};
use polarq_core::sim::{frame_rng, simulate_frame};
use polarq_core::{CodeConfig, DiscreteDistribution};

/// `count` frames of channel LLRs for `config` at `ebn0_db`.
pub fn frames(config: &CodeConfig, ebn0_db: f64, count: u64) -> Vec<Vec<f64>> {
    let sigma = channel::ebn0_to_sigma(ebn0_db, config.rate()).expect("valid Eb/N0");
    (0..count)
        .map(|i| simulate_frame(config, sigma, &mut frame_rng(0xBE7C, ebn0_db, i)).1)
        .collect()
}

/// Channel LLR distribution on the default grid at `ebn0_db` for rate 1/2.
pub fn channel_distribution(ebn0_db: f64) -> DiscreteDistribution {
    let sigma = channel::ebn0_to_sigma(ebn0_db, 0.5).expect("valid Eb/N0");
    let grid = channel::design_uniform_grid(sigma, channel::GRID_LEVELS).expect("valid grid");
    grid_distribution(sigma, &grid).expect("valid distribution")
}
