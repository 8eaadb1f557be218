//! Shared fixtures for the benchmarks.

use strands_core::seed::stage;
use strands_core::sim::{build_scenario, sample_dataset, SimDraw};
use strands_core::SeedStream;

/// First replicate of a named scenario.
pub fn draw(scenario: &str, seed: u64) -> SimDraw {
    let scenario = build_scenario(scenario).expect("known scenario");
    sample_dataset(&scenario, &SeedStream::new(seed).derive_path(&[stage::SIM_DATA, 0])).expect("scenario samples")
}
