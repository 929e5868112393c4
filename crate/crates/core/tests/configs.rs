use std::path::PathBuf;

use clusterbandit::harness::ExperimentConfig;
use clusterbandit::presets::{preset_fig1, preset_fig2, FIG1_HORIZON};

fn committed(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    ExperimentConfig::from_json(&text).unwrap()
}

#[test]
fn committed_configs_equal_presets() {
    assert_eq!(committed("fig1.json"), preset_fig1(FIG1_HORIZON));
    assert_eq!(committed("fig2.json"), preset_fig2());
}

#[test]
fn presets_round_trip_through_json() {
    for c in [preset_fig1(FIG1_HORIZON), preset_fig2()] {
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
