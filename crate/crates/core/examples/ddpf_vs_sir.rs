//! Deformation-gated model replacement against a fixed-model SIR filter on the
//! maneuver scenarios.
//!
//! `cargo run --release --example ddpf_vs_sir [seed]`

use ddpf::detection::BackgroundModel;
use ddpf::imaging::to_gray;
use ddpf::metrics::{evaluate, DEFAULT_LOSS_RADIUS};
use ddpf::synth::{builtin_scenario, render, render_background};
use ddpf::tracker::{run, TrackerConfig};

fn main() -> ddpf::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed must be an integer"));
    println!(
        "{:<16} {:<11} {:>8} {:>9} {:>8}",
        "scenario", "method", "rmse", "lost", "updates"
    );
    for name in ["maneuver-rotate", "maneuver-scale"] {
        let spec = builtin_scenario(name)?;
        let (frames, truth) = render(&spec)?;
        for (method, deformation_enabled) in [("ddpf", true), ("static_sir", false)] {
            let config = TrackerConfig {
                deformation_enabled,
                seed,
                ..TrackerConfig::default()
            };
            let background = BackgroundModel::from_reference(to_gray(&render_background(&spec)));
            let result = run(&frames, background, &config)?;
            let report = evaluate(&result.tracks, &truth, DEFAULT_LOSS_RADIUS)?;
            println!(
                "{name:<16} {method:<11} {:>8.2} {:>9.3} {:>8}",
                report.mean_rmse,
                report.max_lost_fraction(),
                result.events.model_updates.len()
            );
            for u in &result.events.model_updates {
                println!(
                    "{:>30} frame {:3}: d = {:.3}, {:?} -> {:?}",
                    "", u.frame, u.distance, u.old_dims, u.new_dims
                );
            }
        }
    }
    Ok(())
}
