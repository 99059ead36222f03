//! Two targets crossing with partial occlusion: identity is kept and the
//! deformation pass is skipped while the blobs are merged.
//!
//! `cargo run --release --example crossing_targets`

use ddpf::detection::BackgroundModel;
use ddpf::imaging::to_gray;
use ddpf::metrics::{evaluate, DEFAULT_LOSS_RADIUS};
use ddpf::output::events_json;
use ddpf::synth::{builtin_scenario, render, render_background};
use ddpf::tracker::{run, TrackerConfig};

fn main() -> ddpf::Result<()> {
    let spec = builtin_scenario("crossing-two")?;
    let (frames, truth) = render(&spec)?;
    let background = BackgroundModel::from_reference(to_gray(&render_background(&spec)));
    let result = run(&frames, background, &TrackerConfig::default())?;

    for f in (0..frames.len()).step_by(15) {
        let est: Vec<String> = result
            .tracks
            .iter()
            .map(|t| format!("({:6.1},{:6.1})", t.points[f].x, t.points[f].y))
            .collect();
        let vis: Vec<String> = truth.entries[f].iter().map(|e| format!("{:?}", e.visible)).collect();
        println!("frame {f:3}: {}  truth {}", est.join(" "), vis.join("/"));
    }
    let report = evaluate(&result.tracks, &truth, DEFAULT_LOSS_RADIUS)?;
    println!(
        "identity swaps {}, max lost fraction {:.3}",
        report.identity_swaps,
        report.max_lost_fraction()
    );
    let skipped: Vec<usize> = result.events.occlusion_skips.iter().map(|s| s.frame).collect();
    println!("deformation pass skipped at frames {skipped:?}");
    if std::env::args().any(|a| a == "--events") {
        println!("{}", events_json(&result.events));
    }
    Ok(())
}
