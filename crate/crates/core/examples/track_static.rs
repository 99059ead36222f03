//! Track the builtin static target and score the trajectory.
//!
//! `cargo run --release --example track_static`

use ddpf::detection::BackgroundModel;
use ddpf::imaging::to_gray;
use ddpf::metrics::{evaluate, DEFAULT_LOSS_RADIUS};
use ddpf::synth::{builtin_scenario, render, render_background};
use ddpf::tracker::{run, TrackerConfig};

fn main() -> ddpf::Result<()> {
    let spec = builtin_scenario("static")?;
    let (frames, truth) = render(&spec)?;
    let background = BackgroundModel::from_reference(to_gray(&render_background(&spec)));
    let result = run(&frames, background, &TrackerConfig::default())?;

    for p in result.tracks[0].points.iter().step_by(20) {
        println!("frame {:3}: ({:7.2}, {:7.2})", p.frame, p.x, p.y);
    }
    let report = evaluate(&result.tracks, &truth, DEFAULT_LOSS_RADIUS)?;
    println!(
        "rmse {:.3} px, lost fraction {:.3}, model updates {}",
        report.tracks[0].rmse,
        report.tracks[0].lost_fraction,
        result.events.model_updates.len()
    );
    Ok(())
}
