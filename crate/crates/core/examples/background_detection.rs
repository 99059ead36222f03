//! Background subtraction and connected-component detection on a rendered
//! frame from the crossing scenario.
//!
//! `cargo run --example background_detection`

use ddpf::detection::{detect, BackgroundModel, DetectionConfig};
use ddpf::imaging::to_gray;
use ddpf::synth::{builtin_scenario, render, render_background};

fn main() -> ddpf::Result<()> {
    let spec = builtin_scenario("crossing-two")?;
    let (frames, truth) = render(&spec)?;
    let background = BackgroundModel::from_reference(to_gray(&render_background(&spec)));
    let config = DetectionConfig::default();

    for frame in [0, 30, 60, 90] {
        let found = detect(&to_gray(&frames[frame]), &background, &config)?;
        print!("frame {frame:3}: {} blob(s)", found.len());
        for d in &found {
            print!(
                "  [{:.1},{:.1} {}x{} area {}]",
                d.rect.cx, d.rect.cy, d.rect.hx, d.rect.hy, d.area
            );
        }
        let centers: Vec<String> = truth.entries[frame]
            .iter()
            .map(|e| format!("({:.1},{:.1})", e.x, e.y))
            .collect();
        println!("  truth {}", centers.join(" "));
    }
    Ok(())
}
