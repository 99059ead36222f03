//! Describe a scene in code, render it and save frames plus ground truth.
//!
//! `cargo run --example synth_scene [out_dir]`

use std::fs;
use std::path::PathBuf;

use ddpf::imaging::{frame_file_name, write_ppm};
use ddpf::output::truth_csv;
use ddpf::synth::{render, Fill, SceneSpec, TargetSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SceneSpec {
        width: 160,
        height: 120,
        background: [20, 30, 40],
        frames: 40,
        seed: 5,
        noise_std: 2.0,
        targets: vec![TargetSpec {
            fill: Fill::TwoTone {
                left: [230, 200, 40],
                right: [40, 90, 220],
            },
            path: vec![(0, 40.0, 60.0), (39, 120.0, 60.0)],
            size: vec![(0, 12.0, 12.0), (39, 24.0, 16.0)],
            rotation: vec![(10, 0.0), (30, 90.0)],
            recolor: vec![],
        }],
    };
    let (frames, truth) = render(&spec)?;
    for e in truth.rows().step_by(10) {
        println!(
            "frame {:2}: center ({:6.2}, {:6.2}) box {}x{} {:?}",
            e.frame, e.x, e.y, e.hx, e.hy, e.visible
        );
    }

    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "synth_scene_out".into()));
    fs::create_dir_all(&out)?;
    for (i, f) in frames.iter().enumerate() {
        write_ppm(&out.join(frame_file_name(i)), f)?;
    }
    fs::write(out.join("truth.csv"), truth_csv(&truth))?;
    println!("wrote {} frames to {}", frames.len(), out.display());
    Ok(())
}
