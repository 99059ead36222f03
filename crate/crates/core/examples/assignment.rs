//! Optimal assignment with Munkres and gated global-nearest-neighbor
//! association of detections to tracks.
//!
//! `cargo run --example assignment`

use ddpf::association::{gnn_associate, munkres, CostMatrix, DEFAULT_GATE_PX};
use ddpf::detection::Detection;
use ddpf::imaging::Rect;

fn main() -> ddpf::Result<()> {
    // Greedy row-by-row picking would take (0,0) and pay 1 + 7; the optimum is 2 + 3.
    let costs = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 7.0]])?;
    let a = munkres(&costs)?;
    println!("square: pairs {:?}, cost {}", a.pairs, a.total_cost(&costs));

    let wide = CostMatrix::from_rows(&[vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0]])?;
    let a = munkres(&wide)?;
    println!(
        "2x3: pairs {:?}, unassigned columns {:?}, cost {}",
        a.pairs,
        a.unassigned_cols,
        a.total_cost(&wide)
    );

    let tracks = [(50.0, 50.0), (120.0, 60.0), (300.0, 200.0)];
    let detections: Vec<Detection> = [(118.0, 64.0), (53.0, 47.0), (10.0, 220.0)]
        .iter()
        .map(|&(x, y)| Detection {
            rect: Rect::new(x, y, 16, 16),
            area: 256,
        })
        .collect();
    let a = gnn_associate(&tracks, &detections, DEFAULT_GATE_PX)?;
    for (track, det) in &a.pairs {
        println!("track {track} <- detection {det}");
    }
    println!(
        "tracks without a detection inside {DEFAULT_GATE_PX} px: {:?}",
        a.unassigned_rows
    );
    Ok(())
}
