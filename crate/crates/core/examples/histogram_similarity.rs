//! Kernel-weighted color histograms, Bhattacharyya distance and the particle
//! likelihood built from them.
//!
//! `cargo run --example histogram_similarity`

use ddpf::histogram::{bhattacharyya_dist, compute_histogram, DEFAULT_LEVELS};
use ddpf::imaging::{extract_patch, to_gray, Frame, Rect};
use ddpf::likelihood::{color_likelihood, combined_likelihood, intensity_likelihood, LikelihoodParams};

fn scene(split: usize) -> Frame {
    let mut f = Frame::filled(80, 60, [40, 60, 50]);
    for y in 22..38 {
        for x in 32..48 {
            f.set(x, y, if x < split { [230, 200, 40] } else { [40, 90, 220] });
        }
    }
    f
}

fn main() -> ddpf::Result<()> {
    let params = LikelihoodParams::default();
    let reference = scene(40);
    let rect = Rect::new(40.0, 30.0, 16, 16);
    let q = compute_histogram(&reference, &rect, DEFAULT_LEVELS);
    let ref_patch = extract_patch(&to_gray(&reference), &rect);

    println!(
        "{:>14} {:>8} {:>8} {:>8} {:>8}",
        "candidate", "d", "p_color", "p_int", "weight"
    );
    let candidates = [
        ("same", scene(40), rect),
        ("shift 4px", scene(40), rect.at(44.0, 30.0)),
        ("more yellow", scene(46), rect),
        ("background", scene(40), rect.at(12.0, 12.0)),
    ];
    for (name, frame, r) in candidates {
        let p = compute_histogram(&frame, &r, DEFAULT_LEVELS);
        let d = bhattacharyya_dist(&q, &p);
        let pc = color_likelihood(d, &params);
        let pi = intensity_likelihood(&ref_patch, &extract_patch(&to_gray(&frame), &r), &params)?;
        println!(
            "{name:>14} {d:>8.4} {pc:>8.4} {pi:>8.4} {:>8.4}",
            combined_likelihood(pi, pc)
        );
    }
    Ok(())
}
