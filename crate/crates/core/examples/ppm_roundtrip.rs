//! Encode a frame as binary PPM, decode it back and draw a tracking overlay.
//!
//! `cargo run --example ppm_roundtrip [out.ppm]`

use ddpf::imaging::{decode_ppm, draw_overlay, encode_ppm, luma, to_gray, write_ppm, Frame, Rect};

fn main() -> ddpf::Result<()> {
    let mut frame = Frame::filled(64, 48, [30, 40, 50]);
    for y in 10..26 {
        for x in 20..36 {
            frame.set(x, y, [220, 70, 60]);
        }
    }

    let bytes = encode_ppm(&frame);
    println!(
        "encoded {} bytes, header {:?}",
        bytes.len(),
        std::str::from_utf8(&bytes[..13]).unwrap()
    );
    let decoded = decode_ppm(&bytes)?;
    assert_eq!(decoded, frame);

    // Truncated input is rejected with the offset where data ran out.
    match decode_ppm(&bytes[..bytes.len() - 5]) {
        Err(e) => println!("truncated: {e}"),
        Ok(_) => unreachable!(),
    }

    let gray = to_gray(&decoded);
    println!(
        "luma of the target pixel: {} (rgb -> {})",
        gray.get(27, 17),
        luma([220, 70, 60])
    );

    let trail = vec![(8.0, 40.0), (16.0, 30.0), (27.5, 17.5)];
    let overlay = draw_overlay(
        &decoded,
        &[(Rect::new(27.5, 17.5, 16, 16), [255, 255, 0])],
        &[(trail, [0, 255, 255])],
    );
    if let Some(path) = std::env::args().nth(1) {
        write_ppm(path.as_ref(), &overlay)?;
        println!("wrote {path}");
    }
    Ok(())
}
