//! Rasters, netpbm codecs, grayscale conversion, patch sampling and overlays.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// Row-major 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Contract(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::Contract(format!(
                "frame buffer holds {} bytes, expected {}",
                pixels.len(),
                width * height * 3
            )));
        }
        Ok(Self { width, height, pixels })
    }

    /// A frame filled with one color.
    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        assert!(width > 0 && height > 0, "frame dimensions must be positive");
        let pixels = color.iter().copied().cycle().take(width * height * 3).collect();
        Self { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, color: Rgb) {
        let i = (y * self.width + x) * 3;
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    /// Pixel at signed coordinates, clamped to the nearest border pixel.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> Rgb {
        let (x, y) = clamp_coords(x, y, self.width, self.height);
        self.get(x, y)
    }
}

/// Row-major 8-bit intensity raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

/// Intensity raster cut out of a [`GrayFrame`]; always exactly `hx` by `hy`.
pub type Patch = GrayFrame;

impl GrayFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Contract(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Contract(format!(
                "gray buffer holds {} bytes, expected {}",
                pixels.len(),
                width * height
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "frame dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> u8 {
        let (x, y) = clamp_coords(x, y, self.width, self.height);
        self.get(x, y)
    }

    /// Replicates the intensity into all three channels.
    pub fn to_rgb(&self) -> Frame {
        let pixels = self.pixels.iter().flat_map(|&v| [v, v, v]).collect();
        Frame {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

#[inline]
fn clamp_coords(x: i64, y: i64, width: usize, height: usize) -> (usize, usize) {
    (
        x.clamp(0, width as i64 - 1) as usize,
        y.clamp(0, height as i64 - 1) as usize,
    )
}

/// Axis-aligned target rectangle.
///
/// `cx`, `cy` is the center (sub-pixel allowed); `hx`, `hy` are full side
/// lengths. The pixels covered along x are the integer offsets
/// `-(hx/2) ..= hx - 1 - hx/2` around `round(cx)`, and likewise along y.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub cx: f64,
    pub cy: f64,
    pub hx: u32,
    pub hy: u32,
}

impl Rect {
    pub fn new(cx: f64, cy: f64, hx: u32, hy: u32) -> Self {
        assert!(hx >= 1 && hy >= 1, "rect sides must be at least 1 px");
        Self { cx, cy, hx, hy }
    }

    /// Same dimensions, new center.
    pub fn at(&self, cx: f64, cy: f64) -> Self {
        Self { cx, cy, ..*self }
    }

    /// Leftmost covered column and topmost covered row.
    #[inline]
    pub fn origin(&self) -> (i64, i64) {
        (
            self.cx.round() as i64 - (self.hx / 2) as i64,
            self.cy.round() as i64 - (self.hy / 2) as i64,
        )
    }

    /// Number of covered pixels.
    pub fn area(&self) -> usize {
        self.hx as usize * self.hy as usize
    }
}

/// Rec. 601 luma, rounded half up.
#[inline]
pub fn luma(rgb: Rgb) -> u8 {
    let y = 0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64;
    (y + 0.5).floor().clamp(0.0, 255.0) as u8
}

pub fn to_gray(frame: &Frame) -> GrayFrame {
    let pixels = frame.pixels.chunks_exact(3).map(|c| luma([c[0], c[1], c[2]])).collect();
    GrayFrame {
        width: frame.width,
        height: frame.height,
        pixels,
    }
}

/// Copies the `hx` by `hy` block covered by `rect`, clamping to the border.
pub fn extract_patch(gray: &GrayFrame, rect: &Rect) -> Patch {
    let (x0, y0) = rect.origin();
    let (hx, hy) = (rect.hx as usize, rect.hy as usize);
    let mut pixels = Vec::with_capacity(hx * hy);
    for dy in 0..hy as i64 {
        for dx in 0..hx as i64 {
            pixels.push(gray.get_clamped(x0 + dx, y0 + dy));
        }
    }
    GrayFrame {
        width: hx,
        height: hy,
        pixels,
    }
}

/// Draws 1-px rectangle outlines and trail polylines on a copy of `frame`.
/// Everything is clipped to the frame bounds.
pub fn draw_overlay(frame: &Frame, rects: &[(Rect, Rgb)], trails: &[(Vec<(f64, f64)>, Rgb)]) -> Frame {
    let mut out = frame.clone();
    for (points, color) in trails {
        for pair in points.windows(2) {
            let a = (pair[0].0.round() as i64, pair[0].1.round() as i64);
            let b = (pair[1].0.round() as i64, pair[1].1.round() as i64);
            draw_line(&mut out, a, b, *color);
        }
        if let [only] = points.as_slice() {
            plot(&mut out, only.0.round() as i64, only.1.round() as i64, *color);
        }
    }
    for (rect, color) in rects {
        let (x0, y0) = rect.origin();
        let x1 = x0 + rect.hx as i64 - 1;
        let y1 = y0 + rect.hy as i64 - 1;
        for x in x0..=x1 {
            plot(&mut out, x, y0, *color);
            plot(&mut out, x, y1, *color);
        }
        for y in y0 + 1..y1 {
            plot(&mut out, x0, y, *color);
            plot(&mut out, x1, y, *color);
        }
    }
    out
}

#[inline]
fn plot(frame: &mut Frame, x: i64, y: i64, color: Rgb) {
    if x >= 0 && y >= 0 && (x as usize) < frame.width && (y as usize) < frame.height {
        frame.set(x as usize, y as usize, color);
    }
}

// Bresenham.
fn draw_line(frame: &mut Frame, (mut x, mut y): (i64, i64), (x1, y1): (i64, i64), color: Rgb) {
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        plot(frame, x, y, color);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

// ---------------------------------------------------------------------------
// Netpbm codecs

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::decode(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::decode(start, format!("{what} out of range")))
    }

    /// Consumes the single whitespace byte that separates maxval from the
    /// raster.
    fn raster_separator(&mut self) -> Result<()> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(Error::decode(self.pos, "expected whitespace after maxval")),
            None => Err(Error::decode(self.pos, "missing raster data")),
        }
    }
}

/// Parses a binary netpbm header with the given magic, returning
/// `(width, height, raster offset)`.
fn decode_header(bytes: &[u8], magic: &[u8; 2]) -> Result<(usize, usize, usize)> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(Error::decode(
            0,
            format!("expected magic `{}`", String::from_utf8_lossy(magic)),
        ));
    }
    let mut r = HeaderReader { bytes, pos: 2 };
    let width = r.number("width")?;
    let height = r.number("height")?;
    let maxval_at = {
        r.skip_whitespace_and_comments();
        r.pos
    };
    let maxval = r.number("maxval")?;
    if maxval != 255 {
        return Err(Error::decode(
            maxval_at,
            format!("unsupported maxval {maxval}, only 255 is accepted"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::decode(2, "zero image dimension"));
    }
    r.raster_separator()?;
    Ok((width, height, r.pos))
}

fn take_raster(bytes: &[u8], offset: usize, expected: usize) -> Result<Vec<u8>> {
    let available = bytes.len() - offset;
    if available < expected {
        return Err(Error::decode(
            bytes.len(),
            format!("truncated raster: expected {expected} bytes, found {available}"),
        ));
    }
    if available > expected {
        return Err(Error::decode(
            offset + expected,
            format!("{} trailing bytes after raster", available - expected),
        ));
    }
    Ok(bytes[offset..].to_vec())
}

/// Decodes a binary P6 PPM with maxval 255.
pub fn decode_ppm(bytes: &[u8]) -> Result<Frame> {
    let (width, height, offset) = decode_header(bytes, b"P6")?;
    let pixels = take_raster(bytes, offset, width * height * 3)?;
    Frame::new(width, height, pixels)
}

/// Canonical P6 encoding: `P6\n<w> <h>\n255\n` followed by the raw triples.
pub fn encode_ppm(frame: &Frame) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", frame.width, frame.height);
    let mut out = Vec::with_capacity(header.len() + frame.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&frame.pixels);
    out
}

/// Decodes a binary P5 PGM with maxval 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayFrame> {
    let (width, height, offset) = decode_header(bytes, b"P5")?;
    let pixels = take_raster(bytes, offset, width * height)?;
    GrayFrame::new(width, height, pixels)
}

pub fn encode_pgm(gray: &GrayFrame) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", gray.width, gray.height);
    let mut out = Vec::with_capacity(header.len() + gray.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&gray.pixels);
    out
}

/// Decodes either a P6 or a P5 file; grayscale input is replicated to RGB.
pub fn decode_netpbm(bytes: &[u8]) -> Result<Frame> {
    match bytes.get(..2) {
        Some(b"P5") => decode_pgm(bytes).map(|g| g.to_rgb()),
        _ => decode_ppm(bytes),
    }
}

pub fn read_frame(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_netpbm(&bytes).map_err(|e| match e {
        Error::Decode { offset, message } => Error::Decode {
            offset,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

pub fn write_ppm(path: &Path, frame: &Frame) -> Result<()> {
    fs::write(path, encode_ppm(frame)).map_err(|e| Error::io(path, e))
}

/// File name of the `index`-th frame of a sequence.
pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:05}.ppm")
}

/// Lists `frame_<n>.ppm` / `frame_<n>.pgm` files in `dir`, ordered by `n`.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut numbered = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(stem) = name.strip_suffix(".ppm").or_else(|| name.strip_suffix(".pgm")) else {
            continue;
        };
        if let Some(index) = stem.strip_prefix("frame_").and_then(|n| n.parse::<u64>().ok()) {
            numbered.push((index, path));
        }
    }
    numbered.sort();
    Ok(numbered.into_iter().map(|(_, p)| p).collect())
}

pub fn read_frame_sequence(dir: &Path) -> Result<Vec<Frame>> {
    list_frame_files(dir)?.iter().map(|p| read_frame(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_two_pixel_ppm() {
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 0, 255, 0]);
        let f = decode_ppm(&bytes).unwrap();
        assert_eq!((f.width(), f.height()), (2, 1));
        assert_eq!(f.get(0, 0), [255, 0, 0]);
        assert_eq!(f.get(1, 0), [0, 255, 0]);
        assert_eq!(encode_ppm(&f), bytes);
    }

    #[test]
    fn encodes_black_pixel() {
        let f = Frame::filled(1, 1, [0, 0, 0]);
        assert_eq!(encode_ppm(&f), b"P6\n1 1\n255\n\0\0\0".to_vec());
        let f = Frame::filled(2, 2, [1, 2, 3]);
        assert_eq!(encode_ppm(&f).len() - b"P6\n2 2\n255\n".len(), 12);
    }

    #[test]
    fn truncated_payload_reports_offset() {
        let mut bytes = b"P6\n4 4\n255\n".to_vec();
        bytes.extend(std::iter::repeat_n(7, 40));
        match decode_ppm(&bytes) {
            Err(Error::Decode { offset, message }) => {
                assert_eq!(offset, bytes.len());
                assert!(message.contains("truncated"));
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(matches!(
            decode_ppm(b"P3\n1 1\n255\n000"),
            Err(Error::Decode { offset: 0, .. })
        ));
        assert!(matches!(
            decode_ppm(b"P6\n1 1\n65535\n\0\0\0\0\0\0"),
            Err(Error::Decode { offset: 7, .. })
        ));
        assert!(matches!(
            decode_ppm(b"P6\nx 1\n255\n"),
            Err(Error::Decode { offset: 3, .. })
        ));
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P6\n# made by hand\n1 1\n255\n".to_vec();
        bytes.extend_from_slice(&[9, 8, 7]);
        assert_eq!(decode_ppm(&bytes).unwrap().get(0, 0), [9, 8, 7]);
    }

    #[test]
    fn pgm_input_replicates_channels() {
        let g = GrayFrame::new(2, 1, vec![10, 200]).unwrap();
        let f = decode_netpbm(&encode_pgm(&g)).unwrap();
        assert_eq!(f.get(1, 0), [200, 200, 200]);
    }

    #[test]
    fn gray_conversion_values() {
        assert_eq!(luma([255, 255, 255]), 255);
        assert_eq!(luma([0, 0, 0]), 0);
        // 0.299 * 255 = 76.245
        assert_eq!(luma([255, 0, 0]), 76);
    }

    #[test]
    fn patch_extraction() {
        let pixels: Vec<u8> = (0..100).collect();
        let g = GrayFrame::new(10, 10, pixels).unwrap();

        let p = extract_patch(&g, &Rect::new(5.0, 5.0, 3, 3));
        assert_eq!(p.pixels(), &[44, 45, 46, 54, 55, 56, 64, 65, 66]);

        let p = extract_patch(&g, &Rect::new(3.4, 7.6, 1, 1));
        assert_eq!(p.pixels(), &[83]);

        let uniform = GrayFrame::filled(10, 10, 42);
        let p = extract_patch(&uniform, &Rect::new(0.0, 0.0, 3, 3));
        assert_eq!(p.pixels(), &[42; 9]);

        // even sides: offsets -2..=1 around round(cx)
        let p = extract_patch(&g, &Rect::new(5.0, 0.0, 4, 1));
        assert_eq!(p.pixels(), &[3, 4, 5, 6]);
    }

    #[test]
    fn overlay_outline_pixel_count() {
        let f = Frame::filled(40, 30, [0, 0, 0]);
        assert_eq!(draw_overlay(&f, &[], &[]), f);

        let out = draw_overlay(&f, &[(Rect::new(20.0, 15.0, 10, 10), [255, 0, 0])], &[]);
        let changed = (0..30)
            .flat_map(|y| (0..40).map(move |x| (x, y)))
            .filter(|&(x, y)| out.get(x, y) != f.get(x, y))
            .count();
        assert_eq!(changed, 36);
        assert_eq!(f.get(15, 10), [0, 0, 0], "input untouched");

        let clipped = draw_overlay(&f, &[(Rect::new(0.0, 0.0, 10, 10), [255, 0, 0])], &[]);
        let changed = clipped.pixels().chunks(3).filter(|c| c[0] == 255).count();
        // origin (-5,-5): visible outline is column x=4 and row y=4 for 0..=4
        assert_eq!(changed, 9);
    }

    #[test]
    fn overlay_trails() {
        let f = Frame::filled(10, 10, [0, 0, 0]);
        let out = draw_overlay(&f, &[], &[(vec![(0.0, 0.0), (9.0, 9.0)], [0, 255, 0])]);
        for i in 0..10 {
            assert_eq!(out.get(i, i), [0, 255, 0]);
        }
        let out = draw_overlay(&f, &[], &[(vec![(-5.0, 2.0), (20.0, 2.0)], [0, 255, 0])]);
        assert!((0..10).all(|x| out.get(x, 2) == [0, 255, 0]));
    }

    #[test]
    fn frame_listing_orders_numerically() {
        let dir = tempfile::tempdir().unwrap();
        for i in [10, 2, 0] {
            write_ppm(
                &dir.path().join(frame_file_name(i)),
                &Frame::filled(1, 1, [i as u8, 0, 0]),
            )
            .unwrap();
        }
        fs::write(dir.path().join("truth.csv"), "x").unwrap();
        let frames = read_frame_sequence(dir.path()).unwrap();
        let reds: Vec<u8> = frames.iter().map(|f| f.get(0, 0)[0]).collect();
        assert_eq!(reds, vec![0, 2, 10]);
    }
}
