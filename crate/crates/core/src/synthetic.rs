//! Deterministic procedural test images.

use crate::image::Image;
use crate::rng::NoiseDraw;

/// Smooth CT-like texture in roughly `[0, 255]`: a few oriented sinusoids,
/// two soft blobs and a small amount of fine-grained noise keyed by `seed`.
pub fn texture(rows: usize, cols: usize, seed: u64) -> Image {
    let noise = NoiseDraw::new(seed, 0x7e57, 0);
    let phase = |k: u64| std::f64::consts::TAU * noise.uniform(k);
    let (p0, p1, p2) = (phase(0), phase(1), phase(2));
    let blob = |y: f64, x: f64, cy: f64, cx: f64, s: f64| {
        (-((y - cy).powi(2) + (x - cx).powi(2)) / (2.0 * s * s)).exp()
    };
    Image::from_fn(rows, cols, |r, c| {
        let y = r as f64 / rows.max(2) as f64;
        let x = c as f64 / cols.max(2) as f64;
        let waves = 30.0 * (std::f64::consts::TAU * (3.0 * x + 1.0 * y) + p0).sin()
            + 20.0 * (std::f64::consts::TAU * (1.5 * x - 4.0 * y) + p1).sin()
            + 10.0 * (std::f64::consts::TAU * (7.0 * x + 6.0 * y) + p2).sin();
        let blobs = 60.0 * blob(y, x, 0.3, 0.35, 0.12) - 40.0 * blob(y, x, 0.7, 0.6, 0.15);
        let grain = 6.0 * (noise.uniform(16 + (r * cols + c) as u64) - 0.5);
        (128.0 + waves + blobs + grain).clamp(0.0, 255.0)
    })
    .expect("finite by construction")
}
