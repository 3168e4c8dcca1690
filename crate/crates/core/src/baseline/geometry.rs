//! Backward-mapped warping shared by the affine and elastic augmenters.

use crate::image::{Image, LabelGrid, PatchLabel};

/// Maps an output pixel coordinate `(y, x)` to the source coordinate that
/// should be sampled.
pub trait BackwardMap {
    fn source(&self, y: f64, x: f64) -> (f64, f64);
}

const SUPPORT_EPS: f64 = 1e-9;

fn in_support((rows, cols): (usize, usize), y: f64, x: f64) -> bool {
    let ymax = (rows - 1) as f64;
    let xmax = (cols - 1) as f64;
    y >= -SUPPORT_EPS && y <= ymax + SUPPORT_EPS && x >= -SUPPORT_EPS && x <= xmax + SUPPORT_EPS
}

/// Bilinear sample at `(y, x)`, or `None` outside `[0, rows-1] x [0, cols-1]`.
pub fn bilinear(img: &Image, y: f64, x: f64) -> Option<f64> {
    let (rows, cols) = img.shape();
    if !in_support((rows, cols), y, x) {
        return None;
    }
    let ymax = (rows - 1) as f64;
    let xmax = (cols - 1) as f64;
    let y = y.clamp(0.0, ymax);
    let x = x.clamp(0.0, xmax);
    let y0 = y.floor() as usize;
    let x0 = x.floor() as usize;
    let y1 = (y0 + 1).min(rows - 1);
    let x1 = (x0 + 1).min(cols - 1);
    let fy = y - y0 as f64;
    let fx = x - x0 as f64;
    let top = img.get(y0, x0) * (1.0 - fx) + img.get(y0, x1) * fx;
    let bottom = img.get(y1, x0) * (1.0 - fx) + img.get(y1, x1) * fx;
    Some(top * (1.0 - fy) + bottom * fy)
}

/// Warps by backward mapping; samples falling outside the source are filled
/// with the source minimum.
pub fn warp_image(img: &Image, map: &impl BackwardMap) -> Image {
    let fill = img.min();
    let (rows, cols) = img.shape();
    let mut pixels = Vec::with_capacity(rows * cols);
    for y in 0..rows {
        for x in 0..cols {
            let (sy, sx) = map.source(y as f64, x as f64);
            pixels.push(bilinear(img, sy, sx).unwrap_or(fill));
        }
    }
    Image::from_raw(rows, cols, pixels)
}

/// Source patch for each output patch, sampled at the output patch centre.
/// Centres mapped outside the bilinear support have no source, matching the
/// fill the image warp uses there.
pub fn source_patches(labels: &LabelGrid, map: &impl BackwardMap) -> Vec<Option<(usize, usize)>> {
    let (pr, pc) = labels.lattice();
    let mut out = Vec::with_capacity(pr * pc);
    for r in 0..pr {
        for c in 0..pc {
            let (cy, cx) = labels.patch_center(r, c);
            let (sy, sx) = map.source(cy, cx);
            out.push(if in_support(labels.image_shape(), sy, sx) {
                labels.patch_at(sy, sx)
            } else {
                None
            });
        }
    }
    out
}

/// Nearest-neighbour label warp; patches whose centre maps outside the image
/// become [`PatchLabel::Outside`].
pub fn warp_labels(labels: &LabelGrid, map: &impl BackwardMap) -> LabelGrid {
    let warped = source_patches(labels, map)
        .into_iter()
        .map(|src| src.map_or(PatchLabel::Outside, |(r, c)| labels.get(r, c)))
        .collect();
    labels
        .with_labels(warped)
        .expect("lattice geometry is unchanged")
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Shift(f64, f64);

    impl BackwardMap for Shift {
        fn source(&self, y: f64, x: f64) -> (f64, f64) {
            (y - self.0, x - self.1)
        }
    }

    #[test]
    fn bilinear_hits_grid_values_exactly() {
        let img = Image::from_fn(3, 4, |r, c| (r * 10 + c) as f64 * 1.37).unwrap();
        for r in 0..3 {
            for c in 0..4 {
                assert_eq!(bilinear(&img, r as f64, c as f64), Some(img.get(r, c)));
            }
        }
        let mid = bilinear(&img, 0.5, 0.5).unwrap();
        assert!((mid - (0.0 + 1.0 + 10.0 + 11.0) / 4.0 * 1.37).abs() < 1e-12);
        assert_eq!(bilinear(&img, -0.1, 0.0), None);
        assert_eq!(bilinear(&img, 0.0, 3.2), None);
    }

    #[test]
    fn integer_shift_fills_with_minimum() {
        let img = Image::from_fn(4, 5, |r, c| (r * 5 + c) as f64 + 2.0).unwrap();
        let out = warp_image(&img, &Shift(0.0, 2.0));
        for r in 0..4 {
            for c in 0..5 {
                let expected = if c < 2 { 2.0 } else { img.get(r, c - 2) };
                assert_eq!(out.get(r, c), expected);
            }
        }
    }

    #[test]
    fn labels_follow_shift() {
        let mut labels = LabelGrid::uniform((40, 40), 10, PatchLabel::Healthy).unwrap();
        labels.set(1, 1, PatchLabel::Diseased);
        let out = warp_labels(&labels, &Shift(10.0, 0.0));
        assert_eq!(out.get(2, 1), PatchLabel::Diseased);
        assert_eq!(out.get(1, 1), PatchLabel::Healthy);
        assert_eq!(out.get(0, 0), PatchLabel::Outside);
    }
}
