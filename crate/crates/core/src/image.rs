//! In-memory image, mask and patch-label types.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2D grid of finite `f64` intensities stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols)?;
        if pixels.len() != rows * cols {
            return Err(Error::BufferLength {
                rows,
                cols,
                expected: rows * cols,
                actual: pixels.len(),
            });
        }
        if let Some(index) = pixels.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        check_dims(rows, cols)?;
        Self::new(rows, cols, vec![value; rows * cols])
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        check_dims(rows, cols)?;
        let mut pixels = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                pixels.push(f(r, c));
            }
        }
        Self::new(rows, cols, pixels)
    }

    /// Wraps a buffer that the caller guarantees is finite and correctly sized.
    pub(crate) fn from_raw(rows: usize, cols: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), rows * cols);
        debug_assert!(pixels.iter().all(|p| p.is_finite()));
        Self { rows, cols, pixels }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.cols + col]
    }

    pub fn min(&self) -> f64 {
        self.pixels.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.pixels
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute pixel difference against an image of the same shape.
    pub fn max_abs_diff(&self, other: &Image) -> Result<f64> {
        expect_shape(self.shape(), other.shape())?;
        Ok(self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Linear intensity window onto `[0, 1]`, clamping values outside it.
    pub fn to_unit_range(&self, window_lo: f64, window_hi: f64) -> Result<Image> {
        let window = Window::new(window_lo, window_hi)?;
        Ok(Image::from_raw(
            self.rows,
            self.cols,
            self.pixels.iter().map(|&p| window.normalize(p)).collect(),
        ))
    }
}

/// Free-function form of [`Image::to_unit_range`].
pub fn to_unit_range(img: &Image, window_lo: f64, window_hi: f64) -> Result<Image> {
    img.to_unit_range(window_lo, window_hi)
}

/// An intensity window `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    pub fn normalize(&self, p: f64) -> f64 {
        ((p - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    #[inline]
    pub fn denormalize(&self, q: f64) -> f64 {
        self.lo + q * (self.hi - self.lo)
    }
}

/// Binary per-pixel map; `true` marks the diseased class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl PixelMask {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(rows, cols)?;
        if bits.len() != rows * cols {
            return Err(Error::BufferLength {
                rows,
                cols,
                expected: rows * cols,
                actual: bits.len(),
            });
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn empty(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![false; rows * cols])
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        check_dims(rows, cols)?;
        let mut bits = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                bits.push(f(r, c));
            }
        }
        Self::new(rows, cols, bits)
    }

    /// Pixels at or above `threshold` become foreground.
    pub fn from_image(img: &Image, threshold: f64) -> Self {
        Self {
            rows: img.rows(),
            cols: img.cols(),
            bits: img.pixels().iter().map(|&p| p >= threshold).collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True when every foreground pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &PixelMask) -> bool {
        self.shape() == other.shape() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn to_image(&self) -> Image {
        Image::from_raw(
            self.rows,
            self.cols,
            self.bits
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        )
    }
}

/// Class of one annotated patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatchLabel {
    Healthy,
    Diseased,
    Outside,
}

impl PatchLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PatchLabel::Healthy => "healthy",
            PatchLabel::Diseased => "diseased",
            PatchLabel::Outside => "outside",
        }
    }

    pub fn is_in_lung(self) -> bool {
        self != PatchLabel::Outside
    }
}

impl std::str::FromStr for PatchLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "healthy" => Ok(PatchLabel::Healthy),
            "diseased" => Ok(PatchLabel::Diseased),
            "outside" => Ok(PatchLabel::Outside),
            other => Err(Error::InvalidParameter(format!(
                "unknown patch label {other:?}"
            ))),
        }
    }
}

/// Patchwise annotation on a square lattice laid over an image.
///
/// Patch `(r, c)` covers pixel rows `origin.0 + r*patch_size ..` and columns
/// `origin.1 + c*patch_size ..`, clipped to the image. The lattice has
/// `ceil((N - origin.0) / patch_size) x ceil((M - origin.1) / patch_size)`
/// entries so that every pixel past the origin belongs to exactly one patch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelGrid {
    patch_size: usize,
    origin: (usize, usize),
    image_shape: (usize, usize),
    lattice: (usize, usize),
    labels: Vec<PatchLabel>,
}

impl LabelGrid {
    pub fn new(
        image_shape: (usize, usize),
        patch_size: usize,
        origin: (usize, usize),
        labels: Vec<PatchLabel>,
    ) -> Result<Self> {
        let lattice = lattice_shape(image_shape, patch_size, origin)?;
        if labels.len() != lattice.0 * lattice.1 {
            return Err(Error::BufferLength {
                rows: lattice.0,
                cols: lattice.1,
                expected: lattice.0 * lattice.1,
                actual: labels.len(),
            });
        }
        Ok(Self {
            patch_size,
            origin,
            image_shape,
            lattice,
            labels,
        })
    }

    /// Lattice with origin `(0, 0)` and every patch set to `label`.
    pub fn uniform(
        image_shape: (usize, usize),
        patch_size: usize,
        label: PatchLabel,
    ) -> Result<Self> {
        let lattice = lattice_shape(image_shape, patch_size, (0, 0))?;
        Self::new(
            image_shape,
            patch_size,
            (0, 0),
            vec![label; lattice.0 * lattice.1],
        )
    }

    #[inline]
    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    #[inline]
    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    #[inline]
    pub fn image_shape(&self) -> (usize, usize) {
        self.image_shape
    }

    /// `(patch rows, patch cols)`.
    #[inline]
    pub fn lattice(&self) -> (usize, usize) {
        self.lattice
    }

    #[inline]
    pub fn labels(&self) -> &[PatchLabel] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, pr: usize, pc: usize) -> PatchLabel {
        self.labels[pr * self.lattice.1 + pc]
    }

    pub fn set(&mut self, pr: usize, pc: usize, label: PatchLabel) {
        self.labels[pr * self.lattice.1 + pc] = label;
    }

    pub fn has_diseased(&self) -> bool {
        self.labels.contains(&PatchLabel::Diseased)
    }

    /// Same lattice geometry, labels replaced.
    pub fn with_labels(&self, labels: Vec<PatchLabel>) -> Result<Self> {
        Self::new(self.image_shape, self.patch_size, self.origin, labels)
    }

    pub fn same_lattice(&self, other: &LabelGrid) -> bool {
        self.patch_size == other.patch_size
            && self.origin == other.origin
            && self.image_shape == other.image_shape
    }

    /// Half-open pixel ranges `(rows, cols)` covered by a patch.
    pub fn patch_bounds(
        &self,
        pr: usize,
        pc: usize,
    ) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let r0 = self.origin.0 + pr * self.patch_size;
        let c0 = self.origin.1 + pc * self.patch_size;
        (
            r0..(r0 + self.patch_size).min(self.image_shape.0),
            c0..(c0 + self.patch_size).min(self.image_shape.1),
        )
    }

    /// Pixel-space centre of a patch (mean of its in-image pixel centres).
    pub fn patch_center(&self, pr: usize, pc: usize) -> (f64, f64) {
        let (rr, cr) = self.patch_bounds(pr, pc);
        (
            (rr.start + rr.end - 1) as f64 / 2.0,
            (cr.start + cr.end - 1) as f64 / 2.0,
        )
    }

    /// Patch containing the pixel coordinate `(y, x)`, if any.
    pub fn patch_at(&self, y: f64, x: f64) -> Option<(usize, usize)> {
        let (n, m) = self.image_shape;
        let yr = y.round();
        let xr = x.round();
        if !(yr >= self.origin.0 as f64 && xr >= self.origin.1 as f64) {
            return None;
        }
        if yr > (n - 1) as f64 || xr > (m - 1) as f64 {
            return None;
        }
        let pr = (yr as usize - self.origin.0) / self.patch_size;
        let pc = (xr as usize - self.origin.1) / self.patch_size;
        Some((pr, pc))
    }
}

fn lattice_shape(
    image_shape: (usize, usize),
    patch_size: usize,
    origin: (usize, usize),
) -> Result<(usize, usize)> {
    check_dims(image_shape.0, image_shape.1)?;
    if patch_size == 0 {
        return Err(Error::InvalidParameter(
            "patch size must be positive".into(),
        ));
    }
    if origin.0 >= image_shape.0 || origin.1 >= image_shape.1 {
        return Err(Error::InvalidParameter(format!(
            "lattice origin {origin:?} lies outside a {}x{} image",
            image_shape.0, image_shape.1
        )));
    }
    Ok((
        (image_shape.0 - origin.0).div_ceil(patch_size),
        (image_shape.1 - origin.1).div_ceil(patch_size),
    ))
}

pub(crate) fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidDimensions { rows, cols });
    }
    Ok(())
}

pub(crate) fn expect_shape(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::ShapeMismatch { expected, actual });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            Image::new(0, 3, vec![]),
            Err(Error::InvalidDimensions { .. })
        ));
        assert!(matches!(
            Image::new(2, 2, vec![0.0; 3]),
            Err(Error::BufferLength { .. })
        ));
        assert!(matches!(
            Image::new(1, 2, vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn unit_range_examples() {
        let img = Image::new(1, 3, vec![-1000.0, 400.0, -300.0]).unwrap();
        let out = img.to_unit_range(-1000.0, 400.0).unwrap();
        assert_eq!(out.pixels(), &[0.0, 1.0, 0.5]);
        assert!(matches!(
            img.to_unit_range(1.0, 1.0),
            Err(Error::InvalidWindow { .. })
        ));
        assert!(matches!(
            img.to_unit_range(2.0, 1.0),
            Err(Error::InvalidWindow { .. })
        ));
    }

    #[test]
    fn unit_range_clamps() {
        let img = Image::new(1, 2, vec![-5.0, 50.0]).unwrap();
        assert_eq!(img.to_unit_range(0.0, 10.0).unwrap().pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn lattice_covers_image() {
        let g = LabelGrid::uniform((45, 60), 20, PatchLabel::Healthy).unwrap();
        assert_eq!(g.lattice(), (3, 3));
        assert_eq!(g.patch_bounds(2, 2), (40..45, 40..60));
        assert_eq!(g.patch_center(0, 0), (9.5, 9.5));
        assert_eq!(g.patch_at(44.0, 59.0), Some((2, 2)));
        assert_eq!(g.patch_at(-1.0, 3.0), None);
        assert_eq!(g.patch_at(45.2, 3.0), None);
    }

    #[test]
    fn label_grid_rejects_wrong_count() {
        assert!(LabelGrid::new((40, 40), 20, (0, 0), vec![PatchLabel::Healthy; 3]).is_err());
        assert!(LabelGrid::new((40, 40), 0, (0, 0), vec![]).is_err());
    }

    #[test]
    fn label_strings_round_trip() {
        for l in [
            PatchLabel::Healthy,
            PatchLabel::Diseased,
            PatchLabel::Outside,
        ] {
            assert_eq!(l.as_str().parse::<PatchLabel>().unwrap(), l);
        }
        assert!("sick".parse::<PatchLabel>().is_err());
    }
}
