//! Random flips, rotation and scaling about the image centre.

use serde::{Deserialize, Serialize};

use super::geometry::{warp_image, warp_labels, BackwardMap};
use crate::error::{Error, Result};
use crate::image::{Image, LabelGrid};
use crate::rng::NoiseDraw;

/// Sampling ranges for [`AffineParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineConfig {
    pub hflip_prob: f64,
    pub vflip_prob: f64,
    /// Rotation is drawn uniformly from `[0, rotation_max_deg]`.
    pub rotation_max_deg: f64,
    pub scale_min: f64,
    pub scale_max: f64,
}

impl Default for AffineConfig {
    fn default() -> Self {
        Self {
            hflip_prob: 0.5,
            vflip_prob: 0.5,
            rotation_max_deg: 10.0,
            scale_min: 0.95,
            scale_max: 1.05,
        }
    }
}

impl AffineConfig {
    pub fn validate(&self) -> Result<()> {
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !prob_ok(self.hflip_prob) || !prob_ok(self.vflip_prob) {
            return Err(Error::InvalidParameter(
                "flip probabilities must lie in [0, 1]".into(),
            ));
        }
        if !(self.rotation_max_deg >= 0.0 && self.rotation_max_deg <= 360.0) {
            return Err(Error::InvalidParameter(format!(
                "rotation maximum {} must lie in [0, 360]",
                self.rotation_max_deg
            )));
        }
        if !(self.scale_min > 0.0 && self.scale_min <= self.scale_max && self.scale_max.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "scale range [{}, {}] must be positive and ordered",
                self.scale_min, self.scale_max
            )));
        }
        Ok(())
    }

    /// Draws one parameter set; counters 0..4 of the stream are used.
    pub fn sample(&self, noise: &NoiseDraw) -> AffineParams {
        AffineParams {
            hflip: noise.bernoulli(0, self.hflip_prob),
            vflip: noise.bernoulli(1, self.vflip_prob),
            rotation_deg: noise.uniform_range(2, 0.0, self.rotation_max_deg),
            scale: noise.uniform_range(3, self.scale_min, self.scale_max),
        }
    }
}

/// One concrete geometric transform: flips, then rotation and scaling, all
/// about the image centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineParams {
    pub hflip: bool,
    pub vflip: bool,
    pub rotation_deg: f64,
    pub scale: f64,
}

impl AffineParams {
    pub const IDENTITY: AffineParams = AffineParams {
        hflip: false,
        vflip: false,
        rotation_deg: 0.0,
        scale: 1.0,
    };

    fn backward(&self, shape: (usize, usize)) -> AffineMap {
        let theta = self.rotation_deg.to_radians();
        AffineMap {
            center: ((shape.0 - 1) as f64 / 2.0, (shape.1 - 1) as f64 / 2.0),
            cos: theta.cos(),
            sin: theta.sin(),
            scale: self.scale,
            hflip: self.hflip,
            vflip: self.vflip,
        }
    }
}

struct AffineMap {
    center: (f64, f64),
    cos: f64,
    sin: f64,
    scale: f64,
    hflip: bool,
    vflip: bool,
}

impl BackwardMap for AffineMap {
    fn source(&self, y: f64, x: f64) -> (f64, f64) {
        let dy = y - self.center.0;
        let dx = x - self.center.1;
        let mut ux = (self.cos * dx + self.sin * dy) / self.scale;
        let mut uy = (self.cos * dy - self.sin * dx) / self.scale;
        if self.hflip {
            ux = -ux;
        }
        if self.vflip {
            uy = -uy;
        }
        (self.center.0 + uy, self.center.1 + ux)
    }
}

pub fn apply_affine(img: &Image, params: &AffineParams) -> Result<Image> {
    if !(params.scale > 0.0 && params.scale.is_finite() && params.rotation_deg.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "invalid affine parameters {params:?}"
        )));
    }
    Ok(warp_image(img, &params.backward(img.shape())))
}

pub fn apply_affine_labels(labels: &LabelGrid, params: &AffineParams) -> LabelGrid {
    warp_labels(labels, &params.backward(labels.image_shape()))
}

/// Applies `R` independently drawn transforms to an image and its labels.
/// Replication `r` (1-based) draws from `NoiseDraw::new(seed, image_index, r)`.
pub fn affine_augment(
    img: &Image,
    labels: &LabelGrid,
    replications: usize,
    config: &AffineConfig,
    seed: u64,
    image_index: u64,
) -> Result<Vec<(Image, LabelGrid)>> {
    config.validate()?;
    check_labels(img, labels)?;
    (1..=replications as u64)
        .map(|r| {
            let params = config.sample(&NoiseDraw::new(seed, image_index, r));
            Ok((
                apply_affine(img, &params)?,
                apply_affine_labels(labels, &params),
            ))
        })
        .collect()
}

pub(crate) fn check_labels(img: &Image, labels: &LabelGrid) -> Result<()> {
    crate::image::expect_shape(img.shape(), labels.image_shape())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::PatchLabel;
    use crate::quality::psnr;

    #[test]
    fn identity_params_reproduce_input() {
        let img = Image::from_fn(7, 9, |r, c| (r as f64 * 3.1).sin() * 100.0 + c as f64).unwrap();
        assert_eq!(apply_affine(&img, &AffineParams::IDENTITY).unwrap(), img);
        let mut labels = LabelGrid::uniform((7, 9), 3, PatchLabel::Healthy).unwrap();
        labels.set(1, 2, PatchLabel::Diseased);
        assert_eq!(
            apply_affine_labels(&labels, &AffineParams::IDENTITY),
            labels
        );
    }

    #[test]
    fn hflip_reverses_columns() {
        let img = Image::new(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        let p = AffineParams {
            hflip: true,
            ..AffineParams::IDENTITY
        };
        assert_eq!(apply_affine(&img, &p).unwrap().pixels(), &[3.0, 2.0, 1.0]);
        let v = AffineParams {
            vflip: true,
            ..AffineParams::IDENTITY
        };
        let col = Image::new(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(apply_affine(&col, &v).unwrap().pixels(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn rotation_round_trip_on_smooth_image() {
        let n = 96;
        let img = Image::from_fn(n, n, |r, c| {
            let y = r as f64 / n as f64;
            let x = c as f64 / n as f64;
            128.0 + 60.0 * (3.0 * x).sin() * (2.0 * y).cos() + 40.0 * y
        })
        .unwrap();
        let fwd = AffineParams {
            rotation_deg: 10.0,
            ..AffineParams::IDENTITY
        };
        let back = AffineParams {
            rotation_deg: -10.0,
            ..AffineParams::IDENTITY
        };
        let out = apply_affine(&apply_affine(&img, &fwd).unwrap(), &back).unwrap();
        // compare inside the inscribed disc, where both warps stay in support
        let c = (n - 1) as f64 / 2.0;
        let radius = 0.45 * n as f64;
        let inside = |r: usize, col: usize| {
            ((r as f64 - c).powi(2) + (col as f64 - c).powi(2)).sqrt() < radius
        };
        let pick = |im: &Image| {
            (0..n * n)
                .filter(|i| inside(i / n, i % n))
                .map(|i| im.pixels()[i])
                .collect::<Vec<_>>()
        };
        let a = Image::new(1, pick(&img).len(), pick(&img)).unwrap();
        let b = Image::new(1, pick(&out).len(), pick(&out)).unwrap();
        let db = psnr(&a, &b, img.max() - img.min()).unwrap();
        assert!(db >= 30.0, "{db}");
    }

    #[test]
    fn sampling_respects_ranges_and_is_deterministic() {
        let cfg = AffineConfig::default();
        let mut flips = 0;
        for r in 0..500 {
            let p = cfg.sample(&NoiseDraw::new(1, 2, r));
            assert!((0.0..=10.0).contains(&p.rotation_deg));
            assert!((0.95..=1.05).contains(&p.scale));
            flips += p.hflip as usize;
            assert_eq!(p, cfg.sample(&NoiseDraw::new(1, 2, r)));
        }
        assert!((200..300).contains(&flips));
    }

    #[test]
    fn image_and_labels_share_the_map() {
        let (n, ps) = (110, 11);
        let labels = LabelGrid::uniform((n, n), ps, PatchLabel::Healthy).unwrap();
        let cfg = AffineConfig::default();
        for r in 1..=5 {
            let params = cfg.sample(&NoiseDraw::new(11, 0, r));
            let agreement = crate::baseline::tests::label_consistency(
                &labels,
                |im| apply_affine(im, &params).unwrap(),
                &params.backward((n, n)),
            );
            assert!(agreement >= 0.99, "{agreement}");
        }
    }

    #[test]
    fn augment_rejects_label_shape_mismatch() {
        let img = Image::zeros(20, 20).unwrap();
        let labels = LabelGrid::uniform((10, 10), 5, PatchLabel::Healthy).unwrap();
        assert!(affine_augment(&img, &labels, 2, &AffineConfig::default(), 0, 0).is_err());
    }
}
