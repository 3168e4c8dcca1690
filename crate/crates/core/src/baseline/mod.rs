//! Comparison augmenters: plain replication, gamma intensity transforms,
//! random affine maps and coarse-grid elastic deformation.

pub mod affine;
pub mod elastic;
pub mod geometry;
pub mod spline;

use serde::{Deserialize, Serialize};

pub use affine::{affine_augment, apply_affine, apply_affine_labels, AffineConfig, AffineParams};
pub use elastic::{
    apply_elastic, apply_elastic_labels, elastic_augment, DisplacementGrid, ElasticConfig,
};

use crate::error::{Error, Result};
use crate::image::{Image, Window};
use crate::schedule::linspace_inclusive;

/// `R` exact copies.
pub fn replicate_simple(img: &Image, replications: usize) -> Vec<Image> {
    vec![img.clone(); replications]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaConfig {
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub window: Window,
}

impl GammaConfig {
    pub fn new(gamma_lo: f64, gamma_hi: f64, window: Window) -> Result<Self> {
        let cfg = Self {
            gamma_lo,
            gamma_hi,
            window,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_lo > 0.0 && self.gamma_lo <= self.gamma_hi && self.gamma_hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma range [{}, {}] must satisfy 0 < lo <= hi",
                self.gamma_lo, self.gamma_hi
            )));
        }
        Window::new(self.window.lo, self.window.hi)?;
        Ok(())
    }

    /// Exponent of each replication, linear over the range (midpoint if `R = 1`).
    pub fn gammas(&self, replications: usize) -> Vec<f64> {
        linspace_inclusive(replications, self.gamma_lo, self.gamma_hi)
    }
}

/// Window to `[0, 1]`, raise to `gamma`, map back into the window.
pub fn apply_gamma(img: &Image, gamma: f64, window: &Window) -> Result<Image> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma {gamma} must be positive"
        )));
    }
    let pixels = img
        .pixels()
        .iter()
        .map(|&p| window.denormalize(window.normalize(p).powf(gamma)))
        .collect();
    Image::new(img.rows(), img.cols(), pixels)
}

pub fn gamma_augment(img: &Image, replications: usize, config: &GammaConfig) -> Result<Vec<Image>> {
    config.validate()?;
    config
        .gammas(replications)
        .into_iter()
        .map(|g| apply_gamma(img, g, &config.window))
        .collect()
}
