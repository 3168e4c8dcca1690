//! Spectral data augmentation for 2D images.
//!
//! Synthetic training images are made by decomposing an image into DCT or
//! multilevel wavelet components, perturbing each component with Gaussian
//! noise whose standard deviation is proportional to the component magnitude,
//! and reconstructing. The noise fraction grows linearly over the requested
//! replications. The crate also carries the usual comparison augmenters
//! (replication, gamma, affine, elastic) and the patchwise evaluation used to
//! compare them (hole filling, patch voting, diseased-class F1).
//!
//! ```
//! use specaug_core::{synthesize, AugmentSpec, Image, Method};
//!
//! let img = Image::from_fn(32, 32, |r, c| (r * 32 + c) as f64).unwrap();
//! let spec = AugmentSpec { method: Method::Dct, replications: 3, eta: 0.01, seed: 1 };
//! let out = synthesize(&img, &spec, 0).unwrap();
//! assert_eq!(out.len(), 3);
//! ```

pub mod augment;
pub mod baseline;
pub mod corruption;
pub mod dct;
pub mod dwt;
pub mod error;
pub mod image;
pub mod io;
pub mod metrics;
pub mod quality;
pub mod rng;
pub mod schedule;
pub mod synthetic;

pub use augment::{AugmentSpec, Draw, DwtParams, Method, Sample};
pub use baseline::{
    affine_augment, elastic_augment, gamma_augment, replicate_simple, AffineConfig, AffineParams,
    DisplacementGrid, ElasticConfig, GammaConfig,
};
pub use corruption::{
    corrupt_dct, corrupt_dwt, corrupt_dwt_scoped, synthesize, synthesize_replication, DwtScope,
};
pub use dct::{dct2_forward, dct2_inverse, DctComponents};
pub use dwt::{
    dwt2_forward, dwt2_inverse, Band, DetailLevel, WaveletBasis, WaveletKind, WaveletPyramid,
};
pub use error::{Error, Result};
pub use image::{to_unit_range, Image, LabelGrid, PatchLabel, PixelMask, Window};
pub use io::{load_image, load_labels, save_image, save_labels, ImageFormat};
pub use metrics::{
    f1_disease, hole_fill, hole_fill_with, pixels_to_patches, ConfusionCounts, HoleFillMode,
};
pub use rng::NoiseDraw;
pub use schedule::rho_schedule;
