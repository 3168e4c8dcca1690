//! Spectral synthesis of augmented images.
//!
//! Each replication `r = 1..=R` decomposes the image (DCT or multilevel DWT),
//! perturbs every component `c` by an independent `N(0, rho_r * |c|)` draw
//! and reconstructs. Larger components receive proportionally larger noise,
//! zero components are left untouched, and `rho_r` grows linearly up to `eta`.

use serde::{Deserialize, Serialize};

use crate::augment::{AugmentSpec, Method};
use crate::dct::{Dct2d, DctComponents};
use crate::dwt::{dwt2_forward, dwt2_inverse, WaveletBasis, WaveletPyramid};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::NoiseDraw;
use crate::schedule::rho_schedule;

/// Which wavelet bands receive noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DwtScope {
    /// Approximation and detail bands.
    #[default]
    All,
    /// Detail bands only; the approximation band is copied.
    DetailsOnly,
}

#[inline]
fn perturb(c: f64, rho: f64, noise: &NoiseDraw, counter: u64) -> f64 {
    c + noise.gaussian(counter, rho * c.abs())
}

/// Adds `N(0, rho * |F(u, v)|)` to every coefficient. Counter = linear index.
pub fn corrupt_dct(comps: &DctComponents, rho: f64, noise: &NoiseDraw) -> DctComponents {
    let coeffs = comps
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| perturb(c, rho, noise, i as u64))
        .collect();
    DctComponents::from_raw(comps.rows(), comps.cols(), coeffs)
}

/// Corrupts every band; see [`corrupt_dwt_scoped`].
pub fn corrupt_dwt(pyr: &WaveletPyramid, rho: f64, noise: &NoiseDraw) -> WaveletPyramid {
    corrupt_dwt_scoped(pyr, rho, noise, DwtScope::All)
}

/// Coefficients are numbered in [`WaveletPyramid::bands`] order, row-major
/// within a band. Skipped bands still consume their counter range so that
/// detail noise is the same under both scopes.
pub fn corrupt_dwt_scoped(
    pyr: &WaveletPyramid,
    rho: f64,
    noise: &NoiseDraw,
    scope: DwtScope,
) -> WaveletPyramid {
    let mut out = pyr.clone();
    let mut counter = 0u64;
    for (i, band) in out.bands_mut().into_iter().enumerate() {
        let skip = i == 0 && scope == DwtScope::DetailsOnly;
        for c in band.coeffs_mut() {
            if !skip {
                *c = perturb(*c, rho, noise, counter);
            }
            counter += 1;
        }
    }
    out
}

/// Produces the `R` synthetic images of `spec` for one source image, in
/// schedule order.
pub fn synthesize(img: &Image, spec: &AugmentSpec, image_index: u64) -> Result<Vec<Image>> {
    spec.validate()?;
    let rhos = rho_schedule(spec.replications, spec.eta);
    match &spec.method {
        Method::Dct => {
            let plan = Dct2d::new(img.rows(), img.cols());
            let comps = plan.forward(img)?;
            rhos.iter()
                .enumerate()
                .map(|(i, &rho)| {
                    let noise = NoiseDraw::new(spec.seed, image_index, i as u64 + 1);
                    finite(plan.inverse(&corrupt_dct(&comps, rho, &noise))?)
                })
                .collect()
        }
        Method::Dwt(p) => {
            let basis = WaveletBasis::new(p.wavelet);
            let pyr = dwt2_forward(img, &basis, p.levels)?;
            rhos.iter()
                .enumerate()
                .map(|(i, &rho)| {
                    let noise = NoiseDraw::new(spec.seed, image_index, i as u64 + 1);
                    dwt2_inverse(&corrupt_dwt_scoped(&pyr, rho, &noise, p.scope), &basis)
                })
                .collect()
        }
        other => Err(not_spectral(other)),
    }
}

/// Replication `replication` (1-based) alone, with an explicit noise fraction.
///
/// `synthesize(img, spec, i)[r - 1]` equals
/// `synthesize_replication(img, spec, i, r, rho_schedule(R, eta)[r - 1])`.
pub fn synthesize_replication(
    img: &Image,
    spec: &AugmentSpec,
    image_index: u64,
    replication: u64,
    rho: f64,
) -> Result<Image> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise fraction {rho} must be >= 0"
        )));
    }
    let noise = NoiseDraw::new(spec.seed, image_index, replication);
    match &spec.method {
        Method::Dct => {
            let plan = Dct2d::new(img.rows(), img.cols());
            finite(plan.inverse(&corrupt_dct(&plan.forward(img)?, rho, &noise))?)
        }
        Method::Dwt(p) => {
            let basis = WaveletBasis::new(p.wavelet);
            let pyr = dwt2_forward(img, &basis, p.levels)?;
            dwt2_inverse(&corrupt_dwt_scoped(&pyr, rho, &noise, p.scope), &basis)
        }
        other => Err(not_spectral(other)),
    }
}

fn finite(img: Image) -> Result<Image> {
    Image::new(img.rows(), img.cols(), img.into_pixels())
}

fn not_spectral(method: &Method) -> Error {
    Error::InvalidParameter(format!("{} is not a spectral method", method.name()))
}
