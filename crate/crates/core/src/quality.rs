//! Fidelity measures between images.

use crate::error::{Error, Result};
use crate::image::{expect_shape, Image};

pub fn mse(reference: &Image, test: &Image) -> Result<f64> {
    expect_shape(reference.shape(), test.shape())?;
    let sum: f64 = reference
        .pixels()
        .iter()
        .zip(test.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / reference.pixels().len() as f64)
}

/// Peak signal-to-noise ratio in dB; infinite for identical images.
pub fn psnr(reference: &Image, test: &Image, peak: f64) -> Result<f64> {
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "PSNR peak {peak} must be positive"
        )));
    }
    let err = mse(reference, test)?;
    Ok(if err == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / err).log10()
    })
}

/// PSNR with the reference's dynamic range (`max - min`) as peak.
pub fn psnr_range(reference: &Image, test: &Image) -> Result<f64> {
    let range = reference.max() - reference.min();
    psnr(reference, test, if range > 0.0 { range } else { 1.0 })
}
