//! Transform diagnostics for a single image.

use std::fmt;

use specaug_core::{
    dct2_forward, dct2_inverse, dwt2_forward, dwt2_inverse, Image, WaveletBasis, WaveletKind,
};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct BandStats {
    pub name: String,
    pub shape: (usize, usize),
    pub energy: f64,
    pub mean_abs: f64,
    pub max_abs: f64,
}

impl BandStats {
    fn new(name: String, shape: (usize, usize), coeffs: &[f64]) -> Self {
        let n = coeffs.len().max(1) as f64;
        Self {
            name,
            shape,
            energy: coeffs.iter().map(|c| c * c).sum(),
            mean_abs: coeffs.iter().map(|c| c.abs()).sum::<f64>() / n,
            max_abs: coeffs.iter().fold(0.0, |m, c| m.max(c.abs())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InspectReport {
    pub shape: (usize, usize),
    pub image_energy: f64,
    pub dct_round_trip_error: f64,
    pub dct: BandStats,
    pub wavelet: WaveletKind,
    pub levels: usize,
    pub dwt_round_trip_error: f64,
    /// Approximation first, then `H`, `V`, `D` per level from coarse to fine.
    pub bands: Vec<BandStats>,
}

pub fn inspect(img: &Image, wavelet: WaveletKind, levels: usize) -> Result<InspectReport> {
    let comps = dct2_forward(img);
    let dct_back = dct2_inverse(&comps)?;
    let basis = WaveletBasis::new(wavelet);
    let pyr = dwt2_forward(img, &basis, levels)?;
    let dwt_back = dwt2_inverse(&pyr, &basis)?;

    let mut bands = vec![BandStats::new(
        format!("A{levels}"),
        pyr.approx.shape(),
        pyr.approx.coeffs(),
    )];
    for (i, level) in pyr.details.iter().enumerate().rev() {
        for (tag, band) in [("H", &level.h), ("V", &level.v), ("D", &level.d)] {
            bands.push(BandStats::new(
                format!("{tag}{}", i + 1),
                band.shape(),
                band.coeffs(),
            ));
        }
    }
    Ok(InspectReport {
        shape: img.shape(),
        image_energy: img.pixels().iter().map(|p| p * p).sum(),
        dct_round_trip_error: dct_back.max_abs_diff(img)?,
        dct: BandStats::new("DCT".into(), comps.shape(), comps.coeffs()),
        wavelet,
        levels,
        dwt_round_trip_error: dwt_back.max_abs_diff(img)?,
        bands,
    })
}

impl fmt::Display for InspectReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "image {}x{}, energy {:.6e}",
            self.shape.0, self.shape.1, self.image_energy
        )?;
        writeln!(
            f,
            "dct round-trip max error {:.3e}",
            self.dct_round_trip_error
        )?;
        writeln!(
            f,
            "dwt ({}, {} levels) round-trip max error {:.3e}",
            self.wavelet.as_str(),
            self.levels,
            self.dwt_round_trip_error
        )?;
        writeln!(
            f,
            "{:<6} {:>9} {:>14} {:>12} {:>12}",
            "band", "shape", "energy", "mean|c|", "max|c|"
        )?;
        for b in std::iter::once(&self.dct).chain(&self.bands) {
            writeln!(
                f,
                "{:<6} {:>9} {:>14.6e} {:>12.4e} {:>12.4e}",
                b.name,
                format!("{}x{}", b.shape.0, b.shape.1),
                b.energy,
                b.mean_abs,
                b.max_abs
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_covers_every_band() {
        let img = specaug_core::synthetic::texture(32, 24, 1);
        let r = inspect(&img, WaveletKind::Db4, 2).unwrap();
        assert!(r.dct_round_trip_error < 1e-9);
        assert!(r.dwt_round_trip_error < 1e-8);
        let names: Vec<_> = r.bands.iter().map(|b| b.name.as_str()).collect();
        assert_eq!(names, ["A2", "H2", "V2", "D2", "H1", "V1", "D1"]);
        let band_energy: f64 = r.bands.iter().map(|b| b.energy).sum();
        assert!((band_energy - r.image_energy).abs() / r.image_energy < 1e-9);
        assert!((r.dct.energy - r.image_energy).abs() / r.image_energy < 1e-9);
        assert!(r.to_string().contains("D1"));
    }
}
