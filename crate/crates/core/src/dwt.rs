//! Multilevel separable 2D discrete wavelet transform with periodic extension.
//!
//! One analysis level filters and decimates along both axes:
//!
//! ```text
//! a[n] = sum_k h[k] x[(2n + k) mod L]      (lowpass)
//! d[n] = sum_k g[k] x[(2n + k) mod L]      (highpass, g[k] = (-1)^k h[K-1-k])
//! ```
//!
//! Band orientation: `H` is lowpass across rows and highpass across columns,
//! `V` is highpass across rows and lowpass across columns, `D` is highpass on
//! both. The next level consumes the approximation band.
//!
//! An odd-length axis is extended by repeating its last sample before the
//! level is analysed; synthesis crops it away again, so reconstruction stays
//! exact for any size. Normalization lives in the filters (lowpass taps sum
//! to `sqrt(2)`), which makes the transform orthonormal for even sizes. The
//! global `1/sqrt(NM)` factor of the textbook double-sum definition is a
//! constant rescaling of every coefficient and is not applied.

use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{check_dims, Image};

/// Supported orthogonal wavelet families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WaveletKind {
    #[default]
    Haar,
    /// Daubechies with four vanishing moments (8 taps).
    Db4,
}

impl WaveletKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WaveletKind::Haar => "haar",
            WaveletKind::Db4 => "db4",
        }
    }
}

impl FromStr for WaveletKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(WaveletKind::Haar),
            "db4" => Ok(WaveletKind::Db4),
            other => Err(Error::InvalidParameter(format!(
                "unknown wavelet {other:?}"
            ))),
        }
    }
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

const DB4_LOWPASS: [f64; 8] = [
    0.230_377_813_308_855_23,
    0.714_846_570_552_541_5,
    0.630_880_767_929_590_4,
    -0.027_983_769_416_983_85,
    -0.187_034_811_718_881_14,
    0.030_841_381_835_986_965,
    0.032_883_011_666_982_945,
    -0.010_597_401_784_997_278,
];

/// The tabulated taps satisfy the orthonormality conditions only to about
/// 1e-13, which is visible in multilevel round trips of large values. A few
/// Newton steps on the defining equations (double-shift orthonormality and
/// four vanishing moments of the highpass) polish them to machine precision.
#[allow(clippy::needless_range_loop)]
fn db4_lowpass() -> &'static [f64; 8] {
    static TAPS: OnceLock<[f64; 8]> = OnceLock::new();
    TAPS.get_or_init(|| {
        let mut h = DB4_LOWPASS;
        for _ in 0..4 {
            let mut jac = [[0.0f64; 8]; 8];
            let mut res = [0.0f64; 8];
            for m in 0..4 {
                let row = m;
                let s = 2 * m;
                res[row] = (0..8 - s).map(|k| h[k] * h[k + s]).sum::<f64>()
                    - if m == 0 { 1.0 } else { 0.0 };
                for k in 0..8 {
                    let mut d = 0.0;
                    if k + s < 8 {
                        d += h[k + s];
                    }
                    if k >= s {
                        d += h[k - s];
                    }
                    jac[row][k] = d;
                }
            }
            for p in 0..4i32 {
                let row = 4 + p as usize;
                for k in 0..8 {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    jac[row][k] = sign * (k as f64).powi(p);
                }
                res[row] = (0..8).map(|k| jac[row][k] * h[k]).sum();
            }
            let step = solve8(jac, res);
            for k in 0..8 {
                h[k] -= step[k];
            }
        }
        h
    })
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve8(mut a: [[f64; 8]; 8], mut b: [f64; 8]) -> [f64; 8] {
    for col in 0..8 {
        let pivot = (col..8)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..8 {
            let f = a[row][col] / a[col][col];
            for k in col..8 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 8];
    for row in (0..8).rev() {
        let tail: f64 = (row + 1..8).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// Analysis and synthesis filter quadruple of an orthogonal wavelet.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletBasis {
    kind: WaveletKind,
    analysis_lowpass: Vec<f64>,
    analysis_highpass: Vec<f64>,
    synthesis_lowpass: Vec<f64>,
    synthesis_highpass: Vec<f64>,
}

impl WaveletBasis {
    pub fn new(kind: WaveletKind) -> Self {
        let lowpass: Vec<f64> = match kind {
            WaveletKind::Haar => vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            WaveletKind::Db4 => db4_lowpass().to_vec(),
        };
        let k = lowpass.len();
        let highpass: Vec<f64> = (0..k)
            .map(|i| {
                if i % 2 == 0 {
                    lowpass[k - 1 - i]
                } else {
                    -lowpass[k - 1 - i]
                }
            })
            .collect();
        let synthesis_lowpass = lowpass.iter().rev().copied().collect();
        let synthesis_highpass = highpass.iter().rev().copied().collect();
        Self {
            kind,
            analysis_lowpass: lowpass,
            analysis_highpass: highpass,
            synthesis_lowpass,
            synthesis_highpass,
        }
    }

    pub fn haar() -> Self {
        Self::new(WaveletKind::Haar)
    }

    pub fn db4() -> Self {
        Self::new(WaveletKind::Db4)
    }

    pub fn kind(&self) -> WaveletKind {
        self.kind
    }

    pub fn analysis_lowpass(&self) -> &[f64] {
        &self.analysis_lowpass
    }

    pub fn analysis_highpass(&self) -> &[f64] {
        &self.analysis_highpass
    }

    pub fn synthesis_lowpass(&self) -> &[f64] {
        &self.synthesis_lowpass
    }

    pub fn synthesis_highpass(&self) -> &[f64] {
        &self.synthesis_highpass
    }

    /// Single-level periodized analysis of an even-length signal.
    pub fn analyze(&self, x: &[f64], low: &mut [f64], high: &mut [f64]) {
        let len = x.len();
        debug_assert!(len.is_multiple_of(2) && low.len() == len / 2 && high.len() == len / 2);
        for n in 0..len / 2 {
            let mut a = 0.0;
            let mut d = 0.0;
            for (k, (&h, &g)) in self
                .analysis_lowpass
                .iter()
                .zip(&self.analysis_highpass)
                .enumerate()
            {
                let v = x[(2 * n + k) % len];
                a += h * v;
                d += g * v;
            }
            low[n] = a;
            high[n] = d;
        }
    }

    /// Single-level periodized synthesis; exact inverse of [`analyze`](Self::analyze).
    pub fn synthesize(&self, low: &[f64], high: &[f64], out: &mut [f64]) {
        let len = out.len();
        let taps = self.synthesis_lowpass.len();
        debug_assert!(len.is_multiple_of(2) && low.len() == len / 2 && high.len() == len / 2);
        out.fill(0.0);
        for n in 0..len / 2 {
            for (j, (&h, &g)) in self
                .synthesis_lowpass
                .iter()
                .zip(&self.synthesis_highpass)
                .enumerate()
            {
                out[(2 * n + taps - 1 - j) % len] += h * low[n] + g * high[n];
            }
        }
    }
}

/// One rectangular coefficient band.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    rows: usize,
    cols: usize,
    coeffs: Vec<f64>,
}

impl Band {
    pub fn new(rows: usize, cols: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols)?;
        if coeffs.len() != rows * cols {
            return Err(Error::BufferLength {
                rows,
                cols,
                expected: rows * cols,
                actual: coeffs.len(),
            });
        }
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, coeffs })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            coeffs: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.coeffs[r * self.cols + c]
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

/// Detail bands of one decomposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailLevel {
    pub h: Band,
    pub v: Band,
    pub d: Band,
}

impl DetailLevel {
    fn shape(&self) -> Option<(usize, usize)> {
        let s = self.h.shape();
        (self.v.shape() == s && self.d.shape() == s).then_some(s)
    }
}

/// Approximation band plus per-level detail bands.
///
/// `details[0]` is the finest level (first analysis step) and the last entry
/// the coarsest; `approx` belongs to the coarsest level.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    pub original_shape: (usize, usize),
    pub approx: Band,
    pub details: Vec<DetailLevel>,
}

impl WaveletPyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Bands in canonical order: approximation first, then detail levels from
    /// coarse to fine, `H`, `V`, `D` within each level.
    pub fn bands(&self) -> Vec<&Band> {
        let mut out = vec![&self.approx];
        for level in self.details.iter().rev() {
            out.extend([&level.h, &level.v, &level.d]);
        }
        out
    }

    /// Mutable view of [`bands`](Self::bands), same order.
    pub fn bands_mut(&mut self) -> Vec<&mut Band> {
        let mut out = vec![&mut self.approx];
        for level in self.details.iter_mut().rev() {
            out.push(&mut level.h);
            out.push(&mut level.v);
            out.push(&mut level.d);
        }
        out
    }

    pub fn coefficient_count(&self) -> usize {
        self.bands().iter().map(|b| b.coeffs.len()).sum()
    }

    pub fn energy(&self) -> f64 {
        self.bands().iter().map(|b| b.energy()).sum()
    }

    /// Zero pyramid with the band layout `dwt2_forward` produces.
    pub fn zeros(original_shape: (usize, usize), levels: usize) -> Result<Self> {
        check_levels(original_shape, levels)?;
        let shapes = level_input_shapes(original_shape, levels);
        let details = shapes
            .iter()
            .map(|&(r, c)| {
                let (br, bc) = (r.div_ceil(2), c.div_ceil(2));
                DetailLevel {
                    h: Band::zeros(br, bc),
                    v: Band::zeros(br, bc),
                    d: Band::zeros(br, bc),
                }
            })
            .collect::<Vec<_>>();
        let (ar, ac) = details.last().unwrap().h.shape();
        Ok(Self {
            original_shape,
            approx: Band::zeros(ar, ac),
            details,
        })
    }

    fn validate(&self) -> Result<()> {
        let levels = self.levels();
        if levels == 0 {
            return Err(Error::InvalidParameter(
                "pyramid has no detail levels".into(),
            ));
        }
        check_levels(self.original_shape, levels)?;
        let shapes = level_input_shapes(self.original_shape, levels);
        for (level, &(r, c)) in self.details.iter().zip(&shapes) {
            let expected = (r.div_ceil(2), c.div_ceil(2));
            match level.shape() {
                Some(s) if s == expected => {}
                Some(s) => {
                    return Err(Error::ShapeMismatch {
                        expected,
                        actual: s,
                    })
                }
                None => {
                    return Err(Error::ShapeMismatch {
                        expected,
                        actual: level.v.shape(),
                    })
                }
            }
        }
        let expected = self.details.last().unwrap().h.shape();
        if self.approx.shape() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: self.approx.shape(),
            });
        }
        Ok(())
    }
}

fn check_levels(shape: (usize, usize), levels: usize) -> Result<()> {
    let (rows, cols) = shape;
    check_dims(rows, cols)?;
    let too_deep =
        levels == 0 || levels >= usize::BITS as usize || (1usize << levels) > rows.min(cols);
    if too_deep {
        return Err(Error::LevelsTooDeep { levels, rows, cols });
    }
    Ok(())
}

/// Input shape of each analysis level, finest first.
fn level_input_shapes(original: (usize, usize), levels: usize) -> Vec<(usize, usize)> {
    let mut shapes = Vec::with_capacity(levels);
    let mut cur = original;
    for _ in 0..levels {
        shapes.push(cur);
        cur = (cur.0.div_ceil(2), cur.1.div_ceil(2));
    }
    shapes
}

/// Single 2D analysis step. Returns `(approx, details)`.
fn analyze_level(
    data: &[f64],
    rows: usize,
    cols: usize,
    basis: &WaveletBasis,
) -> (Band, DetailLevel) {
    let (pr, pc) = (rows + rows % 2, cols + cols % 2);
    let (hr, hc) = (pr / 2, pc / 2);

    // along each row: padded row -> [low | high] over columns
    let mut row_low = vec![0.0; pr * hc];
    let mut row_high = vec![0.0; pr * hc];
    let mut line = vec![0.0; pc];
    for r in 0..pr {
        let src = r.min(rows - 1);
        line[..cols].copy_from_slice(&data[src * cols..(src + 1) * cols]);
        if pc > cols {
            line[cols] = line[cols - 1];
        }
        basis.analyze(
            &line,
            &mut row_low[r * hc..(r + 1) * hc],
            &mut row_high[r * hc..(r + 1) * hc],
        );
    }

    // down each column of both half-planes
    let mut approx = vec![0.0; hr * hc];
    let mut h = vec![0.0; hr * hc];
    let mut v = vec![0.0; hr * hc];
    let mut d = vec![0.0; hr * hc];
    let mut column = vec![0.0; pr];
    let mut lo = vec![0.0; hr];
    let mut hi = vec![0.0; hr];
    for c in 0..hc {
        for r in 0..pr {
            column[r] = row_low[r * hc + c];
        }
        basis.analyze(&column, &mut lo, &mut hi);
        for n in 0..hr {
            approx[n * hc + c] = lo[n];
            v[n * hc + c] = hi[n];
        }
        for r in 0..pr {
            column[r] = row_high[r * hc + c];
        }
        basis.analyze(&column, &mut lo, &mut hi);
        for n in 0..hr {
            h[n * hc + c] = lo[n];
            d[n * hc + c] = hi[n];
        }
    }
    let band = |coeffs| Band {
        rows: hr,
        cols: hc,
        coeffs,
    };
    (
        band(approx),
        DetailLevel {
            h: band(h),
            v: band(v),
            d: band(d),
        },
    )
}

/// Single 2D synthesis step back to an `rows x cols` plane (padding cropped).
fn synthesize_level(
    approx: &Band,
    level: &DetailLevel,
    rows: usize,
    cols: usize,
    basis: &WaveletBasis,
) -> Vec<f64> {
    let (hr, hc) = approx.shape();
    let (pr, pc) = (2 * hr, 2 * hc);

    let mut row_low = vec![0.0; pr * hc];
    let mut row_high = vec![0.0; pr * hc];
    let mut lo = vec![0.0; hr];
    let mut hi = vec![0.0; hr];
    let mut column = vec![0.0; pr];
    for c in 0..hc {
        for n in 0..hr {
            lo[n] = approx.coeffs[n * hc + c];
            hi[n] = level.v.coeffs[n * hc + c];
        }
        basis.synthesize(&lo, &hi, &mut column);
        for r in 0..pr {
            row_low[r * hc + c] = column[r];
        }
        for n in 0..hr {
            lo[n] = level.h.coeffs[n * hc + c];
            hi[n] = level.d.coeffs[n * hc + c];
        }
        basis.synthesize(&lo, &hi, &mut column);
        for r in 0..pr {
            row_high[r * hc + c] = column[r];
        }
    }

    let mut out = vec![0.0; rows * cols];
    let mut line = vec![0.0; pc];
    for r in 0..rows {
        basis.synthesize(
            &row_low[r * hc..(r + 1) * hc],
            &row_high[r * hc..(r + 1) * hc],
            &mut line,
        );
        out[r * cols..(r + 1) * cols].copy_from_slice(&line[..cols]);
    }
    out
}

/// Forward multilevel transform.
///
/// Requires `1 <= levels` and `2^levels <= min(rows, cols)`.
pub fn dwt2_forward(img: &Image, basis: &WaveletBasis, levels: usize) -> Result<WaveletPyramid> {
    check_levels(img.shape(), levels)?;
    let mut details = Vec::with_capacity(levels);
    let mut current = img.pixels().to_vec();
    let (mut rows, mut cols) = img.shape();
    let mut approx = None;
    for _ in 0..levels {
        let (a, level) = analyze_level(&current, rows, cols, basis);
        details.push(level);
        rows = a.rows;
        cols = a.cols;
        current = a.coeffs.clone();
        approx = Some(a);
    }
    Ok(WaveletPyramid {
        original_shape: img.shape(),
        approx: approx.expect("at least one level"),
        details,
    })
}

/// Inverse multilevel transform back to `original_shape`.
pub fn dwt2_inverse(pyr: &WaveletPyramid, basis: &WaveletBasis) -> Result<Image> {
    pyr.validate()?;
    let shapes = level_input_shapes(pyr.original_shape, pyr.levels());
    let mut approx = pyr.approx.clone();
    for (level, &(rows, cols)) in pyr.details.iter().zip(&shapes).rev() {
        let plane = synthesize_level(&approx, level, rows, cols, basis);
        approx = Band {
            rows,
            cols,
            coeffs: plane,
        };
    }
    Image::new(approx.rows, approx.cols, approx.coeffs)
}
