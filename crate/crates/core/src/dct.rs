//! Orthonormal 2D DCT-II analysis and its DCT-III synthesis.
//!
//! For an `N x M` image
//!
//! ```text
//! F(u, v) = sqrt(2/N) sqrt(2/M) nu(u) nu(v)
//!           * sum_i sum_j cos(pi u (2i + 1) / 2N) cos(pi v (2j + 1) / 2M) f(i, j)
//! ```
//!
//! with `nu(0) = 1/sqrt(2)` and `nu(k) = 1` otherwise. The transform is
//! evaluated separably with a cached cosine matrix per axis length, so the cost
//! is `O(NM(N + M))`.

use crate::error::{Error, Result};
use crate::image::{check_dims, Image};

/// DCT coefficients of an image; entry `(u, v)` sits at `u * cols + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct DctComponents {
    rows: usize,
    cols: usize,
    coeffs: Vec<f64>,
}

impl DctComponents {
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

    pub(crate) fn from_raw(rows: usize, cols: usize, coeffs: Vec<f64>) -> Self {
        Self { rows, cols, coeffs }
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

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.coeffs[u * self.cols + v]
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

/// Orthonormal DCT-II of a fixed length, stored as its `n x n` basis matrix.
#[derive(Debug, Clone)]
pub struct Dct1d {
    n: usize,
    basis: Vec<f64>,
}

impl Dct1d {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "DCT length must be positive");
        let dc = (1.0 / n as f64).sqrt();
        let ac = (2.0 / n as f64).sqrt();
        let mut basis = Vec::with_capacity(n * n);
        for k in 0..n {
            let scale = if k == 0 { dc } else { ac };
            for i in 0..n {
                let arg = std::f64::consts::PI * (k * (2 * i + 1)) as f64 / (2 * n) as f64;
                basis.push(scale * arg.cos());
            }
        }
        Self { n, basis }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `out[k] = sum_i B[k][i] x[i]`
    pub fn forward(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.basis[k * self.n..(k + 1) * self.n];
            *o = row.iter().zip(x).map(|(b, v)| b * v).sum();
        }
    }

    /// `out[i] = sum_k B[k][i] X[k]`
    pub fn inverse(&self, coeffs: &[f64], out: &mut [f64]) {
        debug_assert_eq!(coeffs.len(), self.n);
        out.fill(0.0);
        for (k, &c) in coeffs.iter().enumerate() {
            let row = &self.basis[k * self.n..(k + 1) * self.n];
            for (o, b) in out.iter_mut().zip(row) {
                *o += b * c;
            }
        }
    }
}

/// Reusable row and column plans for one image shape.
#[derive(Debug, Clone)]
pub struct Dct2d {
    rows: Dct1d,
    cols: Dct1d,
}

impl Dct2d {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows: Dct1d::new(rows),
            cols: Dct1d::new(cols),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn forward(&self, img: &Image) -> Result<DctComponents> {
        crate::image::expect_shape(self.shape(), img.shape())?;
        let coeffs = self.apply(img.pixels(), Dct1d::forward);
        Ok(DctComponents::from_raw(img.rows(), img.cols(), coeffs))
    }

    pub fn inverse(&self, comps: &DctComponents) -> Result<Image> {
        crate::image::expect_shape(self.shape(), comps.shape())?;
        let pixels = self.apply(comps.coeffs(), Dct1d::inverse);
        Ok(Image::from_raw(comps.rows(), comps.cols(), pixels))
    }

    fn apply(&self, data: &[f64], op: fn(&Dct1d, &[f64], &mut [f64])) -> Vec<f64> {
        let (n, m) = self.shape();
        let mut stage = vec![0.0; n * m];
        for (src, dst) in data.chunks_exact(m).zip(stage.chunks_exact_mut(m)) {
            op(&self.cols, src, dst);
        }
        // columns are processed on a transposed copy for contiguous access
        let mut transposed = transpose(&stage, n, m);
        let mut column = vec![0.0; n];
        for lane in transposed.chunks_exact_mut(n) {
            op(&self.rows, lane, &mut column);
            lane.copy_from_slice(&column);
        }
        transpose(&transposed, m, n)
    }
}

fn transpose(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

pub fn dct2_forward(img: &Image) -> DctComponents {
    Dct2d::new(img.rows(), img.cols())
        .forward(img)
        .expect("plan built for this shape")
}

/// Inverse transform. Non-finite output is only possible if the coefficients
/// overflow, which is reported as an error.
pub fn dct2_inverse(comps: &DctComponents) -> Result<Image> {
    let img = Dct2d::new(comps.rows(), comps.cols()).inverse(comps)?;
    Image::new(img.rows(), img.cols(), img.into_pixels())
}
