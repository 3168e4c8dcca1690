//! Coarse-grid elastic deformation.
//!
//! A `grid_rows x grid_cols` lattice of control points spans the image
//! (corners included). Each point carries a displacement; a natural bicubic
//! spline turns the lattice into a dense field, and the image is resampled by
//! backward mapping: `out(y, x) = src(y - dy(y, x), x - dx(y, x))`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::affine::check_labels;
use super::geometry::{warp_image, warp_labels, BackwardMap};
use super::spline::GridSpline;
use crate::error::{Error, Result};
use crate::image::{Image, LabelGrid};
use crate::rng::NoiseDraw;
use crate::schedule::linspace_inclusive;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticConfig {
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Displacement cap of the first replication, in pixels.
    pub disp_min: f64,
    /// Displacement cap of the last replication, in pixels.
    pub disp_max: f64,
}

impl Default for ElasticConfig {
    fn default() -> Self {
        Self {
            grid_rows: 4,
            grid_cols: 4,
            disp_min: 1.0,
            disp_max: 20.0,
        }
    }
}

impl ElasticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_rows < 2 || self.grid_cols < 2 {
            return Err(Error::InvalidParameter(format!(
                "displacement grid {}x{} needs at least 2 points per axis",
                self.grid_rows, self.grid_cols
            )));
        }
        if !(self.disp_min >= 0.0 && self.disp_min <= self.disp_max && self.disp_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "displacement range {}:{} must be non-negative and ordered",
                self.disp_min, self.disp_max
            )));
        }
        Ok(())
    }

    /// Magnitude cap of each replication, ramping from `disp_min` to `disp_max`.
    pub fn caps(&self, replications: usize) -> Vec<f64> {
        linspace_inclusive(replications, self.disp_min, self.disp_max)
    }

    /// Random grid: per point a uniform direction and a magnitude uniform in
    /// `[0, cap]`. Point `k` (row-major) uses counters `2k` and `2k + 1`.
    pub fn sample(&self, noise: &NoiseDraw, cap: f64) -> DisplacementGrid {
        let n = self.grid_rows * self.grid_cols;
        let vectors = (0..n as u64)
            .map(|k| {
                let angle = TAU * noise.uniform(2 * k);
                let magnitude = cap * noise.uniform(2 * k + 1);
                [magnitude * angle.sin(), magnitude * angle.cos()]
            })
            .collect();
        DisplacementGrid {
            grid_rows: self.grid_rows,
            grid_cols: self.grid_cols,
            vectors,
        }
    }
}

/// Per control point displacement `[dy, dx]` in pixels, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementGrid {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub vectors: Vec<[f64; 2]>,
}

impl DisplacementGrid {
    pub fn zeros(grid_rows: usize, grid_cols: usize) -> Self {
        Self::constant(grid_rows, grid_cols, 0.0, 0.0)
    }

    pub fn constant(grid_rows: usize, grid_cols: usize, dy: f64, dx: f64) -> Self {
        Self {
            grid_rows,
            grid_cols,
            vectors: vec![[dy, dx]; grid_rows * grid_cols],
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.vectors
            .iter()
            .map(|[dy, dx]| dy.hypot(*dx))
            .fold(0.0, f64::max)
    }

    fn validate(&self, shape: (usize, usize)) -> Result<()> {
        if self.grid_rows < 2
            || self.grid_cols < 2
            || self.vectors.len() != self.grid_rows * self.grid_cols
        {
            return Err(Error::InvalidParameter(format!(
                "displacement grid {}x{} with {} vectors is malformed",
                self.grid_rows,
                self.grid_cols,
                self.vectors.len()
            )));
        }
        if self.vectors.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite displacement".into()));
        }
        let spacing = grid_spacing(shape, self.grid_rows, self.grid_cols);
        let max = self.max_magnitude();
        if max > 0.0 && spacing <= max {
            return Err(Error::InvalidParameter(format!(
                "grid spacing {spacing:.2} px of a {}x{} image must exceed the largest displacement {max:.2} px",
                shape.0, shape.1
            )));
        }
        Ok(())
    }

    fn field(&self, shape: (usize, usize)) -> DenseField {
        let knots = |len: usize, n: usize| -> Vec<f64> {
            (0..n)
                .map(|i| i as f64 * (len - 1) as f64 / (n - 1) as f64)
                .collect()
        };
        let rk = knots(shape.0, self.grid_rows);
        let ck = knots(shape.1, self.grid_cols);
        let dy: Vec<f64> = self.vectors.iter().map(|v| v[0]).collect();
        let dx: Vec<f64> = self.vectors.iter().map(|v| v[1]).collect();
        let dy = GridSpline::new(&rk, &ck, &dy);
        let dx = GridSpline::new(&rk, &ck, &dx);
        DenseField {
            cols: shape.1,
            dense_dy: dy.sample_dense(shape.0, shape.1),
            dense_dx: dx.sample_dense(shape.0, shape.1),
            dy,
            dx,
        }
    }
}

fn grid_spacing(shape: (usize, usize), grid_rows: usize, grid_cols: usize) -> f64 {
    let r = (shape.0 - 1) as f64 / (grid_rows - 1) as f64;
    let c = (shape.1 - 1) as f64 / (grid_cols - 1) as f64;
    r.min(c)
}

/// Spline displacement field with a per-pixel cache.
struct DenseField {
    cols: usize,
    dense_dy: Vec<f64>,
    dense_dx: Vec<f64>,
    dy: GridSpline,
    dx: GridSpline,
}

impl BackwardMap for DenseField {
    fn source(&self, y: f64, x: f64) -> (f64, f64) {
        let on_pixel = y.fract() == 0.0 && x.fract() == 0.0 && y >= 0.0 && x >= 0.0;
        let idx = y as usize * self.cols + x as usize;
        if on_pixel && idx < self.dense_dy.len() && (x as usize) < self.cols {
            (y - self.dense_dy[idx], x - self.dense_dx[idx])
        } else {
            (y - self.dy.eval(y, x), x - self.dx.eval(y, x))
        }
    }
}

pub fn apply_elastic(img: &Image, grid: &DisplacementGrid) -> Result<Image> {
    grid.validate(img.shape())?;
    Ok(warp_image(img, &grid.field(img.shape())))
}

pub fn apply_elastic_labels(labels: &LabelGrid, grid: &DisplacementGrid) -> Result<LabelGrid> {
    grid.validate(labels.image_shape())?;
    Ok(warp_labels(labels, &grid.field(labels.image_shape())))
}

/// `R` elastic warps of one image and its labels; replication `r` (1-based)
/// draws from `NoiseDraw::new(seed, image_index, r)` with the `r`-th cap.
pub fn elastic_augment(
    img: &Image,
    labels: &LabelGrid,
    replications: usize,
    config: &ElasticConfig,
    seed: u64,
    image_index: u64,
) -> Result<Vec<(Image, LabelGrid)>> {
    config.validate()?;
    check_labels(img, labels)?;
    let spacing = grid_spacing(img.shape(), config.grid_rows, config.grid_cols);
    if spacing <= config.disp_max {
        return Err(Error::InvalidParameter(format!(
            "grid spacing {spacing:.2} px must exceed the maximum displacement {} px",
            config.disp_max
        )));
    }
    config
        .caps(replications)
        .into_iter()
        .enumerate()
        .map(|(i, cap)| {
            let grid = config.sample(&NoiseDraw::new(seed, image_index, i as u64 + 1), cap);
            let field = grid.field(img.shape());
            Ok((warp_image(img, &field), warp_labels(labels, &field)))
        })
        .collect()
}
