//! Small procedural dataset with patch labels and matching prediction masks,
//! for smoke tests and demos.
//!
//! Each image is a texture with an elliptical "lung" region; patches whose
//! centre lies outside it are labelled outside. Every third image is healthy;
//! the others carry one to three bright lesions, one per diseased patch. The
//! prediction masks mark each diseased patch with a few pinholes (which hole
//! filling closes) and, on some images, one false-positive patch.

use std::fs;
use std::path::{Path, PathBuf};

use specaug_core::rng::NoiseDraw;
use specaug_core::{save_image, save_labels, Image, ImageFormat, LabelGrid, PatchLabel};

use crate::error::{CliError, Result};
use crate::manifest::{Entry, Manifest};

pub const TRUTH_MANIFEST: &str = "manifest.json";
pub const PRED_MANIFEST: &str = "predictions.json";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub count: usize,
    pub size: usize,
    pub patch_size: usize,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            count: 10,
            size: 100,
            patch_size: 20,
            seed: 0,
        }
    }
}

fn lung_labels(size: usize, patch_size: usize) -> Result<LabelGrid> {
    let mut grid = LabelGrid::uniform((size, size), patch_size, PatchLabel::Healthy)?;
    let (pr, pc) = grid.lattice();
    let half = size as f64 / 2.0;
    for r in 0..pr {
        for c in 0..pc {
            let (y, x) = grid.patch_center(r, c);
            let (dy, dx) = (
                (y - half) / (0.5 * size as f64),
                (x - half) / (0.45 * size as f64),
            );
            if dy * dy + dx * dx > 1.0 {
                grid.set(r, c, PatchLabel::Outside);
            }
        }
    }
    Ok(grid)
}

/// Writes the dataset into `dir` and returns the paths of the truth and
/// prediction manifests.
pub fn generate_dataset(dir: &Path, opts: &SynthOptions) -> Result<(PathBuf, PathBuf)> {
    if opts.patch_size == 0 || opts.size < opts.patch_size || opts.count == 0 {
        return Err(CliError::Invalid(format!(
            "need count >= 1 and size >= patch size >= 1, got {opts:?}"
        )));
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let (n, ps) = (opts.size, opts.patch_size);
    let base = lung_labels(n, ps)?;
    let lung: Vec<(usize, usize)> = (0..base.lattice().0)
        .flat_map(|r| (0..base.lattice().1).map(move |c| (r, c)))
        .filter(|&(r, c)| base.get(r, c) == PatchLabel::Healthy)
        .collect();

    let mut truth = Vec::with_capacity(opts.count);
    let mut preds = Vec::with_capacity(opts.count);
    for i in 0..opts.count {
        let noise = NoiseDraw::new(opts.seed, i as u64, 0);
        let mut labels = base.clone();
        let lesions = if i % 3 == 2 {
            0
        } else {
            1 + (noise.bits(0) % 3) as usize
        };
        for k in 0..lesions {
            let (r, c) = lung[(noise.bits(1 + k as u64) % lung.len() as u64) as usize];
            labels.set(r, c, PatchLabel::Diseased);
        }

        let texture = specaug_core::synthetic::texture(n, n, opts.seed.wrapping_add(i as u64));
        let image = Image::from_fn(n, n, |y, x| {
            let mut v = texture.get(y, x);
            match labels
                .patch_at(y as f64, x as f64)
                .map(|(r, c)| labels.get(r, c))
            {
                Some(PatchLabel::Outside) | None => v *= 0.25,
                Some(PatchLabel::Diseased) => {
                    let (r, c) = labels.patch_at(y as f64, x as f64).unwrap();
                    let (cy, cx) = labels.patch_center(r, c);
                    let d2 = (y as f64 - cy).powi(2) + (x as f64 - cx).powi(2);
                    v += 90.0 * (-d2 / (2.0 * (0.3 * ps as f64).powi(2))).exp();
                }
                Some(PatchLabel::Healthy) => {}
            }
            v.min(255.0)
        })?;

        let false_positive =
            (i % 4 == 1).then(|| lung[(noise.bits(9) % lung.len() as u64) as usize]);
        let mask = Image::from_fn(n, n, |y, x| {
            let Some((r, c)) = labels.patch_at(y as f64, x as f64) else {
                return 0.0;
            };
            let hit = labels.get(r, c) == PatchLabel::Diseased || false_positive == Some((r, c));
            let pinhole = (y % ps == ps / 3 || y % ps == 2 * ps / 3) && x % ps == ps / 2;
            if hit && !pinhole {
                1.0
            } else {
                0.0
            }
        })?;

        let id = format!("case{i:02}");
        let image_file = format!("{id}.spa");
        let label_file = format!("{id}.labels.csv");
        let mask_file = format!("{id}.pred.spa");
        save_image(&image, dir.join(&image_file), ImageFormat::Rawf64)?;
        save_labels(&labels, dir.join(&label_file))?;
        save_image(&mask, dir.join(&mask_file), ImageFormat::Rawf64)?;
        truth.push(Entry {
            image_id: id.clone(),
            image_path: image_file.into(),
            label_path: Some(label_file.into()),
        });
        preds.push(Entry {
            image_id: id,
            image_path: mask_file.into(),
            label_path: None,
        });
    }

    let manifest = |entries| Manifest {
        patch_size: ps,
        window_lo: 0.0,
        window_hi: 255.0,
        entries,
        base_dir: dir.to_path_buf(),
    };
    let truth_path = dir.join(TRUTH_MANIFEST);
    let pred_path = dir.join(PRED_MANIFEST);
    manifest(truth).save(&truth_path)?;
    manifest(preds).save(&pred_path)?;
    Ok((truth_path, pred_path))
}
