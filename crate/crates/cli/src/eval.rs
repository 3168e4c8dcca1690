//! Patchwise evaluation of pixel predictions against patch labels.

use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;
use specaug_core::metrics::{confusion, PATCH_THRESHOLD};
use specaug_core::{hole_fill_with, pixels_to_patches, ConfusionCounts, HoleFillMode, PixelMask};

use crate::error::{CliError, Result};
use crate::manifest::Manifest;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub hole_fill: Option<HoleFillMode>,
    /// Fraction of a patch's pixels that must be set to call it diseased.
    pub patch_threshold: f64,
    /// Prediction pixels at or above this value count as foreground.
    pub mask_threshold: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            hole_fill: None,
            patch_threshold: PATCH_THRESHOLD,
            mask_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub image_id: String,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub f1: f64,
}

impl EvalRow {
    fn new(image_id: String, c: ConfusionCounts, f1: f64) -> Self {
        Self {
            image_id,
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            tn: c.tn,
            f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub totals: ConfusionCounts,
    /// Mean of the per-image F1 scores.
    pub aggregate_f1: f64,
}

pub const AGGREGATE_ID: &str = "aggregate";

impl EvalReport {
    /// `image_id,tp,fp,fn,tn,f1`, one row per image and a final
    /// [`AGGREGATE_ID`] row holding the summed counts and the mean F1.
    pub fn to_csv(&self) -> std::result::Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.serialize(EvalRow::new(
            AGGREGATE_ID.into(),
            self.totals,
            self.aggregate_f1,
        ))?;
        w.into_inner().map_err(|e| e.into_error().into())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let bytes = self.to_csv().map_err(|source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
    }
}

/// Scores each prediction mask against the truth labels of the same id.
/// Rows follow the truth manifest order.
pub fn run_eval(pred: &Manifest, truth: &Manifest, opts: &EvalOptions) -> Result<EvalReport> {
    if !(0.0..=1.0).contains(&opts.patch_threshold) {
        return Err(CliError::Invalid(format!(
            "patch threshold {} must lie in [0, 1]",
            opts.patch_threshold
        )));
    }
    let preds: HashMap<&str, _> = pred
        .entries
        .iter()
        .map(|e| (e.image_id.as_str(), e))
        .collect();
    if preds.len() != truth.entries.len()
        || truth
            .entries
            .iter()
            .any(|e| !preds.contains_key(e.image_id.as_str()))
    {
        return Err(CliError::Invalid(
            "prediction and truth manifests must list the same image ids".into(),
        ));
    }
    let mut rows = Vec::with_capacity(truth.entries.len());
    let mut totals = ConfusionCounts::default();
    for t in &truth.entries {
        let p = preds[t.image_id.as_str()];
        let truth_image = truth.load_image(t)?;
        let grid = truth.load_labels(t, truth_image.shape())?.ok_or_else(|| {
            CliError::Invalid(format!("truth entry {:?} has no labels", t.image_id))
        })?;
        let pred_image = pred.load_image(p)?;
        let mut mask = PixelMask::from_image(&pred_image, opts.mask_threshold);
        if let Some(mode) = opts.hole_fill {
            mask = hole_fill_with(&mask, mode);
        }
        let predicted = pixels_to_patches(&mask, &grid, opts.patch_threshold)?;
        let counts = confusion(&predicted, &grid)?;
        totals = totals + counts;
        rows.push(EvalRow::new(t.image_id.clone(), counts, counts.f1()));
    }
    let aggregate_f1 = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.f1).sum::<f64>() / rows.len() as f64
    };
    Ok(EvalReport {
        rows,
        totals,
        aggregate_f1,
    })
}
