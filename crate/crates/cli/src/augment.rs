//! Batch augmentation with a replayable audit log.
//!
//! Stage 1 of a policy turns each eligible image into `R` outputs; every
//! further stage transforms each of those once, using the same replication
//! number `r` for its own draw. All randomness is keyed by
//! `(stage seed, image index, r)`, where the image index is the entry's
//! position in the manifest, so the worker count never changes a byte.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use specaug_core::io::encode_labels;
use specaug_core::{load_image, load_labels, save_image, Draw, ImageFormat, Sample};

use crate::error::{CliError, Result};
use crate::manifest::{Entry, Manifest};
use crate::policy::{PolicyConfig, ReplicationFilter};

pub const AUDIT_FILE: &str = "audit.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub images: usize,
    pub eligible: usize,
    pub skipped: usize,
    pub outputs: usize,
}

/// One written output and everything needed to rebuild it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub image_id: String,
    pub image_index: u64,
    pub replication: u64,
    pub source_image: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_labels: Option<PathBuf>,
    pub image_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_file: Option<String>,
    /// One draw per policy stage, in stage order.
    pub draws: Vec<Draw>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditLog {
    pub policy: PolicyConfig,
    pub policy_hash: String,
    pub patch_size: usize,
    pub counts: Counts,
    pub outputs: Vec<OutputRecord>,
}

impl AuditLog {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::json(path, e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut bytes = serde_json::to_vec_pretty(self).map_err(|e| CliError::json(path, e))?;
        bytes.push(b'\n');
        fs::write(path, bytes).map_err(|e| CliError::io(path, e))
    }

    pub fn find(&self, image_file: &str) -> Option<&OutputRecord> {
        self.outputs.iter().find(|o| o.image_file == image_file)
    }
}

pub fn output_stem(image_id: &str, replication: u64, policy_hash: &str) -> String {
    format!("{image_id}__r{replication}__{policy_hash}")
}

/// Runs every stage for replication `r`, returning the draws and the result.
pub fn generate(
    policy: &PolicyConfig,
    input: &Sample,
    image_index: u64,
    r: u64,
) -> Result<(Vec<Draw>, Sample)> {
    let mut draws = Vec::with_capacity(policy.stages.len());
    let mut current = input.clone();
    for stage in &policy.stages {
        let draw = stage.draw(image_index, r)?;
        current = stage.apply(&current, &draw, image_index, r)?;
        draws.push(draw);
    }
    Ok((draws, current))
}

/// Re-applies recorded draws without sampling anything.
pub fn regenerate(
    policy: &PolicyConfig,
    input: &Sample,
    image_index: u64,
    r: u64,
    draws: &[Draw],
) -> Result<Sample> {
    if draws.len() != policy.stages.len() {
        return Err(CliError::Invalid(format!(
            "{} draws recorded for a {}-stage policy",
            draws.len(),
            policy.stages.len()
        )));
    }
    let mut current = input.clone();
    for (stage, draw) in policy.stages.iter().zip(draws) {
        current = stage.apply(&current, draw, image_index, r)?;
    }
    Ok(current)
}

/// Writes an output image (rawf64) and its labels, if any.
pub fn write_sample(sample: &Sample, image_path: &Path, label_path: Option<&Path>) -> Result<()> {
    save_image(&sample.image, image_path, ImageFormat::Rawf64)?;
    if let (Some(labels), Some(path)) = (&sample.labels, label_path) {
        let bytes = encode_labels(labels).map_err(|source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

fn process_entry(
    manifest: &Manifest,
    policy: &PolicyConfig,
    hash: &str,
    out_dir: &Path,
    image_index: u64,
    entry: &Entry,
) -> Result<Option<Vec<OutputRecord>>> {
    let image = manifest.load_image(entry)?;
    let labels = manifest.load_labels(entry, image.shape())?;
    if policy.replication_filter == ReplicationFilter::DiseasedOnly {
        match &labels {
            None => {
                return Err(CliError::Invalid(format!(
                    "image {:?} has no labels; the diseased-only filter needs them",
                    entry.image_id
                )))
            }
            Some(l) if !l.has_diseased() => return Ok(None),
            Some(_) => {}
        }
    }
    let input = Sample::new(image, labels)?;
    let mut records = Vec::with_capacity(policy.replications());
    for r in 1..=policy.replications() as u64 {
        let (draws, out) = generate(policy, &input, image_index, r)?;
        let stem = output_stem(&entry.image_id, r, hash);
        let image_file = format!("{stem}.spa");
        let label_file = out.labels.as_ref().map(|_| format!("{stem}.labels.csv"));
        write_sample(
            &out,
            &out_dir.join(&image_file),
            label_file.as_ref().map(|f| out_dir.join(f)).as_deref(),
        )?;
        records.push(OutputRecord {
            image_id: entry.image_id.clone(),
            image_index,
            replication: r,
            source_image: manifest.resolve(&entry.image_path),
            source_labels: entry.label_path.as_ref().map(|p| manifest.resolve(p)),
            image_file,
            label_file,
            draws,
        });
    }
    Ok(Some(records))
}

/// Augments every eligible manifest entry into `out_dir` and writes the
/// audit log there as [`AUDIT_FILE`].
pub fn run_augment(
    manifest: &Manifest,
    policy: &PolicyConfig,
    out_dir: &Path,
    workers: usize,
) -> Result<AuditLog> {
    policy.validate()?;
    manifest.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let hash = policy.hash();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot start worker pool: {e}")))?;
    let per_image: Vec<Option<Vec<OutputRecord>>> = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .enumerate()
            .map(|(i, entry)| process_entry(manifest, policy, &hash, out_dir, i as u64, entry))
            .collect::<Result<_>>()
    })?;
    let eligible = per_image.iter().filter(|p| p.is_some()).count();
    let outputs: Vec<OutputRecord> = per_image.into_iter().flatten().flatten().collect();
    let audit = AuditLog {
        policy: policy.clone(),
        policy_hash: hash,
        patch_size: manifest.patch_size,
        counts: Counts {
            images: manifest.entries.len(),
            eligible,
            skipped: manifest.entries.len() - eligible,
            outputs: outputs.len(),
        },
        outputs,
    };
    audit.save(out_dir.join(AUDIT_FILE))?;
    Ok(audit)
}

/// Rebuilds one output from the audit log and its source files.
pub fn replay(audit: &AuditLog, image_file: &str) -> Result<Sample> {
    let rec = audit.find(image_file).ok_or_else(|| {
        CliError::Invalid(format!("{image_file:?} is not listed in the audit log"))
    })?;
    let image = load_image(&rec.source_image, ImageFormat::from_path(&rec.source_image))?;
    let labels = rec
        .source_labels
        .as_ref()
        .map(|p| load_labels(p, image.shape(), audit.patch_size))
        .transpose()?;
    let input = Sample::new(image, labels)?;
    regenerate(
        &audit.policy,
        &input,
        rec.image_index,
        rec.replication,
        &rec.draws,
    )
}
