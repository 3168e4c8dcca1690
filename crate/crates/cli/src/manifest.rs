//! Dataset manifests: a JSON file listing images, optional patch labels and
//! the dataset-wide patch size and intensity window.
//!
//! ```json
//! {
//!   "patch_size": 20,
//!   "window_lo": -1000.0,
//!   "window_hi": 400.0,
//!   "entries": [
//!     { "image_id": "case01", "image_path": "case01.spa", "label_path": "case01.labels.csv" }
//!   ]
//! }
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use specaug_core::{load_image, load_labels, Image, ImageFormat, LabelGrid, Window};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub image_id: String,
    pub image_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub patch_size: usize,
    pub window_lo: f64,
    pub window_hi: f64,
    pub entries: Vec<Entry>,
    /// Directory relative paths are resolved against; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read(path).map_err(|e| CliError::io(path, e))?;
        let mut manifest: Manifest =
            serde_json::from_slice(&text).map_err(|e| CliError::json(path, e))?;
        manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        manifest.validate()?;
        for entry in &manifest.entries {
            for p in std::iter::once(&entry.image_path).chain(&entry.label_path) {
                let full = manifest.resolve(p);
                if !full.is_file() {
                    return Err(CliError::io(
                        &full,
                        std::io::Error::new(
                            std::io::ErrorKind::NotFound,
                            "referenced file does not exist",
                        ),
                    ));
                }
            }
        }
        Ok(manifest)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_vec_pretty(self).map_err(|e| CliError::json(path, e))?;
        text.push(b'\n');
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 {
            return Err(CliError::Invalid(
                "manifest patch_size must be at least 1".into(),
            ));
        }
        self.window()?;
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.image_id.as_str()) {
                return Err(CliError::Invalid(format!(
                    "duplicate image_id {:?}",
                    e.image_id
                )));
            }
        }
        Ok(())
    }

    pub fn window(&self) -> Result<Window> {
        Ok(Window::new(self.window_lo, self.window_hi)?)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn load_image(&self, entry: &Entry) -> Result<Image> {
        let path = self.resolve(&entry.image_path);
        Ok(load_image(&path, ImageFormat::from_path(&path))?)
    }

    /// Labels of `entry` on the lattice of an image of `shape`, if it has any.
    pub fn load_labels(&self, entry: &Entry, shape: (usize, usize)) -> Result<Option<LabelGrid>> {
        entry
            .label_path
            .as_ref()
            .map(|p| Ok(load_labels(self.resolve(p), shape, self.patch_size)?))
            .transpose()
    }
}
