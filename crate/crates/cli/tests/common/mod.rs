#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use specaug_cli::{Entry, Manifest};
use specaug_core::synthetic::texture;
use specaug_core::{save_image, save_labels, Image, ImageFormat, LabelGrid, PatchLabel};

pub const PATCH: usize = 8;

/// Writes one 32x32 image per `diseased` flag, with labels marking patch
/// (1, 1) diseased where the flag is set, and returns the manifest path.
pub fn dataset(dir: &Path, diseased: &[bool]) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let entries = diseased
        .iter()
        .enumerate()
        .map(|(i, &sick)| {
            let id = format!("img{i}");
            let img = texture(32, 32, i as u64);
            let mut labels = LabelGrid::uniform((32, 32), PATCH, PatchLabel::Healthy).unwrap();
            labels.set(0, 0, PatchLabel::Outside);
            if sick {
                labels.set(1, 1, PatchLabel::Diseased);
            }
            save_image(&img, dir.join(format!("{id}.spa")), ImageFormat::Rawf64).unwrap();
            save_labels(&labels, dir.join(format!("{id}.labels.csv"))).unwrap();
            Entry {
                image_id: id.clone(),
                image_path: format!("{id}.spa").into(),
                label_path: Some(format!("{id}.labels.csv").into()),
            }
        })
        .collect();
    write_manifest(dir, "manifest.json", entries)
}

pub fn write_manifest(dir: &Path, name: &str, entries: Vec<Entry>) -> PathBuf {
    let path = dir.join(name);
    Manifest {
        patch_size: PATCH,
        window_lo: 0.0,
        window_hi: 255.0,
        entries,
        base_dir: dir.to_path_buf(),
    }
    .save(&path)
    .unwrap();
    path
}

/// Writes a 0/1 mask image that sets exactly the listed patches.
pub fn mask_entry(
    dir: &Path,
    id: &str,
    shape: (usize, usize),
    patches: &[(usize, usize)],
) -> Entry {
    let img = Image::from_fn(shape.0, shape.1, |r, c| {
        patches.contains(&(r / PATCH, c / PATCH)) as u8 as f64
    })
    .unwrap();
    let file = format!("{id}.mask.spa");
    save_image(&img, dir.join(&file), ImageFormat::Rawf64).unwrap();
    Entry {
        image_id: id.into(),
        image_path: file.into(),
        label_path: None,
    }
}

/// Every file in `dir` by name, with its bytes.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}
