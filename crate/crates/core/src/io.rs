//! On-disk formats: binary 16-bit PGM, the lossless `SPA1` rawf64 format and
//! the `row,col,label` patch CSV.
//!
//! rawf64 layout: the 4 magic bytes `SPA1`, then rows and cols as `u32`
//! little-endian, then `rows * cols` little-endian `f64` values row-major.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, LabelGrid, PatchLabel};

pub const RAWF64_MAGIC: &[u8; 4] = b"SPA1";
const RAWF64_HEADER_LEN: usize = 12;
const PGM_MAXVAL: f64 = 65535.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Pgm16,
    Rawf64,
}

impl ImageFormat {
    /// `.pgm` and `.pnm` map to PGM; everything else is treated as rawf64.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("pgm") || ext.eq_ignore_ascii_case("pnm") => {
                ImageFormat::Pgm16
            }
            _ => ImageFormat::Rawf64,
        }
    }
}

pub fn load_image(path: impl AsRef<Path>, format: ImageFormat) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        ImageFormat::Pgm16 => decode_pgm(&bytes),
        ImageFormat::Rawf64 => decode_rawf64(&bytes),
    }
}

/// Writes `img`. PGM output rounds half-to-even and clamps to `[0, 65535]`.
pub fn save_image(img: &Image, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        ImageFormat::Pgm16 => encode_pgm(img),
        ImageFormat::Rawf64 => encode_rawf64(img),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_rawf64(img: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(RAWF64_HEADER_LEN + 8 * img.pixels().len());
    out.extend_from_slice(RAWF64_MAGIC);
    out.extend_from_slice(&(img.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(img.cols() as u32).to_le_bytes());
    for p in img.pixels() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode_rawf64(bytes: &[u8]) -> Result<Image> {
    let malformed = |reason: &str| Error::Malformed {
        format: "rawf64",
        reason: reason.to_string(),
    };
    if bytes.len() < RAWF64_HEADER_LEN {
        return Err(malformed("truncated header"));
    }
    if &bytes[..4] != RAWF64_MAGIC {
        return Err(malformed("bad magic"));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let payload = &bytes[RAWF64_HEADER_LEN..];
    let expected = rows * cols;
    if !payload.len().is_multiple_of(8) || payload.len() / 8 != expected {
        return Err(Error::PayloadSize {
            expected,
            actual: payload.len() / 8,
        });
    }
    let pixels = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Image::new(rows, cols, pixels)
}

pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let header = format!("P5\n{} {}\n65535\n", img.cols(), img.rows());
    let mut out = Vec::with_capacity(header.len() + 2 * img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    for &p in img.pixels() {
        let v = p.round_ties_even().clamp(0.0, PGM_MAXVAL) as u16;
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

/// Decodes binary PGM (P5). Samples are returned as raw integer values; a
/// maxval below 256 means one byte per sample.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    let malformed = |reason: String| Error::Malformed {
        format: "pgm",
        reason,
    };
    let mut cursor = PnmHeader { bytes, pos: 0 };
    let magic = cursor
        .token()
        .ok_or_else(|| malformed("missing magic".into()))?;
    if magic != b"P5" {
        return Err(malformed(format!(
            "unsupported magic {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let mut field = |name: &str| -> Result<usize> {
        let tok = cursor
            .token()
            .ok_or_else(|| malformed(format!("missing {name}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| malformed(format!("bad {name}")))
    };
    let cols = field("width")?;
    let rows = field("height")?;
    let maxval = field("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(malformed(format!("maxval {maxval} out of range")));
    }
    // exactly one whitespace byte separates the header from the raster
    if cursor.pos >= bytes.len() || !bytes[cursor.pos].is_ascii_whitespace() {
        return Err(malformed("missing raster separator".into()));
    }
    let raster = &bytes[cursor.pos + 1..];
    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    let expected = rows * cols;
    if raster.len() != expected * sample_bytes {
        return Err(Error::PayloadSize {
            expected,
            actual: raster.len() / sample_bytes,
        });
    }
    let pixels = if sample_bytes == 1 {
        raster.iter().map(|&b| b as f64).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
            .collect()
    };
    Image::new(rows, cols, pixels)
}

struct PnmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmHeader<'a> {
    fn token(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRecord {
    row: usize,
    col: usize,
    label: PatchLabel,
}

/// Writes a label grid as `row,col,label` CSV in row-major lattice order.
pub fn save_labels(grid: &LabelGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_labels(grid).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_labels(grid: &LabelGrid) -> std::result::Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let (pr, pc) = grid.lattice();
    for row in 0..pr {
        for col in 0..pc {
            w.serialize(LabelRecord {
                row,
                col,
                label: grid.get(row, col),
            })?;
        }
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

/// Reads a `row,col,label` CSV for an image of `image_shape`; every lattice
/// cell must appear exactly once.
pub fn load_labels(
    path: impl AsRef<Path>,
    image_shape: (usize, usize),
    patch_size: usize,
) -> Result<LabelGrid> {
    let path = path.as_ref();
    let mut grid = LabelGrid::uniform(image_shape, patch_size, PatchLabel::Outside)?;
    let (pr, pc) = grid.lattice();
    let mut seen = vec![false; pr * pc];
    let mut reader = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    for rec in reader.deserialize::<LabelRecord>() {
        let rec = rec.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        if rec.row >= pr || rec.col >= pc {
            return Err(Error::Malformed {
                format: "label csv",
                reason: format!("patch ({}, {}) outside {pr}x{pc} lattice", rec.row, rec.col),
            });
        }
        let idx = rec.row * pc + rec.col;
        if std::mem::replace(&mut seen[idx], true) {
            return Err(Error::Malformed {
                format: "label csv",
                reason: format!("duplicate patch ({}, {})", rec.row, rec.col),
            });
        }
        grid.set(rec.row, rec.col, rec.label);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Malformed {
            format: "label csv",
            reason: format!("missing patch ({}, {})", missing / pc, missing % pc),
        });
    }
    Ok(grid)
}
