//! Binary PGM images, the patch directory layout and its CSV manifest.
//!
//! ```text
//! <root>/mass/<id>.pgm
//! <root>/normal/<id>.pgm
//! <root>/manifest.csv      id,label,source,path
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Label, Patch, PatchPool, Source};
use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.csv";

/// 8-bit grayscale raster, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    /// Values in [0, 1] (sample / maxval).
    pub pixels: Vec<f32>,
}

pub fn to_byte(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// P5 encoding with maxval 255; value `v` is stored as `round(v·255)`.
pub fn encode_pgm(width: usize, height: usize, pixels: &[f32]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(pixels.iter().map(|&v| to_byte(v)));
    out
}

pub fn write_pgm(path: impl AsRef<Path>, width: usize, height: usize, pixels: &[f32]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_pgm(width, height, pixels))?;
    Ok(())
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: path.to_owned(), reason: reason.into() }
}

/// Reads binary PGM (P5), 8- or 16-bit.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<Pgm> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(format_err(path, "truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1; // single whitespace before the raster
    if fields[0] != "P5" {
        return Err(format_err(path, format!("magic `{}`, expected P5", fields[0])));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| format_err(path, format!("bad number `{s}`")));
    let (width, height, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(format_err(path, format!("maxval {maxval}")));
    }
    let depth = if maxval < 256 { 1 } else { 2 };
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() < width * height * depth {
        return Err(format_err(path, "truncated raster"));
    }
    let scale = 1.0 / maxval as f32;
    let pixels = if depth == 1 {
        raster[..width * height].iter().map(|&b| (b as f32 * scale).min(1.0)).collect()
    } else {
        raster[..width * height * 2]
            .chunks_exact(2)
            .map(|c| (u16::from_be_bytes([c[0], c[1]]) as f32 * scale).min(1.0))
            .collect()
    };
    Ok(Pgm { width, height, pixels })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    pub label: Label,
    pub source: Source,
    pub path: String,
}

fn label_dir(label: Label) -> &'static str {
    match label {
        Label::Mass => "mass",
        Label::Normal => "normal",
    }
}

/// Writes every patch as `<root>/<label>/<id>.pgm` plus the manifest.
pub fn save_patch_dir(pool: &PatchPool, root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    for label in [Label::Mass, Label::Normal] {
        fs::create_dir_all(root.join(label_dir(label)))?;
    }
    let mut manifest = csv::Writer::from_path(root.join(MANIFEST))?;
    for p in pool {
        let rel = format!("{}/{}.pgm", label_dir(p.label()), p.id());
        write_pgm(root.join(&rel), p.size(), p.size(), p.pixels())?;
        manifest.serialize(ManifestRow {
            id: p.id().to_owned(),
            label: p.label(),
            source: p.source(),
            path: rel,
        })?;
    }
    manifest.flush()?;
    Ok(())
}

fn load_patch(path: &Path, id: String, label: Label, source: Source) -> Result<Patch> {
    let img = read_pgm(path)?;
    if img.width != img.height {
        return Err(format_err(path, "patch is not square"));
    }
    Patch::new(id, label, source, img.width, img.pixels)
}

fn sorted_pgms(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "pgm"));
    files.sort();
    Ok(files)
}

/// Loads a patch directory. With a manifest, rows are read in manifest order;
/// otherwise `mass/` then `normal/` are scanned in filename order and every
/// patch is tagged real.
pub fn load_patch_dir(root: impl AsRef<Path>) -> Result<PatchPool> {
    let root = root.as_ref();
    let manifest = root.join(MANIFEST);
    let mut patches = Vec::new();
    if manifest.is_file() {
        let mut reader = csv::Reader::from_path(&manifest)?;
        for row in reader.deserialize::<ManifestRow>() {
            let row = row?;
            patches.push(load_patch(&root.join(&row.path), row.id, row.label, row.source)?);
        }
    } else {
        for label in [Label::Mass, Label::Normal] {
            for path in sorted_pgms(&root.join(label_dir(label)))? {
                let id = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .ok_or_else(|| format_err(&path, "file name is not UTF-8"))?
                    .to_owned();
                patches.push(load_patch(&path, id, label, Source::Real)?);
            }
        }
    }
    if patches.is_empty() {
        return Err(Error::invalid(format!("no patches found under {}", root.display())));
    }
    PatchPool::new(patches)
}
