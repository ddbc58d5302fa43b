//! Dataset manifests: `path,<class_1>,...,<class_K>` CSV with 0/1 label cells.
//!
//! Fields are never quoted, so clip paths may not contain commas.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub clip_path: String,
    /// Multi-hot labels in header order.
    pub labels: Vec<bool>,
}

impl ManifestEntry {
    pub fn label_values(&self) -> Vec<f64> {
        self.labels
            .iter()
            .map(|&y| if y { 1.0 } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub class_names: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(file, path)
}

/// Parses manifest CSV from any reader; `origin` is only used in errors.
pub fn parse_manifest<R: Read>(reader: R, origin: &Path) -> Result<Manifest> {
    let err = |line: usize, reason: String| Error::Manifest {
        path: origin.to_path_buf(),
        line,
        reason,
    };
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(reader);
    let mut records = csv.records();

    let header = match records.next() {
        None => return Err(err(1, "empty file".into())),
        Some(r) => r.map_err(|e| err(1, e.to_string()))?,
    };
    let mut cells = header.iter().map(str::trim);
    if cells.next() != Some("path") {
        return Err(err(1, "header must start with `path`".into()));
    }
    let class_names: Vec<String> = cells.map(str::to_owned).collect();
    if class_names.is_empty() {
        return Err(err(1, "header names no classes".into()));
    }
    let mut seen = HashSet::new();
    for name in &class_names {
        if name.is_empty() || !seen.insert(name) {
            return Err(err(1, format!("class name `{name}` is empty or repeated")));
        }
    }

    let mut entries = Vec::new();
    for (row, record) in records.enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| err(line, e.to_string()))?;
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != class_names.len() + 1 {
            return Err(err(
                line,
                format!(
                    "row arity mismatch: expected {} fields, found {}",
                    class_names.len() + 1,
                    record.len()
                ),
            ));
        }
        let labels = record
            .iter()
            .skip(1)
            .map(|cell| match cell.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(err(line, format!("non-binary label `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        entries.push(ManifestEntry {
            clip_path: record[0].trim().to_owned(),
            labels,
        });
    }
    Ok(Manifest {
        class_names,
        entries,
    })
}

pub fn write_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    encode_manifest(manifest, &mut buf).map_err(|reason| Error::Manifest {
        path: path.to_path_buf(),
        line: 0,
        reason,
    })?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

fn encode_manifest(manifest: &Manifest, out: &mut impl Write) -> std::result::Result<(), String> {
    let bad = |s: &str| s.contains([',', '\n', '\r']);
    if manifest.class_names.is_empty() {
        return Err("no classes".into());
    }
    if let Some(name) = manifest.class_names.iter().find(|n| bad(n)) {
        return Err(format!("class name `{name}` contains a separator"));
    }
    let mut text = String::from("path");
    for name in &manifest.class_names {
        text.push(',');
        text.push_str(name);
    }
    text.push('\n');
    for entry in &manifest.entries {
        if bad(&entry.clip_path) {
            return Err(format!(
                "clip path `{}` contains a comma or newline",
                entry.clip_path
            ));
        }
        if entry.labels.len() != manifest.class_names.len() {
            return Err(format!(
                "`{}` has {} labels",
                entry.clip_path,
                entry.labels.len()
            ));
        }
        text.push_str(&entry.clip_path);
        for &y in &entry.labels {
            text.push_str(if y { ",1" } else { ",0" });
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())
}

/// Resolves an entry's clip path against the manifest's directory.
pub fn resolve_clip_path(manifest_dir: &Path, entry: &ManifestEntry) -> PathBuf {
    let p = Path::new(&entry.clip_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest_dir.join(p)
    }
}
