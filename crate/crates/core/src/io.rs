//! File formats.
//!
//! Matrices use `.cmat.json`: `{"rows": m, "cols": n, "entries": [[re, im], ...]}`
//! in row-major order. Writers print every component with 17 significant
//! digits so files round-trip bit-exactly.
//!
//! Bundles are directories with a `manifest.json`:
//!
//! * family: `{kind, d, dim, count, omega: [re, im]}` + `member_{i}.cmat.json`
//! * MUM: `{d, k, dim, n_measurements}` + `m{m}_e{a}.cmat.json`
//! * canonical form (inside a MUM bundle): `canonical.json` `{k, d, anchor}`,
//!   `blocks/b{b}_i{i}_j{j}.cmat.json` and `basis_change.cmat.json`
//!
//! All indices in file names are 0-based.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};
use crate::mum::{CanonicalForm, MumFamily};

#[derive(Debug, Deserialize)]
struct CmatFile {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

pub fn parse_cmat(text: &str) -> Result<ComplexMatrix> {
    let file: CmatFile = serde_json::from_str(text)?;
    if file.entries.len() != file.rows * file.cols {
        return Err(Error::Format(format!(
            "expected {} entries for a {}x{} matrix, found {}",
            file.rows * file.cols,
            file.rows,
            file.cols,
            file.entries.len()
        )));
    }
    Ok(ComplexMatrix::from_row_iterator(
        file.rows,
        file.cols,
        file.entries.iter().map(|[re, im]| c64(*re, *im)),
    ))
}

fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // keeps the sign of -0.0
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    format!("{x:.16e}")
}

pub fn format_cmat(m: &ComplexMatrix) -> Result<String> {
    let mut out = String::new();
    write!(out, "{{\"rows\": {}, \"cols\": {}, \"entries\": [", m.nrows(), m.ncols()).unwrap();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if i + j > 0 {
                out.push_str(", ");
            }
            write!(out, "[{}, {}]", fmt_f64(z.re), fmt_f64(z.im)).unwrap();
        }
    }
    out.push_str("]}\n");
    Ok(out)
}

pub fn read_cmat(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_cmat(&text).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_cmat(path: &Path, m: &ComplexMatrix) -> Result<()> {
    let text = format_cmat(m)?;
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyManifest {
    pub kind: String,
    pub d: usize,
    pub dim: usize,
    pub count: usize,
    pub omega: [f64; 2],
}

pub fn write_family_bundle(
    dir: &Path,
    manifest: &FamilyManifest,
    members: &[ComplexMatrix],
) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::with_capacity(members.len() + 1);
    for (i, m) in members.iter().enumerate() {
        let path = dir.join(format!("member_{i}.cmat.json"));
        write_cmat(&path, m)?;
        written.push(path);
    }
    let path = dir.join("manifest.json");
    write_json(&path, manifest)?;
    written.push(path);
    Ok(written)
}

pub fn read_family_bundle(dir: &Path) -> Result<(FamilyManifest, Vec<ComplexMatrix>)> {
    let manifest: FamilyManifest = read_json(&dir.join("manifest.json"))?;
    let members = (0..manifest.count)
        .map(|i| read_cmat(&dir.join(format!("member_{i}.cmat.json"))))
        .collect::<Result<_>>()?;
    Ok((manifest, members))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MumManifest {
    pub d: usize,
    pub k: usize,
    pub dim: usize,
    pub n_measurements: usize,
}

pub fn write_mum_bundle(dir: &Path, family: &MumFamily) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();
    for (m, meas) in family.measurements.iter().enumerate() {
        for (a, e) in meas.effects.iter().enumerate() {
            let path = dir.join(format!("m{m}_e{a}.cmat.json"));
            write_cmat(&path, e)?;
            written.push(path);
        }
    }
    let manifest = MumManifest {
        d: family.d,
        k: family.k,
        dim: family.dim,
        n_measurements: family.measurements.len(),
    };
    let path = dir.join("manifest.json");
    write_json(&path, &manifest)?;
    written.push(path);
    Ok(written)
}

/// Effects grouped by measurement.
pub fn read_mum_bundle(dir: &Path) -> Result<(MumManifest, Vec<Vec<ComplexMatrix>>)> {
    let manifest: MumManifest = read_json(&dir.join("manifest.json"))?;
    let effects = (0..manifest.n_measurements)
        .map(|m| {
            (0..manifest.d)
                .map(|a| read_cmat(&dir.join(format!("m{m}_e{a}.cmat.json"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok((manifest, effects))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalManifest {
    pub k: usize,
    pub d: usize,
    pub anchor: usize,
}

pub fn write_canonical_bundle(dir: &Path, cf: &CanonicalForm) -> Result<Vec<PathBuf>> {
    let blocks_dir = dir.join("blocks");
    create_dir(&blocks_dir)?;
    let mut written = Vec::new();
    for b in 0..cf.d {
        for i in 0..cf.d {
            for j in 0..cf.d {
                let path = blocks_dir.join(format!("b{b}_i{i}_j{j}.cmat.json"));
                write_cmat(&path, cf.block(b, i, j))?;
                written.push(path);
            }
        }
    }
    let path = dir.join("basis_change.cmat.json");
    write_cmat(&path, &cf.basis_change)?;
    written.push(path);
    let path = dir.join("canonical.json");
    write_json(
        &path,
        &CanonicalManifest {
            k: cf.k,
            d: cf.d,
            anchor: cf.anchor,
        },
    )?;
    written.push(path);
    Ok(written)
}

pub fn read_canonical_bundle(dir: &Path) -> Result<CanonicalForm> {
    let manifest: CanonicalManifest = read_json(&dir.join("canonical.json"))?;
    let d = manifest.d;
    let mut blocks = Vec::with_capacity(d);
    for b in 0..d {
        let mut table = Vec::with_capacity(d);
        for i in 0..d {
            let row = (0..d)
                .map(|j| read_cmat(&dir.join("blocks").join(format!("b{b}_i{i}_j{j}.cmat.json"))))
                .collect::<Result<Vec<_>>>()?;
            table.push(row);
        }
        blocks.push(table);
    }
    Ok(CanonicalForm {
        k: manifest.k,
        d,
        anchor: manifest.anchor,
        blocks,
        basis_change: read_cmat(&dir.join("basis_change.cmat.json"))?,
    })
}
