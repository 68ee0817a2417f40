//! Field snapshots: one raw little-endian f64 file per component, x-fastest,
//! plus a JSON sidecar describing the grid and the sample time.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

use super::{GridSpec, ScalarField, VectorField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotMeta {
    pub dims: [usize; 3],
    pub lengths: [f64; 3],
    pub field: String,
    pub components: Vec<String>,
    pub time: f64,
    pub step: u64,
    pub seed: u64,
}

impl SnapshotMeta {
    pub fn spec(&self, dealias: bool) -> GridSpec {
        GridSpec {
            nx: self.dims[0],
            ny: self.dims[1],
            nz: self.dims[2],
            lx: self.lengths[0],
            ly: self.lengths[1],
            lz: self.lengths[2],
            dealias,
        }
    }
}

pub fn component_path(dir: &Path, field: &str, comp: &str) -> PathBuf {
    dir.join(format!("{field}.{comp}.f64"))
}

pub fn sidecar_path(dir: &Path, field: &str) -> PathBuf {
    dir.join(format!("{field}.json"))
}

fn write_raw<T: Real>(path: &Path, f: &ScalarField<T>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in f.values() {
        w.write_all(&v.as_f64().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_raw<T: Real>(path: &Path, spec: GridSpec) -> Result<ScalarField<T>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * spec.len() {
        return Err(Error::InvalidArgument(format!(
            "{}: expected {} bytes, found {}",
            path.display(),
            8 * spec.len(),
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
        .collect();
    ScalarField::from_vec(spec, data)
}

/// Writes named scalar components and the sidecar. Returns every file written,
/// sidecar last.
pub fn write_fields<T: Real>(
    dir: &Path,
    field: &str,
    comps: &[(&str, &ScalarField<T>)],
    time: f64,
    step: u64,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    let spec = *comps
        .first()
        .ok_or_else(|| Error::InvalidArgument("snapshot without components".into()))?
        .1
        .spec();
    fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(comps.len() + 1);
    for (name, f) in comps {
        if *f.spec() != spec {
            return Err(Error::GridMismatch);
        }
        let p = component_path(dir, field, name);
        write_raw(&p, f)?;
        files.push(p);
    }
    let meta = SnapshotMeta {
        dims: spec.dims(),
        lengths: spec.lengths(),
        field: field.to_string(),
        components: comps.iter().map(|(n, _)| n.to_string()).collect(),
        time,
        step,
        seed,
    };
    let p = sidecar_path(dir, field);
    fs::write(&p, serde_json::to_string_pretty(&meta)?)?;
    files.push(p);
    Ok(files)
}

pub fn write_vector<T: Real>(
    dir: &Path,
    field: &str,
    v: &VectorField<T>,
    time: f64,
    step: u64,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    write_fields(dir, field, &[("x", &v.x), ("y", &v.y), ("z", &v.z)], time, step, seed)
}

pub fn read_meta(dir: &Path, field: &str) -> Result<SnapshotMeta> {
    Ok(serde_json::from_str(&fs::read_to_string(sidecar_path(dir, field))?)?)
}

/// Reads all components listed in the sidecar, in sidecar order.
pub fn read_fields<T: Real>(
    dir: &Path,
    field: &str,
    dealias: bool,
) -> Result<(SnapshotMeta, Vec<ScalarField<T>>)> {
    let meta = read_meta(dir, field)?;
    let spec = meta.spec(dealias);
    spec.validate()?;
    let comps = meta
        .components
        .iter()
        .map(|c| read_raw(&component_path(dir, field, c), spec))
        .collect::<Result<Vec<_>>>()?;
    Ok((meta, comps))
}

pub fn read_vector<T: Real>(
    dir: &Path,
    field: &str,
    dealias: bool,
) -> Result<(SnapshotMeta, VectorField<T>)> {
    let (meta, comps) = read_fields(dir, field, dealias)?;
    let [x, y, z]: [ScalarField<T>; 3] = comps.try_into().map_err(|_| {
        Error::InvalidArgument(format!("snapshot {field} does not have 3 components"))
    })?;
    Ok((meta, VectorField::new(x, y, z)?))
}
