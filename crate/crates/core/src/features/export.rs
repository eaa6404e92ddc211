//! Feature-matrix files.
//!
//! CSV: header `id,label,<feature names...>`, one row per article; `label`
//! is empty for unlabeled rows.
//!
//! Binary (`.nsfm`), all integers little-endian:
//!
//! ```text
//! magic    4 bytes  "NSFM"
//! version  u32      1
//! hlen     u64      length of the JSON header in bytes
//! header   hlen     UTF-8 JSON {"schema", "rows", "cols", "ids", "labels"}
//! data     rows*cols f64, row-major
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::ml::Matrix;

use super::extract::FeatureMatrix;
use super::schema::FeatureSchema;

pub const MAGIC: &[u8; 4] = b"NSFM";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    schema: FeatureSchema,
    rows: usize,
    cols: usize,
    ids: Vec<String>,
    labels: Vec<Option<u8>>,
}

pub fn write_csv(m: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend(m.schema.features.iter().map(|f| f.name.clone()));
    w.write_record(&header)?;
    for i in 0..m.matrix.rows() {
        let mut rec = vec![m.ids[i].clone(), m.labels[i].map(|l| l.as_u8().to_string()).unwrap_or_default()];
        rec.extend(m.matrix.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("{}: {other:?}", path.display())),
    }
}

pub fn to_binary(m: &FeatureMatrix) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(&Header {
        schema: m.schema.clone(),
        rows: m.matrix.rows(),
        cols: m.matrix.cols(),
        ids: m.ids.clone(),
        labels: m.labels.iter().map(|l| l.map(Label::as_u8)).collect(),
    })?;
    let mut out = Vec::with_capacity(16 + header.len() + 8 * m.matrix.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    for v in m.matrix.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn from_binary(bytes: &[u8]) -> Result<FeatureMatrix> {
    let bad = |m: &str| Error::SchemaMismatch(format!("feature matrix file: {m}"));
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = bytes.get(16..16 + hlen).ok_or_else(|| bad("truncated header"))?;
    let h: Header = serde_json::from_slice(body)?;
    let data_bytes = &bytes[16 + hlen..];
    if h.schema.len() != h.cols || h.ids.len() != h.rows || h.labels.len() != h.rows {
        return Err(bad("header fields disagree"));
    }
    if data_bytes.len() != 8 * h.rows * h.cols {
        return Err(bad("data length does not match rows x cols"));
    }
    let data = data_bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let labels = h
        .labels
        .into_iter()
        .map(|l| match l {
            None => Ok(None),
            Some(v) => Label::from_u8(v).map(Some).ok_or_else(|| bad("label outside {0,1}")),
        })
        .collect::<Result<_>>()?;
    Ok(FeatureMatrix {
        schema: h.schema,
        ids: h.ids,
        labels,
        matrix: Matrix::new(h.rows, h.cols, data)?,
    })
}

pub fn write_binary(m: &FeatureMatrix, path: &Path) -> Result<()> {
    let bytes = to_binary(m)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn read_binary(path: &Path) -> Result<FeatureMatrix> {
    from_binary(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
