use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Csv,
    RawF32,
}

impl DataFormat {
    /// `.f32` / `.raw` files are raw floats, everything else CSV.
    pub fn from_path(path: &Path) -> DataFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("f32") | Some("raw") => DataFormat::RawF32,
            _ => DataFormat::Csv,
        }
    }
}

pub fn load_dataset<T: Scalar>(path: &Path, format: DataFormat) -> Result<Dataset<T>> {
    match format {
        DataFormat::Csv => read_csv(fs::File::open(path)?),
        DataFormat::RawF32 => {
            let mut payload = Vec::new();
            fs::File::open(path)?.read_to_end(&mut payload)?;
            let sidecar = fs::read_to_string(sidecar_path(path))?;
            read_raw_f32(&payload, &sidecar)
        }
    }
}

/// `data.f32` → `data.f32.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Reads `id,label,f0..f{d-1}` or `f0..f{d-1}` rows. A header is detected
/// when the first record contains a non-numeric field; `id` and `label`
/// columns are only recognized by name in a header.
pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let mut id_col = None;
    let mut label_col = None;
    let mut pending = None;
    if let Some(first) = records.next() {
        let first = first?;
        if first.iter().any(|f| f.parse::<f64>().is_err()) {
            for (c, name) in first.iter().enumerate() {
                match name {
                    "id" => id_col = Some(c),
                    "label" => label_col = Some(c),
                    _ => {}
                }
            }
        } else {
            pending = Some(first);
        }
    }

    let mut width = None;
    let mut data = Vec::new();
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for (row, rec) in pending.into_iter().map(Ok).chain(records).enumerate() {
        let rec = rec?;
        let mut count = 0;
        for (c, field) in rec.iter().enumerate() {
            if Some(c) == id_col {
                ids.push(field.to_string());
            } else if Some(c) == label_col {
                labels.push(field.parse::<i64>().map_err(|e| Error::Parse {
                    row,
                    message: format!("class label {field:?}: {e}"),
                })?);
            } else {
                let v: f64 = field.parse().map_err(|e| Error::Parse {
                    row,
                    message: format!("feature {field:?}: {e}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFinite { row, column: count });
                }
                data.push(T::of(v));
                count += 1;
            }
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(Error::Parse {
                    row,
                    message: format!("expected {w} features, found {count}"),
                })
            }
            _ => {}
        }
    }
    let d = width.unwrap_or(0);
    let n = if d == 0 { 0 } else { data.len() / d };
    let features = FeatureMatrix::new(n, d, data)?;
    Dataset::new(
        features,
        label_col.map(|_| labels),
        id_col.map(|_| ids),
    )
}

pub fn write_csv<T: Scalar, W: Write>(data: &Dataset<T>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    if data.class_labels().is_some() {
        header.push("label".into());
    }
    header.extend((0..data.d()).map(|k| format!("f{k}")));
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut rec = vec![data.ids()[i].clone()];
        if let Some(l) = data.class_labels() {
            rec.push(l[i].to_string());
        }
        rec.extend(data.point(i).iter().map(|v| format!("{}", v.widen())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    n: usize,
    d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ids: Option<Vec<String>>,
}

/// Little-endian row-major `f32` payload described by a JSON sidecar.
pub fn read_raw_f32<T: Scalar>(payload: &[u8], sidecar: &str) -> Result<Dataset<T>> {
    let meta: Sidecar = serde_json::from_str(sidecar)?;
    if payload.len() % 4 != 0 {
        return Err(Error::Format(format!(
            "raw_f32 payload of {} bytes is not a whole number of floats",
            payload.len()
        )));
    }
    if payload.len() / 4 != meta.n * meta.d {
        return Err(Error::DimensionMismatch {
            what: "raw_f32 payload floats",
            expected: meta.n * meta.d,
            found: payload.len() / 4,
        });
    }
    let data: Vec<T> = payload
        .chunks_exact(4)
        .map(|b| T::of(f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64))
        .collect();
    Dataset::new(FeatureMatrix::new(meta.n, meta.d, data)?, meta.labels, meta.ids)
}

/// Writes the payload and sidecar for [`read_raw_f32`]; values are narrowed to `f32`.
pub fn write_raw_f32<T: Scalar>(data: &Dataset<T>, path: &Path) -> Result<()> {
    let mut payload = Vec::with_capacity(data.n() * data.d() * 4);
    for v in data.features().as_slice() {
        payload.extend_from_slice(&(v.widen() as f32).to_le_bytes());
    }
    fs::write(path, payload)?;
    let meta = Sidecar {
        n: data.n(),
        d: data.d(),
        labels: data.class_labels().map(<[i64]>::to_vec),
        ids: Some(data.ids().to_vec()),
    };
    fs::write(sidecar_path(path), serde_json::to_string(&meta)?)?;
    Ok(())
}
