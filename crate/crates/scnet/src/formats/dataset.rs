use std::path::{Path, PathBuf};

use scnet_core::dataset::{QueryBatch, RecordMeta};
use scnet_core::{Mat3, RigidTransform, Vec3};
use serde::{Deserialize, Serialize};

use super::cloud::{read_points, write_points};
use super::{len32, put_f32, put_u32, put_u64, sha256_hex, FormatError, FormatResult, Reader};

pub const DATASET_MAGIC: &[u8; 4] = b"SCNQ";
pub const DATASET_VERSION: u32 = 1;

/// Sidecar describing a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub count: u64,
    /// Absolute byte offset of every record.
    pub offsets: Vec<u64>,
    pub queries: u64,
    pub positives: u64,
    pub positive_rate: f64,
    pub sha256: String,
    /// Generator settings snapshot.
    pub config: serde_json::Value,
}

/// Header, offset table, then one payload per record: scene cloud, object
/// cloud, transforms, labels and optional JSON generation metadata.
pub fn encode_dataset(records: &[QueryBatch]) -> FormatResult<Vec<u8>> {
    let payloads = records.iter().map(encode_record).collect::<FormatResult<Vec<_>>>()?;
    let header = 16 + 8 * records.len();
    let mut out = Vec::with_capacity(header + payloads.iter().map(Vec::len).sum::<usize>());
    out.extend_from_slice(DATASET_MAGIC);
    put_u32(&mut out, DATASET_VERSION);
    put_u64(&mut out, records.len() as u64);
    let mut at = header as u64;
    for p in &payloads {
        put_u64(&mut out, at);
        at += p.len() as u64;
    }
    for p in payloads {
        out.extend_from_slice(&p);
    }
    Ok(out)
}

fn encode_record(b: &QueryBatch) -> FormatResult<Vec<u8>> {
    if b.transforms.len() != b.labels.len() {
        return Err(FormatError::Corrupt(format!("{} transforms for {} labels", b.transforms.len(), b.labels.len())));
    }
    let mut out = Vec::new();
    for cloud in [&b.scene_cloud, &b.object_cloud] {
        put_u32(&mut out, len32(cloud.len(), "point")?);
        write_points(&mut out, cloud.points());
    }
    put_u32(&mut out, len32(b.len(), "query")?);
    for t in &b.transforms {
        for row in t.rotation.rows {
            for v in row {
                put_f32(&mut out, v as f32);
            }
        }
        for v in [t.translation.x, t.translation.y, t.translation.z] {
            put_f32(&mut out, v as f32);
        }
    }
    out.extend_from_slice(&b.labels);
    match &b.meta {
        Some(m) => {
            let json = serde_json::to_vec(m).map_err(|e| FormatError::Corrupt(e.to_string()))?;
            put_u32(&mut out, len32(json.len(), "metadata byte")?);
            out.extend_from_slice(&json);
        }
        None => put_u32(&mut out, 0),
    }
    Ok(out)
}

/// Validated record offsets of an encoded dataset.
pub fn record_offsets(bytes: &[u8]) -> FormatResult<Vec<u64>> {
    let mut r = Reader::new(bytes);
    r.magic(DATASET_MAGIC)?;
    let version = r.u32()?;
    if version != DATASET_VERSION {
        return Err(FormatError::Version { found: version, expected: DATASET_VERSION });
    }
    let n = r.count(8)?;
    let offsets = (0..n).map(|_| r.u64()).collect::<FormatResult<Vec<_>>>()?;
    let header = r.pos() as u64;
    let mut prev = None;
    for (i, &o) in offsets.iter().enumerate() {
        let ok = match prev {
            None => o == header,
            Some(p) => o > p,
        };
        if !ok || o > bytes.len() as u64 {
            return Err(FormatError::Corrupt(format!("offset table entry {i} ({o}) is out of order or out of range")));
        }
        prev = Some(o);
    }
    if offsets.is_empty() && header != bytes.len() as u64 {
        return Err(FormatError::Corrupt("trailing bytes after an empty offset table".into()));
    }
    Ok(offsets)
}

pub fn decode_dataset(bytes: &[u8]) -> FormatResult<Vec<QueryBatch>> {
    let offsets = record_offsets(bytes)?;
    let mut out = Vec::with_capacity(offsets.len());
    for (i, &o) in offsets.iter().enumerate() {
        let end = offsets.get(i + 1).copied().unwrap_or(bytes.len() as u64) as usize;
        let mut r = Reader::at(&bytes[..end], o as usize);
        let rec = decode_record(&mut r).map_err(|e| FormatError::Corrupt(format!("record {i}: {e}")))?;
        r.finish().map_err(|e| FormatError::Corrupt(format!("record {i}: {e}")))?;
        out.push(rec);
    }
    Ok(out)
}

fn decode_record(r: &mut Reader<'_>) -> FormatResult<QueryBatch> {
    let n = r.count32(12)?;
    let scene_cloud = read_points(r, n)?;
    let n = r.count32(12)?;
    let object_cloud = read_points(r, n)?;
    let q = r.count32(49)?;
    let raw = r.f32s(12 * q)?;
    let transforms = raw
        .chunks_exact(12)
        .map(|c| {
            let v: Vec<f64> = c.iter().map(|&x| f64::from(x)).collect();
            RigidTransform::new(
                Mat3::from_rows([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]]),
                Vec3::new(v[9], v[10], v[11]),
            )
        })
        .collect();
    let labels = r.take(q)?.to_vec();
    if let Some(l) = labels.iter().find(|&&l| l > 1) {
        return Err(FormatError::Corrupt(format!("label {l} is not 0 or 1")));
    }
    let meta_len = r.count32(1)?;
    let meta = if meta_len == 0 {
        None
    } else {
        let m: RecordMeta = serde_json::from_slice(r.take(meta_len)?).map_err(|e| FormatError::Corrupt(format!("metadata: {e}")))?;
        Some(m)
    };
    Ok(QueryBatch { scene_cloud, object_cloud, transforms, labels, meta })
}

/// `train.scnq` -> `train.scnq.json`.
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the dataset file and its sidecar manifest.
pub fn write_dataset(path: &Path, records: &[QueryBatch], config: serde_json::Value) -> FormatResult<DatasetManifest> {
    let bytes = encode_dataset(records)?;
    let queries: u64 = records.iter().map(|r| r.len() as u64).sum();
    let positives: u64 = records.iter().map(|r| r.positives() as u64).sum();
    let manifest = DatasetManifest {
        format_version: DATASET_VERSION,
        count: records.len() as u64,
        offsets: record_offsets(&bytes)?,
        queries,
        positives,
        positive_rate: if queries == 0 { 0.0 } else { positives as f64 / queries as f64 },
        sha256: sha256_hex(&bytes),
        config,
    };
    std::fs::write(path, &bytes)?;
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| FormatError::Corrupt(e.to_string()))?;
    std::fs::write(manifest_path(path), json)?;
    Ok(manifest)
}

/// Reads a dataset and checks it against its sidecar manifest.
pub fn read_dataset(path: &Path) -> FormatResult<(Vec<QueryBatch>, DatasetManifest)> {
    let bytes = std::fs::read(path)?;
    let side = manifest_path(path);
    let manifest: DatasetManifest = serde_json::from_slice(&std::fs::read(&side)?)
        .map_err(|e| FormatError::Corrupt(format!("{}: {e}", side.display())))?;
    let records = decode_dataset(&bytes)?;
    if manifest.format_version != DATASET_VERSION {
        return Err(FormatError::Version { found: manifest.format_version, expected: DATASET_VERSION });
    }
    if manifest.count != records.len() as u64 || manifest.offsets != record_offsets(&bytes)? {
        return Err(FormatError::Corrupt("manifest count or offsets disagree with the dataset file".into()));
    }
    if manifest.sha256 != sha256_hex(&bytes) {
        return Err(FormatError::Corrupt("dataset hash does not match its manifest".into()));
    }
    Ok((records, manifest))
}
