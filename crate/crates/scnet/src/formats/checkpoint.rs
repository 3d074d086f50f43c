use scnet_core::autodiff::{ParamStore, Tensor};
use scnet_core::net::{CollisionModel, NetConfig, TrainConfig};
use serde::{Deserialize, Serialize};

use super::{len32, put_f32, put_u32, put_u64, FormatError, FormatResult, Reader};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SCWT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Where training stopped, for resuming.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingState {
    pub config: TrainConfig,
    pub seed: u64,
    pub step: u64,
    /// Momentum buffers, one per parameter tensor; empty before the first step.
    pub velocity: Vec<Vec<f32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub net: NetConfig,
    pub params: ParamStore<f32>,
    pub training: Option<TrainingState>,
}

impl Checkpoint {
    pub fn model(&self) -> scnet_core::Result<CollisionModel<f32>> {
        CollisionModel::from_params(self.net.clone(), self.params.clone())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Blob {
    net: NetConfig,
    training: Option<BlobTraining>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlobTraining {
    config: TrainConfig,
    seed: u64,
    step: u64,
}

/// Magic, version, JSON config blob, named tensor table (name, shape, f32
/// data), then an optimizer flag followed by one velocity buffer per tensor.
pub fn encode_checkpoint(c: &Checkpoint) -> FormatResult<Vec<u8>> {
    let blob = Blob {
        net: c.net.clone(),
        training: c.training.as_ref().map(|t| BlobTraining { config: t.config.clone(), seed: t.seed, step: t.step }),
    };
    let json = serde_json::to_vec(&blob).map_err(|e| FormatError::Corrupt(e.to_string()))?;
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    put_u32(&mut out, CHECKPOINT_VERSION);
    put_u32(&mut out, len32(json.len(), "config byte")?);
    out.extend_from_slice(&json);
    put_u32(&mut out, len32(c.params.len(), "tensor")?);
    for (name, t) in c.params.iter() {
        put_u32(&mut out, len32(name.len(), "name byte")?);
        out.extend_from_slice(name.as_bytes());
        put_u32(&mut out, len32(t.shape().len(), "dimension")?);
        for &d in t.shape() {
            put_u64(&mut out, d as u64);
        }
        t.data().iter().for_each(|&v| put_f32(&mut out, v));
    }
    match &c.training {
        Some(t) if !t.velocity.is_empty() => {
            if t.velocity.len() != c.params.len() {
                return Err(FormatError::Corrupt("velocity buffers do not match the parameters".into()));
            }
            out.push(1);
            for (i, v) in t.velocity.iter().enumerate() {
                if v.len() != c.params.tensor(i).len() {
                    return Err(FormatError::Corrupt(format!("velocity buffer {i} has the wrong length")));
                }
                v.iter().for_each(|&x| put_f32(&mut out, x));
            }
        }
        _ => out.push(0),
    }
    Ok(out)
}

pub fn decode_checkpoint(bytes: &[u8]) -> FormatResult<Checkpoint> {
    let mut r = Reader::new(bytes);
    r.magic(CHECKPOINT_MAGIC)?;
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(FormatError::Version { found: version, expected: CHECKPOINT_VERSION });
    }
    let n = r.count32(1)?;
    let blob: Blob = serde_json::from_slice(r.take(n)?).map_err(|e| FormatError::Corrupt(format!("config blob: {e}")))?;
    let tensors = r.count32(8)?;
    let mut params = ParamStore::new();
    for _ in 0..tensors {
        let n = r.count32(1)?;
        let name = std::str::from_utf8(r.take(n)?).map_err(|_| FormatError::Corrupt("tensor name is not UTF-8".into()))?;
        let ndim = r.count32(8)?;
        let shape = (0..ndim)
            .map(|_| r.u64().map(|d| d as usize))
            .collect::<FormatResult<Vec<_>>>()?;
        let len = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .filter(|&l| l.checked_mul(4).is_some_and(|b| b <= r.remaining()))
            .ok_or_else(|| FormatError::Corrupt(format!("tensor {name} shape {shape:?} exceeds the file")))?;
        let t = Tensor::new(shape, r.f32s(len)?).map_err(|e| FormatError::Corrupt(e.to_string()))?;
        params.insert(name, t).map_err(|e| FormatError::Corrupt(e.to_string()))?;
    }
    let velocity = match r.u8()? {
        0 => Vec::new(),
        1 => (0..params.len()).map(|i| r.f32s(params.tensor(i).len())).collect::<FormatResult<_>>()?,
        f => return Err(FormatError::Corrupt(format!("optimizer flag {f}"))),
    };
    r.finish()?;
    if blob.training.is_none() && !velocity.is_empty() {
        return Err(FormatError::Corrupt("optimizer state without training state".into()));
    }
    Ok(Checkpoint {
        net: blob.net,
        params,
        training: blob.training.map(|t| TrainingState { config: t.config, seed: t.seed, step: t.step, velocity }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkpoint(with_velocity: bool) -> Checkpoint {
        let model = CollisionModel::<f32>::new(NetConfig::micro(), 5).unwrap();
        let velocity = if with_velocity {
            model.params().iter().map(|(_, t)| t.data().iter().map(|v| v * 0.5 + 1e-3).collect()).collect()
        } else {
            Vec::new()
        };
        Checkpoint {
            net: model.config().clone(),
            params: model.params().clone(),
            training: Some(TrainingState { config: TrainConfig::default(), seed: 9, step: 17, velocity }),
        }
    }

    #[test]
    fn round_trips_bitwise() {
        for v in [false, true] {
            let c = checkpoint(v);
            let bytes = encode_checkpoint(&c).unwrap();
            let back = decode_checkpoint(&bytes).unwrap();
            assert_eq!(back, c);
            assert_eq!(encode_checkpoint(&back).unwrap(), bytes);
            assert!(back.model().is_ok());
        }
        let bare = Checkpoint { training: None, ..checkpoint(false) };
        assert_eq!(decode_checkpoint(&encode_checkpoint(&bare).unwrap()).unwrap(), bare);
    }

    #[test]
    fn damaged_files_are_errors() {
        let bytes = encode_checkpoint(&checkpoint(true)).unwrap();
        for cut in [0, 3, 7, 12, bytes.len() / 2, bytes.len() - 1] {
            assert!(decode_checkpoint(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_checkpoint(&extra).is_err());
        let mut m = bytes;
        m[1] = b'?';
        assert!(matches!(decode_checkpoint(&m), Err(FormatError::BadMagic { .. })));
    }
}
