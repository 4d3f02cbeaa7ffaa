//! Binary model files.
//!
//! Layout (all integers and floats little-endian):
//!
//! | field          | type                         |
//! |----------------|------------------------------|
//! | magic          | `b"MTXT"`                    |
//! | version        | u16 (currently 1)            |
//! | kind           | u8: 1 = MNB, 2 = SVM, 3 = LR |
//! | n_classes      | u64                          |
//! | n_features     | u64                          |
//! | parameters     | kind-specific, see below     |
//! | crc32          | u32, IEEE CRC of all bytes before it |
//!
//! MNB parameters: `alpha` f64, `log_prior` (n_classes × f64),
//! `log_likelihood` (n_classes·n_features × f64, row-major).
//!
//! SVM/LR parameters: `C` f64, `bias` (n_classes × f64), `weights`
//! (n_classes·n_features × f64, row-major), `n_meta` u64, then `n_meta`
//! pairs of (`iterations` u64, `objective` f64).

use std::path::Path;

use super::linear::{LinearKind, LinearModel, TrainingMeta};
use super::mnb::MnbModel;
use super::Model;
use crate::error::{Error, ModelFileError, Result};

pub const MAGIC: [u8; 4] = *b"MTXT";
pub const VERSION: u16 = 1;

const HEADER_LEN: usize = 4 + 2 + 1 + 8 + 8;
const KIND_MNB: u8 = 1;
const KIND_SVM: u8 = 2;
const KIND_LR: u8 = 3;

pub fn encode_model(model: &Model) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let put_f64s = |out: &mut Vec<u8>, xs: &[f64]| xs.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
    match model {
        Model::Mnb(m) => {
            out.push(KIND_MNB);
            out.extend_from_slice(&(m.n_classes as u64).to_le_bytes());
            out.extend_from_slice(&(m.n_features as u64).to_le_bytes());
            out.extend_from_slice(&m.alpha.to_le_bytes());
            put_f64s(&mut out, &m.log_prior);
            put_f64s(&mut out, &m.log_likelihood);
        }
        Model::Linear(m) => {
            out.push(match m.kind {
                LinearKind::Svm => KIND_SVM,
                LinearKind::Lr => KIND_LR,
            });
            out.extend_from_slice(&(m.n_classes as u64).to_le_bytes());
            out.extend_from_slice(&(m.n_features as u64).to_le_bytes());
            out.extend_from_slice(&m.c_reg.to_le_bytes());
            put_f64s(&mut out, &m.bias);
            put_f64s(&mut out, &m.weights);
            out.extend_from_slice(&(m.meta.iterations.len() as u64).to_le_bytes());
            for (it, obj) in m.meta.iterations.iter().zip(&m.meta.objectives) {
                out.extend_from_slice(&it.to_le_bytes());
                out.extend_from_slice(&obj.to_le_bytes());
            }
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Fails with `Truncated` unless `n` more bytes (plus the checksum) remain.
    fn need(&self, n: usize) -> Result<(), ModelFileError> {
        let expected = self.pos.saturating_add(n).saturating_add(4);
        if expected > self.bytes.len() {
            return Err(ModelFileError::Truncated {
                expected,
                found: self.bytes.len(),
            });
        }
        Ok(())
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFileError> {
        self.need(n)?;
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, ModelFileError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, ModelFileError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, ModelFileError> {
        self.need(n.saturating_mul(8))?;
        (0..n).map(|_| self.f64()).collect()
    }
}

fn block_len(a: u64, b: u64) -> usize {
    a.checked_mul(b)
        .and_then(|n| usize::try_from(n).ok())
        .unwrap_or(usize::MAX)
}

pub fn decode_model(bytes: &[u8]) -> Result<Model, ModelFileError> {
    if bytes.len() >= 6 {
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if magic != MAGIC || version != VERSION {
            return Err(ModelFileError::Version { magic, version });
        }
    } else if bytes.len() >= 4 && bytes[..4] != MAGIC {
        return Err(ModelFileError::Version {
            magic: bytes[..4].try_into().unwrap(),
            version: 0,
        });
    }
    let mut r = Reader { bytes, pos: 0 };
    r.need(HEADER_LEN)?;
    r.pos = 6;
    let kind = r.take(1)?[0];
    let n_classes = r.u64()?;
    let n_features = r.u64()?;
    let k = usize::try_from(n_classes).unwrap_or(usize::MAX);
    let v = usize::try_from(n_features).unwrap_or(usize::MAX);
    let model = match kind {
        KIND_MNB => {
            let alpha = r.f64()?;
            let log_prior = r.f64s(k)?;
            let log_likelihood = r.f64s(block_len(n_classes, n_features))?;
            Model::Mnb(MnbModel {
                n_classes: k,
                n_features: v,
                alpha,
                log_prior,
                log_likelihood,
            })
        }
        KIND_SVM | KIND_LR => {
            let c_reg = r.f64()?;
            let bias = r.f64s(k)?;
            let weights = r.f64s(block_len(n_classes, n_features))?;
            let n_meta = r.u64()?;
            r.need(block_len(n_meta, 16))?;
            let mut meta = TrainingMeta::default();
            for _ in 0..n_meta {
                meta.iterations.push(r.u64()?);
                meta.objectives.push(r.f64()?);
            }
            Model::Linear(LinearModel {
                kind: if kind == KIND_SVM { LinearKind::Svm } else { LinearKind::Lr },
                n_classes: k,
                n_features: v,
                weights,
                bias,
                c_reg,
                meta,
            })
        }
        other => return Err(ModelFileError::UnknownKind(other)),
    };
    let body_end = r.pos;
    let stored = u32::from_le_bytes(bytes[body_end..body_end + 4].try_into().unwrap());
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(ModelFileError::Checksum { stored, computed });
    }
    if bytes.len() > body_end + 4 {
        return Err(ModelFileError::TrailingBytes(bytes.len() - body_end - 4));
    }
    Ok(model)
}

pub fn save_model(path: &Path, model: &Model) -> Result<()> {
    std::fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode_model(&bytes)?)
}
