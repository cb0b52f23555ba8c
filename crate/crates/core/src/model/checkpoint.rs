//! Named-tensor checkpoint archive.
//!
//! Layout (little-endian): magic `UFETCKPT`, `u32` version, `u32`-length
//! config text, `u32`-length vocabulary hash, `u32` tensor count, then per
//! tensor a `u32`-length name, a `u8` element width (32 or 64), a `u32` rank,
//! `u64` dims and the row-major payload.

use std::io::{Read, Write};
use std::path::Path;

use super::network::Model;
use super::{ModelConfig, ModelParams, Tensor};
use crate::error::{Error, Result};
use crate::typespace::TypeVocabulary;

pub const MAGIC: &[u8; 8] = b"UFETCKPT";
pub const VERSION: u32 = 1;

/// Decoded archive contents before they are bound to a vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub vocab_hash: String,
    pub tensors: Vec<(String, Tensor)>,
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

pub fn encode(model: &Model, vocab: &TypeVocabulary) -> Result<Vec<u8>> {
    model.check_vocab(vocab)?;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_str(&mut out, &model.config.to_text());
    put_str(&mut out, &vocab.hash());
    let named = model.params.named();
    put_u32(&mut out, named.len() as u32);
    for (name, t) in named {
        put_str(&mut out, &name);
        out.push(64);
        put_u32(&mut out, t.shape().len() as u32);
        for &d in t.shape() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn save_checkpoint(model: &Model, vocab: &TypeVocabulary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(model, vocab)?;
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    file.sync_all().map_err(|e| Error::io(path, e))
}

struct Reader<'b> {
    bytes: &'b [u8],
    pos: usize,
}

impl<'b> Reader<'b> {
    fn take(&mut self, n: usize) -> Result<&'b [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Checkpoint(format!(
                "truncated at byte {} (needed {n} more, {} left)",
                self.pos,
                self.bytes.len() - self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Checkpoint("string is not UTF-8".into()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len()).ok() != Some(MAGIC.as_slice()) {
        return Err(Error::Checkpoint("not a checkpoint file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported format version {version}")));
    }
    let config =
        ModelConfig::from_text(&r.string()?).map_err(|e| Error::Checkpoint(format!("embedded config: {e}")))?;
    let vocab_hash = r.string()?;
    let count = r.u32()? as usize;
    let mut tensors = Vec::new();
    for _ in 0..count {
        let name = r.string()?;
        let width = r.u8()?;
        if width != 32 && width != 64 {
            return Err(Error::Checkpoint(format!("tensor `{name}` has element width {width}")));
        }
        let rank = r.u32()? as usize;
        if rank == 0 || rank > 2 {
            return Err(Error::Checkpoint(format!("tensor `{name}` has rank {rank}")));
        }
        let mut shape = Vec::with_capacity(rank);
        let mut len: usize = 1;
        for _ in 0..rank {
            let d =
                usize::try_from(r.u64()?).map_err(|_| Error::Checkpoint(format!("tensor `{name}` is too large")))?;
            len = len
                .checked_mul(d)
                .ok_or_else(|| Error::Checkpoint(format!("tensor `{name}` is too large")))?;
            shape.push(d);
        }
        let bytes_per = width as usize / 8;
        let payload = r.take(len.saturating_mul(bytes_per))?;
        let data = if width == 64 {
            payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect()
        } else {
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
                .collect()
        };
        tensors.push((name, Tensor::from_vec(&shape, data)));
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(Checkpoint {
        config,
        vocab_hash,
        tensors,
    })
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        Error::Checkpoint(msg) => Error::Checkpoint(format!("{}: {msg}", path.display())),
        other => other,
    })
}

impl Checkpoint {
    /// Binds the archive to `vocab`; the vocabulary hash and every tensor name
    /// and shape must match.
    pub fn into_model(self, vocab: &TypeVocabulary) -> Result<Model> {
        let expected = vocab.hash();
        if self.vocab_hash != expected {
            return Err(Error::Checkpoint(format!(
                "vocabulary hash mismatch: checkpoint has {}, vocabulary file has {expected}",
                self.vocab_hash
            )));
        }
        let mut params = ModelParams::zeros(&self.config, vocab.len());
        let names = params.names();
        if names.len() != self.tensors.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                names.len(),
                self.tensors.len()
            )));
        }
        for ((name, slot), (got_name, t)) in names.iter().zip(params.tensors_mut()).zip(self.tensors) {
            if *name != got_name {
                return Err(Error::Checkpoint(format!(
                    "expected tensor `{name}`, found `{got_name}`"
                )));
            }
            if slot.shape() != t.shape() {
                return Err(Error::Checkpoint(format!(
                    "tensor `{name}` has shape {:?}, expected {:?}",
                    t.shape(),
                    slot.shape()
                )));
            }
            *slot = t;
        }
        Ok(Model {
            config: self.config,
            params,
        })
    }
}

pub fn load_checkpoint(path: impl AsRef<Path>, vocab: &TypeVocabulary) -> Result<Model> {
    read_checkpoint(path)?.into_model(vocab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typespace::Granularity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vocab(extra: &str) -> TypeVocabulary {
        TypeVocabulary::new(vec![
            ("person".into(), Granularity::General),
            ("athlete".into(), Granularity::Fine),
            (extra.into(), Granularity::Ultra),
        ])
        .unwrap()
    }

    fn model() -> Model {
        let cfg = ModelConfig {
            word_dim: 3,
            lstm_hidden: 2,
            char_filter_widths: vec![2],
            ..ModelConfig::default()
        };
        Model::new(cfg, 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let m = model();
        let v = vocab("composer");
        let back = decode(&encode(&m, &v).unwrap()).unwrap().into_model(&v).unwrap();
        assert_eq!(back.config, m.config);
        for ((_, a), (_, b)) in m.params.named().iter().zip(back.params.named()) {
            assert!(a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn hash_mismatch_rejected() {
        let m = model();
        let bytes = encode(&m, &vocab("composer")).unwrap();
        let err = decode(&bytes).unwrap().into_model(&vocab("detective")).unwrap_err();
        assert!(err.to_string().contains("hash"), "{err}");
    }

    #[test]
    fn truncation_is_an_error() {
        let bytes = encode(&model(), &vocab("composer")).unwrap();
        for cut in [0, 5, 12, 40, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(decode(&bytes[..cut]), Err(Error::Checkpoint(_))), "cut {cut}");
        }
    }
}
