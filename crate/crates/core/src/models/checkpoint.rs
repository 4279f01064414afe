//! Binary checkpoint format.
//!
//! ```text
//! magic      8 bytes   "GANAUG01"
//! header     u32 LE length + UTF-8 `key=value` lines (spec, tensor count, meta)
//! tensors    repeated: u32 name length, name, u32 rank, rank × u32 dims,
//!            little-endian f32 payload
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use super::arch::{build_network, Model};
use super::spec::{DiscriminatorSpec, GeneratorSpec, ModelSpec};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: &str = "GANAUG01";
const MAGIC_FAMILY: &[u8] = b"GANAUG";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingMeta {
    pub epoch: usize,
    pub seed: u64,
    /// Loss history summary, e.g. final-epoch means.
    pub summary: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub meta: TrainingMeta,
}

fn header_text(ck: &Checkpoint) -> String {
    let mut kv: Vec<(String, String)> = vec![
        ("format_version".into(), FORMAT_VERSION.into()),
        ("kind".into(), ck.model.spec.kind().into()),
    ];
    match ck.model.spec {
        ModelSpec::Generator(g) => {
            kv.push(("image_size".into(), g.image_size.to_string()));
            kv.push(("latent_dim".into(), g.latent_dim.to_string()));
            kv.push(("base_channels".into(), g.base_channels.to_string()));
            kv.push(("kernel_size".into(), g.kernel_size.to_string()));
            kv.push(("n_stages".into(), g.n_stages().to_string()));
        }
        ModelSpec::Discriminator(d) | ModelSpec::Classifier(d) => {
            kv.push(("image_size".into(), d.image_size.to_string()));
            kv.push(("base_channels".into(), d.base_channels.to_string()));
            kv.push(("kernel_size".into(), d.kernel_size.to_string()));
            kv.push(("n_stages".into(), d.n_stages().to_string()));
        }
    }
    kv.push(("tensors".into(), ck.model.net.tensors().count().to_string()));
    kv.push(("meta.epoch".into(), ck.meta.epoch.to_string()));
    kv.push(("meta.seed".into(), ck.meta.seed.to_string()));
    for (k, v) in &ck.meta.summary {
        kv.push((format!("meta.summary.{k}"), v.to_string()));
    }
    kv.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = header_text(self);
        let mut out = Vec::new();
        out.extend_from_slice(FORMAT_VERSION.as_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(header.as_bytes());
        for t in self.model.net.tensors() {
            out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
            for &d in &t.shape {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(8)?;
        if magic != FORMAT_VERSION.as_bytes() {
            return Err(if magic.starts_with(MAGIC_FAMILY) {
                Error::CheckpointVersion {
                    expected: FORMAT_VERSION.into(),
                    found: String::from_utf8_lossy(magic).into_owned(),
                }
            } else {
                Error::CorruptedCheckpoint("bad magic bytes".into())
            });
        }
        let header_len = r.u32()? as usize;
        let header = std::str::from_utf8(r.take(header_len)?)
            .map_err(|_| Error::CorruptedCheckpoint("header is not UTF-8".into()))?;
        let fields = parse_header(header)?;
        let version = field(&fields, "format_version")?;
        if version != FORMAT_VERSION {
            return Err(Error::CheckpointVersion {
                expected: FORMAT_VERSION.into(),
                found: version.into(),
            });
        }
        let spec = spec_from_header(&fields)?;
        let meta = meta_from_header(&fields)?;
        let mut net = build_network::<f32>(&spec)
            .map_err(|e| Error::CorruptedCheckpoint(format!("header spec rejected: {e}")))?;
        let declared: usize = parse_num(field(&fields, "tensors")?, "tensors")?;

        let mut seen: BTreeMap<String, ()> = BTreeMap::new();
        for _ in 0..declared {
            let name_len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(name_len)?)
                .map_err(|_| Error::CorruptedCheckpoint("tensor name is not UTF-8".into()))?
                .to_owned();
            let rank = r.u32()? as usize;
            if rank > 8 {
                return Err(Error::CorruptedCheckpoint(format!("tensor `{name}` has rank {rank}")));
            }
            let dims: Vec<usize> = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<_>>()?;
            if seen.insert(name.clone(), ()).is_some() {
                return Err(Error::CorruptedCheckpoint(format!("duplicate tensor `{name}`")));
            }
            let slot = net
                .tensors_mut()
                .find(|p| p.name == name)
                .ok_or_else(|| Error::CorruptedCheckpoint(format!("unexpected tensor `{name}`")))?;
            if slot.shape != dims {
                return Err(Error::CorruptedCheckpoint(format!(
                    "tensor `{name}` has shape {dims:?}, expected {:?}",
                    slot.shape
                )));
            }
            let payload = r.take(slot.data.len() * 4)?;
            for (v, chunk) in slot.data.iter_mut().zip(payload.chunks_exact(4)) {
                *v = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::CorruptedCheckpoint("trailing bytes after last tensor".into()));
        }
        if let Some(missing) = net.tensors().find(|p| !seen.contains_key(&p.name)) {
            return Err(Error::MissingTensor(missing.name.clone()));
        }
        Ok(Checkpoint { model: Model { spec, net }, meta })
    }
}

pub fn save_checkpoint(ck: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, ck.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    Checkpoint::from_bytes(&std::fs::read(path)?)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::CorruptedCheckpoint(format!("truncated at byte {} (wanted {n} more)", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

fn parse_header(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for line in text.lines().filter(|l| !l.is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::CorruptedCheckpoint(format!("header line `{line}`")))?;
        out.insert(k.to_owned(), v.to_owned());
    }
    Ok(out)
}

fn field<'a>(fields: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    fields
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::CorruptedCheckpoint(format!("header lacks `{key}`")))
}

fn parse_num<N: std::str::FromStr>(v: &str, key: &str) -> Result<N> {
    v.parse().map_err(|_| Error::CorruptedCheckpoint(format!("bad value `{v}` for `{key}`")))
}

fn num(fields: &BTreeMap<String, String>, key: &str) -> Result<usize> {
    parse_num(field(fields, key)?, key)
}

fn spec_from_header(fields: &BTreeMap<String, String>) -> Result<ModelSpec> {
    let image_size = num(fields, "image_size")?;
    let base_channels = num(fields, "base_channels")?;
    let kernel_size = num(fields, "kernel_size")?;
    let spec = match field(fields, "kind")? {
        "generator" => ModelSpec::Generator(GeneratorSpec {
            latent_dim: num(fields, "latent_dim")?,
            image_size,
            base_channels,
            kernel_size,
        }),
        kind @ ("discriminator" | "classifier") => {
            let d = DiscriminatorSpec { image_size, base_channels, kernel_size };
            if kind == "classifier" {
                ModelSpec::Classifier(d)
            } else {
                ModelSpec::Discriminator(d)
            }
        }
        other => return Err(Error::CorruptedCheckpoint(format!("unknown model kind `{other}`"))),
    };
    Ok(spec)
}

fn meta_from_header(fields: &BTreeMap<String, String>) -> Result<TrainingMeta> {
    let summary = fields
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("meta.summary.").map(|name| (name, v)))
        .map(|(name, v)| Ok((name.to_owned(), parse_num(v, name)?)))
        .collect::<Result<_>>()?;
    Ok(TrainingMeta {
        epoch: num(fields, "meta.epoch")?,
        seed: parse_num(field(fields, "meta.seed")?, "meta.seed")?,
        summary,
    })
}
