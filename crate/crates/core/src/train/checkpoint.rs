use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{EmbeddingSpace, Table, TableId};

use super::TrainConfig;

pub const MAGIC: &[u8; 8] = b"GEOKGE01";

/// Trained parameters plus what is needed to reproduce and validate them.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub space: EmbeddingSpace,
    /// Epochs completed.
    pub epoch: u32,
    /// Hash of the entity and relation vocabularies the run was trained on.
    pub vocab_hash: u64,
    /// Digest of the final sampler RNG states.
    pub rng_digest: String,
}

fn push_u32(buf: &mut Vec<u8>, v: usize, what: &str) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Checkpoint(format!("{what} exceeds u32")))?;
    buf.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| {
            Error::Checkpoint(format!("truncated file (needed {n} bytes at offset {})", self.pos))
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let len = n
            .checked_mul(8)
            .ok_or_else(|| Error::Checkpoint("table size overflows".into()))?;
        let b = self.take(len)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

impl Checkpoint {
    /// Layout: magic, little-endian u32 `k, |E|, |R|, |G_topo|, |G_dir|,
    /// |G_dis|, epoch`, every table row-major as little-endian f64, the two λ,
    /// then a u32 length and a UTF-8 block of `key = value` metadata.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let es = &self.space;
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        push_u32(&mut buf, es.k(), "k")?;
        push_u32(&mut buf, es.n_entities(), "entity count")?;
        push_u32(&mut buf, es.n_relations(), "relation count")?;
        for size in es.feature_sizes() {
            push_u32(&mut buf, size, "feature vocabulary size")?;
        }
        push_u32(&mut buf, self.epoch as usize, "epoch")?;
        for table in es.tables() {
            for v in table.data() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        for v in es.lambdas() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut meta = self.config.to_text();
        let _ = writeln!(meta, "vocab_hash = {:016x}", self.vocab_hash);
        let _ = writeln!(meta, "rng_digest = {}", self.rng_digest);
        push_u32(&mut buf, meta.len(), "metadata length")?;
        buf.extend_from_slice(meta.as_bytes());
        Ok(buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(8)?;
        if magic != MAGIC {
            return Err(Error::Checkpoint(format!(
                "bad magic/version {:?}, expected {:?}",
                String::from_utf8_lossy(magic),
                String::from_utf8_lossy(MAGIC)
            )));
        }
        let k = r.u32()?;
        if k == 0 {
            return Err(Error::Checkpoint("k = 0".into()));
        }
        let n_ent = r.u32()?;
        let n_rel = r.u32()?;
        let sizes = [r.u32()?, r.u32()?, r.u32()?];
        let epoch = r.u32()? as u32;
        let rows = [
            n_ent, n_ent, n_rel, n_rel, sizes[0], sizes[1], sizes[2], sizes[0], sizes[1], sizes[2],
        ];
        let mut tables = Vec::with_capacity(TableId::COUNT);
        for &n in &rows {
            let data = r.f64s(n * k)?;
            tables.push(Table::from_data(n, k, data));
        }
        let lambdas = [r.f64s(1)?[0], r.f64s(1)?[0]];
        let meta_len = r.u32()?;
        let meta = std::str::from_utf8(r.take(meta_len)?)
            .map_err(|_| Error::Checkpoint("metadata is not UTF-8".into()))?;
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }

        let mut config = TrainConfig::default();
        let mut vocab_hash = None;
        let mut rng_digest = String::new();
        for line in meta.lines() {
            let Some((key, value)) = line.split_once('=') else {
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "vocab_hash" => {
                    vocab_hash = Some(u64::from_str_radix(value, 16).map_err(|_| {
                        Error::Checkpoint(format!("bad vocab_hash `{value}`"))
                    })?)
                }
                "rng_digest" => rng_digest = value.to_owned(),
                _ => config
                    .set(key, value)
                    .map_err(|e| Error::Checkpoint(format!("metadata: {e}")))?,
            }
        }
        if config.k != k {
            return Err(Error::Checkpoint(format!(
                "header k = {k} but recorded config has k = {}",
                config.k
            )));
        }
        let tables: [Table; TableId::COUNT] = tables.try_into().expect("ten tables");
        let space = EmbeddingSpace::from_parts(k, tables, lambdas);
        if !space.is_finite() {
            return Err(Error::Checkpoint("non-finite parameter".into()));
        }
        Ok(Checkpoint {
            config,
            space,
            epoch,
            vocab_hash: vocab_hash.ok_or_else(|| Error::Checkpoint("missing vocab_hash".into()))?,
            rng_digest,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Checkpoint(msg) => Error::Checkpoint(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Fails unless the stored tables have dimension `k` and the given
    /// vocabulary sizes.
    pub fn check_dimensions(&self, k: usize, n_entities: usize, n_relations: usize) -> Result<()> {
        let es = &self.space;
        if es.k() != k || es.n_entities() != n_entities || es.n_relations() != n_relations {
            return Err(Error::Checkpoint(format!(
                "dimension mismatch: checkpoint has k = {}, {} entities, {} relations; \
                 expected k = {k}, {n_entities} entities, {n_relations} relations",
                es.k(),
                es.n_entities(),
                es.n_relations()
            )));
        }
        Ok(())
    }

    /// Fails unless the checkpoint was trained on vocabularies with `hash`.
    pub fn check_vocab_hash(&self, hash: u64) -> Result<()> {
        if self.vocab_hash != hash {
            return Err(Error::VocabMismatch(format!(
                "checkpoint vocab hash {:016x} differs from {hash:016x}",
                self.vocab_hash
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let mut config = TrainConfig::default();
        config.k = 4;
        config.enabled_kinds = "topo,dis".parse().unwrap();
        Checkpoint {
            space: EmbeddingSpace::init(5, 2, [3, 9, 0], 4, 1),
            config,
            epoch: 7,
            vocab_hash: 0xdead_beef_0123_4567,
            rng_digest: "abc123".into(),
        }
    }

    #[test]
    fn byte_exact_round_trip() {
        let ck = sample();
        let bytes = ck.to_bytes().unwrap();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn corrupted_header_is_rejected() {
        let mut bytes = sample().to_bytes().unwrap();
        bytes[7] = b'9';
        let err = Checkpoint::from_bytes(&bytes).unwrap_err().to_string();
        assert!(err.contains("magic/version"), "{err}");
    }

    #[test]
    fn truncation_is_rejected() {
        let bytes = sample().to_bytes().unwrap();
        for cut in [3, 20, 100, bytes.len() - 1] {
            let err = Checkpoint::from_bytes(&bytes[..cut]).unwrap_err().to_string();
            assert!(err.contains("truncated"), "{cut}: {err}");
        }
    }

    #[test]
    fn dimension_and_hash_checks() {
        let ck = sample();
        ck.check_dimensions(4, 5, 2).unwrap();
        assert!(ck.check_dimensions(8, 5, 2).is_err());
        assert!(ck.check_dimensions(4, 6, 2).is_err());
        ck.check_vocab_hash(0xdead_beef_0123_4567).unwrap();
        assert!(matches!(ck.check_vocab_hash(1), Err(Error::VocabMismatch(_))));
    }
}
