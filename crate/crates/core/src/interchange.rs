//! CEMB embedding collections and their JSON manifest.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic   "CEMB"            4 bytes
//! version u16 = 1           2 bytes
//! kind    u8 (0 token, 1 sentence)
//! dim     u32
//! count   u64
//! count × { key_len u16, key UTF-8 bytes, dim × f32 }
//! ```
//!
//! Metadata (model, layer, pooling, corpus) is kept in a sibling manifest so
//! payloads stay append-streamable.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conceptor::DataMatrix;
use crate::error::{Error, Result};

pub const CEMB_MAGIC: &[u8; 4] = b"CEMB";
pub const CEMB_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 1 + 4 + 8;
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollectionKind {
    Token,
    Sentence,
}

impl CollectionKind {
    fn code(self) -> u8 {
        match self {
            CollectionKind::Token => 0,
            CollectionKind::Sentence => 1,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(CollectionKind::Token),
            1 => Some(CollectionKind::Sentence),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CollectionMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pooling: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_id: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub key: String,
    pub vector: Vec<f32>,
}

/// Embedding records of one dimension. Token keys repeat, one record per
/// contextual occurrence; sentence keys are opaque ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingCollection {
    dim: usize,
    kind: CollectionKind,
    records: Vec<Record>,
    pub metadata: CollectionMetadata,
}

impl EmbeddingCollection {
    pub fn new(dim: usize, kind: CollectionKind) -> Self {
        EmbeddingCollection {
            dim,
            kind,
            records: Vec::new(),
            metadata: CollectionMetadata::default(),
        }
    }

    /// Adds a record. Token keys are lowercased.
    pub fn push(&mut self, key: impl Into<String>, vector: Vec<f32>) -> Result<()> {
        let mut key = key.into();
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::data(format!("record `{key}` has non-finite values")));
        }
        if key.len() > u16::MAX as usize {
            return Err(Error::KeyTooLong(key.len()));
        }
        if self.kind == CollectionKind::Token {
            key = key.to_lowercase();
        }
        self.records.push(Record { key, vector });
        Ok(())
    }

    pub fn push_f64(&mut self, key: impl Into<String>, vector: &[f64]) -> Result<()> {
        self.push(key, vector.iter().map(|&v| v as f32).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> CollectionKind {
        self.kind
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct keys in order of first appearance.
    pub fn keys(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.records
            .iter()
            .filter(|r| seen.insert(r.key.as_str()))
            .map(|r| r.key.as_str())
            .collect()
    }

    pub fn vector_f64(&self, idx: usize) -> Vec<f64> {
        self.records[idx].vector.iter().map(|&v| v as f64).collect()
    }

    /// Looks up the first record with `key`.
    pub fn get(&self, key: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.key == key)
    }

    /// Keeps only records whose key satisfies `keep`.
    pub fn retain(&self, mut keep: impl FnMut(&str) -> bool) -> EmbeddingCollection {
        EmbeddingCollection {
            dim: self.dim,
            kind: self.kind,
            records: self.records.iter().filter(|r| keep(&r.key)).cloned().collect(),
            metadata: self.metadata.clone(),
        }
    }

    /// Appends every record of `other`.
    pub fn extend_from(&mut self, other: &EmbeddingCollection) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        self.records.extend(other.records.iter().cloned());
        Ok(())
    }

    /// All vectors as columns, widened to f64.
    pub fn to_data_matrix(&self) -> Result<DataMatrix> {
        let cols: Vec<Vec<f64>> = (0..self.len()).map(|i| self.vector_f64(i)).collect();
        DataMatrix::from_columns(&cols)
    }

    /// Replaces every vector with `f(vector)` (computed in f64, stored as f32).
    pub fn map_vectors(&self, mut f: impl FnMut(&[f64]) -> Result<Vec<f64>>) -> Result<EmbeddingCollection> {
        let mut out = EmbeddingCollection::new(self.dim, self.kind);
        out.metadata = self.metadata.clone();
        for i in 0..self.len() {
            let mapped = f(&self.vector_f64(i))?;
            out.push_f64(self.records[i].key.clone(), &mapped)?;
        }
        Ok(out)
    }
}

/// Serializes a collection to CEMB bytes.
pub fn encode_collection(c: &EmbeddingCollection) -> Result<Vec<u8>> {
    let dim = u32::try_from(c.dim).map_err(|_| Error::param("dim exceeds u32"))?;
    let mut buf = Vec::with_capacity(HEADER_LEN + c.len() * (2 + 8 + 4 * c.dim));
    buf.extend_from_slice(CEMB_MAGIC);
    buf.extend_from_slice(&CEMB_VERSION.to_le_bytes());
    buf.push(c.kind.code());
    buf.extend_from_slice(&dim.to_le_bytes());
    buf.extend_from_slice(&(c.len() as u64).to_le_bytes());
    for r in &c.records {
        let key = r.key.as_bytes();
        let len = u16::try_from(key.len()).map_err(|_| Error::KeyTooLong(key.len()))?;
        buf.extend_from_slice(&len.to_le_bytes());
        buf.extend_from_slice(key);
        for v in &r.vector {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(buf)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let out = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(out)
    }
}

/// Parses CEMB bytes.
pub fn decode_collection(bytes: &[u8]) -> Result<EmbeddingCollection> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(
            bytes.len() as u64,
            format!("header needs {HEADER_LEN} bytes, file has {}", bytes.len()),
        ));
    }
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4).unwrap();
    if magic != CEMB_MAGIC {
        return Err(Error::format(0, format!("bad magic {magic:?}, expected \"CEMB\"")));
    }
    let version = u16::from_le_bytes(cur.take(2).unwrap().try_into().unwrap());
    if version != CEMB_VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let kind_code = cur.take(1).unwrap()[0];
    let kind =
        CollectionKind::from_code(kind_code).ok_or_else(|| Error::format(6, format!("unknown kind {kind_code}")))?;
    let dim = u32::from_le_bytes(cur.take(4).unwrap().try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(cur.take(8).unwrap().try_into().unwrap());

    let mut out = EmbeddingCollection::new(dim, kind);
    for record in 0..count {
        let truncated = |pos: usize| Error::Truncated {
            record,
            offset: pos as u64,
        };
        let key_len = cur.take(2).ok_or_else(|| truncated(cur.pos))?;
        let key_len = u16::from_le_bytes(key_len.try_into().unwrap()) as usize;
        let key_start = cur.pos;
        let key = cur.take(key_len).ok_or_else(|| truncated(key_start))?;
        let key = std::str::from_utf8(key)
            .map_err(|e| Error::format(key_start as u64, format!("key is not UTF-8: {e}")))?
            .to_owned();
        let values_start = cur.pos;
        let raw = cur
            .take(dim.checked_mul(4).ok_or_else(|| truncated(values_start))?)
            .ok_or_else(|| truncated(values_start))?;
        let vector: Vec<f32> = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::format(
                values_start as u64,
                format!("record {record} (`{key}`) has non-finite values"),
            ));
        }
        // Keys are stored verbatim; `push` would re-lowercase token keys.
        out.records.push(Record { key, vector });
    }
    if cur.pos != bytes.len() {
        return Err(Error::format(
            cur.pos as u64,
            format!("{} trailing bytes after last record", bytes.len() - cur.pos),
        ));
    }
    Ok(out)
}

pub fn write_collection(c: &EmbeddingCollection, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_collection(c)?)
}

pub fn read_collection(path: impl AsRef<Path>) -> Result<EmbeddingCollection> {
    decode_collection(&fs::read(path)?)
}

/// Writes to a temporary sibling and renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::param(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// CRC-32 (IEEE) of a payload.
pub fn checksum(bytes: &[u8]) -> u32 {
    crc32fast::hash(bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path of the CEMB file, relative to the manifest.
    pub path: String,
    pub kind: CollectionKind,
    pub dim: usize,
    pub count: u64,
    pub checksum: u32,
    #[serde(flatten)]
    pub metadata: CollectionMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub collections: Vec<ManifestEntry>,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            format_version: MANIFEST_VERSION,
            collections: Vec::new(),
        }
    }
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Manifest> {
        let text = fs::read_to_string(path)?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.format_version != MANIFEST_VERSION {
            return Err(Error::format(
                0,
                format!("unsupported manifest version {}", m.format_version),
            ));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(path.as_ref(), text.as_bytes())
    }

    /// Writes `c` as `dir/file_name` and records it in the manifest.
    pub fn add_collection(&mut self, dir: impl AsRef<Path>, file_name: &str, c: &EmbeddingCollection) -> Result<()> {
        let bytes = encode_collection(c)?;
        write_atomic(&dir.as_ref().join(file_name), &bytes)?;
        self.collections.retain(|e| e.path != file_name);
        self.collections.push(ManifestEntry {
            path: file_name.to_owned(),
            kind: c.kind,
            dim: c.dim,
            count: c.len() as u64,
            checksum: checksum(&bytes),
            metadata: c.metadata.clone(),
        });
        Ok(())
    }

    pub fn entry(&self, path: &str) -> Option<&ManifestEntry> {
        self.collections.iter().find(|e| e.path == path)
    }

    /// Reads and verifies one entry, attaching its metadata.
    pub fn open(&self, base_dir: impl AsRef<Path>, entry: &ManifestEntry) -> Result<EmbeddingCollection> {
        let path = base_dir.as_ref().join(&entry.path);
        let bytes = fs::read(&path)?;
        verify_entry(entry, &bytes)?;
        let mut c = decode_collection(&bytes)?;
        if c.dim != entry.dim || c.kind != entry.kind || c.len() as u64 != entry.count {
            return Err(Error::data(format!(
                "{}: header (kind {:?}, dim {}, count {}) disagrees with manifest",
                entry.path,
                c.kind,
                c.dim,
                c.len()
            )));
        }
        c.metadata = entry.metadata.clone();
        Ok(c)
    }

    /// Checks every checksum against the files under `base_dir`.
    pub fn verify(&self, base_dir: impl AsRef<Path>) -> Result<()> {
        for e in &self.collections {
            let bytes = fs::read(base_dir.as_ref().join(&e.path))?;
            verify_entry(e, &bytes)?;
        }
        Ok(())
    }
}

pub fn verify_entry(entry: &ManifestEntry, bytes: &[u8]) -> Result<()> {
    let actual = checksum(bytes);
    if actual != entry.checksum {
        return Err(Error::Checksum {
            path: entry.path.clone(),
            expected: entry.checksum,
            actual,
        });
    }
    Ok(())
}

/// Reads a plain-text `word v1 v2 …` file (one vector per line). A leading
/// `count dim` header line is skipped when present.
pub fn read_text_embeddings(path: impl AsRef<Path>, kind: CollectionKind) -> Result<EmbeddingCollection> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out: Option<EmbeddingCollection> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let rest: Vec<&str> = parts.collect();
        if lineno == 0 && rest.len() == 1 && word.parse::<u64>().is_ok() && rest[0].parse::<u64>().is_ok() {
            continue;
        }
        let values = rest
            .iter()
            .map(|s| s.parse::<f32>())
            .collect::<std::result::Result<Vec<f32>, _>>()
            .map_err(|e| Error::data(format!("line {}: {e}", lineno + 1)))?;
        let c = out.get_or_insert_with(|| EmbeddingCollection::new(values.len(), kind));
        c.push(word, values)
            .map_err(|e| Error::data(format!("line {}: {e}", lineno + 1)))?;
    }
    out.ok_or_else(|| Error::data("no vectors in text embedding file"))
}
