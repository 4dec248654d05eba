//! Corpus indexes and their single-file on-disk format.
//!
//! Layout (integers little-endian, floats IEEE-754 binary64, strings as a
//! `u32` byte length followed by UTF-8):
//!
//! ```text
//! magic           8 bytes  "LADYBUG\0"
//! format_version  u32      = 1
//! header          u32 len, then: commit_id str, provider name str,
//!                 provider version str, dimension u64, file_count u64,
//!                 segment_count u64, has_lexical_model u8
//! records         tag u8, u32 len, payload
//!                   1 file:     path str, token_count u32, token str*
//!                   2 segment:  path str, segment_index u32, dimension u32, f64*
//!                   3 lexical:  segment_count u64, vocab_len u64, (token str, df u64)*
//!                 255 end:      SHA-256 of every preceding byte
//! ```
//!
//! Files come first in path order, then segments in (path, index) order, then
//! the optional lexical model. Saving the same index twice yields identical
//! bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::embedding::{
    EmbedError, EmbeddingProvider, EmbeddingVector, LexicalModel, ProviderIdentity, ProviderKey,
    SegmentEmbedding,
};
use crate::ingest::{is_stale, snapshot_repository, RepoSnapshot};
use crate::preprocess::preprocess_source;
use crate::Error;

pub const MAGIC: &[u8; 8] = b"LADYBUG\0";
pub const FORMAT_VERSION: u32 = 1;

const TAG_FILE: u8 = 1;
const TAG_SEGMENT: u8 = 2;
const TAG_LEXICAL: u8 = 3;
const TAG_END: u8 = 255;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("cannot access index file {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("index file is corrupt: {0}")]
    Corrupt(String),
    #[error("index format version {found} is not supported (expected {supported})")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("index violates an invariant: {0}")]
    InvariantViolation(String),
    #[error("index {path} is locked by process {pid}")]
    Locked { path: PathBuf, pid: String },
}

fn storage(path: &Path) -> impl FnOnce(std::io::Error) -> IndexError + '_ {
    move |source| IndexError::Storage {
        path: path.to_path_buf(),
        source,
    }
}

/// Embeddings and token sets for one repository state and one provider.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusIndex {
    pub commit_id: String,
    pub provider: ProviderIdentity,
    /// Sorted by `(file_path, segment_index)`.
    pub segment_embeddings: Vec<SegmentEmbedding>,
    /// Normalized tokens of each file.
    pub file_token_sets: BTreeMap<String, BTreeSet<String>>,
    pub lexical_model: Option<LexicalModel>,
}

impl CorpusIndex {
    pub fn file_count(&self) -> usize {
        self.file_token_sets.len()
    }

    pub fn segment_count(&self) -> usize {
        self.segment_embeddings.len()
    }

    /// Each file path with its segments, in path order.
    pub fn segments_by_file(&self) -> impl Iterator<Item = (&str, &[SegmentEmbedding])> + '_ {
        self.segment_embeddings
            .chunk_by(|a, b| a.file_path == b.file_path)
            .map(|group| (group[0].file_path.as_str(), group))
    }

    pub fn header(&self) -> IndexHeader {
        IndexHeader {
            format_version: FORMAT_VERSION,
            commit_id: self.commit_id.clone(),
            provider: self.provider.clone(),
            file_count: self.file_count(),
            segment_count: self.segment_count(),
            has_lexical_model: self.lexical_model.is_some(),
        }
    }

    pub fn validate(&self) -> Result<(), IndexError> {
        let bad = |m: String| Err(IndexError::InvariantViolation(m));
        if self.commit_id.is_empty() {
            return bad("empty commit id".into());
        }
        if self.provider.dimension == 0 {
            return bad("provider dimension is zero".into());
        }
        let mut previous: Option<(&str, usize)> = None;
        for s in &self.segment_embeddings {
            let key = (s.file_path.as_str(), s.segment_index);
            let expected_index = match previous {
                Some((p, i)) if p == key.0 => i + 1,
                _ => 0,
            };
            if key.1 != expected_index || previous.is_some_and(|p| p.0 > key.0) {
                return bad(format!(
                    "segment {}#{} out of order or not contiguous",
                    key.0, key.1
                ));
            }
            if s.vector.dimension() != self.provider.dimension {
                return bad(format!(
                    "segment {}#{} has dimension {}, provider declares {}",
                    key.0,
                    key.1,
                    s.vector.dimension(),
                    self.provider.dimension
                ));
            }
            if !self.file_token_sets.contains_key(key.0) {
                return bad(format!("segment for unknown file {}", key.0));
            }
            previous = Some(key);
        }
        let with_segments = self.segments_by_file().count();
        if with_segments != self.file_token_sets.len() {
            return bad(format!(
                "{} files but only {with_segments} have segments",
                self.file_token_sets.len()
            ));
        }
        if let Some(model) = &self.lexical_model {
            if model.dimension() != self.provider.dimension {
                return bad("lexical vocabulary size differs from provider dimension".into());
            }
        }
        Ok(())
    }
}

/// Preprocesses and embeds every file of a snapshot.
pub fn build_index(snapshot: &RepoSnapshot, provider: &mut dyn EmbeddingProvider) -> Result<CorpusIndex, Error> {
    let files: Vec<_> = snapshot
        .files
        .par_iter()
        .map(|f| preprocess_source(&f.relative_path, &f.raw_text))
        .collect();
    let segments: Vec<_> = files.iter().flat_map(|f| f.segments.iter().cloned()).collect();
    let embedded = provider.embed_corpus(&segments)?;
    if embedded.vectors.len() != segments.len() {
        return Err(IndexError::InvariantViolation(format!(
            "provider returned {} vectors for {} segments",
            embedded.vectors.len(),
            segments.len()
        ))
        .into());
    }
    if let Some(v) = embedded
        .vectors
        .iter()
        .find(|v| v.dimension() != embedded.identity.dimension)
    {
        return Err(EmbedError::DimensionMismatch {
            left: embedded.identity.dimension,
            right: v.dimension(),
        }
        .into());
    }
    let segment_embeddings = segments
        .into_iter()
        .zip(embedded.vectors)
        .map(|(s, vector)| SegmentEmbedding {
            file_path: s.file_path,
            segment_index: s.segment_index,
            vector,
        })
        .collect();
    let file_token_sets = files
        .into_iter()
        .map(|f| (f.path, f.tokens.tokens.into_iter().collect()))
        .collect();
    let index = CorpusIndex {
        commit_id: snapshot.commit_id.clone(),
        provider: embedded.identity,
        segment_embeddings,
        file_token_sets,
        lexical_model: embedded.lexical_model,
    };
    index.validate()?;
    Ok(index)
}

/// The fixed-size front of an index file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexHeader {
    pub format_version: u32,
    pub commit_id: String,
    pub provider: ProviderIdentity,
    pub file_count: usize,
    pub segment_count: usize,
    pub has_lexical_model: bool,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("length fits in u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
    fn record(&mut self, tag: u8, payload: Writer) {
        self.u8(tag);
        self.u32(payload.0.len());
        self.0.extend_from_slice(&payload.0);
    }
}

/// Serializes an index to bytes.
pub fn encode_index(index: &CorpusIndex) -> Vec<u8> {
    let mut out = Writer(Vec::new());
    out.0.extend_from_slice(MAGIC);
    out.0.extend_from_slice(&FORMAT_VERSION.to_le_bytes());

    let mut header = Writer(Vec::new());
    header.str(&index.commit_id);
    header.str(&index.provider.name);
    header.str(&index.provider.version);
    header.u64(index.provider.dimension as u64);
    header.u64(index.file_count() as u64);
    header.u64(index.segment_count() as u64);
    header.u8(index.lexical_model.is_some() as u8);
    out.u32(header.0.len());
    out.0.extend_from_slice(&header.0);

    for (path, tokens) in &index.file_token_sets {
        let mut rec = Writer(Vec::new());
        rec.str(path);
        rec.u32(tokens.len());
        for t in tokens {
            rec.str(t);
        }
        out.record(TAG_FILE, rec);
    }
    for s in &index.segment_embeddings {
        let mut rec = Writer(Vec::new());
        rec.str(&s.file_path);
        rec.u32(s.segment_index);
        rec.u32(s.vector.dimension());
        for &v in s.vector.values() {
            rec.f64(v);
        }
        out.record(TAG_SEGMENT, rec);
    }
    if let Some(model) = &index.lexical_model {
        let mut rec = Writer(Vec::new());
        rec.u64(model.segment_count() as u64);
        rec.u64(model.vocabulary().len() as u64);
        for (t, &df) in model.vocabulary().iter().zip(model.document_frequency()) {
            rec.str(t);
            rec.u64(df);
        }
        out.record(TAG_LEXICAL, rec);
    }
    let digest = Sha256::digest(&out.0);
    let mut end = Writer(Vec::new());
    end.0.extend_from_slice(&digest);
    out.record(TAG_END, end);
    out.0
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

fn truncated(what: &str) -> IndexError {
    IndexError::Corrupt(format!("truncated while reading {what}"))
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], IndexError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| truncated(what))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self, what: &str) -> Result<u8, IndexError> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<usize, IndexError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self, what: &str) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn f64(&mut self, what: &str) -> Result<f64, IndexError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn str(&mut self, what: &str) -> Result<String, IndexError> {
        let n = self.u32(what)?;
        let raw = self.take(n, what)?;
        String::from_utf8(raw.to_vec()).map_err(|_| IndexError::Corrupt(format!("{what} is not UTF-8")))
    }
    fn done(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

fn usize_of(v: u64, what: &str) -> Result<usize, IndexError> {
    usize::try_from(v).map_err(|_| IndexError::Corrupt(format!("{what} too large")))
}

fn decode_preamble(reader: &mut Reader<'_>) -> Result<IndexHeader, IndexError> {
    if reader.take(MAGIC.len(), "magic").ok() != Some(&MAGIC[..]) {
        return Err(IndexError::Corrupt("not a ladybug index (bad magic)".into()));
    }
    let version = reader.u32("format version")? as u32;
    if version != FORMAT_VERSION {
        return Err(IndexError::VersionMismatch {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let len = reader.u32("header length")?;
    let mut h = Reader {
        bytes: reader.take(len, "header")?,
        pos: 0,
    };
    let header = IndexHeader {
        format_version: version,
        commit_id: h.str("commit id")?,
        provider: ProviderIdentity {
            name: h.str("provider name")?,
            version: h.str("provider version")?,
            dimension: usize_of(h.u64("dimension")?, "dimension")?,
        },
        file_count: usize_of(h.u64("file count")?, "file count")?,
        segment_count: usize_of(h.u64("segment count")?, "segment count")?,
        has_lexical_model: match h.u8("lexical flag")? {
            0 => false,
            1 => true,
            other => return Err(IndexError::Corrupt(format!("invalid lexical flag {other}"))),
        },
    };
    if !h.done() {
        return Err(IndexError::Corrupt("trailing bytes in header".into()));
    }
    Ok(header)
}

const TRAILER_LEN: usize = 1 + 4 + 32;

/// Checks the end record's digest before anything else is interpreted, so
/// damaged payloads report as corruption. Returns the end record's offset.
fn verify_trailer(bytes: &[u8], body_start: usize) -> Result<usize, IndexError> {
    let start = bytes
        .len()
        .checked_sub(TRAILER_LEN)
        .filter(|&s| s >= body_start)
        .ok_or_else(|| truncated("end record"))?;
    let tail = &bytes[start..];
    if tail[0] != TAG_END || tail[1..5] != 32u32.to_le_bytes() {
        return Err(truncated("end record"));
    }
    if tail[5..] != Sha256::digest(&bytes[..start])[..] {
        return Err(IndexError::Corrupt("checksum mismatch".into()));
    }
    Ok(start)
}

/// Parses and validates an encoded index.
pub fn decode_index(bytes: &[u8]) -> Result<CorpusIndex, IndexError> {
    let mut reader = Reader { bytes, pos: 0 };
    let header = decode_preamble(&mut reader)?;
    let trailer_start = verify_trailer(bytes, reader.pos)?;

    let mut file_token_sets = BTreeMap::new();
    let mut segment_embeddings = Vec::with_capacity(header.segment_count.min(1 << 20));
    let mut lexical_model = None;
    loop {
        let record_start = reader.pos;
        let tag = reader.u8("record tag")?;
        let len = reader.u32("record length")?;
        let mut rec = Reader {
            bytes: reader.take(len, "record")?,
            pos: 0,
        };
        match tag {
            TAG_FILE => {
                let path = rec.str("file path")?;
                let n = rec.u32("token count")?;
                let tokens = (0..n)
                    .map(|_| rec.str("token"))
                    .collect::<Result<BTreeSet<_>, _>>()?;
                if tokens.len() != n {
                    return Err(IndexError::Corrupt(format!("duplicate tokens for {path}")));
                }
                if file_token_sets.insert(path.clone(), tokens).is_some() {
                    return Err(IndexError::Corrupt(format!("duplicate file record {path}")));
                }
            }
            TAG_SEGMENT => {
                let file_path = rec.str("segment path")?;
                let segment_index = rec.u32("segment index")?;
                let dim = rec.u32("segment dimension")?;
                let values = (0..dim).map(|_| rec.f64("vector")).collect::<Result<Vec<_>, _>>()?;
                let vector = EmbeddingVector::new(values)
                    .map_err(|e| IndexError::InvariantViolation(format!("{file_path}#{segment_index}: {e}")))?;
                segment_embeddings.push(SegmentEmbedding {
                    file_path,
                    segment_index,
                    vector,
                });
            }
            TAG_LEXICAL => {
                if lexical_model.is_some() {
                    return Err(IndexError::Corrupt("duplicate lexical model".into()));
                }
                let n_segments = usize_of(rec.u64("lexical segment count")?, "lexical segment count")?;
                let n = usize_of(rec.u64("vocabulary size")?, "vocabulary size")?;
                let mut vocabulary = Vec::with_capacity(n.min(1 << 20));
                let mut df = Vec::with_capacity(n.min(1 << 20));
                for _ in 0..n {
                    vocabulary.push(rec.str("vocabulary token")?);
                    df.push(rec.u64("document frequency")?);
                }
                lexical_model = Some(
                    LexicalModel::from_parts(n_segments, vocabulary, df)
                        .map_err(IndexError::InvariantViolation)?,
                );
            }
            TAG_END if record_start == trailer_start => break,
            other => return Err(IndexError::Corrupt(format!("unknown record tag {other}"))),
        }
        if !rec.done() {
            return Err(IndexError::Corrupt(format!("record with tag {tag} has trailing bytes")));
        }
    }

    if file_token_sets.len() != header.file_count
        || segment_embeddings.len() != header.segment_count
        || lexical_model.is_some() != header.has_lexical_model
    {
        return Err(IndexError::Corrupt("record counts disagree with header".into()));
    }
    let index = CorpusIndex {
        commit_id: header.commit_id,
        provider: header.provider,
        segment_embeddings,
        file_token_sets,
        lexical_model,
    };
    index.validate()?;
    Ok(index)
}

/// Writes the index atomically (temporary file, fsync, rename).
pub fn save_index(index: &CorpusIndex, path: &Path) -> Result<(), IndexError> {
    let bytes = encode_index(index);
    let file_name = path
        .file_name()
        .ok_or_else(|| IndexError::Storage {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "index path has no file name"),
        })?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{file_name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(storage(path))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

pub fn load_index(path: &Path) -> Result<CorpusIndex, IndexError> {
    let bytes = fs::read(path).map_err(storage(path))?;
    decode_index(&bytes)
}

/// Reads only the preamble and header.
pub fn read_header(path: &Path) -> Result<IndexHeader, IndexError> {
    let mut f = File::open(path).map_err(storage(path))?;
    let mut prefix = vec![0u8; MAGIC.len() + 8];
    f.read_exact(&mut prefix).map_err(|_| truncated("preamble"))?;
    let header_len = u32::from_le_bytes(prefix[12..16].try_into().unwrap()) as usize;
    let mut header = vec![0u8; header_len];
    f.read_exact(&mut header).map_err(|_| truncated("header"))?;
    prefix.extend_from_slice(&header);
    decode_preamble(&mut Reader { bytes: &prefix, pos: 0 })
}

/// Why [`ensure_fresh`] did or did not rebuild.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Freshness {
    Reused,
    /// Nothing usable was stored.
    BuiltNew { reason: String },
    CommitChanged { stored: String, current: String },
    ProviderChanged { stored: ProviderKey, current: ProviderKey },
}

impl Freshness {
    pub fn rebuilt(&self) -> bool {
        !matches!(self, Freshness::Reused)
    }
}

/// Reuse-or-rebuild decision for a stored header against the current state.
pub fn decide_freshness(stored: &IndexHeader, current_commit: &str, current_provider: &ProviderKey) -> Freshness {
    if is_stale(current_commit, &stored.commit_id) {
        Freshness::CommitChanged {
            stored: stored.commit_id.clone(),
            current: current_commit.to_string(),
        }
    } else if stored.provider.key() != *current_provider {
        Freshness::ProviderChanged {
            stored: stored.provider.key(),
            current: current_provider.clone(),
        }
    } else {
        Freshness::Reused
    }
}

#[derive(Debug, Clone)]
pub struct FreshIndex {
    pub index: CorpusIndex,
    pub status: Freshness,
}

/// Loads the stored index when it matches the repository's commit and the
/// provider; otherwise rebuilds it and overwrites the store.
pub fn ensure_fresh(
    repo_root: &Path,
    store_path: &Path,
    provider: &mut dyn EmbeddingProvider,
) -> Result<FreshIndex, Error> {
    let snapshot = snapshot_repository(repo_root)?;
    let key = provider.key()?;
    let status = match read_header(store_path) {
        Ok(header) => decide_freshness(&header, &snapshot.commit_id, &key),
        Err(IndexError::Storage { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => {
            Freshness::BuiltNew {
                reason: "no stored index".into(),
            }
        }
        Err(e) => Freshness::BuiltNew {
            reason: format!("stored index unusable: {e}"),
        },
    };
    if status == Freshness::Reused {
        match load_index(store_path) {
            Ok(index) => return Ok(FreshIndex { index, status }),
            Err(e) => {
                return rebuild(
                    &snapshot,
                    store_path,
                    provider,
                    Freshness::BuiltNew {
                        reason: format!("stored index unusable: {e}"),
                    },
                )
            }
        }
    }
    rebuild(&snapshot, store_path, provider, status)
}

fn rebuild(
    snapshot: &RepoSnapshot,
    store_path: &Path,
    provider: &mut dyn EmbeddingProvider,
    status: Freshness,
) -> Result<FreshIndex, Error> {
    let index = build_index(snapshot, provider)?;
    if let Some(dir) = store_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(storage(dir))?;
    }
    save_index(&index, store_path)?;
    Ok(FreshIndex { index, status })
}

/// Advisory writer lock: `<index>.lock` holding the owner's process id.
/// Released on drop.
#[derive(Debug)]
pub struct StoreLock {
    path: PathBuf,
}

impl StoreLock {
    pub fn lock_path(index_path: &Path) -> PathBuf {
        let mut name = index_path.as_os_str().to_owned();
        name.push(".lock");
        PathBuf::from(name)
    }

    /// Waits up to `wait` for a competing writer. Locks left by processes
    /// that no longer exist are taken over.
    pub fn acquire(index_path: &Path, wait: Duration) -> Result<StoreLock, IndexError> {
        let path = Self::lock_path(index_path);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(storage(dir))?;
        }
        let deadline = Instant::now() + wait;
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    write!(f, "{}", std::process::id()).map_err(storage(&path))?;
                    f.sync_all().map_err(storage(&path))?;
                    return Ok(StoreLock { path });
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    let owner = fs::read_to_string(&path).unwrap_or_default().trim().to_string();
                    if owner_is_gone(&owner) {
                        let _ = fs::remove_file(&path);
                        continue;
                    }
                    if Instant::now() >= deadline {
                        return Err(IndexError::Locked {
                            path: index_path.to_path_buf(),
                            pid: owner,
                        });
                    }
                    std::thread::sleep(Duration::from_millis(25));
                }
                Err(e) => return Err(storage(&path)(e)),
            }
        }
    }
}

impl Drop for StoreLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(target_os = "linux")]
fn owner_is_gone(pid: &str) -> bool {
    match pid.parse::<u32>() {
        Ok(pid) => !Path::new(&format!("/proc/{pid}")).exists(),
        // a writer that has created the file but not yet written its pid
        Err(_) => false,
    }
}

#[cfg(not(target_os = "linux"))]
fn owner_is_gone(_pid: &str) -> bool {
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::LexicalProvider;
    use crate::ingest::SourceFileRecord;

    fn snapshot() -> RepoSnapshot {
        let files = [
            ("a/LoginActivity.java", "class LoginActivity { void login() { check(password); } }"),
            ("a/NoteStore.java", "class NoteStore { void saveNote(Note n) { db.insert(n); } }"),
            ("b/Empty.java", "// nothing here"),
        ];
        RepoSnapshot {
            root_path: PathBuf::from("/repo"),
            commit_id: "c0ffee".into(),
            files: files
                .iter()
                .map(|(p, t)| SourceFileRecord {
                    relative_path: p.to_string(),
                    raw_text: t.to_string(),
                })
                .collect(),
        }
    }

    fn index() -> CorpusIndex {
        build_index(&snapshot(), &mut LexicalProvider::new()).unwrap()
    }

    #[test]
    fn build_covers_every_file() {
        let idx = index();
        assert_eq!(idx.file_count(), 3);
        assert_eq!(idx.segment_count(), 3);
        assert!(idx.file_token_sets["b/Empty.java"].is_empty());
        assert_eq!(idx.header().provider.name, "lexical-tfidf");
    }

    #[test]
    fn encode_decode_round_trip() {
        let idx = index();
        let bytes = encode_index(&idx);
        assert_eq!(decode_index(&bytes).unwrap(), idx);
        assert_eq!(bytes, encode_index(&idx));
    }

    #[test]
    fn truncation_and_bit_flips_are_corruption() {
        let bytes = encode_index(&index());
        for cut in [0, 5, 12, 20, bytes.len() / 2, bytes.len() - 1] {
            assert!(
                matches!(decode_index(&bytes[..cut]), Err(IndexError::Corrupt(_))),
                "cut at {cut}"
            );
        }
        let mut flipped = bytes.clone();
        let mid = flipped.len() / 2;
        flipped[mid] ^= 0x40;
        assert!(matches!(decode_index(&flipped), Err(IndexError::Corrupt(_))));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let mut bytes = encode_index(&index());
        bytes[8..12].copy_from_slice(&99u32.to_le_bytes());
        assert!(matches!(
            decode_index(&bytes),
            Err(IndexError::VersionMismatch { found: 99, supported: 1 })
        ));
    }

    #[test]
    fn invariant_violations_are_reported() {
        let mut idx = index();
        idx.file_token_sets.insert("ghost/Ghost.java".into(), BTreeSet::new());
        assert!(matches!(
            decode_index(&encode_index(&idx)),
            Err(IndexError::InvariantViolation(_))
        ));
    }

    #[test]
    fn header_only_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.lbi");
        let idx = index();
        save_index(&idx, &path).unwrap();
        assert_eq!(read_header(&path).unwrap(), idx.header());
    }

    #[test]
    fn freshness_decision_is_a_trichotomy() {
        let header = index().header();
        let key = header.provider.key();
        assert_eq!(decide_freshness(&header, "c0ffee", &key), Freshness::Reused);
        assert!(matches!(
            decide_freshness(&header, "c0ffef", &key),
            Freshness::CommitChanged { .. }
        ));
        let bumped = ProviderKey {
            version: "2".into(),
            ..key
        };
        assert!(matches!(
            decide_freshness(&header, "c0ffee", &bumped),
            Freshness::ProviderChanged { .. }
        ));
    }

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.lbi");
        let lock = StoreLock::acquire(&path, Duration::ZERO).unwrap();
        let pid = fs::read_to_string(StoreLock::lock_path(&path)).unwrap();
        assert_eq!(pid, std::process::id().to_string());
        assert!(matches!(
            StoreLock::acquire(&path, Duration::from_millis(60)),
            Err(IndexError::Locked { .. })
        ));
        drop(lock);
        assert!(!StoreLock::lock_path(&path).exists());
        StoreLock::acquire(&path, Duration::ZERO).unwrap();
    }

    #[cfg(target_os = "linux")]
    #[test]
    fn abandoned_lock_is_taken_over() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.lbi");
        // pid_max on Linux is at most 2^22
        fs::write(StoreLock::lock_path(&path), "4194305").unwrap();
        StoreLock::acquire(&path, Duration::ZERO).unwrap();
    }
}
