//! A corpus file held in memory with per-sentence version counters.
//!
//! Next to `corpus.export` the store keeps
//!
//! * `corpus.export.versions`: JSON object from sentence id to version;
//! * `corpus.export.audit.log`: one JSON object per accepted edit.
//!
//! Reads clone an `Arc` snapshot of a sentence. Writes to one sentence are
//! serialized by its lock; the version check and the mutation happen under
//! that lock, so two edits made against the same version cannot both
//! succeed. After every edit the whole corpus is rewritten atomically
//! (temporary file, then rename).

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use argbank_core::export::{parse_export_bytes, serialize_export, ExportDocument};
use argbank_core::SyntaxGraph;
use serde::{Deserialize, Serialize};

use crate::edit::{apply_edit, Edit};
use crate::error::ServiceError;

#[derive(Clone, Debug)]
struct Entry {
    graph: Arc<SyntaxGraph>,
    version: u64,
}

/// One line of the audit log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub timestamp_ms: u64,
    pub annotator: String,
    pub session: String,
    pub sentence_id: String,
    pub from_version: u64,
    pub to_version: u64,
    pub edit: Edit,
}

pub struct CorpusStore {
    path: PathBuf,
    format_version: String,
    tagset: String,
    index: HashMap<String, usize>,
    entries: Vec<RwLock<Entry>>,
    /// Content hash of the last saved state; the lock also orders saves.
    saved: Mutex<String>,
    audit: Mutex<()>,
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// 64-bit FNV-1a, hex.
pub fn content_hash(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn write_atomic(path: &Path, text: &str) -> Result<(), ServiceError> {
    let tmp = with_suffix(path, ".tmp");
    let io = |e| ServiceError::io(path, e);
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn serialize(doc: &ExportDocument, path: &Path) -> Result<String, ServiceError> {
    serialize_export(doc).map_err(|e| ServiceError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

impl CorpusStore {
    pub fn versions_path(corpus: &Path) -> PathBuf {
        with_suffix(corpus, ".versions")
    }

    pub fn audit_path(corpus: &Path) -> PathBuf {
        with_suffix(corpus, ".audit.log")
    }

    pub fn open(path: &Path) -> Result<CorpusStore, ServiceError> {
        let bytes = fs::read(path).map_err(|e| ServiceError::io(path, e))?;
        let doc = parse_export_bytes(&bytes)?;
        let versions_path = CorpusStore::versions_path(path);
        let versions: BTreeMap<String, u64> = match fs::read_to_string(&versions_path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| ServiceError::Io {
                path: versions_path.display().to_string(),
                message: e.to_string(),
            })?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(ServiceError::io(&versions_path, e)),
        };
        let hash = content_hash(&serialize(&doc, path)?);
        let mut index = HashMap::new();
        let mut entries = Vec::with_capacity(doc.sentences.len());
        for (i, g) in doc.sentences.into_iter().enumerate() {
            index.insert(g.sentence_id().to_owned(), i);
            entries.push(RwLock::new(Entry {
                version: versions.get(g.sentence_id()).copied().unwrap_or(0),
                graph: Arc::new(g),
            }));
        }
        Ok(CorpusStore {
            path: path.to_owned(),
            format_version: doc.format_version,
            tagset: doc.tagset_name,
            index,
            entries,
            saved: Mutex::new(hash),
            audit: Mutex::new(()),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sentence ids with their versions, in corpus order.
    pub fn listing(&self) -> Vec<(String, u64)> {
        self.entries
            .iter()
            .map(|e| {
                let e = e.read().expect("entry lock");
                (e.graph.sentence_id().to_owned(), e.version)
            })
            .collect()
    }

    pub fn get(&self, sentence_id: &str) -> Result<(Arc<SyntaxGraph>, u64), ServiceError> {
        let i = self.slot(sentence_id)?;
        let e = self.entries[i].read().expect("entry lock");
        Ok((e.graph.clone(), e.version))
    }

    /// Content hash of the corpus as last saved.
    pub fn corpus_version(&self) -> String {
        self.saved.lock().expect("save lock").clone()
    }

    pub fn snapshot(&self) -> ExportDocument {
        ExportDocument {
            format_version: self.format_version.clone(),
            tagset_name: self.tagset.clone(),
            sentences: self
                .entries
                .iter()
                .map(|e| (*e.read().expect("entry lock").graph).clone())
                .collect(),
        }
    }

    fn slot(&self, sentence_id: &str) -> Result<usize, ServiceError> {
        self.index
            .get(sentence_id)
            .copied()
            .ok_or_else(|| ServiceError::UnknownSentence(sentence_id.to_owned()))
    }

    /// Applies `edit` if `version` is current, logs it and saves the corpus.
    /// Returns the new version and graph.
    pub fn apply(
        &self,
        sentence_id: &str,
        version: u64,
        edit: &Edit,
        annotator: &str,
        session: &str,
    ) -> Result<(u64, Arc<SyntaxGraph>), ServiceError> {
        let i = self.slot(sentence_id)?;
        let (new_version, graph) = {
            let mut e = self.entries[i].write().expect("entry lock");
            if e.version != version {
                return Err(ServiceError::StaleVersion {
                    given: version,
                    current: e.version,
                });
            }
            let g = Arc::new(apply_edit(&e.graph, edit)?);
            let entry = AuditEntry {
                timestamp_ms: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_millis() as u64),
                annotator: annotator.to_owned(),
                session: session.to_owned(),
                sentence_id: sentence_id.to_owned(),
                from_version: e.version,
                to_version: e.version + 1,
                edit: edit.clone(),
            };
            self.append_audit(&entry)?;
            e.graph = g.clone();
            e.version += 1;
            (e.version, g)
        };
        self.save()?;
        Ok((new_version, graph))
    }

    fn append_audit(&self, entry: &AuditEntry) -> Result<(), ServiceError> {
        let _guard = self.audit.lock().expect("audit lock");
        let path = CorpusStore::audit_path(&self.path);
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| ServiceError::io(&path, e))?;
        let mut line = serde_json::to_string(entry).expect("audit entries serialize");
        line.push('\n');
        f.write_all(line.as_bytes()).map_err(|e| ServiceError::io(&path, e))
    }

    /// Writes the corpus and its versions. Each save takes a fresh
    /// snapshot, so the last save always contains every finished edit.
    pub fn save(&self) -> Result<(), ServiceError> {
        let mut saved = self.saved.lock().expect("save lock");
        let doc = self.snapshot();
        let versions: BTreeMap<String, u64> = self.listing().into_iter().collect();
        let text = serialize(&doc, &self.path)?;
        write_atomic(&self.path, &text)?;
        write_atomic(
            &CorpusStore::versions_path(&self.path),
            &serde_json::to_string_pretty(&versions).expect("versions serialize"),
        )?;
        *saved = content_hash(&text);
        Ok(())
    }
}

/// Reads an audit log back, in append order.
pub fn read_audit_log(path: &Path) -> Result<Vec<AuditEntry>, ServiceError> {
    let text = fs::read_to_string(path).map_err(|e| ServiceError::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| ServiceError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Re-applies logged edits to a corpus, checking the recorded versions.
pub fn replay(doc: &ExportDocument, log: &[AuditEntry]) -> Result<ExportDocument, ServiceError> {
    let mut out = doc.clone();
    let mut versions: HashMap<String, u64> = HashMap::new();
    for entry in log {
        let current = versions.entry(entry.sentence_id.clone()).or_insert(entry.from_version);
        if *current != entry.from_version {
            return Err(ServiceError::StaleVersion {
                given: entry.from_version,
                current: *current,
            });
        }
        let g = out
            .sentences
            .iter_mut()
            .find(|g| g.sentence_id() == entry.sentence_id)
            .ok_or_else(|| ServiceError::UnknownSentence(entry.sentence_id.clone()))?;
        *g = apply_edit(g, &entry.edit)?;
        *current = entry.to_version;
    }
    Ok(out)
}
