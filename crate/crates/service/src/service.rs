//! Sessions over shared corpus stores.

use std::collections::HashMap;
use std::path::{Component, Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use argbank_core::export::parse_export_bytes;
use argbank_core::query::{parse_query, search, Match};
use argbank_core::SyntaxGraph;
use argbank_models::ModelBundle;

use crate::compare::{compare_documents, ComparisonReport};
use crate::config::Config;
use crate::edit::Edit;
use crate::error::ServiceError;
use crate::proposal::{propose, IncrementRequest, Proposal};
use crate::store::{content_hash, CorpusStore};

#[derive(Clone)]
pub struct Session {
    pub id: String,
    pub annotator_id: String,
    /// Corpus path relative to the corpus root.
    pub corpus: String,
    pub exclusive: bool,
    store: Arc<CorpusStore>,
}

impl Session {
    pub fn store(&self) -> &CorpusStore {
        &self.store
    }
}

struct OpenCorpus {
    store: Arc<CorpusStore>,
    sessions: usize,
    exclusive: bool,
}

pub struct Service {
    config: Config,
    models: ModelBundle,
    model_version: String,
    sessions: RwLock<HashMap<String, Session>>,
    open: Mutex<HashMap<PathBuf, OpenCorpus>>,
    next_session: AtomicU64,
}

impl Service {
    pub fn new(config: Config, models: ModelBundle) -> Service {
        let model_version = models.fingerprint();
        Service {
            config,
            models,
            model_version,
            sessions: RwLock::new(HashMap::new()),
            open: Mutex::new(HashMap::new()),
            next_session: AtomicU64::new(1),
        }
    }

    /// Loads the model container named in the config, if any.
    pub fn from_config(config: Config) -> Result<Service, ServiceError> {
        let models = match &config.models {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ServiceError::io(path, e))?;
                ModelBundle::from_json(&text, Some(&config.tagset))?
            }
            None => ModelBundle::new(config.tagset.clone()),
        };
        Ok(Service::new(config, models))
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn model_version(&self) -> &str {
        &self.model_version
    }

    fn resolve(&self, corpus: &str) -> Result<PathBuf, ServiceError> {
        let rel = Path::new(corpus);
        let ok = !corpus.is_empty()
            && rel
                .components()
                .all(|c| matches!(c, Component::Normal(_) | Component::CurDir));
        if !ok {
            return Err(ServiceError::BadPath(corpus.to_owned()));
        }
        Ok(self.config.corpus_root.join(rel))
    }

    /// Opens `corpus` for `annotator_id`. Several sessions may share a
    /// corpus unless one of them asked for exclusive access.
    pub fn open_session(&self, annotator_id: &str, corpus: &str, exclusive: bool) -> Result<Session, ServiceError> {
        if annotator_id.trim().is_empty() {
            return Err(ServiceError::BadRequest("annotator_id must not be empty".into()));
        }
        let path = self.resolve(corpus)?;
        let mut open = self.open.lock().expect("open lock");
        let store = match open.get_mut(&path) {
            Some(o) => {
                if o.exclusive || exclusive {
                    return Err(ServiceError::LockConflict(corpus.to_owned()));
                }
                o.sessions += 1;
                o.store.clone()
            }
            None => {
                let store = Arc::new(CorpusStore::open(&path)?);
                open.insert(
                    path,
                    OpenCorpus {
                        store: store.clone(),
                        sessions: 1,
                        exclusive,
                    },
                );
                store
            }
        };
        let id = format!("s{}", self.next_session.fetch_add(1, Ordering::Relaxed));
        let session = Session {
            id: id.clone(),
            annotator_id: annotator_id.to_owned(),
            corpus: corpus.to_owned(),
            exclusive,
            store,
        };
        self.sessions
            .write()
            .expect("session lock")
            .insert(id, session.clone());
        Ok(session)
    }

    /// Ends a session; the corpus is released with its last session.
    pub fn close_session(&self, id: &str) -> Result<(), ServiceError> {
        let session = self
            .sessions
            .write()
            .expect("session lock")
            .remove(id)
            .ok_or_else(|| ServiceError::UnknownSession(id.to_owned()))?;
        let mut open = self.open.lock().expect("open lock");
        let path = session.store.path().to_owned();
        if let Some(o) = open.get_mut(&path) {
            o.sessions -= 1;
            if o.sessions == 0 {
                open.remove(&path);
            }
        }
        Ok(())
    }

    pub fn session(&self, id: &str) -> Result<Session, ServiceError> {
        self.sessions
            .read()
            .expect("session lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_owned()))
    }

    pub fn sentence(&self, session: &str, sentence_id: &str) -> Result<(Arc<SyntaxGraph>, u64), ServiceError> {
        self.session(session)?.store.get(sentence_id)
    }

    /// A model proposal for grouping the selected nodes. Nothing is stored.
    pub fn propose_increment(
        &self,
        session: &str,
        sentence_id: &str,
        req: &IncrementRequest,
    ) -> Result<(Proposal, u64), ServiceError> {
        let (graph, version) = self.sentence(session, sentence_id)?;
        Ok((propose(&graph, req, &self.models, &self.config)?, version))
    }

    pub fn apply_edit(
        &self,
        session: &str,
        sentence_id: &str,
        version: u64,
        edit: &Edit,
    ) -> Result<(u64, Arc<SyntaxGraph>), ServiceError> {
        let s = self.session(session)?;
        s.store.apply(sentence_id, version, edit, &s.annotator_id, &s.id)
    }

    /// Compares two corpus files below the corpus root. Returns the report
    /// and a content hash of both inputs.
    pub fn compare(&self, left: &str, right: &str) -> Result<(ComparisonReport, String), ServiceError> {
        let read = |name: &str| -> Result<(Vec<u8>, argbank_core::export::ExportDocument), ServiceError> {
            let path = self.resolve(name)?;
            let bytes = std::fs::read(&path).map_err(|e| ServiceError::io(&path, e))?;
            let doc = parse_export_bytes(&bytes)?;
            Ok((bytes, doc))
        };
        let (lb, a) = read(left)?;
        let (rb, b) = read(right)?;
        let mut both = String::from_utf8_lossy(&lb).into_owned();
        both.push('\u{0}');
        both.push_str(&String::from_utf8_lossy(&rb));
        Ok((compare_documents(&a, &b), content_hash(&both)))
    }

    pub fn search(&self, session: &str, query: &str) -> Result<Vec<Match>, ServiceError> {
        let q = parse_query(query).map_err(|e| ServiceError::Query {
            column: e.column,
            message: e.message,
        })?;
        Ok(search(&self.session(session)?.store.snapshot(), &q))
    }
}
