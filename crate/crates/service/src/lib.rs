//! Annotation service: sessions over export corpora, model proposals for
//! interactive structure building, versioned edits with an audit log, and
//! corpus comparison, exposed as JSON over HTTP.

pub mod compare;
pub mod config;
pub mod edit;
pub mod error;
pub mod http;
pub mod proposal;
pub mod service;
pub mod store;

pub use compare::{compare_documents, ComparisonReport, SentenceComparison};
pub use config::{Config, ConfigError, Thresholds};
pub use edit::{apply_edit, Edit, NewEdge, NewNode};
pub use error::{ErrorBody, ServiceError};
pub use http::{router, serve};
pub use proposal::{propose, IncrementRequest, Proposal, ProposedEdge, ProposedNode, StructureInfo};
pub use service::{Service, Session};
pub use store::{content_hash, read_audit_log, replay, AuditEntry, CorpusStore};
