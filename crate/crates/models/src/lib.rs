//! Stochastic models for semi-automatic annotation.
//!
//! * [`pos`]: trigram part-of-speech tagger with suffix-based unknown words.
//! * [`labeler`]: one Markov model per phrasal category over grammatical
//!   functions; the most probable model also fixes the category.
//! * [`chunk`]: relative structural tags for NP/PP/AP internals.
//!
//! All three decode exactly through [`decode`], which also yields the
//! runner-up sequence used to flag unreliable decisions. Trained models are
//! immutable and can be shared across threads.

pub mod chain;
pub mod chunk;
pub mod container;
pub mod decode;
pub mod labeler;
pub mod pos;

pub use chunk::{ChunkError, ChunkModel, RelTag};
pub use container::ModelBundle;
pub use decode::{DecodeResult, Scored};
pub use labeler::{LabelThresholds, LabelerConfig, LabelerModel, LabelingResult, PhraseModel};
pub use pos::TrigramModel;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("training sentence {0} is empty")]
    EmptySentence(usize),
    #[error("treebank contains no nonterminals")]
    NoEvents,
    #[error("no usable chunk phrases ({skipped} skipped)")]
    NoUsablePhrases { skipped: usize },
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("no chunk model for category `{0}`")]
    MissingSubmodel(String),
    #[error("no label sequence with at most one head exists")]
    NoAdmissibleLabels,
    #[error("no children to label")]
    EmptyChildren,
    #[error("threshold must be non-negative, got {0}")]
    NegativeThreshold(f64),
    #[error("sentence {sentence_id} is invalid: {message}")]
    Invalid { sentence_id: String, message: String },
    #[error(transparent)]
    Chunk(#[from] ChunkError),
    #[error("malformed model: {0}")]
    Format(String),
    #[error("model version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("model is for tagset `{found}`, expected `{expected}`")]
    Tagset { found: String, expected: String },
    #[error("model file has no {0} section")]
    MissingSection(&'static str),
}
