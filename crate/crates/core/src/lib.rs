//! Treebank data model for argument-structure annotation.
//!
//! A [`SyntaxGraph`] is one sentence: ordered terminals plus nonterminals
//! linked by single-parent edges that carry grammatical-function labels.
//! Branches may cross, so a node's yield need not be contiguous; heads are
//! marked by the `HD` edge label rather than by the structure.
//!
//! Besides the graph itself the crate provides the line-oriented export
//! format ([`export`]), projection to continuous trees with traces
//! ([`projection`]), dual-annotation comparison ([`compare`]) and a small
//! corpus query language ([`query`]).

pub mod compare;
pub mod export;
mod graph;
mod label;
pub mod projection;
pub mod query;
#[cfg(any(test, feature = "testkit"))]
pub mod testkit;
mod validate;

pub use graph::{
    Edge, NodeId, Nonterminal, Parent, Structure, SyntaxGraph, Token, YieldBlocks, FIRST_NONTERMINAL,
    MAX_NODE_ID, MAX_TOKENS,
};
pub use label::{Category, FunctionLabel, Inventory, PosTag, HEAD_LABEL, ROOT_LABEL};
pub use validate::{Rule, Strictness, Violation};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is not a nonterminal")]
    NotANonterminal(NodeId),
    #[error("node {node} has two head children ({first} and {second})")]
    DuplicateHead {
        node: NodeId,
        first: NodeId,
        second: NodeId,
    },
    #[error("empty selection")]
    EmptySelection,
    #[error("node {node} is already attached below {parent}")]
    AlreadyAttached { node: NodeId, parent: NodeId },
    #[error("edge labels must cover exactly the selected nodes")]
    LabelMismatch,
    #[error("invalid nonterminal id {id}: {reason}")]
    InvalidNodeId { id: NodeId, reason: String },
    #[error("sentence has {0} tokens, more than the supported maximum")]
    TooManyTokens(usize),
    #[error("inventory line {line}: {message}")]
    Inventory { line: usize, message: String },
    #[error("graph {sentence_id} is invalid: {}", summarize(.violations))]
    Invalid {
        sentence_id: String,
        violations: Vec<Violation>,
    },
    #[error("sentence ids differ: `{left}` vs `{right}`")]
    SentenceMismatch { left: String, right: String },
    #[error("token sequences of `{0}` differ")]
    TokenMismatch(String),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
