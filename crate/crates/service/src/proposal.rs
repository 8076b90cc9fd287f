//! Model completion of an annotation increment.
//!
//! The annotator selects root-level nodes; the labeler picks the category
//! and the edge labels of a new node over them. A contiguous run of tokens
//! grouped as NP, PP or AP also receives internal structure from the
//! chunker, whose inner phrases are then labeled with their category known.
//! Nothing is stored: accepting the proposal is a separate edit.

use std::collections::{BTreeMap, BTreeSet};

use argbank_core::{Category, FunctionLabel, NodeId, Parent, SyntaxGraph};
use argbank_models::chunk::ChunkResult;
use argbank_models::{LabelThresholds, LabelerModel, LabelingResult, ModelBundle};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::edit::{Edit, NewEdge, NewNode};
use crate::error::ServiceError;

/// Categories whose internal structure the chunker proposes.
pub const CHUNK_CATEGORIES: [&str; 3] = ["AP", "NP", "PP"];

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementRequest {
    pub selection: Vec<NodeId>,
    /// Category fixed by the annotator; chosen by the labeler otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    /// With `false` the proposed labels are still filled in, but every one
    /// is flagged for confirmation.
    #[serde(default = "yes")]
    pub auto_label: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposedNode {
    pub id: NodeId,
    pub category: Category,
    pub label: FunctionLabel,
    pub parent: Parent,
    /// Whether `label` needs no confirmation. Always true for the new root.
    pub reliable: bool,
    /// Joint log-probability of this node's child labels and child tags.
    pub log_probability: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposedEdge {
    pub node: NodeId,
    pub label: FunctionLabel,
    pub parent: NodeId,
    pub reliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureInfo {
    /// Relative structural tags, one per token.
    pub tags: Vec<String>,
    pub log_probability: Option<f64>,
    /// Distance to the runner-up structure; `None` without one.
    pub gap: Option<f64>,
    pub reliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub root: NodeId,
    pub category: Category,
    pub category_reliable: bool,
    /// Distance to the runner-up category; `None` without one.
    pub category_gap: Option<f64>,
    /// New nonterminals, the new root first, then in opening order.
    pub nodes: Vec<ProposedNode>,
    /// One edge per attached node, in node-id order.
    pub edges: Vec<ProposedEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureInfo>,
}

impl Proposal {
    /// The edit that stores this proposal unchanged.
    pub fn accept(&self) -> Edit {
        Edit::Accept {
            nodes: self
                .nodes
                .iter()
                .map(|n| NewNode {
                    id: n.id,
                    category: n.category.clone(),
                    label: n.label.clone(),
                    parent: n.parent,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| NewEdge {
                    node: e.node,
                    label: e.label.clone(),
                    parent: e.parent,
                })
                .collect(),
        }
    }
}

/// JSON has no infinities; absent stands for an infinite gap.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn propose(
    graph: &SyntaxGraph,
    req: &IncrementRequest,
    models: &ModelBundle,
    config: &Config,
) -> Result<Proposal, ServiceError> {
    let labeler = models
        .sections
        .labeler
        .as_ref()
        .ok_or(ServiceError::ModelUnavailable("labeler"))?;
    let selection: BTreeSet<NodeId> = req.selection.iter().copied().collect();
    if selection.is_empty() {
        return Err(ServiceError::EmptySelection);
    }
    for &n in &selection {
        match graph.parent(n) {
            None => return Err(ServiceError::UnknownNode(n)),
            Some(Parent::Node(p)) => return Err(ServiceError::AlreadyAttached { node: n, parent: p }),
            Some(Parent::Root) => {}
        }
    }
    let st = graph.structure();
    let positions: BTreeSet<usize> = selection
        .iter()
        .flat_map(|&n| st.yield_of(n).iter().copied())
        .collect();
    let (lo, hi) = match (positions.first(), positions.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(ServiceError::EmptySelection),
    };
    let span = hi - lo + 1;
    if span > config.max_increment_span {
        return Err(ServiceError::SpanTooLarge {
            span,
            max: config.max_increment_span,
        });
    }

    let mut children: Vec<NodeId> = selection.iter().copied().collect();
    children.sort_by_key(|&c| (st.leftmost(c), c));
    let tags: Vec<&str> = children
        .iter()
        .map(|&c| graph.child_tag(c).expect("selected node exists"))
        .collect();
    let thresholds = LabelThresholds {
        category: config.thresholds.category,
        label: config.thresholds.label,
    };
    let flat = labeler.label_phrase_single_head(&tags, req.category.as_deref(), thresholds)?;
    let root = graph.next_free_id();
    graph.check_nonterminal_id(root)?;

    let contiguous_tokens = selection.iter().all(|&n| graph.is_terminal(n)) && span == selection.len();
    let chunker = models.sections.chunker.as_ref();
    let chunked = match chunker {
        Some(ch)
            if contiguous_tokens
                && span > 1
                && CHUNK_CATEGORIES.contains(&flat.category.as_str())
                && ch.submodel(&flat.category).is_some() =>
        {
            Some(ch.structure_chunk(&graph.tokens()[lo..=hi], &flat.category, config.thresholds.structure)?)
        }
        _ => None,
    };

    let mut proposal = match chunked {
        Some(c) => chunk_proposal(labeler, thresholds, &flat, &c, root, lo)?,
        None => Proposal {
            root,
            category: flat.category.clone(),
            category_reliable: flat.category_reliable,
            category_gap: finite(flat.category_gap),
            nodes: vec![ProposedNode {
                id: root,
                category: flat.category.clone(),
                label: FunctionLabel::root(),
                parent: Parent::Root,
                reliable: true,
                log_probability: finite(flat.log_probability),
            }],
            edges: children
                .iter()
                .zip(flat.labels.iter().zip(&flat.label_reliable))
                .map(|(&node, (label, &reliable))| ProposedEdge {
                    node,
                    label: label.clone(),
                    parent: root,
                    reliable,
                })
                .collect(),
            structure: None,
        },
    };
    proposal.edges.sort_by_key(|e| e.node);
    if !req.auto_label {
        proposal.edges.iter_mut().for_each(|e| e.reliable = false);
        proposal.nodes.iter_mut().skip(1).for_each(|n| n.reliable = false);
        proposal.category_reliable = req.category.is_some();
    }
    Ok(proposal)
}

/// Maps the chunk fragment into the sentence and labels every phrase of it.
fn chunk_proposal(
    labeler: &LabelerModel,
    thresholds: LabelThresholds,
    flat: &LabelingResult,
    chunk: &ChunkResult,
    root: NodeId,
    offset: usize,
) -> Result<Proposal, ServiceError> {
    let frag = &chunk.graph;
    let fst = frag.structure();
    let frag_root = frag.nonterminal_ids().next().expect("chunk has a root");
    let node_id = |f: NodeId| {
        if frag.is_terminal(f) {
            NodeId::terminal(f.index() + offset)
        } else {
            NodeId(root.0 + (f.0 - frag_root.0))
        }
    };
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut labels_of: BTreeMap<NodeId, (FunctionLabel, bool)> = BTreeMap::new();
    for f in frag.nonterminal_ids() {
        let category = frag.category(f).expect("nonterminal").clone();
        let kids = fst.children_of(Parent::Node(f));
        let kid_tags: Vec<&str> = kids.iter().map(|&k| frag.child_tag(k).expect("child")).collect();
        let lp = match labeler.label_phrase_single_head(&kid_tags, Some(&category), thresholds) {
            Ok(r) => {
                for ((&k, l), &ok) in kids.iter().zip(&r.labels).zip(&r.label_reliable) {
                    labels_of.insert(k, (l.clone(), ok));
                }
                finite(r.log_probability)
            }
            // a category the labeler never saw keeps the placeholder labels
            Err(argbank_models::ModelError::UnknownCategory(_)) | Err(argbank_models::ModelError::NoAdmissibleLabels) => {
                for &k in kids {
                    labels_of.insert(k, (frag.edge(k).expect("child").label.clone(), false));
                }
                None
            }
            Err(e) => return Err(e.into()),
        };
        let parent = match frag.parent(f).expect("nonterminal") {
            Parent::Root => Parent::Root,
            Parent::Node(p) => Parent::Node(node_id(p)),
        };
        nodes.push((f, category, parent, lp));
    }
    let structure_ok = chunk.reliable;
    let nodes = nodes
        .into_iter()
        .map(|(f, category, parent, log_probability)| {
            let (label, reliable) = if f == frag_root {
                (FunctionLabel::root(), true)
            } else {
                let (l, ok) = labels_of[&f].clone();
                (l, ok && structure_ok)
            };
            ProposedNode {
                id: node_id(f),
                category,
                label,
                parent,
                reliable,
                log_probability,
            }
        })
        .collect();
    for t in frag.terminal_ids() {
        let Some(Parent::Node(p)) = frag.parent(t) else { continue };
        let (label, ok) = labels_of[&t].clone();
        edges.push(ProposedEdge {
            node: node_id(t),
            label,
            parent: node_id(p),
            reliable: ok && structure_ok,
        });
    }
    Ok(Proposal {
        root,
        category: flat.category.clone(),
        category_reliable: flat.category_reliable,
        category_gap: finite(flat.category_gap),
        nodes,
        edges,
        structure: Some(StructureInfo {
            tags: chunk.tags.iter().map(|t| t.to_string()).collect(),
            log_probability: finite(chunk.log_prob),
            gap: finite(chunk.gap),
            reliable: chunk.reliable,
        }),
    })
}
