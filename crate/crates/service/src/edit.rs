//! Edits an annotator applies to one sentence.
//!
//! Every edit is checked against the graph it is applied to and the result
//! must pass validation; a rejected edit leaves the graph untouched.

use std::collections::BTreeSet;

use argbank_core::{Category, Edge, FunctionLabel, NodeId, Parent, Strictness, SyntaxGraph};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

/// A nonterminal created by an accepted proposal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewNode {
    pub id: NodeId,
    pub category: Category,
    pub label: FunctionLabel,
    /// The virtual root (`0`) or a node created earlier in the same edit.
    pub parent: Parent,
}

/// Attachment of an existing root-level node below a created nonterminal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewEdge {
    pub node: NodeId,
    pub label: FunctionLabel,
    pub parent: NodeId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Edit {
    /// Adds a (possibly edited) proposal to the graph.
    Accept { nodes: Vec<NewNode>, edges: Vec<NewEdge> },
    /// Changes the edge label of a node, the category of a nonterminal, or
    /// both.
    Relabel {
        node: NodeId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<FunctionLabel>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        category: Option<Category>,
    },
    /// Moves a node below another parent. Without a label the node keeps
    /// its current one; moving to the root uses the root label.
    Regroup {
        node: NodeId,
        parent: Parent,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<FunctionLabel>,
    },
}

fn bad(msg: impl Into<String>) -> ServiceError {
    ServiceError::BadEdit(msg.into())
}

/// The graph after `edit`, or why the edit is refused.
pub fn apply_edit(graph: &SyntaxGraph, edit: &Edit) -> Result<SyntaxGraph, ServiceError> {
    let mut g = graph.clone();
    match edit {
        Edit::Accept { nodes, edges } => {
            if nodes.is_empty() {
                return Err(bad("accept creates no node"));
            }
            let mut created = BTreeSet::new();
            for n in nodes {
                if let Parent::Node(p) = n.parent {
                    if !created.contains(&p) {
                        return Err(bad(format!("parent {p} of new node {} is not created before it", n.id)));
                    }
                }
                g.check_nonterminal_id(n.id)?;
                g.add_nonterminal(n.id, n.category.clone(), Edge::new(n.parent, n.label.clone()))?;
                created.insert(n.id);
            }
            let mut moved = BTreeSet::new();
            for e in edges {
                if created.contains(&e.node) || !graph.contains(e.node) {
                    return Err(ServiceError::UnknownNode(e.node));
                }
                if !moved.insert(e.node) {
                    return Err(bad(format!("node {} is attached twice", e.node)));
                }
                if let Some(Parent::Node(p)) = graph.parent(e.node) {
                    return Err(ServiceError::AlreadyAttached { node: e.node, parent: p });
                }
                if !created.contains(&e.parent) {
                    return Err(bad(format!("{} is not a node of this proposal", e.parent)));
                }
                g.set_edge(e.node, Edge::new(Parent::Node(e.parent), e.label.clone()))?;
            }
        }
        Edit::Relabel { node, label, category } => {
            if !g.contains(*node) {
                return Err(ServiceError::UnknownNode(*node));
            }
            if label.is_none() && category.is_none() {
                return Err(bad("relabel changes nothing"));
            }
            if let Some(l) = label {
                g.set_label(*node, l.clone())?;
            }
            if let Some(c) = category {
                g.set_category(*node, c.clone())?;
            }
        }
        Edit::Regroup { node, parent, label } => {
            let current = g.edge(*node).ok_or(ServiceError::UnknownNode(*node))?.clone();
            if let Parent::Node(p) = parent {
                if !g.is_nonterminal(*p) {
                    return Err(bad(format!("{p} is not a nonterminal")));
                }
            }
            let label = match (label, parent) {
                (Some(l), _) => l.clone(),
                (None, Parent::Root) => FunctionLabel::root(),
                (None, Parent::Node(_)) if current.label.is_root() => {
                    return Err(bad("a node leaving the root needs a label"));
                }
                (None, Parent::Node(_)) => current.label,
            };
            g.set_edge(*node, Edge::new(*parent, label))?;
        }
    }
    let violations = g.validate(Strictness::Lenient);
    if !violations.is_empty() {
        return Err(ServiceError::Invalid(violations));
    }
    Ok(g)
}
