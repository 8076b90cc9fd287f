//! Projection of crossing-branch graphs onto continuous constituent trees.
//!
//! Discontinuous nodes are repaired bottom-up. For each one, the block that
//! contains the head child stays in place (without a head: the largest
//! block, leftmost on ties). Every child in another block is re-attached to
//! the node's parent, the lowest ancestor at which the attachment cannot
//! cross anything since the parent's own yield is unchanged. The first time
//! a node moves, a trace co-indexed with it is left at its original parent.
//! Repeating this until nothing is discontinuous terminates because every
//! move makes some terminals strictly shallower.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::{Edge, NodeId, Parent, SyntaxGraph};
use crate::label::FunctionLabel;
use crate::validate::Strictness;
use crate::Error;

/// A trace pseudo-terminal: it sits below `site` with the original edge
/// label and is co-indexed with the moved node `filler`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub id: u32,
    pub filler: NodeId,
    pub site: NodeId,
    pub label: FunctionLabel,
}

/// Bijection between trace ids and moved nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TraceTable {
    traces: Vec<Trace>,
}

impl TraceTable {
    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn by_filler(&self, filler: NodeId) -> Option<&Trace> {
        self.traces.iter().find(|t| t.filler == filler)
    }

    pub fn by_id(&self, id: u32) -> Option<&Trace> {
        self.traces.iter().find(|t| t.id == id)
    }

    /// Traces located below `site`, in id order.
    pub fn at_site(&self, site: NodeId) -> impl Iterator<Item = &Trace> {
        self.traces.iter().filter(move |t| t.site == site)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub graph: SyntaxGraph,
    pub traces: TraceTable,
}

impl Projection {
    /// Undo the re-attachments: every filler goes back below its trace site.
    pub fn restore(&self) -> SyntaxGraph {
        let mut g = self.graph.clone();
        for t in &self.traces.traces {
            g.set_edge(t.filler, Edge::new(Parent::Node(t.site), t.label.clone()))
                .expect("filler exists in projected graph");
        }
        g
    }
}

pub fn to_phenogrammatical(graph: &SyntaxGraph) -> Result<Projection, Error> {
    let violations = graph.validate(Strictness::Lenient);
    if !violations.is_empty() {
        return Err(Error::Invalid {
            sentence_id: graph.sentence_id().to_owned(),
            violations,
        });
    }

    let mut g = graph.clone();
    let mut moved: BTreeMap<NodeId, Trace> = BTreeMap::new();
    let mut next_trace = 1;

    loop {
        let st = g.structure();
        let target = g
            .nonterminal_ids()
            .filter(|&n| st.is_discontinuous(n))
            .map(|n| (g.depth(n).unwrap_or(0), n))
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        let Some((_, node)) = target else { break };

        let blocks = g.blocks(node)?.blocks;
        let kept = match g.head_child(node)? {
            Some(head) => {
                let p = st.leftmost(head).expect("head has a yield");
                blocks.iter().position(|b| b.0 <= p && p <= b.1).unwrap()
            }
            None => {
                // largest block, leftmost on ties
                let mut best = 0;
                for (i, b) in blocks.iter().enumerate() {
                    if b.1 - b.0 > blocks[best].1 - blocks[best].0 {
                        best = i;
                    }
                }
                best
            }
        };
        let (lo, hi) = blocks[kept];
        let new_parent = g.parent(node).expect("node exists");

        for child in st.children_of(Parent::Node(node)).to_vec() {
            let first = st.leftmost(child).expect("child has a yield");
            if lo <= first && first <= hi {
                continue;
            }
            let edge = g.edge(child).unwrap().clone();
            moved.entry(child).or_insert_with(|| {
                let t = Trace {
                    id: next_trace,
                    filler: child,
                    site: node,
                    label: edge.label.clone(),
                };
                next_trace += 1;
                t
            });
            let label = match new_parent {
                Parent::Root => FunctionLabel::root(),
                Parent::Node(_) => edge.label,
            };
            g.set_edge(child, Edge::new(new_parent, label))?;
        }
    }

    let mut traces: Vec<Trace> = moved.into_values().collect();
    traces.sort_by_key(|t| t.id);
    Ok(Projection {
        graph: g,
        traces: TraceTable { traces },
    })
}
