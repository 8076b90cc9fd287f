use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::graph::{NodeId, Parent, SyntaxGraph, MAX_TOKENS};
use crate::label::Inventory;

/// How much `validate` checks. Label membership is only tested in strict
/// mode, against the given inventory.
#[derive(Clone, Copy, Debug)]
pub enum Strictness<'a> {
    Strict(&'a Inventory),
    Lenient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    TokenLimit,
    EmptyForm,
    EmptyLabel,
    DanglingParent,
    TerminalParent,
    Cycle,
    Childless,
    DuplicateHead,
    UnknownPos,
    UnknownCategory,
    UnknownFunction,
    RootLabel,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::TokenLimit => "token-limit",
            Rule::EmptyForm => "empty-form",
            Rule::EmptyLabel => "empty-label",
            Rule::DanglingParent => "dangling-parent",
            Rule::TerminalParent => "terminal-parent",
            Rule::Cycle => "cycle",
            Rule::Childless => "childless",
            Rule::DuplicateHead => "duplicate-head",
            Rule::UnknownPos => "unknown-pos",
            Rule::UnknownCategory => "unknown-category",
            Rule::UnknownFunction => "unknown-function",
            Rule::RootLabel => "root-label",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub node: Option<NodeId>,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(n) => write!(f, "{} at {}: {}", self.rule.name(), n, self.message),
            None => write!(f, "{}: {}", self.rule.name(), self.message),
        }
    }
}

impl SyntaxGraph {
    /// Every broken invariant, in node order. Empty means the graph is valid.
    pub fn validate(&self, strictness: Strictness<'_>) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |node: Option<NodeId>, rule: Rule, message: String| {
            out.push(Violation {
                node,
                rule,
                message,
            })
        };

        if self.len() > MAX_TOKENS {
            push(None, Rule::TokenLimit, format!("{} tokens", self.len()));
        }

        for id in self.node_ids() {
            let edge = self.edge(id).expect("listed node has an edge");
            if let Some(t) = self.token(id) {
                if t.form.is_empty() {
                    push(Some(id), Rule::EmptyForm, "empty word form".into());
                }
                if t.pos.is_empty() {
                    push(Some(id), Rule::EmptyLabel, "empty part-of-speech tag".into());
                }
            }
            if let Some(c) = self.category(id) {
                if c.is_empty() {
                    push(Some(id), Rule::EmptyLabel, "empty category".into());
                }
            }
            if edge.label.is_empty() {
                push(Some(id), Rule::EmptyLabel, "empty edge label".into());
            }
            if let Parent::Node(p) = edge.parent {
                if self.is_terminal(p) {
                    push(Some(id), Rule::TerminalParent, format!("parent {p} is a terminal"));
                } else if !self.is_nonterminal(p) {
                    push(Some(id), Rule::DanglingParent, format!("parent {p} does not exist"));
                }
            }
        }

        // acyclicity: one violation per cycle, reported at its smallest id
        let mut reported: BTreeSet<NodeId> = BTreeSet::new();
        for id in self.nonterminal_ids() {
            if let Some(cycle) = self.cycle_through(id) {
                if cycle.iter().any(|n| reported.contains(n)) {
                    continue;
                }
                let first = *cycle.iter().min().unwrap();
                let listing = cycle
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join("→");
                push(Some(first), Rule::Cycle, format!("parent cycle {listing}"));
                reported.extend(cycle);
            }
        }

        let children = self.child_map();
        for id in self.nonterminal_ids() {
            let kids = children.get(&Parent::Node(id)).map(Vec::as_slice).unwrap_or(&[]);
            if kids.is_empty() {
                push(Some(id), Rule::Childless, "nonterminal without children".into());
            }
            let heads: Vec<NodeId> = kids
                .iter()
                .copied()
                .filter(|k| self.edge(*k).is_some_and(|e| e.label.is_head()))
                .collect();
            if heads.len() > 1 {
                let listing = heads.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(", ");
                push(Some(id), Rule::DuplicateHead, format!("head children {listing}"));
            }
        }

        if let Strictness::Strict(inv) = strictness {
            for id in self.node_ids() {
                let edge = self.edge(id).unwrap();
                if let Some(t) = self.token(id) {
                    if !inv.has_pos(&t.pos) {
                        push(Some(id), Rule::UnknownPos, format!("tag `{}` not in {}", t.pos, inv.name));
                    }
                }
                if let Some(c) = self.category(id) {
                    if !inv.has_category(c) {
                        push(Some(id), Rule::UnknownCategory, format!("category `{c}` not in {}", inv.name));
                    }
                }
                if !inv.has_function(&edge.label) {
                    push(Some(id), Rule::UnknownFunction, format!("label `{}` not in {}", edge.label, inv.name));
                }
                let at_root = edge.parent == Parent::Root;
                if at_root != edge.label.is_root() {
                    let msg = if at_root {
                        format!("root edge labelled `{}`", edge.label)
                    } else {
                        "root label on an inner edge".to_owned()
                    };
                    push(Some(id), Rule::RootLabel, msg);
                }
            }
        }

        out
    }

    /// The cycle reached by following parents from `start`, if that walk
    /// ends in a cycle containing `start`.
    fn cycle_through(&self, start: NodeId) -> Option<Vec<NodeId>> {
        let mut path = vec![start];
        let mut current = start;
        for _ in 0..=self.nonterminals().len() {
            match self.parent(current)? {
                Parent::Root => return None,
                Parent::Node(p) if p == start => return Some(path),
                Parent::Node(p) => {
                    if !self.is_nonterminal(p) || path.contains(&p) {
                        return None;
                    }
                    path.push(p);
                    current = p;
                }
            }
        }
        None
    }
}
