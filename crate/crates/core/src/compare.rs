//! Comparison of two independent annotations of the same sentence.
//!
//! Nonterminals are aligned by identical yield sets (nodes sharing a yield,
//! as in unary chains, pair up top-down). Terminals align by position.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::graph::{NodeId, Parent, Structure, SyntaxGraph};
use crate::label::FunctionLabel;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InconsistencyKind {
    TokenMismatch,
    NodeMissing,
    CategoryMismatch,
    FunctionMismatch,
    AttachmentMismatch,
}

impl InconsistencyKind {
    pub fn name(self) -> &'static str {
        match self {
            InconsistencyKind::TokenMismatch => "token-mismatch",
            InconsistencyKind::NodeMissing => "node-missing",
            InconsistencyKind::CategoryMismatch => "category-mismatch",
            InconsistencyKind::FunctionMismatch => "function-mismatch",
            InconsistencyKind::AttachmentMismatch => "attachment-mismatch",
        }
    }
}

impl fmt::Display for InconsistencyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One side's view of an implicated node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeDescriptor {
    pub node: NodeId,
    /// Category for nonterminals, part-of-speech tag for terminals.
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    pub function: FunctionLabel,
    #[serde(rename = "yield")]
    pub yield_set: Vec<usize>,
    /// `None` when the parent is the virtual root.
    pub parent_yield: Option<Vec<usize>>,
}

impl fmt::Display for NodeDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let y = |v: &[usize]| {
            v.iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}:{}", self.node, self.tag)?;
        if let Some(form) = &self.form {
            write!(f, ":{form}")?;
        }
        write!(f, ":{}:{{{}}}", self.function, y(&self.yield_set))?;
        match &self.parent_yield {
            Some(p) => write!(f, "^{{{}}}", y(p)),
            None => write!(f, "^root"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inconsistency {
    pub sentence_id: String,
    pub kind: InconsistencyKind,
    pub left: Option<NodeDescriptor>,
    pub right: Option<NodeDescriptor>,
    pub note: String,
}

impl Inconsistency {
    fn sort_key(&self) -> (usize, InconsistencyKind, Vec<usize>, u8) {
        let (side, d) = match (&self.left, &self.right) {
            (Some(d), _) => (0, Some(d)),
            (None, Some(d)) => (1, Some(d)),
            (None, None) => (0, None),
        };
        let y = d.map(|d| d.yield_set.clone()).unwrap_or_default();
        (y.first().copied().unwrap_or(0), self.kind, y, side)
    }

    /// The same inconsistency seen from the other annotator's side.
    pub fn swapped(&self) -> Inconsistency {
        Inconsistency {
            sentence_id: self.sentence_id.clone(),
            kind: self.kind,
            left: self.right.clone(),
            right: self.left.clone(),
            note: self.note.clone(),
        }
    }

    /// `sentence<TAB>kind<TAB>left<TAB>right<TAB>note`, `-` for an absent side.
    pub fn to_line(&self) -> String {
        let side = |d: &Option<NodeDescriptor>| d.as_ref().map_or("-".to_owned(), |d| d.to_string());
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.sentence_id,
            self.kind,
            side(&self.left),
            side(&self.right),
            self.note
        )
    }
}

fn descriptor(g: &SyntaxGraph, st: &Structure, node: NodeId) -> NodeDescriptor {
    let edge = g.edge(node).expect("node exists");
    NodeDescriptor {
        node,
        tag: g.child_tag(node).unwrap_or_default().to_owned(),
        form: g.token(node).map(|t| t.form.clone()),
        function: edge.label.clone(),
        yield_set: st.yield_of(node).to_vec(),
        parent_yield: edge.parent.node().map(|p| st.yield_of(p).to_vec()),
    }
}

/// Pairs of aligned nonterminals plus the unmatched ones on each side.
struct Alignment {
    pairs: Vec<(NodeId, NodeId)>,
    only_left: Vec<NodeId>,
    only_right: Vec<NodeId>,
}

fn align(a: &SyntaxGraph, sa: &Structure, b: &SyntaxGraph, sb: &Structure) -> Alignment {
    let group = |g: &SyntaxGraph, st: &Structure| {
        let mut map: BTreeMap<Vec<usize>, Vec<NodeId>> = BTreeMap::new();
        for n in g.nonterminal_ids() {
            map.entry(st.yield_of(n).to_vec()).or_default().push(n);
        }
        for nodes in map.values_mut() {
            nodes.sort_by_key(|n| (g.depth(*n).unwrap_or(usize::MAX), *n));
        }
        map
    };
    let ga = group(a, sa);
    let mut gb = group(b, sb);
    let mut out = Alignment {
        pairs: Vec::new(),
        only_left: Vec::new(),
        only_right: Vec::new(),
    };
    for (y, left) in ga {
        let right = gb.remove(&y).unwrap_or_default();
        for i in 0..left.len().max(right.len()) {
            match (left.get(i), right.get(i)) {
                (Some(&l), Some(&r)) => out.pairs.push((l, r)),
                (Some(&l), None) => out.only_left.push(l),
                (None, Some(&r)) => out.only_right.push(r),
                (None, None) => unreachable!(),
            }
        }
    }
    out.only_right.extend(gb.into_values().flatten());
    out
}

fn token_inconsistencies(a: &SyntaxGraph, b: &SyntaxGraph) -> Vec<Inconsistency> {
    let sid = a.sentence_id().to_owned();
    if a.len() != b.len() {
        return vec![Inconsistency {
            sentence_id: sid,
            kind: InconsistencyKind::TokenMismatch,
            left: None,
            right: None,
            note: format!("{} vs {} tokens", a.len(), b.len()),
        }];
    }
    let (sa, sb) = (a.structure(), b.structure());
    a.tokens()
        .iter()
        .zip(b.tokens())
        .enumerate()
        .filter(|(_, (x, y))| x.form != y.form || x.pos != y.pos)
        .map(|(p, (x, y))| Inconsistency {
            sentence_id: sid.clone(),
            kind: InconsistencyKind::TokenMismatch,
            left: Some(descriptor(a, &sa, NodeId::terminal(p))),
            right: Some(descriptor(b, &sb, NodeId::terminal(p))),
            note: format!("{}/{} vs {}/{}", x.form, x.pos, y.form, y.pos),
        })
        .collect()
}

/// Inconsistencies between two annotations of one sentence, ordered by the
/// leftmost position of the implicated node, then kind.
pub fn align_and_compare(a: &SyntaxGraph, b: &SyntaxGraph) -> Result<Vec<Inconsistency>, Error> {
    if a.sentence_id() != b.sentence_id() {
        return Err(Error::SentenceMismatch {
            left: a.sentence_id().to_owned(),
            right: b.sentence_id().to_owned(),
        });
    }
    let tokens = token_inconsistencies(a, b);
    if !tokens.is_empty() {
        return Ok(tokens);
    }

    let sid = a.sentence_id().to_owned();
    let (sa, sb) = (a.structure(), b.structure());
    let alignment = align(a, &sa, b, &sb);
    let mut out = Vec::new();

    for &n in &alignment.only_left {
        out.push(Inconsistency {
            sentence_id: sid.clone(),
            kind: InconsistencyKind::NodeMissing,
            left: Some(descriptor(a, &sa, n)),
            right: None,
            note: format!("{} node only in left annotation", a.category(n).unwrap()),
        });
    }
    for &n in &alignment.only_right {
        out.push(Inconsistency {
            sentence_id: sid.clone(),
            kind: InconsistencyKind::NodeMissing,
            left: None,
            right: Some(descriptor(b, &sb, n)),
            note: format!("{} node only in right annotation", b.category(n).unwrap()),
        });
    }

    let matched_left: HashMap<NodeId, NodeId> = alignment.pairs.iter().copied().collect();
    let matched_right: HashMap<NodeId, NodeId> =
        alignment.pairs.iter().map(|&(l, r)| (r, l)).collect();
    let anchored = |p: Parent, matched: &HashMap<NodeId, NodeId>| match p {
        Parent::Root => true,
        Parent::Node(n) => matched.contains_key(&n),
    };

    let pairs = a
        .terminal_ids()
        .map(|t| (t, t))
        .chain(alignment.pairs.iter().copied());
    for (l, r) in pairs {
        let (dl, dr) = (descriptor(a, &sa, l), descriptor(b, &sb, r));
        let mut push = |kind, note: String| {
            out.push(Inconsistency {
                sentence_id: sid.clone(),
                kind,
                left: Some(dl.clone()),
                right: Some(dr.clone()),
                note,
            })
        };
        if let (Some(cl), Some(cr)) = (a.category(l), b.category(r)) {
            if cl != cr {
                push(InconsistencyKind::CategoryMismatch, format!("{cl} vs {cr}"));
            }
        }
        if dl.function != dr.function {
            push(
                InconsistencyKind::FunctionMismatch,
                format!("{} vs {}", dl.function, dr.function),
            );
        }
        let (pl, pr) = (a.parent(l).unwrap(), b.parent(r).unwrap());
        // differences explained by an unmatched parent are already reported
        if dl.parent_yield != dr.parent_yield
            && anchored(pl, &matched_left)
            && anchored(pr, &matched_right)
        {
            push(
                InconsistencyKind::AttachmentMismatch,
                "attached to different constituents".to_owned(),
            );
        }
    }

    out.sort_by_key(|i| i.sort_key());
    Ok(out)
}

/// Raw counts behind [`Agreement`]; they add up across sentences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementCounts {
    /// Labeled (yield, category) matches.
    pub matched: usize,
    /// Nonterminals of the left (reference) annotation.
    pub left_nodes: usize,
    /// Nonterminals of the right annotation.
    pub right_nodes: usize,
    /// Aligned non-root edges carrying the same label.
    pub labels_agreeing: usize,
    /// Aligned non-root edges.
    pub labels_compared: usize,
}

impl Add for AgreementCounts {
    type Output = AgreementCounts;

    fn add(self, o: AgreementCounts) -> AgreementCounts {
        AgreementCounts {
            matched: self.matched + o.matched,
            left_nodes: self.left_nodes + o.left_nodes,
            right_nodes: self.right_nodes + o.right_nodes,
            labels_agreeing: self.labels_agreeing + o.labels_agreeing,
            labels_compared: self.labels_compared + o.labels_compared,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub label_accuracy: f64,
    pub counts: AgreementCounts,
}

impl Agreement {
    /// Precision is taken over the right annotation, recall over the left.
    /// Two annotations without any nonterminal agree perfectly.
    pub fn from_counts(c: AgreementCounts) -> Agreement {
        let both_empty = c.left_nodes == 0 && c.right_nodes == 0;
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                if both_empty { 1.0 } else { 0.0 }
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(c.matched, c.right_nodes);
        let recall = ratio(c.matched, c.left_nodes);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let label_accuracy = if c.labels_compared == 0 {
            1.0
        } else {
            c.labels_agreeing as f64 / c.labels_compared as f64
        };
        Agreement {
            precision,
            recall,
            f1,
            label_accuracy,
            counts: c,
        }
    }
}

pub fn agreement_counts(a: &SyntaxGraph, b: &SyntaxGraph) -> Result<AgreementCounts, Error> {
    if a.len() != b.len()
        || a.tokens()
            .iter()
            .zip(b.tokens())
            .any(|(x, y)| x.form != y.form || x.pos != y.pos)
    {
        return Err(Error::TokenMismatch(a.sentence_id().to_owned()));
    }
    let (sa, sb) = (a.structure(), b.structure());

    let mut bag: HashMap<(Vec<usize>, &str), isize> = HashMap::new();
    for n in a.nonterminal_ids() {
        *bag.entry((sa.yield_of(n).to_vec(), a.category(n).unwrap().as_str()))
            .or_default() += 1;
    }
    let mut matched = 0;
    for n in b.nonterminal_ids() {
        if let Some(c) = bag.get_mut(&(sb.yield_of(n).to_vec(), b.category(n).unwrap().as_str())) {
            if *c > 0 {
                *c -= 1;
                matched += 1;
            }
        }
    }

    let alignment = align(a, &sa, b, &sb);
    let mut labels_agreeing = 0;
    let mut labels_compared = 0;
    let pairs = a
        .terminal_ids()
        .map(|t| (t, t))
        .chain(
            alignment
                .pairs
                .iter()
                .copied()
                .filter(|(l, r)| a.category(*l) == b.category(*r)),
        );
    for (l, r) in pairs {
        let (el, er) = (a.edge(l).unwrap(), b.edge(r).unwrap());
        if el.parent == Parent::Root || er.parent == Parent::Root {
            continue;
        }
        labels_compared += 1;
        if el.label == er.label {
            labels_agreeing += 1;
        }
    }

    Ok(AgreementCounts {
        matched,
        left_nodes: a.nonterminals().len(),
        right_nodes: b.nonterminals().len(),
        labels_agreeing,
        labels_compared,
    })
}

/// Labeled bracket agreement with `a` as reference.
pub fn agreement_metrics(a: &SyntaxGraph, b: &SyntaxGraph) -> Result<Agreement, Error> {
    agreement_counts(a, b).map(Agreement::from_counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::{sentence_one, sentence_two};
    use crate::{Edge, Token};

    #[test]
    fn identical_graphs_agree() {
        for g in [sentence_one(), sentence_two()] {
            assert_eq!(align_and_compare(&g, &g).unwrap(), vec![]);
            let m = agreement_metrics(&g, &g).unwrap();
            assert_eq!((m.precision, m.recall, m.f1, m.label_accuracy), (1.0, 1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn single_function_mismatch() {
        let a = sentence_two();
        let mut b = a.clone();
        b.set_label(NodeId(3), "SB".into()).unwrap();
        let diffs = align_and_compare(&a, &b).unwrap();
        assert_eq!(diffs.len(), 1);
        assert_eq!(diffs[0].kind, InconsistencyKind::FunctionMismatch);
        assert_eq!(diffs[0].left.as_ref().unwrap().node, NodeId(3));
        let m = agreement_metrics(&a, &b).unwrap();
        assert_eq!(m.f1, 1.0);
        assert_eq!(m.counts.labels_compared, 6);
        assert_eq!(m.counts.labels_agreeing, 5);
    }

    #[test]
    fn differing_yields_give_node_missing_on_both_sides() {
        let a = sentence_two();
        let mut b = a.clone();
        b.attach(NodeId(0), Parent::Node(NodeId(501)), "PD").unwrap();
        let diffs = align_and_compare(&a, &b).unwrap();
        let kinds: Vec<_> = diffs.iter().map(|d| (d.kind, d.left.is_some(), d.right.is_some())).collect();
        assert_eq!(
            kinds,
            vec![
                (InconsistencyKind::NodeMissing, true, false),
                (InconsistencyKind::NodeMissing, false, true),
            ]
        );
        assert_eq!(diffs[0].left.as_ref().unwrap().yield_set, vec![0, 3, 4]);
        assert_eq!(diffs[1].right.as_ref().unwrap().yield_set, vec![3, 4]);
    }

    #[test]
    fn token_mismatch_suppresses_everything_else() {
        let a = sentence_two();
        let mut b = a.clone();
        b.token_mut(2).unwrap().pos = "PPOSAT".into();
        b.set_label(NodeId(3), "SB".into()).unwrap();
        let diffs = align_and_compare(&a, &b).unwrap();
        assert_eq!(diffs.len(), 1);
        assert_eq!(diffs[0].kind, InconsistencyKind::TokenMismatch);
        assert!(agreement_metrics(&a, &b).is_err());
    }

    #[test]
    fn different_sentences_are_an_error() {
        let a = sentence_two();
        let mut b = a.clone();
        b.set_sentence_id("other");
        assert!(matches!(
            align_and_compare(&a, &b),
            Err(Error::SentenceMismatch { .. })
        ));
    }

    #[test]
    fn recall_with_one_node_missing() {
        // four nonterminals in a, b lacks one of them
        let tokens: Vec<Token> = ["a", "b", "c", "d"].iter().map(|f| Token::new(*f, "NN")).collect();
        let mut a = SyntaxGraph::new("r", tokens);
        a.add_nonterminal(NodeId(500), "NP", Edge::new(Parent::Node(NodeId(502)), "SB")).unwrap();
        a.add_nonterminal(NodeId(501), "NP", Edge::new(Parent::Node(NodeId(502)), "OA")).unwrap();
        a.add_nonterminal(NodeId(502), "VP", Edge::new(Parent::Node(NodeId(503)), "OC")).unwrap();
        a.add_nonterminal(NodeId(503), "S", Edge::root()).unwrap();
        for (t, p) in [(0, 500), (1, 500), (2, 501), (3, 501)] {
            a.attach(NodeId(t), Parent::Node(NodeId(p)), "NK").unwrap();
        }
        let mut b = a.clone();
        b.attach(NodeId(500), Parent::Node(NodeId(503)), "SB").unwrap();
        b.attach(NodeId(501), Parent::Node(NodeId(503)), "OA").unwrap();
        b.remove_nonterminal(NodeId(502)).unwrap();
        let m = agreement_metrics(&a, &b).unwrap();
        assert_eq!(m.recall, 0.75);
        assert_eq!(m.precision, 1.0);
        let back = agreement_metrics(&b, &a).unwrap();
        assert_eq!(back.precision, m.recall);
    }

    #[test]
    fn disjoint_structures() {
        let tokens: Vec<Token> = ["a", "b", "c"].iter().map(|f| Token::new(*f, "NN")).collect();
        let mut a = SyntaxGraph::new("d", tokens.clone());
        a.add_nonterminal(NodeId(500), "NP", Edge::root()).unwrap();
        a.attach(NodeId(0), Parent::Node(NodeId(500)), "NK").unwrap();
        a.attach(NodeId(1), Parent::Node(NodeId(500)), "NK").unwrap();
        let mut b = SyntaxGraph::new("d", tokens);
        b.add_nonterminal(NodeId(500), "NP", Edge::root()).unwrap();
        b.attach(NodeId(1), Parent::Node(NodeId(500)), "NK").unwrap();
        b.attach(NodeId(2), Parent::Node(NodeId(500)), "NK").unwrap();
        let m = agreement_metrics(&a, &b).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn report_line_format() {
        let a = sentence_two();
        let mut b = a.clone();
        b.set_label(NodeId(3), "SB".into()).unwrap();
        let line = align_and_compare(&a, &b).unwrap()[0].to_line();
        assert_eq!(
            line,
            "s2\tfunction-mismatch\t3:ADV:nie:MO:{3}^{0,3,4}\t3:ADV:nie:SB:{3}^{0,3,4}\tMO vs SB"
        );
    }
}
