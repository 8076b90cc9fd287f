use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::label::{Category, FunctionLabel, PosTag};
use crate::Error;

/// Lowest id a nonterminal may take.
pub const FIRST_NONTERMINAL: u32 = 500;
/// Largest supported sentence length.
pub const MAX_TOKENS: usize = 5_000;
/// Largest supported node id.
pub const MAX_NODE_ID: u32 = 10_000;

/// Identifier of a terminal or nonterminal within one sentence.
///
/// Terminal ids equal token positions. Nonterminal ids start at 500 and must
/// also lie above the last token position, so the two ranges never overlap.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn terminal(position: usize) -> Self {
        NodeId(position as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Parent of a node: the virtual root or a nonterminal.
///
/// The root is a separate variant, so it can never be confused with
/// terminal 0. On the wire it is written as `0`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parent {
    Root,
    Node(NodeId),
}

impl Parent {
    pub fn node(self) -> Option<NodeId> {
        match self {
            Parent::Root => None,
            Parent::Node(id) => Some(id),
        }
    }

    pub fn wire_id(self) -> u32 {
        match self {
            Parent::Root => 0,
            Parent::Node(id) => id.0,
        }
    }

    pub fn from_wire_id(id: u32) -> Self {
        if id == 0 {
            Parent::Root
        } else {
            Parent::Node(NodeId(id))
        }
    }
}

impl fmt::Display for Parent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.wire_id())
    }
}

impl Serialize for Parent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.wire_id())
    }
}

impl<'de> Deserialize<'de> for Parent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Parent::from_wire_id(u32::deserialize(d)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub form: String,
    pub pos: PosTag,
    #[serde(default = "default_true")]
    pub pos_reliable: bool,
}

fn default_true() -> bool {
    true
}

impl Token {
    pub fn new(form: impl Into<String>, pos: impl Into<PosTag>) -> Self {
        Token {
            form: form.into(),
            pos: pos.into(),
            pos_reliable: true,
        }
    }
}

/// The edge from a node up to its parent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub parent: Parent,
    pub label: FunctionLabel,
}

impl Edge {
    pub fn new(parent: Parent, label: impl Into<FunctionLabel>) -> Self {
        Edge {
            parent,
            label: label.into(),
        }
    }

    pub fn root() -> Self {
        Edge::new(Parent::Root, FunctionLabel::root())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nonterminal {
    pub category: Category,
    pub edge: Edge,
}

/// Maximal contiguous intervals `[lo, hi]` of a node's yield.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct YieldBlocks {
    pub node: NodeId,
    pub blocks: Vec<(usize, usize)>,
}

impl YieldBlocks {
    pub fn from_positions(node: NodeId, positions: &[usize]) -> Self {
        let mut blocks: Vec<(usize, usize)> = Vec::new();
        for &p in positions {
            match blocks.last_mut() {
                Some((_, hi)) if *hi + 1 == p => *hi = p,
                _ => blocks.push((p, p)),
            }
        }
        YieldBlocks { node, blocks }
    }

    pub fn is_discontinuous(&self) -> bool {
        self.blocks.len() > 1
    }
}

/// One sentence of the treebank.
///
/// Graphs may be built in an invalid state (the export parser and the tests
/// need that); [`SyntaxGraph::validate`] reports what is wrong.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxGraph {
    sentence_id: String,
    tokens: Vec<Token>,
    terminal_edges: Vec<Edge>,
    nonterminals: BTreeMap<NodeId, Nonterminal>,
    comment: Option<String>,
}

impl SyntaxGraph {
    /// A graph whose tokens all hang directly below the virtual root.
    pub fn new(sentence_id: impl Into<String>, tokens: Vec<Token>) -> Self {
        let terminal_edges = vec![Edge::root(); tokens.len()];
        SyntaxGraph {
            sentence_id: sentence_id.into(),
            tokens,
            terminal_edges,
            nonterminals: BTreeMap::new(),
            comment: None,
        }
    }

    pub fn sentence_id(&self) -> &str {
        &self.sentence_id
    }

    pub fn set_sentence_id(&mut self, id: impl Into<String>) {
        self.sentence_id = id.into();
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token_mut(&mut self, position: usize) -> Option<&mut Token> {
        self.tokens.get_mut(position)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn comment(&self) -> Option<&str> {
        self.comment.as_deref()
    }

    pub fn set_comment(&mut self, comment: Option<String>) {
        self.comment = comment;
    }

    pub fn nonterminals(&self) -> &BTreeMap<NodeId, Nonterminal> {
        &self.nonterminals
    }

    pub fn nonterminal_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nonterminals.keys().copied()
    }

    pub fn terminal_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.tokens.len()).map(NodeId::terminal)
    }

    /// Terminals followed by nonterminals in ascending id order.
    pub fn node_ids(&self) -> Vec<NodeId> {
        self.terminal_ids().chain(self.nonterminal_ids()).collect()
    }

    pub fn is_terminal(&self, id: NodeId) -> bool {
        id.index() < self.tokens.len()
    }

    pub fn is_nonterminal(&self, id: NodeId) -> bool {
        self.nonterminals.contains_key(&id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.is_terminal(id) || self.is_nonterminal(id)
    }

    pub fn token(&self, id: NodeId) -> Option<&Token> {
        if self.is_terminal(id) {
            self.tokens.get(id.index())
        } else {
            None
        }
    }

    pub fn category(&self, id: NodeId) -> Option<&Category> {
        self.nonterminals.get(&id).map(|n| &n.category)
    }

    pub fn edge(&self, id: NodeId) -> Option<&Edge> {
        if self.is_terminal(id) {
            self.terminal_edges.get(id.index())
        } else {
            self.nonterminals.get(&id).map(|n| &n.edge)
        }
    }

    pub fn parent(&self, id: NodeId) -> Option<Parent> {
        self.edge(id).map(|e| e.parent)
    }

    /// The tag a node contributes to its parent's child sequence: the POS
    /// tag for terminals, the category for nonterminals.
    pub fn child_tag(&self, id: NodeId) -> Option<&str> {
        match self.token(id) {
            Some(t) => Some(t.pos.as_str()),
            None => self.category(id).map(|c| c.as_str()),
        }
    }

    /// Smallest id a new nonterminal may take.
    pub fn next_free_id(&self) -> NodeId {
        let floor = FIRST_NONTERMINAL.max(self.tokens.len() as u32);
        let next = self
            .nonterminals
            .keys()
            .next_back()
            .map(|id| id.0 + 1)
            .unwrap_or(floor);
        NodeId(next.max(floor))
    }

    /// Checks that `id` may name a new nonterminal of this graph.
    pub fn check_nonterminal_id(&self, id: NodeId) -> Result<(), Error> {
        let invalid = |reason: &str| {
            Err(Error::InvalidNodeId {
                id,
                reason: reason.to_owned(),
            })
        };
        if id.0 < FIRST_NONTERMINAL {
            return invalid("nonterminal ids start at 500");
        }
        if id.index() < self.tokens.len() {
            return invalid("id collides with a terminal position");
        }
        if id.0 > MAX_NODE_ID {
            return invalid("id exceeds the supported maximum");
        }
        if self.nonterminals.contains_key(&id) {
            return invalid("duplicate nonterminal id");
        }
        Ok(())
    }

    pub fn add_nonterminal(
        &mut self,
        id: NodeId,
        category: impl Into<Category>,
        edge: Edge,
    ) -> Result<(), Error> {
        self.check_nonterminal_id(id)?;
        self.nonterminals.insert(
            id,
            Nonterminal {
                category: category.into(),
                edge,
            },
        );
        Ok(())
    }

    pub fn remove_nonterminal(&mut self, id: NodeId) -> Result<Nonterminal, Error> {
        self.nonterminals.remove(&id).ok_or(Error::UnknownNode(id))
    }

    pub fn set_edge(&mut self, id: NodeId, edge: Edge) -> Result<(), Error> {
        if self.is_terminal(id) {
            self.terminal_edges[id.index()] = edge;
        } else {
            self.nonterminals
                .get_mut(&id)
                .ok_or(Error::UnknownNode(id))?
                .edge = edge;
        }
        Ok(())
    }

    /// Convenience for fixtures: attach `child` below `parent` with `label`.
    pub fn attach(
        &mut self,
        child: NodeId,
        parent: Parent,
        label: impl Into<FunctionLabel>,
    ) -> Result<(), Error> {
        self.set_edge(child, Edge::new(parent, label))
    }

    pub fn set_label(&mut self, id: NodeId, label: FunctionLabel) -> Result<(), Error> {
        let mut edge = self.edge(id).ok_or(Error::UnknownNode(id))?.clone();
        edge.label = label;
        self.set_edge(id, edge)
    }

    pub fn set_category(&mut self, id: NodeId, category: Category) -> Result<(), Error> {
        self.nonterminals
            .get_mut(&id)
            .ok_or(Error::UnknownNode(id))?
            .category = category;
        Ok(())
    }

    /// Children of `parent`, ordered by the leftmost terminal of their
    /// yields (ties and empty yields by id).
    pub fn children(&self, parent: Parent) -> Vec<NodeId> {
        self.structure().children_of(parent).to_vec()
    }

    /// Sorted terminal positions dominated by `node` (reflexively).
    pub fn yield_of(&self, node: NodeId) -> Result<Vec<usize>, Error> {
        if self.is_terminal(node) {
            return Ok(vec![node.index()]);
        }
        if !self.is_nonterminal(node) {
            return Err(Error::UnknownNode(node));
        }
        let children = self.child_map();
        let mut seen = BTreeSet::new();
        let mut out = BTreeSet::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            if self.is_terminal(n) {
                out.insert(n.index());
            } else if let Some(kids) = children.get(&Parent::Node(n)) {
                stack.extend(kids.iter().copied());
            }
        }
        Ok(out.into_iter().collect())
    }

    pub fn blocks(&self, node: NodeId) -> Result<YieldBlocks, Error> {
        let positions = self.yield_of(node)?;
        Ok(YieldBlocks::from_positions(node, &positions))
    }

    pub fn is_discontinuous(&self, node: NodeId) -> Result<bool, Error> {
        Ok(self.blocks(node)?.is_discontinuous())
    }

    /// The unique child of `node` whose edge is labelled `HD`.
    pub fn head_child(&self, node: NodeId) -> Result<Option<NodeId>, Error> {
        if !self.is_nonterminal(node) {
            return Err(if self.is_terminal(node) {
                Error::NotANonterminal(node)
            } else {
                Error::UnknownNode(node)
            });
        }
        let mut head = None;
        for child in self.children(Parent::Node(node)) {
            if self.edge(child).is_some_and(|e| e.label.is_head()) {
                if let Some(first) = head {
                    return Err(Error::DuplicateHead {
                        node,
                        first,
                        second: child,
                    });
                }
                head = Some(child);
            }
        }
        Ok(head)
    }

    /// Number of edges between `node` and the virtual root, or `None` when
    /// the chain of parents does not reach the root.
    pub fn depth(&self, node: NodeId) -> Option<usize> {
        let mut current = node;
        let limit = self.nonterminals.len() + 1;
        for depth in 1..=limit {
            match self.parent(current)? {
                Parent::Root => return Some(depth),
                Parent::Node(p) => current = p,
            }
        }
        None
    }

    /// Group root-level nodes under a fresh nonterminal.
    ///
    /// Returns a new graph; `self` is left untouched.
    pub fn build_increment(
        &self,
        selected: &BTreeSet<NodeId>,
        category: Category,
        labels: &BTreeMap<NodeId, FunctionLabel>,
    ) -> Result<SyntaxGraph, Error> {
        if selected.is_empty() {
            return Err(Error::EmptySelection);
        }
        for &node in selected {
            match self.parent(node) {
                None => return Err(Error::UnknownNode(node)),
                Some(Parent::Node(parent)) => return Err(Error::AlreadyAttached { node, parent }),
                Some(Parent::Root) => {}
            }
        }
        if labels.len() != selected.len() || !labels.keys().all(|k| selected.contains(k)) {
            return Err(Error::LabelMismatch);
        }
        let mut heads = labels.iter().filter(|(_, l)| l.is_head()).map(|(id, _)| *id);
        if let (Some(first), Some(second)) = (heads.next(), heads.next()) {
            let node = self.next_free_id();
            return Err(Error::DuplicateHead {
                node,
                first,
                second,
            });
        }
        let mut out = self.clone();
        let id = out.next_free_id();
        out.add_nonterminal(id, category, Edge::root())?;
        for (&child, label) in labels {
            out.set_edge(child, Edge::new(Parent::Node(id), label.clone()))?;
        }
        Ok(out)
    }

    pub(crate) fn child_map(&self) -> HashMap<Parent, Vec<NodeId>> {
        let mut map: HashMap<Parent, Vec<NodeId>> = HashMap::new();
        for id in self.node_ids() {
            if let Some(p) = self.parent(id) {
                map.entry(p).or_default().push(id);
            }
        }
        map
    }

    /// Children lists and yields of every node, computed in one pass.
    pub fn structure(&self) -> Structure {
        Structure::new(self)
    }
}

/// Precomputed children and yields of a graph.
#[derive(Clone, Debug)]
pub struct Structure {
    children: HashMap<Parent, Vec<NodeId>>,
    yields: HashMap<NodeId, Vec<usize>>,
}

impl Structure {
    fn new(graph: &SyntaxGraph) -> Self {
        let mut children = graph.child_map();
        let mut yields: HashMap<NodeId, Vec<usize>> = HashMap::new();
        for id in graph.terminal_ids() {
            yields.insert(id, vec![id.index()]);
        }
        for id in graph.nonterminal_ids() {
            // the graph may be cyclic, so every nonterminal gets its own walk
            yields.insert(id, graph.yield_of(id).unwrap_or_default());
        }
        for kids in children.values_mut() {
            kids.sort_by_key(|k| (yields[k].first().copied().unwrap_or(usize::MAX), *k));
        }
        Structure { children, yields }
    }

    pub fn children_of(&self, parent: Parent) -> &[NodeId] {
        self.children.get(&parent).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn yield_of(&self, node: NodeId) -> &[usize] {
        self.yields.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn leftmost(&self, node: NodeId) -> Option<usize> {
        self.yield_of(node).first().copied()
    }

    pub fn is_discontinuous(&self, node: NodeId) -> bool {
        let y = self.yield_of(node);
        y.windows(2).any(|w| w[1] != w[0] + 1)
    }
}

// Wire representation used by serde (JSON bodies of the annotation service).
#[derive(Serialize, Deserialize)]
struct WireGraph {
    sentence_id: String,
    tokens: Vec<WireToken>,
    nonterminals: Vec<WireNonterminal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    comment: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct WireToken {
    form: String,
    pos: PosTag,
    #[serde(default = "default_true")]
    pos_reliable: bool,
    label: FunctionLabel,
    parent: Parent,
}

#[derive(Serialize, Deserialize)]
struct WireNonterminal {
    id: NodeId,
    category: Category,
    label: FunctionLabel,
    parent: Parent,
}

impl Serialize for SyntaxGraph {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let wire = WireGraph {
            sentence_id: self.sentence_id.clone(),
            tokens: self
                .tokens
                .iter()
                .zip(&self.terminal_edges)
                .map(|(t, e)| WireToken {
                    form: t.form.clone(),
                    pos: t.pos.clone(),
                    pos_reliable: t.pos_reliable,
                    label: e.label.clone(),
                    parent: e.parent,
                })
                .collect(),
            nonterminals: self
                .nonterminals
                .iter()
                .map(|(id, n)| WireNonterminal {
                    id: *id,
                    category: n.category.clone(),
                    label: n.edge.label.clone(),
                    parent: n.edge.parent,
                })
                .collect(),
            comment: self.comment.clone(),
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SyntaxGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = WireGraph::deserialize(d)?;
        if wire.tokens.len() > MAX_TOKENS {
            return Err(serde::de::Error::custom(Error::TooManyTokens(
                wire.tokens.len(),
            )));
        }
        let mut tokens = Vec::with_capacity(wire.tokens.len());
        let mut edges = Vec::with_capacity(wire.tokens.len());
        for t in wire.tokens {
            tokens.push(Token {
                form: t.form,
                pos: t.pos,
                pos_reliable: t.pos_reliable,
            });
            edges.push(Edge::new(t.parent, t.label));
        }
        let mut graph = SyntaxGraph::new(wire.sentence_id, tokens);
        graph.terminal_edges = edges;
        graph.comment = wire.comment;
        for n in wire.nonterminals {
            graph
                .add_nonterminal(n.id, n.category, Edge::new(n.parent, n.label))
                .map_err(serde::de::Error::custom)?;
        }
        Ok(graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::sentence_two;

    #[test]
    fn yield_of_discontinuous_vp() {
        let g = sentence_two();
        assert_eq!(g.yield_of(NodeId(500)).unwrap(), vec![0, 3, 4]);
        assert_eq!(g.yield_of(NodeId(501)).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(g.yield_of(NodeId(2)).unwrap(), vec![2]);
        assert_eq!(g.yield_of(NodeId(77)), Err(Error::UnknownNode(NodeId(77))));
    }

    #[test]
    fn blocks_and_discontinuity() {
        let g = sentence_two();
        assert_eq!(g.blocks(NodeId(500)).unwrap().blocks, vec![(0, 0), (3, 4)]);
        assert_eq!(g.blocks(NodeId(501)).unwrap().blocks, vec![(0, 4)]);
        assert_eq!(g.blocks(NodeId(3)).unwrap().blocks, vec![(3, 3)]);
        assert!(g.is_discontinuous(NodeId(500)).unwrap());
        assert!(!g.is_discontinuous(NodeId(501)).unwrap());
    }

    #[test]
    fn head_child_of_vp_is_werden() {
        let g = sentence_two();
        assert_eq!(g.head_child(NodeId(500)).unwrap(), Some(NodeId(4)));
        assert_eq!(g.head_child(NodeId(501)).unwrap(), Some(NodeId(1)));
        assert_eq!(g.head_child(NodeId(1)), Err(Error::NotANonterminal(NodeId(1))));
    }

    #[test]
    fn head_child_absent_and_duplicate() {
        let mut g = SyntaxGraph::new("x", vec![Token::new("a", "NN"), Token::new("b", "NN")]);
        g.add_nonterminal(NodeId(500), "S", Edge::root()).unwrap();
        g.attach(NodeId(0), Parent::Node(NodeId(500)), "SB").unwrap();
        g.attach(NodeId(1), Parent::Node(NodeId(500)), "OC").unwrap();
        assert_eq!(g.head_child(NodeId(500)).unwrap(), None);
        g.attach(NodeId(0), Parent::Node(NodeId(500)), "HD").unwrap();
        g.attach(NodeId(1), Parent::Node(NodeId(500)), "HD").unwrap();
        assert!(matches!(
            g.head_child(NodeId(500)),
            Err(Error::DuplicateHead { .. })
        ));
    }

    #[test]
    fn children_ordered_by_leftmost_yield() {
        let g = sentence_two();
        assert_eq!(
            g.children(Parent::Node(NodeId(501))),
            vec![NodeId(500), NodeId(1), NodeId(2)]
        );
        assert_eq!(g.children(Parent::Root), vec![NodeId(501)]);
    }

    #[test]
    fn build_increment_groups_discontinuous_vp() {
        let g = SyntaxGraph::new("s2", sentence_two().tokens().to_vec());
        let selected: BTreeSet<_> = [0, 3, 4].into_iter().map(NodeId).collect();
        let labels: BTreeMap<_, _> = [(0, "PD"), (3, "MO"), (4, "HD")]
            .into_iter()
            .map(|(i, l)| (NodeId(i), FunctionLabel::from(l)))
            .collect();
        let out = g
            .build_increment(&selected, Category::from("VP"), &labels)
            .unwrap();
        assert_eq!(out.nonterminals().len(), 1);
        assert_eq!(out.yield_of(NodeId(500)).unwrap(), vec![0, 3, 4]);
        assert!(out.is_discontinuous(NodeId(500)).unwrap());
        assert_eq!(out.head_child(NodeId(500)).unwrap(), Some(NodeId(4)));
        assert!(out.validate(crate::Strictness::Lenient).is_empty());
        // input untouched
        assert!(g.nonterminals().is_empty());
    }

    #[test]
    fn build_increment_errors() {
        let g = sentence_two();
        let empty = BTreeSet::new();
        assert_eq!(
            g.build_increment(&empty, Category::from("NP"), &BTreeMap::new()),
            Err(Error::EmptySelection)
        );
        let sel: BTreeSet<_> = [NodeId(2)].into();
        let labels: BTreeMap<_, _> = [(NodeId(2), FunctionLabel::from("NK"))].into();
        assert_eq!(
            g.build_increment(&sel, Category::from("NP"), &labels),
            Err(Error::AlreadyAttached {
                node: NodeId(2),
                parent: NodeId(501)
            })
        );
        let flat = SyntaxGraph::new("f", g.tokens().to_vec());
        let sel: BTreeSet<_> = [NodeId(0), NodeId(1)].into();
        let labels: BTreeMap<_, _> = [
            (NodeId(0), FunctionLabel::head()),
            (NodeId(1), FunctionLabel::head()),
        ]
        .into();
        assert!(matches!(
            flat.build_increment(&sel, Category::from("NP"), &labels),
            Err(Error::DuplicateHead { .. })
        ));
        let short: BTreeMap<_, _> = [(NodeId(0), FunctionLabel::head())].into();
        assert_eq!(
            flat.build_increment(&sel, Category::from("NP"), &short),
            Err(Error::LabelMismatch)
        );
    }

    #[test]
    fn nonterminal_ids_stay_above_terminals() {
        let tokens = (0..600).map(|i| Token::new(format!("w{i}"), "NN")).collect();
        let mut g = SyntaxGraph::new("long", tokens);
        assert_eq!(g.next_free_id(), NodeId(600));
        assert!(g.add_nonterminal(NodeId(550), "S", Edge::root()).is_err());
        assert!(g.add_nonterminal(NodeId(600), "S", Edge::root()).is_ok());
        assert!(g.add_nonterminal(NodeId(499), "S", Edge::root()).is_err());
        assert!(g.add_nonterminal(NodeId(600), "S", Edge::root()).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let g = sentence_two();
        let text = serde_json::to_string(&g).unwrap();
        let back: SyntaxGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
    }
}
