//! Internal structure of NP/PP/AP chunks as relative structural tags.
//!
//! Every token of a chunk carries one tag. Reading left to right, the tag
//! says how the attachment point moves from the previous token's parent (the
//! chunk root for the first token): close `|opened| - delta` nodes, then open
//! the nodes in `opened` (outermost first) and attach the token to the
//! innermost open node. `delta` is the resulting change in parent depth.
//! Closing and opening in one tag is what distinguishes `NP(PP(a b) PP(c d))`
//! from `NP(PP(a b c d))`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use argbank_core::{Category, Edge, NodeId, Parent, Strictness, SyntaxGraph, Token};
use serde::{Deserialize, Serialize};

use crate::chain::{count_divisor, Chain, ChainCounts, Emissions};
use crate::decode::{self, Lattice};
use crate::ModelError;

pub const MAX_DELTA: i8 = 3;
pub const EMISSION_SMOOTHING: f64 = 0.1;
/// Edge label given to every edge inside a decoded chunk.
pub const PLACEHOLDER_LABEL: &str = "NK";

pub fn default_targets() -> Vec<Category> {
    ["AP", "NP", "PP"].iter().map(|c| Category::from(*c)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelTag {
    pub delta: i8,
    pub opened: Vec<Category>,
}

impl RelTag {
    pub fn same() -> RelTag {
        RelTag {
            delta: 0,
            opened: Vec::new(),
        }
    }

    /// Number of nodes closed before opening; negative means ill-formed.
    pub fn closes(&self) -> i64 {
        self.opened.len() as i64 - self.delta as i64
    }
}

impl fmt::Display for RelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.delta > 0 {
            write!(f, "+{}", self.delta)?;
        } else {
            write!(f, "{}", self.delta)?;
        }
        if !self.opened.is_empty() {
            let cats: Vec<&str> = self.opened.iter().map(|c| c.as_str()).collect();
            write!(f, ":{}", cats.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ChunkError {
    #[error("chunk root {0} is not a nonterminal")]
    NotANonterminal(NodeId),
    #[error("node {0} is discontinuous")]
    Discontinuous(NodeId),
    #[error("node {0} has a single nonterminal child")]
    UnaryChain(NodeId),
    #[error("token {position} changes depth by {delta}")]
    DeltaOutOfRange { position: usize, delta: i64 },
    #[error("{tags} tags for {tokens} tokens")]
    LengthMismatch { tags: usize, tokens: usize },
    #[error("tag at token {position} closes below the chunk root")]
    Underflow { position: usize },
    #[error("tag at token {position} opens fewer nodes than its delta")]
    IllFormed { position: usize },
    #[error("empty span")]
    EmptySpan,
}

/// Relative tags for the subtree below `root`, one per token of its span.
pub fn encode_relative(g: &SyntaxGraph, root: NodeId) -> Result<Vec<RelTag>, ChunkError> {
    if !g.is_nonterminal(root) {
        return Err(ChunkError::NotANonterminal(root));
    }
    let st = g.structure();
    let mut stack = vec![root];
    let mut inner = Vec::new();
    while let Some(n) = stack.pop() {
        let kids = st.children_of(Parent::Node(n));
        if kids.len() == 1 && g.is_nonterminal(kids[0]) {
            return Err(ChunkError::UnaryChain(n));
        }
        if st.is_discontinuous(n) {
            return Err(ChunkError::Discontinuous(n));
        }
        inner.push(n);
        stack.extend(kids.iter().copied().filter(|k| g.is_nonterminal(*k)));
    }
    let span = st.yield_of(root);
    let mut previous = vec![root];
    let mut tags = Vec::with_capacity(span.len());
    for &p in span {
        // path from the chunk root down to the token's parent
        let mut path = Vec::new();
        let mut cur = NodeId::terminal(p);
        while let Some(Parent::Node(parent)) = g.parent(cur) {
            path.push(parent);
            if parent == root {
                break;
            }
            cur = parent;
        }
        path.reverse();
        let common = previous.iter().zip(&path).take_while(|(a, b)| a == b).count();
        let delta = path.len() as i64 - previous.len() as i64;
        if delta.abs() > MAX_DELTA as i64 {
            return Err(ChunkError::DeltaOutOfRange { position: p, delta });
        }
        tags.push(RelTag {
            delta: delta as i8,
            opened: path[common..]
                .iter()
                .map(|&n| g.category(n).expect("nonterminal").clone())
                .collect(),
        });
        previous = path;
    }
    Ok(tags)
}

/// A chunk fragment: the tokens below a fresh root of category `outer`.
/// Nonterminal ids are allocated in opening order; every edge inside the
/// chunk carries the placeholder label.
pub fn decode_relative(tokens: &[Token], outer: &Category, tags: &[RelTag]) -> Result<SyntaxGraph, ChunkError> {
    if tokens.is_empty() {
        return Err(ChunkError::EmptySpan);
    }
    if tags.len() != tokens.len() {
        return Err(ChunkError::LengthMismatch {
            tags: tags.len(),
            tokens: tokens.len(),
        });
    }
    let mut g = SyntaxGraph::new("chunk", tokens.to_vec());
    let root = g.next_free_id();
    g.add_nonterminal(root, outer.clone(), Edge::root())
        .expect("fresh id");
    let mut stack = vec![root];
    for (position, tag) in tags.iter().enumerate() {
        if tag.delta.abs() > MAX_DELTA {
            return Err(ChunkError::DeltaOutOfRange {
                position,
                delta: tag.delta as i64,
            });
        }
        let closes = tag.closes();
        if closes < 0 {
            return Err(ChunkError::IllFormed { position });
        }
        if closes as usize >= stack.len() {
            return Err(ChunkError::Underflow { position });
        }
        stack.truncate(stack.len() - closes as usize);
        for cat in &tag.opened {
            let id = g.next_free_id();
            let parent = *stack.last().unwrap();
            g.add_nonterminal(id, cat.clone(), Edge::new(Parent::Node(parent), PLACEHOLDER_LABEL))
                .expect("fresh id");
            stack.push(id);
        }
        g.attach(
            NodeId::terminal(position),
            Parent::Node(*stack.last().unwrap()),
            PLACEHOLDER_LABEL,
        )
        .expect("token exists");
    }
    Ok(g)
}

/// Bracketed rendering such as `(NP ART NN (PP APPR NN))`, with POS tags
/// as leaves.
pub fn bracketed(g: &SyntaxGraph, node: NodeId) -> String {
    if let Some(t) = g.token(node) {
        return t.pos.to_string();
    }
    let mut s = format!("({}", g.category(node).map_or("?", |c| c.as_str()));
    for c in g.children(Parent::Node(node)) {
        s.push(' ');
        s.push_str(&bracketed(g, c));
    }
    s.push(')');
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChunkSubmodel {
    category: Category,
    tags: Vec<RelTag>,
    chain: Chain,
    emissions: Emissions,
}

impl ChunkSubmodel {
    pub fn tags(&self) -> &[RelTag] {
        &self.tags
    }

    pub fn log_transition(&self, u: usize, v: usize, t: usize) -> f64 {
        self.chain.log_prob(u, v, t)
    }

    pub fn log_emission(&self, tag: usize, pos: &str) -> f64 {
        self.emissions.log_prob(tag, pos)
    }

    /// Whether `tag` may follow a prefix whose attachment point lies
    /// `depth` levels below the chunk root; the depth afterwards.
    pub fn advance(&self, depth: usize, tag: usize) -> Option<usize> {
        let t = &self.tags[tag];
        let closes = t.closes();
        if closes < 0 || closes as usize > depth {
            return None;
        }
        Some(depth - closes as usize + t.opened.len())
    }
}

struct ChunkLattice<'a, S> {
    model: &'a ChunkSubmodel,
    pos: &'a [S],
}

impl<S: AsRef<str>> Lattice for ChunkLattice<'_, S> {
    type State = (usize, usize, usize);

    fn len(&self) -> usize {
        self.pos.len()
    }

    fn num_labels(&self) -> usize {
        self.model.tags.len()
    }

    fn start(&self) -> (usize, usize, usize) {
        let b = self.model.tags.len();
        (b, b, 0)
    }

    fn step(&self, i: usize, &(u, v, depth): &(usize, usize, usize), t: usize) -> Option<((usize, usize, usize), f64)> {
        let next = self.model.advance(depth, t)?;
        let score = self.model.chain.log_prob(u, v, t) + self.model.emissions.log_prob(t, self.pos[i].as_ref());
        Some(((v, t, next), score))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChunkStats {
    pub used: usize,
    /// Target phrases that were discontinuous, had unary chains or too
    /// large depth changes.
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChunkResult {
    pub graph: SyntaxGraph,
    pub tags: Vec<RelTag>,
    pub log_prob: f64,
    pub gap: f64,
    pub reliable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChunkModel {
    submodels: BTreeMap<Category, ChunkSubmodel>,
}

impl ChunkModel {
    pub fn categories(&self) -> impl Iterator<Item = &Category> {
        self.submodels.keys()
    }

    pub fn submodel(&self, category: &str) -> Option<&ChunkSubmodel> {
        self.submodels.get(category)
    }

    /// The best tag sequence among those that never close below the root.
    pub fn structure_chunk(&self, span: &[Token], outer: &str, threshold: f64) -> Result<ChunkResult, ModelError> {
        if threshold.is_nan() || threshold < 0.0 {
            return Err(ModelError::NegativeThreshold(threshold));
        }
        let model = self
            .submodels
            .get(outer)
            .ok_or_else(|| ModelError::MissingSubmodel(outer.to_owned()))?;
        let outer = Category::from(outer);
        if span.len() == 1 {
            let tags = vec![RelTag::same()];
            return Ok(ChunkResult {
                graph: decode_relative(span, &outer, &tags)?,
                tags,
                log_prob: 0.0,
                gap: f64::INFINITY,
                reliable: true,
            });
        }
        let pos: Vec<&str> = span.iter().map(|t| t.pos.as_str()).collect();
        let r = decode::two_best(&ChunkLattice { model, pos: &pos }).ok_or(ChunkError::EmptySpan)?;
        let tags: Vec<RelTag> = r.best.labels.iter().map(|&i| model.tags[i].clone()).collect();
        let gap = r.gap();
        Ok(ChunkResult {
            graph: decode_relative(span, &outer, &tags)?,
            tags,
            log_prob: r.best.log_prob,
            gap,
            reliable: gap >= threshold,
        })
    }
}

pub fn train_chunk(treebank: &[SyntaxGraph], targets: &[Category]) -> Result<(ChunkModel, ChunkStats), ModelError> {
    let targets: BTreeSet<&str> = targets.iter().map(|c| c.as_str()).collect();
    let mut examples: BTreeMap<Category, Vec<(Vec<String>, Vec<RelTag>)>> = BTreeMap::new();
    let mut stats = ChunkStats { used: 0, skipped: 0 };
    for g in treebank {
        if let Some(v) = g.validate(Strictness::Lenient).first() {
            return Err(ModelError::Invalid {
                sentence_id: g.sentence_id().to_owned(),
                message: v.to_string(),
            });
        }
        let st = g.structure();
        let mut stack: Vec<NodeId> = st
            .children_of(Parent::Root)
            .iter()
            .rev()
            .copied()
            .filter(|n| g.is_nonterminal(*n))
            .collect();
        while let Some(n) = stack.pop() {
            let cat = g.category(n).expect("nonterminal");
            if targets.contains(cat.as_str()) {
                if let Ok(tags) = encode_relative(g, n) {
                    let pos = st
                        .yield_of(n)
                        .iter()
                        .map(|&p| g.tokens()[p].pos.to_string())
                        .collect();
                    examples.entry(cat.clone()).or_default().push((pos, tags));
                    stats.used += 1;
                    continue;
                }
                stats.skipped += 1;
            }
            stack.extend(
                st.children_of(Parent::Node(n))
                    .iter()
                    .rev()
                    .copied()
                    .filter(|k| g.is_nonterminal(*k)),
            );
        }
    }
    if examples.is_empty() {
        return Err(ModelError::NoUsablePhrases { skipped: stats.skipped });
    }
    let parts = examples
        .into_iter()
        .map(|(category, exs)| {
            let tags: Vec<RelTag> = exs
                .iter()
                .flat_map(|(_, t)| t.iter().cloned())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let index: BTreeMap<&RelTag, usize> = tags.iter().enumerate().map(|(i, t)| (t, i)).collect();
            let mut emissions: Vec<BTreeMap<String, u64>> = vec![BTreeMap::new(); tags.len()];
            let mut sequences = Vec::new();
            for (pos, ts) in &exs {
                let seq: Vec<usize> = ts.iter().map(|t| index[t]).collect();
                for (p, &i) in pos.iter().zip(&seq) {
                    *emissions[i].entry(p.clone()).or_default() += 1;
                }
                sequences.push(seq);
            }
            SubmodelCounts {
                category,
                transitions: Chain::count(2, tags.len(), &sequences),
                tags,
                emissions: emissions.into_iter().map(|m| m.into_iter().collect()).collect(),
            }
        })
        .collect();
    let model = ChunkModel::try_from(ChunkSection { submodels: parts })?;
    Ok((model, stats))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmodelCounts {
    category: Category,
    tags: Vec<RelTag>,
    transitions: ChainCounts,
    emissions: Vec<Vec<(String, u64)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChunkSection {
    submodels: Vec<SubmodelCounts>,
}

impl TryFrom<ChunkSection> for ChunkModel {
    type Error = ModelError;

    fn try_from(s: ChunkSection) -> Result<Self, ModelError> {
        let alphabet: BTreeSet<&str> = s
            .submodels
            .iter()
            .flat_map(|m| m.emissions.iter().flatten().map(|(p, _)| p.as_str()))
            .collect();
        let divisor = count_divisor(s.submodels.iter().flat_map(|m| {
            m.transitions
                .unigram
                .iter()
                .copied()
                .chain(m.transitions.bigram.iter().map(|e| e[2]))
                .chain(m.transitions.trigram.iter().map(|e| e[3]))
                .chain(m.emissions.iter().flatten().map(|e| e.1))
        }));
        let alphabet_size = alphabet.len();
        let mut submodels = BTreeMap::new();
        for m in &s.submodels {
            if m.transitions.states != m.tags.len() || m.emissions.len() != m.tags.len() || m.transitions.order != 2 {
                return Err(ModelError::Format(format!("chunk model {} does not match its tag list", m.category)));
            }
            if m.tags.iter().any(|t| t.closes() < 0 || t.delta.abs() > MAX_DELTA) {
                return Err(ModelError::Format(format!("chunk model {} has an ill-formed tag", m.category)));
            }
            let sub = ChunkSubmodel {
                category: m.category.clone(),
                tags: m.tags.clone(),
                chain: Chain::from_counts(&m.transitions, divisor)?,
                emissions: Emissions::new(
                    m.emissions.iter().map(|v| v.iter().cloned().collect()).collect(),
                    alphabet_size,
                    EMISSION_SMOOTHING,
                    divisor,
                ),
            };
            if submodels.insert(m.category.clone(), sub).is_some() {
                return Err(ModelError::Format(format!("duplicate chunk model {}", m.category)));
            }
        }
        Ok(ChunkModel { submodels })
    }
}

impl From<&ChunkModel> for ChunkSection {
    fn from(m: &ChunkModel) -> Self {
        ChunkSection {
            submodels: m
                .submodels
                .values()
                .map(|s| SubmodelCounts {
                    category: s.category.clone(),
                    tags: s.tags.clone(),
                    transitions: s.chain.to_counts(),
                    emissions: s
                        .emissions
                        .counts()
                        .iter()
                        .map(|e| e.iter().map(|(k, &v)| (k.clone(), v)).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}

impl Serialize for ChunkModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ChunkSection::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChunkModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        ChunkModel::try_from(ChunkSection::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
