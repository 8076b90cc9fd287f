//! Brute-force oracles for the decoders. Shared with the acceptance suite.

#![allow(dead_code)]

use argbank_core::{Category, Edge, FunctionLabel, NodeId, Parent, SyntaxGraph, Token};
use argbank_models::chunk::{ChunkSubmodel, RelTag};
use argbank_models::labeler::{LabelerModel, PhraseEvent, PhraseModel};
use argbank_models::pos::{TaggedSentence, TrigramModel};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;
use std::rc::Rc;

/// Every label sequence of length `len` over `labels` labels, in
/// lexicographic order.
pub fn sequences(labels: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * labels);
        for s in &out {
            for l in 0..labels {
                let mut t = s.clone();
                t.push(l);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn tied(a: f64, max: f64) -> bool {
    if max == f64::NEG_INFINITY {
        a == f64::NEG_INFINITY
    } else {
        a >= max - 1e-12 * max.abs().max(1.0)
    }
}

/// Lexicographically first of the sequences tied with the maximum.
/// `scored` must be in lexicographic order.
pub fn best(scored: &[(Vec<usize>, f64)]) -> (Vec<usize>, f64) {
    let max = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    scored
        .iter()
        .find(|s| tied(s.1, max))
        .cloned()
        .expect("at least one sequence")
}

/// Best and runner-up by full enumeration. The runner-up is the best
/// sequence other than the winner; absent if all others are impossible.
pub fn two_best(scored: &[(Vec<usize>, f64)]) -> ((Vec<usize>, f64), Option<(Vec<usize>, f64)>) {
    let first = best(scored);
    let rest: Vec<(Vec<usize>, f64)> = scored.iter().filter(|s| s.0 != first.0).cloned().collect();
    let max = rest.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let second = if max == f64::NEG_INFINITY { None } else { Some(best(&rest)) };
    (first, second)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol
}

/// A tagger trained on a random corpus over at most `max_tags` tags, plus
/// the vocabulary it saw.
pub fn random_pos_model<R: Rng>(rng: &mut R, max_tags: usize) -> (TrigramModel, Vec<String>) {
    let n_tags = rng.gen_range(1..=max_tags);
    let vocab: Vec<String> = ["der", "Hund", "lief", "schnell", "Haus", "gehen", "Katzen"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let n_sent = rng.gen_range(1..=8);
    let corpus: Vec<TaggedSentence> = (0..n_sent)
        .map(|_| {
            (0..rng.gen_range(1..=5))
                .map(|_| {
                    let w = vocab.choose(rng).unwrap().clone();
                    let t = format!("T{}", rng.gen_range(0..n_tags));
                    (w, t.as_str().into())
                })
                .collect()
        })
        .collect();
    let model = argbank_models::pos::train_trigram(&corpus).unwrap();
    (model, vocab)
}

/// A random test sentence mixing seen and unseen words.
pub fn random_words<R: Rng>(rng: &mut R, vocab: &[String], max_len: usize) -> Vec<String> {
    let unseen = ["Gehege", "laufen", "x", "Xaver", "springt"];
    (0..rng.gen_range(1..=max_len))
        .map(|_| {
            if rng.gen_bool(0.7) {
                vocab.choose(rng).unwrap().clone()
            } else {
                unseen.choose(rng).unwrap().to_string()
            }
        })
        .collect()
}

/// Joint log-probability of a tag sequence, summed position by position.
pub fn pos_score(m: &TrigramModel, words: &[String], tags: &[usize]) -> f64 {
    let b = m.tags().len();
    let (mut u, mut v) = (b, b);
    let mut total = 0.0;
    for (w, &t) in words.iter().zip(tags) {
        total += m.log_transition(u, v, t) + m.log_emissions(w)[t];
        u = v;
        v = t;
    }
    total
}

pub fn pos_enumeration(m: &TrigramModel, words: &[String]) -> Vec<(Vec<usize>, f64)> {
    sequences(m.tags().len(), words.len())
        .into_iter()
        .map(|s| {
            let score = pos_score(m, words, &s);
            (s, score)
        })
        .collect()
}

pub const CHILD_TAGS: [&str; 5] = ["NN", "ART", "VVFIN", "ADV", "PP"];

/// Training events for a random family of at most three categories, each
/// with at most four function labels.
pub fn random_events<R: Rng>(rng: &mut R) -> Vec<PhraseEvent> {
    let mut cats = vec!["NP", "PP", "S", "VP"];
    cats.shuffle(rng);
    cats.truncate(rng.gen_range(1..=3));
    let mut events = Vec::new();
    for cat in cats {
        let mut labels = vec!["HD", "SB", "OA", "MO"];
        labels.shuffle(rng);
        labels.truncate(rng.gen_range(1..=4));
        for _ in 0..rng.gen_range(1..=6) {
            let children = (0..rng.gen_range(1..=4))
                .map(|_| {
                    (
                        CHILD_TAGS.choose(rng).unwrap().to_string(),
                        FunctionLabel::from(*labels.choose(rng).unwrap()),
                    )
                })
                .collect();
            events.push(PhraseEvent {
                category: Category::from(cat),
                children,
            });
        }
    }
    events
}

pub fn random_child_tags<R: Rng>(rng: &mut R, max_len: usize) -> Vec<String> {
    (0..rng.gen_range(1..=max_len))
        .map(|_| {
            if rng.gen_bool(0.85) {
                CHILD_TAGS.choose(rng).unwrap().to_string()
            } else {
                "KON".to_string()
            }
        })
        .collect()
}

pub fn phrase_score(m: &PhraseModel, tags: &[String], labels: &[usize]) -> f64 {
    let b = m.labels().len();
    let (mut u, mut v) = (b, b);
    let mut total = 0.0;
    for (tag, &l) in tags.iter().zip(labels) {
        total += m.log_transition(u, v, l) + m.log_emission(l, tag);
        u = v;
        v = l;
    }
    total
}

pub fn phrase_enumeration(m: &PhraseModel, tags: &[String]) -> Vec<(Vec<usize>, f64)> {
    sequences(m.labels().len(), tags.len())
        .into_iter()
        .map(|s| {
            let score = phrase_score(m, tags, &s);
            (s, score)
        })
        .collect()
}

/// Category maximizing prior times best joint probability; the first one
/// in category order wins ties.
pub fn best_category(model: &LabelerModel, tags: &[String]) -> (Category, f64) {
    let mut out: Option<(Category, f64)> = None;
    for c in model.categories() {
        let pm = model.phrase_model(c).unwrap();
        let (_, lp) = best(&phrase_enumeration(pm, tags));
        let posterior = if model.config().use_priors {
            model.prior(c).ln() + lp
        } else {
            lp
        };
        if out.as_ref().map_or(true, |o| posterior > o.1) {
            out = Some((c.clone(), posterior));
        }
    }
    out.expect("at least one category")
}

/// Continuous chunk tree: a token or a phrase over its children.
#[derive(Clone, Debug, PartialEq)]
pub enum Tree {
    Leaf,
    Phrase(&'static str, Vec<Tree>),
}

type Memo = HashMap<(usize, usize), Rc<Vec<Vec<Tree>>>>;

/// All child sequences covering exactly `n` tokens whose phrases nest at
/// most `depth` further levels and never form unary chains.
pub fn forests(n: usize, depth: usize, cats: &[&'static str]) -> Rc<Vec<Vec<Tree>>> {
    forests_memo(n, depth, cats, &mut HashMap::new())
}

/// Possible first children spanning exactly `width` tokens.
fn heads(width: usize, depth: usize, cats: &[&'static str], memo: &mut Memo) -> Vec<Tree> {
    let mut h = Vec::new();
    if width == 1 {
        h.push(Tree::Leaf);
        if depth > 0 {
            // a phrase over a single token is not a unary chain
            for &c in cats {
                h.push(Tree::Phrase(c, vec![Tree::Leaf]));
            }
        }
    } else if depth > 0 {
        for kids in forests_memo(width, depth - 1, cats, memo).iter() {
            if kids.len() == 1 && matches!(kids[0], Tree::Phrase(..)) {
                continue;
            }
            for &c in cats {
                h.push(Tree::Phrase(c, kids.clone()));
            }
        }
    }
    h
}

fn forests_memo(n: usize, depth: usize, cats: &[&'static str], memo: &mut Memo) -> Rc<Vec<Vec<Tree>>> {
    if let Some(f) = memo.get(&(n, depth)) {
        return f.clone();
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
    }
    for first in 1..=n {
        let hs = heads(first, depth, cats, memo);
        if hs.is_empty() {
            continue;
        }
        let tails = forests_memo(n - first, depth, cats, memo);
        for h in &hs {
            for t in tails.iter() {
                let mut f = Vec::with_capacity(t.len() + 1);
                f.push(h.clone());
                f.extend(t.iter().cloned());
                out.push(f);
            }
        }
    }
    let out = Rc::new(out);
    memo.insert((n, depth), out.clone());
    out
}

/// Calls `f` with the children of every chunk tree over `n` tokens, phrases
/// at most `depth` levels below the root. The root never has a single
/// phrase child.
pub fn for_each_chunk_tree(n: usize, depth: usize, cats: &[&'static str], mut f: impl FnMut(&[Tree])) {
    let mut memo = Memo::new();
    let mut buf = Vec::new();
    for first in 1..=n {
        let hs = heads(first, depth, cats, &mut memo);
        let tails = forests_memo(n - first, depth, cats, &mut memo);
        for h in &hs {
            if first == n && matches!(h, Tree::Phrase(..)) {
                continue;
            }
            for t in tails.iter() {
                buf.clear();
                buf.push(h.clone());
                buf.extend(t.iter().cloned());
                f(&buf);
            }
        }
    }
}

pub fn chunk_trees(n: usize, depth: usize, cats: &[&'static str]) -> Vec<Vec<Tree>> {
    let mut out = Vec::new();
    for_each_chunk_tree(n, depth, cats, |k| out.push(k.to_vec()));
    out
}

/// The graph for a chunk tree, with ids in opening order and placeholder
/// labels, as the chunk decoder builds it.
pub fn chunk_graph(outer: &str, kids: &[Tree], pos: &[String]) -> SyntaxGraph {
    let tokens: Vec<Token> = pos
        .iter()
        .enumerate()
        .map(|(i, p)| Token::new(format!("w{i}"), p.as_str()))
        .collect();
    let mut g = SyntaxGraph::new("chunk", tokens);
    let root = g.next_free_id();
    g.add_nonterminal(root, outer, Edge::root()).unwrap();
    let mut next_token = 0;
    fn fill(g: &mut SyntaxGraph, parent: NodeId, kids: &[Tree], next_token: &mut usize) {
        for k in kids {
            match k {
                Tree::Leaf => {
                    g.attach(NodeId::terminal(*next_token), Parent::Node(parent), "NK")
                        .unwrap();
                    *next_token += 1;
                }
                Tree::Phrase(c, sub) => {
                    let id = g.next_free_id();
                    g.add_nonterminal(id, *c, Edge::new(Parent::Node(parent), "NK"))
                        .unwrap();
                    fill(g, id, sub, next_token);
                }
            }
        }
    }
    fill(&mut g, root, kids, &mut next_token);
    g
}

pub fn leaves(kids: &[Tree]) -> usize {
    kids.iter()
        .map(|k| match k {
            Tree::Leaf => 1,
            Tree::Phrase(_, sub) => leaves(sub),
        })
        .sum()
}

/// Whether a tag sequence builds a tree: each token closes no more phrases
/// than are open below the root.
pub fn well_formed(tags: &[&RelTag]) -> bool {
    let mut depth: i64 = 0;
    for t in tags {
        let closes = t.opened.len() as i64 - t.delta as i64;
        if closes < 0 || closes > depth {
            return false;
        }
        depth += t.delta as i64;
    }
    true
}

pub fn chunk_score(m: &ChunkSubmodel, pos: &[String], labels: &[usize]) -> f64 {
    let b = m.tags().len();
    let (mut u, mut v) = (b, b);
    let mut total = 0.0;
    for (p, &l) in pos.iter().zip(labels) {
        total += m.log_transition(u, v, l) + m.log_emission(l, p);
        u = v;
        v = l;
    }
    total
}

/// Scores of the well-formed tag sequences, in lexicographic order.
pub fn chunk_enumeration(m: &ChunkSubmodel, pos: &[String]) -> Vec<(Vec<usize>, f64)> {
    sequences(m.tags().len(), pos.len())
        .into_iter()
        .filter(|s| well_formed(&s.iter().map(|&i| &m.tags()[i]).collect::<Vec<_>>()))
        .map(|s| {
            let score = chunk_score(m, pos, &s);
            (s, score)
        })
        .collect()
}
