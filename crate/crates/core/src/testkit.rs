//! Fixtures and random graph generators shared by the test suites.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Edge, NodeId, Parent, SyntaxGraph, Token};

/// "Bäcker wollte er nie werden" with the discontinuous VP over
/// {Bäcker, nie, werden} (id 500) below S (id 501).
pub fn sentence_two() -> SyntaxGraph {
    let tokens = vec![
        Token::new("Bäcker", "NN"),
        Token::new("wollte", "VVFIN"),
        Token::new("er", "PPER"),
        Token::new("nie", "ADV"),
        Token::new("werden", "VAINF"),
    ];
    let mut g = SyntaxGraph::new("s2", tokens);
    let vp = NodeId(500);
    let s = NodeId(501);
    g.add_nonterminal(vp, "VP", Edge::new(Parent::Node(s), "OC"))
        .unwrap();
    g.add_nonterminal(s, "S", Edge::root()).unwrap();
    for (t, parent, label) in [(0, vp, "PD"), (1, s, "HD"), (2, s, "SB"), (3, vp, "MO"), (4, vp, "HD")] {
        g.attach(NodeId(t), Parent::Node(parent), label).unwrap();
    }
    g
}

/// "daran wird ihn Anna erkennen, dass er weint": the correlative PP over
/// {daran, dass er weint} is discontinuous, and so is the VP containing it.
pub fn sentence_one() -> SyntaxGraph {
    let tokens = vec![
        Token::new("daran", "PAV"),
        Token::new("wird", "VAFIN"),
        Token::new("ihn", "PPER"),
        Token::new("Anna", "NE"),
        Token::new("erkennen", "VVINF"),
        Token::new(",", "$,"),
        Token::new("dass", "KOUS"),
        Token::new("er", "PPER"),
        Token::new("weint", "VVFIN"),
    ];
    let mut g = SyntaxGraph::new("s1", tokens);
    let (sub, pp, vp, s) = (NodeId(500), NodeId(501), NodeId(502), NodeId(503));
    g.add_nonterminal(sub, "S", Edge::new(Parent::Node(pp), "RE"))
        .unwrap();
    g.add_nonterminal(pp, "PP", Edge::new(Parent::Node(vp), "MO"))
        .unwrap();
    g.add_nonterminal(vp, "VP", Edge::new(Parent::Node(s), "OC"))
        .unwrap();
    g.add_nonterminal(s, "S", Edge::root()).unwrap();
    let edges = [
        (0, pp, "HD"),
        (1, s, "HD"),
        (2, vp, "OA"),
        (3, s, "SB"),
        (4, vp, "HD"),
        (6, sub, "CP"),
        (7, sub, "SB"),
        (8, sub, "HD"),
    ];
    for (t, parent, label) in edges {
        g.attach(NodeId(t), Parent::Node(parent), label).unwrap();
    }
    g
}

const FORMS: &[&str] = &["der", "Mann", "Bäcker", "nie", "sah", "Haus", "%x", "#", "ü-ß"];
const POS: &[&str] = &["ART", "NN", "ADV", "VVFIN", "APPR", "ADJA", "$,"];
const CATEGORIES: &[&str] = &["S", "VP", "NP", "PP", "AP"];
const FUNCTIONS: &[&str] = &["SB", "OA", "DA", "MO", "OC", "PD", "NK"];

/// A random valid graph with `1..=max_tokens` tokens and up to
/// `max_nonterminals` nonterminals. With `continuous` set, every node's yield
/// is an interval.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    sentence_id: &str,
    max_tokens: usize,
    max_nonterminals: usize,
    continuous: bool,
) -> SyntaxGraph {
    let n = rng.gen_range(1..=max_tokens);
    let tokens = (0..n)
        .map(|_| {
            Token::new(
                *FORMS.choose(rng).unwrap(),
                *POS.choose(rng).unwrap(),
            )
        })
        .collect();
    let mut g = SyntaxGraph::new(sentence_id, tokens);
    // root-level items with their leftmost position
    let mut items: Vec<(usize, NodeId)> = (0..n).map(|p| (p, NodeId::terminal(p))).collect();
    let k = rng.gen_range(0..=max_nonterminals);
    for _ in 0..k {
        let chosen: Vec<(usize, NodeId)> = if continuous {
            let len = rng.gen_range(1..=items.len().min(3));
            let start = rng.gen_range(0..=items.len() - len);
            items.drain(start..start + len).collect()
        } else {
            let len = rng.gen_range(1..=items.len().min(4));
            let mut idx: Vec<usize> = (0..items.len()).collect();
            idx.shuffle(rng);
            let picked: BTreeSet<usize> = idx.into_iter().take(len).collect();
            let mut chosen = Vec::new();
            for i in picked.into_iter().rev() {
                chosen.push(items.remove(i));
            }
            chosen.reverse();
            chosen
        };
        let id = g.next_free_id();
        g.add_nonterminal(id, *CATEGORIES.choose(rng).unwrap(), Edge::root())
            .unwrap();
        let head = if rng.gen_bool(0.7) {
            Some(rng.gen_range(0..chosen.len()))
        } else {
            None
        };
        for (i, &(_, child)) in chosen.iter().enumerate() {
            let label = if Some(i) == head {
                "HD"
            } else {
                FUNCTIONS.choose(rng).unwrap()
            };
            g.attach(child, Parent::Node(id), label).unwrap();
        }
        let leftmost = chosen.iter().map(|c| c.0).min().unwrap();
        let at = items.partition_point(|(p, _)| *p < leftmost);
        items.insert(at, (leftmost, id));
    }
    g
}
