//! Independent reference implementations shared by the integration tests
//! and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeSet;

use argbank_core::export::ExportDocument;
use argbank_core::query::{parse_query, search};
use argbank_core::testkit::random_graph;
use argbank_core::{NodeId, Parent, SyntaxGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Terminal positions reachable downwards from `node`, computed as a
/// fixpoint over the raw parent relation.
pub fn closure_yield(g: &SyntaxGraph, node: NodeId) -> BTreeSet<usize> {
    let mut below: BTreeSet<NodeId> = BTreeSet::from([node]);
    loop {
        let before = below.len();
        for n in g.node_ids() {
            if let Some(Parent::Node(p)) = g.parent(n) {
                if below.contains(&p) {
                    below.insert(n);
                }
            }
        }
        if below.len() == before {
            break;
        }
    }
    below
        .into_iter()
        .filter(|n| g.is_terminal(*n))
        .map(|n| n.0 as usize)
        .collect()
}

const PIECES: &[&str] = &["a", "ß", "Ü", " ", "#", "%", "$", "中", "-", "5", "é", "\u{200b}", "BOS", "\""];

pub fn random_form(rng: &mut ChaCha8Rng) -> String {
    loop {
        let n = rng.gen_range(1..5);
        let s: String = (0..n).map(|_| *PIECES.choose(rng).unwrap()).collect();
        let digits_only = s.len() > 1 && s.starts_with('#') && s[1..].bytes().all(|b| b.is_ascii_digit());
        if !(s.starts_with("%%") || s.starts_with("#BOS ") || s.starts_with("#EOS ") || digits_only) {
            return s;
        }
    }
}

pub fn random_document(rng: &mut ChaCha8Rng, index: usize) -> ExportDocument {
    let count = rng.gen_range(0..4);
    let sentences: Vec<SyntaxGraph> = (0..count)
        .map(|i| {
            let continuous = rng.gen_bool(0.5);
            let mut g = random_graph(rng, &format!("d{index}s{i}"), 10, 5, continuous);
            for p in 0..g.len() {
                g.token_mut(p).unwrap().form = random_form(rng);
            }
            if rng.gen_bool(0.3) {
                let lines: Vec<String> = (0..rng.gen_range(1..3)).map(|_| random_form(rng)).collect();
                g.set_comment(Some(lines.join("\n")));
            }
            g
        })
        .collect();
    let mut doc = ExportDocument::new(sentences);
    if rng.gen_bool(0.2) {
        doc.tagset_name = "custom-tags".into();
        doc.format_version = "1.1".into();
    }
    doc
}

/// Random relabelling, re-attachment or category change of one graph.
pub fn perturb(g: &SyntaxGraph, rng: &mut ChaCha8Rng) -> SyntaxGraph {
    for _ in 0..20 {
        let mut h = g.clone();
        let nodes = h.node_ids();
        let n = *nodes.choose(rng).unwrap();
        match rng.gen_range(0..3) {
            0 => {
                h.set_label(n, ["SB", "OA", "MO"].choose(rng).unwrap().to_string().into())
                    .unwrap();
            }
            1 => {
                let targets: Vec<NodeId> = h.nonterminal_ids().filter(|&m| m != n).collect();
                let parent = match targets.choose(rng) {
                    Some(&m) if rng.gen_bool(0.7) => Parent::Node(m),
                    _ => Parent::Root,
                };
                let label = if parent == Parent::Root { "--" } else { "MO" };
                h.attach(n, parent, label).unwrap();
            }
            _ => {
                let first = h.nonterminal_ids().next();
                if let Some(m) = first {
                    h.set_category(m, "CNP".into()).unwrap();
                }
            }
        }
        if h.validate(argbank_core::Strictness::Lenient).is_empty() {
            return h;
        }
    }
    g.clone()
}

pub fn pairs(seed: u64, count: usize) -> Vec<(SyntaxGraph, SyntaxGraph)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let continuous = rng.gen_bool(0.5);
            let a = random_graph(&mut rng, &format!("p{i}"), 8, 5, continuous);
            let mut b = perturb(&a, &mut rng);
            if rng.gen_bool(0.5) {
                b = perturb(&b, &mut rng);
            }
            (a, b)
        })
        .collect()
}

// Brute-force query semantics, evaluated on a separately generated AST.

#[derive(Clone, Debug)]
pub enum P {
    Cat(&'static str),
    Func(&'static str),
    Pos(&'static str),
    Discont,
    Not(Box<P>),
    And(Box<P>, Box<P>),
    Or(Box<P>, Box<P>),
}

pub fn render(p: &P) -> String {
    match p {
        P::Cat(v) => format!("cat=\"{v}\""),
        P::Func(v) => format!("func=\"{v}\""),
        P::Pos(v) => format!("pos=\"{v}\""),
        P::Discont => "discont".into(),
        P::Not(a) => format!("!({})", render(a)),
        P::And(a, b) => format!("({}) & ({})", render(a), render(b)),
        P::Or(a, b) => format!("({}) | ({})", render(a), render(b)),
    }
}

pub fn random_pred(rng: &mut ChaCha8Rng, depth: usize) -> P {
    let leaf = depth == 0 || rng.gen_bool(0.5);
    if leaf {
        match rng.gen_range(0..4) {
            0 => P::Cat(["S", "VP", "NP", "PP", "AP"].choose(rng).unwrap()),
            1 => P::Func(["SB", "OA", "MO", "HD", "NK", "--"].choose(rng).unwrap()),
            2 => P::Pos(["ART", "NN", "ADV", "VVFIN"].choose(rng).unwrap()),
            _ => P::Discont,
        }
    } else {
        match rng.gen_range(0..3) {
            0 => P::Not(Box::new(random_pred(rng, depth - 1))),
            1 => P::And(Box::new(random_pred(rng, depth - 1)), Box::new(random_pred(rng, depth - 1))),
            _ => P::Or(Box::new(random_pred(rng, depth - 1)), Box::new(random_pred(rng, depth - 1))),
        }
    }
}

pub fn oracle_yield(g: &SyntaxGraph, n: NodeId) -> Vec<usize> {
    let mut out: Vec<usize> = g
        .terminal_ids()
        .filter(|&t| t == n || dominates(g, n, t))
        .map(|t| t.0 as usize)
        .collect();
    out.sort();
    out
}

pub fn dominates(g: &SyntaxGraph, a: NodeId, b: NodeId) -> bool {
    let mut seen = BTreeSet::new();
    let mut cur = b;
    while let Some(Parent::Node(p)) = g.parent(cur) {
        if p == a {
            return true;
        }
        if !seen.insert(p) {
            return false;
        }
        cur = p;
    }
    false
}

pub fn holds(g: &SyntaxGraph, p: &P, n: NodeId) -> bool {
    match p {
        P::Cat(v) => g.category(n).map(|c| c.as_str()) == Some(*v),
        P::Func(v) => g.edge(n).unwrap().label.as_str() == *v,
        P::Pos(v) => g.token(n).map(|t| t.pos.as_str()) == Some(*v),
        P::Discont => {
            let y = oracle_yield(g, n);
            y.last().unwrap() - y[0] + 1 != y.len()
        }
        P::Not(a) => !holds(g, a, n),
        P::And(a, b) => holds(g, a, n) && holds(g, b, n),
        P::Or(a, b) => holds(g, a, n) || holds(g, b, n),
    }
}

pub fn related(g: &SyntaxGraph, rel: &str, a: NodeId, b: NodeId) -> bool {
    match rel {
        ">" => g.parent(b) == Some(Parent::Node(a)),
        ">>" => dominates(g, a, b),
        "." => *oracle_yield(g, a).last().unwrap() + 1 == oracle_yield(g, b)[0],
        "$" => a != b && g.parent(a) == g.parent(b),
        _ => unreachable!(),
    }
}


/// A random corpus of at most 8-token sentences, a random query over it
/// and the matches expected by brute force.
pub struct SearchCase {
    pub corpus: Vec<SyntaxGraph>,
    pub query: String,
    pub variables: usize,
    pub expected: Vec<(String, Vec<NodeId>)>,
}

pub fn search_case(rng: &mut ChaCha8Rng, round: usize) -> SearchCase {
    let corpus: Vec<SyntaxGraph> = (0..3)
        .map(|i| {
            let continuous = rng.gen_bool(0.5);
            random_graph(rng, &format!("q{round}-{i}"), 8, 5, continuous)
        })
        .collect();
    let k = rng.gen_range(1..=3);
    let preds: Vec<P> = (0..k).map(|_| random_pred(rng, 2)).collect();
    let mut rels: Vec<(usize, &str, usize)> = Vec::new();
    for j in 1..k {
        let i = rng.gen_range(0..j);
        let rel = *[">", ">>", ".", "$"].choose(rng).unwrap();
        rels.push((i, rel, j));
    }
    let mut clauses: Vec<String> = (0..k)
        .map(|i| format!("#v{i}:[{}]", render(&preds[i])))
        .collect();
    clauses.extend(rels.iter().map(|(i, r, j)| format!("#v{i} {r} #v{j}")));
    let query = clauses.join(" & ");

    let mut expected: Vec<(String, Vec<NodeId>)> = Vec::new();
    for g in &corpus {
        let nodes = g.node_ids();
        let mut tuples: Vec<Vec<NodeId>> = vec![vec![]];
        for _ in 0..k {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    nodes.iter().map(move |&n| {
                        let mut t = t.clone();
                        t.push(n);
                        t
                    })
                })
                .collect();
        }
        let mut ok: Vec<Vec<NodeId>> = tuples
            .into_iter()
            .filter(|t| (0..k).all(|i| holds(g, &preds[i], t[i])))
            .filter(|t| rels.iter().all(|&(i, r, j)| related(g, r, t[i], t[j])))
            .collect();
        ok.sort_by_key(|t| {
            (
                t.iter().map(|&n| oracle_yield(g, n)[0]).collect::<Vec<_>>(),
                t.clone(),
            )
        });
        expected.extend(ok.into_iter().map(|t| (g.sentence_id().to_owned(), t)));
    }
    SearchCase {
        corpus,
        query,
        variables: k,
        expected,
    }
}

/// Runs the library search on a case, checking the variable names.
pub fn run_search(case: &SearchCase) -> Vec<(String, Vec<NodeId>)> {
    let q = parse_query(&case.query).unwrap_or_else(|e| panic!("{}: {e}", case.query));
    search(&ExportDocument::new(case.corpus.clone()), &q)
        .into_iter()
        .map(|m| {
            assert_eq!(
                m.bindings.iter().map(|b| b.0.clone()).collect::<Vec<_>>(),
                (0..case.variables).map(|i| format!("v{i}")).collect::<Vec<_>>()
            );
            (m.sentence_id, m.bindings.into_iter().map(|b| b.1).collect())
        })
        .collect()
}

/// Random graphs; `continuous` fixes the kind, `None` mixes both.
pub fn graphs(seed: u64, count: usize, max_tokens: usize, continuous: Option<bool>) -> Vec<SyntaxGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let c = continuous.unwrap_or_else(|| rng.gen_bool(0.5));
            random_graph(&mut rng, &format!("g{i}"), max_tokens, 5, c)
        })
        .collect()
}
