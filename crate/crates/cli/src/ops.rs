//! Per-sentence work of the batch commands. Each function returns the
//! records it would print, so the callers can run sentences in parallel
//! and still print in corpus order.

use std::collections::BTreeMap;

use argbank_core::projection::to_phenogrammatical;
use argbank_core::{Category, Edge, NodeId, Parent, SyntaxGraph};
use argbank_models::{ChunkModel, LabelThresholds, LabelerModel, ModelError, TrigramModel};

fn flag(b: bool) -> u8 {
    b as u8
}

fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        "inf".to_owned()
    }
}

pub fn tag(g: &mut SyntaxGraph, model: &TrigramModel, threshold: f64) -> Result<Vec<String>, ModelError> {
    let words: Vec<String> = g.tokens().iter().map(|t| t.form.clone()).collect();
    if words.is_empty() {
        return Ok(Vec::new());
    }
    let tags = model.tag_pos(&words, threshold)?;
    let mut records = Vec::with_capacity(words.len());
    for (i, (tag, reliable)) in tags.into_iter().enumerate() {
        let t = g.token_mut(i).expect("position in range");
        t.pos = tag;
        t.pos_reliable = reliable;
        records.push(format!("token\t{}\t{i}\t{}\t{}\t{}", g.sentence_id(), words[i], g.tokens()[i].pos, flag(reliable)));
    }
    Ok(records)
}

/// Nonterminals with every child before its parent.
fn bottom_up(g: &SyntaxGraph) -> Vec<NodeId> {
    let st = g.structure();
    let mut out = Vec::new();
    let mut stack: Vec<(NodeId, bool)> = st
        .children_of(Parent::Root)
        .iter()
        .rev()
        .filter(|&&c| g.is_nonterminal(c))
        .map(|&c| (c, false))
        .collect();
    while let Some((n, expanded)) = stack.pop() {
        if expanded {
            out.push(n);
            continue;
        }
        stack.push((n, true));
        for &c in st.children_of(Parent::Node(n)).iter().rev() {
            if g.is_nonterminal(c) {
                stack.push((c, false));
            }
        }
    }
    out
}

/// Labels the children of `node`; with `predict_category` the category of
/// `node` is chosen as well. Failures leave the phrase as it was.
fn label_phrase(
    g: &mut SyntaxGraph,
    node: NodeId,
    labeler: &LabelerModel,
    thresholds: LabelThresholds,
    predict_category: bool,
    records: &mut Vec<String>,
) {
    let sid = g.sentence_id().to_owned();
    let kids = g.children(Parent::Node(node));
    let tags: Vec<String> = kids
        .iter()
        .map(|&k| g.child_tag(k).expect("child exists").to_owned())
        .collect();
    let known = if predict_category {
        None
    } else {
        Some(g.category(node).expect("nonterminal").as_str().to_owned())
    };
    match labeler.label_phrase_single_head(&tags, known.as_deref(), thresholds) {
        Ok(r) => {
            g.set_category(node, r.category.clone()).expect("nonterminal");
            records.push(format!(
                "phrase\t{sid}\t{node}\t{}\t{}\t{}",
                r.category,
                flag(r.category_reliable),
                number(r.category_gap)
            ));
            for ((&k, label), &ok) in kids.iter().zip(&r.labels).zip(&r.label_reliable) {
                g.set_label(k, label.clone()).expect("child exists");
                records.push(format!("edge\t{sid}\t{k}\t{node}\t{label}\t{}", flag(ok)));
            }
        }
        Err(e) => records.push(format!("skipped\t{sid}\t{node}\t{e}")),
    }
}

pub fn label(g: &mut SyntaxGraph, labeler: &LabelerModel, thresholds: LabelThresholds, keep_categories: bool) -> Vec<String> {
    let mut records = Vec::new();
    for node in bottom_up(g) {
        label_phrase(g, node, labeler, thresholds, !keep_categories, &mut records);
    }
    records
}

/// Flat contiguous phrases of the given categories.
fn flat_phrases(g: &SyntaxGraph, categories: &[String]) -> Vec<(NodeId, usize, usize)> {
    let st = g.structure();
    g.nonterminal_ids()
        .filter(|&n| {
            let c = g.category(n).expect("nonterminal").as_str();
            categories.iter().any(|k| k == c)
        })
        .filter_map(|n| {
            let kids = st.children_of(Parent::Node(n));
            let y = st.yield_of(n);
            let contiguous = y.len() > 1 && y[y.len() - 1] - y[0] + 1 == y.len();
            (contiguous && kids.iter().all(|&k| g.is_terminal(k))).then(|| (n, y[0], y[y.len() - 1]))
        })
        .collect()
}

pub fn chunk(
    g: &mut SyntaxGraph,
    chunker: &ChunkModel,
    labeler: Option<&LabelerModel>,
    categories: &[String],
    threshold: f64,
    thresholds: LabelThresholds,
) -> Result<Vec<String>, ModelError> {
    let sid = g.sentence_id().to_owned();
    let mut records = Vec::new();
    for (node, lo, hi) in flat_phrases(g, categories) {
        let category = g.category(node).expect("nonterminal").clone();
        let r = chunker.structure_chunk(&g.tokens()[lo..=hi], category.as_str(), threshold)?;
        let frag = &r.graph;
        let mut frag_ids = frag.nonterminal_ids();
        let frag_root = frag_ids.next().expect("chunk has a root");
        let mut ids: BTreeMap<NodeId, NodeId> = BTreeMap::from([(frag_root, node)]);
        let mut inner = Vec::new();
        for f in frag_ids {
            let id = g.next_free_id();
            ids.insert(f, id);
            let edge = frag.edge(f).expect("nonterminal");
            let Parent::Node(p) = edge.parent else {
                unreachable!("only the chunk root hangs at the root")
            };
            let cat: Category = frag.category(f).expect("nonterminal").clone();
            g.add_nonterminal(id, cat, Edge::new(Parent::Node(ids[&p]), edge.label.clone()))
                .expect("fresh id");
            inner.push(id);
        }
        for t in frag.terminal_ids() {
            let edge = frag.edge(t).expect("terminal");
            let Parent::Node(p) = edge.parent else { continue };
            g.set_edge(NodeId::terminal(t.index() + lo), Edge::new(Parent::Node(ids[&p]), edge.label.clone()))
                .expect("token in range");
        }
        let tags: Vec<String> = r.tags.iter().map(|t| t.to_string()).collect();
        records.push(format!(
            "chunk\t{sid}\t{node}\t{category}\t{}\t{}\t{}",
            tags.join(" "),
            number(r.gap),
            flag(r.reliable)
        ));
        if let Some(labeler) = labeler {
            // inner phrases first, so that the outer one sees their categories
            for &n in inner.iter().rev().chain([&node]) {
                label_phrase(g, n, labeler, thresholds, false, &mut records);
            }
        }
    }
    Ok(records)
}

pub fn project(g: &mut SyntaxGraph) -> Result<Vec<String>, argbank_core::Error> {
    let p = to_phenogrammatical(g)?;
    let sid = g.sentence_id().to_owned();
    let mut out = p.graph;
    let mut records = Vec::new();
    let mut comment: Vec<String> = out.comment().map(|c| vec![c.to_owned()]).unwrap_or_default();
    for t in p.traces.traces() {
        records.push(format!("trace\t{sid}\t{}\t{}\t{}\t{}", t.id, t.filler, t.site, t.label));
        comment.push(format!("*T{}* {} {} {}", t.id, t.filler, t.site, t.label));
    }
    if !comment.is_empty() {
        out.set_comment(Some(comment.join("\n")));
    }
    *g = out;
    Ok(records)
}
