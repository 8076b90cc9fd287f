mod oracle;

use std::collections::BTreeSet;

use argbank_core::compare::{agreement_metrics, align_and_compare};
use argbank_core::export::ExportDocument;
use argbank_core::query::{parse_query, search};
use argbank_core::testkit::{sentence_one, sentence_two};
use argbank_core::{NodeId, Parent};
use oracle::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn self_comparison_is_empty() {
    for g in [sentence_one(), sentence_two()] {
        assert!(align_and_compare(&g, &g).unwrap().is_empty());
    }
    for (a, b) in pairs(1, 100) {
        assert!(align_and_compare(&a, &a).unwrap().is_empty());
        assert!(align_and_compare(&b, &b).unwrap().is_empty());
    }
}

#[test]
fn comparison_is_symmetric_up_to_sides() {
    for (a, b) in pairs(2, 200) {
        let key = |v: Vec<argbank_core::compare::Inconsistency>| -> BTreeSet<String> {
            v.into_iter()
                .map(|i| format!("{:?}|{:?}|{:?}", i.kind, i.left, i.right))
                .collect()
        };
        let ab = key(align_and_compare(&a, &b).unwrap());
        let ba = key(
            align_and_compare(&b, &a)
                .unwrap()
                .into_iter()
                .map(|i| i.swapped())
                .collect(),
        );
        assert_eq!(ab, ba);
    }
}

#[test]
fn precision_and_recall_swap() {
    let mut nonempty = 0;
    for (a, b) in pairs(3, 100) {
        let ab = agreement_metrics(&a, &b).unwrap();
        let ba = agreement_metrics(&b, &a).unwrap();
        assert_eq!(ab.precision, ba.recall);
        assert_eq!(ab.recall, ba.precision);
        for m in [ab.precision, ab.recall, ab.f1, ab.label_accuracy] {
            assert!((0.0..=1.0).contains(&m));
        }
        if ab.counts.left_nodes > 0 && ab.counts.right_nodes > 0 {
            nonempty += 1;
            assert_eq!(ab.f1 == 0.0, ab.counts.matched == 0);
        }
    }
    assert!(nonempty > 50);
}

#[test]
fn missing_node_lowers_recall() {
    let a = sentence_one();
    let mut b = a.clone();
    // dissolve the PP: its only child goes straight to the VP
    b.attach(NodeId(0), Parent::Node(NodeId(502)), "MO").unwrap();
    b.attach(NodeId(500), Parent::Node(NodeId(502)), "RE").unwrap();
    b.remove_nonterminal(NodeId(501)).unwrap();
    let m = agreement_metrics(&a, &b).unwrap();
    assert_eq!(m.recall, 3.0 / 4.0);
    assert_eq!(m.precision, 1.0);
}

#[test]
fn search_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut total_hits = 0;
    for round in 0..150 {
        let case = search_case(&mut rng, round);
        let got = run_search(&case);
        total_hits += got.len();
        assert_eq!(got, case.expected, "{}", case.query);
    }
    assert!(total_hits > 100);
}

#[test]
fn absent_category_finds_nothing() {
    let doc = ExportDocument::new(vec![sentence_one(), sentence_two()]);
    assert!(search(&doc, &parse_query(r#"[cat="CNP"]"#).unwrap()).is_empty());
}
