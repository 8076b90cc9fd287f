//! Dual-annotation comparison of two whole corpora.

use std::collections::{BTreeSet, HashMap};

use argbank_core::compare::{agreement_counts, align_and_compare, Agreement, AgreementCounts, Inconsistency};
use argbank_core::export::ExportDocument;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceComparison {
    pub sentence_id: String,
    pub inconsistencies: Vec<Inconsistency>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Sentences present in both corpora, in the left corpus's order.
    pub sentences: Vec<SentenceComparison>,
    pub total_inconsistencies: usize,
    /// Micro-averaged over the compared sentences whose tokens agree, with
    /// the left corpus as reference.
    pub metrics: Agreement,
    pub only_left: Vec<String>,
    pub only_right: Vec<String>,
}

pub fn compare_documents(left: &ExportDocument, right: &ExportDocument) -> ComparisonReport {
    let by_id: HashMap<&str, usize> = right
        .sentences
        .iter()
        .enumerate()
        .map(|(i, g)| (g.sentence_id(), i))
        .collect();
    let left_ids: BTreeSet<&str> = left.sentences.iter().map(|g| g.sentence_id()).collect();
    let mut sentences = Vec::new();
    let mut counts = AgreementCounts::default();
    let mut only_left = Vec::new();
    for a in &left.sentences {
        let Some(&j) = by_id.get(a.sentence_id()) else {
            only_left.push(a.sentence_id().to_owned());
            continue;
        };
        let b = &right.sentences[j];
        let inconsistencies = align_and_compare(a, b).expect("sentence ids are equal");
        if let Ok(c) = agreement_counts(a, b) {
            counts = counts + c;
        }
        sentences.push(SentenceComparison {
            sentence_id: a.sentence_id().to_owned(),
            inconsistencies,
        });
    }
    let only_right = right
        .sentences
        .iter()
        .map(|g| g.sentence_id())
        .filter(|id| !left_ids.contains(id))
        .map(str::to_owned)
        .collect();
    ComparisonReport {
        total_inconsistencies: sentences.iter().map(|s| s.inconsistencies.len()).sum(),
        sentences,
        metrics: Agreement::from_counts(counts),
        only_left,
        only_right,
    }
}

impl ComparisonReport {
    /// Line-oriented form: one line per inconsistency, then the sentences
    /// found on one side only, then the summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            for i in &s.inconsistencies {
                out.push_str(&i.to_line());
                out.push('\n');
            }
        }
        for id in &self.only_left {
            out.push_str(&format!("only-left\t{id}\n"));
        }
        for id in &self.only_right {
            out.push_str(&format!("only-right\t{id}\n"));
        }
        let m = &self.metrics;
        out.push_str(&format!("{} inconsistencies\n", self.total_inconsistencies));
        out.push_str(&format!(
            "precision {:.4} recall {:.4} f1 {:.4} label-accuracy {:.4}\n",
            m.precision, m.recall, m.f1, m.label_accuracy
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use argbank_core::testkit::{sentence_one, sentence_two};
    use argbank_core::NodeId;

    #[test]
    fn identical_corpora() {
        let doc = ExportDocument::new(vec![sentence_one(), sentence_two()]);
        let r = compare_documents(&doc, &doc);
        assert_eq!(r.total_inconsistencies, 0);
        assert_eq!(r.metrics.f1, 1.0);
        assert!(r.to_text().starts_with("0 inconsistencies\n"));
    }

    #[test]
    fn one_edge_label_differs() {
        let a = ExportDocument::new(vec![sentence_one(), sentence_two()]);
        let mut b = a.clone();
        b.sentences[1].set_label(NodeId(3), "SB".into()).unwrap();
        let r = compare_documents(&a, &b);
        assert_eq!(r.total_inconsistencies, 1);
        assert_eq!(r.sentences[1].inconsistencies[0].kind.name(), "function-mismatch");
    }

    #[test]
    fn disjoint_ids() {
        let a = ExportDocument::new(vec![sentence_one()]);
        let b = ExportDocument::new(vec![sentence_two()]);
        let r = compare_documents(&a, &b);
        assert!(r.sentences.is_empty());
        assert_eq!(r.only_left, vec!["s1"]);
        assert_eq!(r.only_right, vec!["s2"]);
    }
}
