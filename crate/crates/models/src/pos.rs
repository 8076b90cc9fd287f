//! Trigram part-of-speech tagger.
//!
//! Known words emit with their relative frequency per tag. Unknown words
//! use the longest suffix (up to five characters, keyed together with a
//! capitalization flag) seen in training: P(w|t) = P(t|suffix) / P(t) / (N+1),
//! with P(t|suffix) smoothed additively by 0.5 per tag.

use std::collections::BTreeMap;

use argbank_core::export::ExportDocument;
use argbank_core::PosTag;
use serde::{Deserialize, Serialize};

use crate::chain::{count_divisor, Chain, ChainCounts};
use crate::decode::{self, DecodeResult, Lattice};
use crate::ModelError;

pub const MAX_SUFFIX: usize = 5;
pub const SUFFIX_SMOOTHING: f64 = 0.5;
/// ln 10: the best assignment must be ten times as likely as the runner-up.
pub const DEFAULT_THRESHOLD: f64 = std::f64::consts::LN_10;

pub type TaggedSentence = Vec<(String, PosTag)>;

/// Word/tag pairs of every sentence in a document.
pub fn tagged_sentences(doc: &ExportDocument) -> Vec<TaggedSentence> {
    doc.sentences
        .iter()
        .map(|g| g.tokens().iter().map(|t| (t.form.clone(), t.pos.clone())).collect())
        .collect()
}

fn capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

fn suffixes(word: &str) -> impl Iterator<Item = String> + '_ {
    let chars: Vec<char> = word.chars().collect();
    let max = chars.len().min(MAX_SUFFIX);
    (0..=max).map(move |l| chars[chars.len() - l..].iter().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SuffixEntry {
    suffix: String,
    capitalized: bool,
    counts: Vec<[u64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct LexEntry {
    form: String,
    counts: Vec<[u64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosSection {
    tags: Vec<PosTag>,
    transitions: ChainCounts,
    lexicon: Vec<LexEntry>,
    suffixes: Vec<SuffixEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PosSection", into = "PosSection")]
pub struct TrigramModel {
    tags: Vec<PosTag>,
    chain: Chain,
    lexicon: BTreeMap<String, BTreeMap<usize, u64>>,
    suffixes: BTreeMap<(String, bool), BTreeMap<usize, u64>>,
    divisor: u64,
    total: f64,
}

fn sparse(m: &BTreeMap<usize, u64>) -> Vec<[u64; 2]> {
    m.iter().map(|(&t, &c)| [t as u64, c]).collect()
}

impl From<TrigramModel> for PosSection {
    fn from(m: TrigramModel) -> PosSection {
        PosSection {
            tags: m.tags.clone(),
            transitions: m.chain.to_counts(),
            lexicon: m
                .lexicon
                .iter()
                .map(|(form, c)| LexEntry {
                    form: form.clone(),
                    counts: sparse(c),
                })
                .collect(),
            suffixes: m
                .suffixes
                .iter()
                .map(|((suffix, cap), c)| SuffixEntry {
                    suffix: suffix.clone(),
                    capitalized: *cap,
                    counts: sparse(c),
                })
                .collect(),
        }
    }
}

impl TryFrom<PosSection> for TrigramModel {
    type Error = ModelError;

    fn try_from(s: PosSection) -> Result<Self, ModelError> {
        let n = s.tags.len();
        if s.transitions.states != n || s.transitions.order != 2 {
            return Err(ModelError::Format("pos transitions do not match the tag list".into()));
        }
        let dense = |counts: &[[u64; 2]]| -> Result<BTreeMap<usize, u64>, ModelError> {
            counts
                .iter()
                .map(|&[t, c]| {
                    if (t as usize) < n {
                        Ok((t as usize, c))
                    } else {
                        Err(ModelError::Format(format!("tag index {t} out of range")))
                    }
                })
                .collect()
        };
        let mut lexicon = BTreeMap::new();
        for e in &s.lexicon {
            lexicon.insert(e.form.clone(), dense(&e.counts)?);
        }
        let mut suffixes = BTreeMap::new();
        for e in &s.suffixes {
            suffixes.insert((e.suffix.clone(), e.capitalized), dense(&e.counts)?);
        }
        TrigramModel::assemble(s.tags, &s.transitions, lexicon, suffixes)
    }
}

impl TrigramModel {
    fn assemble(
        tags: Vec<PosTag>,
        counts: &ChainCounts,
        lexicon: BTreeMap<String, BTreeMap<usize, u64>>,
        suffixes: BTreeMap<(String, bool), BTreeMap<usize, u64>>,
    ) -> Result<Self, ModelError> {
        let divisor = count_divisor(
            counts
                .unigram
                .iter()
                .copied()
                .chain(counts.bigram.iter().map(|e| e[2]))
                .chain(counts.trigram.iter().map(|e| e[3]))
                .chain(lexicon.values().flat_map(|m| m.values().copied()))
                .chain(suffixes.values().flat_map(|m| m.values().copied())),
        );
        let chain = Chain::from_counts(counts, divisor)?;
        let total = counts.unigram.iter().sum::<u64>() as f64 / divisor as f64;
        Ok(TrigramModel {
            tags,
            chain,
            lexicon,
            suffixes,
            divisor,
            total,
        })
    }

    pub fn tags(&self) -> &[PosTag] {
        &self.tags
    }

    pub fn tag_index(&self, tag: &str) -> Option<usize> {
        self.tags.binary_search_by(|t| t.as_str().cmp(tag)).ok()
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    /// Interpolation weights (unigram, bigram, trigram).
    pub fn lambdas(&self) -> [f64; 3] {
        let l = self.chain.lambdas();
        [l[0], l[1], l[2]]
    }

    pub fn total_tokens(&self) -> u64 {
        (0..self.tags.len()).map(|t| self.chain.unigram(t)).sum()
    }

    pub fn emission_count(&self, word: &str, tag: usize) -> u64 {
        self.lexicon
            .get(word)
            .and_then(|m| m.get(&tag))
            .copied()
            .unwrap_or(0)
    }

    pub fn is_known(&self, word: &str) -> bool {
        self.lexicon.contains_key(word)
    }

    /// Smoothed log P(t | u, v) over tag indices; `tags().len()` is the
    /// sentence-boundary context.
    pub fn log_transition(&self, u: usize, v: usize, t: usize) -> f64 {
        self.chain.log_prob(u, v, t)
    }

    /// log P(word | tag) for every tag.
    pub fn log_emissions(&self, word: &str) -> Vec<f64> {
        let n = self.tags.len();
        let d = self.divisor as f64;
        let tag_count = |t: usize| self.chain.unigram(t) as f64 / d;
        if let Some(counts) = self.lexicon.get(word) {
            return (0..n)
                .map(|t| {
                    let c = counts.get(&t).copied().unwrap_or(0) as f64 / d;
                    (c / tag_count(t)).ln()
                })
                .collect();
        }
        let cap = capitalized(word);
        let longest: Vec<String> = suffixes(word).collect();
        let dist = longest
            .iter()
            .rev()
            .find_map(|s| self.suffixes.get(&(s.clone(), cap)));
        let scale = 1.0 / (self.total + 1.0);
        (0..n)
            .map(|t| {
                let prior = tag_count(t) / self.total;
                let p_t_given_s = match dist {
                    Some(m) => {
                        let c = m.get(&t).copied().unwrap_or(0) as f64 / d;
                        let tot: f64 = m.values().map(|&c| c as f64 / d).sum();
                        (c + SUFFIX_SMOOTHING) / (tot + SUFFIX_SMOOTHING * n as f64)
                    }
                    None => prior,
                };
                (p_t_given_s / prior * scale).ln()
            })
            .collect()
    }

    fn lattice<S: AsRef<str>>(&self, words: &[S]) -> PosLattice<'_> {
        PosLattice {
            model: self,
            rows: words.iter().map(|w| self.log_emissions(w.as_ref())).collect(),
        }
    }

    fn names(&self, labels: &[usize]) -> Vec<PosTag> {
        labels.iter().map(|&i| self.tags[i].clone()).collect()
    }

    /// The most probable tag sequence and its joint log-probability.
    pub fn viterbi<S: AsRef<str>>(&self, words: &[S]) -> (Vec<PosTag>, f64) {
        let best = decode::viterbi(&self.lattice(words)).expect("every tag sequence is allowed");
        (self.names(&best.labels), best.log_prob)
    }

    /// Best and runner-up tag-index sequences, all positions reliable.
    pub fn two_best<S: AsRef<str>>(&self, words: &[S]) -> DecodeResult {
        decode::two_best(&self.lattice(words)).expect("every tag sequence is allowed")
    }

    pub fn tag_pos<S: AsRef<str>>(
        &self,
        words: &[S],
        threshold: f64,
    ) -> Result<Vec<(PosTag, bool)>, ModelError> {
        let r = self.two_best(words).mark_reliability(threshold)?;
        Ok(self
            .names(&r.best.labels)
            .into_iter()
            .zip(r.reliable)
            .collect())
    }
}

struct PosLattice<'a> {
    model: &'a TrigramModel,
    rows: Vec<Vec<f64>>,
}

impl Lattice for PosLattice<'_> {
    type State = (usize, usize);

    fn len(&self) -> usize {
        self.rows.len()
    }

    fn num_labels(&self) -> usize {
        self.model.tags.len()
    }

    fn start(&self) -> (usize, usize) {
        let b = self.model.tags.len();
        (b, b)
    }

    fn step(&self, pos: usize, &(u, v): &(usize, usize), t: usize) -> Option<((usize, usize), f64)> {
        Some(((v, t), self.model.chain.log_prob(u, v, t) + self.rows[pos][t]))
    }
}

pub fn train_trigram(corpus: &[TaggedSentence]) -> Result<TrigramModel, ModelError> {
    if corpus.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    if let Some(i) = corpus.iter().position(Vec::is_empty) {
        return Err(ModelError::EmptySentence(i));
    }
    let tags: Vec<PosTag> = corpus
        .iter()
        .flatten()
        .map(|(_, t)| t.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = tags.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut sequences = Vec::with_capacity(corpus.len());
    let mut lexicon: BTreeMap<String, BTreeMap<usize, u64>> = BTreeMap::new();
    let mut suffix_counts: BTreeMap<(String, bool), BTreeMap<usize, u64>> = BTreeMap::new();
    for sentence in corpus {
        let mut seq = Vec::with_capacity(sentence.len());
        for (word, tag) in sentence {
            let t = index[tag.as_str()];
            seq.push(t);
            *lexicon.entry(word.clone()).or_default().entry(t).or_default() += 1;
            let cap = capitalized(word);
            for s in suffixes(word) {
                *suffix_counts.entry((s, cap)).or_default().entry(t).or_default() += 1;
            }
        }
        sequences.push(seq);
    }
    let counts = Chain::count(2, tags.len(), &sequences);
    TrigramModel::assemble(tags, &counts, lexicon, suffix_counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(spec: &[&[(&str, &str)]]) -> Vec<TaggedSentence> {
        spec.iter()
            .map(|s| s.iter().map(|(w, t)| (w.to_string(), PosTag::from(*t))).collect())
            .collect()
    }

    #[test]
    fn single_sentence_counts() {
        let m = train_trigram(&corpus(&[&[("a", "X"), ("b", "Y")]])).unwrap();
        let (x, y) = (m.tag_index("X").unwrap(), m.tag_index("Y").unwrap());
        assert_eq!(m.chain().bigram(x, y), 1);
        assert_eq!(m.emission_count("a", x), 1);
        // every leave-one-out ratio is 0/0, so all votes go to the unigram
        assert_eq!(m.lambdas(), [1.0, 0.0, 0.0]);
        assert_eq!(m.log_transition(2, x, y), 0.5f64.ln());
        // the emission of "b" is certain under Y and impossible under X
        assert_eq!(m.log_emissions("b"), vec![f64::NEG_INFINITY, 0.0]);
        assert_eq!(m.viterbi(&["a", "b"]).0, vec![PosTag::from("X"), PosTag::from("Y")]);
    }

    #[test]
    fn single_tag_corpus_is_a_point_mass() {
        let m = train_trigram(&corpus(&[&[("a", "X"), ("b", "X"), ("c", "X")]])).unwrap();
        assert_eq!(m.lambdas(), [1.0, 0.0, 0.0]);
        assert_eq!(m.log_transition(1, 1, 0), 0.0);
        assert_eq!(m.log_transition(0, 0, 0), 0.0);
    }

    #[test]
    fn vote_tally_on_three_sentences() {
        let c = corpus(&[
            &[("a", "X"), ("b", "Y")],
            &[("c", "Y"), ("d", "X")],
            &[("e", "X"), ("f", "X")],
        ]);
        let m = train_trigram(&c).unwrap();
        // X:4 Y:2 N=6; contexts <>:3 X:2 Y:1, <><>:3 <>X:2 <>Y:1.
        // Leave-one-out ratios (uni, bi, tri) per trigram type:
        //   <> <> X (2 tokens): (3/5, 1/2, 1/2) -> uni
        //   <> X Y:             (1/5, 0,   0)   -> uni
        //   <> <> Y:            (1/5, 0,   0)   -> uni
        //   <> Y X:             (3/5, 0,   0)   -> uni
        //   <> X X:             (3/5, 0,   0)   -> uni
        assert_eq!(m.lambdas(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn vote_tally_with_repeated_patterns() {
        let c = corpus(&[
            &[("a", "X"), ("b", "Y"), ("c", "Y")],
            &[("a", "X"), ("b", "Y"), ("c", "Y")],
            &[("d", "Y")],
        ]);
        let m = train_trigram(&c).unwrap();
        // X:2 Y:5 N=7; contexts <>:3 X:2 Y:2, <><>:3 <>X:2 XY:2.
        //   <> <> X (2 tokens): (1/6, 1/2, 1/2) -> bi
        //   <> X Y  (2 tokens): (4/6, 1,   1)   -> bi
        //   X Y Y   (2 tokens): (4/6, 1,   1)   -> bi
        //   <> <> Y (1 token):  (4/6, 0,   0)   -> uni
        assert_eq!(m.lambdas(), [1.0 / 7.0, 6.0 / 7.0, 0.0]);
    }

    #[test]
    fn duplication_keeps_probabilities() {
        let base = corpus(&[
            &[("der", "ART"), ("Mann", "NN"), ("sah", "VVFIN")],
            &[("die", "ART"), ("Frau", "NN"), ("lacht", "VVFIN"), ("laut", "ADJD")],
            &[("Mann", "NN"), ("lacht", "VVFIN")],
        ]);
        let twice: Vec<_> = base.iter().chain(base.iter()).cloned().collect();
        let a = train_trigram(&base).unwrap();
        let b = train_trigram(&twice).unwrap();
        assert_eq!(a.lambdas(), b.lambdas());
        assert_eq!(b.emission_count("Mann", b.tag_index("NN").unwrap()), 4);
        for w in [["der", "Frau", "lachte"], ["Haus", "sah", "laut"]] {
            assert_eq!(a.two_best(&w), b.two_best(&w));
        }
    }

    #[test]
    fn unknown_words_use_suffixes() {
        let c = corpus(&[
            &[("Hund", "NN"), ("bellt", "VVFIN")],
            &[("Katze", "NN"), ("schläft", "VVFIN")],
            &[("Maus", "NN"), ("rennt", "VVFIN")],
        ]);
        let m = train_trigram(&c).unwrap();
        assert!(!m.is_known("Pferd") && !m.is_known("läuft"));
        let tags = m.viterbi(&["Pferd", "läuft"]).0;
        assert_eq!(tags, vec![PosTag::from("NN"), PosTag::from("VVFIN")]);
        let e = m.log_emissions("Pferd");
        assert!(e[m.tag_index("NN").unwrap()] > e[m.tag_index("VVFIN").unwrap()]);
    }

    #[test]
    fn empty_sentence_and_errors() {
        let m = train_trigram(&corpus(&[&[("a", "X")]])).unwrap();
        assert_eq!(m.viterbi::<&str>(&[]), (vec![], 0.0));
        assert!(matches!(train_trigram(&[]), Err(ModelError::EmptyCorpus)));
        assert!(matches!(
            train_trigram(&[vec![]]),
            Err(ModelError::EmptySentence(0))
        ));
    }

    #[test]
    fn deterministic_lexicon_has_no_runner_up() {
        let m = train_trigram(&corpus(&[&[("a", "X"), ("b", "Y")], &[("b", "Y"), ("a", "X")]])).unwrap();
        let r = m.two_best(&["a", "b", "a"]);
        assert_eq!(r.best.labels, vec![0, 1, 0]);
        assert!(r.second.is_none());
        assert_eq!(
            m.tag_pos(&["a", "b"], DEFAULT_THRESHOLD).unwrap(),
            vec![(PosTag::from("X"), true), (PosTag::from("Y"), true)]
        );
    }

    #[test]
    fn serde_round_trip() {
        let c = corpus(&[&[("Der", "ART"), ("Hund", "NN")], &[("bellt", "VVFIN")]]);
        let m = train_trigram(&c).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: TrigramModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
