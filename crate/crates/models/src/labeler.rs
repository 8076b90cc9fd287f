//! Grammatical-function labeling with one Markov model per phrasal category.
//!
//! States are function labels and outputs are child tags: the part-of-speech
//! tag of a terminal child or the category of a nonterminal child. Children
//! are read in the graph's canonical order (leftmost terminal first). Running
//! every category's model and keeping the most probable one selects the
//! phrasal category at the same time.

use std::collections::{BTreeMap, BTreeSet};

use argbank_core::{Category, FunctionLabel, Parent, Strictness, SyntaxGraph};
use serde::{Deserialize, Serialize};

use crate::chain::{count_divisor, Chain, ChainCounts, Emissions};
use crate::decode::{self, DecodeResult, Lattice};
use crate::ModelError;

pub const EMISSION_SMOOTHING: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseEvent {
    pub category: Category,
    /// `(child tag, edge label)` in child order.
    pub children: Vec<(String, FunctionLabel)>,
}

/// One event per nonterminal, in sentence order then node-id order.
pub fn extract_events(treebank: &[SyntaxGraph]) -> Result<Vec<PhraseEvent>, ModelError> {
    let mut out = Vec::new();
    for g in treebank {
        if let Some(v) = g.validate(Strictness::Lenient).first() {
            return Err(ModelError::Invalid {
                sentence_id: g.sentence_id().to_owned(),
                message: v.to_string(),
            });
        }
        let st = g.structure();
        for n in g.nonterminal_ids() {
            let children = st
                .children_of(Parent::Node(n))
                .iter()
                .map(|&c| {
                    (
                        g.child_tag(c).expect("child exists").to_owned(),
                        g.edge(c).expect("child exists").label.clone(),
                    )
                })
                .collect();
            out.push(PhraseEvent {
                category: g.category(n).expect("nonterminal").clone(),
                children,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelerConfig {
    /// Markov order over function labels, 1 or 2.
    pub order: usize,
    /// Weight each category's best sequence by the category's relative
    /// frequency when choosing the category.
    pub use_priors: bool,
}

impl Default for LabelerConfig {
    fn default() -> Self {
        LabelerConfig {
            order: 2,
            use_priors: true,
        }
    }
}

/// The Markov model of one phrasal category.
#[derive(Clone, Debug, PartialEq)]
pub struct PhraseModel {
    category: Category,
    labels: Vec<FunctionLabel>,
    chain: Chain,
    emissions: Emissions,
    events: u64,
}

impl PhraseModel {
    pub fn category(&self) -> &Category {
        &self.category
    }

    /// State labels in index order.
    pub fn labels(&self) -> &[FunctionLabel] {
        &self.labels
    }

    pub fn event_count(&self) -> u64 {
        self.events
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    /// Smoothed log P(label t | u, v) over label indices; `labels().len()`
    /// is the phrase-boundary context.
    pub fn log_transition(&self, u: usize, v: usize, t: usize) -> f64 {
        self.chain.log_prob(u, v, t)
    }

    pub fn log_emission(&self, label: usize, child_tag: &str) -> f64 {
        self.emissions.log_prob(label, child_tag)
    }

    pub fn emission_count(&self, label: usize, child_tag: &str) -> u64 {
        self.emissions.count(label, child_tag)
    }

    fn lattice<'a, S: AsRef<str>>(&'a self, tags: &'a [S], single_head: bool) -> PhraseLattice<'a, S> {
        PhraseLattice {
            model: self,
            tags,
            head: if single_head {
                self.labels.iter().position(|l| l.is_head())
            } else {
                None
            },
        }
    }

    /// Best and runner-up label-index sequences.
    pub fn two_best<S: AsRef<str>>(&self, child_tags: &[S]) -> DecodeResult {
        decode::two_best(&self.lattice(child_tags, false)).expect("every label sequence is allowed")
    }

    /// Like [`PhraseModel::two_best`], restricted to sequences with at most
    /// one head label. `None` if no such sequence exists.
    pub fn two_best_single_head<S: AsRef<str>>(&self, child_tags: &[S]) -> Option<DecodeResult> {
        decode::two_best(&self.lattice(child_tags, true))
    }

    /// The most probable label sequence for the children and its joint
    /// log-probability with the child tags.
    pub fn score_children<S: AsRef<str>>(&self, child_tags: &[S]) -> (Vec<FunctionLabel>, f64) {
        let best = decode::viterbi(&self.lattice(child_tags, false)).expect("every label sequence is allowed");
        (self.names(&best.labels), best.log_prob)
    }

    pub fn names(&self, labels: &[usize]) -> Vec<FunctionLabel> {
        labels.iter().map(|&i| self.labels[i].clone()).collect()
    }
}

struct PhraseLattice<'a, S> {
    model: &'a PhraseModel,
    tags: &'a [S],
    /// Index of the head label when at most one head is allowed.
    head: Option<usize>,
}

impl<S: AsRef<str>> Lattice for PhraseLattice<'_, S> {
    type State = (usize, usize, bool);

    fn len(&self) -> usize {
        self.tags.len()
    }

    fn num_labels(&self) -> usize {
        self.model.labels.len()
    }

    fn start(&self) -> (usize, usize, bool) {
        let b = self.model.labels.len();
        (b, b, false)
    }

    fn step(&self, pos: usize, &(u, v, headed): &(usize, usize, bool), t: usize) -> Option<((usize, usize, bool), f64)> {
        let is_head = self.head == Some(t);
        if headed && is_head {
            return None;
        }
        let score = self.model.chain.log_prob(u, v, t)
            + self.model.emissions.log_prob(t, self.tags[pos].as_ref());
        Some(((v, t, headed || is_head), score))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelThresholds {
    /// Minimal log-score gap between the best and runner-up category.
    pub category: f64,
    /// Minimal log-probability gap between the best and runner-up label
    /// sequence of the chosen category.
    pub label: f64,
}

impl Default for LabelThresholds {
    fn default() -> Self {
        LabelThresholds {
            category: crate::pos::DEFAULT_THRESHOLD,
            label: crate::pos::DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelingResult {
    pub category: Category,
    pub category_reliable: bool,
    /// Score distance to the runner-up category, infinite without one.
    pub category_gap: f64,
    pub labels: Vec<FunctionLabel>,
    pub label_reliable: Vec<bool>,
    /// Joint log-probability of labels and child tags under the category.
    pub log_probability: f64,
    /// `log_probability` plus the log prior when priors are in use.
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelerModel {
    config: LabelerConfig,
    models: BTreeMap<Category, PhraseModel>,
    alphabet: BTreeSet<String>,
    total_events: u64,
}

impl LabelerModel {
    pub fn config(&self) -> LabelerConfig {
        self.config
    }

    pub fn set_use_priors(&mut self, use_priors: bool) {
        self.config.use_priors = use_priors;
    }

    pub fn categories(&self) -> impl Iterator<Item = &Category> {
        self.models.keys()
    }

    pub fn phrase_model(&self, category: &str) -> Option<&PhraseModel> {
        self.models.get(category)
    }

    /// Child tags seen in training, shared by all phrase models.
    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    pub fn prior(&self, category: &str) -> f64 {
        self.models
            .get(category)
            .map_or(0.0, |m| m.events as f64 / self.total_events as f64)
    }

    /// Score used for choosing among categories.
    pub fn category_score(&self, category: &str, log_probability: f64) -> f64 {
        if self.config.use_priors {
            self.prior(category).ln() + log_probability
        } else {
            log_probability
        }
    }

    pub fn label_phrase<S: AsRef<str>>(
        &self,
        child_tags: &[S],
        known_category: Option<&str>,
        thresholds: LabelThresholds,
    ) -> Result<LabelingResult, ModelError> {
        self.label(child_tags, known_category, thresholds, false)
    }

    /// Like [`LabelerModel::label_phrase`], but only label sequences with at
    /// most one head label are considered, so the result can be attached
    /// to a graph as is. Categories without such a sequence are skipped.
    pub fn label_phrase_single_head<S: AsRef<str>>(
        &self,
        child_tags: &[S],
        known_category: Option<&str>,
        thresholds: LabelThresholds,
    ) -> Result<LabelingResult, ModelError> {
        self.label(child_tags, known_category, thresholds, true)
    }

    fn label<S: AsRef<str>>(
        &self,
        child_tags: &[S],
        known_category: Option<&str>,
        thresholds: LabelThresholds,
        single_head: bool,
    ) -> Result<LabelingResult, ModelError> {
        if child_tags.is_empty() {
            return Err(ModelError::EmptyChildren);
        }
        for t in [thresholds.category, thresholds.label] {
            if t.is_nan() || t < 0.0 {
                return Err(ModelError::NegativeThreshold(t));
            }
        }
        let decode = |m: &PhraseModel| {
            if single_head {
                m.two_best_single_head(child_tags)
            } else {
                Some(m.two_best(child_tags))
            }
        };
        let (model, decoded, gap) = match known_category {
            Some(c) => {
                let m = self
                    .models
                    .get(c)
                    .ok_or_else(|| ModelError::UnknownCategory(c.to_owned()))?;
                let d = decode(m).ok_or(ModelError::NoAdmissibleLabels)?;
                (m, d, f64::INFINITY)
            }
            None => {
                // fixed iteration order; ties keep the first category
                let mut scored: Vec<(f64, &PhraseModel, DecodeResult)> = Vec::with_capacity(self.models.len());
                for m in self.models.values() {
                    if let Some(d) = decode(m) {
                        scored.push((self.category_score(&m.category, d.best.log_prob), m, d));
                    }
                }
                if scored.is_empty() {
                    return Err(ModelError::NoAdmissibleLabels);
                }
                let mut best = 0;
                for i in 1..scored.len() {
                    if scored[i].0 > scored[best].0 {
                        best = i;
                    }
                }
                let runner_up = scored
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != best)
                    .map(|(_, s)| s.0)
                    .fold(f64::NEG_INFINITY, f64::max);
                let gap = if runner_up == f64::NEG_INFINITY {
                    f64::INFINITY
                } else {
                    scored[best].0 - runner_up
                };
                let (_, m, d) = scored.swap_remove(best);
                (m, d, gap)
            }
        };
        let r = decoded.mark_reliability(thresholds.label)?;
        Ok(LabelingResult {
            category: model.category.clone(),
            category_reliable: known_category.is_some() || gap >= thresholds.category,
            category_gap: gap,
            labels: model.names(&r.best.labels),
            label_reliable: r.reliable,
            log_probability: r.best.log_prob,
            score: self.category_score(&model.category, r.best.log_prob),
        })
    }
}

pub fn train_labeler(treebank: &[SyntaxGraph], config: LabelerConfig) -> Result<LabelerModel, ModelError> {
    train_labeler_events(&extract_events(treebank)?, config)
}

pub fn train_labeler_events(events: &[PhraseEvent], config: LabelerConfig) -> Result<LabelerModel, ModelError> {
    if events.is_empty() {
        return Err(ModelError::NoEvents);
    }
    if !(config.order == 1 || config.order == 2) {
        return Err(ModelError::Format(format!("unsupported labeler order {}", config.order)));
    }
    let mut grouped: BTreeMap<&Category, Vec<&PhraseEvent>> = BTreeMap::new();
    for e in events {
        grouped.entry(&e.category).or_default().push(e);
    }
    let parts: Vec<PhraseCounts> = grouped
        .into_iter()
        .map(|(category, evs)| {
            let labels: Vec<FunctionLabel> = evs
                .iter()
                .flat_map(|e| e.children.iter().map(|c| c.1.clone()))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let index: BTreeMap<&FunctionLabel, usize> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
            let mut emissions = vec![BTreeMap::new(); labels.len()];
            let mut sequences = Vec::with_capacity(evs.len());
            for e in &evs {
                let mut seq = Vec::with_capacity(e.children.len());
                for (tag, label) in &e.children {
                    let i = index[label];
                    seq.push(i);
                    *emissions[i].entry(tag.clone()).or_insert(0u64) += 1;
                }
                sequences.push(seq);
            }
            PhraseCounts {
                category: category.clone(),
                events: evs.len() as u64,
                transitions: Chain::count(config.order, labels.len(), &sequences),
                labels,
                emissions: emissions
                    .into_iter()
                    .map(|m| m.into_iter().collect())
                    .collect(),
            }
        })
        .collect();
    LabelerModel::try_from(LabelerSection { config, phrases: parts })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhraseCounts {
    category: Category,
    events: u64,
    labels: Vec<FunctionLabel>,
    transitions: ChainCounts,
    /// Per label, `(child tag, count)` pairs.
    emissions: Vec<Vec<(String, u64)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelerSection {
    config: LabelerConfig,
    phrases: Vec<PhraseCounts>,
}

impl TryFrom<LabelerSection> for LabelerModel {
    type Error = ModelError;

    fn try_from(s: LabelerSection) -> Result<Self, ModelError> {
        if s.phrases.is_empty() {
            return Err(ModelError::NoEvents);
        }
        let alphabet: BTreeSet<String> = s
            .phrases
            .iter()
            .flat_map(|p| p.emissions.iter().flatten().map(|(t, _)| t.clone()))
            .collect();
        let divisor = count_divisor(s.phrases.iter().flat_map(|p| {
            std::iter::once(p.events)
                .chain(p.transitions.unigram.iter().copied())
                .chain(p.transitions.bigram.iter().map(|e| e[2]))
                .chain(p.transitions.trigram.iter().map(|e| e[3]))
                .chain(p.emissions.iter().flatten().map(|e| e.1))
        }));
        let mut models = BTreeMap::new();
        let mut total_events = 0;
        for p in s.phrases {
            if p.transitions.states != p.labels.len() || p.emissions.len() != p.labels.len() {
                return Err(ModelError::Format(format!(
                    "phrase model {} does not match its label list",
                    p.category
                )));
            }
            if p.transitions.order != s.config.order {
                return Err(ModelError::Format(format!("phrase model {} has the wrong order", p.category)));
            }
            total_events += p.events;
            let emissions = Emissions::new(
                p.emissions.into_iter().map(|v| v.into_iter().collect()).collect(),
                alphabet.len(),
                EMISSION_SMOOTHING,
                divisor,
            );
            let model = PhraseModel {
                category: p.category.clone(),
                chain: Chain::from_counts(&p.transitions, divisor)?,
                labels: p.labels,
                emissions,
                events: p.events,
            };
            if models.insert(p.category.clone(), model).is_some() {
                return Err(ModelError::Format(format!("duplicate phrase model {}", p.category)));
            }
        }
        Ok(LabelerModel {
            config: s.config,
            models,
            alphabet,
            total_events,
        })
    }
}

impl From<LabelerModel> for LabelerSection {
    fn from(m: LabelerModel) -> Self {
        LabelerSection {
            config: m.config,
            phrases: m
                .models
                .into_values()
                .map(|p| PhraseCounts {
                    category: p.category,
                    events: p.events,
                    transitions: p.chain.to_counts(),
                    emissions: p
                        .emissions
                        .counts()
                        .iter()
                        .map(|m| m.iter().map(|(k, &v)| (k.clone(), v)).collect())
                        .collect(),
                    labels: p.labels,
                })
                .collect(),
        }
    }
}

impl Serialize for LabelerModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LabelerSection::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for LabelerModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = LabelerSection::deserialize(d)?;
        LabelerModel::try_from(s).map_err(serde::de::Error::custom)
    }
}
