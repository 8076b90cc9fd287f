//! Exact best and second-best decoding over a left-to-right lattice.
//!
//! A sequence scores the sum of its step log-probabilities. Among sequences
//! whose scores are within a relative 1e-12 of each other, the one with the
//! lexicographically smallest label-index sequence wins.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::ModelError;

/// Relative score distance below which two sequences count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub trait Lattice {
    type State: Clone + Eq + Hash;

    fn len(&self) -> usize;
    fn num_labels(&self) -> usize;
    fn start(&self) -> Self::State;
    /// Successor state and log-probability of emitting `label` at `pos`,
    /// or `None` if the label is not allowed there.
    fn step(&self, pos: usize, state: &Self::State, label: usize) -> Option<(Self::State, f64)>;
}

/// `a` is at least as good as `target` up to the tie tolerance.
pub fn within_tie(a: f64, target: f64) -> bool {
    if target == f64::NEG_INFINITY {
        a == f64::NEG_INFINITY
    } else {
        a >= target - TIE_TOLERANCE * target.abs().max(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub labels: Vec<usize>,
    pub log_prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub best: Scored,
    pub second: Option<Scored>,
    pub reliable: Vec<bool>,
}

impl DecodeResult {
    /// Log-probability distance from the runner-up; infinite without one.
    pub fn gap(&self) -> f64 {
        match &self.second {
            Some(s) => self.best.log_prob - s.log_prob,
            None => f64::INFINITY,
        }
    }

    /// Flags the positions where best and second differ, but only when the
    /// gap is below `threshold`.
    pub fn mark_reliability(mut self, threshold: f64) -> Result<Self, ModelError> {
        if threshold.is_nan() || threshold < 0.0 {
            return Err(ModelError::NegativeThreshold(threshold));
        }
        let gap = self.gap();
        self.reliable = match &self.second {
            Some(second) if gap < threshold => self
                .best
                .labels
                .iter()
                .zip(&second.labels)
                .map(|(a, b)| a == b)
                .collect(),
            _ => vec![true; self.best.labels.len()],
        };
        Ok(self)
    }
}

struct Chart<S> {
    layers: Vec<Vec<S>>,
    index: Vec<HashMap<S, usize>>,
    /// Best completion score from each state; `None` if it cannot finish.
    beta: Vec<Vec<Option<f64>>>,
}

fn chart<L: Lattice>(lat: &L) -> Chart<L::State> {
    let n = lat.len();
    let start = lat.start();
    let mut layers = vec![vec![start.clone()]];
    let mut index = vec![HashMap::from([(start, 0)])];
    for i in 0..n {
        let mut next: Vec<L::State> = Vec::new();
        let mut next_index: HashMap<L::State, usize> = HashMap::new();
        for s in &layers[i] {
            for l in 0..lat.num_labels() {
                if let Some((s2, _)) = lat.step(i, s, l) {
                    if !next_index.contains_key(&s2) {
                        next_index.insert(s2.clone(), next.len());
                        next.push(s2);
                    }
                }
            }
        }
        layers.push(next);
        index.push(next_index);
    }
    let mut beta: Vec<Vec<Option<f64>>> = layers.iter().map(|l| vec![None; l.len()]).collect();
    beta[n].iter_mut().for_each(|b| *b = Some(0.0));
    for i in (0..n).rev() {
        for (j, s) in layers[i].iter().enumerate() {
            let mut best: Option<f64> = None;
            for l in 0..lat.num_labels() {
                if let Some((s2, score)) = lat.step(i, s, l) {
                    if let Some(b) = beta[i + 1][index[i + 1][&s2]] {
                        let v = score + b;
                        if best.map_or(true, |x| v > x) {
                            best = Some(v);
                        }
                    }
                }
            }
            beta[i][j] = best;
        }
    }
    Chart {
        layers,
        index,
        beta,
    }
}

impl<S: Clone + Eq + Hash> Chart<S> {
    /// Lexicographically smallest completion from state `j` at `pos` whose
    /// total is tied with `target`. Returns the total of the completed path.
    fn complete<L: Lattice<State = S>>(
        &self,
        lat: &L,
        mut pos: usize,
        mut j: usize,
        mut prefix: f64,
        target: f64,
        out: &mut Vec<usize>,
    ) -> f64 {
        while pos < lat.len() {
            let s = &self.layers[pos][j];
            let mut first_tied = None;
            let mut argmax: Option<(usize, usize, f64, f64)> = None;
            for l in 0..lat.num_labels() {
                let Some((s2, score)) = lat.step(pos, s, l) else { continue };
                let k = self.index[pos + 1][&s2];
                let Some(b) = self.beta[pos + 1][k] else { continue };
                let total = prefix + score + b;
                if within_tie(total, target) {
                    first_tied = Some((l, k, score));
                    break;
                }
                if argmax.map_or(true, |a| total > a.3) {
                    argmax = Some((l, k, score, total));
                }
            }
            // rounding can push every candidate just outside the window
            let (l, k, score) = first_tied
                .or(argmax.map(|a| (a.0, a.1, a.2)))
                .expect("a state with a finite completion has a successor");
            out.push(l);
            prefix += score;
            j = k;
            pos += 1;
        }
        prefix
    }
}

/// Best sequence, or `None` when no label sequence is allowed at all.
pub fn viterbi<L: Lattice>(lat: &L) -> Option<Scored> {
    let c = chart(lat);
    let target = c.beta[0][0]?;
    let mut labels = Vec::with_capacity(lat.len());
    let log_prob = c.complete(lat, 0, 0, 0.0, target, &mut labels);
    Some(Scored { labels, log_prob })
}

/// Best and runner-up sequences. The runner-up is absent when every other
/// sequence has probability zero or is disallowed.
pub fn two_best<L: Lattice>(lat: &L) -> Option<DecodeResult> {
    let c = chart(lat);
    let target = c.beta[0][0]?;
    let mut labels = Vec::with_capacity(lat.len());
    let log_prob = c.complete(lat, 0, 0, 0.0, target, &mut labels);

    // states and prefix scores along the best path
    let mut states = vec![0usize];
    let mut prefixes = vec![0.0];
    for (i, &l) in labels.iter().enumerate() {
        let s = &c.layers[i][states[i]];
        let (s2, score) = lat.step(i, s, l).expect("best path is allowed");
        states.push(c.index[i + 1][&s2]);
        prefixes.push(prefixes[i] + score);
    }

    // every other sequence first leaves the best path at some (i, l)
    let mut branches: Vec<(usize, usize, usize, f64, f64)> = Vec::new();
    for i in 0..labels.len() {
        let s = &c.layers[i][states[i]];
        for l in 0..lat.num_labels() {
            if l == labels[i] {
                continue;
            }
            let Some((s2, score)) = lat.step(i, s, l) else { continue };
            let k = c.index[i + 1][&s2];
            let Some(b) = c.beta[i + 1][k] else { continue };
            branches.push((i, l, k, prefixes[i] + score, prefixes[i] + score + b));
        }
    }
    let second_score = branches
        .iter()
        .map(|b| b.4)
        .fold(f64::NEG_INFINITY, f64::max);
    let second = if second_score == f64::NEG_INFINITY {
        None
    } else {
        branches
            .iter()
            .filter(|b| within_tie(b.4, second_score))
            .map(|&(i, l, k, prefix, _)| {
                let mut seq = labels[..i].to_vec();
                seq.push(l);
                let lp = c.complete(lat, i + 1, k, prefix, second_score, &mut seq);
                Scored {
                    labels: seq,
                    log_prob: lp,
                }
            })
            .min_by(|a, b| a.labels.cmp(&b.labels))
    };
    let n = labels.len();
    Some(DecodeResult {
        best: Scored { labels, log_prob },
        second,
        reliable: vec![true; n],
    })
}
