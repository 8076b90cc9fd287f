//! Interpolated Markov chain over a closed state set, plus additive-smoothed
//! emission tables.
//!
//! Each training sequence is preceded by two boundary markers (the context
//! index `states`). There is no end marker, so every smoothed row is a
//! distribution over the real states. Probabilities are computed from counts
//! divided by a model-wide divisor (the gcd of all counts of the enclosing
//! model), which makes trained models invariant under corpus duplication.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ModelError;

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The gcd of all nonzero counts, 1 for an empty iterator.
pub fn count_divisor(counts: impl IntoIterator<Item = u64>) -> u64 {
    let g = counts.into_iter().fold(0, gcd);
    g.max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainCounts {
    pub order: usize,
    pub states: usize,
    pub unigram: Vec<u64>,
    /// `[context, state, count]`
    pub bigram: Vec<[u64; 3]>,
    /// `[context2, context1, state, count]`
    pub trigram: Vec<[u64; 4]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    order: usize,
    n: usize,
    unigram: Vec<u64>,
    bigram: BTreeMap<(usize, usize), u64>,
    trigram: BTreeMap<(usize, usize, usize), u64>,
    lambdas: Vec<f64>,
    log_p: Vec<f64>,
}

impl Chain {
    /// Raw counts from state sequences. `order` is 1 (bigram) or 2 (trigram).
    pub fn count(order: usize, states: usize, sequences: &[Vec<usize>]) -> ChainCounts {
        assert!(order == 1 || order == 2, "order must be 1 or 2");
        let mut unigram = vec![0u64; states];
        let mut bigram: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        let mut trigram: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
        for seq in sequences {
            let (mut u, mut v) = (states, states);
            for &t in seq {
                unigram[t] += 1;
                *bigram.entry((v, t)).or_default() += 1;
                if order == 2 {
                    *trigram.entry((u, v, t)).or_default() += 1;
                }
                u = v;
                v = t;
            }
        }
        ChainCounts {
            order,
            states,
            unigram,
            bigram: bigram
                .into_iter()
                .map(|((v, t), c)| [v as u64, t as u64, c])
                .collect(),
            trigram: trigram
                .into_iter()
                .map(|((u, v, t), c)| [u as u64, v as u64, t as u64, c])
                .collect(),
        }
    }

    pub fn from_counts(c: &ChainCounts, divisor: u64) -> Result<Chain, ModelError> {
        let n = c.states;
        let bad = |what: &str| ModelError::Format(format!("transition {what} out of range"));
        if !(c.order == 1 || c.order == 2) {
            return Err(ModelError::Format(format!("unsupported chain order {}", c.order)));
        }
        if c.unigram.len() != n {
            return Err(bad("unigram table"));
        }
        let ctx = |x: u64| -> Result<usize, ModelError> {
            if x as usize <= n {
                Ok(x as usize)
            } else {
                Err(bad("context"))
            }
        };
        let st = |x: u64| -> Result<usize, ModelError> {
            if (x as usize) < n {
                Ok(x as usize)
            } else {
                Err(bad("state"))
            }
        };
        let mut bigram = BTreeMap::new();
        for &[v, t, k] in &c.bigram {
            bigram.insert((ctx(v)?, st(t)?), k);
        }
        let mut trigram = BTreeMap::new();
        for &[u, v, t, k] in &c.trigram {
            trigram.insert((ctx(u)?, ctx(v)?, st(t)?), k);
        }
        let mut chain = Chain {
            order: c.order,
            n,
            unigram: c.unigram.clone(),
            bigram,
            trigram,
            lambdas: Vec::new(),
            log_p: Vec::new(),
        };
        chain.derive(divisor.max(1));
        Ok(chain)
    }

    pub fn to_counts(&self) -> ChainCounts {
        ChainCounts {
            order: self.order,
            states: self.n,
            unigram: self.unigram.clone(),
            bigram: self
                .bigram
                .iter()
                .map(|(&(v, t), &c)| [v as u64, t as u64, c])
                .collect(),
            trigram: self
                .trigram
                .iter()
                .map(|(&(u, v, t), &c)| [u as u64, v as u64, t as u64, c])
                .collect(),
        }
    }

    pub fn all_counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.unigram
            .iter()
            .copied()
            .chain(self.bigram.values().copied())
            .chain(self.trigram.values().copied())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn states(&self) -> usize {
        self.n
    }

    /// Index used for the boundary marker in contexts.
    pub fn boundary(&self) -> usize {
        self.n
    }

    /// Interpolation weights, lowest order first.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn unigram(&self, t: usize) -> u64 {
        self.unigram[t]
    }

    pub fn bigram(&self, v: usize, t: usize) -> u64 {
        self.bigram.get(&(v, t)).copied().unwrap_or(0)
    }

    pub fn trigram(&self, u: usize, v: usize, t: usize) -> u64 {
        self.trigram.get(&(u, v, t)).copied().unwrap_or(0)
    }

    /// Smoothed log P(t | u, v); `u` is ignored at order 1.
    pub fn log_prob(&self, u: usize, v: usize, t: usize) -> f64 {
        let i = match self.order {
            1 => v * self.n + t,
            _ => (u * (self.n + 1) + v) * self.n + t,
        };
        self.log_p[i]
    }

    fn derive(&mut self, divisor: u64) {
        let n = self.n;
        let d = divisor as f64;
        let uni: Vec<f64> = self.unigram.iter().map(|&c| c as f64 / d).collect();
        let total: f64 = uni.iter().sum();
        let mut bi_ctx = vec![0.0; n + 1];
        for (&(v, _), &c) in &self.bigram {
            bi_ctx[v] += c as f64 / d;
        }
        let mut tri_ctx: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (&(u, v, _), &c) in &self.trigram {
            *tri_ctx.entry((u, v)).or_default() += c as f64 / d;
        }
        let bigram = self.bigram.clone();
        let bi = |v: usize, t: usize| bigram.get(&(v, t)).copied().unwrap_or(0) as f64 / d;
        let loo = |num: f64, den: f64| if den - 1.0 > 0.0 { (num - 1.0) / (den - 1.0) } else { 0.0 };

        // deleted interpolation, ties vote for the lower order
        let mut votes = vec![0.0; self.order + 1];
        if self.order == 2 {
            for (&(u, v, t), &c) in &self.trigram {
                let f = c as f64 / d;
                let r3 = loo(f, tri_ctx[&(u, v)]);
                let r2 = loo(bi(v, t), bi_ctx[v]);
                let r1 = loo(uni[t], total);
                let k = if r1 >= r2 && r1 >= r3 {
                    0
                } else if r2 >= r3 {
                    1
                } else {
                    2
                };
                votes[k] += f;
            }
        } else {
            for (&(v, t), &c) in &self.bigram {
                let f = c as f64 / d;
                let r2 = loo(f, bi_ctx[v]);
                let r1 = loo(uni[t], total);
                votes[if r1 >= r2 { 0 } else { 1 }] += f;
            }
        }
        let mass: f64 = votes.iter().sum();
        self.lambdas = if mass > 0.0 {
            votes.iter().map(|v| v / mass).collect()
        } else {
            vec![1.0 / (self.order + 1) as f64; self.order + 1]
        };

        let p1 = |t: usize| if total > 0.0 { uni[t] / total } else { 1.0 / n as f64 };
        let p2 = |v: usize, t: usize| {
            if bi_ctx[v] > 0.0 {
                bi(v, t) / bi_ctx[v]
            } else {
                p1(t)
            }
        };
        let l = self.lambdas.clone();
        if self.order == 1 {
            self.log_p = (0..=n)
                .flat_map(|v| (0..n).map(move |t| (v, t)))
                .map(|(v, t)| (l[0] * p1(t) + l[1] * p2(v, t)).ln())
                .collect();
        } else {
            let mut table = Vec::with_capacity((n + 1) * (n + 1) * n);
            for u in 0..=n {
                for v in 0..=n {
                    let ctx = tri_ctx.get(&(u, v)).copied().unwrap_or(0.0);
                    for t in 0..n {
                        let p3 = if ctx > 0.0 {
                            self.trigram(u, v, t) as f64 / d / ctx
                        } else {
                            p2(v, t)
                        };
                        table.push((l[0] * p1(t) + l[1] * p2(v, t) + l[2] * p3).ln());
                    }
                }
            }
            self.log_p = table;
        }
    }
}

/// Per-state counts of emitted symbols with additive smoothing over the
/// symbol alphabet plus one slot for every unseen symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Emissions {
    counts: Vec<BTreeMap<String, u64>>,
    alphabet_size: usize,
    alpha: f64,
    divisor: f64,
    totals: Vec<f64>,
}

impl Emissions {
    pub fn new(counts: Vec<BTreeMap<String, u64>>, alphabet_size: usize, alpha: f64, divisor: u64) -> Self {
        let d = divisor.max(1) as f64;
        let totals = counts
            .iter()
            .map(|m| m.values().map(|&c| c as f64 / d).sum())
            .collect();
        Emissions {
            counts,
            alphabet_size,
            alpha,
            divisor: d,
            totals,
        }
    }

    pub fn counts(&self) -> &[BTreeMap<String, u64>] {
        &self.counts
    }

    pub fn all_counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.iter().flat_map(|m| m.values().copied())
    }

    pub fn count(&self, state: usize, symbol: &str) -> u64 {
        self.counts[state].get(symbol).copied().unwrap_or(0)
    }

    pub fn log_prob(&self, state: usize, symbol: &str) -> f64 {
        let c = self.count(state, symbol) as f64 / self.divisor;
        let den = self.totals[state] + self.alpha * (self.alphabet_size + 1) as f64;
        ((c + self.alpha) / den).ln()
    }
}
