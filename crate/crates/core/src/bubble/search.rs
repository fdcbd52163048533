//! Ranked triple search and the pure-bubble frontier.

use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use super::columns::{ColumnStore, Scratch};
use super::{ClassPair, Triple, TripleStats};
use crate::dataset::{rng, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Every 3-subset of the index set in lexicographic order, stopping after
    /// `budget` triples if one is given.
    Exact { budget: Option<u64> },
    /// `budget` uniformly drawn 3-subsets (duplicates evaluated once).
    Sampled { budget: u64, seed: u64 },
}

/// How a reported result was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultMode {
    /// Exhaustive over the index set.
    Exact,
    /// Exhaustive enumeration cut short by the budget; heuristic.
    Partial,
    /// Random sample of triples; heuristic.
    Sampled,
}

impl ResultMode {
    pub fn is_heuristic(&self) -> bool {
        *self != ResultMode::Exact
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub classes: ClassPair,
    /// Candidate coefficient indices; duplicates are ignored.
    pub indices: Vec<usize>,
    pub mode: SearchMode,
    pub top_k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    /// Ascending cost, ties by lexicographic triple.
    pub results: Vec<TripleStats>,
    pub mode: ResultMode,
    pub evaluated: u64,
    pub total_triples: u64,
}

fn choose2(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

fn normalized_indices(indices: &[usize], bound: usize) -> Result<Vec<usize>> {
    let set: BTreeSet<usize> = indices.iter().copied().collect();
    if let Some(&index) = set.iter().find(|&&i| i == 0 || i > bound) {
        return Err(Error::IndexOutOfRange { index, bound });
    }
    if set.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "index set needs at least 3 distinct indices, got {}",
            set.len()
        )));
    }
    Ok(set.into_iter().collect())
}

/// Keeps the `k` best results seen so far.
#[derive(Debug, Clone)]
struct TopK {
    k: usize,
    items: Vec<TripleStats>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self { k, items: Vec::new() }
    }

    fn push(&mut self, s: TripleStats) {
        self.items.push(s);
        if self.items.len() >= 2 * self.k.max(16) {
            self.compact();
        }
    }

    fn compact(&mut self) {
        self.items.sort_by(TripleStats::rank_cmp);
        self.items.truncate(self.k);
    }

    fn merge(mut self, other: Self) -> Self {
        self.items.extend(other.items);
        self.compact();
        self
    }

    fn finish(mut self) -> Vec<TripleStats> {
        self.compact();
        self.items
    }
}

/// Folds the stats of the first `limit` lexicographic triples of `indices`.
fn exact_fold<A, I, S, M>(
    store: &ColumnStore,
    indices: &[usize],
    limit: u64,
    init: I,
    step: S,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    S: Fn(&mut A, TripleStats) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let n = indices.len();
    let mut offsets = vec![0u64; n + 1];
    for i in 0..n {
        offsets[i + 1] = offsets[i] + choose2(n - 1 - i);
    }
    (0..n)
        .into_par_iter()
        .filter(|&i| offsets[i] < limit && offsets[i + 1] > offsets[i])
        .map_init(Scratch::new, |scratch, i| {
            let mut acc = init();
            let mut rank = offsets[i];
            'outer: for j in i + 1..n {
                for k in j + 1..n {
                    if rank >= limit {
                        break 'outer;
                    }
                    rank += 1;
                    let s = store.stats_with([indices[i], indices[j], indices[k]], scratch)?;
                    step(&mut acc, s);
                }
            }
            Ok(acc)
        })
        .try_reduce(&init, |a, b| Ok(merge(a, b)))
}

fn sampled_triples(indices: &[usize], budget: u64, seed: u64) -> Vec<Triple> {
    let mut rng = rng(seed);
    let mut triples = BTreeSet::new();
    for _ in 0..budget {
        let mut pos = sample(&mut rng, indices.len(), 3).into_vec();
        pos.sort_unstable();
        triples.insert([indices[pos[0]], indices[pos[1]], indices[pos[2]]]);
    }
    triples.into_iter().collect()
}

/// Runs the search on prebuilt columns.
pub fn search_store(store: &ColumnStore, config: &SearchConfig, bound: usize) -> Result<SearchOutcome> {
    if config.top_k == 0 {
        return Err(Error::InvalidArgument("top_k must be at least 1".into()));
    }
    if store.classes() != config.classes {
        return Err(Error::InvalidArgument("column store built for another class pair".into()));
    }
    let indices = normalized_indices(&config.indices, bound)?;
    let n = indices.len() as u64;
    let total = n * (n - 1) * (n - 2) / 6;
    let k = config.top_k;
    match config.mode {
        SearchMode::Exact { budget } => {
            let limit = budget.unwrap_or(total).min(total);
            let top = exact_fold(
                store,
                &indices,
                limit,
                || TopK::new(k),
                |acc, s| acc.push(s),
                TopK::merge,
            )?;
            Ok(SearchOutcome {
                results: top.finish(),
                mode: if limit == total { ResultMode::Exact } else { ResultMode::Partial },
                evaluated: limit,
                total_triples: total,
            })
        }
        SearchMode::Sampled { budget, seed } => {
            let triples = sampled_triples(&indices, budget, seed);
            let top = triples
                .par_iter()
                .map_init(Scratch::new, |scratch, &t| store.stats_with(t, scratch))
                .try_fold(|| TopK::new(k), |mut acc, s| {
                    acc.push(s?);
                    Ok::<_, Error>(acc)
                })
                .try_reduce(|| TopK::new(k), |a, b| Ok(a.merge(b)))?;
            Ok(SearchOutcome {
                results: top.finish(),
                mode: ResultMode::Sampled,
                evaluated: triples.len() as u64,
                total_triples: total,
            })
        }
    }
}

/// Ranks triples of `config.indices` by ascending cost.
pub fn search(ds: &Dataset, config: &SearchConfig) -> Result<SearchOutcome> {
    let indices = normalized_indices(&config.indices, ds.bound())?;
    let store = ColumnStore::new(ds, config.classes, &indices)?;
    search_store(&store, config, ds.bound())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum PureConstraint {
    /// Exactly `c` values attained only by class `i`.
    Exactly(u64),
    /// At most `c` such values.
    AtMost(u64),
}

impl PureConstraint {
    pub fn admits(&self, pure_i: u64) -> bool {
        match *self {
            PureConstraint::Exactly(c) => pure_i == c,
            PureConstraint::AtMost(c) => pure_i <= c,
        }
    }
}

/// Best achievable number of class-`j`-only values under a constraint on the
/// class-`i`-only ones, with every triple attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Frontier {
    pub constraint: PureConstraint,
    /// `None` when no triple satisfies the constraint.
    pub max_pure_j: Option<u64>,
    /// Lexicographic order.
    pub witnesses: Vec<TripleStats>,
}

impl Frontier {
    fn empty(constraint: PureConstraint) -> Self {
        Self {
            constraint,
            max_pure_j: None,
            witnesses: Vec::new(),
        }
    }

    fn offer(&mut self, s: TripleStats) {
        if !self.constraint.admits(s.pure_i()) {
            return;
        }
        let value = s.pure_j();
        match self.max_pure_j {
            Some(best) if value < best => {}
            Some(best) if value == best => self.witnesses.push(s),
            _ => {
                self.max_pure_j = Some(value);
                self.witnesses.clear();
                self.witnesses.push(s);
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        match (self.max_pure_j, other.max_pure_j) {
            (_, None) => self,
            (None, Some(_)) => other,
            (Some(a), Some(b)) if b > a => other,
            (Some(a), Some(b)) => {
                if a == b {
                    self.witnesses.extend(other.witnesses);
                }
                self
            }
        }
    }
}

/// Exhaustive frontiers for several constraints in one pass over the triples.
pub fn frontier_table(
    ds: &Dataset,
    classes: ClassPair,
    indices: &[usize],
    constraints: &[PureConstraint],
) -> Result<Vec<Frontier>> {
    let indices = normalized_indices(indices, ds.bound())?;
    let store = ColumnStore::new(ds, classes, &indices)?;
    let n = indices.len() as u64;
    let fresh = || constraints.iter().map(|&c| Frontier::empty(c)).collect::<Vec<_>>();
    let mut table = exact_fold(
        &store,
        &indices,
        n * (n - 1) * (n - 2) / 6,
        fresh,
        |acc, s| acc.iter_mut().for_each(|f| f.offer(s)),
        |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
    )?;
    for f in &mut table {
        f.witnesses.sort_by_key(|s| s.triple);
    }
    Ok(table)
}

pub fn pure_frontier(
    ds: &Dataset,
    classes: ClassPair,
    indices: &[usize],
    constraint: PureConstraint,
) -> Result<Frontier> {
    Ok(frontier_table(ds, classes, indices, &[constraint])?.remove(0))
}

#[derive(Serialize)]
struct ResultLine<'a> {
    #[serde(flatten)]
    stats: &'a TripleStats,
    mode: ResultMode,
}

/// One JSON object per line: triple, g_i, g_ij, g_j, cost, cost_exact, mode.
pub fn write_results_jsonl<W: Write>(outcome: &SearchOutcome, mut out: W) -> Result<()> {
    for stats in &outcome.results {
        serde_json::to_writer(&mut out, &ResultLine { stats, mode: outcome.mode })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
