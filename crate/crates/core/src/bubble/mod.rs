//! Value distributions of coefficient triples, the separability cost and the
//! bubble search.
//!
//! For a triple `[l, m, n]` every field contributes the vector
//! `v = (a_l, a_m, a_n)`; a *bubble* is an observed `v`, and it is *pure* when
//! only one of the two classes attains it.

mod columns;
mod search;

pub use columns::{ColumnStore, Scratch};
pub use search::{
    frontier_table, pure_frontier, search, search_store, write_results_jsonl, Frontier, PureConstraint,
    ResultMode, SearchConfig, SearchMode, SearchOutcome,
};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive};
use serde::{Serialize, Serializer};

use crate::arithmetic::big_omega;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Coefficient indices `[l, m, n]`, 1-based.
pub type Triple = [usize; 3];

/// Observed value `(a_l, a_m, a_n)`.
pub type Value = [u8; 3];

/// The pair of class numbers being separated. Order matters only for naming:
/// `first` is class `i`, `second` is class `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassPair {
    pub first: u32,
    pub second: u32,
}

impl ClassPair {
    pub fn new(first: u32, second: u32) -> Result<Self> {
        if first == second {
            return Err(Error::InvalidArgument(format!(
                "class pair needs two distinct classes, got {first} twice"
            )));
        }
        Ok(Self { first, second })
    }

    /// 0 for the first class, 1 for the second, `None` otherwise.
    pub fn side(&self, h: u32) -> Option<usize> {
        if h == self.first {
            Some(0)
        } else if h == self.second {
            Some(1)
        } else {
            None
        }
    }
}

pub(crate) fn check_triple(triple: Triple, bound: usize) -> Result<()> {
    for index in triple {
        if index == 0 || index > bound {
            return Err(Error::IndexOutOfRange { index, bound });
        }
    }
    Ok(())
}

/// Per-value class counts `(f_i^v, f_j^v)` of one triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueDistribution {
    triple: Triple,
    classes: ClassPair,
    max_d: u64,
    counts: BTreeMap<Value, [u64; 2]>,
}

impl ValueDistribution {
    pub fn triple(&self) -> Triple {
        self.triple
    }

    pub fn classes(&self) -> ClassPair {
        self.classes
    }

    /// Largest `d` among the counted records (0 when empty).
    pub fn max_d(&self) -> u64 {
        self.max_d
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `(f_i^v, f_j^v)`, zero for unobserved values.
    pub fn get(&self, v: Value) -> [u64; 2] {
        self.counts.get(&v).copied().unwrap_or([0, 0])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Value, &[u64; 2])> {
        self.counts.iter()
    }

    pub fn total(&self, side: usize) -> u64 {
        self.counts.values().map(|c| c[side]).sum()
    }
}

/// Counts records of the two classes per observed value of `triple`.
/// This is the straightforward per-record path; [`ColumnStore`] is the fast one.
pub fn value_distribution(ds: &Dataset, classes: ClassPair, triple: Triple) -> Result<ValueDistribution> {
    check_triple(triple, ds.bound())?;
    let mut counts: BTreeMap<Value, [u64; 2]> = BTreeMap::new();
    let mut max_d = 0;
    for (record, a) in ds.iter() {
        let Some(side) = classes.side(record.h) else {
            continue;
        };
        let v = [a[triple[0] - 1], a[triple[1] - 1], a[triple[2] - 1]];
        counts.entry(v).or_default()[side] += 1;
        max_d = max_d.max(record.d);
    }
    Ok(ValueDistribution {
        triple,
        classes,
        max_d,
        counts,
    })
}

/// Separability cost: an exact ratio, or `Infinite` when the two value sets
/// coincide. `Infinite` sorts after every finite cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cost {
    Finite(Ratio<u64>),
    Infinite,
}

impl Cost {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Cost::Infinite)
    }

    pub fn to_float<T: Float + FromPrimitive>(&self) -> T {
        match self {
            Cost::Finite(r) => {
                T::from_u64(*r.numer()).unwrap() / T::from_u64(*r.denom()).unwrap()
            }
            Cost::Infinite => T::infinity(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float()
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Ordering::Less,
            (Cost::Infinite, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infinite, Cost::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(r) => write!(f, "{r}"),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

/// `g_ij / (g_i + g_j - 2 g_ij)`.
pub fn cost(g_i: u64, g_j: u64, g_ij: u64) -> Result<Cost> {
    if g_ij > g_i.min(g_j) {
        return Err(Error::InvalidArgument(format!(
            "shared count {g_ij} exceeds min({g_i}, {g_j})"
        )));
    }
    if g_ij == 0 {
        return Ok(Cost::Finite(Ratio::from_integer(0)));
    }
    let denom = g_i + g_j - 2 * g_ij;
    if denom == 0 {
        return Ok(Cost::Infinite);
    }
    Ok(Cost::Finite(Ratio::new(g_ij, denom)))
}

/// Bubble counts of one triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleStats {
    pub triple: Triple,
    pub g_i: u64,
    pub g_j: u64,
    pub g_ij: u64,
    pub cost: Cost,
}

impl TripleStats {
    pub(crate) fn from_counts(triple: Triple, g_i: u64, g_j: u64, g_ij: u64) -> Self {
        let cost = cost(g_i, g_j, g_ij).expect("counts come from set intersections");
        Self {
            triple,
            g_i,
            g_j,
            g_ij,
            cost,
        }
    }

    /// Values attained only by class `i`.
    pub fn pure_i(&self) -> u64 {
        self.g_i - self.g_ij
    }

    pub fn pure_j(&self) -> u64 {
        self.g_j - self.g_ij
    }

    /// Ranking order: ascending cost, then lexicographic triple.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        self.cost.cmp(&other.cost).then(self.triple.cmp(&other.triple))
    }
}

impl Serialize for TripleStats {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("TripleStats", 6)?;
        s.serialize_field("triple", &self.triple)?;
        s.serialize_field("g_i", &self.g_i)?;
        s.serialize_field("g_ij", &self.g_ij)?;
        s.serialize_field("g_j", &self.g_j)?;
        match self.cost {
            Cost::Finite(_) => s.serialize_field("cost", &self.cost.to_f64())?,
            Cost::Infinite => s.serialize_field("cost", "inf")?,
        }
        s.serialize_field("cost_exact", &self.cost.to_string())?;
        s.end()
    }
}

pub fn g_counts(dist: &ValueDistribution) -> TripleStats {
    let mut g = [0u64; 2];
    let mut shared = 0;
    for counts in dist.counts.values() {
        g[0] += (counts[0] > 0) as u64;
        g[1] += (counts[1] > 0) as u64;
        shared += (counts[0] > 0 && counts[1] > 0) as u64;
    }
    TripleStats::from_counts(dist.triple, g[0], g[1], shared)
}

/// `(Omega(l)+2)(Omega(m)+2)(Omega(n)+2)`, the number of values a triple can take.
pub fn value_count_bound(triple: Triple) -> u64 {
    triple
        .iter()
        .map(|&n| big_omega(n as u64) as u64 + 2)
        .product()
}

pub const CHART_HEADER: [&str; 7] = ["v1", "v2", "v3", "f_i", "f_j", "total", "purity"];

/// Writes one CSV row per observed value. `purity` is the majority share
/// `max(f_i, f_j) / total`, so 1 marks a pure bubble.
pub fn bubble_chart_export<W: Write>(dist: &ValueDistribution, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CHART_HEADER)?;
    for (v, [fi, fj]) in dist.iter() {
        let total = fi + fj;
        let purity = *fi.max(fj) as f64 / total as f64;
        writer.write_record([
            v[0].to_string(),
            v[1].to_string(),
            v[2].to_string(),
            fi.to_string(),
            fj.to_string(),
            total.to_string(),
            purity.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Parses an index set such as `1..50`, `2,3,5,7`, `primes` or `all`
/// (ranges are inclusive, items comma-separated) into sorted distinct indices.
pub fn parse_indices(spec: &str, bound: usize) -> Result<Vec<usize>> {
    let bad = |item: &str| Error::InvalidArgument(format!("bad index item `{item}`"));
    let mut out = std::collections::BTreeSet::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "all" => out.extend(1..=bound),
            "primes" => out.extend(crate::arithmetic::primes_up_to(bound as u64).into_iter().map(|p| p as usize)),
            _ => {
                if let Some((a, b)) = item.split_once("..") {
                    let a: usize = a.trim().parse().map_err(|_| bad(item))?;
                    let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad(item))?;
                    if a > b {
                        return Err(bad(item));
                    }
                    out.extend(a..=b);
                } else {
                    out.insert(item.parse::<usize>().map_err(|_| bad(item))?);
                }
            }
        }
    }
    if let Some(&index) = out.iter().find(|&&i| i == 0 || i > bound) {
        return Err(Error::IndexOutOfRange { index, bound });
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!("empty index set `{spec}`")));
    }
    Ok(out.into_iter().collect())
}
