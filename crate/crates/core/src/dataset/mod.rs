//! Labelled datasets of real quadratic fields.
//!
//! A [`Dataset`] keeps per-field metadata as [`FieldRecord`]s and the zeta
//! coefficients in one row-major byte matrix (`records x bound`), which is
//! also the on-disk layout of the coefficient file.

mod io;

pub use io::{import_csv, load, save, FORMAT_VERSION, METADATA_HEADER};

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{squarefree_sieve, CoefficientSieve, FundamentalDiscriminant};
use crate::error::{Error, Result};
use crate::invariants::{fundamental_unit, partial_sums_from, ClassNumberEngine, ClassNumbers};

/// Default truncation bound of the coefficient vectors.
pub const DEFAULT_BOUND: usize = 1000;

/// One real quadratic field. `p1..p3` are the ramified primes in increasing
/// order, with 0 marking an absent prime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub d: u64,
    #[serde(rename = "D")]
    pub disc: u64,
    pub h: u32,
    pub h_plus: u32,
    #[serde(rename = "R")]
    pub regulator: f64,
    pub n_d: u8,
    pub p1: u64,
    pub p2: u64,
    pub p3: u64,
    #[serde(rename = "S_zeta")]
    pub s_zeta: f64,
    #[serde(rename = "S_chi")]
    pub s_chi: f64,
    pub unit_norm: i8,
}

impl FieldRecord {
    pub fn ramified_primes(&self) -> impl Iterator<Item = u64> {
        [self.p1, self.p2, self.p3].into_iter().filter(|&p| p != 0)
    }

    pub fn discriminant(&self) -> FundamentalDiscriminant {
        FundamentalDiscriminant::new_unchecked(self.d)
    }
}

/// Ramified primes packed into the three sentinel slots.
pub(crate) fn ramified_slots(disc: &FundamentalDiscriminant) -> Result<(u8, [u64; 3])> {
    let profile = disc.ramification();
    let primes = profile.primes();
    if primes.len() > 3 {
        return Err(Error::InvalidArgument(format!(
            "d = {} has {} ramified primes; records hold at most 3",
            disc.d(),
            primes.len()
        )));
    }
    let mut slots = [0u64; 3];
    slots[..primes.len()].copy_from_slice(primes);
    Ok((primes.len() as u8, slots))
}

/// Builds the full record and coefficient row for one field.
pub fn build_record(
    disc: &FundamentalDiscriminant,
    classes: ClassNumbers,
    sieve: &CoefficientSieve,
) -> Result<(FieldRecord, Vec<u8>)> {
    let unit = fundamental_unit(disc.d());
    if unit.norm != classes.unit_norm {
        return Err(Error::InvalidArgument(format!(
            "d = {}: continued fraction and form cycles disagree on the unit norm",
            disc.d()
        )));
    }
    let (n_d, [p1, p2, p3]) = ramified_slots(disc)?;
    let (coefficients, chi) = sieve.coefficients_and_characters(disc);
    let (s_zeta, s_chi) = partial_sums_from(coefficients.as_slice(), &chi);
    let record = FieldRecord {
        d: disc.d(),
        disc: disc.value(),
        h: classes.h,
        h_plus: classes.h_plus,
        regulator: unit.ln(),
        n_d,
        p1,
        p2,
        p3,
        s_zeta,
        s_chi,
        unit_norm: classes.unit_norm,
    };
    Ok((record, coefficients.into_values()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Generated {
        max_disc: u64,
        classes: Vec<u32>,
        bound: usize,
    },
    Imported {
        source: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<FieldRecord>,
    coefficients: Vec<u8>,
    bound: usize,
    provenance: Provenance,
}

impl Dataset {
    /// Sorts rows by `d` and rejects duplicates.
    pub fn new(
        rows: Vec<(FieldRecord, Vec<u8>)>,
        bound: usize,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut rows = rows;
        rows.sort_by_key(|(r, _)| r.d);
        let mut records = Vec::with_capacity(rows.len());
        let mut coefficients = Vec::with_capacity(rows.len() * bound);
        for (record, coeffs) in rows {
            if coeffs.len() != bound {
                return Err(Error::InvalidArgument(format!(
                    "d = {}: {} coefficients, expected {bound}",
                    record.d,
                    coeffs.len()
                )));
            }
            if records.last().is_some_and(|last: &FieldRecord| last.d == record.d) {
                return Err(Error::InvalidArgument(format!("duplicate d = {}", record.d)));
            }
            records.push(record);
            coefficients.extend_from_slice(&coeffs);
        }
        Ok(Self {
            records,
            coefficients,
            bound,
            provenance,
        })
    }

    pub(crate) fn from_parts(
        records: Vec<FieldRecord>,
        coefficients: Vec<u8>,
        bound: usize,
        provenance: Provenance,
    ) -> Self {
        debug_assert_eq!(records.len() * bound, coefficients.len());
        Self {
            records,
            coefficients,
            bound,
            provenance,
        }
    }

    pub fn empty(bound: usize, provenance: Provenance) -> Self {
        Self::from_parts(Vec::new(), Vec::new(), bound, provenance)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Coefficient truncation bound `N`.
    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn records(&self) -> &[FieldRecord] {
        &self.records
    }

    pub fn record(&self, i: usize) -> &FieldRecord {
        &self.records[i]
    }

    /// `a_1..a_N` of row `i`.
    pub fn coefficients(&self, i: usize) -> &[u8] {
        &self.coefficients[i * self.bound..(i + 1) * self.bound]
    }

    /// `a_n` of row `i`, 1-based `n`.
    pub fn coefficient(&self, i: usize, n: usize) -> u8 {
        self.coefficients[i * self.bound + n - 1]
    }

    pub fn coefficient_matrix(&self) -> &[u8] {
        &self.coefficients
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FieldRecord, &[u8])> {
        self.records.iter().zip(self.coefficients.chunks_exact(self.bound.max(1)))
    }

    pub fn label_classes(&self) -> BTreeSet<u32> {
        self.records.iter().map(|r| r.h).collect()
    }

    pub fn find(&self, d: u64) -> Option<usize> {
        self.records.binary_search_by_key(&d, |r| r.d).ok()
    }

    /// Rows at `indices`, re-sorted by `d`.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        let records = idx.iter().map(|&i| self.records[i]).collect();
        let mut coefficients = Vec::with_capacity(idx.len() * self.bound);
        for &i in &idx {
            coefficients.extend_from_slice(self.coefficients(i));
        }
        Self::from_parts(records, coefficients, self.bound, self.provenance.clone())
    }

    /// Rows whose class number is in `classes`.
    pub fn filter_classes(&self, classes: &[u32]) -> Dataset {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| classes.contains(&self.records[i].h))
            .collect();
        self.subset(&idx)
    }

    /// Rows with `D <= max_disc`.
    pub fn restrict_discriminant(&self, max_disc: u64) -> Dataset {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.records[i].disc <= max_disc)
            .collect();
        self.subset(&idx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateConfig {
    pub max_disc: u64,
    pub classes: BTreeSet<u32>,
    pub bound: usize,
}

impl GenerateConfig {
    pub fn new(max_disc: u64, classes: impl IntoIterator<Item = u32>) -> Self {
        Self {
            max_disc,
            classes: classes.into_iter().collect(),
            bound: DEFAULT_BOUND,
        }
    }
}

/// Every square-free `d > 1` with `D <= max_disc` and `h_d` in the requested classes.
pub fn generate(config: &GenerateConfig) -> Result<Dataset> {
    if config.max_disc < 5 {
        return Err(Error::InvalidArgument(format!(
            "max discriminant must be at least 5, got {}",
            config.max_disc
        )));
    }
    if config.bound == 0 || config.bound > u16::MAX as usize {
        return Err(Error::InvalidArgument(format!(
            "coefficient bound {} outside 1..=65535",
            config.bound
        )));
    }
    let max_disc = config.max_disc;
    let squarefree = squarefree_sieve(max_disc);
    let engine = ClassNumberEngine::new(max_disc);
    let sieve = CoefficientSieve::new(config.bound);

    const CHUNK: u64 = 4096;
    let chunks: Vec<u64> = (0..max_disc / CHUNK + 1).collect();
    let rows: Vec<Vec<(FieldRecord, Vec<u8>)>> = chunks
        .into_par_iter()
        .map(|chunk| {
            let mut out = Vec::new();
            let start = (chunk * CHUNK).max(2);
            let end = ((chunk + 1) * CHUNK).min(max_disc + 1);
            for d in start..end {
                if !squarefree[d as usize] {
                    continue;
                }
                let disc = FundamentalDiscriminant::new_unchecked(d);
                if disc.value() > max_disc {
                    continue;
                }
                let classes = engine.class_numbers(&disc);
                if config.classes.contains(&classes.h) {
                    out.push(build_record(&disc, classes, &sieve)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Dataset::new(
        rows.into_iter().flatten().collect(),
        config.bound,
        Provenance::Generated {
            max_disc,
            classes: config.classes.iter().copied().collect(),
            bound: config.bound,
        },
    )
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Width of the discriminant buckets used for balanced sampling.
pub const BUCKET_WIDTH: u64 = 100_000;

/// Keeps every record of `rare_class` and, per bucket `i*10^5 <= D <= (i+1)*10^5`,
/// draws the same number of `common_class` records uniformly without replacement.
pub fn balanced_sample(full: &Dataset, rare_class: u32, common_class: u32, seed: u64) -> Result<Dataset> {
    let bucket_of = |r: &FieldRecord| (r.disc / BUCKET_WIDTH) as usize;
    let buckets = full.records.iter().map(bucket_of).max().map_or(0, |b| b + 1);
    let mut rare: Vec<Vec<usize>> = vec![Vec::new(); buckets];
    let mut common: Vec<Vec<usize>> = vec![Vec::new(); buckets];
    for (i, r) in full.records.iter().enumerate() {
        if r.h == rare_class {
            rare[bucket_of(r)].push(i);
        } else if r.h == common_class {
            common[bucket_of(r)].push(i);
        }
    }
    let mut rng = rng(seed);
    let mut keep = Vec::new();
    for b in 0..buckets {
        let want = rare[b].len();
        if common[b].len() < want {
            return Err(Error::InvalidArgument(format!(
                "bucket {b}: need {want} class-{common_class} fields, only {} available",
                common[b].len()
            )));
        }
        keep.extend_from_slice(&rare[b]);
        keep.extend(
            rand::seq::index::sample(&mut rng, common[b].len(), want)
                .into_iter()
                .map(|j| common[b][j]),
        );
    }
    Ok(full.subset(&keep))
}

/// The class-1 / class-3 balanced dataset restricted to `D <= 10^6`.
pub fn balanced_sample_13(full: &Dataset, seed: u64) -> Result<Dataset> {
    balanced_sample(&full.restrict_discriminant(1_000_000), 3, 1, seed)
}

/// Stratified seeded split; `round(fraction * len)` rows go to the training side,
/// allocated across classes by largest remainder.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, r) in ds.records.iter().enumerate() {
        by_class.entry(r.h).or_default().push(i);
    }
    let total_train = (train_fraction * ds.len() as f64).round() as usize;
    let mut quotas: Vec<(u32, usize, f64)> = by_class
        .iter()
        .map(|(&h, idx)| {
            let exact = train_fraction * idx.len() as f64;
            (h, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let assigned: usize = quotas.iter().map(|q| q.1).sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| quotas[b].2.total_cmp(&quotas[a].2).then(a.cmp(&b)));
    for &k in order.iter().take(total_train.saturating_sub(assigned)) {
        quotas[k].1 += 1;
    }

    let mut rng = rng(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (h, quota, _) in quotas {
        let mut idx = by_class[&h].clone();
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..quota]);
        test.extend_from_slice(&idx[quota..]);
    }
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Counts behind the three summary tables.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Summary {
    /// `(h, p, a_p) -> count` for `p` in {2, 3, 5}.
    pub coefficient_counts: BTreeMap<(u32, u64, u8), u64>,
    /// `(h, n_d) -> count`.
    pub ramified_counts: BTreeMap<(u32, u8), u64>,
    /// `(h, #{p <= N prime : a_p = 1}) -> count`.
    pub detected_counts: BTreeMap<(u32, u32), u64>,
}

impl Summary {
    pub fn coefficient_count(&self, h: u32, p: u64, value: u8) -> u64 {
        self.coefficient_counts.get(&(h, p, value)).copied().unwrap_or(0)
    }

    pub fn ramified_count(&self, h: u32, n_d: u8) -> u64 {
        self.ramified_counts.get(&(h, n_d)).copied().unwrap_or(0)
    }

    pub fn detected_count(&self, h: u32, detected: u32) -> u64 {
        self.detected_counts.get(&(h, detected)).copied().unwrap_or(0)
    }
}

pub fn summarize(ds: &Dataset) -> Summary {
    let primes = crate::arithmetic::primes_up_to(ds.bound() as u64);
    let mut summary = Summary::default();
    for h in ds.label_classes() {
        for p in [2u64, 3, 5] {
            for v in 0..=2u8 {
                summary.coefficient_counts.insert((h, p, v), 0);
            }
        }
        for n in 1..=3u8 {
            summary.ramified_counts.insert((h, n), 0);
        }
    }
    for (r, a) in ds.iter() {
        for p in [2u64, 3, 5] {
            if (p as usize) <= ds.bound() {
                *summary.coefficient_counts.entry((r.h, p, a[p as usize - 1])).or_default() += 1;
            }
        }
        *summary.ramified_counts.entry((r.h, r.n_d)).or_default() += 1;
        let detected = primes.iter().filter(|&&p| a[p as usize - 1] == 1).count() as u32;
        *summary.detected_counts.entry((r.h, detected)).or_default() += 1;
    }
    summary
}
