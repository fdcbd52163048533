//! Genus-theory predicates on class numbers and a dataset verifier.
//!
//! Every check reports whether it applies to a record and, if so, whether the
//! record satisfies it, so the verifier can audit imported data as well as
//! generated data.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::arithmetic::{is_prime, prime_divisors, FundamentalDiscriminant};
use crate::dataset::{Dataset, FieldRecord, Provenance};
use crate::error::Result;
use crate::invariants::class_numbers;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(h: u32) -> Self {
        if h % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// `h_d` is odd iff exactly one prime ramifies, or `D = d1 d2` with both
/// prime discriminants negative.
pub fn parity_by_corollary(d: u64) -> Result<Parity> {
    let disc = FundamentalDiscriminant::new(d)?;
    Ok(parity_of(&disc))
}

fn parity_of(disc: &FundamentalDiscriminant) -> Parity {
    let factorization = disc.prime_discriminants();
    let factors = factorization.factors();
    match factors {
        [_] => Parity::Odd,
        [a, b] if *a < 0 && *b < 0 => Parity::Odd,
        _ => Parity::Even,
    }
}

/// Lower bound `s` on the 2-rank of the class group: `t - 1` when every prime
/// discriminant factor is positive, `t - 2` otherwise.
pub fn two_rank(disc: &FundamentalDiscriminant) -> u32 {
    let factorization = disc.prime_discriminants();
    let t = factorization.factors().len() as u32;
    if factorization.factors().iter().all(|&f| f > 0) {
        t - 1
    } else {
        t - 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    /// `n_d = 1` implies `h != 2`.
    OneRamified,
    /// `h = 1` and `a_p = 1` with `p = 1 mod 4` imply `d = p`.
    PrimeOneMod4,
    /// `h_p = 1`, `p = 1 mod 4`, `m > 1` imply `h_{mp} >= 2`.
    EvenMultiple,
    /// `n_d >= 3` implies `h >= 2`; `n_d >= 4` implies `h >= 4`.
    ThreeRamified,
    /// `n_d = 2`, `h` in {1, 2}, odd smallest ramified prime `p1`:
    /// `p1 = 1 mod 4` gives `h = 2`, `p1 = 3 mod 4` gives `h = 1`.
    SmallestRamified,
    /// `h` is odd exactly when the parity corollary says so.
    Parity,
    /// `2^s | h` and `2^(t-1) | h+`.
    TwoRank,
}

impl LemmaId {
    pub const ALL: [LemmaId; 7] = [
        LemmaId::OneRamified,
        LemmaId::PrimeOneMod4,
        LemmaId::EvenMultiple,
        LemmaId::ThreeRamified,
        LemmaId::SmallestRamified,
        LemmaId::Parity,
        LemmaId::TwoRank,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Check {
    pub lemma: LemmaId,
    pub applicable: bool,
    pub satisfied: bool,
}

impl Check {
    fn new(lemma: LemmaId, applicable: bool, satisfied: bool) -> Self {
        Self {
            lemma,
            applicable,
            satisfied: !applicable || satisfied,
        }
    }

    pub fn violated(&self) -> bool {
        self.applicable && !self.satisfied
    }
}

pub fn check_lemma_1rp(r: &FieldRecord) -> Check {
    Check::new(LemmaId::OneRamified, r.n_d == 1, r.h != 2)
}

pub fn check_lemma_p14(r: &FieldRecord) -> Check {
    let witness = r.ramified_primes().find(|p| p % 4 == 1);
    Check::new(
        LemmaId::PrimeOneMod4,
        r.h == 1 && witness.is_some(),
        witness == Some(r.d),
    )
}

/// `h_is_one(p)` answers whether `h_p = 1` for a prime `p = 1 mod 4`.
pub fn check_lemma_even(r: &FieldRecord, h_is_one: impl Fn(u64) -> bool) -> Check {
    let applicable = even_candidates(r.d).any(h_is_one);
    Check::new(LemmaId::EvenMultiple, applicable, r.h >= 2)
}

/// Primes `p = 1 mod 4` with `d = mp`, `m > 1`.
fn even_candidates(d: u64) -> impl Iterator<Item = u64> {
    prime_divisors(d)
        .into_iter()
        .filter(move |&p| p % 4 == 1 && p != d)
}

pub fn check_lemma_3rp(r: &FieldRecord) -> Check {
    let ok = (r.n_d < 3 || r.h >= 2) && (r.n_d < 4 || r.h >= 4);
    Check::new(LemmaId::ThreeRamified, r.n_d >= 3, ok)
}

pub fn check_lemma_srp(r: &FieldRecord) -> Check {
    let p1 = r.p1;
    let applicable = r.n_d == 2 && (r.h == 1 || r.h == 2) && p1 % 2 == 1;
    let expected = if p1 % 4 == 1 { 2 } else { 1 };
    Check::new(LemmaId::SmallestRamified, applicable, r.h == expected)
}

pub fn check_parity(r: &FieldRecord) -> Check {
    let predicted = parity_of(&r.discriminant());
    Check::new(LemmaId::Parity, true, predicted == Parity::of(r.h))
}

pub fn check_two_rank(r: &FieldRecord) -> Check {
    let disc = r.discriminant();
    let s = two_rank(&disc);
    let t = disc.prime_discriminants().factors().len() as u32;
    let divides = |h: u32, k: u32| k < 32 && h.is_multiple_of(1u32 << k);
    Check::new(LemmaId::TwoRank, true, divides(r.h, s) && divides(r.h_plus, t - 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenusVerdict {
    pub d: u64,
    pub h: u32,
    pub checks: Vec<Check>,
    pub parity_predicted: Parity,
    pub parity_actual: Parity,
}

impl GenusVerdict {
    pub fn violations(&self) -> impl Iterator<Item = LemmaId> + '_ {
        self.checks.iter().filter(|c| c.violated()).map(|c| c.lemma)
    }

    pub fn check(&self, lemma: LemmaId) -> Check {
        *self.checks.iter().find(|c| c.lemma == lemma).expect("every lemma is checked")
    }
}

pub fn verdict(r: &FieldRecord, h_is_one: impl Fn(u64) -> bool) -> GenusVerdict {
    GenusVerdict {
        d: r.d,
        h: r.h,
        checks: vec![
            check_lemma_1rp(r),
            check_lemma_p14(r),
            check_lemma_even(r, h_is_one),
            check_lemma_3rp(r),
            check_lemma_srp(r),
            check_parity(r),
            check_two_rank(r),
        ],
        parity_predicted: parity_of(&r.discriminant()),
        parity_actual: Parity::of(r.h),
    }
}

/// `h_p = 1`, computed from scratch.
pub fn prime_has_class_number_one(p: u64) -> bool {
    class_numbers(p).map(|c| c.h == 1).unwrap_or(false)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub applicable: u64,
    pub satisfied: u64,
    pub violated: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub d: u64,
    pub h: u32,
    pub lemma: LemmaId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenusReport {
    pub records: u64,
    pub tallies: BTreeMap<LemmaId, Tally>,
    pub violation_count: u64,
    pub violations: Vec<Violation>,
}

impl GenusReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    pub fn tally(&self, lemma: LemmaId) -> Tally {
        self.tallies.get(&lemma).copied().unwrap_or_default()
    }
}

/// Resolves `h_p = 1` for every candidate prime of the even-multiple lemma:
/// from the dataset itself when it provably covers `p`, otherwise by direct
/// computation.
fn resolve_primes(ds: &Dataset) -> HashMap<u64, bool> {
    let mut primes: Vec<u64> = ds.records().iter().flat_map(|r| even_candidates(r.d)).collect();
    primes.sort_unstable();
    primes.dedup();
    let covered = match ds.provenance() {
        Provenance::Generated { max_disc, classes, .. } if classes.contains(&1) => Some(*max_disc),
        _ => None,
    };
    primes
        .into_par_iter()
        .map(|p| {
            debug_assert!(is_prime(p));
            let known = match (covered, ds.find(p)) {
                (_, Some(i)) => Some(ds.record(i).h == 1),
                (Some(max), None) if p <= max => Some(false),
                _ => None,
            };
            (p, known.unwrap_or_else(|| prime_has_class_number_one(p)))
        })
        .collect()
}

pub fn verify_dataset(ds: &Dataset) -> GenusReport {
    let h_one = resolve_primes(ds);
    let verdicts: Vec<GenusVerdict> = ds
        .records()
        .par_iter()
        .map(|r| verdict(r, |p| h_one[&p]))
        .collect();
    let mut tallies: BTreeMap<LemmaId, Tally> =
        LemmaId::ALL.iter().map(|&l| (l, Tally::default())).collect();
    let mut violations = Vec::new();
    for v in &verdicts {
        for c in &v.checks {
            let t = tallies.get_mut(&c.lemma).unwrap();
            if c.applicable {
                t.applicable += 1;
                if c.satisfied {
                    t.satisfied += 1;
                } else {
                    t.violated += 1;
                    violations.push(Violation {
                        d: v.d,
                        h: v.h,
                        lemma: c.lemma,
                    });
                }
            }
        }
    }
    GenusReport {
        records: ds.len() as u64,
        tallies,
        violation_count: violations.len() as u64,
        violations,
    }
}
