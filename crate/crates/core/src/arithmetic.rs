//! Exact elementary number theory for real quadratic fields `Q(sqrt(d))`.
//!
//! Everything here works on machine integers. The Dirichlet coefficients
//! `a_n` of the Dedekind zeta function are produced by [`CoefficientSieve`],
//! which evaluates the character on primes once and extends multiplicatively,
//! so a full vector `a_1..a_N` costs `O(N)` after a one-time table build.

use crate::error::{Error, Result};

/// Trial-division square-freeness test.
pub fn is_squarefree(n: u64) -> bool {
    assert!(n >= 1, "is_squarefree is defined for n >= 1");
    let mut m = n;
    if m.is_multiple_of(4) {
        return false;
    }
    if m.is_multiple_of(2) {
        m /= 2;
    }
    let mut p = 3u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return false;
            }
        }
        p += 2;
    }
    true
}

/// `flags[n]` is true iff `n` is square-free, for `0 <= n <= limit` (`flags[0]` is false).
pub fn squarefree_sieve(limit: u64) -> Vec<bool> {
    let limit = limit as usize;
    let mut flags = vec![true; limit + 1];
    flags[0] = false;
    let mut p = 2usize;
    while p * p <= limit {
        let sq = p * p;
        let mut k = sq;
        while k <= limit {
            flags[k] = false;
            k += sq;
        }
        p += 1;
    }
    flags
}

/// Primes `<= limit` in increasing order.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut k = i * i;
            while k <= limit {
                composite[k] = true;
                k += i;
            }
        }
    }
    primes
}

/// Smallest-prime-factor table for `0..=limit` (entries 0 and 1 are 0).
pub fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut k = i;
            while k <= limit {
                if spf[k] == 0 {
                    spf[k] = i as u32;
                }
                k += i;
            }
        }
    }
    spf
}

/// Distinct prime divisors of `n` in increasing order.
pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && prime_divisors(n) == [n]
}

/// Number of prime factors of `n` counted with multiplicity.
pub fn big_omega(mut n: u64) -> u32 {
    assert!(n >= 1);
    let mut count = 0;
    let mut p = 2u64;
    while p * p <= n {
        while n.is_multiple_of(p) {
            n /= p;
            count += 1;
        }
        p += 1;
    }
    if n > 1 {
        count += 1;
    }
    count
}

/// Number of values `a_n` can take: `a_n` lies in `0..=big_omega(n) + 1`.
pub fn coefficient_bound(n: u64) -> u32 {
    big_omega(n) + 2
}

/// The Kronecker symbol `(a / n)` for arbitrary integers.
pub fn kronecker(a: i64, n: i64) -> i8 {
    // (a/2) for odd a, indexed by a mod 8
    const TAB2: [i8; 8] = [0, 1, 0, -1, 0, -1, 0, 1];

    let (mut a, mut b) = (a as i128, n as i128);
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut v = 0;
    while b % 2 == 0 {
        b /= 2;
        v += 1;
    }
    let mut k: i8 = if v % 2 == 0 { 1 } else { TAB2[(a & 7) as usize] };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    loop {
        if a == 0 {
            return if b == 1 { k } else { 0 };
        }
        let mut v = 0;
        while a % 2 == 0 {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 {
            k *= TAB2[(b & 7) as usize];
        }
        if a & b & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}

/// A square-free `d > 1` together with the discriminant `D` of `Q(sqrt(d))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FundamentalDiscriminant {
    d: u64,
    disc: u64,
}

impl FundamentalDiscriminant {
    pub fn new(d: u64) -> Result<Self> {
        if d <= 1 {
            return Err(Error::TooSmall(d));
        }
        if !is_squarefree(d) {
            return Err(Error::NotSquarefree(d));
        }
        Ok(Self::new_unchecked(d))
    }

    /// Caller guarantees `d > 1` is square-free.
    pub(crate) fn new_unchecked(d: u64) -> Self {
        let disc = if d % 4 == 1 { d } else { 4 * d };
        Self { d, disc }
    }

    /// Recover `d` from a fundamental discriminant `D`.
    pub fn from_discriminant(disc: u64) -> Result<Self> {
        let d = if disc.is_multiple_of(4) { disc / 4 } else { disc };
        let fd = Self::new(d)?;
        if fd.disc != disc {
            return Err(Error::InvalidArgument(format!(
                "{disc} is not a real fundamental discriminant"
            )));
        }
        Ok(fd)
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn value(&self) -> u64 {
        self.disc
    }

    /// `chi_D(n)`.
    pub fn chi(&self, n: u64) -> i8 {
        kronecker(self.disc as i64, n as i64)
    }

    /// `chi_D(p)` for a prime `p`, without the general Kronecker machinery.
    pub(crate) fn chi_prime(&self, p: u64) -> i8 {
        if p == 2 {
            return match self.disc % 8 {
                1 | 7 => 1,
                3 | 5 => -1,
                _ => 0,
            };
        }
        legendre(self.disc % p, p)
    }

    pub fn ramification(&self) -> RamificationProfile {
        RamificationProfile {
            primes: prime_divisors(self.disc),
        }
    }

    pub fn prime_discriminants(&self) -> PrimeDiscriminantFactorization {
        prime_discriminant_factorization(self.disc)
    }
}

/// Legendre symbol `(a/p)` for an odd prime `p` via Euler's criterion.
fn legendre(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let r = mod_pow(a, (p - 1) / 2, p);
    if r == 1 {
        1
    } else {
        -1
    }
}

fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut acc: u128 = 1;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

pub fn discriminant(d: u64) -> Result<FundamentalDiscriminant> {
    FundamentalDiscriminant::new(d)
}

/// `a_n = sum over m | n of chi_D(m)`, by direct divisor enumeration.
pub fn zeta_coefficient(disc: &FundamentalDiscriminant, n: u64) -> u32 {
    assert!(n >= 1);
    let mut sum: i64 = 0;
    let mut m = 1u64;
    while m * m <= n {
        if n.is_multiple_of(m) {
            sum += disc.chi(m) as i64;
            let other = n / m;
            if other != m {
                sum += disc.chi(other) as i64;
            }
        }
        m += 1;
    }
    sum as u32
}

/// Dirichlet coefficients `a_1..a_N` of the Dedekind zeta function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaCoefficientVector {
    values: Vec<u8>,
}

impl ZetaCoefficientVector {
    pub fn from_values(values: Vec<u8>) -> Self {
        Self { values }
    }

    pub fn bound(&self) -> usize {
        self.values.len()
    }

    /// `a_n`, 1-based.
    pub fn get(&self, n: usize) -> u8 {
        self.values[n - 1]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u8> {
        self.values
    }

    /// `(a_p)` over primes `p <= bound`.
    pub fn prime_indexed(&self) -> Vec<u8> {
        primes_up_to(self.values.len() as u64)
            .into_iter()
            .map(|p| self.get(p as usize))
            .collect()
    }
}

/// Precomputed factor structure of `1..=N` for fast coefficient vectors.
#[derive(Debug, Clone)]
pub struct CoefficientSieve {
    bound: usize,
    primes: Vec<u64>,
    /// For `n >= 2`: (index of smallest prime p in `primes`, exponent k, n / p^k).
    split: Vec<(u16, u8, u16)>,
    /// For `n >= 2`: (index of smallest prime, n / p).
    peel: Vec<(u16, u16)>,
}

impl CoefficientSieve {
    pub fn new(bound: usize) -> Self {
        assert!(bound >= 1 && bound <= u16::MAX as usize);
        let primes = primes_up_to(bound as u64);
        let spf = smallest_prime_factors(bound);
        let mut index_of = vec![0u16; bound + 1];
        for (i, &p) in primes.iter().enumerate() {
            index_of[p as usize] = i as u16;
        }
        let mut split = vec![(0u16, 0u8, 1u16); bound + 1];
        let mut peel = vec![(0u16, 1u16); bound + 1];
        for n in 2..=bound {
            let p = spf[n] as usize;
            let mut m = n;
            let mut k = 0u8;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            split[n] = (index_of[p], k, m as u16);
            peel[n] = (index_of[p], (n / p) as u16);
        }
        Self {
            bound,
            primes,
            split,
            peel,
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    fn prime_characters(&self, disc: &FundamentalDiscriminant) -> Vec<i8> {
        self.primes.iter().map(|&p| disc.chi_prime(p)).collect()
    }

    /// `a_1..a_N`.
    pub fn coefficients(&self, disc: &FundamentalDiscriminant) -> ZetaCoefficientVector {
        let chi_p = self.prime_characters(disc);
        self.coefficients_from(&chi_p)
    }

    fn coefficients_from(&self, chi_p: &[i8]) -> ZetaCoefficientVector {
        let mut a = vec![0u8; self.bound + 1];
        a[1] = 1;
        for n in 2..=self.bound {
            let (pi, k, m) = self.split[n];
            let local = match chi_p[pi as usize] {
                1 => k + 1,
                0 => 1,
                _ => u8::from(k % 2 == 0),
            };
            a[n] = local * a[m as usize];
        }
        a.remove(0);
        ZetaCoefficientVector { values: a }
    }

    /// `chi_D(1..=N)`.
    pub fn characters(&self, disc: &FundamentalDiscriminant) -> Vec<i8> {
        let chi_p = self.prime_characters(disc);
        self.characters_from(&chi_p)
    }

    fn characters_from(&self, chi_p: &[i8]) -> Vec<i8> {
        let mut chi = vec![0i8; self.bound + 1];
        chi[1] = 1;
        for n in 2..=self.bound {
            let (pi, rest) = self.peel[n];
            chi[n] = chi_p[pi as usize] * chi[rest as usize];
        }
        chi.remove(0);
        chi
    }

    /// Coefficients and character values together, sharing the prime evaluation.
    pub fn coefficients_and_characters(
        &self,
        disc: &FundamentalDiscriminant,
    ) -> (ZetaCoefficientVector, Vec<i8>) {
        let chi_p = self.prime_characters(disc);
        (self.coefficients_from(&chi_p), self.characters_from(&chi_p))
    }
}

pub fn coefficient_vector(d: u64, bound: usize) -> Result<ZetaCoefficientVector> {
    let disc = discriminant(d)?;
    Ok(CoefficientSieve::new(bound).coefficients(&disc))
}

/// The rational primes ramified in `Q(sqrt(d))`, i.e. the primes dividing `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RamificationProfile {
    primes: Vec<u64>,
}

impl RamificationProfile {
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `n_d = omega(D)`.
    pub fn count(&self) -> usize {
        self.primes.len()
    }
}

pub fn ramification_profile(d: u64) -> Result<RamificationProfile> {
    Ok(discriminant(d)?.ramification())
}

/// `D = d_1 * ... * d_t` with each `d_i` a prime discriminant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeDiscriminantFactorization {
    factors: Vec<i64>,
}

impl PrimeDiscriminantFactorization {
    /// Factors ordered by the prime they are divisible by.
    pub fn factors(&self) -> &[i64] {
        &self.factors
    }

    pub fn product(&self) -> i64 {
        self.factors.iter().product()
    }
}

/// Splits a (positive) fundamental discriminant into prime discriminants.
pub fn prime_discriminant_factorization(disc: u64) -> PrimeDiscriminantFactorization {
    let mut factors = Vec::new();
    let mut odd_product: i64 = 1;
    for p in prime_divisors(disc) {
        if p == 2 {
            continue;
        }
        let p = p as i64;
        let signed = if p % 4 == 1 { p } else { -p };
        odd_product *= signed;
        factors.push(signed);
    }
    if disc.is_multiple_of(2) {
        // remaining 2-part is -4, 8 or -8
        factors.insert(0, disc as i64 / odd_product);
    }
    PrimeDiscriminantFactorization { factors }
}
