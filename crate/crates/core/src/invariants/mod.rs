//! Class numbers, regulators and the zeta partial sums of real quadratic fields.
//!
//! The class number is exact: the narrow class number `h+` is the number of
//! rho-cycles of reduced indefinite forms of discriminant `D`, and `h = h+`
//! exactly when the principal form is properly equivalent to its negative
//! (a unit of norm -1 exists), `h = h+/2` otherwise. The analytic class number
//! formula is kept only as an independent cross-check.

mod forms;
mod unit;

pub use forms::{CycleCount, ReducedForm};
pub use unit::{fundamental_unit, ln_biguint, FundamentalUnit};

use forms::DivisorSource;

use crate::arithmetic::{discriminant, smallest_prime_factors, CoefficientSieve, FundamentalDiscriminant};
use crate::error::Result;

/// Wide and narrow class numbers together with the sign of the fundamental unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassNumbers {
    pub h: u32,
    pub h_plus: u32,
    pub unit_norm: i8,
}

impl ClassNumbers {
    fn from_cycles(cycles: &CycleCount) -> Self {
        let unit_norm = if cycles.principal_is_ambiguous_sign { -1 } else { 1 };
        let h = if unit_norm == -1 {
            cycles.cycles
        } else {
            cycles.cycles / 2
        };
        Self {
            h,
            h_plus: cycles.cycles,
            unit_norm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantSet {
    pub h: u32,
    pub h_plus: u32,
    pub regulator: f64,
    pub s_zeta: f64,
    pub s_chi: f64,
}

/// Class number computation that reuses one factor table across many discriminants.
#[derive(Debug, Clone)]
pub struct ClassNumberEngine {
    spf: Vec<u32>,
}

impl ClassNumberEngine {
    /// Fast path for all discriminants `D <= max_disc`.
    pub fn new(max_disc: u64) -> Self {
        Self {
            spf: smallest_prime_factors((max_disc / 4) as usize + 1),
        }
    }

    pub fn cycles(&self, disc: &FundamentalDiscriminant) -> CycleCount {
        forms::count_cycles(disc.value(), &DivisorSource::with_table(&self.spf))
    }

    pub fn class_numbers(&self, disc: &FundamentalDiscriminant) -> ClassNumbers {
        ClassNumbers::from_cycles(&self.cycles(disc))
    }
}

pub fn class_numbers(d: u64) -> Result<ClassNumbers> {
    let disc = discriminant(d)?;
    let cycles = forms::count_cycles(disc.value(), &DivisorSource::trial());
    Ok(ClassNumbers::from_cycles(&cycles))
}

/// `(h, h+)`.
pub fn class_number(d: u64) -> Result<(u32, u32)> {
    let c = class_numbers(d)?;
    Ok((c.h, c.h_plus))
}

/// Sign of the norm of the fundamental unit, from the parity of the continued-fraction
/// period alone (no big integers).
pub fn unit_norm(d: u64) -> Result<i8> {
    discriminant(d)?;
    Ok(unit::period_parity_norm(d))
}

pub fn regulator(d: u64) -> Result<f64> {
    discriminant(d)?;
    Ok(fundamental_unit(d).ln())
}

/// `(S_zeta, S_chi)`: the sums of `a_n / n` and `chi_D(n) / n` over `n = 1..=bound`.
pub fn partial_sums(d: u64, bound: usize) -> Result<(f64, f64)> {
    let disc = discriminant(d)?;
    let sieve = CoefficientSieve::new(bound);
    let (a, chi) = sieve.coefficients_and_characters(&disc);
    Ok(partial_sums_from(a.as_slice(), &chi))
}

pub(crate) fn partial_sums_from(a: &[u8], chi: &[i8]) -> (f64, f64) {
    let mut s_zeta = 0.0;
    let mut s_chi = 0.0;
    for (i, (&an, &cn)) in a.iter().zip(chi).enumerate() {
        let n = (i + 1) as f64;
        s_zeta += an as f64 / n;
        s_chi += cn as f64 / n;
    }
    (s_zeta, s_chi)
}

pub fn invariants(d: u64, bound: usize) -> Result<InvariantSet> {
    let c = class_numbers(d)?;
    let (s_zeta, s_chi) = partial_sums(d, bound)?;
    Ok(InvariantSet {
        h: c.h,
        h_plus: c.h_plus,
        regulator: regulator(d)?,
        s_zeta,
        s_chi,
    })
}

/// `L(1, chi_D)` from the finite log-sine formula for even primitive characters.
/// `O(D)`; meant for verification, not bulk generation.
pub fn l_one(disc: &FundamentalDiscriminant) -> f64 {
    let big_d = disc.value();
    let chi = CoefficientSieve::new(big_d as usize).characters(disc);
    let pi_over_d = std::f64::consts::PI / big_d as f64;
    // chi(D - a) = chi(a): sum the first half twice
    let mut sum = 0.0;
    let half = (big_d - 1) / 2;
    for a in 1..=half {
        let c = chi[(a - 1) as usize];
        if c != 0 {
            sum += c as f64 * (pi_over_d * a as f64).sin().ln();
        }
    }
    // for even D the middle term a = D/2 has ln sin(pi/2) = 0
    sum *= 2.0;
    -sum / (big_d as f64).sqrt()
}

/// `sqrt(D) L(1, chi_D) / (2 R)`, which equals `h` by the analytic class number formula.
pub fn analytic_class_number(d: u64) -> Result<f64> {
    let disc = discriminant(d)?;
    let l = l_one(&disc);
    Ok((disc.value() as f64).sqrt() * l / (2.0 * regulator(d)?))
}

/// `|sqrt(D) L(1, chi_D) - 2 R h|`.
pub fn analytic_residual(d: u64) -> Result<f64> {
    let disc = discriminant(d)?;
    let (h, _) = class_number(d)?;
    let lhs = (disc.value() as f64).sqrt() * l_one(&disc);
    Ok((lhs - 2.0 * regulator(d)? * h as f64).abs())
}
