//! Reduced indefinite binary quadratic forms and their rho-cycles.
//!
//! A form `(a, b, c)` with `b^2 - 4ac = D > 0` is reduced when
//! `|sqrt(D) - 2|a|| < b < sqrt(D)`. The reduction operator `rho` permutes the
//! reduced forms of discriminant `D`, and its orbits are exactly the proper
//! (narrow) equivalence classes, so counting orbits gives `h+`.

use num_integer::Roots;

/// Divisors of `n` drawn from a smallest-prime-factor table when `n` is
/// covered by it, by trial division otherwise.
pub(crate) struct DivisorSource<'a> {
    spf: Option<&'a [u32]>,
}

impl<'a> DivisorSource<'a> {
    pub(crate) fn trial() -> Self {
        Self { spf: None }
    }

    pub(crate) fn with_table(spf: &'a [u32]) -> Self {
        Self { spf: Some(spf) }
    }

    fn factor(&self, mut n: u64, out: &mut Vec<(u64, u32)>) {
        out.clear();
        match self.spf {
            Some(spf) if (n as usize) < spf.len() => {
                while n > 1 {
                    let p = spf[n as usize] as u64;
                    let mut k = 0;
                    while n.is_multiple_of(p) {
                        n /= p;
                        k += 1;
                    }
                    out.push((p, k));
                }
            }
            _ => {
                let mut p = 2u64;
                while p * p <= n {
                    if n.is_multiple_of(p) {
                        let mut k = 0;
                        while n.is_multiple_of(p) {
                            n /= p;
                            k += 1;
                        }
                        out.push((p, k));
                    }
                    p += 1;
                }
                if n > 1 {
                    out.push((n, 1));
                }
            }
        }
    }

    /// Divisors of `n` in `lo..=hi`, appended to `out` (unordered).
    fn divisors_in(
        &self,
        n: u64,
        lo: u64,
        hi: u64,
        scratch: &mut Vec<(u64, u32)>,
        divs: &mut Vec<u64>,
        out: &mut Vec<u64>,
    ) {
        self.factor(n, scratch);
        divs.clear();
        divs.push(1);
        for &(p, k) in scratch.iter() {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..k {
                pk *= p;
                for i in 0..len {
                    let v = divs[i] * pk;
                    if v <= hi {
                        divs.push(v);
                    }
                }
            }
        }
        out.extend(divs.iter().copied().filter(|&v| v >= lo && v <= hi));
    }
}

/// A reduced form `(a, b, c)`; `c` is implied by `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReducedForm {
    pub b: i64,
    pub a: i64,
}

/// All reduced forms of discriminant `disc`, sorted by `(b, a)`.
pub(crate) fn reduced_forms(disc: u64, divisors: &DivisorSource<'_>) -> Vec<ReducedForm> {
    let s = disc.sqrt();
    let mut forms = Vec::new();
    let mut scratch = Vec::new();
    let mut divs = Vec::new();
    let mut hits = Vec::new();
    let mut b = if disc.is_multiple_of(2) { 2 } else { 1 };
    while b <= s {
        let n = (disc - b * b) / 4;
        // sqrt(D) - b < 2a < sqrt(D) + b with sqrt(D) irrational
        let lo = (s - b + 2) / 2;
        let hi = (s + b) / 2;
        hits.clear();
        divisors.divisors_in(n, lo.max(1), hi, &mut scratch, &mut divs, &mut hits);
        hits.sort_unstable();
        for &a in hits.iter().rev() {
            forms.push(ReducedForm {
                b: b as i64,
                a: -(a as i64),
            });
        }
        for &a in hits.iter() {
            forms.push(ReducedForm {
                b: b as i64,
                a: a as i64,
            });
        }
        b += 2;
    }
    forms
}

/// `rho(a, b, c) = (c, b', c')` with `b' = -b mod 2|c|` and `sqrt(D) - 2|c| < b' < sqrt(D)`.
pub(crate) fn rho(form: ReducedForm, disc: u64, s: i64) -> ReducedForm {
    let disc = disc as i64;
    let c = (form.b * form.b - disc) / (4 * form.a);
    let m = 2 * c.abs();
    let r = (-form.b).rem_euclid(m);
    let b = s - (s - r).rem_euclid(m);
    ReducedForm { b, a: c }
}

/// Orbit structure of `rho` on the reduced forms of one discriminant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleCount {
    pub forms: usize,
    pub cycles: u32,
    /// Whether `(-1, b, c)` lies on the principal cycle through `(1, b, -c)`.
    pub principal_is_ambiguous_sign: bool,
}

pub(crate) fn count_cycles(disc: u64, divisors: &DivisorSource<'_>) -> CycleCount {
    let forms = reduced_forms(disc, divisors);
    let s = disc.sqrt() as i64;
    let index = |f: ReducedForm| {
        forms
            .binary_search(&f)
            .expect("rho maps reduced forms to reduced forms")
    };
    let b1 = if (s as u64) % 2 == disc % 2 { s } else { s - 1 };
    let principal = index(ReducedForm { b: b1, a: 1 });
    let negated = index(ReducedForm { b: b1, a: -1 });

    let mut cycle_of = vec![u32::MAX; forms.len()];
    let mut cycles = 0u32;
    for start in 0..forms.len() {
        if cycle_of[start] != u32::MAX {
            continue;
        }
        let mut i = start;
        loop {
            cycle_of[i] = cycles;
            i = index(rho(forms[i], disc, s));
            if i == start {
                break;
            }
            debug_assert_eq!(cycle_of[i], u32::MAX, "rho orbits must be disjoint cycles");
        }
        cycles += 1;
    }
    CycleCount {
        forms: forms.len(),
        cycles,
        principal_is_ambiguous_sign: cycle_of[principal] == cycle_of[negated],
    }
}
