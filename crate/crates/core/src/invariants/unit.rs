//! Fundamental units from the continued-fraction expansion of the ring generator.

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};

/// `(x + y*sqrt(d)) / denom`, the minimal unit `> 1` of the maximal order of `Q(sqrt(d))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalUnit {
    pub x: BigUint,
    pub y: BigUint,
    pub denom: u8,
    pub norm: i8,
    /// Length of the period of the continued fraction of the ring generator.
    pub period: usize,
}

impl FundamentalUnit {
    /// `ln` of the unit, from the trace `T = 2x/denom`: `eps = (T + sqrt(T^2 - 4N)) / 2`.
    pub fn ln(&self) -> f64 {
        let trace = if self.denom == 2 {
            self.x.clone()
        } else {
            &self.x << 1usize
        };
        let ln_trace = ln_biguint(&trace);
        let norm = self.norm as f64;
        // 4N / T^2, underflows harmlessly to 0 for large units
        let ratio = 4.0 * norm * (-2.0 * ln_trace).exp();
        ln_trace + ((1.0 + (1.0 - ratio).sqrt()) / 2.0).ln()
    }
}

/// `ln(n)` for a positive big integer, via bit-length plus the log of the leading 64 bits.
pub fn ln_biguint(n: &BigUint) -> f64 {
    assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("64 leading bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

pub(crate) fn period_parity_norm(d: u64) -> i8 {
    let s = d.sqrt() as i64;
    let di = d as i64;
    let (mut p, mut q) = if d % 4 == 1 { (1i64, 2i64) } else { (0, 1) };
    let step = |p: &mut i64, q: &mut i64| {
        let a = (*p + s) / *q;
        let p_new = a * *q - *p;
        *q = (di - p_new * p_new) / *q;
        *p = p_new;
    };
    step(&mut p, &mut q);
    let start = (p, q);
    let mut period = 0usize;
    loop {
        step(&mut p, &mut q);
        period += 1;
        if (p, q) == start {
            break;
        }
    }
    if period.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Expands `omega = sqrt(d)` (d = 2,3 mod 4) or `(1 + sqrt(d))/2` (d = 1 mod 4).
pub fn fundamental_unit(d: u64) -> FundamentalUnit {
    let one_mod_four = d % 4 == 1;
    let s = d.sqrt() as i64;
    let di = d as i64;
    let (mut p_state, mut q_state) = if one_mod_four { (1i64, 2i64) } else { (0, 1) };

    let mut p_prev = BigUint::zero();
    let mut p_cur = BigUint::one();
    let mut q_prev = BigUint::one();
    let mut q_cur = BigUint::zero();

    let mut first_reduced: Option<(i64, i64)> = None;
    let mut period = 0usize;
    loop {
        let a = (p_state + s) / q_state;
        let a_big = BigUint::from(a as u64);
        let p_next = &a_big * &p_cur + &p_prev;
        let q_next = &a_big * &q_cur + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);

        let p_new = a * q_state - p_state;
        let q_new = (di - p_new * p_new) / q_state;
        p_state = p_new;
        q_state = q_new;
        match first_reduced {
            None => first_reduced = Some((p_state, q_state)),
            Some(start) => {
                period += 1;
                if (p_state, q_state) == start {
                    break;
                }
            }
        }
    }
    // p_prev / q_prev is the convergent closing the first period; unit = p - q * conj(omega)
    let (p_cur, q_cur) = (p_prev, q_prev);
    let norm = if period.is_multiple_of(2) { 1 } else { -1 };
    if one_mod_four {
        let mut x = (&p_cur << 1usize) - &q_cur;
        let mut y = q_cur;
        let mut denom = 2;
        if !x.bit(0) && !y.bit(0) {
            x >>= 1usize;
            y >>= 1usize;
            denom = 1;
        }
        FundamentalUnit {
            x,
            y,
            denom,
            norm,
            period,
        }
    } else {
        FundamentalUnit {
            x: p_cur,
            y: q_cur,
            denom: 1,
            norm,
            period,
        }
    }
}
