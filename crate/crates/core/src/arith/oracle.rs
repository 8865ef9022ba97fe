//! Brute-force local solubility, used to cross-check the closed forms.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::valuation::split_power;

/// Replaces `x` by `x·u²` so that `x` is an integer with `v_p(x) ≤ 1`.
/// Returns the reduced value as a residue-ready `i128`.
pub fn reduce_for_oracle(num: &BigInt, den: &BigInt, p: u128) -> BigInt {
    // num/den ~ num·den
    let n = num * den;
    let (k, u) = split_power(&n, p);
    if k % 2 == 1 {
        u * BigInt::from(p)
    } else {
        u
    }
}

fn squares_mod(m: u128) -> Vec<bool> {
    let mut table = vec![false; m as usize];
    for z in 0..m {
        table[(z * z % m) as usize] = true;
    }
    table
}

fn residue(x: &BigInt, m: u128) -> u128 {
    let r = x % BigInt::from(m);
    let r = if r.is_negative() {
        r + BigInt::from(m)
    } else {
        r
    };
    r.to_u128().unwrap()
}

/// Additive Hilbert symbol of integers `a`, `b` with `v_p ≤ 1`, decided by
/// searching primitive solutions of `z² ≡ a·x² + b·y² mod p^k`
/// (`k = 3` for odd `p`, `k = 6` for `p = 2`).
///
/// A primitive triple has `x` or `y` a unit (both divisible by `p` forces
/// `p | z`), so up to unit scaling either `x = 1`, or `p | x` and `y = 1`.
pub fn hilbert_brute(a: &BigInt, b: &BigInt, p: u128) -> u8 {
    assert!(!a.is_zero() && !b.is_zero());
    let k = if p == 2 { 6 } else { 3 };
    let m = p.pow(k);
    let sq = squares_mod(m);
    let (a, b) = (residue(a, m), residue(b, m));
    let soluble = (0..m).any(|y| sq[((a + b * (y * y % m)) % m) as usize])
        || (0..m)
            .step_by(p as usize)
            .any(|x| sq[((a * (x * x % m) + b) % m) as usize]);
    u8::from(!soluble)
}

/// Brute-force solubility of `a·x² + b·y² = 1` over ℤ_p for p-integral
/// integers `a`, `b`: a residue pair mod `p^k` with `f ≡ 0` and a smooth
/// Hensel certificate, searched exhaustively. Returns `None` when the
/// search at depth `k` is inconclusive.
pub fn integral_conic_brute(a: &BigInt, b: &BigInt, p: u128, k: u32) -> Option<bool> {
    let m = p.pow(k);
    let (ar, br) = (residue(a, m), residue(b, m));
    let mut any_residue = false;
    for x in 0..m {
        for y in 0..m {
            let f = (ar * (x * x % m) + br * (y * y % m) + m - 1) % m;
            if f != 0 {
                continue;
            }
            any_residue = true;
            let fx = BigInt::from(2 * x) * a;
            let fy = BigInt::from(2 * y) * b;
            let vx = if fx.is_zero() {
                u64::MAX
            } else {
                split_power(&fx, p).0
            };
            let vy = if fy.is_zero() {
                u64::MAX
            } else {
                split_power(&fy, p).0
            };
            let v = vx.min(vy);
            if v != u64::MAX && u64::from(k) > 2 * v {
                return Some(true);
            }
        }
    }
    if any_residue {
        None
    } else {
        Some(false)
    }
}
