//! Legendre, Jacobi and Hilbert symbols.
//!
//! Hilbert symbols are valued additively in F₂: `0` means the quaternion
//! algebra splits (the conic `z² = a·x² + b·y²` has a nontrivial point),
//! `1` means it does not. Legendre symbols keep the usual `{-1, 0, 1}`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{LocalSquareClass, Place};
use crate::Rational;

/// Jacobi symbol `(a | n)` for odd `n > 0` via quadratic reciprocity.
pub fn jacobi(a: u128, n: u128) -> i8 {
    assert!(n % 2 == 1, "jacobi symbol needs an odd modulus");
    let mut a = a % n;
    let mut n = n;
    let mut sign = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

fn residue(a: &BigInt, p: u128) -> u128 {
    a.mod_floor(&BigInt::from(p))
        .to_u128()
        .expect("residue below a u128 modulus")
}

/// Legendre symbol `(a | p)` for an odd prime `p`, by reciprocity.
pub fn legendre(a: &BigInt, p: u128) -> i8 {
    debug_assert!(p % 2 == 1);
    jacobi(residue(a, p), p)
}

/// Legendre symbol by Euler's criterion `a^((p-1)/2) mod p`.
pub fn legendre_euler(a: &BigInt, p: u128) -> i8 {
    debug_assert!(p % 2 == 1);
    let r = residue(a, p);
    if r == 0 {
        return 0;
    }
    let m = BigUint::from(p);
    let e = BigUint::from((p - 1) / 2);
    let v = BigUint::from(r).modpow(&e, &m);
    if v == BigUint::from(1u8) {
        1
    } else {
        debug_assert_eq!(v, BigUint::from(p - 1));
        -1
    }
}

/// A square root of `a` modulo the odd prime `p` (Tonelli–Shanks), or
/// `None` when `a` is a non-residue. The smaller of the two roots is returned.
pub fn sqrt_mod(a: &BigInt, p: u128) -> Option<BigInt> {
    let pb = BigInt::from(p);
    let a = a.mod_floor(&pb);
    if a.is_zero() {
        return Some(a);
    }
    if legendre(&a, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p)
        .find(|&z| jacobi(z, p) == -1)
        .expect("non-residue exists");
    let pow = |b: &BigInt, e: &BigInt| b.modpow(e, &pb);
    let mut m = s;
    let mut c = pow(&BigInt::from(z), &BigInt::from(q));
    let mut t = pow(&a, &BigInt::from(q));
    let mut r = pow(&a, &BigInt::from(q.div_ceil(2)));
    while !t.is_one() {
        let mut i = 0;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = &t2 * &t2 % &pb;
            i += 1;
        }
        let b = pow(&c, &(BigInt::one() << (m - i - 1)));
        m = i;
        c = &b * &b % &pb;
        t = t * &c % &pb;
        r = r * b % &pb;
    }
    let other = &pb - &r;
    Some(if other < r { other } else { r })
}

/// Additive Hilbert symbol `⟨a, b⟩_v ∈ F₂`.
///
/// # Panics
/// If `a` or `b` is zero.
pub fn hilbert_symbol(a: &Rational, b: &Rational, v: Place) -> u8 {
    let la = LocalSquareClass::of_rational(a, v).expect("hilbert symbol of zero");
    let lb = LocalSquareClass::of_rational(b, v).expect("hilbert symbol of zero");
    la.pair(&lb)
}

/// True iff `x` is a square in the completion ℚ_v.
pub fn is_local_square(x: &Rational, v: Place) -> bool {
    if x.is_zero() {
        return false;
    }
    LocalSquareClass::of_rational(x, v)
        .map(|l| l.is_trivial())
        .unwrap_or(false)
}
