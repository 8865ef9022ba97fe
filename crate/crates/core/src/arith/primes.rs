//! Certified primality, desk-scale factorization and deterministic prime streams.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// Deterministic Miller–Rabin with the first thirteen prime bases is proven
/// correct below this bound (Sorenson–Webster).
pub const MILLER_RABIN_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;

const BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

const SIEVE_LIMIT: usize = 1 << 16;

/// Primes below 2^16.
pub fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut composite = vec![false; SIEVE_LIMIT];
        let mut out = Vec::new();
        for i in 2..SIEVE_LIMIT {
            if !composite[i] {
                out.push(i as u64);
                let mut j = i * i;
                while j < SIEVE_LIMIT {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        out
    })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn strong_probable_prime_u64(n: u64, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

fn strong_probable_prime_big(n: &BigUint, a: u64) -> bool {
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let mut x = BigUint::from(a).modpow(&d, n);
    if x == one || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Deterministic primality test.
///
/// Inputs at or above [`MILLER_RABIN_LIMIT`] are rejected rather than guessed.
pub fn is_prime(n: u128) -> Result<bool> {
    if n < 2 {
        return Ok(false);
    }
    for &p in &small_primes()[..25] {
        let p = p as u128;
        if n == p {
            return Ok(true);
        }
        if n.is_multiple_of(p) {
            return Ok(false);
        }
    }
    if n < 101 * 101 {
        return Ok(true);
    }
    if let Ok(n) = u64::try_from(n) {
        return Ok(BASES[..12].iter().all(|&a| strong_probable_prime_u64(n, a)));
    }
    let big = BigUint::from(n);
    let probable = BASES.iter().all(|&a| strong_probable_prime_big(&big, a));
    // a failed base proves compositeness at any size
    if probable && n >= MILLER_RABIN_LIMIT {
        return Err(Error::PrimalityOutOfRange(n.to_string()));
    }
    Ok(probable)
}

/// Certified primality for arbitrary integers; values outside the
/// deterministic range are an error.
pub fn is_prime_big(n: &BigInt) -> Result<bool> {
    match n.to_u128() {
        Some(n) => is_prime(n),
        None if n.sign() == Sign::Minus => Ok(false),
        None => Err(Error::PrimalityOutOfRange(n.to_string())),
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Brent's variant of Pollard rho; returns a nontrivial factor of an odd composite.
fn pollard_brent_u64(n: u64) -> Option<u64> {
    for c in 1..64u64 {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut ys) = (2u64, 2u64, 2u64);
        let mut g = 1u64;
        let mut r = 1u64;
        let mut q = 1u64;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u64(q, n);
                k += m;
            }
            r *= 2;
            if r > 1 << 26 {
                break;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g > 1 && g < n {
            return Some(g);
        }
    }
    None
}

fn pollard_rho_big(n: &BigUint) -> Option<BigUint> {
    let one = BigUint::one();
    for c in 1..16u32 {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut x = BigUint::from(2u32);
        let mut y = x.clone();
        for _ in 0..(1u64 << 22) {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            let g = diff.gcd(n);
            if g == *n {
                break;
            }
            if g != one {
                return Some(g);
            }
        }
    }
    None
}

fn push_factor(out: &mut Vec<(u128, u32)>, p: u128, e: u32) {
    match out.iter_mut().find(|(q, _)| *q == p) {
        Some(entry) => entry.1 += e,
        None => out.push((p, e)),
    }
}

fn split_composite(n: u128, out: &mut Vec<(u128, u32)>) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    if is_prime(n)? {
        push_factor(out, n, 1);
        return Ok(());
    }
    let factor = if let Ok(small) = u64::try_from(n) {
        pollard_brent_u64(small).map(u128::from)
    } else {
        pollard_rho_big(&BigUint::from(n)).and_then(|g| g.to_u128())
    };
    let f = factor.ok_or_else(|| Error::Factorization(n.to_string()))?;
    split_composite(f, out)?;
    split_composite(n / f, out)
}

/// Prime factorization of a positive integer below 2^128, ascending.
pub fn factor_u128(mut n: u128) -> Result<Vec<(u128, u32)>> {
    if n == 0 {
        return Err(Error::Zero("integer to factor"));
    }
    let mut out = Vec::new();
    for &p in small_primes().iter().take(1200) {
        let p = p as u128;
        if p * p > n {
            break;
        }
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    split_composite(n, &mut out)?;
    out.sort_unstable();
    Ok(out)
}

/// Prime factorization of `|n|`; large cofactors must fit in 128 bits after
/// trial division by the primes below 2^16.
pub fn factor(n: &BigInt) -> Result<Vec<(u128, u32)>> {
    if n.is_zero() {
        return Err(Error::Zero("integer to factor"));
    }
    let mut m = n.magnitude().clone();
    if let Some(small) = m.to_u128() {
        return factor_u128(small);
    }
    let mut out = Vec::new();
    for &p in small_primes() {
        let big_p = BigUint::from(p);
        let mut e = 0;
        while (&m % &big_p).is_zero() {
            m /= &big_p;
            e += 1;
        }
        if e > 0 {
            out.push((p as u128, e));
        }
        if m.to_u128().is_some() {
            break;
        }
    }
    let rest = m
        .to_u128()
        .ok_or_else(|| Error::Factorization(n.to_string()))?;
    for (p, e) in factor_u128(rest)? {
        push_factor(&mut out, p, e);
    }
    out.sort_unstable();
    Ok(out)
}

/// Ascending primes strictly greater than `start`, skipping `avoid`.
#[derive(Debug, Clone)]
pub struct PrimeStream {
    current: u128,
    avoid: BTreeSet<u128>,
}

impl Iterator for PrimeStream {
    type Item = u128;

    fn next(&mut self) -> Option<u128> {
        loop {
            self.current = self.current.checked_add(1)?;
            match is_prime(self.current) {
                Ok(true) if !self.avoid.contains(&self.current) => return Some(self.current),
                Ok(_) => continue,
                Err(_) => return None,
            }
        }
    }
}

pub fn prime_stream(start: i128, avoid: impl IntoIterator<Item = u128>) -> PrimeStream {
    PrimeStream {
        current: start.max(1) as u128,
        avoid: avoid.into_iter().collect(),
    }
}
