//! Global and local square classes.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::primes::factor;
use super::symbols::jacobi;
use super::valuation::split_power;
use super::Place;
use crate::{Error, Rational, Result};

/// An element of ℚ*/(ℚ*)², stored as a sign and a square-free prime support.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SquareClass {
    negative: bool,
    #[serde(with = "crate::rational::serde_u128_vec")]
    support: Vec<u128>,
}

fn symmetric_difference(a: &[u128], b: &[u128]) -> Vec<u128> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl SquareClass {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn minus_one() -> Self {
        SquareClass {
            negative: true,
            support: Vec::new(),
        }
    }

    /// The class of a prime. The caller guarantees primality.
    pub fn prime(p: u128) -> Self {
        SquareClass {
            negative: false,
            support: vec![p],
        }
    }

    /// Builds a class from a sign and a list of primes, each occurrence
    /// counted mod 2.
    pub fn from_primes(negative: bool, primes: impl IntoIterator<Item = u128>) -> Self {
        let mut support: Vec<u128> = primes.into_iter().collect();
        support.sort_unstable();
        let mut out: Vec<u128> = Vec::with_capacity(support.len());
        for p in support {
            if out.last() == Some(&p) {
                out.pop();
            } else {
                out.push(p);
            }
        }
        SquareClass {
            negative,
            support: out,
        }
    }

    pub fn from_integer(n: &BigInt) -> Result<Self> {
        if n.is_zero() {
            return Err(Error::Zero("square class argument"));
        }
        let primes = factor(n)?
            .into_iter()
            .filter(|(_, e)| e % 2 == 1)
            .map(|(p, _)| p);
        Ok(Self::from_primes(n.is_negative(), primes))
    }

    pub fn from_rational(x: &Rational) -> Result<Self> {
        if x.is_zero() {
            return Err(Error::Zero("square class argument"));
        }
        Ok(Self::from_integer(x.numer())?.mul(&Self::from_integer(x.denom())?))
    }

    pub fn from_i64(n: i64) -> Result<Self> {
        Self::from_integer(&BigInt::from(n))
    }

    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        SquareClass {
            negative: self.negative ^ other.negative,
            support: symmetric_difference(&self.support, &other.support),
        }
    }

    pub fn is_identity(&self) -> bool {
        !self.negative && self.support.is_empty()
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn support(&self) -> &[u128] {
        &self.support
    }

    /// The square-free integer representing the class.
    pub fn value(&self) -> BigInt {
        let mut v = self
            .support
            .iter()
            .fold(BigInt::one(), |acc, &p| acc * BigInt::from(p));
        if self.negative {
            v = -v;
        }
        v
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from_integer(self.value())
    }

    /// Every prime of the support is in `primes` (sorted or not).
    pub fn is_supported_on(&self, primes: &[u128]) -> bool {
        self.support.iter().all(|p| primes.contains(p))
    }

    pub fn local(&self, place: Place) -> LocalSquareClass {
        LocalSquareClass::of_class(self, place)
    }

    /// Canonical ordering key: absolute value, then sign.
    pub fn canonical_key(&self) -> (BigInt, bool) {
        (self.value().abs(), self.negative)
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.value())
    }
}

/// Coordinates of an element of ℚ_v*/(ℚ_v*)² over F₂.
///
/// * real: bit 0 = sign.
/// * odd p: bit 0 = valuation parity, bit 1 = unit part is a non-residue.
/// * p = 2: bit 0 = valuation parity, bit 1 = ε(u) = [u ≡ 3 mod 4],
///   bit 2 = ω(u) = [u ≡ ±3 mod 8].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalSquareClass {
    place: Place,
    bits: u8,
}

fn eps(u_mod_8: u32) -> u8 {
    u8::from(u_mod_8 % 4 == 3)
}

fn omega(u_mod_8: u32) -> u8 {
    u8::from(matches!(u_mod_8, 3 | 5))
}

impl LocalSquareClass {
    pub fn dim(place: Place) -> usize {
        match place {
            Place::Real => 1,
            p if p.is_two() => 3,
            _ => 2,
        }
    }

    pub fn from_bits(place: Place, bits: u8) -> Self {
        debug_assert!(bits < 1 << Self::dim(place));
        LocalSquareClass { place, bits }
    }

    pub fn trivial(place: Place) -> Self {
        LocalSquareClass { place, bits: 0 }
    }

    pub fn place(&self) -> Place {
        self.place
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn is_trivial(&self) -> bool {
        self.bits == 0
    }

    pub fn valuation_odd(&self) -> bool {
        !self.place.is_real() && self.bits & 1 == 1
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.place, other.place);
        LocalSquareClass {
            place: self.place,
            bits: self.bits ^ other.bits,
        }
    }

    fn from_valuation_and_unit(place: Place, odd_valuation: bool, unit: &BigInt) -> Self {
        let v = u8::from(odd_valuation);
        match place.prime() {
            None => unreachable!(),
            Some(2) => {
                let u = unit.mod_floor(&BigInt::from(8)).to_u32().unwrap();
                LocalSquareClass {
                    place,
                    bits: v | eps(u) << 1 | omega(u) << 2,
                }
            }
            Some(p) => {
                let r = unit.mod_floor(&BigInt::from(p)).to_u128().unwrap();
                let nonresidue = u8::from(jacobi(r, p) == -1);
                LocalSquareClass {
                    place,
                    bits: v | nonresidue << 1,
                }
            }
        }
    }

    pub fn of_rational(x: &Rational, place: Place) -> Result<Self> {
        if x.is_zero() {
            return Err(Error::Zero("local square class argument"));
        }
        match place.prime() {
            None => Ok(LocalSquareClass {
                place,
                bits: u8::from(x.is_negative()),
            }),
            Some(p) => {
                let (en, un) = split_power(x.numer(), p);
                let (ed, ud) = split_power(x.denom(), p);
                // num/den and num·den have the same class
                Ok(Self::from_valuation_and_unit(
                    place,
                    (en + ed) % 2 == 1,
                    &(un * ud),
                ))
            }
        }
    }

    pub fn of_class(c: &SquareClass, place: Place) -> Self {
        match place.prime() {
            None => LocalSquareClass {
                place,
                bits: u8::from(c.negative),
            },
            Some(2) => {
                let mut u: u32 = if c.negative { 7 } else { 1 };
                let mut odd_val = false;
                for &q in &c.support {
                    if q == 2 {
                        odd_val = true;
                    } else {
                        u = u * (q % 8) as u32 % 8;
                    }
                }
                LocalSquareClass {
                    place,
                    bits: u8::from(odd_val) | eps(u) << 1 | omega(u) << 2,
                }
            }
            Some(p) => {
                let mut nonresidue = c.negative && p % 4 == 3;
                let mut odd_val = false;
                for &q in &c.support {
                    if q == p {
                        odd_val = true;
                    } else if jacobi(q % p, p) == -1 {
                        nonresidue = !nonresidue;
                    }
                }
                LocalSquareClass {
                    place,
                    bits: u8::from(odd_val) | u8::from(nonresidue) << 1,
                }
            }
        }
    }

    /// The additive Hilbert pairing of two local classes at the same place.
    pub fn pair(&self, other: &Self) -> u8 {
        assert_eq!(self.place, other.place, "pairing across places");
        let (a, b) = (self.bits, other.bits);
        match self.place.prime() {
            None => a & b & 1,
            Some(2) => {
                let (al, ae, ao) = (a & 1, a >> 1 & 1, a >> 2 & 1);
                let (bl, be, bo) = (b & 1, b >> 1 & 1, b >> 2 & 1);
                (ae & be) ^ (al & bo) ^ (bl & ao)
            }
            Some(p) => {
                let (al, au) = (a & 1, a >> 1 & 1);
                let (bl, bu) = (b & 1, b >> 1 & 1);
                let eps_p = u8::from(p % 4 == 3);
                (al & bl & eps_p) ^ (bl & au) ^ (al & bu)
            }
        }
    }

    /// Integers whose classes are the coordinate unit vectors, in bit order.
    pub fn basis_representatives(place: Place) -> Vec<BigInt> {
        match place.prime() {
            None => vec![BigInt::from(-1)],
            Some(2) => vec![BigInt::from(2), BigInt::from(-1), BigInt::from(5)],
            Some(p) => {
                let n = (2..p)
                    .find(|&n| jacobi(n, p) == -1)
                    .expect("odd prime has a non-residue");
                vec![BigInt::from(p), BigInt::from(n)]
            }
        }
    }

    /// All elements of the local group, in bit order.
    pub fn all(place: Place) -> impl Iterator<Item = LocalSquareClass> {
        (0..1u8 << Self::dim(place)).map(move |bits| LocalSquareClass { place, bits })
    }
}
