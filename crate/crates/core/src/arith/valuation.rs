use num_bigint::BigInt;
use num_traits::Zero;

use super::Place;
use crate::{Error, Rational, Result};

/// Splits `n = p^k · m` with `p ∤ m`. `n` must be nonzero.
pub fn split_power(n: &BigInt, p: u128) -> (u64, BigInt) {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut m = n.clone();
    let mut k = 0;
    loop {
        let (q, r) = (&m / &p, &m % &p);
        if !r.is_zero() {
            return (k, m);
        }
        m = q;
        k += 1;
    }
}

pub fn valuation_int(n: &BigInt, p: u128) -> u64 {
    split_power(n, p).0
}

/// `v_p(x)` for nonzero rational `x`.
pub fn valuation(x: &Rational, place: Place) -> Result<i64> {
    let p = place.prime().ok_or(Error::RealPlace)?;
    if x.is_zero() {
        return Err(Error::Zero("argument of a valuation"));
    }
    Ok(valuation_int(x.numer(), p) as i64 - valuation_int(x.denom(), p) as i64)
}

/// Like [`valuation`] but with `+∞` encoded as `None` for zero.
pub fn valuation_or_inf(x: &Rational, p: u128) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(valuation_int(x.numer(), p) as i64 - valuation_int(x.denom(), p) as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn examples() {
        let p2 = Place::finite(2).unwrap();
        let p7 = Place::finite(7).unwrap();
        assert_eq!(valuation(&int(24), p2).unwrap(), 3);
        assert_eq!(valuation(&int(1), p7).unwrap(), 0);
        assert_eq!(valuation(&ratio(9, 14), p7).unwrap(), -1);
        assert!(valuation(&int(0), p7).is_err());
        assert_eq!(valuation(&int(5), Place::Real), Err(Error::RealPlace));
    }
}
