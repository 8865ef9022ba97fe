use std::fmt;
use std::str::FromStr;

use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

use super::primes::is_prime;
use crate::{Error, Result};

/// A prime whose primality has been certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u128);

impl Prime {
    pub fn new(p: u128) -> Result<Self> {
        if is_prime(p)? {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p.to_string()))
        }
    }

    /// For values already known prime (factorization output, sieves).
    pub(crate) fn certified(p: u128) -> Self {
        debug_assert!(is_prime(p).unwrap_or(true));
        Prime(p)
    }

    pub fn get(self) -> u128 {
        self.0
    }
}

/// A place of ℚ. The derived order puts the real place first and the
/// finite places by size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Real,
    Finite(Prime),
}

impl Place {
    pub fn finite(p: u128) -> Result<Place> {
        Prime::new(p).map(Place::Finite)
    }

    pub(crate) fn certified(p: u128) -> Place {
        Place::Finite(Prime::certified(p))
    }

    pub fn prime(self) -> Option<u128> {
        match self {
            Place::Real => None,
            Place::Finite(p) => Some(p.get()),
        }
    }

    pub fn is_real(self) -> bool {
        matches!(self, Place::Real)
    }

    pub fn is_two(self) -> bool {
        self.prime() == Some(2)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => f.write_str("inf"),
            Place::Finite(p) => write!(f, "{}", p.get()),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Place> {
        match s.trim() {
            "inf" | "real" | "oo" | "∞" => Ok(Place::Real),
            other => {
                let p: u128 = other.parse().map_err(|_| Error::Parse {
                    line: 0,
                    msg: format!("not a place: {other:?}"),
                })?;
                Place::finite(p)
            }
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Place, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_real_then_ascending_primes() {
        let mut v = [
            Place::finite(5).unwrap(),
            Place::Real,
            Place::finite(2).unwrap(),
            Place::finite(3).unwrap(),
        ];
        v.sort();
        let s: Vec<String> = v.iter().map(|p| p.to_string()).collect();
        assert_eq!(s, ["inf", "2", "3", "5"]);
    }

    #[test]
    fn parsing() {
        assert_eq!("inf".parse::<Place>().unwrap(), Place::Real);
        assert_eq!("7".parse::<Place>().unwrap().prime(), Some(7));
        assert!("9".parse::<Place>().is_err());
        assert!("seven".parse::<Place>().is_err());
    }
}
