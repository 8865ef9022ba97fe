//! The surface `a·p_A(t)·x² + b·p_B(t)·y² = 1` as validated data, its fibers,
//! its place sets, and partial adelic points.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factor, Place, SquareClass};
use crate::rational::{denominator_supported_on, render};
use crate::{Error, Rational, Result};

/// Subset enumeration is exponential in `|J|`.
pub const MAX_FACTORS: usize = 16;

/// Reading flags embedded in every report.
pub const DELTA_NORMALIZATION: &str = "cross-resultant c_i*d_j - c_j*d_i";
pub const SUITABILITY_READING: &str = "-d*p_J(t_v)";

/// A subset of `J`, bit `i` for factor `i` (0-based).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FactorSet(pub u32);

impl FactorSet {
    pub const EMPTY: FactorSet = FactorSet(0);

    pub fn full(n: usize) -> Self {
        FactorSet(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        FactorSet(1 << i)
    }

    pub fn from_indices(ix: impl IntoIterator<Item = usize>) -> Self {
        FactorSet(ix.into_iter().fold(0, |m, i| m | 1 << i))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn sym_diff(self, other: FactorSet) -> FactorSet {
        FactorSet(self.0 ^ other.0)
    }

    pub fn complement(self, n: usize) -> FactorSet {
        FactorSet(!self.0 & Self::full(n).0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// All subsets of `{0, …, n-1}` in mask order.
    pub fn all(n: usize) -> impl Iterator<Item = FactorSet> {
        (0..1u32 << n).map(FactorSet)
    }
}

impl fmt::Display for FactorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ix: Vec<String> = self.indices().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", ix.join(","))
    }
}

/// `p(t) = c·t + d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Linear {
    #[serde(with = "crate::rational::serde_bigint")]
    pub c: BigInt,
    #[serde(with = "crate::rational::serde_bigint")]
    pub d: BigInt,
}

impl Linear {
    pub fn new(c: impl Into<BigInt>, d: impl Into<BigInt>) -> Self {
        Linear {
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        t * &self.c + &self.d
    }

    /// The root `-d/c`.
    pub fn root(&self) -> Rational {
        Rational::new(-self.d.clone(), self.c.clone())
    }
}

impl fmt::Display for Linear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.d.sign(), self.d.abs()) {
            (num_bigint::Sign::NoSign, _) => write!(f, "{}*t", self.c),
            (num_bigint::Sign::Minus, m) => write!(f, "{}*t - {}", self.c, m),
            (_, m) => write!(f, "{}*t + {}", self.c, m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecViolation {
    RealPlaceMissing,
    ZeroA,
    ZeroB,
    NoFactors,
    TooManyFactors { count: usize },
    ZeroLeadingCoefficient { factor: usize },
    NotCoprime { factor: usize, prime: String },
    Proportional { i: usize, j: usize },
    PartitionOutOfRange { index: usize },
}

impl fmt::Display for SpecViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecViolation::RealPlaceMissing => f.write_str("S0 must contain the real place"),
            SpecViolation::ZeroA => f.write_str("a must be nonzero"),
            SpecViolation::ZeroB => f.write_str("b must be nonzero"),
            SpecViolation::NoFactors => f.write_str("J must be non-empty"),
            SpecViolation::TooManyFactors { count } => {
                write!(f, "{count} factors exceed the limit of {MAX_FACTORS}")
            }
            SpecViolation::ZeroLeadingCoefficient { factor } => {
                write!(f, "factor {factor} has c = 0")
            }
            SpecViolation::NotCoprime { factor, prime } => {
                write!(
                    f,
                    "factor {factor}: c and d share the prime {prime} outside S0"
                )
            }
            SpecViolation::Proportional { i, j } => {
                write!(
                    f,
                    "factors {i} and {j} are proportional (c_i*d_j - c_j*d_i = 0)"
                )
            }
            SpecViolation::PartitionOutOfRange { index } => {
                write!(f, "partA index {index} is not a factor")
            }
        }
    }
}

/// Unvalidated input. Factor indices in `part_a` are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSpec {
    pub s0: Vec<Place>,
    pub a: BigInt,
    pub b: BigInt,
    pub factors: Vec<Linear>,
    pub part_a: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    s0: Vec<Place>,
    #[serde(with = "crate::rational::serde_bigint")]
    a: BigInt,
    #[serde(with = "crate::rational::serde_bigint")]
    b: BigInt,
    factors: Vec<Linear>,
    part_a: FactorSet,
}

/// Validates a raw spec, collecting every violated invariant.
pub fn validate_spec(raw: RawSpec) -> Result<SurfaceSpec> {
    let mut bad = Vec::new();
    let s0: Vec<Place> = raw
        .s0
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let s0_primes: Vec<u128> = s0.iter().filter_map(|v| v.prime()).collect();
    if !s0.contains(&Place::Real) {
        bad.push(SpecViolation::RealPlaceMissing);
    }
    if raw.a.is_zero() {
        bad.push(SpecViolation::ZeroA);
    }
    if raw.b.is_zero() {
        bad.push(SpecViolation::ZeroB);
    }
    let n = raw.factors.len();
    if n == 0 {
        bad.push(SpecViolation::NoFactors);
    }
    if n > MAX_FACTORS {
        bad.push(SpecViolation::TooManyFactors { count: n });
    }
    for (i, p) in raw.factors.iter().enumerate() {
        if p.c.is_zero() {
            bad.push(SpecViolation::ZeroLeadingCoefficient { factor: i + 1 });
        }
        let g = p.c.gcd(&p.d);
        if g.is_zero() {
            continue;
        }
        let g_outside = strip_primes(&g, &s0_primes);
        if !g_outside.is_one() {
            let q = factor(&g_outside)?.first().map(|(q, _)| *q).unwrap_or(0);
            bad.push(SpecViolation::NotCoprime {
                factor: i + 1,
                prime: q.to_string(),
            });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if cross_resultant(&raw.factors[i], &raw.factors[j]).is_zero() {
                bad.push(SpecViolation::Proportional { i: i + 1, j: j + 1 });
            }
        }
    }
    let mut part_a = FactorSet::EMPTY;
    for &k in &raw.part_a {
        if k == 0 || k > n {
            bad.push(SpecViolation::PartitionOutOfRange { index: k });
        } else {
            part_a.0 |= 1 << (k - 1);
        }
    }
    if !bad.is_empty() {
        return Err(Error::InvalidSpec(bad));
    }
    Ok(SurfaceSpec {
        s0,
        a: raw.a,
        b: raw.b,
        factors: raw.factors,
        part_a,
    })
}

fn strip_primes(n: &BigInt, primes: &[u128]) -> BigInt {
    let mut m = n.abs();
    for &p in primes {
        let p = BigInt::from(p);
        while !m.is_zero() && (&m % &p).is_zero() {
            m /= &p;
        }
    }
    m
}

pub fn cross_resultant(p: &Linear, q: &Linear) -> BigInt {
    &p.c * &q.d - &q.c * &p.d
}

/// The fiber conic `aA·x² + bB·y² = 1` over `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberSpec {
    #[serde(with = "crate::rational::serde_rational")]
    pub t: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub a_a: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub b_b: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub torus_d: Rational,
}

impl SurfaceSpec {
    pub fn new(raw: RawSpec) -> Result<Self> {
        validate_spec(raw)
    }

    pub fn s0(&self) -> &[Place] {
        &self.s0
    }

    pub fn s0_primes(&self) -> Vec<u128> {
        self.s0.iter().filter_map(|v| v.prime()).collect()
    }

    pub fn in_s0(&self, v: Place) -> bool {
        self.s0.contains(&v)
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn d(&self) -> BigInt {
        &self.a * &self.b
    }

    pub fn factors(&self) -> &[Linear] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &Linear {
        &self.factors[i]
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn part_a(&self) -> FactorSet {
        self.part_a
    }

    pub fn part_b(&self) -> FactorSet {
        self.part_a.complement(self.n())
    }

    pub fn all(&self) -> FactorSet {
        FactorSet::full(self.n())
    }

    pub fn to_raw(&self) -> RawSpec {
        RawSpec {
            s0: self.s0.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            factors: self.factors.clone(),
            part_a: self.part_a.indices().map(|i| i + 1).collect(),
        }
    }

    /// `p_{J'}(t) = ∏_{i∈J'} p_i(t)`, with `p_∅ = 1`.
    pub fn p_of(&self, set: FactorSet, t: &Rational) -> Rational {
        set.indices()
            .fold(Rational::one(), |acc, i| acc * self.factors[i].eval(t))
    }

    pub fn root(&self, i: usize) -> Rational {
        self.factors[i].root()
    }

    pub fn class_a(&self) -> SquareClass {
        SquareClass::from_integer(&self.a).expect("validated a ≠ 0")
    }

    pub fn class_b(&self) -> SquareClass {
        SquareClass::from_integer(&self.b).expect("validated b ≠ 0")
    }

    pub fn class_d(&self) -> SquareClass {
        self.class_a().mul(&self.class_b())
    }

    pub fn fiber(&self, t: &Rational) -> Result<FiberSpec> {
        let pa = self.p_of(self.part_a, t);
        let pb = self.p_of(self.part_b(), t);
        if pa.is_zero() || pb.is_zero() {
            return Err(Error::DegenerateFiber(render(t)));
        }
        let a_a = pa * &self.a;
        let b_b = pb * &self.b;
        let torus_d = -(&a_a * &b_b);
        Ok(FiberSpec {
            t: t.clone(),
            a_a,
            b_b,
            torus_d,
        })
    }

    /// `a·p_A(t)·x² + b·p_B(t)·y² − 1`.
    pub fn evaluate_point(&self, x: &Rational, y: &Rational, t: &Rational) -> Rational {
        self.p_of(self.part_a, t) * &self.a * x * x + self.p_of(self.part_b(), t) * &self.b * y * y
            - Rational::one()
    }

    /// True when `x` is an S₀-integer.
    pub fn is_s0_integral(&self, x: &Rational) -> bool {
        denominator_supported_on(x, &self.s0_primes())
    }

    /// The finite places outside S₀ where the integral model degenerates.
    pub fn s_bad(&self) -> Result<Vec<Place>> {
        let s0 = self.s0_primes();
        let mut out: BTreeSet<u128> = BTreeSet::new();
        if !s0.contains(&2) {
            out.insert(2);
        }
        let mut ints = vec![self.d()];
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                ints.push(cross_resultant(&self.factors[i], &self.factors[j]));
            }
        }
        for m in ints {
            let m = strip_primes(&m, &s0);
            for (p, _) in factor(&m)? {
                out.insert(p);
            }
        }
        // p_J has no unit value on ℤ_p only if every residue is a root,
        // which needs p ≤ |J|
        for p in
            crate::arith::prime_stream(1, s0.iter().copied()).take_while(|&p| p <= self.n() as u128)
        {
            let covered = (0..p).all(|r| {
                self.factors.iter().any(|f| {
                    let v = &f.c * BigInt::from(r) + &f.d;
                    (v % BigInt::from(p)).is_zero()
                })
            });
            if covered {
                out.insert(p);
            }
        }
        Ok(out.into_iter().map(Place::certified).collect())
    }

    /// `S = S₀ ∪ S_bad ∪ S_D`, ordered.
    pub fn s(&self, s_d: &[Place]) -> Result<Vec<Place>> {
        let mut all: BTreeSet<Place> = self.s0.iter().copied().collect();
        all.extend(self.s_bad()?);
        all.extend(s_d.iter().copied());
        Ok(all.into_iter().collect())
    }
}

impl fmt::Display for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |set: FactorSet| {
            set.indices()
                .map(|i| format!("({})", self.factors[i]))
                .collect::<Vec<_>>()
                .join("")
        };
        write!(
            f,
            "{}{}*x^2 + {}{}*y^2 = 1",
            self.a,
            side(self.part_a),
            self.b,
            side(self.part_b())
        )
    }
}

/// A local point `(x_v, y_v, t_v)`. Finite entries satisfy the equation to
/// `v`-adic precision `precision` (the residual has valuation at least
/// that); real entries store `t_v` exactly and approximate `x_v`, `y_v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalPoint {
    #[serde(with = "crate::rational::serde_rational")]
    pub x: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub y: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub t: Rational,
    pub precision: u32,
}

/// Local points over a finite ordered place set `T`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PartialAdelicPoint {
    entries: BTreeMap<Place, LocalPoint>,
}

impl PartialAdelicPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: Place, p: LocalPoint) -> Option<LocalPoint> {
        self.entries.insert(v, p)
    }

    pub fn get(&self, v: Place) -> Option<&LocalPoint> {
        self.entries.get(&v)
    }

    pub fn require(&self, v: Place) -> Result<&LocalPoint> {
        self.get(v).ok_or(Error::MissingPlace(v))
    }

    pub fn places(&self) -> Vec<Place> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Place, &LocalPoint)> {
        self.entries.iter().map(|(v, p)| (*v, p))
    }

    pub fn restrict(&self, places: &[Place]) -> PartialAdelicPoint {
        PartialAdelicPoint {
            entries: self
                .entries
                .iter()
                .filter(|(v, _)| places.contains(v))
                .map(|(v, p)| (*v, p.clone()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A `T`-admissible base point with its witness places.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissiblePoint {
    #[serde(with = "crate::rational::serde_rational")]
    pub t0: Rational,
    /// `u_i` for each factor: `p_i(t0)` has valuation one there.
    #[serde(with = "crate::rational::serde_u128_vec")]
    pub witnesses: Vec<u128>,
    pub t: Vec<Place>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    pub(crate) fn running_example() -> SurfaceSpec {
        SurfaceSpec::new(RawSpec {
            s0: vec![Place::Real],
            a: 2.into(),
            b: 3.into(),
            factors: vec![Linear::new(1, 0), Linear::new(1, 1)],
            part_a: vec![1],
        })
        .unwrap()
    }

    #[test]
    fn validate_examples() {
        let s = running_example();
        assert_eq!(s.d(), BigInt::from(6));
        let prop = RawSpec {
            s0: vec![Place::Real],
            a: 2.into(),
            b: 3.into(),
            factors: vec![Linear::new(1, 0), Linear::new(2, 0)],
            part_a: vec![1],
        };
        match validate_spec(prop) {
            Err(Error::InvalidSpec(v)) => {
                assert!(v.contains(&SpecViolation::Proportional { i: 1, j: 2 }))
            }
            other => panic!("{other:?}"),
        }
        let zero_a = RawSpec {
            a: 0.into(),
            ..s.to_raw()
        };
        assert!(
            matches!(validate_spec(zero_a), Err(Error::InvalidSpec(v)) if v == vec![SpecViolation::ZeroA])
        );
    }

    #[test]
    fn coprimality_is_relative_to_s0() {
        let raw = RawSpec {
            s0: vec![Place::Real],
            a: 1.into(),
            b: 1.into(),
            factors: vec![Linear::new(2, 4)],
            part_a: vec![],
        };
        assert!(validate_spec(raw.clone()).is_err());
        let raw = RawSpec {
            s0: vec![Place::Real, Place::finite(2).unwrap()],
            ..raw
        };
        assert!(validate_spec(raw).is_ok());
    }

    #[test]
    fn s_bad_examples() {
        let s = running_example();
        let two = Place::finite(2).unwrap();
        let three = Place::finite(3).unwrap();
        assert_eq!(s.s_bad().unwrap(), vec![two, three]);
        assert_eq!(s.s(&[]).unwrap(), vec![Place::Real, two, three]);
        let seven = Place::finite(7).unwrap();
        assert_eq!(s.s(&[seven]).unwrap(), vec![Place::Real, two, three, seven]);
        let s5 = SurfaceSpec::new(RawSpec {
            s0: vec![Place::Real, Place::finite(5).unwrap()],
            ..s.to_raw()
        })
        .unwrap();
        assert!(s5.s(&[]).unwrap().contains(&Place::finite(5).unwrap()));
    }

    #[test]
    fn s_bad_covers_residue_exhaustion() {
        // t(t+1)(t+2) vanishes at every residue mod 2 and mod 3
        let s = SurfaceSpec::new(RawSpec {
            s0: vec![Place::Real, Place::finite(2).unwrap()],
            a: 1.into(),
            b: 1.into(),
            factors: vec![Linear::new(1, 0), Linear::new(1, 1), Linear::new(1, 2)],
            part_a: vec![1],
        })
        .unwrap();
        assert_eq!(s.s_bad().unwrap(), vec![Place::finite(3).unwrap()]);
    }

    #[test]
    fn fiber_examples() {
        let s = running_example();
        let f = s.fiber(&int(1)).unwrap();
        assert_eq!(
            (f.a_a.clone(), f.b_b.clone(), f.torus_d.clone()),
            (int(2), int(6), int(-12))
        );
        assert!(matches!(s.fiber(&int(0)), Err(Error::DegenerateFiber(_))));
        let f = s.fiber(&int(-2)).unwrap();
        assert_eq!((f.a_a.clone(), f.b_b.clone()), (int(-4), int(-3)));
        assert_eq!(f.torus_d, int(-12));
        assert_eq!(f.a_a * f.b_b, -f.torus_d);
    }

    #[test]
    fn evaluate_point_examples() {
        let s = running_example();
        // t = 1: 2x² + 6y² − 1
        assert_eq!(s.evaluate_point(&int(1), &int(0), &int(1)), int(1));
        assert_eq!(
            s.evaluate_point(&int(-1), &int(3), &int(1)),
            s.evaluate_point(&int(1), &int(3), &int(1))
        );
        // t = 1/2: x² + 9/2·y² = 1
        assert!(s
            .evaluate_point(&int(1), &int(0), &crate::rational::ratio(1, 2))
            .is_zero());
    }
}
