//! Vertical Brauer classes `𝒜_i = (left_i, p_i(t))`, their residues along
//! rational closed points of the base, and local invariants.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{factor, hilbert_symbol, Place, SquareClass};
use crate::surface::{Linear, PartialAdelicPoint, SurfaceSpec};
use crate::{Error, Rational, Result};

/// The quaternion symbol `(left, c·t + d)` over ℚ(t).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuaternionClass {
    #[serde(with = "crate::rational::serde_rational")]
    pub left: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub right_c: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub right_d: Rational,
}

impl QuaternionClass {
    pub fn new(left: Rational, right: &Linear) -> Result<Self> {
        Self::from_parts(
            left,
            Rational::from_integer(right.c.clone()),
            Rational::from_integer(right.d.clone()),
        )
    }

    pub fn from_parts(left: Rational, right_c: Rational, right_d: Rational) -> Result<Self> {
        if left.is_zero() {
            return Err(Error::Zero("left entry of a quaternion class"));
        }
        if right_c.is_zero() && right_d.is_zero() {
            return Err(Error::Zero("right entry of a quaternion class"));
        }
        Ok(QuaternionClass {
            left,
            right_c,
            right_d,
        })
    }

    pub fn right_at(&self, t: &Rational) -> Rational {
        &self.right_c * t + &self.right_d
    }
}

/// A closed point of the affine `t`-line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedPoint {
    Rational(Rational),
    /// Monic irreducible polynomial of degree ≥ 2, coefficients from the
    /// constant term up.
    Higher(Vec<Rational>),
}

/// `𝒜_i`: `left = a·p_A(r_i)` if `i ∉ A`, else `b·p_B(r_i)`, with `r_i = -d_i/c_i`.
pub fn brauer_generator(spec: &SurfaceSpec, i: usize) -> Result<QuaternionClass> {
    let r = spec.root(i);
    let left = if spec.part_a().contains(i) {
        spec.p_of(spec.part_b(), &r) * spec.b()
    } else {
        spec.p_of(spec.part_a(), &r) * spec.a()
    };
    QuaternionClass::new(left, spec.factor(i))
}

/// Residue of `(f, g)` at a rational point via the tame symbol
/// `(-1)^{v(f)v(g)}·f^{v(g)}/g^{v(f)}`, with `f` constant so `v(f) = 0`.
pub fn residue_at(q: &QuaternionClass, m: &ClosedPoint) -> Result<SquareClass> {
    let r = match m {
        ClosedPoint::Rational(r) => r,
        ClosedPoint::Higher(_) => {
            return Err(Error::Precondition(
                "residues are only implemented at rational closed points".into(),
            ))
        }
    };
    let vanishes = !q.right_c.is_zero() && q.right_at(r).is_zero();
    if vanishes {
        SquareClass::from_rational(&q.left)
    } else {
        Ok(SquareClass::identity())
    }
}

/// Residue of a sum of symbols: the product of the residues.
pub fn residue_of_sum(terms: &[QuaternionClass], m: &ClosedPoint) -> Result<SquareClass> {
    terms.iter().try_fold(SquareClass::identity(), |acc, q| {
        Ok(acc.mul(&residue_at(q, m)?))
    })
}

/// The class the fiber over `r_i` splits: `[a·p_A(r_i)]` for `i ∉ A`,
/// `[b·p_B(r_i)]` for `i ∈ A`. A residue of a vertical class at `r_i` must
/// lie in the subgroup it generates.
pub fn fiber_splitting_class(spec: &SurfaceSpec, i: usize) -> Result<SquareClass> {
    SquareClass::from_rational(&brauer_generator(spec, i)?.left)
}

/// `inv_v 𝒜_i(P_v) = ⟨left_i, p_i(t_v)⟩_v`.
pub fn invariant(spec: &SurfaceSpec, i: usize, t_v: &Rational, v: Place) -> Result<u8> {
    let q = brauer_generator(spec, i)?;
    let right = q.right_at(t_v);
    if right.is_zero() {
        return Err(Error::DegenerateFiber(crate::rational::render(t_v)));
    }
    Ok(hilbert_symbol(&q.left, &right, v))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionSum {
    pub factor: usize,
    pub value: u8,
    pub per_place: Vec<(Place, u8)>,
}

/// `Σ_v inv_v 𝒜_i(P_v)` for an adelic point given on `T ⊇ S₀ ∪ S_bad`.
/// Places outside `T` contribute zero because the implicit local points
/// there are integral at good places. Fails when `P` misses a place of
/// `S₀ ∪ S_bad`, where no such certificate exists.
pub fn brauer_obstruction_sum(
    spec: &SurfaceSpec,
    p: &PartialAdelicPoint,
    i: usize,
) -> Result<ObstructionSum> {
    for v in spec.s0().iter().copied().chain(spec.s_bad()?) {
        p.require(v)?;
    }
    let mut per_place = Vec::new();
    let mut value = 0;
    for (v, lp) in p.iter() {
        let inv = invariant(spec, i, &lp.t, v)?;
        value ^= inv;
        per_place.push((v, inv));
    }
    Ok(ObstructionSum {
        factor: i,
        value,
        per_place,
    })
}

/// Places where `⟨x, y⟩_v` can be nonzero: real and primes dividing `2xy`.
pub fn relevant_places(xs: &[&Rational]) -> Result<Vec<Place>> {
    let mut ps: BTreeSet<u128> = BTreeSet::from([2]);
    for x in xs {
        for n in [x.numer(), x.denom()] {
            for (p, _) in factor(n)? {
                ps.insert(p);
            }
        }
    }
    Ok(std::iter::once(Place::Real)
        .chain(ps.into_iter().map(Place::certified))
        .collect())
}

/// `Σ_v inv_v 𝒜_i` over every place at the base point `t`. Vanishes by
/// Hilbert reciprocity; evaluated explicitly as a consistency check.
pub fn global_invariant_sum(spec: &SurfaceSpec, i: usize, t: &Rational) -> Result<u8> {
    let q = brauer_generator(spec, i)?;
    let right = q.right_at(t);
    if right.is_zero() {
        return Err(Error::DegenerateFiber(crate::rational::render(t)));
    }
    let mut s = 0;
    for v in relevant_places(&[&q.left, &right])? {
        s ^= hilbert_symbol(&q.left, &right, v);
    }
    Ok(s)
}

/// The rational closed points where some generator can ramify: the roots
/// `r_i`, plus the given extra sample points.
pub fn candidate_points(spec: &SurfaceSpec, extra: &[Rational]) -> Vec<Rational> {
    let mut pts: Vec<Rational> = (0..spec.n()).map(|i| spec.root(i)).collect();
    pts.extend(extra.iter().cloned());
    pts.sort();
    pts.dedup();
    pts
}

/// Residue of `𝒜_i` predicted by the vertical-class computation: `[left_i]`
/// at `r_i` and trivial at every other rational point.
pub fn predicted_residue(spec: &SurfaceSpec, i: usize, point: &Rational) -> Result<SquareClass> {
    if &spec.root(i) == point {
        fiber_splitting_class(spec, i)
    } else {
        Ok(SquareClass::identity())
    }
}
