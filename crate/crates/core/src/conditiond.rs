//! The group `G = ℚ*/ℚ*² ⊕ F₂⟨[p_i]⟩`, its subgroups `G_i`, `G^i`, the
//! intersections `G_D`, `G^D`, and the Condition (D) verdict.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factor, SquareClass};
use crate::surface::{cross_resultant, FactorSet, SurfaceSpec};
use crate::{Error, Rational, Result};

/// `[c][p_{J'}]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GElement {
    pub c: SquareClass,
    pub set: FactorSet,
}

impl GElement {
    pub fn new(c: SquareClass, set: FactorSet) -> Self {
        GElement { c, set }
    }

    pub fn identity() -> Self {
        GElement::new(SquareClass::identity(), FactorSet::EMPTY)
    }

    pub fn mul(&self, other: &GElement) -> GElement {
        GElement::new(self.c.mul(&other.c), self.set.sym_diff(other.set))
    }

    pub fn is_identity(&self) -> bool {
        self.c.is_identity() && self.set.is_empty()
    }

    /// `[a][p_A]`.
    pub fn a_p_a(spec: &SurfaceSpec) -> Self {
        GElement::new(spec.class_a(), spec.part_a())
    }

    /// `[d][p_J]`.
    pub fn d_p_j(spec: &SurfaceSpec) -> Self {
        GElement::new(spec.class_d(), spec.all())
    }

    /// `[-d][p_J]`.
    pub fn minus_d_p_j(spec: &SurfaceSpec) -> Self {
        GElement::new(spec.class_d().mul(&SquareClass::minus_one()), spec.all())
    }

    fn key(&self) -> (BigInt, bool, u32) {
        let (abs, neg) = self.c.canonical_key();
        (abs, neg, self.set.0)
    }
}

impl Ord for GElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for GElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.set.is_empty() {
            write!(f, "{}", self.c)
        } else {
            write!(f, "{}[p_{}]", self.c, self.set)
        }
    }
}

/// `D_i^{J'}` (or `D̂_i^{J'}` when `dual`), evaluated at `r_i = -d_i/c_i`.
pub fn d_value(spec: &SurfaceSpec, i: usize, set: FactorSet, dual: bool) -> Result<Rational> {
    let r = spec.root(i);
    let v = if set.contains(i) {
        let d = Rational::from_integer(spec.d());
        let d = if dual { -d } else { d };
        d * spec.p_of(set.complement(spec.n()), &r)
    } else {
        spec.p_of(set, &r)
    };
    if v.is_zero() {
        return Err(Error::Invariant(format!(
            "D_{}^{} vanishes: the factors are not pairwise independent",
            i + 1,
            set
        )));
    }
    Ok(v)
}

pub fn d_class(spec: &SurfaceSpec, i: usize, set: FactorSet, dual: bool) -> Result<SquareClass> {
    SquareClass::from_rational(&d_value(spec, i, set, dual)?)
}

/// `[a·D_i^A]`, the class every membership test compares against.
pub fn a_d_class(spec: &SurfaceSpec, i: usize) -> Result<SquareClass> {
    Ok(spec.class_a().mul(&d_class(spec, i, spec.part_a(), false)?))
}

/// Membership in `G_i` (or `G^i` when `dual`): `[c·D_i^{J'}] ∈ ⟨[a·D_i^A]⟩`.
pub fn in_g_i(spec: &SurfaceSpec, x: &GElement, i: usize, dual: bool) -> Result<bool> {
    let cd = x.c.mul(&d_class(spec, i, x.set, dual)?);
    Ok(cd.is_identity() || cd == a_d_class(spec, i)?)
}

pub fn in_g_d(spec: &SurfaceSpec, x: &GElement, dual: bool) -> Result<bool> {
    for i in 0..spec.n() {
        if !in_g_i(spec, x, i, dual)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `G_D` (or `G^D`) by subset intersection: for each `J'` the classes `c`
/// allowed by factor `i` are exactly `[D_i^{J'}]` and `[a·D_i^A·D_i^{J'}]`,
/// so the intersection over `i` is finite and explicit. Sorted canonically.
pub fn compute_gd(spec: &SurfaceSpec, dual: bool) -> Result<Vec<GElement>> {
    let n = spec.n();
    let ad: Vec<SquareClass> = (0..n).map(|i| a_d_class(spec, i)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for set in FactorSet::all(n) {
        let mut candidates: Option<Vec<SquareClass>> = None;
        for (i, adi) in ad.iter().enumerate() {
            let di = d_class(spec, i, set, dual)?;
            let here = [di.clone(), di.mul(adi)];
            candidates = Some(match candidates {
                None => {
                    let mut v = here.to_vec();
                    v.dedup();
                    v
                }
                Some(prev) => prev.into_iter().filter(|c| here.contains(c)).collect(),
            });
            if candidates.as_ref().is_some_and(|c| c.is_empty()) {
                break;
            }
        }
        for c in candidates.unwrap_or_default() {
            out.push(GElement::new(c, set));
        }
    }
    out.sort();
    out.dedup();
    certify_subgroup(&out)?;
    Ok(out)
}

fn certify_subgroup(elements: &[GElement]) -> Result<()> {
    let set: BTreeSet<&GElement> = elements.iter().collect();
    if !elements.iter().any(GElement::is_identity) {
        return Err(Error::Invariant("computed G_D lacks the identity".into()));
    }
    for x in elements {
        for y in elements {
            if !set.contains(&x.mul(y)) {
                return Err(Error::Invariant(format!(
                    "computed G_D not closed: {x}·{y}"
                )));
            }
        }
    }
    Ok(())
}

/// The subgroup generated by `gens`, sorted canonically.
pub fn span(gens: &[GElement]) -> Vec<GElement> {
    let mut all: BTreeSet<GElement> = BTreeSet::from([GElement::identity()]);
    for g in gens {
        let extra: Vec<GElement> = all.iter().map(|x| x.mul(g)).collect();
        all.extend(extra);
    }
    all.into_iter().collect()
}

/// `⟨[a][p_A], [d][p_J]⟩`.
pub fn target_gd(spec: &SurfaceSpec) -> Vec<GElement> {
    span(&[GElement::a_p_a(spec), GElement::d_p_j(spec)])
}

/// `⟨[-d][p_J]⟩`.
pub fn target_gd_hat(spec: &SurfaceSpec) -> Vec<GElement> {
    span(&[GElement::minus_d_p_j(spec)])
}

/// A minimal generating set of a finite subgroup, greedy in canonical order.
pub fn basis(elements: &[GElement]) -> Vec<GElement> {
    let mut sorted = elements.to_vec();
    sorted.sort();
    let mut gens = Vec::new();
    let mut spanned: BTreeSet<GElement> = BTreeSet::from([GElement::identity()]);
    for x in sorted {
        if !spanned.contains(&x) {
            gens.push(x.clone());
            spanned = span(&gens).into_iter().collect();
        }
    }
    gens
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionDReport {
    pub gd: Vec<GElement>,
    pub gd_hat: Vec<GElement>,
    pub gd_basis: Vec<GElement>,
    pub gd_hat_basis: Vec<GElement>,
    pub gd_holds: bool,
    pub gd_hat_holds: bool,
    pub holds: bool,
    /// Elements of `G_D` or `G^D` outside the target subgroups.
    pub witnesses: Vec<GElement>,
}

pub fn check_condition_d(spec: &SurfaceSpec) -> Result<ConditionDReport> {
    let gd = compute_gd(spec, false)?;
    let gd_hat = compute_gd(spec, true)?;
    let tgt = target_gd(spec);
    let tgt_hat = target_gd_hat(spec);
    for x in &tgt {
        if !gd.contains(x) {
            return Err(Error::Invariant(format!("{x} should lie in G_D")));
        }
    }
    for x in &tgt_hat {
        if !gd_hat.contains(x) {
            return Err(Error::Invariant(format!("{x} should lie in G^D")));
        }
    }
    let mut witnesses: Vec<GElement> = gd.iter().filter(|x| !tgt.contains(x)).cloned().collect();
    let extra_hat: Vec<GElement> = gd_hat
        .iter()
        .filter(|x| !tgt_hat.contains(x))
        .cloned()
        .collect();
    let gd_holds = witnesses.is_empty();
    let gd_hat_holds = extra_hat.is_empty();
    witnesses.extend(extra_hat);
    Ok(ConditionDReport {
        gd_basis: basis(&gd),
        gd_hat_basis: basis(&gd_hat),
        gd,
        gd_hat,
        gd_holds,
        gd_hat_holds,
        holds: gd_holds && gd_hat_holds,
        witnesses,
    })
}

/// Primes dividing `2·a·b·∏c_i·∏d_i·∏(c_i d_j − c_j d_i)`: every class
/// that can occur in `G_D` or `G^D` is supported on them.
pub fn support_primes(spec: &SurfaceSpec) -> Result<Vec<u128>> {
    let mut ints: Vec<BigInt> = vec![BigInt::from(2), spec.a().clone(), spec.b().clone()];
    for f in spec.factors() {
        ints.push(f.c.clone());
        ints.push(f.d.clone());
    }
    for i in 0..spec.n() {
        for j in i + 1..spec.n() {
            ints.push(cross_resultant(spec.factor(i), spec.factor(j)));
        }
    }
    let mut ps = BTreeSet::new();
    for m in ints.into_iter().filter(|m| !m.is_zero()) {
        for (p, _) in factor(&m.abs())? {
            ps.insert(p);
        }
    }
    Ok(ps.into_iter().collect())
}

/// `G_D` (or `G^D`) by filtering every element `[c][p_{J'}]` with `c`
/// supported on [`support_primes`] through the membership tests.
pub fn brute_force_gd(spec: &SurfaceSpec, dual: bool) -> Result<Vec<GElement>> {
    let ps = support_primes(spec)?;
    if ps.len() + 1 + spec.n() > 22 {
        return Err(Error::Precondition("brute-force G_D is too large".into()));
    }
    let mut out = Vec::new();
    for mask in 0u64..1 << (ps.len() + 1) {
        let c = SquareClass::from_primes(
            mask & 1 == 1,
            ps.iter()
                .enumerate()
                .filter(|(k, _)| mask >> (k + 1) & 1 == 1)
                .map(|(_, p)| *p),
        );
        for set in FactorSet::all(spec.n()) {
            let x = GElement::new(c.clone(), set);
            if in_g_d(spec, &x, dual)? {
                out.push(x);
            }
        }
    }
    out.sort();
    Ok(out)
}
