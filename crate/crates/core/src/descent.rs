//! The descent loop: hypothesis checks, suitable partial adelic points,
//! admissible base points, dual Selmer reduction by adding places, and the
//! final point search on the minimized fiber.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{
    hilbert_symbol, is_local_square, is_prime_big, prime_stream, split_power, valuation,
    LocalSquareClass, Place, SquareClass,
};
use crate::brauer::{brauer_generator, brauer_obstruction_sum, invariant, ObstructionSum};
use crate::conditiond::{
    a_d_class, check_condition_d, d_class, in_g_d, in_g_i, target_gd, ConditionDReport, GElement,
};
use crate::f2::{F2Vec, Subspace};
use crate::format::{render_spec, spec_hash};
use crate::points::{
    good_place_solubility, local_solubility, solve_fiber, verify_integral_point, Model,
};
use crate::rational::{mod_inverse, reduce_mod, render};
use crate::selmer::{ev, relative_selmer, relative_selmer_by_lemma, JBasis, RelativeSelmer};
use crate::surface::{
    AdmissiblePoint, LocalPoint, PartialAdelicPoint, SurfaceSpec, DELTA_NORMALIZATION,
    SUITABILITY_READING,
};
use crate::{Error, Rational, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    /// Base points examined per admissible-point search.
    pub admissible: u64,
    /// Primes examined per place search.
    pub primes: u64,
    /// Height bound for the final fiber search; zero skips the search.
    pub height: u64,
    /// Maximal number of places added to `T`.
    pub steps: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            admissible: 100_000,
            primes: 100_000,
            height: 1000,
            steps: 64,
        }
    }
}

/// Lazily added `S_D` witnesses allowed per run.
const MAX_SD_WITNESSES: usize = 8;
/// Places `w` tried per reduction choice before giving up on it.
const MAX_W_ATTEMPTS: usize = 8;
/// Largest Selmer dimension whose elements are enumerated when choosing.
const ENUMERATION_DIM: usize = 16;
/// Admissible base points whose fibers are searched at the end.
const FIBER_ATTEMPTS: usize = 8;
/// Largest `J^T` enumerated for the second-route cross-check.
const CROSS_CHECK_DIM: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// `P` is a local point of the right model at every listed place.
    LocalPoints,
    /// Condition (D).
    ConditionD,
    /// `val_v(d·p_J(t_v)) ≤ 1` off `S₀`, and `= 1` at 2 when `2 ∉ S₀`.
    ValuationBound,
    /// Some `v ∈ S₀` has `−d·p_J(t_v)` a nonzero square.
    SplitPlace,
    /// `P` is orthogonal to every vertical Brauer generator.
    BrauerSum,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Hypothesis::LocalPoints => "local points",
            Hypothesis::ConditionD => "condition (D)",
            Hypothesis::ValuationBound => "valuation bound (2)",
            Hypothesis::SplitPlace => "split place (3)",
            Hypothesis::BrauerSum => "Brauer orthogonality (4)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceCheck {
    pub place: Place,
    #[serde(with = "crate::rational::serde_rational")]
    pub t: Rational,
    pub model: Model,
    /// The fiber over `t_v` has a point in the model.
    pub fiber_soluble: bool,
    /// The supplied `(x_v, y_v)` satisfies the equation to its precision.
    pub residual_ok: bool,
    /// `val_v(d·p_J(t_v))`, absent at the real place or when it vanishes.
    pub valuation: Option<i64>,
    pub valuation_ok: bool,
    /// `v ∈ S₀` and `−d·p_J(t_v)` is a nonzero square at `v`.
    pub split: bool,
}

fn model_at(spec: &SurfaceSpec, v: Place) -> Model {
    if spec.in_s0(v) {
        Model::Rational
    } else {
        Model::Integral
    }
}

fn d_p_j(spec: &SurfaceSpec, t: &Rational) -> Rational {
    Rational::from_integer(spec.d()) * spec.p_of(spec.all(), t)
}

fn residual_ok(spec: &SurfaceSpec, v: Place, lp: &LocalPoint, integral: bool) -> Result<bool> {
    let r = spec.evaluate_point(&lp.x, &lp.y, &lp.t);
    match v {
        Place::Real => {
            let tol = Rational::new(BigInt::one(), BigInt::from(1_000_000));
            Ok(r.abs() <= tol)
        }
        _ => {
            if integral
                && [&lp.x, &lp.y]
                    .iter()
                    .any(|z| !z.is_zero() && valuation(z, v).unwrap_or(0) < 0)
            {
                return Ok(false);
            }
            Ok(r.is_zero() || valuation(&r, v)? >= i64::from(lp.precision))
        }
    }
}

pub fn check_place(spec: &SurfaceSpec, v: Place, lp: &LocalPoint) -> Result<PlaceCheck> {
    let model = model_at(spec, v);
    let dpj = d_p_j(spec, &lp.t);
    let mut check = PlaceCheck {
        place: v,
        t: lp.t.clone(),
        model,
        fiber_soluble: false,
        residual_ok: false,
        valuation: None,
        valuation_ok: false,
        split: false,
    };
    if dpj.is_zero() {
        return Ok(check);
    }
    let integral_t = model == Model::Rational || lp.t.is_zero() || valuation(&lp.t, v)? >= 0;
    let fiber = spec.fiber(&lp.t)?;
    check.fiber_soluble =
        integral_t && local_solubility(&fiber.a_a, &fiber.b_b, v, model)?.is_soluble();
    check.residual_ok = residual_ok(spec, v, lp, model == Model::Integral)?;
    if !v.is_real() {
        check.valuation = Some(valuation(&dpj, v)?);
    }
    check.valuation_ok = match (spec.in_s0(v), check.valuation) {
        (true, _) => true,
        (false, Some(e)) => e <= 1 && (!v.is_two() || e == 1),
        (false, None) => false,
    };
    check.split = spec.in_s0(v) && is_local_square(&-dpj, v);
    Ok(check)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub places: Vec<PlaceCheck>,
    pub condition_d: ConditionDReport,
    pub brauer: Vec<ObstructionSum>,
    pub split_places: Vec<Place>,
    pub failed: Vec<Hypothesis>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }
}

fn require_s(spec: &SurfaceSpec, p: &PartialAdelicPoint) -> Result<Vec<Place>> {
    let s = spec.s(&[])?;
    for &v in &s {
        p.require(v)?;
    }
    Ok(s)
}

/// The hypotheses of the main theorem for the adelic point `P`, given on
/// `S₀ ∪ S_bad` (and optionally more places). Places outside `P` carry
/// implicit integral points with `p_J(t_v)` a unit, which satisfy every
/// condition there.
pub fn check_hypotheses(spec: &SurfaceSpec, p: &PartialAdelicPoint) -> Result<HypothesisReport> {
    require_s(spec, p)?;
    let places: Vec<PlaceCheck> = p
        .iter()
        .map(|(v, lp)| check_place(spec, v, lp))
        .collect::<Result<_>>()?;
    let condition_d = check_condition_d(spec)?;
    let nondegenerate = places.iter().all(|c| !d_p_j(spec, &c.t).is_zero());
    let brauer = if nondegenerate {
        (0..spec.n())
            .map(|i| brauer_obstruction_sum(spec, p, i))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let split_places: Vec<Place> = places.iter().filter(|c| c.split).map(|c| c.place).collect();
    let mut failed = Vec::new();
    if !nondegenerate || places.iter().any(|c| !c.fiber_soluble) {
        failed.push(Hypothesis::LocalPoints);
    }
    if !condition_d.holds {
        failed.push(Hypothesis::ConditionD);
    }
    if places.iter().any(|c| !c.valuation_ok) {
        failed.push(Hypothesis::ValuationBound);
    }
    if split_places.is_empty() {
        failed.push(Hypothesis::SplitPlace);
    }
    if !nondegenerate || brauer.iter().any(|o: &ObstructionSum| o.value != 0) {
        failed.push(Hypothesis::BrauerSum);
    }
    Ok(HypothesisReport {
        places,
        condition_d,
        brauer,
        split_places,
        failed,
    })
}

/// A place added to `S_D` for the element `element`, whose factor `factor`
/// has `p_factor(t_v)` a uniformizer there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdWitness {
    pub place: Place,
    pub factor: usize,
    pub element: GElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuitabilityReport {
    pub local_points: bool,
    /// (1) `d·p_J(t_v) ≠ 0`.
    pub nonzero: bool,
    /// (2) `val_v(d·p_J(t_v)) ≤ 1` on `T ∖ S₀`.
    pub valuation: bool,
    /// (3) `val_2(d·p_J(t_2)) = 1` if `2 ∈ T ∖ S₀`.
    pub two_adic: bool,
    /// (4) a place of `S₀` where `−d·p_J(t_v)` is a square.
    pub split: bool,
    /// (5) the Brauer sums vanish.
    pub brauer: bool,
    /// (6) every `S_D` point lies above a uniformizer of its factor.
    pub s_d: bool,
}

impl SuitabilityReport {
    pub fn holds(&self) -> bool {
        self.local_points
            && self.nonzero
            && self.valuation
            && self.two_adic
            && self.split
            && self.brauer
            && self.s_d
    }
}

pub fn check_suitable(
    spec: &SurfaceSpec,
    t: &[Place],
    p_t: &PartialAdelicPoint,
    s_d: &[SdWitness],
) -> Result<SuitabilityReport> {
    let s = spec.s(&[])?;
    if let Some(v) = s.iter().find(|v| !t.contains(v)) {
        return Err(Error::Precondition(format!(
            "T must contain S, but misses {v}"
        )));
    }
    let mut r = SuitabilityReport {
        local_points: true,
        nonzero: true,
        valuation: true,
        two_adic: true,
        split: false,
        brauer: true,
        s_d: true,
    };
    for &v in t {
        let c = check_place(spec, v, p_t.require(v)?)?;
        r.local_points &= c.fiber_soluble;
        r.split |= c.split;
        match c.valuation {
            _ if spec.in_s0(v) => {}
            Some(e) => {
                r.valuation &= e <= 1;
                r.two_adic &= !v.is_two() || e == 1;
            }
            None => r.nonzero &= !d_p_j(spec, &c.t).is_zero(),
        }
        if d_p_j(spec, &c.t).is_zero() {
            r.nonzero = false;
        }
    }
    if r.nonzero {
        let restricted = p_t.restrict(t);
        for i in 0..spec.n() {
            r.brauer &= brauer_obstruction_sum(spec, &restricted, i)?.value == 0;
        }
    } else {
        r.brauer = false;
    }
    for w in s_d {
        let lp = p_t.require(w.place)?;
        let val = spec.factor(w.factor).eval(&lp.t);
        r.s_d &= !val.is_zero() && valuation(&val, w.place)? == 1;
    }
    Ok(r)
}

/// `P_T` with `T = S` (and `S_D = ∅`): `P` restricted to `S`, checked
/// against every suitability condition.
pub fn build_suitable(
    spec: &SurfaceSpec,
    p: &PartialAdelicPoint,
) -> Result<(Vec<Place>, PartialAdelicPoint)> {
    let t = require_s(spec, p)?;
    let p_t = p.restrict(&t);
    let r = check_suitable(spec, &t, &p_t, &[])?;
    if !r.holds() {
        return Err(Error::Precondition(format!(
            "the partial adelic point is not suitable: {r:?}"
        )));
    }
    Ok((t, p_t))
}

/// An integral local point at the good place `w` above `t_w` with
/// `val_w(p_i(t_w)) = 1`. Soluble exactly when `left_i` is a square at `w`.
pub fn uniformizer_point(spec: &SurfaceSpec, w: u128, i: usize) -> Result<LocalPoint> {
    let place = Place::finite(w)?;
    let f = spec.factor(i);
    let w2 = BigInt::from(w) * BigInt::from(w);
    let c_inv = mod_inverse(&f.c, &w2)
        .ok_or_else(|| Error::Precondition(format!("c_{} is not a unit at {w}", i + 1)))?;
    let t_w = Rational::from_integer(((BigInt::from(w) - &f.d) * c_inv).mod_floor(&w2));
    if valuation(&f.eval(&t_w), place)? != 1 {
        return Err(Error::Invariant(format!(
            "p_{}({t_w}) is not a uniformizer at {w}",
            i + 1
        )));
    }
    let fiber = spec.fiber(&t_w)?;
    let sol = local_solubility(&fiber.a_a, &fiber.b_b, place, Model::Integral)?;
    if sol.is_soluble() != good_place_solubility(spec, i, &t_w, place)? {
        return Err(Error::Invariant(format!(
            "good-place criterion disagrees with Hensel at {w}"
        )));
    }
    match sol.witness() {
        Some(wit) => Ok(LocalPoint {
            x: wit.x.clone(),
            y: wit.y.clone(),
            t: t_w,
            precision: wit.precision,
        }),
        None => Err(Error::Precondition(format!(
            "the fiber above t = {} has no Z_{w} point",
            render(&t_w)
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReciprocityCertificate {
    pub factor: usize,
    #[serde(with = "crate::rational::serde_u128")]
    pub witness: u128,
    /// `⟨left_i, p_i(t0)⟩` at `u_i`.
    pub direct: u8,
    /// `Σ_{v∈T} ⟨left_i, p_i(t0)⟩_v`.
    pub sum_at_t0: u8,
    /// `Σ_{v∈T} ⟨left_i, p_i(t_v)⟩_v`, the suitability sum.
    pub sum_at_tv: u8,
}

impl ReciprocityCertificate {
    pub fn holds(&self) -> bool {
        self.direct == 0 && self.sum_at_t0 == 0 && self.sum_at_tv == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleFound {
    pub point: AdmissiblePoint,
    /// Candidates examined, this one included.
    pub scanned: u64,
    #[serde(with = "crate::rational::serde_bigint")]
    pub modulus: BigInt,
    #[serde(with = "crate::rational::serde_bigint")]
    pub denominator: BigInt,
    pub reciprocity: Vec<ReciprocityCertificate>,
    /// Fiber solubility over `t0` at `T` and at the witnesses.
    pub local: Vec<(Place, bool)>,
}

/// `k_v` such that `val_v(t0 − t_v) ≥ k_v` forces `[p_i(t0)]_v = [p_i(t_v)]_v`:
/// the ratio `p_i(t0)/p_i(t_v)` is then `≡ 1 mod v` (mod 8 at 2).
fn approximation_exponent(spec: &SurfaceSpec, v: Place, tv: &Rational) -> Result<i64> {
    let mut k = i64::MIN;
    for f in spec.factors() {
        let e = valuation(&f.eval(tv), v)?;
        let c = valuation(&Rational::from_integer(f.c.clone()), v)?;
        k = k.max(e - c + 1);
    }
    Ok(if v.is_two() { k + 2 } else { k })
}

struct Progression {
    denominator: BigInt,
    modulus: BigInt,
    residue: BigInt,
}

/// `t0 = (residue + modulus·j)/denominator` meets every approximation
/// condition at the finite places of `T`. `extra` adds powers of the least
/// finite `S₀` prime to the denominator, which shifts the progression.
fn progression(
    spec: &SurfaceSpec,
    p_t: &PartialAdelicPoint,
    t: &[Place],
    extra: u32,
) -> Result<Progression> {
    let s0_primes = spec.s0_primes();
    let least = s0_primes.first().copied();
    let mut denominator = BigInt::one();
    let mut shifts = BTreeMap::new();
    for &v in t {
        let Some(p) = v.prime() else { continue };
        let tv = &p_t.require(v)?.t;
        let vt = if tv.is_zero() { 0 } else { valuation(tv, v)? };
        let n = if spec.in_s0(v) {
            (-vt).max(0) as u32 + if Some(p) == least { extra } else { 0 }
        } else if vt < 0 {
            return Err(Error::Precondition(format!("t_{v} is not {v}-integral")));
        } else {
            0
        };
        denominator *= BigInt::from(p).pow(n);
        shifts.insert(p, n);
    }
    let (mut residue, mut modulus) = (BigInt::zero(), BigInt::one());
    for &v in t {
        let Some(p) = v.prime() else { continue };
        let tv = &p_t.require(v)?.t;
        let e = (approximation_exponent(spec, v, tv)? + i64::from(shifts[&p])).max(0) as u32;
        let m = BigInt::from(p).pow(e);
        let r = reduce_mod(&(tv * &denominator), &m)
            .ok_or_else(|| Error::Invariant("D·t_v not integral".into()))?;
        // CRT with coprime moduli
        let inv = mod_inverse(&modulus, &m).expect("coprime moduli");
        let lift = ((&r - &residue) * inv).mod_floor(&m);
        residue += &modulus * lift;
        modulus *= m;
    }
    Ok(Progression {
        denominator,
        modulus,
        residue,
    })
}

/// Signed offsets `0, 1, −1, 2, −2, …`.
fn zigzag(k: u64) -> i64 {
    let h = k.div_ceil(2) as i64;
    if k % 2 == 1 {
        h
    } else {
        -h
    }
}

fn strip(n: &BigInt, primes: &[u128]) -> BigInt {
    primes.iter().fold(n.abs(), |m, &p| split_power(&m, p).1)
}

/// An accepted `t0` with its reciprocity certificates and per-place checks.
type Candidate = (
    AdmissiblePoint,
    Vec<ReciprocityCertificate>,
    Vec<(Place, bool)>,
);

/// Checks one candidate `t0`; `None` when it fails a filter.
fn admissible_candidate(
    spec: &SurfaceSpec,
    p_t: &PartialAdelicPoint,
    t: &[Place],
    t0: &Rational,
) -> Result<Option<Candidate>> {
    let t_primes: Vec<u128> = t.iter().filter_map(|v| v.prime()).collect();
    let values: Vec<Rational> = spec.factors().iter().map(|f| f.eval(t0)).collect();
    if values.iter().any(Zero::is_zero) {
        return Ok(None);
    }
    for &v in t {
        let tv = &p_t.require(v)?.t;
        for (f, val) in spec.factors().iter().zip(&values) {
            if LocalSquareClass::of_rational(val, v)?
                != LocalSquareClass::of_rational(&f.eval(tv), v)?
            {
                return Ok(None);
            }
        }
    }
    let mut witnesses = Vec::with_capacity(values.len());
    for val in &values {
        if !strip(val.denom(), &t_primes).is_one() {
            return Ok(None);
        }
        let q = strip(val.numer(), &t_primes);
        if q.is_one() || !is_prime_big(&q).unwrap_or(false) {
            return Ok(None);
        }
        let q = q.to_u128().expect("certified primes fit in u128");
        if witnesses.contains(&q) {
            return Ok(None);
        }
        witnesses.push(q);
    }
    let fiber = spec.fiber(t0)?;
    let mut local = Vec::new();
    let places = t
        .iter()
        .copied()
        .chain(witnesses.iter().map(|&u| Place::certified(u)));
    for v in places {
        let ok = local_solubility(&fiber.a_a, &fiber.b_b, v, model_at(spec, v))?.is_soluble();
        local.push((v, ok));
        if !ok {
            return Ok(None);
        }
    }
    let mut reciprocity = Vec::new();
    for (i, &u) in witnesses.iter().enumerate() {
        let left = brauer_generator(spec, i)?.left;
        let mut cert = ReciprocityCertificate {
            factor: i,
            witness: u,
            direct: hilbert_symbol(&left, &values[i], Place::certified(u)),
            sum_at_t0: 0,
            sum_at_tv: 0,
        };
        for &v in t {
            cert.sum_at_t0 ^= hilbert_symbol(&left, &values[i], v);
            cert.sum_at_tv ^= invariant(spec, i, &p_t.require(v)?.t, v)?;
        }
        if cert.direct != cert.sum_at_t0 {
            return Err(Error::Invariant(format!(
                "Hilbert reciprocity fails at t0 = {}",
                render(t0)
            )));
        }
        reciprocity.push(cert);
    }
    Ok(Some((
        AdmissiblePoint {
            t0: t0.clone(),
            witnesses,
            t: t.to_vec(),
        },
        reciprocity,
        local,
    )))
}

/// Up to `count` distinct `T`-admissible points among the first `bound`
/// candidates, with the number of candidates examined. Candidates lie in
/// the approximation progressions and are scanned outward from `t_∞`.
pub fn find_admissible_points(
    spec: &SurfaceSpec,
    p_t: &PartialAdelicPoint,
    t: &[Place],
    bound: u64,
    count: usize,
) -> Result<(Vec<AdmissibleFound>, u64)> {
    let t_inf = &p_t.require(Place::Real)?.t;
    let variants = if spec.s0_primes().is_empty() { 1 } else { 5 };
    let progs: Vec<Progression> = (0..variants)
        .map(|e| progression(spec, p_t, t, e))
        .collect::<Result<_>>()?;
    let centers: Vec<BigInt> = progs
        .iter()
        .map(|g| {
            let c = (t_inf * &g.denominator - Rational::from_integer(g.residue.clone()))
                / Rational::from_integer(g.modulus.clone());
            c.round().to_integer()
        })
        .collect();
    let mut seen = BTreeSet::new();
    let mut found = Vec::new();
    let mut scanned = 0u64;
    'outer: for k in 0.. {
        for (g, c) in progs.iter().zip(&centers) {
            if scanned >= bound {
                break 'outer;
            }
            scanned += 1;
            let m = &g.residue + &g.modulus * (c + zigzag(k));
            let t0 = Rational::new(m, g.denominator.clone());
            if !seen.insert(t0.clone()) {
                continue;
            }
            if let Some((point, reciprocity, local)) = admissible_candidate(spec, p_t, t, &t0)? {
                found.push(AdmissibleFound {
                    point,
                    scanned,
                    modulus: g.modulus.clone(),
                    denominator: g.denominator.clone(),
                    reciprocity,
                    local,
                });
                if found.len() >= count {
                    break 'outer;
                }
            }
        }
    }
    Ok((found, scanned))
}

pub fn find_admissible(
    spec: &SurfaceSpec,
    p_t: &PartialAdelicPoint,
    t: &[Place],
    bound: u64,
) -> Result<Option<AdmissibleFound>> {
    Ok(find_admissible_points(spec, p_t, t, bound, 1)?
        .0
        .into_iter()
        .next())
}

/// Bookkeeping for one executed reduction of `R̂`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub x0: GElement,
    pub x1: GElement,
    pub i_x: usize,
    pub x0_substituted: bool,
    pub x1_substituted: bool,
    #[serde(with = "crate::rational::serde_u128")]
    pub w: u128,
    /// Legendre symbols at `w` of `a·D^A`, `c₀·D^{J₀}` and `c₁·D^{J₁}`.
    pub legendre: [i8; 3],
    #[serde(with = "crate::rational::serde_rational")]
    pub t_w: Rational,
    /// Qualifying primes whose extension failed to shrink `R̂`.
    pub rejected_places: usize,
    pub dim_before: usize,
    pub dim_after: usize,
    pub minus_d_p_j_kept: bool,
    pub x0_excluded: bool,
    pub comparison_lemma: bool,
    pub orthogonality: bool,
    pub persistence: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum TraceStep {
    Suitable {
        places: Vec<Place>,
    },
    Admissible {
        places: Vec<Place>,
        #[serde(with = "crate::rational::serde_rational")]
        t0: Rational,
        #[serde(with = "crate::rational::serde_u128_vec")]
        witnesses: Vec<u128>,
        scanned: u64,
        reciprocity: Vec<ReciprocityCertificate>,
    },
    Selmer {
        dim_r: usize,
        dim_r_hat: usize,
        r_hat_basis: Vec<GElement>,
        split_places: Vec<Place>,
        /// Agreement with the Hilbert-symbol route, when small enough to run.
        routes_agree: Option<bool>,
    },
    SdWitness(SdWitness),
    Reduction(ReductionStep),
    FiberSearch {
        #[serde(with = "crate::rational::serde_rational")]
        t: Rational,
        #[serde(with = "crate::rational::serde_rational")]
        a_a: Rational,
        #[serde(with = "crate::rational::serde_rational")]
        b_b: Rational,
        height: u64,
        found: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    PointFound {
        #[serde(with = "crate::rational::serde_rational")]
        x: Rational,
        #[serde(with = "crate::rational::serde_rational")]
        y: Rational,
        #[serde(with = "crate::rational::serde_rational")]
        t: Rational,
        verified: bool,
    },
    /// `R̂ = ⟨[−d][p_J]⟩` at `t`; the point search was skipped.
    DualSelmerMinimized {
        #[serde(with = "crate::rational::serde_rational")]
        t: Rational,
        #[serde(with = "crate::rational::serde_rational")]
        a_a: Rational,
        #[serde(with = "crate::rational::serde_rational")]
        b_b: Rational,
    },
    SearchExhausted {
        stage: String,
        bound: u64,
    },
    HypothesisFailed {
        which: Vec<Hypothesis>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub spec_hash: String,
    pub spec: String,
    pub delta_normalization: String,
    pub suitability_reading: String,
    pub outcome: Outcome,
    pub hypotheses: Option<HypothesisReport>,
    pub trace: Vec<TraceStep>,
}

impl Certificate {
    fn new(spec: &SurfaceSpec) -> Self {
        Certificate {
            spec_hash: spec_hash(spec),
            spec: render_spec(spec),
            delta_normalization: DELTA_NORMALIZATION.into(),
            suitability_reading: SUITABILITY_READING.into(),
            outcome: Outcome::SearchExhausted {
                stage: "none".into(),
                bound: 0,
            },
            hypotheses: None,
            trace: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }

    /// The reduction steps, in order.
    pub fn reductions(&self) -> Vec<&ReductionStep> {
        self.trace
            .iter()
            .filter_map(|s| match s {
                TraceStep::Reduction(r) => Some(r),
                _ => None,
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "spec-hash {}", self.spec_hash);
        let _ = writeln!(out, "delta-normalization {}", self.delta_normalization);
        let _ = writeln!(out, "suitability-reading {}", self.suitability_reading);
        let _ = match &self.outcome {
            Outcome::PointFound { x, y, t, verified } => writeln!(
                out,
                "outcome point_found x={} y={} t={} verified={verified}",
                render(x),
                render(y),
                render(t)
            ),
            Outcome::DualSelmerMinimized { t, a_a, b_b } => writeln!(
                out,
                "outcome dual_selmer_minimized t={} fiber {}*x^2 + {}*y^2 = 1",
                render(t),
                render(a_a),
                render(b_b)
            ),
            Outcome::SearchExhausted { stage, bound } => {
                writeln!(out, "outcome search_exhausted stage={stage} bound={bound}")
            }
            Outcome::HypothesisFailed { which } => {
                let w: Vec<String> = which.iter().map(|h| h.to_string()).collect();
                writeln!(out, "outcome hypothesis_failed {}", w.join(", "))
            }
        };
        if let Some(h) = &self.hypotheses {
            let _ = writeln!(out, "hypotheses");
            for c in &h.places {
                let _ = writeln!(
                    out,
                    "  place {} t={} model={:?} soluble={} valuation={} split={}",
                    c.place,
                    render(&c.t),
                    c.model,
                    c.fiber_soluble,
                    c.valuation.map_or("-".into(), |e| e.to_string()),
                    c.split
                );
            }
            let _ = writeln!(out, "  condition-d holds={}", h.condition_d.holds);
            for o in &h.brauer {
                let _ = writeln!(
                    out,
                    "  brauer-sum factor={} value={}",
                    o.factor + 1,
                    o.value
                );
            }
        }
        let _ = writeln!(out, "trace");
        for (k, s) in self.trace.iter().enumerate() {
            let line = match s {
                TraceStep::Suitable { places } => format!("suitable T={}", show_places(places)),
                TraceStep::Admissible {
                    places,
                    t0,
                    witnesses,
                    scanned,
                    reciprocity,
                } => format!(
                    "admissible T={} t0={} witnesses={:?} scanned={} reciprocity={:?}",
                    show_places(places),
                    render(t0),
                    witnesses,
                    scanned,
                    reciprocity.iter().map(|c| c.direct).collect::<Vec<_>>()
                ),
                TraceStep::Selmer {
                    dim_r,
                    dim_r_hat,
                    r_hat_basis,
                    split_places,
                    routes_agree,
                } => format!(
                    "selmer dim R={dim_r} dim R^={dim_r_hat} basis R^={} split={} routes_agree={}",
                    r_hat_basis.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" "),
                    show_places(split_places),
                    routes_agree.map_or("skipped".into(), |b| b.to_string())
                ),
                TraceStep::SdWitness(w) => format!(
                    "s_d-witness place={} factor={} element={}",
                    w.place,
                    w.factor + 1,
                    w.element
                ),
                TraceStep::Reduction(r) => format!(
                    "reduction x0={} x1={} i_x={} w={} legendre={:?} dims {} -> {} checks kept={} excluded={} comparison={} orthogonal={} persistence={}",
                    r.x0,
                    r.x1,
                    r.i_x + 1,
                    r.w,
                    r.legendre,
                    r.dim_before,
                    r.dim_after,
                    r.minus_d_p_j_kept,
                    r.x0_excluded,
                    r.comparison_lemma,
                    r.orthogonality,
                    r.persistence
                ),
                TraceStep::FiberSearch {
                    t,
                    a_a,
                    b_b,
                    height,
                    found,
                } => format!(
                    "fiber-search t={} fiber {}*x^2 + {}*y^2 = 1 height={height} found={found}",
                    render(t),
                    render(a_a),
                    render(b_b)
                ),
            };
            let _ = writeln!(out, "  [{k}] {line}");
        }
        out
    }
}

fn show_places(ps: &[Place]) -> String {
    format!(
        "{{{}}}",
        ps.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )
}

/// The current `T`, `P_T`, admissible point and relative Selmer groups.
#[derive(Debug, Clone)]
pub struct DescentState {
    pub t: Vec<Place>,
    pub p_t: PartialAdelicPoint,
    pub s_d: Vec<SdWitness>,
    pub adm: AdmissibleFound,
    pub r: RelativeSelmer,
    pub r_hat: RelativeSelmer,
}

impl DescentState {
    fn selmer_step(&self, spec: &SurfaceSpec) -> Result<TraceStep> {
        let routes_agree = if JBasis::new(&self.t, spec.n()).len() <= CROSS_CHECK_DIM {
            let a = relative_selmer_by_lemma(spec, &self.p_t, &self.adm.point, true)?;
            let b = relative_selmer_by_lemma(spec, &self.p_t, &self.adm.point, false)?;
            Some(a == self.r_hat.elements() && b == self.r.elements())
        } else {
            None
        };
        Ok(TraceStep::Selmer {
            dim_r: self.r.dim(),
            dim_r_hat: self.r_hat.dim(),
            r_hat_basis: self.r_hat.basis_elements(),
            split_places: crate::selmer::fiber_split_places(spec, &self.r)?,
            routes_agree,
        })
    }

    fn admissible_step(&self) -> TraceStep {
        TraceStep::Admissible {
            places: self.t.clone(),
            t0: self.adm.point.t0.clone(),
            witnesses: self.adm.point.witnesses.clone(),
            scanned: self.adm.scanned,
            reciprocity: self.adm.reciprocity.clone(),
        }
    }
}

/// Builds the state over `T`, or `None` when no admissible point exists
/// within the bound.
pub fn enter_state(
    spec: &SurfaceSpec,
    t: Vec<Place>,
    p_t: PartialAdelicPoint,
    s_d: Vec<SdWitness>,
    bound: u64,
) -> Result<Option<DescentState>> {
    let Some(adm) = find_admissible(spec, &p_t, &t, bound)? else {
        return Ok(None);
    };
    let r = relative_selmer(spec, &p_t, &adm.point, false)?;
    let r_hat = relative_selmer(spec, &p_t, &adm.point, true)?;
    Ok(Some(DescentState {
        t,
        p_t,
        s_d,
        adm,
        r,
        r_hat,
    }))
}

fn members(r: &RelativeSelmer) -> Vec<GElement> {
    if r.dim() <= ENUMERATION_DIM {
        r.elements()
    } else {
        let mut v = r.basis_elements();
        v.sort();
        v
    }
}

#[derive(Debug, Clone)]
struct Plan {
    x0: GElement,
    x1: GElement,
    x0_norm: GElement,
    x1_norm: GElement,
    i_x: usize,
    alpha: SquareClass,
    beta: SquareClass,
    gamma: SquareClass,
}

#[derive(Debug, Clone)]
enum Choice {
    Reduce(Box<Plan>),
    Witness { element: GElement, factor: usize },
}

fn outside(x: &SquareClass, alpha: &SquareClass) -> bool {
    !x.is_identity() && x != alpha
}

/// Picks `x₀ ∈ R̂ ∖ ⟨[−d][p_J]⟩`, `x₁ ∈ R ∖ ⟨[a][p_A],[d][p_J]⟩` and `i_x`,
/// canonical-minimal, so that after normalizing `i_x ∉ J₀ ∪ J₁` the three
/// characters `a·D^A`, `c₀·D^{J₀}`, `c₁·D^{J₁}` at `i_x` admit a prime where
/// the first is a square and the others are not. When the dual criterion
/// `[c₁·D̂^{J₁}] ∉ {1, [a·D^A]}` picks an `i_x` with `x₁ ∈ G_{i_x}`, an `S_D`
/// witness for `x₁` is requested instead.
fn choose(spec: &SurfaceSpec, state: &DescentState, allow_witness: bool) -> Result<Option<Choice>> {
    let tau_hat = GElement::minus_d_p_j(spec);
    let tau = GElement::d_p_j(spec);
    let target = target_gd(spec);
    let xs0: Vec<GElement> = members(&state.r_hat)
        .into_iter()
        .filter(|x| !x.is_identity() && *x != tau_hat)
        .collect();
    let xs1: Vec<GElement> = members(&state.r)
        .into_iter()
        .filter(|x| !target.contains(x))
        .collect();
    for x0 in &xs0 {
        for x1 in &xs1 {
            let mut order: Vec<usize> = (0..spec.n()).collect();
            order.sort_by_key(|&i| {
                (
                    u8::from(x0.set.contains(i)) + u8::from(x1.set.contains(i)),
                    i,
                )
            });
            for i in order {
                let x0n = if x0.set.contains(i) {
                    x0.mul(&tau_hat)
                } else {
                    x0.clone()
                };
                let x1n = if x1.set.contains(i) {
                    x1.mul(&tau)
                } else {
                    x1.clone()
                };
                let alpha = a_d_class(spec, i)?;
                let beta = x0n.c.mul(&d_class(spec, i, x0n.set, false)?);
                let gamma = x1n.c.mul(&d_class(spec, i, x1n.set, false)?);
                if outside(&beta, &alpha) && outside(&gamma, &alpha) {
                    return Ok(Some(Choice::Reduce(Box::new(Plan {
                        x0: x0.clone(),
                        x1: x1.clone(),
                        x0_norm: x0n,
                        x1_norm: x1n,
                        i_x: i,
                        alpha,
                        beta,
                        gamma,
                    }))));
                }
                let dual_pick = !in_g_i(spec, x1, i, true)?;
                if allow_witness
                    && dual_pick
                    && !outside(&gamma, &alpha)
                    && !in_g_d(spec, x1, false)?
                {
                    for j in 0..spec.n() {
                        if !in_g_i(spec, x1, j, false)? {
                            return Ok(Some(Choice::Witness {
                                element: x1.clone(),
                                factor: j,
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

fn legendre_of(x: &SquareClass, w: u128) -> i8 {
    if LocalSquareClass::of_class(x, Place::certified(w)).is_trivial() {
        1
    } else {
        -1
    }
}

/// Odd primes `w ∉ avoid` with each class a `w`-unit and Legendre symbol as
/// requested, ascending. Classes with `w` in their support are skipped.
fn prime_scan<'a>(
    spec: &'a SurfaceSpec,
    conditions: &'a [(SquareClass, i8)],
    avoid: &BTreeSet<u128>,
    factor: usize,
    bound: u64,
) -> impl Iterator<Item = u128> + 'a {
    let c = spec.factor(factor).c.clone();
    prime_stream(2, avoid.iter().copied().chain([2]))
        .take(bound as usize)
        .filter(move |&w| {
            !(c.clone() % BigInt::from(w)).is_zero()
                && conditions
                    .iter()
                    .all(|(x, s)| !x.support().contains(&w) && legendre_of(x, w) == *s)
        })
}

fn avoid_set(state: &DescentState) -> BTreeSet<u128> {
    state
        .t
        .iter()
        .filter_map(|v| v.prime())
        .chain(state.adm.point.witnesses.iter().copied())
        .collect()
}

fn extend(
    spec: &SurfaceSpec,
    state: &DescentState,
    w: u128,
    factor: usize,
    s_d: Vec<SdWitness>,
    bound: u64,
) -> Result<Option<DescentState>> {
    let lp = uniformizer_point(spec, w, factor)?;
    let mut t = state.t.clone();
    t.push(Place::certified(w));
    t.sort();
    let mut p_t = state.p_t.clone();
    p_t.insert(Place::certified(w), lp);
    let r = check_suitable(spec, &t, &p_t, &s_d)?;
    if !r.holds() {
        return Err(Error::Invariant(format!(
            "extension at {w} broke suitability: {r:?}"
        )));
    }
    enter_state(spec, t, p_t, s_d, bound)
}

/// `⟨p_i(t0), p_j(t0)⟩_{u_i⁰} + ⟨p_i(t1), p_j(t1)⟩_{u_i¹} = 0` for `i ≠ i_w`, `j ≠ i`.
fn comparison_lemma(
    spec: &SurfaceSpec,
    old: &AdmissiblePoint,
    new: &AdmissiblePoint,
    i_w: usize,
) -> bool {
    let p = |t: &Rational, i: usize| spec.factor(i).eval(t);
    (0..spec.n()).filter(|&i| i != i_w).all(|i| {
        (0..spec.n()).filter(|&j| j != i).all(|j| {
            let a = hilbert_symbol(
                &p(&old.t0, i),
                &p(&old.t0, j),
                Place::certified(old.witnesses[i]),
            );
            let b = hilbert_symbol(
                &p(&new.t0, i),
                &p(&new.t0, j),
                Place::certified(new.witnesses[i]),
            );
            a == b
        })
    })
}

/// The part of `r` whose elements avoid `[p_{i_w}]`.
fn without_factor(r: &RelativeSelmer, i_w: usize) -> Subspace {
    let mut form = F2Vec::zero(r.basis.len());
    form.set(1 + r.basis.primes().len() + i_w, true);
    r.space.restrict(&[form])
}

fn reduction_checks(
    spec: &SurfaceSpec,
    old: &DescentState,
    new: &DescentState,
    plan: &Plan,
    w: u128,
) -> Result<(bool, bool, bool)> {
    let wp = Place::certified(w);
    let t1 = &new.adm.point.t0;
    let comparison = comparison_lemma(spec, &old.adm.point, &new.adm.point, plan.i_x);
    // P₀ = loc_w(R⁰_{P_T}) against P¹ = loc^w(R̂⁰_{P_{T_w}})
    let r0: Vec<GElement> = without_factor(&old.r, plan.i_x)
        .basis()
        .iter()
        .map(|b| old.r.basis.element(b))
        .collect();
    let hat1: Vec<GElement> = without_factor(&new.r_hat, plan.i_x)
        .basis()
        .iter()
        .map(|b| new.r_hat.basis.element(b))
        .collect();
    let mut orthogonal = true;
    for x in &r0 {
        for y in &hat1 {
            let (a, b) = (
                ev(spec, t1, x)?.to_rational(),
                ev(spec, t1, y)?.to_rational(),
            );
            orthogonal &= hilbert_symbol(&a, &b, wp) == 0;
        }
    }
    // elements of R̂⁰_{P_{T_w}} with loc^w = 0 lie in R̂_{P_T}
    let hat1_space = without_factor(&new.r_hat, plan.i_x);
    let gens = new.r_hat.basis.generators();
    let locs: Vec<LocalSquareClass> = gens
        .iter()
        .map(|g| Ok(ev(spec, t1, g)?.local(wp)))
        .collect::<Result<_>>()?;
    let forms: Vec<F2Vec> = (0..LocalSquareClass::dim(wp))
        .map(|k| {
            F2Vec::from_bits(
                &locs
                    .iter()
                    .map(|l| l.bits() >> k & 1 == 1)
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let mut persistence = true;
    for b in hat1_space.restrict(&forms).basis() {
        let x = new.r_hat.basis.element(b);
        persistence &= old.r_hat.contains(&x).unwrap_or(false);
    }
    Ok((comparison, orthogonal, persistence))
}

/// Outcome of one attempt to shrink `R̂`.
enum StepResult {
    Reduced(Box<DescentState>, ReductionStep),
    Witnessed(Box<DescentState>, SdWitness),
    Exhausted(&'static str, u64),
}

/// One application of the reduction lemma: choose `x₀, x₁, i_x`, find the
/// place `w`, extend `P_T` over `T_w` and recompute. Qualifying places that
/// fail to shrink `R̂` are skipped, up to a fixed number per choice.
pub fn reduce_dual_selmer(
    spec: &SurfaceSpec,
    state: &DescentState,
    bounds: &Bounds,
) -> Result<Option<(DescentState, ReductionStep)>> {
    match reduce_or_witness(spec, state, bounds, false)? {
        StepResult::Reduced(s, r) => Ok(Some((*s, r))),
        _ => Ok(None),
    }
}

fn reduce_or_witness(
    spec: &SurfaceSpec,
    state: &DescentState,
    bounds: &Bounds,
    allow_witness: bool,
) -> Result<StepResult> {
    let Some(choice) = choose(spec, state, allow_witness)? else {
        return Ok(StepResult::Exhausted("reduction_choice", 0));
    };
    let avoid = avoid_set(state);
    match choice {
        Choice::Witness { element, factor } => {
            let alpha = a_d_class(spec, factor)?;
            let gamma = element.c.mul(&d_class(spec, factor, element.set, false)?);
            let conds = [(alpha, 1), (gamma, -1)];
            let Some(v) = prime_scan(spec, &conds, &avoid, factor, bounds.primes).next() else {
                return Ok(StepResult::Exhausted("s_d_witness", bounds.primes));
            };
            let witness = SdWitness {
                place: Place::certified(v),
                factor,
                element,
            };
            let mut s_d = state.s_d.clone();
            s_d.push(witness.clone());
            match extend(spec, state, v, factor, s_d, bounds.admissible)? {
                Some(next) => {
                    if next.r.contains(&witness.element).unwrap_or(false) {
                        return Err(Error::Invariant(format!(
                            "S_D witness {v} did not remove {}",
                            witness.element
                        )));
                    }
                    Ok(StepResult::Witnessed(Box::new(next), witness))
                }
                None => Ok(StepResult::Exhausted("admissible", bounds.admissible)),
            }
        }
        Choice::Reduce(plan) => {
            let conds = [
                (plan.alpha.clone(), 1),
                (plan.beta.clone(), -1),
                (plan.gamma.clone(), -1),
            ];
            let mut rejected = 0;
            for w in prime_scan(spec, &conds, &avoid, plan.i_x, bounds.primes) {
                let Some(next) = extend(
                    spec,
                    state,
                    w,
                    plan.i_x,
                    state.s_d.clone(),
                    bounds.admissible,
                )?
                else {
                    return Ok(StepResult::Exhausted("admissible", bounds.admissible));
                };
                if next.r_hat.dim() >= state.r_hat.dim() {
                    rejected += 1;
                    if rejected >= MAX_W_ATTEMPTS {
                        return Ok(StepResult::Exhausted("reduction", rejected as u64));
                    }
                    continue;
                }
                let (comparison_lemma, orthogonality, persistence) =
                    reduction_checks(spec, state, &next, &plan, w)?;
                let step = ReductionStep {
                    x0: plan.x0.clone(),
                    x1: plan.x1.clone(),
                    i_x: plan.i_x,
                    x0_substituted: plan.x0 != plan.x0_norm,
                    x1_substituted: plan.x1 != plan.x1_norm,
                    w,
                    legendre: [
                        legendre_of(&plan.alpha, w),
                        legendre_of(&plan.beta, w),
                        legendre_of(&plan.gamma, w),
                    ],
                    t_w: next.p_t.require(Place::certified(w))?.t.clone(),
                    rejected_places: rejected,
                    dim_before: state.r_hat.dim(),
                    dim_after: next.r_hat.dim(),
                    minus_d_p_j_kept: next.r_hat.contains(&GElement::minus_d_p_j(spec))?,
                    x0_excluded: !next.r_hat.contains(&plan.x0).unwrap_or(false),
                    comparison_lemma,
                    orthogonality,
                    persistence,
                };
                return Ok(StepResult::Reduced(Box::new(next), step));
            }
            Ok(StepResult::Exhausted("chebotarev", bounds.primes))
        }
    }
}

/// The full pipeline from an adelic point to a certificate. Errors are
/// reserved for malformed input and internal inconsistencies; search
/// exhaustion and failed hypotheses are outcomes.
pub fn descend(spec: &SurfaceSpec, p: &PartialAdelicPoint, bounds: &Bounds) -> Result<Certificate> {
    let mut cert = Certificate::new(spec);
    let report = check_hypotheses(spec, p)?;
    let failed = report.failed.clone();
    cert.hypotheses = Some(report);
    if !failed.is_empty() {
        cert.outcome = Outcome::HypothesisFailed { which: failed };
        return Ok(cert);
    }
    let (t, p_t) = build_suitable(spec, p)?;
    cert.trace.push(TraceStep::Suitable { places: t.clone() });
    let Some(mut state) = enter_state(spec, t, p_t, Vec::new(), bounds.admissible)? else {
        cert.outcome = Outcome::SearchExhausted {
            stage: "admissible".into(),
            bound: bounds.admissible,
        };
        return Ok(cert);
    };
    cert.trace.push(state.admissible_step());
    cert.trace.push(state.selmer_step(spec)?);
    let tau_hat = GElement::minus_d_p_j(spec);
    let mut added = 0;
    while state.r_hat.dim() > 1 {
        if added >= bounds.steps {
            cert.outcome = Outcome::SearchExhausted {
                stage: "steps".into(),
                bound: bounds.steps as u64,
            };
            return Ok(cert);
        }
        added += 1;
        let allow_witness = state.s_d.len() < MAX_SD_WITNESSES;
        match reduce_or_witness(spec, &state, bounds, allow_witness)? {
            StepResult::Reduced(next, step) => {
                state = *next;
                cert.trace.push(TraceStep::Reduction(step));
            }
            StepResult::Witnessed(next, w) => {
                state = *next;
                cert.trace.push(TraceStep::SdWitness(w));
            }
            StepResult::Exhausted(stage, bound) => {
                cert.outcome = Outcome::SearchExhausted {
                    stage: stage.into(),
                    bound,
                };
                return Ok(cert);
            }
        }
        cert.trace.push(state.admissible_step());
        cert.trace.push(state.selmer_step(spec)?);
    }
    if !state.r_hat.contains(&tau_hat)? {
        return Err(Error::Invariant(
            "terminal R^ does not contain [-d][p_J]".into(),
        ));
    }
    let t0 = state.adm.point.t0.clone();
    let fiber = spec.fiber(&t0)?;
    if bounds.height == 0 {
        cert.outcome = Outcome::DualSelmerMinimized {
            t: t0,
            a_a: fiber.a_a,
            b_b: fiber.b_b,
        };
        return Ok(cert);
    }
    // every admissible point over the final T has the minimal R̂, so the
    // fiber search may move to another one
    let (points, _) = find_admissible_points(
        spec,
        &state.p_t,
        &state.t,
        bounds.admissible,
        FIBER_ATTEMPTS,
    )?;
    let mut adms: Vec<AdmissiblePoint> = vec![state.adm.point.clone()];
    adms.extend(points.into_iter().map(|a| a.point).filter(|a| a.t0 != t0));
    for adm in adms {
        let r_hat = relative_selmer(spec, &state.p_t, &adm, true)?;
        if r_hat.dim() != 1 || !r_hat.contains(&tau_hat)? {
            return Err(Error::Invariant(
                "R^ changed between admissible points".into(),
            ));
        }
        let fiber = spec.fiber(&adm.t0)?;
        let found = solve_fiber(&fiber.a_a, &fiber.b_b, spec.s0(), bounds.height)?;
        cert.trace.push(TraceStep::FiberSearch {
            t: adm.t0.clone(),
            a_a: fiber.a_a.clone(),
            b_b: fiber.b_b.clone(),
            height: bounds.height,
            found: found.is_some(),
        });
        if let Some((x, y)) = found {
            cert.outcome = Outcome::PointFound {
                verified: verify_integral_point(spec, &x, &y, &adm.t0),
                x,
                y,
                t: adm.t0,
            };
            return Ok(cert);
        }
    }
    cert.outcome = Outcome::SearchExhausted {
        stage: "fiber_point".into(),
        bound: bounds.height,
    };
    Ok(cert)
}

/// [`descend`] from a possibly partial adelic point. A point covering
/// `S₀ ∪ S_bad` is used as given; otherwise the missing places are chosen
/// by [`complete_adelic_point`] within `radius`, and failing to complete
/// ends the search at stage `adelic_point` rather than failing a hypothesis.
pub fn descend_from(
    spec: &SurfaceSpec,
    given: &PartialAdelicPoint,
    radius: i64,
    bounds: &Bounds,
) -> Result<Certificate> {
    let s = spec.s(&[])?;
    if s.iter().all(|&v| given.get(v).is_some()) {
        return descend(spec, given, bounds);
    }
    match complete_adelic_point(spec, given, radius)? {
        Some(p) => descend(spec, &p, bounds),
        None => {
            let mut cert = Certificate::new(spec);
            cert.outcome = Outcome::SearchExhausted {
                stage: "adelic_point".into(),
                bound: radius.unsigned_abs(),
            };
            Ok(cert)
        }
    }
}

/// Offline re-verification: the spec hash matches, every check recorded in
/// the trace holds, and a found point lies on the surface with S₀-integral
/// coordinates.
pub fn verify_certificate(spec: &SurfaceSpec, cert: &Certificate) -> bool {
    if cert.spec_hash != spec_hash(spec) {
        return false;
    }
    let checks_hold = cert.trace.iter().all(|step| match step {
        TraceStep::Admissible { reciprocity, .. } => {
            reciprocity.iter().all(ReciprocityCertificate::holds)
        }
        TraceStep::Selmer { routes_agree, .. } => *routes_agree != Some(false),
        TraceStep::Reduction(r) => {
            r.dim_after < r.dim_before
                && r.minus_d_p_j_kept
                && r.x0_excluded
                && r.comparison_lemma
                && r.orthogonality
                && r.persistence
        }
        _ => true,
    });
    if !checks_hold {
        return false;
    }
    match &cert.outcome {
        Outcome::PointFound { x, y, t, verified } => {
            *verified && verify_integral_point(spec, x, y, t)
        }
        _ => true,
    }
}

/// One candidate local point and its contribution to the global conditions.
struct LocalCandidate {
    point: LocalPoint,
    brauer: u32,
    split: bool,
    /// Outside the hull of the roots at the real place; always set at
    /// finite places. Only such real points are reachable by large `t0`.
    unbounded: bool,
}

fn local_candidates(spec: &SurfaceSpec, v: Place, radius: i64) -> Result<Vec<LocalCandidate>> {
    let mut ts: Vec<Rational> = Vec::new();
    let int = |k: i64| Rational::from_integer(BigInt::from(k));
    match v.prime() {
        None => {
            let mut roots: Vec<Rational> = (0..spec.n()).map(|i| spec.root(i)).collect();
            roots.sort();
            roots.dedup();
            let (lo, hi) = (
                roots[0].floor() - int(1),
                roots[roots.len() - 1].ceil() + int(1),
            );
            ts.push(hi.clone());
            ts.push(lo.clone());
            ts.extend(roots.windows(2).map(|w| (&w[0] + &w[1]) / int(2)));
            ts.extend((0..radius).map(|k| &hi + int(k)));
            ts.extend((0..radius).map(|k| &lo - int(k)));
        }
        Some(p) => {
            ts.extend((-radius..=radius).map(int));
            if spec.in_s0(v) {
                for j in 1..=2u32 {
                    let q = BigInt::from(p).pow(j);
                    ts.extend(
                        (-radius..=radius).map(|k| Rational::new(BigInt::from(k), q.clone())),
                    );
                }
            } else {
                let top = (p.min(64) as i64).pow(3).min(4 * radius * radius);
                ts.extend((radius + 1..top).map(int));
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut out: Vec<LocalCandidate> = Vec::new();
    for t in ts {
        if !seen.insert(t.clone()) || d_p_j(spec, &t).is_zero() {
            continue;
        }
        let lp0 = LocalPoint {
            x: Rational::zero(),
            y: Rational::zero(),
            t: t.clone(),
            precision: 0,
        };
        let c = check_place(spec, v, &lp0)?;
        if !c.fiber_soluble || !c.valuation_ok {
            continue;
        }
        let mut brauer = 0u32;
        for i in 0..spec.n() {
            brauer |= u32::from(invariant(spec, i, &t, v)?) << i;
        }
        let unbounded = !v.is_real()
            || (0..spec.n()).all(|i| spec.root(i) <= t)
            || (0..spec.n()).all(|i| spec.root(i) >= t);
        if out
            .iter()
            .any(|o| o.brauer == brauer && o.split == c.split && o.unbounded == unbounded)
        {
            continue;
        }
        let fiber = spec.fiber(&t)?;
        let sol = local_solubility(&fiber.a_a, &fiber.b_b, v, model_at(spec, v))?;
        let w = sol.witness().expect("soluble");
        out.push(LocalCandidate {
            point: LocalPoint {
                x: w.x.clone(),
                y: w.y.clone(),
                t,
                precision: w.precision,
            },
            brauer,
            split: c.split,
            unbounded,
        });
    }
    Ok(out)
}

/// Picks one candidate per place with vanishing Brauer sums and a split
/// place, using the first path reaching each (Brauer mask, split) state.
fn combine(cands: &[Vec<LocalCandidate>], unbounded_only: bool) -> Option<Vec<usize>> {
    let mut states: BTreeMap<(u32, bool), Vec<usize>> = BTreeMap::from([((0, false), Vec::new())]);
    for cs in cands {
        let mut next: BTreeMap<(u32, bool), Vec<usize>> = BTreeMap::new();
        for ((mask, split), path) in &states {
            for (k, c) in cs.iter().enumerate() {
                if unbounded_only && !c.unbounded {
                    continue;
                }
                next.entry((mask ^ c.brauer, *split || c.split))
                    .or_insert_with(|| {
                        let mut p = path.clone();
                        p.push(k);
                        p
                    });
            }
        }
        states = next;
    }
    states.remove(&(0, true))
}

/// A point on `S₀ ∪ S_bad` satisfying the local conditions of the main
/// theorem: local points of the right model, the valuation bound, a split
/// place, and vanishing Brauer sums. Searches small `t_v` at each place and
/// combines them; `None` when no combination works. Real points outside
/// the hull of the roots are preferred, since admissible base points are
/// found among large `t0`.
pub fn default_adelic_point(spec: &SurfaceSpec, radius: i64) -> Result<Option<PartialAdelicPoint>> {
    complete_adelic_point(spec, &PartialAdelicPoint::new(), radius)
}

/// Like [`default_adelic_point`], keeping the supplied local points and
/// choosing only at the places of `S₀ ∪ S_bad` missing from `given`.
/// Supplied points are kept even when they violate a condition, so that
/// the hypothesis check reports them.
pub fn complete_adelic_point(
    spec: &SurfaceSpec,
    given: &PartialAdelicPoint,
    radius: i64,
) -> Result<Option<PartialAdelicPoint>> {
    let places = spec.s(&[])?;
    let mut cands: Vec<Vec<LocalCandidate>> = Vec::with_capacity(places.len());
    for &v in &places {
        match given.get(v) {
            Some(lp) => {
                let c = check_place(spec, v, lp)?;
                let mut brauer = 0u32;
                for i in 0..spec.n() {
                    brauer |= u32::from(invariant(spec, i, &lp.t, v)?) << i;
                }
                cands.push(vec![LocalCandidate {
                    point: lp.clone(),
                    brauer,
                    split: c.split,
                    unbounded: true,
                }]);
            }
            None => cands.push(local_candidates(spec, v, radius)?),
        }
    }
    let Some(path) = combine(&cands, true).or_else(|| combine(&cands, false)) else {
        return Ok(None);
    };
    let mut p = given.clone();
    for ((v, cs), k) in places.iter().zip(&cands).zip(path) {
        p.insert(*v, cs[k].point.clone());
    }
    Ok(Some(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::surface::{Linear, RawSpec};

    fn place(p: u128) -> Place {
        Place::finite(p).unwrap()
    }

    fn spec(s0: &[u128], a: i64, b: i64, factors: &[(i64, i64)], part_a: &[usize]) -> SurfaceSpec {
        SurfaceSpec::new(RawSpec {
            s0: std::iter::once(Place::Real)
                .chain(s0.iter().map(|&p| place(p)))
                .collect(),
            a: a.into(),
            b: b.into(),
            factors: factors.iter().map(|&(c, d)| Linear::new(c, d)).collect(),
            part_a: part_a.to_vec(),
        })
        .unwrap()
    }

    #[test]
    fn zigzag_order() {
        assert_eq!(
            (0..5).map(zigzag).collect::<Vec<_>>(),
            vec![0, 1, -1, 2, -2]
        );
    }

    #[test]
    fn failing_condition_d_is_reported() {
        // one factor with [a] and [b] both nontrivial violates (D)
        let s = spec(&[2], 3, 5, &[(1, 0)], &[1]);
        let report = check_condition_d(&s).unwrap();
        assert!(!report.holds);
        if let Some(p) = default_adelic_point(&s, 20).unwrap() {
            let cert = descend(&s, &p, &Bounds::default()).unwrap();
            match cert.outcome {
                Outcome::HypothesisFailed { which } => {
                    assert!(which.contains(&Hypothesis::ConditionD))
                }
                o => panic!("unexpected {o:?}"),
            }
        }
    }

    #[test]
    fn two_adic_valuation_failure() {
        // 2 ∉ S0, d = -1: val_2(d·p_J(t_2)) = 2 at t_2 = 4
        let s = spec(&[], 1, -1, &[(1, 0)], &[1]);
        let mut p = PartialAdelicPoint::new();
        p.insert(
            Place::Real,
            LocalPoint {
                x: int(1),
                y: int(0),
                t: int(1),
                precision: 0,
            },
        );
        p.insert(
            place(2),
            LocalPoint {
                x: int(1),
                y: int(0),
                t: int(4),
                precision: 10,
            },
        );
        let r = check_hypotheses(&s, &p).unwrap();
        assert!(r.failed.contains(&Hypothesis::ValuationBound));
    }

    #[test]
    fn missing_places_are_input_errors() {
        let s = spec(&[], 1, -1, &[(1, 0)], &[1]);
        let mut p = PartialAdelicPoint::new();
        p.insert(
            Place::Real,
            LocalPoint {
                x: int(1),
                y: int(0),
                t: int(1),
                precision: 0,
            },
        );
        assert!(matches!(
            check_hypotheses(&s, &p),
            Err(Error::MissingPlace(_))
        ));
    }

    #[test]
    fn progression_meets_approximations() {
        let s = spec(&[3], 6, -1, &[(1, -5), (3, 3)], &[2]);
        let p = default_adelic_point(&s, 20).unwrap().expect("adelic point");
        let t = s.s(&[]).unwrap();
        for extra in 0..3 {
            let g = progression(&s, &p, &t, extra).unwrap();
            for j in -3..3 {
                let t0 = Rational::new(&g.residue + &g.modulus * j, g.denominator.clone());
                if s.p_of(s.all(), &t0).is_zero() {
                    continue;
                }
                for &v in t.iter().filter(|v| !v.is_real()) {
                    for f in s.factors() {
                        assert_eq!(
                            LocalSquareClass::of_rational(&f.eval(&t0), v).unwrap(),
                            LocalSquareClass::of_rational(&f.eval(&p.get(v).unwrap().t), v)
                                .unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn admissible_points_carry_certificates() {
        let s = spec(&[3], 6, -1, &[(1, -5), (3, 3)], &[2]);
        let p = default_adelic_point(&s, 20).unwrap().expect("adelic point");
        let (t, p_t) = build_suitable(&s, &p).unwrap();
        let (found, _) = find_admissible_points(&s, &p_t, &t, 100_000, 2).unwrap();
        assert_eq!(found.len(), 2);
        for a in &found {
            assert!(a.reciprocity.iter().all(ReciprocityCertificate::holds));
            crate::selmer::check_admissible(&s, &p_t, &a.point).unwrap();
        }
        let r0 = relative_selmer(&s, &p_t, &found[0].point, true).unwrap();
        let r1 = relative_selmer(&s, &p_t, &found[1].point, true).unwrap();
        assert_eq!(r0.elements(), r1.elements());
    }

    #[test]
    fn nontrivial_point_is_found() {
        let s = spec(&[2, 3], -3, 6, &[(3, 0), (1, 4)], &[1]);
        let p = default_adelic_point(&s, 20).unwrap().expect("adelic point");
        let cert = descend(&s, &p, &Bounds::default()).unwrap();
        match &cert.outcome {
            Outcome::PointFound { x, y, t, verified } => {
                assert!(verified);
                assert!(verify_integral_point(&s, x, y, t));
            }
            o => panic!("unexpected {o:?}\n{}", cert.to_text()),
        }
        assert!(verify_certificate(&s, &cert));
        assert_eq!(Certificate::from_json(&cert.to_json()).unwrap(), cert);
    }

    #[test]
    fn reductions_shrink_dual_selmer() {
        let s = spec(&[3], 3, -5, &[(3, 4), (1, -1), (3, -6)], &[1, 2]);
        let p = default_adelic_point(&s, 20).unwrap().expect("adelic point");
        let bounds = Bounds {
            height: 0,
            ..Bounds::default()
        };
        let cert = descend(&s, &p, &bounds).unwrap();
        assert!(
            matches!(cert.outcome, Outcome::DualSelmerMinimized { .. }),
            "{}",
            cert.to_text()
        );
        let steps = cert.reductions();
        assert!(!steps.is_empty());
        for r in steps {
            assert!(r.dim_after < r.dim_before);
            assert!(r.minus_d_p_j_kept && r.x0_excluded);
            assert!(r.comparison_lemma && r.orthogonality && r.persistence);
            assert_eq!(r.legendre, [1, -1, -1]);
        }
        for step in &cert.trace {
            if let TraceStep::Selmer { routes_agree, .. } = step {
                assert_ne!(*routes_agree, Some(false));
            }
        }
    }
}
