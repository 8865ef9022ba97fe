//! Selmer and dual Selmer groups of the norm-one torus `x₀² − d·x₁² = 1`
//! over `ℤ_S`, and the relative groups `R`, `R̂ ⊆ J^T` of an admissible
//! fiber. Everything is linear algebra over F₂ on coordinates with respect
//! to the basis `−1, p (p ∈ S finite)` of `ℤ_S*/ℤ_S*²`.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{hilbert_symbol, split_power, valuation, LocalSquareClass, Place, SquareClass};
use crate::conditiond::GElement;
use crate::f2::{F2Matrix, F2Vec, Subspace};
use crate::surface::{AdmissiblePoint, FactorSet, PartialAdelicPoint, SurfaceSpec};
use crate::{Error, Rational, Result};

/// The torus `𝒯_d` together with its place set `S`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusData {
    d: SquareClass,
    s: Vec<Place>,
}

impl TorusData {
    pub fn new(d: &Rational, s: impl IntoIterator<Item = Place>) -> Result<Self> {
        Self::from_class(SquareClass::from_rational(d)?, s)
    }

    /// Requires `S ⊇ {real, 2} ∪ supp(d)`.
    pub fn from_class(d: SquareClass, s: impl IntoIterator<Item = Place>) -> Result<Self> {
        let s: Vec<Place> = s.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if !s.contains(&Place::Real) {
            return Err(Error::Precondition("S must contain the real place".into()));
        }
        if !s.iter().any(|v| v.is_two()) {
            return Err(Error::Precondition("S must contain 2".into()));
        }
        if let Some(p) = d
            .support()
            .iter()
            .find(|&&p| !s.iter().any(|v| v.prime() == Some(p)))
        {
            return Err(Error::Precondition(format!(
                "S must contain {p}, which divides d"
            )));
        }
        Ok(TorusData { d, s })
    }

    pub fn d(&self) -> &SquareClass {
        &self.d
    }

    pub fn s(&self) -> &[Place] {
        &self.s
    }

    pub fn finite_primes(&self) -> Vec<u128> {
        self.s.iter().filter_map(|v| v.prime()).collect()
    }

    /// `−1` followed by the finite primes of `S`.
    pub fn unit_basis(&self) -> Vec<SquareClass> {
        unit_basis(&self.finite_primes())
    }

    pub fn conditions(&self) -> Vec<WSpace> {
        self.s
            .iter()
            .map(|&v| WSpace::ramified(self.d.local(v)))
            .collect()
    }
}

fn unit_basis(primes: &[u128]) -> Vec<SquareClass> {
    std::iter::once(SquareClass::minus_one())
        .chain(primes.iter().map(|&p| SquareClass::prime(p)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WKind {
    /// `W^v = ⟨[δ]_v⟩`.
    Ramified,
    /// `W^v` = the unramified classes.
    Unit,
}

/// The local condition pair `W^v ⊇`-dual `W_v = (W^v)^⊥` at one place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WSpace {
    place: Place,
    kind: WKind,
    generator: LocalSquareClass,
}

fn is_unramified(x: &LocalSquareClass) -> bool {
    match x.place().prime() {
        None => x.is_trivial(),
        Some(2) => x.bits() & 0b011 == 0,
        Some(_) => x.bits() & 1 == 0,
    }
}

impl WSpace {
    pub fn ramified(generator: LocalSquareClass) -> Self {
        WSpace {
            place: generator.place(),
            kind: WKind::Ramified,
            generator,
        }
    }

    pub fn unit(place: Place) -> Result<Self> {
        if place.is_real() {
            return Err(Error::Precondition(
                "unit-kind condition at the real place".into(),
            ));
        }
        Ok(WSpace {
            place,
            kind: WKind::Unit,
            generator: LocalSquareClass::trivial(place),
        })
    }

    pub fn place(&self) -> Place {
        self.place
    }

    pub fn kind(&self) -> WKind {
        self.kind
    }

    /// `W^v`.
    pub fn upper(&self) -> Vec<LocalSquareClass> {
        match self.kind {
            WKind::Ramified => {
                let mut v = vec![LocalSquareClass::trivial(self.place)];
                if !self.generator.is_trivial() {
                    v.push(self.generator);
                }
                v
            }
            WKind::Unit => LocalSquareClass::all(self.place)
                .filter(is_unramified)
                .collect(),
        }
    }

    /// `W_v`, the Hilbert-orthogonal complement of `W^v`.
    pub fn lower(&self) -> Vec<LocalSquareClass> {
        let upper = self.upper();
        LocalSquareClass::all(self.place)
            .filter(|x| upper.iter().all(|w| x.pair(w) == 0))
            .collect()
    }

    pub fn in_upper(&self, x: &LocalSquareClass) -> bool {
        self.upper().contains(x)
    }

    pub fn in_lower(&self, x: &LocalSquareClass) -> bool {
        self.lower().contains(x)
    }
}

/// `{x : loc_v(x) ∈ W^v ∀v}` (dual) or `{x : loc_v(x) ∈ W_v ∀v}`, where
/// `images[k]` is the global class of the `k`-th coordinate vector. The
/// pairing is nondegenerate, so membership in either space is the vanishing
/// of the pairing against the other.
fn cut(images: &[SquareClass], conditions: &[WSpace], dual: bool) -> Subspace {
    let mut m = F2Matrix::new(images.len());
    for w in conditions {
        let locals: Vec<LocalSquareClass> = images.iter().map(|c| c.local(w.place)).collect();
        let functionals = if dual { w.lower() } else { w.upper() };
        for beta in functionals.iter().filter(|b| !b.is_trivial()) {
            m.push_row(F2Vec::from_bits(
                &locals.iter().map(|l| l.pair(beta) == 1).collect::<Vec<_>>(),
            ));
        }
    }
    Subspace::kernel_of(&m)
}

/// A subspace of `ℤ_S*/ℤ_S*²` in coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelmerSubspace {
    ambient_basis: Vec<SquareClass>,
    space: Subspace,
}

impl SelmerSubspace {
    pub fn ambient_basis(&self) -> &[SquareClass] {
        &self.ambient_basis
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn class_of(&self, v: &F2Vec) -> SquareClass {
        v.ones().fold(SquareClass::identity(), |acc, k| {
            acc.mul(&self.ambient_basis[k])
        })
    }

    pub fn coords(&self, x: &SquareClass) -> Result<F2Vec> {
        let mut v = F2Vec::zero(self.ambient_basis.len());
        v.set(0, x.is_negative());
        for &p in x.support() {
            let k = self
                .ambient_basis
                .iter()
                .position(|b| !b.is_negative() && b.support() == [p])
                .ok_or_else(|| Error::Precondition(format!("{x} is not an S-unit class")))?;
            v.set(k, true);
        }
        Ok(v)
    }

    pub fn contains(&self, x: &SquareClass) -> Result<bool> {
        Ok(self.space.contains(&self.coords(x)?))
    }

    pub fn basis(&self) -> Vec<SquareClass> {
        self.space
            .basis()
            .iter()
            .map(|b| self.class_of(b))
            .collect()
    }

    /// All members, in canonical order.
    pub fn elements(&self) -> Vec<SquareClass> {
        sorted_classes(self.space.elements().iter().map(|v| self.class_of(v)))
    }
}

fn sorted_classes(xs: impl IntoIterator<Item = SquareClass>) -> Vec<SquareClass> {
    let mut v: Vec<SquareClass> = xs.into_iter().collect();
    v.sort_by_key(|c| c.canonical_key());
    v.dedup();
    v
}

/// `Sel(𝒯, S) = {x : ⟨x, d⟩_v = 0 ∀ v ∈ S}`.
pub fn selmer_group(torus: &TorusData) -> SelmerSubspace {
    let basis = torus.unit_basis();
    let space = cut(&basis, &torus.conditions(), false);
    SelmerSubspace {
        ambient_basis: basis,
        space,
    }
}

/// `Sel(𝒯̂, S) = {x : [x]_v ∈ ⟨[d]_v⟩ ∀ v ∈ S}`.
pub fn dual_selmer_group(torus: &TorusData) -> SelmerSubspace {
    let basis = torus.unit_basis();
    let space = cut(&basis, &torus.conditions(), true);
    SelmerSubspace {
        ambient_basis: basis,
        space,
    }
}

fn all_unit_classes(torus: &TorusData) -> Vec<SquareClass> {
    let ps = torus.finite_primes();
    assert!(ps.len() < 24, "exhaustive enumeration too large");
    (0u64..1 << (ps.len() + 1))
        .map(|mask| {
            SquareClass::from_primes(
                mask & 1 == 1,
                ps.iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> (k + 1) & 1 == 1)
                    .map(|(_, p)| *p),
            )
        })
        .collect()
}

/// Exhaustive oracle for [`selmer_group`], through rational Hilbert symbols.
pub fn selmer_group_brute(torus: &TorusData) -> Vec<SquareClass> {
    let d = torus.d.to_rational();
    sorted_classes(all_unit_classes(torus).into_iter().filter(|x| {
        let x = x.to_rational();
        torus.s.iter().all(|&v| hilbert_symbol(&x, &d, v) == 0)
    }))
}

/// Exhaustive oracle for [`dual_selmer_group`]: `x` or `x·d` is a local
/// square at every place of `S`.
pub fn dual_selmer_group_brute(torus: &TorusData) -> Vec<SquareClass> {
    let d = torus.d.to_rational();
    sorted_classes(all_unit_classes(torus).into_iter().filter(|x| {
        let xr = x.to_rational();
        let xd = &xr * &d;
        torus.s.iter().all(|&v| {
            crate::arith::is_local_square(&xr, v) || crate::arith::is_local_square(&xd, v)
        })
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dim_selmer: usize,
    pub dim_dual: usize,
    /// Places of `S₀` where `d` is a square.
    pub split_s0: Vec<Place>,
    /// Places of `S` where `d` is a square; the difference of dimensions.
    pub split_s: Vec<Place>,
    /// Whether the gap also equals `|split_s0|`.
    pub s0_count_matches: bool,
}

/// `dim Sel − dim Sel^ = #{v ∈ S : d ∈ ℚ_v*²}`, asserted. Places of `S ∖ S₀`
/// can split too (for example 2 when `d ≡ 1 mod 8`), so the count over `S₀`
/// alone is reported separately.
pub fn dimension_identity(torus: &TorusData, s0: &[Place]) -> Result<DimensionReport> {
    if let Some(v) = s0.iter().find(|v| !torus.s.contains(v)) {
        return Err(Error::Precondition(format!("{v} is in S0 but not in S")));
    }
    let dim_selmer = selmer_group(torus).dim();
    let dim_dual = dual_selmer_group(torus).dim();
    let split_s: Vec<Place> = torus
        .s
        .iter()
        .copied()
        .filter(|&v| torus.d.local(v).is_trivial())
        .collect();
    let split_s0: Vec<Place> = split_s.iter().copied().filter(|v| s0.contains(v)).collect();
    if dim_selmer < dim_dual || dim_selmer - dim_dual != split_s.len() {
        return Err(Error::Invariant(format!(
            "dimension identity fails: {dim_selmer} - {dim_dual} != {}",
            split_s.len()
        )));
    }
    Ok(DimensionReport {
        dim_selmer,
        dim_dual,
        s0_count_matches: split_s0.len() == split_s.len(),
        split_s0,
        split_s,
    })
}

/// `[p_{J'}(t0)]` as a product of the classes of the single values, so
/// that only the factors `p_i(t0)` are ever factored.
pub fn values_class(spec: &SurfaceSpec, t0: &Rational, set: FactorSet) -> Result<SquareClass> {
    let mut out = SquareClass::from_i64(1)?;
    for i in set.indices() {
        let v = spec.factor(i).eval(t0);
        if v.is_zero() {
            return Err(Error::DegenerateFiber(crate::rational::render(t0)));
        }
        out = out.mul(&SquareClass::from_rational(&v)?);
    }
    Ok(out)
}

/// `ev_{t0}([c][p_{J'}]) = [c·p_{J'}(t0)]`.
pub fn ev(spec: &SurfaceSpec, t0: &Rational, x: &GElement) -> Result<SquareClass> {
    Ok(x.c.mul(&values_class(spec, t0, x.set)?))
}

/// `[−d·p_J(t0)]`.
fn delta_class(spec: &SurfaceSpec, t0: &Rational) -> Result<SquareClass> {
    Ok(GElement::minus_d_p_j(spec)
        .c
        .mul(&values_class(spec, t0, spec.all())?))
}

/// Coordinates on `J^T`: `−1`, the finite primes of `T`, then `[p_1], …, [p_n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JBasis {
    #[serde(with = "crate::rational::serde_u128_vec")]
    primes: Vec<u128>,
    n: usize,
}

impl JBasis {
    pub fn new(t: &[Place], n: usize) -> Self {
        JBasis {
            primes: t.iter().filter_map(|v| v.prime()).collect(),
            n,
        }
    }

    pub fn len(&self) -> usize {
        1 + self.primes.len() + self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn primes(&self) -> &[u128] {
        &self.primes
    }

    pub fn generators(&self) -> Vec<GElement> {
        let mut g: Vec<GElement> = unit_basis(&self.primes)
            .into_iter()
            .map(|c| GElement::new(c, FactorSet::EMPTY))
            .collect();
        g.extend(
            (0..self.n).map(|i| GElement::new(SquareClass::identity(), FactorSet::singleton(i))),
        );
        g
    }

    pub fn element(&self, v: &F2Vec) -> GElement {
        let m = self.primes.len();
        let c = SquareClass::from_primes(
            v.get(0),
            (0..m).filter(|&k| v.get(1 + k)).map(|k| self.primes[k]),
        );
        GElement::new(
            c,
            FactorSet::from_indices((0..self.n).filter(|&i| v.get(1 + m + i))),
        )
    }

    pub fn coords(&self, x: &GElement) -> Result<F2Vec> {
        let m = self.primes.len();
        let mut v = F2Vec::zero(self.len());
        v.set(0, x.c.is_negative());
        for &p in x.c.support() {
            let k = self.primes.iter().position(|&q| q == p).ok_or_else(|| {
                Error::Precondition(format!("{x} is not in J^T: {p} is outside T"))
            })?;
            v.set(1 + k, true);
        }
        for i in x.set.indices() {
            if i >= self.n {
                return Err(Error::Precondition(format!(
                    "{x} uses a factor index out of range"
                )));
            }
            v.set(1 + m + i, true);
        }
        Ok(v)
    }
}

/// `T₀ = S₀ ∪ {v ∈ T : val_v(d·p_J(t_v)) = 1}`, from the local data.
pub fn t0_places(spec: &SurfaceSpec, p_t: &PartialAdelicPoint, t: &[Place]) -> Result<Vec<Place>> {
    let d = Rational::from_integer(spec.d());
    let mut out = Vec::new();
    for &v in t {
        if spec.in_s0(v) {
            out.push(v);
            continue;
        }
        let tv = &p_t.require(v)?.t;
        let x = &d * spec.p_of(spec.all(), tv);
        if x.is_zero() {
            return Err(Error::DegenerateFiber(crate::rational::render(tv)));
        }
        if valuation(&x, v)? == 1 {
            out.push(v);
        }
    }
    Ok(out)
}

/// Checks the admissibility invariants of `adm` against `P_T`.
pub fn check_admissible(
    spec: &SurfaceSpec,
    p_t: &PartialAdelicPoint,
    adm: &AdmissiblePoint,
) -> Result<()> {
    let bad = |m: String| {
        Err(Error::Precondition(format!(
            "t0 = {} is not admissible: {m}",
            adm.t0
        )))
    };
    if !spec.is_s0_integral(&adm.t0) {
        return bad("not an S0-integer".into());
    }
    if adm.witnesses.len() != spec.n() {
        return bad("wrong number of witness places".into());
    }
    let t_primes: Vec<u128> = adm.t.iter().filter_map(|v| v.prime()).collect();
    let mut seen = BTreeSet::new();
    for (i, &u) in adm.witnesses.iter().enumerate() {
        if t_primes.contains(&u) || !seen.insert(u) {
            return bad(format!("witness {u} lies in T or repeats"));
        }
        let val = spec.factor(i).eval(&adm.t0);
        if val.is_zero() {
            return bad(format!("p_{}(t0) = 0", i + 1));
        }
        // strip T and u_i from numerator and denominator; a unit must remain
        for part in [val.numer().abs(), val.denom().clone()] {
            let mut rest = part;
            for &p in t_primes.iter().chain([u].iter()) {
                rest = split_power(&rest, p).1;
            }
            if !rest.is_one() {
                return bad(format!("p_{}(t0) is not a unit outside T ∪ {{{u}}}", i + 1));
            }
        }
        if valuation(&val, Place::certified(u))? != 1 {
            return bad(format!("val_{u}(p_{}(t0)) != 1", i + 1));
        }
        for &v in &adm.t {
            let tv = &p_t.require(v)?.t;
            let here = LocalSquareClass::of_rational(&val, v)?;
            let there = LocalSquareClass::of_rational(&spec.factor(i).eval(tv), v)?;
            if here != there {
                return bad(format!(
                    "[p_{}(t0)] and [p_{}(t_v)] differ at {v}",
                    i + 1,
                    i + 1
                ));
            }
        }
    }
    Ok(())
}

/// A relative Selmer group `R` or `R̂` inside `J^T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelativeSelmer {
    pub dual: bool,
    #[serde(with = "crate::rational::serde_rational")]
    pub t0: Rational,
    pub t: Vec<Place>,
    /// `T₀(t0)`, including the witnesses `u_i`.
    pub t0_places: Vec<Place>,
    pub basis: JBasis,
    pub space: Subspace,
}

impl RelativeSelmer {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn contains(&self, x: &GElement) -> Result<bool> {
        Ok(self.space.contains(&self.basis.coords(x)?))
    }

    pub fn basis_elements(&self) -> Vec<GElement> {
        self.space
            .basis()
            .iter()
            .map(|b| self.basis.element(b))
            .collect()
    }

    /// All members, in canonical order.
    pub fn elements(&self) -> Vec<GElement> {
        let mut v: Vec<GElement> = self
            .space
            .elements()
            .iter()
            .map(|x| self.basis.element(x))
            .collect();
        v.sort();
        v
    }
}

fn fiber_places(
    spec: &SurfaceSpec,
    p_t: &PartialAdelicPoint,
    adm: &AdmissiblePoint,
) -> Result<(Vec<Place>, Vec<Place>)> {
    let mut t0 = t0_places(spec, p_t, &adm.t)?;
    let mut all = adm.t.clone();
    for &u in &adm.witnesses {
        t0.push(Place::certified(u));
        all.push(Place::certified(u));
    }
    t0.sort();
    all.sort();
    Ok((t0, all))
}

/// `R̂` (when `dual`) or `R`, as the preimage under `ev_{t0}` of the
/// Selmer group of the fiber torus `−d·p_J(t0)` with conditions `⟨[−d p_J(t0)]⟩`
/// at `T₀(t0)` and the unramified classes at `T ∖ T₀(t0)`.
pub fn relative_selmer(
    spec: &SurfaceSpec,
    p_t: &PartialAdelicPoint,
    adm: &AdmissiblePoint,
    dual: bool,
) -> Result<RelativeSelmer> {
    check_admissible(spec, p_t, adm)?;
    let (t0_set, all) = fiber_places(spec, p_t, adm)?;
    let delta = delta_class(spec, &adm.t0)?;
    let basis = JBasis::new(&adm.t, spec.n());
    let images: Vec<SquareClass> = basis
        .generators()
        .iter()
        .map(|g| ev(spec, &adm.t0, g))
        .collect::<Result<_>>()?;
    let conditions: Vec<WSpace> = all
        .iter()
        .map(|&v| {
            if t0_set.contains(&v) {
                Ok(WSpace::ramified(delta.local(v)))
            } else {
                WSpace::unit(v)
            }
        })
        .collect::<Result<_>>()?;
    Ok(RelativeSelmer {
        dual,
        t0: adm.t0.clone(),
        t: adm.t.clone(),
        t0_places: t0_set,
        space: cut(&images, &conditions, dual),
        basis,
    })
}

/// `−d·p_J(t)`, the parameter of the fiber torus.
pub fn fiber_parameter(spec: &SurfaceSpec, t: &Rational) -> Result<Rational> {
    let v = -Rational::from_integer(spec.d()) * spec.p_of(spec.all(), t);
    if v.is_zero() {
        return Err(Error::DegenerateFiber(crate::rational::render(t)));
    }
    Ok(v)
}

/// The same group by enumeration: the conditions at `v ∈ T` use the local
/// data `t_v` of `P_T`, and those at each `u_i` are the Hilbert-symbol
/// tests `⟨p_i(t0), ev(x)⟩ = 0` for `i ∉ J'` and `⟨p_i(t0), ev(x·τ)⟩ = 0`
/// for `i ∈ J'`, with the twist `τ = [−d][p_J]` (dual) or `[d][p_J]`.
pub fn relative_selmer_by_lemma(
    spec: &SurfaceSpec,
    p_t: &PartialAdelicPoint,
    adm: &AdmissiblePoint,
    dual: bool,
) -> Result<Vec<GElement>> {
    check_admissible(spec, p_t, adm)?;
    let t0_set = t0_places(spec, p_t, &adm.t)?;
    let basis = JBasis::new(&adm.t, spec.n());
    if basis.len() > 22 {
        return Err(Error::Precondition("J^T too large to enumerate".into()));
    }
    let twist = if dual {
        GElement::minus_d_p_j(spec)
    } else {
        GElement::d_p_j(spec)
    };
    let d = Rational::from_integer(spec.d());
    // per place of T: local classes of p_i(t_v) and of −d·p_J(t_v)
    let mut local = Vec::new();
    for &v in &adm.t {
        let tv = &p_t.require(v)?.t;
        let ps: Vec<LocalSquareClass> = spec
            .factors()
            .iter()
            .map(|f| LocalSquareClass::of_rational(&f.eval(tv), v))
            .collect::<Result<_>>()?;
        let w = if t0_set.contains(&v) {
            let delta = -&d * spec.p_of(spec.all(), tv);
            WSpace::ramified(LocalSquareClass::of_rational(&delta, v)?)
        } else {
            WSpace::unit(v)?
        };
        local.push((v, ps, w));
    }
    let p_at_t0: Vec<Rational> = spec.factors().iter().map(|f| f.eval(&adm.t0)).collect();
    let mut out = Vec::new();
    for mask in 0u64..1 << basis.len() {
        let x = basis.element(&F2Vec::from_mask(basis.len(), mask));
        let at_t = local.iter().all(|(v, ps, w)| {
            let alpha = x
                .set
                .indices()
                .fold(x.c.local(*v), |acc, i| acc.add(&ps[i]));
            if dual {
                w.in_upper(&alpha)
            } else {
                w.in_lower(&alpha)
            }
        });
        if !at_t {
            continue;
        }
        let mut ok = true;
        for (i, &u) in adm.witnesses.iter().enumerate() {
            let y = if x.set.contains(i) {
                x.mul(&twist)
            } else {
                x.clone()
            };
            let e = ev(spec, &adm.t0, &y)?.to_rational();
            if hilbert_symbol(&p_at_t0[i], &e, Place::certified(u)) != 0 {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(x);
        }
    }
    out.sort();
    Ok(out)
}

/// Rank of `ev_{t0}` on `J^T`, measured in `I_{T(t0)}`.
pub fn ev_rank(spec: &SurfaceSpec, adm: &AdmissiblePoint) -> Result<usize> {
    let basis = JBasis::new(&adm.t, spec.n());
    let mut target: Vec<Place> = adm.t.clone();
    target.extend(adm.witnesses.iter().map(|&u| Place::certified(u)));
    target.sort();
    let target_basis = SelmerSubspace {
        ambient_basis: unit_basis(&target.iter().filter_map(|v| v.prime()).collect::<Vec<_>>()),
        space: Subspace::zero(0),
    };
    let rows: Vec<F2Vec> = basis
        .generators()
        .iter()
        .map(|g| target_basis.coords(&ev(spec, &adm.t0, g)?))
        .collect::<Result<_>>()?;
    Ok(F2Matrix::from_rows(target_basis.ambient_basis.len(), rows).rank())
}

/// Places of `T₀(t0)` where `−d·p_J(t0)` is a square: the predicted gap
/// `dim R − dim R̂`.
pub fn fiber_split_places(spec: &SurfaceSpec, rel: &RelativeSelmer) -> Result<Vec<Place>> {
    let delta = delta_class(spec, &rel.t0)?;
    Ok(rel
        .t0_places
        .iter()
        .copied()
        .filter(|&v| delta.local(v).is_trivial())
        .collect())
}
