//! Local solubility of fibers `a'·x² + b'·y² = 1` and global point search.

use num_bigint::BigInt;
use num_integer::Integer;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{
    hensel_solve, hilbert_symbol, lift_seed, sqrt_mod, valuation, HenselOutcome, HenselWitness,
    LocalSquareClass, Place, Poly2,
};
use crate::rational::render;
use crate::surface::SurfaceSpec;
use crate::{Error, Rational, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Points over ℤ_v.
    Integral,
    /// Points over ℚ_v.
    Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalWitness {
    #[serde(with = "crate::rational::serde_rational")]
    pub x: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub y: Rational,
    /// `v`-adic precision of `(x, y)`; zero at the real place.
    pub precision: u32,
    pub hensel: Option<HenselWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Insolubility {
    /// Both coefficients negative at the real place.
    NegativeDefinite,
    /// `⟨a', b'⟩_v = 1`.
    HilbertSymbol,
    /// `x² ≡ 1/u` has no solution mod `v` for the unit coefficient `u`.
    NonResidue {
        #[serde(with = "crate::rational::serde_rational")]
        unit: Rational,
    },
    /// Both coefficients divisible by `v`, so the left side is `≡ 0`.
    BothDivisible,
    /// No residue mod `v^depth` satisfies the equation.
    ResidueExclusion { depth: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LocalSolubility {
    Soluble(LocalWitness),
    Insoluble(Insolubility),
    Inconclusive { precision: u32 },
}

impl LocalSolubility {
    pub fn is_soluble(&self) -> bool {
        matches!(self, LocalSolubility::Soluble(_))
    }

    pub fn is_insoluble(&self) -> bool {
        matches!(self, LocalSolubility::Insoluble(_))
    }

    pub fn witness(&self) -> Option<&LocalWitness> {
        match self {
            LocalSolubility::Soluble(w) => Some(w),
            _ => None,
        }
    }
}

/// Default residue depth for the integral model.
pub fn default_precision(a: &Rational, b: &Rational, p: u128) -> u32 {
    let place = Place::certified(p);
    let m = [a, b]
        .iter()
        .map(|x| valuation(x, place).unwrap().unsigned_abs() as u32)
        .max()
        .unwrap();
    2 * m + if p == 2 { 7 } else { 3 }
}

/// Rational approximation of `1/√q` for `q > 0` with 30 decimal digits.
fn inv_sqrt_approx(q: &Rational) -> Rational {
    let scale = BigInt::from(10).pow(30);
    let num = q.denom() * &scale * &scale;
    let root = (num / q.numer()).sqrt();
    Rational::new(root, scale)
}

fn solve_real(a: &Rational, b: &Rational) -> LocalSolubility {
    let witness = |x: Rational, y: Rational| {
        LocalSolubility::Soluble(LocalWitness {
            x,
            y,
            precision: 0,
            hensel: None,
        })
    };
    if a.is_positive() {
        witness(inv_sqrt_approx(a), Rational::zero())
    } else if b.is_positive() {
        witness(Rational::zero(), inv_sqrt_approx(b))
    } else {
        LocalSolubility::Insoluble(Insolubility::NegativeDefinite)
    }
}

fn from_hensel(w: HenselWitness, shift: u32, p: u128) -> LocalWitness {
    let scale = BigInt::from(p).pow(shift);
    LocalWitness {
        x: Rational::new(w.x.clone(), scale.clone()),
        y: Rational::new(w.y.clone(), scale),
        precision: w.precision.saturating_sub(shift),
        hensel: Some(w),
    }
}

/// Integral points for odd `p` with p-integral coefficients, decided by
/// the reduction mod `p` and certified by one Hensel lift.
fn solve_integral_odd(
    a: &Rational,
    b: &Rational,
    p: u128,
    precision: u32,
) -> Result<LocalSolubility> {
    let place = Place::certified(p);
    let (alpha, beta) = (valuation(a, place)?, valuation(b, place)?);
    let f = Poly2::diagonal_conic(a, b);
    let pb = BigInt::from(p);
    let res = |x: &Rational| crate::rational::reduce_mod(x, &pb).expect("p-integral");
    let lifted = |x: BigInt, y: BigInt| -> Result<LocalSolubility> {
        match lift_seed(&f, p, &x, &y, precision)? {
            Some(w) => Ok(LocalSolubility::Soluble(from_hensel(w, 0, p))),
            None => Err(Error::Invariant("smooth seed failed to lift".into())),
        }
    };
    match (alpha > 0, beta > 0) {
        (true, true) => Ok(LocalSolubility::Insoluble(Insolubility::BothDivisible)),
        (false, true) | (true, false) => {
            let (u, swap) = if alpha == 0 { (a, false) } else { (b, true) };
            let inv = crate::rational::mod_inverse(&res(u), &pb).expect("unit");
            match sqrt_mod(&inv, p) {
                None => Ok(LocalSolubility::Insoluble(Insolubility::NonResidue {
                    unit: u.clone(),
                })),
                Some(r) => {
                    if swap {
                        lifted(BigInt::zero(), r)
                    } else {
                        lifted(r, BigInt::zero())
                    }
                }
            }
        }
        (false, false) => {
            // smooth conic mod p: some x makes (1 - a x²)/b a square
            let (ar, br) = (res(a), res(b));
            let binv = crate::rational::mod_inverse(&br, &pb).expect("unit");
            for x in 0..p {
                let x = BigInt::from(x);
                let rhs = ((BigInt::one() - &ar * &x * &x) * &binv).mod_floor(&pb);
                if let Some(y) = sqrt_mod(&rhs, p) {
                    if !y.is_zero() || !x.is_zero() {
                        return lifted(x, y);
                    }
                }
            }
            Err(Error::Invariant("smooth conic without points mod p".into()))
        }
    }
}

/// Solubility of `a'·x² + b'·y² = 1` at `v` in the given model.
///
/// The rational model is decided by `⟨a', b'⟩_v`: a soluble projective conic
/// over ℚ_v is a projective line, so it has points off the line at infinity.
/// The integral model is decided by residue analysis with Hensel lifting.
pub fn local_solubility(
    a: &Rational,
    b: &Rational,
    v: Place,
    model: Model,
) -> Result<LocalSolubility> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::Zero("fiber coefficient"));
    }
    let Some(p) = v.prime() else {
        return Ok(solve_real(a, b));
    };
    match model {
        Model::Integral => {
            let precision = default_precision(a, b, p);
            let place = Place::certified(p);
            let integral = valuation(a, place)? >= 0 && valuation(b, place)? >= 0;
            if p != 2 && integral {
                return solve_integral_odd(a, b, p, precision);
            }
            generic_integral(a, b, p, precision, 0)
        }
        Model::Rational => {
            if hilbert_symbol(a, b, v) == 1 {
                return Ok(LocalSolubility::Insoluble(Insolubility::HilbertSymbol));
            }
            // remove even powers of p so both valuations lie in {0, 1}
            let (ka, kb) = (
                valuation(a, v)?.div_euclid(2),
                valuation(b, v)?.div_euclid(2),
            );
            if ka != 0 || kb != 0 {
                let pk = |k: i64| Rational::from_integer(BigInt::from(p)).pow(k as i32);
                let (a2, b2) = (a / pk(2 * ka), b / pk(2 * kb));
                return Ok(match local_solubility(&a2, &b2, v, Model::Rational)? {
                    LocalSolubility::Soluble(w) => LocalSolubility::Soluble(LocalWitness {
                        x: w.x / pk(ka),
                        y: w.y / pk(kb),
                        precision: w.precision,
                        hensel: None,
                    }),
                    other => other,
                });
            }
            // x = X/p^e, y = Y/p^e: a'X² + b'Y² = p^{2e}
            let precision = default_precision(a, b, p);
            for e in 0..=precision {
                let s = Rational::from_integer(BigInt::from(p).pow(2 * e));
                let (ae, be) = (a / &s, b / &s);
                let place = Place::certified(p);
                if valuation(&ae, place)? >= 0 && valuation(&be, place)? >= 0 && p != 2 {
                    if let LocalSolubility::Soluble(w) =
                        solve_integral_odd(&ae, &be, p, precision + e)?
                    {
                        return Ok(LocalSolubility::Soluble(rescale(w, e, p)));
                    }
                    continue;
                }
                if let LocalSolubility::Soluble(w) =
                    generic_integral(&ae, &be, p, precision + e, 0)?
                {
                    return Ok(LocalSolubility::Soluble(rescale(w, e, p)));
                }
            }
            Err(Error::Invariant(format!(
                "no Q_{p} point found on a conic with trivial Hilbert symbol"
            )))
        }
    }
}

fn rescale(w: LocalWitness, e: u32, p: u128) -> LocalWitness {
    let s = Rational::from_integer(BigInt::from(p).pow(e));
    LocalWitness {
        x: w.x / &s,
        y: w.y / &s,
        precision: w.precision.saturating_sub(e),
        hensel: w.hensel,
    }
}

/// Exhaustive residue search: the equation multiplied through by a power
/// of `p` so that its coefficients are integral, which leaves its roots
/// unchanged.
fn generic_integral(
    a: &Rational,
    b: &Rational,
    p: u128,
    precision: u32,
    shift: u32,
) -> Result<LocalSolubility> {
    let place = Place::certified(p);
    let k = -[valuation(a, place)?, valuation(b, place)?, 0]
        .into_iter()
        .min()
        .unwrap();
    let s = Rational::from_integer(BigInt::from(p).pow(k as u32));
    let f = Poly2::new([(a * &s, 2, 0), (b * &s, 0, 2), (-s.clone(), 0, 0)]);
    Ok(match hensel_solve(&f, p, precision)? {
        HenselOutcome::Witness(w) => LocalSolubility::Soluble(from_hensel(w, shift, p)),
        HenselOutcome::CertifiedNone { depth } => {
            LocalSolubility::Insoluble(Insolubility::ResidueExclusion { depth })
        }
        HenselOutcome::Inconclusive { precision, .. } => {
            LocalSolubility::Inconclusive { precision }
        }
    })
}

/// Exhaustive residue search without the closed form, for cross-checks.
pub fn local_solubility_by_enumeration(
    a: &Rational,
    b: &Rational,
    p: u128,
) -> Result<LocalSolubility> {
    generic_integral(a, b, p, default_precision(a, b, p), 0)
}

/// The good-place criterion: for `v ∉ S₀ ∪ S_bad`, `t_v ∈ ℤ_v` and
/// `v(p_i(t_v)) > 0`, the fiber has a ℤ_v-point iff `left_i` of `𝒜_i`
/// (a `v`-unit) is a square at `v`.
pub fn good_place_solubility(
    spec: &SurfaceSpec,
    i: usize,
    t_v: &Rational,
    v: Place,
) -> Result<bool> {
    if v.is_real() || spec.in_s0(v) || spec.s_bad()?.contains(&v) {
        return Err(Error::Precondition(format!("{v} is not a good place")));
    }
    if valuation(t_v, v)? < 0 && !t_v.is_zero() {
        return Err(Error::Precondition(format!(
            "t_v = {} is not {v}-integral",
            render(t_v)
        )));
    }
    let pi = spec.factor(i).eval(t_v);
    if !pi.is_zero() && valuation(&pi, v)? <= 0 {
        return Err(Error::Precondition(format!(
            "p_{}(t_v) is a {v}-unit",
            i + 1
        )));
    }
    let left = crate::brauer::brauer_generator(spec, i)?.left;
    Ok(LocalSquareClass::of_rational(&left, v)?.is_trivial())
}

/// First solution of `a'·x² + b'·y² = 1` with `x = m/u`, `y = n/u`, `u` a
/// product of finite S₀-primes, `0 ≤ m, n ≤ bound`, `u ≤ bound`, ordered by
/// `(u, m, n)`.
pub fn solve_global(
    a: &Rational,
    b: &Rational,
    s0: &[Place],
    bound: u64,
) -> Result<Option<(Rational, Rational)>> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::Zero("fiber coefficient"));
    }
    let primes: Vec<u128> = s0.iter().filter_map(|v| v.prime()).collect();
    for u in smooth_numbers(&primes, bound) {
        let u2 = Rational::from_integer(BigInt::from(u) * BigInt::from(u));
        for m in 0..=bound {
            let mb = Rational::from_integer(BigInt::from(m));
            let rest = (&u2 - a * &mb * &mb) / b;
            if rest.is_negative() || !rest.is_integer() {
                continue;
            }
            let n2 = rest.to_integer();
            let n = n2.sqrt();
            if &n * &n == n2 && n <= BigInt::from(bound) {
                let ur = Rational::from_integer(BigInt::from(u));
                return Ok(Some((mb / &ur, Rational::from_integer(n) / ur)));
            }
        }
    }
    Ok(None)
}

/// Integers in `[1, bound]` whose prime factors lie in `primes`, ascending.
pub fn smooth_numbers(primes: &[u128], bound: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for &p in primes {
        let Some(p) = p.to_u64() else { continue };
        let mut extra = Vec::new();
        for &n in &out {
            let mut m = n;
            while let Some(next) = m.checked_mul(p).filter(|&x| x <= bound) {
                extra.push(next);
                m = next;
            }
        }
        out.extend(extra);
    }
    out.sort_unstable();
    out
}

/// Integer solutions of `a'x² + b'y² = 1` with `a'`, `b'` integers of
/// opposite signs, from the convergents of `√(B/A)` where `A·X² − B·Y² = 1`.
/// Every such solution has `|X/Y − √(B/A)| < 1/(2Y²)`, so it is a
/// convergent. Returns the first one among `max_terms` convergents.
pub fn pell_solve(a: &Rational, b: &Rational, max_terms: usize) -> Option<(Rational, Rational)> {
    if !a.is_integer() || !b.is_integer() {
        return None;
    }
    let (a, b) = (a.to_integer(), b.to_integer());
    let swap = a.is_negative();
    let (big_a, big_b) = if swap {
        (b.clone(), -a.clone())
    } else {
        (a.clone(), -b.clone())
    };
    if !big_a.is_positive() || !big_b.is_positive() {
        return None;
    }
    let finish = |x: BigInt, y: BigInt| {
        let (x, y) = if swap { (y, x) } else { (x, y) };
        Some((Rational::from_integer(x), Rational::from_integer(y)))
    };
    if big_a.is_one() {
        return finish(BigInt::one(), BigInt::zero());
    }
    // √(B/A) = (0 + √(AB)) / A
    let disc = &big_a * &big_b;
    let root = disc.sqrt();
    if &root * &root == disc {
        // rational ratio: finitely many solutions, leave to brute force
        return None;
    }
    let (mut pp, mut qq) = (BigInt::zero(), big_a.clone());
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    for _ in 0..max_terms {
        let term = (&pp + &root).div_floor(&qq);
        let h_next = &term * &h + &h_prev;
        let k_next = &term * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        if &big_a * &h * &h - &big_b * &k * &k == BigInt::one() {
            return finish(h, k);
        }
        pp = &term * &qq - &pp;
        qq = (&disc - &pp * &pp) / &qq;
    }
    None
}

/// A point on the fiber: the Pell fast path first, then bounded search.
pub fn solve_fiber(
    a: &Rational,
    b: &Rational,
    s0: &[Place],
    bound: u64,
) -> Result<Option<(Rational, Rational)>> {
    if let Some(pt) = pell_solve(a, b, 4000) {
        return Ok(Some(pt));
    }
    solve_global(a, b, s0, bound)
}

/// `evaluate_point = 0` and `x`, `y`, `t` are S₀-integers.
pub fn verify_integral_point(spec: &SurfaceSpec, x: &Rational, y: &Rational, t: &Rational) -> bool {
    spec.evaluate_point(x, y, t).is_zero() && [x, y, t].iter().all(|z| spec.is_s0_integral(z))
}
