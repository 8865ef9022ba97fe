//! Residue search and Hensel lifting for one polynomial in at most two
//! variables over ℤ_p.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::valuation::split_power;
use crate::rational::{mod_inverse, reduce_mod};
use crate::{Error, Rational, Result};

/// Nodes explored before the residue search gives up as inconclusive.
const NODE_LIMIT: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    Y,
}

/// `Σ c·xⁱ·yʲ` with rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    terms: Vec<(Rational, u32, u32)>,
}

impl Poly2 {
    pub fn new(terms: impl IntoIterator<Item = (Rational, u32, u32)>) -> Self {
        Poly2 {
            terms: terms.into_iter().filter(|(c, _, _)| !c.is_zero()).collect(),
        }
    }

    /// `Σ coeffs[k]·xᵏ`.
    pub fn univariate(coeffs: &[Rational]) -> Self {
        Self::new(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (c.clone(), k as u32, 0)),
        )
    }

    /// `a·x² + b·y² − 1`.
    pub fn diagonal_conic(a: &Rational, b: &Rational) -> Self {
        Self::new([
            (a.clone(), 2, 0),
            (b.clone(), 0, 2),
            (-Rational::one(), 0, 0),
        ])
    }

    pub fn uses_y(&self) -> bool {
        self.terms.iter().any(|(_, _, j)| *j > 0)
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, (c, i, j)| {
            acc + c
                * num_traits::pow(x.clone(), *i as usize)
                * num_traits::pow(y.clone(), *j as usize)
        })
    }

    /// Scales by the lcm of the denominators. Fails unless that lcm is a
    /// p-adic unit, so the scaled polynomial has the same ℤ_p-roots.
    fn integral_at(&self, p: u128) -> Result<IntPoly> {
        let lcm = self
            .terms
            .iter()
            .fold(BigInt::one(), |acc, (c, _, _)| acc.lcm(c.denom()));
        if (&lcm % BigInt::from(p)).is_zero() {
            return Err(Error::Precondition(format!(
                "polynomial coefficients are not {p}-integral"
            )));
        }
        Ok(IntPoly {
            terms: self
                .terms
                .iter()
                .map(|(c, i, j)| ((c * &lcm).to_integer(), *i, *j))
                .collect(),
        })
    }
}

struct IntPoly {
    terms: Vec<(BigInt, u32, u32)>,
}

impl IntPoly {
    fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        self.terms.iter().fold(BigInt::zero(), |acc, (c, i, j)| {
            acc + c * x.pow(*i) * y.pow(*j)
        })
    }

    fn derivative(&self, var: Var) -> IntPoly {
        IntPoly {
            terms: self
                .terms
                .iter()
                .filter_map(|(c, i, j)| match var {
                    Var::X if *i > 0 => Some((c * BigInt::from(*i), i - 1, *j)),
                    Var::Y if *j > 0 => Some((c * BigInt::from(*j), *i, j - 1)),
                    _ => None,
                })
                .collect(),
        }
    }
}

/// A residue `(x, y) mod p^precision` with `f(x, y) ≡ 0`, certified to lift
/// to a ℤ_p-point by Hensel's lemma: the partial derivative in
/// `lifted_variable` has valuation `derivative_valuation = m` at the
/// approximate root found at depth `found_at`, where `v(f) ≥ 2m + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HenselWitness {
    #[serde(with = "crate::rational::serde_bigint")]
    pub x: BigInt,
    #[serde(with = "crate::rational::serde_bigint")]
    pub y: BigInt,
    pub precision: u32,
    pub lifted_variable: Var,
    pub derivative_valuation: u32,
    pub found_at: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HenselOutcome {
    Witness(HenselWitness),
    /// No residue mod `p^depth` satisfies `f ≡ 0`, so no ℤ_p-point exists.
    CertifiedNone {
        depth: u32,
    },
    /// Residues survive to the requested precision but none is smooth
    /// enough to certify a lift.
    Inconclusive {
        precision: u32,
        survivors: usize,
    },
}

impl HenselOutcome {
    pub fn witness(&self) -> Option<&HenselWitness> {
        match self {
            HenselOutcome::Witness(w) => Some(w),
            _ => None,
        }
    }
}

fn val_capped(n: &BigInt, p: u128, cap: u32) -> u32 {
    if n.is_zero() {
        cap
    } else {
        (split_power(n, p).0 as u32).min(cap)
    }
}

/// Searches ℤ_p-points of `f = 0` by a breadth-first residue tree of depth
/// `precision`, children in increasing residue order.
pub fn hensel_solve(f: &Poly2, p: u128, precision: u32) -> Result<HenselOutcome> {
    if precision == 0 {
        return Err(Error::Precondition(
            "Hensel precision must be positive".into(),
        ));
    }
    let g = f.integral_at(p)?;
    if g.terms.is_empty() {
        // the zero polynomial vanishes everywhere
        return Ok(HenselOutcome::Witness(HenselWitness {
            x: BigInt::zero(),
            y: BigInt::zero(),
            precision,
            lifted_variable: Var::X,
            derivative_valuation: 0,
            found_at: 0,
        }));
    }
    let two_vars = f.uses_y();
    let gx = g.derivative(Var::X);
    let gy = g.derivative(Var::Y);
    let big_p = BigInt::from(p);
    let cap = 4 * precision + 8;

    let mut level: Vec<(BigInt, BigInt)> = vec![(BigInt::zero(), BigInt::zero())];
    let mut modulus = BigInt::one();
    for depth in 1..=precision {
        let mut next = Vec::new();
        for (x0, y0) in &level {
            for a in 0..p {
                let x = x0 + &modulus * BigInt::from(a);
                let ys: Box<dyn Iterator<Item = BigInt>> = if two_vars {
                    let (y0, m) = (y0.clone(), modulus.clone());
                    Box::new((0..p).map(move |b| &y0 + &m * BigInt::from(b)))
                } else {
                    Box::new(std::iter::once(BigInt::zero()))
                };
                for y in ys {
                    let fv = val_capped(&g.eval(&x, &y), p, cap);
                    if fv < depth {
                        continue;
                    }
                    let mx = val_capped(&gx.eval(&x, &y), p, cap);
                    let my = if two_vars {
                        val_capped(&gy.eval(&x, &y), p, cap)
                    } else {
                        cap
                    };
                    let (var, m) = if my < mx { (Var::Y, my) } else { (Var::X, mx) };
                    if m < cap && fv > 2 * m {
                        return lift(&g, p, x, y, var, m, depth, precision)
                            .map(HenselOutcome::Witness);
                    }
                    next.push((x.clone(), y));
                    if next.len() > NODE_LIMIT {
                        return Ok(HenselOutcome::Inconclusive {
                            precision: depth,
                            survivors: next.len(),
                        });
                    }
                }
            }
        }
        if next.is_empty() {
            return Ok(HenselOutcome::CertifiedNone { depth });
        }
        level = next;
        modulus *= &big_p;
    }
    Ok(HenselOutcome::Inconclusive {
        precision,
        survivors: level.len(),
    })
}

/// Newton iteration in `var` until `f ≡ 0 mod p^precision`.
#[allow(clippy::too_many_arguments)]
fn lift(
    g: &IntPoly,
    p: u128,
    mut x: BigInt,
    mut y: BigInt,
    var: Var,
    m: u32,
    found_at: u32,
    precision: u32,
) -> Result<HenselWitness> {
    let dg = g.derivative(var);
    let work = BigInt::from(p).pow(precision + 2 * m + 2);
    loop {
        let fv = g.eval(&x, &y);
        if fv.is_zero() || split_power(&fv, p).0 >= u64::from(precision + m) {
            break;
        }
        let dv = dg.eval(&x, &y);
        let (k, unit) = split_power(&dv, p);
        if k != u64::from(m) {
            return Err(Error::Invariant("Hensel derivative valuation moved".into()));
        }
        let pm = BigInt::from(p).pow(m);
        let inv = mod_inverse(&unit, &work)
            .ok_or_else(|| Error::Invariant("unit part not invertible".into()))?;
        let step = (fv / &pm * inv).mod_floor(&work);
        match var {
            Var::X => x = (&x - step).mod_floor(&work),
            Var::Y => y = (&y - step).mod_floor(&work),
        }
    }
    let modulus = BigInt::from(p).pow(precision);
    Ok(HenselWitness {
        x: x.mod_floor(&modulus),
        y: y.mod_floor(&modulus),
        precision,
        lifted_variable: var,
        derivative_valuation: m,
        found_at,
    })
}

/// Certifies the seed `(x, y)` by the Hensel criterion and lifts it to a
/// root mod `p^precision`. Returns `None` when the seed is not smooth
/// enough.
pub fn lift_seed(
    f: &Poly2,
    p: u128,
    x: &BigInt,
    y: &BigInt,
    precision: u32,
) -> Result<Option<HenselWitness>> {
    let g = f.integral_at(p)?;
    let cap = 4 * precision + 8;
    let fv = val_capped(&g.eval(x, y), p, cap);
    let mx = val_capped(&g.derivative(Var::X).eval(x, y), p, cap);
    let my = val_capped(&g.derivative(Var::Y).eval(x, y), p, cap);
    let (var, m) = if my < mx { (Var::Y, my) } else { (Var::X, mx) };
    if m >= cap || fv <= 2 * m {
        return Ok(None);
    }
    lift(&g, p, x.clone(), y.clone(), var, m, 0, precision).map(Some)
}

/// Checks `f(x, y) ≡ 0 mod p^k` for a p-integral polynomial.
pub fn vanishes_mod(f: &Poly2, p: u128, k: u32, x: &BigInt, y: &BigInt) -> Result<bool> {
    let g = f.integral_at(p)?;
    let v = g.eval(x, y);
    Ok(v.is_zero() || split_power(&v, p).0 >= u64::from(k))
}

/// Reduces a p-integral rational to a residue mod `p^k` (convenience for
/// callers seeding searches).
pub fn residue(x: &Rational, p: u128, k: u32) -> Option<BigInt> {
    reduce_mod(x, &BigInt::from(p).pow(k))
}

/// Smallest nonnegative residue as `u128` when it fits.
pub fn small_residue(x: &BigInt, modulus: u128) -> u128 {
    x.mod_floor(&BigInt::from(modulus))
        .abs()
        .to_u128()
        .expect("residue fits")
}
