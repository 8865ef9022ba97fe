//! Text formats: the surface spec file and the local point file.
//!
//! Spec file, one key per line, `#` starts a comment:
//!
//! ```text
//! s0 inf 5
//! a 2
//! b 3
//! factor 1 1 0
//! factor 2 1 1
//! partA 1
//! ```
//!
//! Point file, one row `v x y t precision` per place, `v` either `inf` or a
//! prime and the coordinates decimal rationals `n` or `n/d`.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use sha2::{Digest, Sha256};

use crate::arith::Place;
use crate::rational::{parse as parse_rational, render};
use crate::surface::{validate_spec, Linear, LocalPoint, PartialAdelicPoint, RawSpec, SurfaceSpec};
use crate::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then(|| (k + 1, l.split_whitespace().collect()))
    })
}

fn int(line: usize, s: &str) -> Result<BigInt> {
    BigInt::from_str(s).map_err(|_| parse_err(line, format!("not an integer: {s:?}")))
}

fn place(line: usize, s: &str) -> Result<Place> {
    Place::from_str(s).map_err(|e| parse_err(line, e.to_string()))
}

/// Parses the spec file without validating the surface hypotheses.
pub fn parse_raw_spec(text: &str) -> Result<RawSpec> {
    let mut s0 = None;
    let mut a = None;
    let mut b = None;
    let mut part_a = None;
    let mut factors: BTreeMap<usize, Linear> = BTreeMap::new();
    for (line, words) in content_lines(text) {
        let (key, rest) = words.split_first().expect("non-empty line");
        let once = |slot: bool| {
            if slot {
                Err(parse_err(line, format!("duplicate key {key}")))
            } else {
                Ok(())
            }
        };
        let single = || match rest {
            [x] => Ok(*x),
            _ => Err(parse_err(line, format!("{key} takes exactly one value"))),
        };
        match *key {
            "s0" => {
                once(s0.is_some())?;
                s0 = Some(
                    rest.iter()
                        .map(|w| place(line, w))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            "a" => {
                once(a.is_some())?;
                a = Some(int(line, single()?)?);
            }
            "b" => {
                once(b.is_some())?;
                b = Some(int(line, single()?)?);
            }
            "factor" => {
                let [i, c, d] = rest else {
                    return Err(parse_err(
                        line,
                        "factor takes an index and two coefficients",
                    ));
                };
                let i: usize = i
                    .parse()
                    .ok()
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| parse_err(line, format!("bad factor index {i:?}")))?;
                if factors
                    .insert(i, Linear::new(int(line, c)?, int(line, d)?))
                    .is_some()
                {
                    return Err(parse_err(line, format!("factor {i} given twice")));
                }
            }
            "partA" => {
                once(part_a.is_some())?;
                part_a = Some(
                    rest.iter()
                        .map(|w| {
                            w.parse::<usize>()
                                .map_err(|_| parse_err(line, format!("bad index {w:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            other => return Err(parse_err(line, format!("unknown key {other:?}"))),
        }
    }
    let missing = |k: &str| parse_err(0, format!("missing key {k}"));
    if factors.keys().copied().ne(1..=factors.len()) {
        return Err(parse_err(0, "factor indices must be 1..n without gaps"));
    }
    Ok(RawSpec {
        s0: s0.ok_or_else(|| missing("s0"))?,
        a: a.ok_or_else(|| missing("a"))?,
        b: b.ok_or_else(|| missing("b"))?,
        factors: factors.into_values().collect(),
        part_a: part_a.unwrap_or_default(),
    })
}

pub fn parse_spec(text: &str) -> Result<SurfaceSpec> {
    validate_spec(parse_raw_spec(text)?)
}

/// The canonical spec file; parsing it back gives an equal spec.
pub fn render_spec(spec: &SurfaceSpec) -> String {
    let raw = spec.to_raw();
    let mut out = String::new();
    let s0: Vec<String> = raw.s0.iter().map(|v| v.to_string()).collect();
    out.push_str(&format!("s0 {}\n", s0.join(" ")));
    out.push_str(&format!("a {}\nb {}\n", raw.a, raw.b));
    for (i, f) in raw.factors.iter().enumerate() {
        out.push_str(&format!("factor {} {} {}\n", i + 1, f.c, f.d));
    }
    let part: Vec<String> = raw.part_a.iter().map(|i| i.to_string()).collect();
    if part.is_empty() {
        out.push_str("partA\n");
    } else {
        out.push_str(&format!("partA {}\n", part.join(" ")));
    }
    out
}

/// SHA-256 of the canonical spec file, hex encoded.
pub fn spec_hash(spec: &SurfaceSpec) -> String {
    hex::encode(Sha256::digest(render_spec(spec).as_bytes()))
}

pub fn parse_points(text: &str) -> Result<PartialAdelicPoint> {
    let mut out = PartialAdelicPoint::new();
    for (line, words) in content_lines(text) {
        let [v, x, y, t, prec] = words[..] else {
            return Err(parse_err(line, "expected `v x y t precision`"));
        };
        let v = place(line, v)?;
        let rat = |s: &str| parse_rational(s).map_err(|e| parse_err(line, e.to_string()));
        let point = LocalPoint {
            x: rat(x)?,
            y: rat(y)?,
            t: rat(t)?,
            precision: prec
                .parse()
                .map_err(|_| parse_err(line, format!("bad precision {prec:?}")))?,
        };
        if out.insert(v, point).is_some() {
            return Err(parse_err(line, format!("place {v} given twice")));
        }
    }
    Ok(out)
}

pub fn render_points(p: &PartialAdelicPoint) -> String {
    p.iter()
        .map(|(v, lp)| {
            format!(
                "{v} {} {} {} {}\n",
                render(&lp.x),
                render(&lp.y),
                render(&lp.t),
                lp.precision
            )
        })
        .collect()
}
