use conic_descent::arith::Place;
use conic_descent::descent::{
    complete_adelic_point, default_adelic_point, descend, descend_from, verify_certificate, Bounds,
    Certificate, Outcome, TraceStep,
};
use conic_descent::format::{parse_points, parse_spec, render_points, render_spec, spec_hash};
use conic_descent::points::verify_integral_point;
use conic_descent::surface::{Linear, RawSpec, SurfaceSpec};
use proptest::prelude::*;

const SOLUBLE: &str = "s0 inf 2 3\na -3\nb 6\nfactor 1 3 0\nfactor 2 1 4\npartA 1\n";

#[test]
fn text_to_verified_certificate() {
    let spec = parse_spec(SOLUBLE).unwrap();
    let p = default_adelic_point(&spec, 20)
        .unwrap()
        .expect("adelic point");
    let cert = descend(&spec, &p, &Bounds::default()).unwrap();
    let Outcome::PointFound { x, y, t, verified } = &cert.outcome else {
        panic!("{}", cert.to_text());
    };
    assert!(*verified && verify_integral_point(&spec, x, y, t));
    assert!(verify_certificate(&spec, &cert));
    let back = Certificate::from_json(&cert.to_json()).unwrap();
    assert_eq!(back, cert);
    assert_eq!(back.spec_hash, spec_hash(&spec));
}

#[test]
fn descent_is_deterministic() {
    let spec = parse_spec(SOLUBLE).unwrap();
    let empty = Default::default();
    let a = descend_from(&spec, &empty, 20, &Bounds::default()).unwrap();
    let b = descend_from(&spec, &empty, 20, &Bounds::default()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn tampered_certificate_is_rejected() {
    let spec = parse_spec(SOLUBLE).unwrap();
    let p = default_adelic_point(&spec, 20).unwrap().unwrap();
    let mut cert = descend(&spec, &p, &Bounds::default()).unwrap();
    if let Outcome::PointFound { x, .. } = &mut cert.outcome {
        *x += conic_descent::rational::int(1);
    }
    assert!(!verify_certificate(&spec, &cert));
    let mut cert = descend(&spec, &p, &Bounds::default()).unwrap();
    for step in &mut cert.trace {
        if let TraceStep::Selmer { routes_agree, .. } = step {
            *routes_agree = Some(false);
        }
    }
    assert!(!verify_certificate(&spec, &cert));
    let other = parse_spec("s0 inf 3\na 6\nb -1\nfactor 1 1 -5\nfactor 2 3 3\npartA 2\n").unwrap();
    let cert = descend(&spec, &p, &Bounds::default()).unwrap();
    assert!(!verify_certificate(&other, &cert));
}

#[test]
fn point_file_round_trip_and_completion() {
    let spec = parse_spec(SOLUBLE).unwrap();
    let p = default_adelic_point(&spec, 20).unwrap().unwrap();
    let text = render_points(&p);
    assert_eq!(parse_points(&text).unwrap(), p);
    let real = p.restrict(&[Place::Real]);
    let done = complete_adelic_point(&spec, &real, 20)
        .unwrap()
        .expect("completion");
    assert_eq!(done.get(Place::Real), p.get(Place::Real));
    assert_eq!(done.places(), spec.s(&[]).unwrap());
}

#[test]
fn zero_height_stops_at_minimized_group() {
    let spec = parse_spec(SOLUBLE).unwrap();
    let p = default_adelic_point(&spec, 20).unwrap().unwrap();
    let bounds = Bounds {
        height: 0,
        ..Bounds::default()
    };
    let cert = descend(&spec, &p, &bounds).unwrap();
    assert!(matches!(cert.outcome, Outcome::DualSelmerMinimized { .. }));
}

fn arb_spec() -> impl Strategy<Value = SurfaceSpec> {
    (
        proptest::sample::subsequence(vec![2u128, 3, 5, 7], 0..=4),
        -30i64..=30,
        -30i64..=30,
        proptest::collection::vec((1i64..=30, -30i64..=30), 1..=3),
        proptest::collection::vec(any::<bool>(), 3),
    )
        .prop_filter_map("invalid spec", |(primes, a, b, fs, mask)| {
            let s0 = std::iter::once(Place::Real)
                .chain(primes.into_iter().map(|p| Place::finite(p).unwrap()))
                .collect();
            let part_a = (1..=fs.len()).filter(|&i| mask[i - 1]).collect();
            SurfaceSpec::new(RawSpec {
                s0,
                a: a.into(),
                b: b.into(),
                factors: fs.into_iter().map(|(c, d)| Linear::new(c, d)).collect(),
                part_a,
            })
            .ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spec_render_parse_round_trip(spec in arb_spec()) {
        let text = render_spec(&spec);
        let back = parse_spec(&text).unwrap();
        prop_assert_eq!(spec_hash(&back), spec_hash(&spec));
        prop_assert_eq!(render_spec(&back), text);
    }

    #[test]
    fn default_points_cover_s(spec in arb_spec()) {
        if let Some(p) = default_adelic_point(&spec, 8).unwrap() {
            prop_assert_eq!(p.places(), spec.s(&[]).unwrap());
        }
    }
}
