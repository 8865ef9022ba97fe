//! Command-line front end. Exit status: 0 success or point found, 1 input
//! error, 2 hypothesis failed, 3 search exhausted.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use conic_descent::arith::{Place, SquareClass};
use conic_descent::brauer::{
    brauer_generator, fiber_splitting_class, invariant, residue_at, ClosedPoint,
};
use conic_descent::conditiond::check_condition_d;
use conic_descent::descent::{descend_from, Bounds, Outcome};
use conic_descent::format::{parse_points, parse_raw_spec, render_spec, spec_hash};
use conic_descent::points::{
    good_place_solubility, local_solubility, solve_fiber, verify_integral_point, LocalSolubility,
    Model,
};
use conic_descent::rational::{parse as parse_rational, render};
use conic_descent::selmer::{dimension_identity, dual_selmer_group, selmer_group, TorusData};
use conic_descent::surface::{
    validate_spec, PartialAdelicPoint, SurfaceSpec, DELTA_NORMALIZATION, SUITABILITY_READING,
};
use conic_descent::{Error, Rational};

#[derive(Parser, Debug)]
#[command(
    name = "conic-descent",
    version,
    about = "Descent-fibration search for S0-integral points on a*p_A(t)x^2 + b*p_B(t)y^2 = 1"
)]
struct Cli {
    /// Emit JSON instead of structured text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a spec file and print its canonical form and bad places.
    Validate { spec: PathBuf },
    /// Compute G_D and G^D and decide Condition (D).
    ConditionD { spec: PathBuf },
    /// Selmer and dual Selmer groups of the fiber torus over t.
    Selmer {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
    /// Vertical Brauer generators and their residues at the roots.
    Brauer { spec: PathBuf },
    /// Local solubility and Brauer invariants of the fiber over t at a place.
    Local {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        place: String,
    },
    /// Run the full descent and emit a certificate.
    Descend {
        spec: PathBuf,
        /// Rows `v x y t precision`; missing places of S0 and S_bad are chosen internally.
        #[arg(long)]
        point_file: Option<PathBuf>,
        /// Comma-separated `key=value` with keys admissible, primes, height, steps.
        #[arg(long)]
        bounds: Option<String>,
        /// Search radius for local points chosen internally.
        #[arg(long, default_value_t = 20)]
        radius: i64,
    },
    /// Bounded search for an S0-integral point on the fiber over t.
    Solve {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, default_value_t = 1000)]
        height: u64,
    },
}

/// A finished command: its exit status, JSON body and text body.
struct Report {
    command: &'static str,
    spec: Option<SurfaceSpec>,
    status: &'static str,
    exit: u8,
    json: Value,
    text: String,
}

impl Report {
    fn emit(&self, as_json: bool) -> String {
        if as_json {
            let mut env = json!({ "command": self.command, "status": self.status });
            if let Some(spec) = &self.spec {
                env["spec_hash"] = json!(spec_hash(spec));
                env["delta_normalization"] = json!(DELTA_NORMALIZATION);
                env["suitability_reading"] = json!(SUITABILITY_READING);
            }
            env["report"] = self.json.clone();
            let mut s = serde_json::to_string_pretty(&env).expect("reports serialize");
            s.push('\n');
            s
        } else {
            let mut s = format!("command {}\nstatus {}\n", self.command, self.status);
            if let Some(spec) = &self.spec {
                let _ = writeln!(s, "spec-hash {}", spec_hash(spec));
                let _ = writeln!(s, "delta-normalization {DELTA_NORMALIZATION}");
                let _ = writeln!(s, "suitability-reading {SUITABILITY_READING}");
            }
            s.push_str(&self.text);
            s
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("{}: {e}", path.display()),
    })
}

fn load_spec(path: &Path) -> Result<SurfaceSpec, Error> {
    validate_spec(parse_raw_spec(&read(path)?)?)
}

fn rational_arg(s: &str) -> Result<Rational, Error> {
    parse_rational(s).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("--t: {e}"),
    })
}

fn parse_bounds(s: &str) -> Result<Bounds, Error> {
    let mut b = Bounds::default();
    let bad = |msg: String| Error::Parse { line: 0, msg };
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| bad(format!("--bounds: expected key=value, got {item:?}")))?;
        let n: u64 = v
            .trim()
            .parse()
            .map_err(|_| bad(format!("--bounds: {k} must be a non-negative integer")))?;
        match k.trim() {
            "admissible" => b.admissible = n,
            "primes" => b.primes = n,
            "height" => b.height = n,
            "steps" => b.steps = n as usize,
            other => return Err(bad(format!("--bounds: unknown key {other:?}"))),
        }
    }
    Ok(b)
}

fn classes(xs: &[SquareClass]) -> Vec<String> {
    xs.iter().map(|c| c.to_string()).collect()
}

fn places(xs: &[Place]) -> Vec<String> {
    xs.iter().map(|v| v.to_string()).collect()
}

fn validate(path: &Path) -> Result<Report, Error> {
    let raw = parse_raw_spec(&read(path)?)?;
    let spec = match validate_spec(raw) {
        Ok(s) => s,
        Err(Error::InvalidSpec(vs)) => {
            let msgs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
            let text = msgs.iter().map(|m| format!("violation {m}\n")).collect();
            return Ok(Report {
                command: "validate",
                spec: None,
                status: "invalid",
                exit: 1,
                json: json!({ "violations": msgs }),
                text,
            });
        }
        Err(e) => return Err(e),
    };
    let s_bad = spec.s_bad()?;
    let s = spec.s(&[])?;
    let text = format!(
        "d {}\ns-bad {}\ns {}\n{}",
        spec.d(),
        places(&s_bad).join(" "),
        places(&s).join(" "),
        render_spec(&spec)
    );
    Ok(Report {
        command: "validate",
        status: "valid",
        exit: 0,
        json: json!({
            "canonical": render_spec(&spec),
            "d": spec.d().to_string(),
            "s_bad": places(&s_bad),
            "s": places(&s),
        }),
        text,
        spec: Some(spec),
    })
}

fn condition_d(path: &Path) -> Result<Report, Error> {
    let spec = load_spec(path)?;
    let r = check_condition_d(&spec)?;
    let show = |xs: &[conic_descent::conditiond::GElement]| {
        xs.iter().map(|g| g.to_string()).collect::<Vec<_>>()
    };
    let text = format!(
        "holds {}\ng_d-holds {}\ng_d-hat-holds {}\ng_d {}\ng_d-hat {}\nwitnesses {}\n",
        r.holds,
        r.gd_holds,
        r.gd_hat_holds,
        show(&r.gd).join(" "),
        show(&r.gd_hat).join(" "),
        show(&r.witnesses).join(" ")
    );
    Ok(Report {
        command: "condition-d",
        status: if r.holds { "holds" } else { "fails" },
        exit: if r.holds { 0 } else { 2 },
        json: serde_json::to_value(&r).expect("serializable"),
        text,
        spec: Some(spec),
    })
}

fn selmer(path: &Path, t: &str) -> Result<Report, Error> {
    let spec = load_spec(path)?;
    let t = rational_arg(t)?;
    let fiber = spec.fiber(&t)?;
    let d = SquareClass::from_rational(&fiber.torus_d)?;
    let mut s: Vec<Place> = spec.s0().to_vec();
    s.push(Place::finite(2)?);
    for &p in d.support() {
        s.push(Place::finite(p)?);
    }
    let torus = TorusData::from_class(d, s)?;
    let sel = selmer_group(&torus);
    let dual = dual_selmer_group(&torus);
    let dims = dimension_identity(&torus, spec.s0())?;
    let text = format!(
        "t {}\nfiber {}*x^2 + {}*y^2 = 1\ntorus-d {}\nS {}\nselmer dim={} basis {}\ndual-selmer dim={} basis {}\nsplit-places {}\n",
        render(&t),
        render(&fiber.a_a),
        render(&fiber.b_b),
        torus.d(),
        places(torus.s()).join(" "),
        sel.dim(),
        classes(&sel.basis()).join(" "),
        dual.dim(),
        classes(&dual.basis()).join(" "),
        places(&dims.split_s).join(" ")
    );
    Ok(Report {
        command: "selmer",
        status: "ok",
        exit: 0,
        json: json!({
            "t": render(&t),
            "a_a": render(&fiber.a_a),
            "b_b": render(&fiber.b_b),
            "torus_d": torus.d().to_string(),
            "places": places(torus.s()),
            "selmer": { "dim": sel.dim(), "basis": classes(&sel.basis()) },
            "dual_selmer": { "dim": dual.dim(), "basis": classes(&dual.basis()) },
            "split_places": places(&dims.split_s),
        }),
        text,
        spec: Some(spec),
    })
}

fn brauer(path: &Path) -> Result<Report, Error> {
    let spec = load_spec(path)?;
    let mut text = String::new();
    let mut gens = Vec::new();
    for i in 0..spec.n() {
        let q = brauer_generator(&spec, i)?;
        let split = fiber_splitting_class(&spec, i)?;
        let mut residues = Vec::new();
        for j in 0..spec.n() {
            let r = residue_at(&q, &ClosedPoint::Rational(spec.root(j)))?;
            residues.push(json!({ "root": render(&spec.root(j)), "residue": r.to_string() }));
            let _ = writeln!(
                text,
                "residue factor={} at t={} is {}",
                i + 1,
                render(&spec.root(j)),
                r
            );
        }
        let _ = writeln!(
            text,
            "generator factor={} ({}, {}) splitting-class {}",
            i + 1,
            render(&q.left),
            spec.factor(i),
            split
        );
        gens.push(json!({
            "factor": i,
            "left": render(&q.left),
            "right": spec.factor(i).to_string(),
            "splitting_class": split.to_string(),
            "residues": residues,
        }));
    }
    Ok(Report {
        command: "brauer",
        status: "ok",
        exit: 0,
        json: json!({ "generators": gens }),
        text,
        spec: Some(spec),
    })
}

fn local(path: &Path, t: &str, place: &str) -> Result<Report, Error> {
    let spec = load_spec(path)?;
    let t = rational_arg(t)?;
    let v = Place::from_str(place).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("--place: {e}"),
    })?;
    let model = if spec.in_s0(v) {
        Model::Rational
    } else {
        Model::Integral
    };
    let fiber = spec.fiber(&t)?;
    let sol = local_solubility(&fiber.a_a, &fiber.b_b, v, model)?;
    let invariants: Vec<u8> = (0..spec.n())
        .map(|i| invariant(&spec, i, &t, v))
        .collect::<Result<_, _>>()?;
    // the good-place criterion applies at integral t above a root mod v
    let good = (0..spec.n())
        .map(|i| good_place_solubility(&spec, i, &t, v))
        .find_map(|r| r.ok());
    let (status, detail) = match &sol {
        LocalSolubility::Soluble(w) => (
            "soluble",
            format!(
                "witness x={} y={} precision={}",
                render(&w.x),
                render(&w.y),
                w.precision
            ),
        ),
        LocalSolubility::Insoluble(why) => ("insoluble", format!("reason {why:?}")),
        LocalSolubility::Inconclusive { precision } => {
            ("inconclusive", format!("precision {precision}"))
        }
    };
    let text = format!(
        "place {v}\nt {}\nmodel {}\nsolubility {status}\n{detail}\nbrauer-invariants {}\ngood-place-criterion {}\n",
        render(&t),
        serde_json::to_value(model).expect("serializable").as_str().unwrap_or_default(),
        invariants.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
        good.map_or("n/a".into(), |g| g.to_string())
    );
    Ok(Report {
        command: "local",
        status,
        exit: 0,
        json: json!({
            "place": v.to_string(),
            "t": render(&t),
            "model": serde_json::to_value(model).expect("serializable"),
            "solubility": serde_json::to_value(&sol).expect("serializable"),
            "brauer_invariants": invariants,
            "good_place_criterion": good,
        }),
        text,
        spec: Some(spec),
    })
}

fn descend_cmd(
    path: &Path,
    point_file: Option<&Path>,
    bounds: Option<&str>,
    radius: i64,
) -> Result<Report, Error> {
    let spec = load_spec(path)?;
    let given = match point_file {
        Some(f) => parse_points(&read(f)?)?,
        None => PartialAdelicPoint::new(),
    };
    let bounds = bounds.map(parse_bounds).transpose()?.unwrap_or_default();
    let cert = descend_from(&spec, &given, radius, &bounds)?;
    let (status, exit) = match &cert.outcome {
        Outcome::PointFound { .. } => ("point_found", 0),
        Outcome::DualSelmerMinimized { .. } => ("dual_selmer_minimized", 0),
        Outcome::SearchExhausted { .. } => ("search_exhausted", 3),
        Outcome::HypothesisFailed { .. } => ("hypothesis_failed", 2),
    };
    Ok(Report {
        command: "descend",
        status,
        exit,
        json: serde_json::to_value(&cert).expect("serializable"),
        // the envelope already prints the header lines
        text: cert
            .to_text()
            .lines()
            .skip(3)
            .map(|l| format!("{l}\n"))
            .collect(),
        spec: Some(spec),
    })
}

fn solve(path: &Path, t: &str, height: u64) -> Result<Report, Error> {
    let spec = load_spec(path)?;
    let t = rational_arg(t)?;
    let fiber = spec.fiber(&t)?;
    let found = solve_fiber(&fiber.a_a, &fiber.b_b, spec.s0(), height)?;
    let header = format!(
        "t {}\nfiber {}*x^2 + {}*y^2 = 1\nheight {height}\n",
        render(&t),
        render(&fiber.a_a),
        render(&fiber.b_b)
    );
    Ok(match found {
        Some((x, y)) => {
            let verified = verify_integral_point(&spec, &x, &y, &t);
            Report {
                command: "solve",
                status: "point_found",
                exit: 0,
                json: json!({ "t": render(&t), "x": render(&x), "y": render(&y), "verified": verified, "height": height }),
                text: format!(
                    "{header}x {}\ny {}\nverified {verified}\n",
                    render(&x),
                    render(&y)
                ),
                spec: Some(spec),
            }
        }
        None => Report {
            command: "solve",
            status: "search_exhausted",
            exit: 3,
            json: json!({ "t": render(&t), "height": height }),
            text: header,
            spec: Some(spec),
        },
    })
}

fn run(cli: &Cli) -> Result<Report, Error> {
    match &cli.command {
        Command::Validate { spec } => validate(spec),
        Command::ConditionD { spec } => condition_d(spec),
        Command::Selmer { spec, t } => selmer(spec, t),
        Command::Brauer { spec } => brauer(spec),
        Command::Local { spec, t, place } => local(spec, t, place),
        Command::Descend {
            spec,
            point_file,
            bounds,
            radius,
        } => descend_cmd(spec, point_file.as_deref(), bounds.as_deref(), *radius),
        Command::Solve { spec, t, height } => solve(spec, t, *height),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.emit(cli.json));
            ExitCode::from(report.exit)
        }
        Err(e) => {
            if cli.json {
                println!(
                    "{}",
                    json!({ "status": "input_error", "error": e.to_string() })
                );
            }
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
