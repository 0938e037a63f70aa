mod job;
mod svg;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};
use trisheet::curve::{build_config, build_curve, BranchConfig, CubicCurve, CurveParams};
use trisheet::gamma::{trace_gamma, EdgeKind, GammaOptions, GammaSet, Termination};
use trisheet::genus1::{params_from_r0, symmetric_params};
use trisheet::hppade::{defect, solve_hp_config};
use trisheet::periods::{re_i, solve_r0};
use trisheet::uniform::build_hyper;
use trisheet::{Complex64, Error, RootSet};

use job::{Args, Command, JobSpec, Mode};

/// Failure of a run: bad input (exit 2) or a numerical failure (exit 3).
#[derive(Debug)]
enum Failure {
    Input(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Core(e) if e.is_input_error() => 2,
            Failure::Core(_) => 3,
        }
    }

    fn document(&self) -> Value {
        let (kind, message) = match self {
            Failure::Input(m) => ("InputError", m.clone()),
            Failure::Core(e) => (e.kind(), e.to_string()),
        };
        json!({ "error": { "kind": kind, "message": message, "exit_code": self.code() } })
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn cx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn cxs(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|z| cx(*z)).collect())
}

fn roots_json(set: &RootSet) -> Value {
    Value::Array(
        set.roots
            .iter()
            .map(|r| json!({ "value": cx(r.value), "multiplicity": r.multiplicity }))
            .collect(),
    )
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Symmetric => "symmetric",
        Mode::Genus1 => "genus1",
        Mode::GivenCd => "given-cd",
    }
}

/// `(c, d)` for the requested mode.
fn curve_params(job: &JobSpec, cfg: &BranchConfig) -> Outcome<CurveParams> {
    match job.mode {
        Mode::Symmetric => {
            let [a1, b1, a2, b2] = job.points;
            let tol = 1e-12 * cfg.scale();
            if (a1 + b1).norm() > tol || (a2 + b2).norm() > tol {
                return Err(Failure::Input(
                    "symmetric mode needs points of the form a, -a, b, -b".into(),
                ));
            }
            Ok(symmetric_params(a1, a2)?)
        }
        Mode::Genus1 => {
            let r0 = job
                .r0
                .ok_or_else(|| Failure::Input("genus1 mode needs --r0".into()))?;
            Ok(params_from_r0(cfg, r0)?.params)
        }
        Mode::GivenCd => match (job.c, job.d) {
            (Some(c), Some(d)) => Ok(CurveParams::new(c, d)),
            _ => Err(Failure::Input("given-cd mode needs --c and --d".into())),
        },
    }
}

fn config_of(job: &JobSpec) -> Outcome<BranchConfig> {
    let [a1, b1, a2, b2] = job.points;
    Ok(build_config(a1, b1, a2, b2)?)
}

fn curve_of(job: &JobSpec) -> Outcome<CubicCurve> {
    let cfg = config_of(job)?;
    let params = curve_params(job, &cfg)?;
    Ok(build_curve(cfg, params)?)
}

fn curve_doc(job: &JobSpec, cur: &CubicCurve) -> Value {
    json!({
        "points": cxs(&job.points),
        "mode": mode_name(job.mode),
        "c": cx(cur.params.c),
        "d": cx(cur.params.d),
        "genus": cur.genus,
        "hard_edges": cxs(&cur.config.points()),
        "soft_edges": cxs(&cur.soft_points.values()),
        "nodes": cxs(&cur.nodes),
        "dtilde": cxs(cur.dtilde.coeffs()),
    })
}

fn figure(cur: &CubicCurve) -> svg::Figure {
    svg::Figure {
        hard: cur.config.points().to_vec(),
        soft: cur.soft_points.values(),
        ..svg::Figure::default()
    }
}

struct Output {
    doc: Value,
    csv: Option<Vec<(usize, String, f64, f64)>>,
    svg: Option<svg::Figure>,
    /// Exit code for a completed run (nonzero when `verify` finds a failure).
    code: u8,
}

impl Output {
    fn doc(doc: Value, fig: Option<svg::Figure>) -> Self {
        Output {
            doc,
            csv: None,
            svg: fig,
            code: 0,
        }
    }
}

fn run_curve(job: &JobSpec) -> Outcome<Output> {
    let cur = curve_of(job)?;
    Ok(Output::doc(curve_doc(job, &cur), Some(figure(&cur))))
}

fn run_hyper(job: &JobSpec) -> Outcome<Output> {
    let cur = curve_of(job)?;
    let hc = build_hyper(&cur)?;
    let mut doc = curve_doc(job, &cur);
    doc["k2"] = cxs(hc.k2.coeffs());
    doc["delta2"] = cxs(hc.delta2.coeffs());
    doc["eps"] = roots_json(&hc.eps);
    doc["hyper_genus"] = json!(hc.genus());
    doc["double_roots"] = cxs(&hc.double_roots());
    Ok(Output::doc(doc, Some(figure(&cur))))
}

fn run_genus1(job: &JobSpec) -> Outcome<Output> {
    let cfg = config_of(job)?;
    let r0 = job
        .r0
        .ok_or_else(|| Failure::Input("genus1 needs --r0".into()))?;
    let g = params_from_r0(&cfg, r0)?;
    let cur = build_curve(cfg, g.params)?;
    let mut doc = curve_doc(&JobSpec { mode: Mode::Genus1, ..job.clone() }, &cur);
    doc["r0"] = cx(g.r0);
    doc["c1"] = cx(g.c1);
    doc["c2"] = cx(g.c2);
    Ok(Output::doc(doc, Some(figure(&cur))))
}

fn run_solve_r0(job: &JobSpec) -> Outcome<Output> {
    let cfg = config_of(job)?;
    let bracket = job
        .r0_bracket
        .ok_or_else(|| Failure::Input("solve-r0 needs --r0-bracket lo,hi".into()))?;
    let tol = job.tol.unwrap_or(1e-10);
    let g = solve_r0(&cfg, bracket, tol)?;
    let period = re_i(&cfg, &g)?;
    let cur = build_curve(cfg, g.params)?;
    let mut doc = curve_doc(&JobSpec { mode: Mode::Genus1, ..job.clone() }, &cur);
    doc["R0"] = json!(g.r0.re);
    doc["r0_bracket"] = json!([bracket.0, bracket.1]);
    doc["tol"] = json!(tol);
    doc["re_I"] = json!(period.re_i);
    doc["quadrature_error"] = json!(period.quadrature_error);
    Ok(Output::doc(doc, Some(figure(&cur))))
}

fn termination(t: &Termination) -> Value {
    match t {
        Termination::Edge(p) => json!({ "kind": "edge", "at": cx(*p) }),
        Termination::Node(p) => json!({ "kind": "node", "at": cx(*p) }),
        Termination::Closed => json!({ "kind": "closed" }),
        Termination::LeftBox => json!({ "kind": "left-box" }),
        Termination::StepCap => json!({ "kind": "step-cap" }),
    }
}

fn gamma_rows(gs: &GammaSet) -> Vec<(usize, String, f64, f64)> {
    gs.arcs
        .iter()
        .enumerate()
        .flat_map(|(id, arc)| {
            let pair = format!("{}-{}", arc.pair.0, arc.pair.1);
            arc.points.iter().map(move |z| (id, pair.clone(), z.re, z.im))
        })
        .collect()
}

fn run_gamma(job: &JobSpec) -> Outcome<Output> {
    let cur = curve_of(job)?;
    let opts = GammaOptions {
        step: job.step,
        ..GammaOptions::default()
    };
    let gs = trace_gamma(&cur, &opts)?;
    let mut doc = curve_doc(job, &cur);
    doc["step"] = json!(gs.step);
    doc["arcs"] = Value::Array(
        gs.arcs
            .iter()
            .enumerate()
            .map(|(id, a)| {
                json!({
                    "id": id,
                    "pair": [a.pair.0, a.pair.1],
                    "seed": cx(a.seed),
                    "seed_kind": match a.seed_kind { EdgeKind::Hard => "hard", EdgeKind::Soft => "soft" },
                    "direction": a.direction_index,
                    "end": termination(&a.end),
                    "points": a.points.len(),
                    "length": a.length,
                    "max_drift": a.max_drift,
                })
            })
            .collect(),
    );
    let mut fig = figure(&cur);
    fig.arcs = gs.arcs.iter().map(|a| a.points.clone()).collect();
    Ok(Output {
        doc,
        csv: Some(gamma_rows(&gs)),
        svg: Some(fig),
        code: 0,
    })
}

fn run_hp(job: &JobSpec) -> Outcome<Output> {
    let cfg = config_of(job)?;
    let hp = solve_hp_config(&cfg, job.hp_n)?;
    let doc = json!({
        "points": cxs(&job.points),
        "n": [hp.n.0, hp.n.1],
        "normal": hp.is_normal(),
        "rank_deficiency": hp.rank_deficiency,
        "denominator": cxs(hp.denominator.coeffs()),
        "zeros": roots_json(&hp.zeros),
        "defect": defect(&hp),
    });
    let fig = svg::Figure {
        hard: cfg.points().to_vec(),
        dots: hp.zeros.values(),
        ..svg::Figure::default()
    };
    Ok(Output::doc(doc, Some(fig)))
}

/// Round-trip and residual checks on sample points around the curve.
fn run_verify(job: &JobSpec) -> Outcome<Output> {
    let cur = curve_of(job)?;
    let hc = build_hyper(&cur)?;
    let scale = cur.config.scale();
    let center = cur.config.points().iter().sum::<Complex64>() / 4.0;
    let singular = cur.singular_points();
    let mut dens = hc.k2.raw_roots()?;
    dens.extend(cur.config.points());
    let near = |pts: &[Complex64], z: Complex64| pts.iter().any(|p| (z - p).norm() < 1e-2 * scale);
    let samples: Vec<Complex64> = (0..96)
        .map(|k| {
            let radius = scale * (0.2 + 1.3 * (k % 8) as f64 / 7.0);
            center + Complex64::from_polar(radius, 0.37 + std::f64::consts::TAU * k as f64 / 96.0)
        })
        .filter(|z| !near(&singular, *z))
        .collect();
    let close = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-10 * (1.0 + a.norm().max(b.norm()));

    let mut vieta = 0.0f64;
    let mut round_trip_failures = 0;
    let mut residual_failures = 0;
    let mut trips = 0;
    for &z in &samples {
        let h = cur.raw_branches(z, None)?;
        let size: f64 = h.iter().map(|v| v.norm()).sum();
        vieta = vieta.max((h[0] + h[1] + h[2]).norm() / size);
        for v in h {
            let sp = hc.forward(z, v)?;
            if hc.ultraelliptic_residual(sp.r, sp.delta) >= 1e-9 * (1.0 + sp.r.norm().powi(6)) {
                residual_failures += 1;
            }
            if near(&dens, sp.r) {
                continue;
            }
            trips += 1;
            let back = hc.inverse(sp.r, sp.delta)?;
            let again = hc.forward(back.z, back.h)?;
            if !(close(back.z, z) && close(back.h, v) && close(again.delta, sp.delta)) {
                round_trip_failures += 1;
            }
        }
    }
    let full = &(&(&cur.p2 * &cur.p2) * &cur.p2) - &(&(&cur.config.pi4 * &cur.p1) * &cur.p1);
    let size = (0..=6).map(|k| full.coeff(k).norm()).fold(0.0, f64::max).max(1.0);
    let top = full.coeff(5).norm().max(full.coeff(6).norm()) / size;
    let checks = [
        ("vieta", vieta <= 1e-10, format!("max |h0+h1+h2| / sum |h| = {vieta:.1e}")),
        ("degree", top <= 1e-10, format!("z^5, z^6 coefficients of D~ = {top:.1e} relative")),
        (
            "round_trip",
            round_trip_failures == 0,
            format!("{trips} round trips, {round_trip_failures} failures"),
        ),
        (
            "ultraelliptic_residual",
            residual_failures == 0,
            format!("{residual_failures} residual failures"),
        ),
        (
            "genus_agreement",
            hc.genus() == cur.genus,
            format!("curve {} / hyperelliptic {}", cur.genus, hc.genus()),
        ),
    ];
    let passed = checks.iter().all(|c| c.1);
    let mut doc = curve_doc(job, &cur);
    doc["checks"] = Value::Array(
        checks
            .iter()
            .map(|(name, ok, detail)| json!({ "name": name, "passed": ok, "detail": detail }))
            .collect(),
    );
    doc["passed"] = json!(passed);
    Ok(Output {
        doc,
        csv: None,
        svg: Some(figure(&cur)),
        code: if passed { 0 } else { 3 },
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Outcome<()> {
    std::fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(job: &JobSpec, out: &Output) -> Outcome<()> {
    let text = serde_json::to_string_pretty(&out.doc).map_err(|e| Failure::Input(e.to_string()))? + "\n";
    match &job.out_json {
        Some(path) => write_file(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    if let Some(path) = &job.out_csv {
        let rows = out
            .csv
            .as_ref()
            .ok_or_else(|| Failure::Input("--out-csv is only available for gamma".into()))?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Failure::Input(e.to_string());
        w.write_record(["arc_id", "pair", "x", "y"]).map_err(io)?;
        for (id, pair, x, y) in rows {
            w.write_record([id.to_string(), pair.clone(), x.to_string(), y.to_string()])
                .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
        write_file(path, &bytes)?;
    }
    if let (Some(path), Some(fig)) = (&job.out_svg, &out.svg) {
        write_file(path, fig.render().as_bytes())?;
    }
    Ok(())
}

fn run(job: &JobSpec) -> Outcome<Output> {
    match job.command {
        Command::Curve => run_curve(job),
        Command::Hyper => run_hyper(job),
        Command::Genus1 => run_genus1(job),
        Command::SolveR0 => run_solve_r0(job),
        Command::Gamma => run_gamma(job),
        Command::Hp => run_hp(job),
        Command::Verify => run_verify(job),
    }
}

fn fail(f: Failure, out_json: Option<&Path>) -> ExitCode {
    let text = serde_json::to_string_pretty(&f.document()).unwrap_or_default() + "\n";
    if let Some(path) = out_json {
        let _ = std::fs::write(path, &text);
    }
    print!("{text}");
    ExitCode::from(f.code())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(Failure::Input(e.to_string().trim().to_string()), None),
    };
    let job = match JobSpec::from_args(args) {
        Ok(j) => j,
        Err(msg) => return fail(Failure::Input(msg), None),
    };
    let result = run(&job).and_then(|out| emit(&job, &out).map(|_| out.code));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => fail(f, job.out_json.as_deref()),
    }
}
