//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Each criterion runs its experiment at the default configuration and
//! re-checks the reported values against the tolerances pinned below, in
//! addition to the experiment's own pass flags. Criterion 11 is known to fail
//! (the box perimeters peak at m = 19 and grow by 1.15x, not 3x); its line is
//! printed as FAIL but does not fail the process. Any other failure does.

use std::path::Path;
use std::process::ExitCode;

use gaussbv_cli::experiments::compare_reruns;
use gaussbv_cli::{run, ExperimentConfig, Report, REGISTRY};
use serde_json::Value;

const TV_SPREAD: f64 = 0.02;
const HALFSPACE_TOL: f64 = 0.02;
const ISOPERIMETRIC_SLACK: f64 = 0.02;
const COAREA_GAP: f64 = 0.02;
const COMMUTATION_TOL: f64 = 1e-5;
const LAW_FACTOR: f64 = 2.0;
const L1_SLACK: f64 = 0.02;
const MONOTONE_SLACK: f64 = 0.01;
const QUADRATIC_L2: f64 = 0.01;
const QUADRATIC_GAP: f64 = 1e-8;
const RELAXED_CONSTANT: f64 = 0.01;
const RELAXED_SPREAD: f64 = 0.02;
const BOX_GROWTH: f64 = 3.0;
const SIGMAS: f64 = 3.0;
const HINO_FACTOR: f64 = 3.0;

const KNOWN_RED: &[usize] = &[11];

struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    fn require(&mut self, cond: bool, what: impl Into<String>) {
        if !cond {
            self.ok = false;
            self.notes.push(what.into());
        }
    }

    fn flags(&mut self, r: &Report) {
        for f in r.failing() {
            self.require(false, format!("{}: flag {f}", r.experiment));
        }
    }
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn val<'a>(r: &'a Report, key: &str) -> &'a Value {
    r.values.get(key).unwrap_or(&Value::Null)
}

fn within_sigmas(x: f64, oracle: f64, se: f64) -> bool {
    (x - oracle).abs() <= SIGMAS * se
}

fn experiment(dir: &Path, name: &str) -> Report {
    run(&ExperimentConfig::named(name), &dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn tv_equivalence(r: &Report, c: &mut Check) {
    let cases = ["halfspace", "interval", "affine", "sin", "phi-profile", "halfspace-2d", "ball-2d"];
    for case in cases {
        let s = f(&val(r, case)["spread"]);
        c.require(s < TV_SPREAD, format!("{case} spread {s:.4}"));
    }
}

fn halfspace_perimeter(r: &Report, c: &mut Check) {
    let p0 = f(val(r, "a=0.perimeter"));
    let target = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    c.require((p0 / target - 1.0).abs() < HALFSPACE_TOL, format!("P(x>0) = {p0:.5}"));
    for a in ["0.5", "1", "2"] {
        let iso = val(r, &format!("a={a}.isoperimetric"));
        let (p, u) = (f(&iso["perimeter"]), f(&iso["profile"]));
        c.require((p / u - 1.0).abs() < HALFSPACE_TOL, format!("a={a}: {p:.5} vs {u:.5}"));
        c.require(iso["equality"] == Value::Bool(true), format!("a={a}: equality flag"));
    }
}

fn isoperimetric(r: &Report, c: &mut Check) {
    for (name, v) in &r.values {
        let (p, u) = (f(&v["perimeter"]), f(&v["profile"]));
        c.require(p >= u * (1.0 - ISOPERIMETRIC_SLACK), format!("{name}: {p:.5} < {u:.5}"));
    }
    c.require(r.pass_flags.get("ball.strict") == Some(&true), "ball: no strict margin");
}

fn coarea(r: &Report, c: &mut Check) {
    for case in ["linear", "halfspace", "random-smooth"] {
        let g = f(&val(r, case)["gap"]);
        c.require(g < COAREA_GAP, format!("{case} gap {g:.4}"));
    }
}

fn mehler(r: &Report, c: &mut Check) {
    let worst = f(val(r, "commutation_worst"));
    c.require(worst < COMMUTATION_TOL, format!("commutation residual {worst:.2e}"));
    let single = f(val(r, "single_step_tolerance"));
    for (k, v) in r.values.iter().filter(|(k, _)| k.starts_with("law.")) {
        c.require(f(v) <= LAW_FACTOR * single, format!("{k} = {:.2e}", f(v)));
    }
    let times = r.inputs["times"].as_array().map(|t| t.len()).unwrap_or(0);
    c.require(times == 3, "times");
}

fn l1_bound(r: &Report, c: &mut Check) {
    for set in ["halfspace", "interval"] {
        for t in ["0.01", "0.05"] {
            let v = val(r, &format!("{set}.t={t}"));
            let (lhs, bound) = (f(&v["lhs"]), f(&v["bound"]));
            c.require(lhs <= bound * (1.0 + L1_SLACK), format!("{set} t={t}: {lhs:.5} > {bound:.5}"));
        }
    }
}

fn cylindrical(r: &Report, c: &mut Check) {
    for d in [2, 3] {
        let ratios = val(r, &format!("d={d}.t=0.1.ratios")).as_array().cloned().unwrap_or_default();
        c.require(!ratios.is_empty(), format!("d={d}: no fields"));
        let worst = ratios.iter().map(f).fold(0.0, f64::max);
        c.require(worst <= 1.0 + MONOTONE_SLACK, format!("d={d} worst ratio {worst:.4}"));
    }
    c.require(r.inputs["fields"] == Value::from(20), "20 fields per dimension");
}

fn rof_quadratic(r: &Report, c: &mut Check) {
    let e = f(val(r, "relative_l2_error"));
    c.require(e < QUADRATIC_L2, format!("L2 error {e:.2e}"));
    let gap = f(val(r, "gap"));
    c.require(gap < QUADRATIC_GAP, format!("gap {gap:.2e}"));
}

fn rof_convexity(r: &Report, c: &mut Check) {
    for g in ["affine", "smoothed-abs", "square", "positive-part"] {
        let pass = &val(r, g)["minimizer_convexity"]["pass"];
        c.require(pass == &Value::Bool(true), format!("{g}: minimizer not convex"));
    }
    c.require(r.values.contains_key("negative-control"), "negative control missing");
}

fn relaxed(r: &Report, c: &mut Check) {
    let target = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let p = f(&val(r, "constant_half")["primal"]);
    c.require((p / target - 1.0).abs() < RELAXED_CONSTANT, format!("constant 1/2: {p:.5}"));
    let s = f(&val(r, "phi_profile")["spread"]);
    c.require(s < RELAXED_SPREAD, format!("profile spread {s:.4}"));
}

fn box_divergence(r: &Report, c: &mut Check) {
    let p: Vec<f64> = val(r, "perimeters").as_array().cloned().unwrap_or_default().iter().map(f).collect();
    c.require(p.len() == 20, "20 boxes");
    if let Some(m) = p.windows(2).position(|w| w[1] <= w[0]) {
        c.require(false, format!("P(Q_{}) <= P(Q_{})", m + 2, m + 1));
    }
    let growth = p.last().copied().unwrap_or(f64::NAN) / p.first().copied().unwrap_or(f64::NAN);
    c.require(growth > BOX_GROWTH, format!("growth {growth:.4}"));
}

fn wiener(r: &Report, c: &mut Check) {
    let m = val(r, "running_max");
    let oracle = f(val(r, "running_max.oracle"));
    c.require(within_sigmas(f(&m["mean"]), oracle, f(&m["mean_se"])), "E[M1]");
    for t in ["0.25", "0.5", "0.75"] {
        let b = val(r, &format!("bridge.t={t}"));
        let s = &b["stats"];
        c.require(
            within_sigmas(f(&s["variance"]), f(&b["oracle_variance"]), f(&s["variance_se"])),
            format!("bridge variance t={t}"),
        );
    }
    for s in ["0.5", "1"] {
        let o = val(r, &format!("ou.s={s}"));
        let st = &o["stats"];
        c.require(within_sigmas(f(&st["mean"]), f(&o["oracle_mean"]), f(&st["mean_se"])), format!("OU mean s={s}"));
        c.require(
            within_sigmas(f(&st["variance"]), f(&o["oracle_variance"]), f(&st["variance_se"])),
            format!("OU variance s={s}"),
        );
    }
    let cm = val(r, "clock_matched");
    c.require(within_sigmas(f(&cm["mc"]), f(&cm["ou_apply"]), f(&cm["std_err"])), "clock-matched");
}

fn hino_uchida(r: &Report, c: &mut Check) {
    let seq: Vec<f64> = val(r, "sequence").as_array().cloned().unwrap_or_default().iter().map(|e| f(&e["bound"])).collect();
    c.require(seq.len() == 4, "four values of n");
    let first = seq.first().copied().unwrap_or(f64::NAN);
    c.require(first > 0.0, "first element positive");
    for (i, &b) in seq.iter().enumerate() {
        c.require(b <= HINO_FACTOR * first, format!("element {i}: {b:.4}"));
    }
}

type Criterion = (usize, &'static str, &'static str, fn(&Report, &mut Check));

const CRITERIA: &[Criterion] = &[
    (1, "TV equivalence", "tv-equivalence", tv_equivalence),
    (2, "halfspace perimeter", "halfspace-perimeter", halfspace_perimeter),
    (3, "isoperimetric inequality", "isoperimetric", isoperimetric),
    (4, "coarea", "coarea", coarea),
    (5, "Mehler commutation and semigroup law", "mehler-commutation", mehler),
    (6, "L1 short-time bound", "l1-bound", l1_bound),
    (7, "cylindrical monotonicity", "cylindrical-monotonicity", cylindrical),
    (8, "ROF quadratic oracle", "rof-quadratic", rof_quadratic),
    (9, "convexity of minimizers", "rof-convexity", rof_convexity),
    (10, "relaxed perimeter", "relaxed-perimeter", relaxed),
    (11, "box divergence", "box-divergence", box_divergence),
    (12, "Wiener Monte Carlo", "wiener-mc", wiener),
    (13, "Hino-Uchida boundedness", "hino-uchida", hino_uchida),
];

fn line(id: usize, title: &str, c: &Check, secs: f64) -> bool {
    let status = if c.ok { "PASS" } else { "FAIL" };
    let detail = if c.notes.is_empty() { String::new() } else { format!(" [{}]", c.notes.join("; ")) };
    let known = !c.ok && KNOWN_RED.contains(&id);
    let suffix = if known { " (known failure)" } else { "" };
    println!("{status} criterion {id}: {title} ({secs:.1} s){detail}{suffix}");
    c.ok || known
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();
    let mut ok = true;

    for &(id, title, name, check) in CRITERIA {
        let start = std::time::Instant::now();
        let report = experiment(dir, name);
        let mut c = Check::new();
        c.flags(&report);
        check(&report, &mut c);
        ok &= line(id, title, &c, start.elapsed().as_secs_f64());
    }

    let start = std::time::Instant::now();
    let mut c = Check::new();
    for e in REGISTRY.iter().filter(|e| e.name != "determinism") {
        let config = ExperimentConfig::named(e.name);
        let base = dir.join("rerun").join(e.name);
        let first = run(&config, &base.join("a")).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        let same = compare_reruns(&first, &base.join("a"), &config, &base.join("b"))
            .unwrap_or_else(|err| panic!("{}: {err}", e.name));
        c.require(same, format!("{} differs", e.name));
    }
    ok &= line(14, "determinism", &c, start.elapsed().as_secs_f64());

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
