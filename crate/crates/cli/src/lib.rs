//! Batch front end: reads an instance, runs one pipeline stage and writes a
//! deterministic JSON report plus optional CSV traces and SVG figures.
//!
//! Exit codes: 0 on success, 2 when flags or input fail validation (nothing is
//! written), 3 when a solver or estimator fails (a partial report is written).

pub mod args;
pub mod figures;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use ballpoly::estimator::{TracePoint, DEFAULT_BACKWARD_INDEX, DEFAULT_THRESHOLD, DEFAULT_VOLUME_INDEX, DEFAULT_VOLUME_P, DEFAULT_VOLUME_ROUNDS};
use ballpoly::io::read_ssp;
use ballpoly::oracle2d::farthest_by_sampling;
use ballpoly::ssp::MAX_BRUTE_FORCE_N;
use ballpoly::{
    brute_force_ssp, certify_interval, classify, corner_enumeration_r0, decide_by_distance, element_at, encode, farthest_2d,
    hull_contains, instance_to_json, minimize_dc, procedure_a, procedure_b, read_instance, volume_bisect, Classification,
    DcSolution, EstimateReport, Instance, ProcedureBParams, RngSeed, SolveError, SolverOpts, SspInstance, VolumeParams,
};
use serde::{Serialize, Serializer};
use serde_json::{json, Map, Value};

pub use figures::{emit_figures, FigureError, DEFAULT_FIGURE_INDICES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

pub const REPORT_FILE: &str = "report.json";
pub const TIMINGS_FILE: &str = "timings.json";

pub const DEFAULT_ESTIMATE_SAMPLES: u64 = 4096;
pub const DEFAULT_VOLUME_SAMPLES: u64 = 20_000;
/// Boundary samples per ball for the sampling oracle outside the plane.
pub const DEFAULT_ORACLE_SAMPLES: u64 = 10_000;
pub const DEFAULT_PROCEDURE_A_ITERS: u32 = 50;
/// `λ` of encoded subset-sum instances.
pub const DEFAULT_SSP_LAMBDA: f64 = 0.5;
/// Largest subset-sum size for which ground truth is attached to the report.
pub const SSP_GROUND_TRUTH_MAX_N: usize = 20;
/// Hull membership tolerance reported alongside the solver output.
pub const HULL_REPORT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Classify,
    Sequence,
    Estimate,
    Volume,
    SspEncode,
    Oracle,
    Figures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Classify => "classify",
            Command::Sequence => "sequence",
            Command::Estimate => "estimate",
            Command::Volume => "volume",
            Command::SspEncode => "ssp-encode",
            Command::Oracle => "oracle",
            Command::Figures => "figures",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

/// `--seed` value: an explicit integer or `auto` (drawn from the clock and recorded).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedArg {
    Explicit(u64),
    Auto,
}

impl FromStr for SeedArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(SeedArg::Auto);
        }
        s.parse().map(SeedArg::Explicit).map_err(|_| format!("seed must be a non-negative integer or `auto`, got `{s}`"))
    }
}

impl fmt::Display for SeedArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedArg::Explicit(v) => write!(f, "{v}"),
            SeedArg::Auto => f.write_str("auto"),
        }
    }
}

impl Serialize for SeedArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SeedArg::Explicit(v) => s.serialize_u64(*v),
            SeedArg::Auto => s.serialize_str("auto"),
        }
    }
}

/// Everything one invocation needs. Unset options take per-command defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Instance JSON, or subset-sum JSON for `ssp-encode`.
    pub instance_path: PathBuf,
    pub output_dir: PathBuf,
    pub lambda: Option<f64>,
    pub seed: Option<SeedArg>,
    pub samples: Option<u64>,
    pub workers: usize,
    pub i: Option<i64>,
    pub p: Option<u32>,
    pub step: Option<f64>,
    pub format: Option<Format>,
    pub r_init: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    pub threshold: Option<f64>,
    pub rounds: Option<u32>,
    pub bisect_iters: Option<u32>,
    /// Probe radius `R` for `sequence`.
    pub radius: Option<f64>,
    pub max_iter: Option<u32>,
    pub indices: Option<Vec<i64>>,
    pub offset: Option<f64>,
    pub boundary_tol: Option<f64>,
}

impl RunConfig {
    pub fn new(command: Command, instance_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            command,
            instance_path: instance_path.into(),
            output_dir: output_dir.into(),
            lambda: None,
            seed: None,
            samples: None,
            workers: 1,
            i: None,
            p: None,
            step: None,
            format: None,
            r_init: None,
            bracket: None,
            threshold: None,
            rounds: None,
            bisect_iters: None,
            radius: None,
            max_iter: None,
            indices: None,
            offset: None,
            boundary_tol: None,
        }
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(if self.command == Command::Figures { Format::Svg } else { Format::Json })
    }

    fn set_options(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut add = |set: bool, name| {
            if set {
                v.push(name)
            }
        };
        add(self.lambda.is_some(), "lambda");
        add(self.seed.is_some(), "seed");
        add(self.samples.is_some(), "samples");
        add(self.workers != 1, "workers");
        add(self.i.is_some(), "index");
        add(self.p.is_some(), "p");
        add(self.step.is_some(), "step");
        add(self.r_init.is_some(), "r-init");
        add(self.bracket.is_some(), "bracket");
        add(self.threshold.is_some(), "threshold");
        add(self.rounds.is_some(), "rounds");
        add(self.bisect_iters.is_some(), "bisect-iters");
        add(self.radius.is_some(), "radius");
        add(self.max_iter.is_some(), "max-iter");
        add(self.indices.is_some(), "indices");
        add(self.offset.is_some(), "offset");
        add(self.boundary_tol.is_some(), "boundary-tol");
        v
    }

    fn allowed_options(&self) -> &'static [&'static str] {
        match self.command {
            Command::Solve => &["lambda"],
            Command::Classify => &["lambda", "boundary-tol"],
            Command::Sequence => &["lambda", "radius", "max-iter", "indices"],
            Command::Estimate => &["lambda", "seed", "samples", "workers", "index", "step", "r-init", "bisect-iters", "boundary-tol"],
            Command::Volume => &["lambda", "seed", "samples", "workers", "index", "p", "bracket", "threshold", "rounds"],
            Command::SspEncode => &["lambda", "offset"],
            Command::Oracle => &["lambda", "seed", "samples"],
            Command::Figures => &["lambda", "indices"],
        }
    }

    fn allowed_formats(&self) -> &'static [Format] {
        match self.command {
            Command::Sequence => &[Format::Json, Format::Csv, Format::Svg],
            Command::Estimate | Command::Volume => &[Format::Json, Format::Csv],
            Command::Oracle => &[Format::Json, Format::Svg],
            Command::Figures => &[Format::Svg],
            _ => &[Format::Json],
        }
    }

    /// Checks everything that does not need the input file.
    pub fn validate(&self) -> Result<(), String> {
        let cmd = self.command.name();
        let allowed = self.allowed_options();
        if let Some(bad) = self.set_options().into_iter().find(|o| !allowed.contains(o)) {
            return Err(format!("--{bad} does not apply to `{cmd}`"));
        }
        if !self.allowed_formats().contains(&self.format()) {
            return Err(format!("`{cmd}` cannot emit format {:?}", self.format()));
        }
        if matches!(self.command, Command::Estimate | Command::Volume) && self.seed.is_none() {
            return Err(format!("`{cmd}` is randomized: pass --seed <N> or --seed auto"));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l < 1.0) {
                return Err(format!("--lambda must lie in (0, 1), got {l}"));
            }
        }
        if self.samples == Some(0) {
            return Err("--samples must be positive".into());
        }
        if self.workers == 0 {
            return Err("--workers must be at least 1".into());
        }
        if self.command == Command::Estimate {
            if let Some(i) = self.i {
                if i > -1 {
                    return Err(format!("`estimate` needs a negative --index, got {i}"));
                }
            }
        }
        if self.p == Some(0) {
            return Err("--p must be positive".into());
        }
        let positive = [("step", self.step), ("r-init", self.r_init), ("radius", self.radius), ("offset", self.offset), ("boundary-tol", self.boundary_tol)];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(format!("--{name} must be finite and positive, got {v}"));
                }
            }
        }
        if let Some((lo, hi)) = self.bracket {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(format!("--bracket needs 0 < lo < hi, got {lo},{hi}"));
            }
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t < 1.0) {
                return Err(format!("--threshold must lie in (0, 1), got {t}"));
            }
        }
        if self.rounds == Some(0) || self.bisect_iters == Some(0) || self.max_iter == Some(0) {
            return Err("--rounds, --bisect-iters and --max-iter must be positive".into());
        }
        if self.indices.as_ref().is_some_and(|v| v.is_empty()) {
            return Err("--indices must not be empty".into());
        }
        Ok(())
    }
}

/// Validated input of a run.
enum Input {
    Instance(Instance),
    Ssp(SspInstance),
}

/// Why a run stopped early.
enum Failure {
    Invalid(String),
    Compute { kind: &'static str, message: String },
}

fn invalid(e: impl fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

fn compute(kind: &'static str, e: impl fmt::Display) -> Failure {
    Failure::Compute { kind, message: e.to_string() }
}

/// Results and files accumulated by the stages of a run.
struct Output {
    results: Map<String, Value>,
    files: Vec<(String, Vec<u8>)>,
    timings: Map<String, Value>,
}

impl Output {
    fn put(&mut self, key: &str, v: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(v).expect("report values serialize"));
    }

    fn timed<R>(&mut self, stage: &str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        self.timings.insert(stage.into(), json!(t.elapsed().as_secs_f64()));
        r
    }
}

/// Runs one command and returns its exit code. Diagnostics go to standard error.
pub fn run(cfg: &RunConfig) -> i32 {
    let start = Instant::now();
    if let Err(msg) = cfg.validate() {
        eprintln!("error: {msg}");
        return EXIT_INVALID;
    }
    let input = match load(cfg) {
        Ok(i) => i,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INVALID;
        }
    };
    let seed = match resolve_seed(cfg, &input) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INVALID;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.output_dir) {
        eprintln!("error: cannot create {}: {e}", cfg.output_dir.display());
        return EXIT_INVALID;
    }
    let mut out = Output { results: Map::new(), files: Vec::new(), timings: Map::new() };
    let outcome = match (&input, cfg.command) {
        (Input::Ssp(ssp), _) => cmd_ssp_encode(cfg, ssp, &mut out),
        (Input::Instance(inst), Command::Solve) => cmd_solve(inst, &mut out),
        (Input::Instance(inst), Command::Classify) => cmd_classify(cfg, inst, &mut out),
        (Input::Instance(inst), Command::Sequence) => cmd_sequence(cfg, inst, &mut out),
        (Input::Instance(inst), Command::Estimate) => cmd_estimate(cfg, inst, seed.expect("validated"), &mut out),
        (Input::Instance(inst), Command::Volume) => cmd_volume(cfg, inst, seed.expect("validated"), &mut out),
        (Input::Instance(inst), Command::Oracle) => cmd_oracle(cfg, inst, seed, &mut out),
        (Input::Instance(inst), Command::Figures) => cmd_figures(cfg, inst, &mut out),
        (Input::Instance(_), Command::SspEncode) => unreachable!("ssp-encode loads a subset-sum instance"),
    };
    let (code, error) = match outcome {
        Ok(()) => (EXIT_OK, None),
        Err(Failure::Invalid(msg)) => {
            // Input-dependent validation failures surface before any stage writes.
            eprintln!("error: {msg}");
            return EXIT_INVALID;
        }
        Err(Failure::Compute { kind, message }) => {
            eprintln!("error: {message}");
            (EXIT_FAILED, Some(json!({ "kind": kind, "message": message })))
        }
    };
    out.timings.insert("total".into(), json!(start.elapsed().as_secs_f64()));
    let report = build_report(cfg, seed, out.results, error);
    let mut files = out.files;
    files.push((REPORT_FILE.into(), to_json_bytes(&report)));
    files.push((TIMINGS_FILE.into(), to_json_bytes(&Value::Object(out.timings))));
    for (name, bytes) in files {
        let path = cfg.output_dir.join(&name);
        if let Err(e) = std::fs::write(&path, bytes) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_FAILED;
        }
    }
    code
}

fn to_json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

/// Tool identifier embedded in reports.
pub fn tool_version() -> String {
    format!("ballpoly {}", env!("CARGO_PKG_VERSION"))
}

fn build_report(cfg: &RunConfig, seed: Option<RngSeed>, results: Map<String, Value>, error: Option<Value>) -> Value {
    let seed_v = match (seed, cfg.seed) {
        (Some(s), Some(SeedArg::Auto)) => json!({ "value": s.0, "source": "auto" }),
        (Some(s), _) => json!({ "value": s.0, "source": "explicit" }),
        (None, _) => Value::Null,
    };
    let mut r = json!({
        "tool": "ballpoly",
        "version": tool_version(),
        "command": cfg.command.name(),
        "config": cfg,
        "seed": seed_v,
        "workers": cfg.workers,
        "status": if error.is_some() { "failed" } else { "ok" },
        "results": results,
    });
    if let Some(e) = error {
        r["error"] = e;
    }
    r
}

fn load(cfg: &RunConfig) -> Result<Input, String> {
    if cfg.command == Command::SspEncode {
        return read_ssp(&cfg.instance_path).map(Input::Ssp).map_err(|e| e.to_string());
    }
    let inst = read_instance(&cfg.instance_path).map_err(|e| e.to_string())?;
    let inst = match cfg.lambda {
        Some(l) => Instance::new(inst.q, inst.c0, l).map_err(|e| e.to_string())?,
        None => inst,
    };
    let planar_only = cfg.command == Command::Figures || cfg.format() == Format::Svg;
    if planar_only && inst.dim() != 2 {
        return Err(format!("SVG output needs a planar instance, got dimension {}", inst.dim()));
    }
    Ok(Input::Instance(inst))
}

fn resolve_seed(cfg: &RunConfig, input: &Input) -> Result<Option<RngSeed>, String> {
    let randomized = match (cfg.command, input) {
        (Command::Estimate | Command::Volume, _) => true,
        (Command::Oracle, Input::Instance(inst)) => inst.dim() != 2,
        _ => false,
    };
    match (randomized, cfg.seed) {
        (false, None) => Ok(None),
        (false, Some(_)) => Err(format!("`{}` is deterministic for this input; drop --seed", cfg.command.name())),
        (true, None) => Err(format!("`{}` is randomized for this input: pass --seed <N> or --seed auto", cfg.command.name())),
        (true, Some(SeedArg::Explicit(v))) => Ok(Some(RngSeed(v))),
        (true, Some(SeedArg::Auto)) => {
            let t = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0);
            Ok(Some(RngSeed(t ^ u64::from(std::process::id())).derive(0)))
        }
    }
}

fn solve_stage(inst: &Instance, out: &mut Output) -> Result<DcSolution, Failure> {
    let hull = hull_contains(&inst.q.centers(), &inst.c0, HULL_REPORT_TOL).map_err(|e| compute("geometry", e))?;
    out.put("hull_position", hull);
    match out.timed("solve", || minimize_dc(inst, &SolverOpts::default())) {
        Ok(sol) => {
            out.put("solution", &sol);
            Ok(sol)
        }
        Err(SolveError::MaxIterExceeded { best }) => {
            out.put("solution_partial", &*best);
            Err(compute("MaxIterExceeded", SolveError::MaxIterExceeded { best }))
        }
        Err(e @ SolveError::NoFeasibleStart { .. }) => Err(compute("NoFeasibleStart", e)),
        Err(e) => Err(compute("solver", e)),
    }
}

fn classify_stage(cfg: &RunConfig, inst: &Instance, sol: &DcSolution, out: &mut Output) -> Classification {
    let tol = cfg.boundary_tol.unwrap_or(ballpoly::classifier::DEFAULT_BOUNDARY_TOL);
    let c = classify(inst, sol, tol);
    let (lo, hi) = certify_interval(&c, inst);
    out.put("classification", &c);
    out.put("interval", json!({ "r_low": lo, "r_high": hi }));
    let (lower, upper) = certified_bounds(inst, sol);
    out.put("certified_bounds", json!({ "lower": lower, "upper": upper }));
    c
}

/// Bounds on the farthest distance that hold in every case: `‖y* − C0‖` when
/// `y*` lies in the ball set, and `√(−value/λ)`, because `λ‖x − C0‖² ≤ h(x) − value`
/// on the ball set.
pub fn certified_bounds(inst: &Instance, sol: &DcSolution) -> (Option<f64>, f64) {
    let lower = (sol.h_at_y <= 0.0).then(|| sol.y_star.dist(&inst.c0));
    (lower, upper_bound(inst, sol))
}

fn cmd_solve(inst: &Instance, out: &mut Output) -> Result<(), Failure> {
    solve_stage(inst, out).map(|_| ())
}

fn cmd_classify(cfg: &RunConfig, inst: &Instance, out: &mut Output) -> Result<(), Failure> {
    let sol = solve_stage(inst, out)?;
    classify_stage(cfg, inst, &sol, out);
    Ok(())
}

fn cmd_sequence(cfg: &RunConfig, inst: &Instance, out: &mut Output) -> Result<(), Failure> {
    let r_sq = match cfg.radius {
        Some(r) => r * r,
        None => {
            let sol = solve_stage(inst, out)?;
            sol.r_lower * sol.r_lower
        }
    };
    out.put("r_sq", r_sq);
    let max_iter = cfg.max_iter.unwrap_or(DEFAULT_PROCEDURE_A_ITERS);
    let pa = out.timed("procedure_a", || procedure_a(inst, max_iter, r_sq)).map_err(|e| compute("sequence", e))?;
    out.put("procedure_a", &pa);
    let indices = cfg.indices.clone().unwrap_or_else(|| DEFAULT_FIGURE_INDICES.to_vec());
    let elements = indices.iter().map(|&i| element_at(inst, i, r_sq)).collect::<Result<Vec<_>, _>>().map_err(|e| compute("sequence", e))?;
    out.put("elements", &elements);
    match cfg.format() {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["index".to_string(), "k".into(), "radius_sq".into(), "empty".into()];
            header.extend((0..inst.dim()).map(|d| format!("c{d}")));
            w.write_record(&header).map_err(|e| compute("csv", e))?;
            for e in &elements {
                for k in 0..e.centers.len() {
                    let mut row = vec![e.index.to_string(), k.to_string(), e.radii_sq[k].to_string(), e.empty[k].to_string()];
                    row.extend(e.centers[k].coords.iter().map(|c| c.to_string()));
                    w.write_record(&row).map_err(|e| compute("csv", e))?;
                }
            }
            out.files.push(("elements.csv".into(), w.into_inner().map_err(|e| compute("csv", e))?));
        }
        Format::Svg => {
            let svg = figures::sequence_svg(inst, r_sq.sqrt(), &indices).map_err(|e| compute("figures", e))?;
            out.files.push(("sequence.svg".into(), svg.into_bytes()));
        }
        Format::Json => {}
    }
    Ok(())
}

/// Starting radius for Procedure B: the distance of `y*` when it lies in the
/// ball set (a certified lower bound), otherwise the solver lower bound capped by
/// the upper bound, with a small fallback when both vanish.
pub fn default_r_init(inst: &Instance, sol: &DcSolution) -> f64 {
    let (lower, upper) = certified_bounds(inst, sol);
    let r = lower.unwrap_or(sol.r_lower.min(upper));
    if r > 1e-9 {
        r
    } else {
        1e-3 * upper.max(1e-3)
    }
}

/// `√(−value/λ)`, an upper bound on the farthest distance.
pub fn upper_bound(inst: &Instance, sol: &DcSolution) -> f64 {
    (-sol.value / inst.lambda).max(0.0).sqrt()
}

/// Default volume bracket: half the starting radius up to the certified upper bound plus 1 %.
pub fn default_bracket(inst: &Instance, sol: &DcSolution) -> (f64, f64) {
    (0.5 * default_r_init(inst, sol), 1.01 * upper_bound(inst, sol))
}

fn trace_csv(rep: &EstimateReport) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["phase", "r", "samples", "hits", "ratio", "wilson_low", "wilson_high"]).map_err(|e| compute("csv", e))?;
    let rows = |phase: &'static str, t: &[TracePoint]| t.iter().map(move |p| (phase, *p)).collect::<Vec<_>>();
    for (phase, p) in rows("initial", &rep.stats_trace).into_iter().chain(rows("refine", &rep.refinement_trace)) {
        let s = p.stats;
        w.write_record([phase.to_string(), p.r.to_string(), s.samples.to_string(), s.hits.to_string(), s.ratio.to_string(), s.wilson_low.to_string(), s.wilson_high.to_string()])
            .map_err(|e| compute("csv", e))?;
    }
    w.into_inner().map_err(|e| compute("csv", e))
}

fn estimator_kind(e: &ballpoly::EstimateError) -> &'static str {
    use ballpoly::EstimateError::*;
    match e {
        NoInitialHit { .. } => "NoInitialHit",
        NoMissFound { .. } => "NoMissFound",
        InconsistentBracket { .. } => "InconsistentBracket",
        ReversedBracket => "ReversedBracket",
        ZeroDenominator => "ZeroDenominator",
        InvalidArgument(_) => "InvalidArgument",
        Sample(_) => "Sample",
    }
}

fn cmd_estimate(cfg: &RunConfig, inst: &Instance, seed: RngSeed, out: &mut Output) -> Result<(), Failure> {
    let sol = solve_stage(inst, out)?;
    let class = classify_stage(cfg, inst, &sol, out);
    let mut p = ProcedureBParams::new(cfg.r_init.unwrap_or_else(|| default_r_init(inst, &sol)), cfg.samples.unwrap_or(DEFAULT_ESTIMATE_SAMPLES), seed);
    p.i = cfg.i.unwrap_or(DEFAULT_BACKWARD_INDEX);
    p.step = cfg.step;
    p.workers = cfg.workers;
    if let Some(b) = cfg.bisect_iters {
        p.bisect_iters = b;
    }
    out.put("params", p);
    let mut rep = out.timed("estimate", || procedure_b(inst, &p)).map_err(|e| compute(estimator_kind(&e), e))?;
    rep.classification = Some(class);
    if cfg.format() == Format::Csv {
        out.files.push(("trace.csv".into(), trace_csv(&rep)?));
    }
    out.put("estimate", rep);
    Ok(())
}

fn cmd_volume(cfg: &RunConfig, inst: &Instance, seed: RngSeed, out: &mut Output) -> Result<(), Failure> {
    let sol = solve_stage(inst, out)?;
    let class = classify_stage(cfg, inst, &sol, out);
    let bracket = cfg.bracket.unwrap_or_else(|| default_bracket(inst, &sol));
    let mut p = VolumeParams::new(bracket, cfg.samples.unwrap_or(DEFAULT_VOLUME_SAMPLES), seed);
    p.p = cfg.p.unwrap_or(DEFAULT_VOLUME_P);
    p.i = cfg.i.unwrap_or(if cfg.p.is_some() { -(p.p as i64) } else { DEFAULT_VOLUME_INDEX });
    p.threshold = cfg.threshold.unwrap_or(DEFAULT_THRESHOLD);
    p.rounds = cfg.rounds.unwrap_or(DEFAULT_VOLUME_ROUNDS);
    p.workers = cfg.workers;
    out.put("params", p);
    let mut rep = out.timed("volume", || volume_bisect(inst, &p)).map_err(|e| compute(estimator_kind(&e), e))?;
    rep.classification = Some(class);
    if cfg.format() == Format::Csv {
        out.files.push(("trace.csv".into(), trace_csv(&rep)?));
    }
    out.put("estimate", rep);
    Ok(())
}

fn cmd_oracle(cfg: &RunConfig, inst: &Instance, seed: Option<RngSeed>, out: &mut Output) -> Result<(), Failure> {
    let res = if inst.dim() == 2 {
        out.put("method", "exact-planar");
        out.timed("oracle", || farthest_2d(inst))
    } else {
        let n = cfg.samples.unwrap_or(DEFAULT_ORACLE_SAMPLES);
        out.put("method", "boundary-sampling");
        out.put("samples_per_ball", n);
        out.timed("oracle", || farthest_by_sampling(inst, n as usize, seed.expect("validated")))
    };
    let res = res.map_err(|e| compute("oracle", e))?;
    if cfg.format() == Format::Svg {
        let svg = figures::q_svg(inst, res.r0, &res.maximizers).map_err(|e| compute("figures", e))?;
        out.files.push(("oracle.svg".into(), svg.into_bytes()));
    }
    out.put("oracle", res);
    Ok(())
}

fn cmd_figures(cfg: &RunConfig, inst: &Instance, out: &mut Output) -> Result<(), Failure> {
    let res = farthest_2d(inst).map_err(|e| compute("oracle", e))?;
    out.put("oracle", &res);
    let indices = cfg.indices.clone().unwrap_or_else(|| DEFAULT_FIGURE_INDICES.to_vec());
    let files = out.timed("figures", || emit_figures(inst, res.r0, &indices, &cfg.output_dir)).map_err(|e| compute("figures", e))?;
    let names: Vec<String> = files.iter().map(|p| file_name(p)).collect();
    out.put("indices", &indices);
    out.put("files", names);
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn cmd_ssp_encode(cfg: &RunConfig, ssp: &SspInstance, out: &mut Output) -> Result<(), Failure> {
    let enc = encode(ssp, cfg.offset).map_err(invalid)?;
    let lambda = cfg.lambda.unwrap_or(DEFAULT_SSP_LAMBDA);
    let inst = enc.instance(lambda).map_err(invalid)?;
    out.files.push(("instance.json".into(), (instance_to_json(&inst) + "\n").into_bytes()));
    out.put("ssp", ssp);
    out.put(
        "encoding",
        json!({
            "lambda": lambda,
            "beta": enc.beta,
            "offset_param": enc.offset_param,
            "c0": enc.c0,
            "sphere_center": enc.sphere_center,
            "sphere_radius": enc.sphere_radius,
            "threshold": enc.threshold,
            "gap": enc.gap,
            "kept_balls": enc.balls.len(),
            "imprints": enc.imprints,
            "dropped": enc.dropped,
        }),
    );
    if ssp.n() <= SSP_GROUND_TRUTH_MAX_N.min(MAX_BRUTE_FORCE_N) {
        let truth = brute_force_ssp(ssp).map_err(|e| compute("ssp", e))?;
        let corner = corner_enumeration_r0(&enc).map_err(|e| compute("ssp", e))?;
        let decision = corner.as_ref().map(|(r0, _)| decide_by_distance(ssp, *r0, ballpoly::ssp::CORNER_TOL));
        out.put(
            "ground_truth",
            json!({
                "brute_force": truth,
                "corner_r0": corner.as_ref().map(|c| c.0),
                "corner": corner.map(|c| c.1),
                "decision": decision,
            }),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_parses_integers_and_auto() {
        assert_eq!("17".parse::<SeedArg>(), Ok(SeedArg::Explicit(17)));
        assert_eq!("auto".parse::<SeedArg>(), Ok(SeedArg::Auto));
        assert!("-1".parse::<SeedArg>().is_err());
        assert_eq!(serde_json::to_string(&SeedArg::Auto).unwrap(), "\"auto\"");
    }

    #[test]
    fn validation_rejects_bad_flags() {
        let base = RunConfig::new(Command::Estimate, "x.json", "out");
        assert!(base.validate().unwrap_err().contains("--seed"));
        let mut c = base.clone();
        c.seed = Some(SeedArg::Explicit(1));
        assert!(c.validate().is_ok());
        c.i = Some(2);
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(Command::Solve, "x.json", "out");
        c.samples = Some(10);
        assert!(c.validate().unwrap_err().contains("--samples"));
        let mut c = RunConfig::new(Command::Volume, "x.json", "out");
        c.seed = Some(SeedArg::Auto);
        c.bracket = Some((1.0, 0.5));
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(Command::Figures, "x.json", "out");
        c.format = Some(Format::Csv);
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(Command::Solve, "x.json", "out");
        c.lambda = Some(1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_format_depends_on_command() {
        assert_eq!(RunConfig::new(Command::Figures, "a", "b").format(), Format::Svg);
        assert_eq!(RunConfig::new(Command::Solve, "a", "b").format(), Format::Json);
    }

    #[test]
    fn report_keys_are_sorted_and_carry_provenance() {
        let cfg = RunConfig::new(Command::Solve, "a.json", "out");
        let r = build_report(&cfg, Some(RngSeed(5)), Map::new(), None);
        let text = String::from_utf8(to_json_bytes(&r)).unwrap();
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("command") < pos("config") && pos("config") < pos("results") && pos("seed") < pos("status"));
        assert_eq!(r["seed"]["value"], 5);
        assert_eq!(r["version"], tool_version());
        assert_eq!(r["workers"], 1);
    }
}
