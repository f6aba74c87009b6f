//! Batch front end: scenario files in, CSV/JSON files and a JSON summary out.
//!
//! Exit codes: 0 success, 1 a golden comparison failed, 2 invalid input,
//! 3 a solver failed (outputs written so far are listed as partial).

pub mod format;
pub mod locate;
pub mod scenario;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bent_guide::{self, DEFAULT_GUIDANCE_MARGIN};
use crate::biphoton::{fit_gaussian_1d, fit_gaussian_2d, jsa_grid, marginal, phase_matched_center, Photon};
use crate::dispersion::{Axis, Polarization};
use crate::fiber_prop::{dispersion_scale, far_field_parameter, propagate_exact, propagate_stationary, time_stats_from_frequency};
use crate::golden;
use crate::phasematch::{sweep, PhaseMatchQuery};
use crate::photon_stats::{self, g2_from_moments, classify, LightState, NumberMoments};
use crate::rect_guide::{hollow_modes, marcatili_solve, GuideKind, ModeFamily};
use crate::sellmeier_fit::{fit, read_dataset, synthesize_noisy_dataset, write_dataset, SellmeierModel};

use format::{csv_float, pretty, to_rounded_json};
use scenario::{CommandKind, Diagnostic, FiberMethod, Loaded, ScenarioError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_GOLDEN_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "workbench", version, about = "SPDC, phase-matching and waveguide-mode calculations")]
struct Cli {
    /// Compare against the bundled reference tables and print a pass/fail matrix.
    #[arg(long)]
    golden: bool,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long, visible_alias = "spec", value_name = "FILE")]
    scenario: PathBuf,
    /// Output directory, overriding the scenario's `output_dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Refractive indices and wavevectors over a wavelength list.
    Dispersion(ScenarioArgs),
    /// Phase-matching solver.
    Phasematch {
        #[command(subcommand)]
        action: PhasematchCmd,
    },
    /// Fit Sellmeier coefficients to (pump, signal) wavelength pairs.
    FitSellmeier(ScenarioArgs),
    /// Joint spectral probability grid and Gaussian fits.
    Jsa(ScenarioArgs),
    /// Arrival-time statistics after fiber dispersion.
    Fiber(ScenarioArgs),
    /// Rectangular guide modes.
    Rectguide(ScenarioArgs),
    /// Curved rectangular guide modes.
    Bentguide {
        #[command(subcommand)]
        action: BentCmd,
    },
    /// Photon-number statistics.
    Stats {
        #[command(subcommand)]
        action: StatsCmd,
    },
    /// Check a scenario file and list every problem found.
    Validate {
        #[arg(value_name = "FILE")]
        file: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum PhasematchCmd {
    /// λ_VIS for each pump wavelength.
    Sweep(ScenarioArgs),
}

#[derive(Subcommand, Debug)]
enum BentCmd {
    /// Full mode table.
    Solve(ScenarioArgs),
}

#[derive(Subcommand, Debug)]
enum StatsCmd {
    /// g²(0) of a state such as fock:2, thermal:0.5, coherent or tmsv:1.
    G2 {
        #[arg(long)]
        state: String,
    },
    /// Poisson arrival times, optionally split on a beam splitter.
    Simulate {
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        split: Option<f64>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run a `stats` scenario file.
    Run(ScenarioArgs),
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("invalid input")]
    Invalid(Vec<Diagnostic>),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Output(String),
}

fn solver<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Solver(e.to_string())
}

/// Collects written files so a failed run can report them as partial.
struct Sink {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Sink {
    fn new(dir: Option<PathBuf>) -> Self {
        Self { dir, written: Vec::new() }
    }

    fn path(&mut self, name: &str) -> Result<Option<PathBuf>, Failure> {
        let Some(dir) = &self.dir else { return Ok(None) };
        fs::create_dir_all(dir).map_err(|e| Failure::Output(format!("{}: {e}", dir.display())))?;
        let p = dir.join(name);
        self.written.push(p.display().to_string());
        Ok(Some(p))
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        if let Some(p) = self.path(name)? {
            fs::write(&p, body).map_err(|e| Failure::Output(format!("{}: {e}", p.display())))?;
        }
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), Failure> {
        if self.dir.is_none() {
            return Ok(());
        }
        let mut body = header.join(",");
        body.push('\n');
        for row in rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        self.text(name, &body)
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<(), Failure> {
        self.text(name, &(pretty(value) + "\n"))
    }
}

#[derive(Serialize)]
struct Summary {
    command: String,
    status: &'static str,
    partial: bool,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    result: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn emit(summary: &Summary) {
    use std::io::Write;
    // a closed pipe downstream is not an error of the computation
    let _ = writeln!(std::io::stdout().lock(), "{}", pretty(&to_rounded_json(summary)));
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = match std::env::var("WORKBENCH_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                eprintln!("WORKBENCH_THREADS must be a positive integer, got `{v}`");
                return EXIT_INVALID;
            }
        },
        Err(_) => None,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(|| dispatch(cli)),
        Err(e) => {
            eprintln!("cannot start worker threads: {e}");
            EXIT_SOLVER
        }
    }
}

fn dispatch(cli: Cli) -> i32 {
    if cli.golden {
        let code = run_golden();
        if cli.command.is_none() {
            return code;
        }
        let next = dispatch(Cli { golden: false, command: cli.command });
        return code.max(next);
    }
    let Some(cmd) = cli.command else {
        eprintln!("no subcommand given; try --help");
        return EXIT_INVALID;
    };
    match cmd {
        Cmd::Dispersion(a) => scenario_command(CommandKind::Dispersion, &a),
        Cmd::Phasematch { action: PhasematchCmd::Sweep(a) } => scenario_command(CommandKind::Phasematch, &a),
        Cmd::FitSellmeier(a) => scenario_command(CommandKind::FitSellmeier, &a),
        Cmd::Jsa(a) => scenario_command(CommandKind::Jsa, &a),
        Cmd::Fiber(a) => scenario_command(CommandKind::Fiber, &a),
        Cmd::Rectguide(a) => scenario_command(CommandKind::Rectguide, &a),
        Cmd::Bentguide { action: BentCmd::Solve(a) } => scenario_command(CommandKind::Bentguide, &a),
        Cmd::Stats { action: StatsCmd::Run(a) } => scenario_command(CommandKind::Stats, &a),
        Cmd::Stats { action: StatsCmd::G2 { state } } => stats_g2(&state),
        Cmd::Stats { action: StatsCmd::Simulate { rate, horizon, repetitions, seed, split, out } } => {
            let block = scenario::SimulateBlock { rate, horizon, repetitions, split };
            let mut diags = Vec::new();
            for (name, v) in [("rate", rate), ("horizon", horizon)] {
                if !(v > 0.0 && v.is_finite()) {
                    diags.push(Diagnostic { path: format!("--{name}"), message: format!("must be positive, got {v}"), line: 0 });
                }
            }
            if repetitions == 0 {
                diags.push(Diagnostic { path: "--repetitions".into(), message: "must be at least 1".into(), line: 0 });
            }
            if let Some(p) = split.filter(|p| !(0.0..=1.0).contains(p)) {
                diags.push(Diagnostic { path: "--split".into(), message: format!("must lie in [0, 1], got {p}"), line: 0 });
            }
            if !diags.is_empty() {
                return report_invalid("stats", None, diags);
            }
            let mut sink = Sink::new(out);
            finish("stats", simulate(&block, seed, &mut sink), sink)
        }
        Cmd::Validate { file } => validate_command(&file),
    }
}

fn report_invalid(command: &str, file: Option<&Path>, diagnostics: Vec<Diagnostic>) -> i32 {
    for d in &diagnostics {
        match file {
            Some(f) => eprintln!("{}:{}: {}: {}", f.display(), d.line, d.path, d.message),
            None => eprintln!("{}: {}", d.path, d.message),
        }
    }
    emit(&Summary {
        command: command.to_string(),
        status: "invalid",
        partial: false,
        outputs: Vec::new(),
        result: Value::Null,
        diagnostics,
        error: None,
    });
    EXIT_INVALID
}

fn report_load_error(command: &str, e: &ScenarioError) -> i32 {
    eprintln!("{e}");
    let diag = match e {
        ScenarioError::Parse { line, message, .. } => Diagnostic { path: String::new(), message: message.clone(), line: *line },
        ScenarioError::Io { message, .. } => Diagnostic { path: String::new(), message: message.clone(), line: 0 },
    };
    emit(&Summary {
        command: command.to_string(),
        status: "invalid",
        partial: false,
        outputs: Vec::new(),
        result: Value::Null,
        diagnostics: vec![diag],
        error: None,
    });
    EXIT_INVALID
}

fn finish(command: &str, outcome: Result<Value, Failure>, sink: Sink) -> i32 {
    match outcome {
        Ok(result) => {
            emit(&Summary { command: command.into(), status: "ok", partial: false, outputs: sink.written, result, diagnostics: vec![], error: None });
            EXIT_OK
        }
        Err(Failure::Invalid(d)) => report_invalid(command, None, d),
        Err(e) => {
            eprintln!("{command}: {e}");
            let partial = !sink.written.is_empty();
            emit(&Summary {
                command: command.into(),
                status: "failed",
                partial,
                outputs: sink.written,
                result: Value::Null,
                diagnostics: vec![],
                error: Some(e.to_string()),
            });
            EXIT_SOLVER
        }
    }
}

fn load_checked(kind: CommandKind, file: &Path) -> Result<Loaded, i32> {
    let loaded = scenario::load(file).map_err(|e| report_load_error(kind.name(), &e))?;
    let mut diags = loaded.diagnostics.clone();
    if loaded.scenario.command != kind {
        let line = locate::LineIndex::new(&fs::read_to_string(file).unwrap_or_default()).line("/command");
        diags.insert(0, Diagnostic {
            path: "/command".into(),
            message: format!("scenario is for `{}`, not `{}`", loaded.scenario.command.name(), kind.name()),
            line,
        });
    }
    if !diags.is_empty() {
        return Err(report_invalid(kind.name(), Some(file), diags));
    }
    Ok(loaded)
}

fn scenario_command(kind: CommandKind, args: &ScenarioArgs) -> i32 {
    let loaded = match load_checked(kind, &args.scenario) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let dir = args.out.clone().or_else(|| loaded.scenario.output_dir.as_ref().map(|p| loaded.resolve(p)));
    let mut sink = Sink::new(dir);
    let outcome = match kind {
        CommandKind::Dispersion => dispersion(&loaded, &mut sink),
        CommandKind::Phasematch => phasematch_sweep(&loaded, &mut sink),
        CommandKind::FitSellmeier => fit_sellmeier(&loaded, &mut sink),
        CommandKind::Jsa => jsa(&loaded, &mut sink, false),
        CommandKind::Fiber => jsa(&loaded, &mut sink, true),
        CommandKind::Rectguide => rectguide(&loaded, &mut sink),
        CommandKind::Bentguide => bentguide(&loaded, &mut sink),
        CommandKind::Stats => stats_scenario(&loaded, &mut sink),
    };
    finish(kind.name(), outcome, sink)
}

fn validate_command(file: &Path) -> i32 {
    match scenario::load(file) {
        Err(e) => report_load_error("validate", &e),
        Ok(loaded) => {
            let ok = loaded.diagnostics.is_empty();
            for d in &loaded.diagnostics {
                eprintln!("{}:{}: {}: {}", file.display(), d.line, d.path, d.message);
            }
            emit(&Summary {
                command: "validate".into(),
                status: if ok { "ok" } else { "invalid" },
                partial: false,
                outputs: Vec::new(),
                result: json!({ "scenario_command": loaded.scenario.command.name(), "runnable": ok }),
                diagnostics: loaded.diagnostics,
                error: None,
            });
            if ok {
                EXIT_OK
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn run_golden() -> i32 {
    let rows = golden::run();
    for r in &rows {
        eprintln!("{}", r.describe());
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{} of {} reference checks passed", rows.len() - failed, rows.len());
    emit(&Summary {
        command: "golden".into(),
        status: if failed == 0 { "ok" } else { "mismatch" },
        partial: false,
        outputs: Vec::new(),
        result: json!({ "rows": to_rounded_json(&rows), "failed": failed }),
        diagnostics: vec![],
        error: None,
    });
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_GOLDEN_FAILED
    }
}

fn crystal(loaded: &Loaded) -> crate::dispersion::CrystalSpec {
    loaded.crystal.clone().expect("validated scenarios carry their crystal")
}

fn dispersion(loaded: &Loaded, sink: &mut Sink) -> Result<Value, Failure> {
    let block = loaded.scenario.dispersion.as_ref().expect("validated");
    let crystal = crystal(loaded);
    let pols = block.polarizations.clone().unwrap_or_else(|| {
        [(Polarization::X, &crystal.axes.x), (Polarization::Y, &crystal.axes.y), (Polarization::Z, &crystal.axes.z)]
            .into_iter()
            .filter(|(_, s)| s.is_some())
            .map(|(p, _)| p)
            .collect()
    });
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for l in block.wavelengths_um.values() {
        for p in &pols {
            let n = crystal.index(*p, l).map_err(solver)?;
            let k = crate::dispersion::wavevector_magnitude(n, l);
            rows.push(vec![csv_float(l), axis_name(*p).into(), csv_float(n), csv_float(k)]);
            table.push(json!({ "wavelength_um": l, "polarization": axis_name(*p), "index": n, "wavevector_per_um": k }));
        }
    }
    sink.csv("dispersion.csv", &["wavelength_um", "polarization", "index", "wavevector_per_um"], rows)?;
    let mut result = json!({ "crystal": crystal.name, "indices": table });
    if crystal.poling_period_um > 0.0 {
        let t = block.temperature_k.unwrap_or(crystal.t0_kelvin);
        result["poling_period_um"] = json!(crystal.poling_period(t).map_err(solver)?);
        result["temperature_k"] = json!(t);
    }
    Ok(to_rounded_json(&result))
}

fn axis_name(p: Polarization) -> &'static str {
    match p.axis() {
        Axis::X => "x",
        Axis::Y => "y",
        Axis::Z => "z",
    }
}

fn phasematch_sweep(loaded: &Loaded, sink: &mut Sink) -> Result<Value, Failure> {
    let b = loaded.scenario.phasematch.as_ref().expect("validated");
    let crystal = crystal(loaded);
    let pumps = b.pump_nm.values();
    let mut q = PhaseMatchQuery::collinear(pumps[0]);
    q.temperature_k = b.temperature_k.unwrap_or(crystal.t0_kelvin);
    if let Some(p) = b.polarizations {
        q.polarizations = p;
    }
    q.qpm_sign = b.qpm_sign.unwrap_or(q.qpm_sign);
    q.qpm_order = b.qpm_order.unwrap_or(q.qpm_order);
    q.pump_angles = b.pump_angles.unwrap_or_default();
    q.signal_angles = b.signal_angles.unwrap_or_default();
    let results = sweep(&q, &crystal, &pumps, b.window_nm);
    let mut rows = Vec::new();
    let mut solved = Vec::new();
    let mut failures = Vec::new();
    for (p, r) in pumps.iter().zip(&results) {
        match r {
            Ok(s) => {
                rows.push(vec![
                    csv_float(*p),
                    csv_float(s.signal_wavelength_nm),
                    csv_float(s.idler_wavelength_nm),
                    csv_float(s.idler_angle_rad),
                    csv_float(s.mismatch_magnitude),
                ]);
                solved.push(json!({ "pump_nm": p, "signal_nm": s.signal_wavelength_nm, "idler_nm": s.idler_wavelength_nm }));
            }
            Err(e) => failures.push(format!("pump {p} nm: {e}")),
        }
    }
    sink.csv("phasematch.csv", &["pump_nm", "signal_nm", "idler_nm", "idler_angle_rad", "mismatch_per_um"], rows)?;
    if !failures.is_empty() {
        return Err(Failure::Solver(format!("{} of {} pumps unsolved; first: {}", failures.len(), pumps.len(), failures[0])));
    }
    Ok(to_rounded_json(&json!({ "crystal": crystal.name, "solutions": solved })))
}

fn fit_sellmeier(loaded: &Loaded, sink: &mut Sink) -> Result<Value, Failure> {
    let b = loaded.scenario.fit.as_ref().expect("validated");
    let mut model = SellmeierModel::ppktp(crystal(loaded));
    model.axis = b.axis.unwrap_or(Polarization::Z);
    if let Some(free) = &b.free {
        model.free = free.clone();
    }
    model.weighting = b.weighting;
    model.window_nm = b.window_nm;
    if let Some(t) = b.temperature_k {
        model.query.temperature_k = t;
    }
    let points = match (&b.dataset, &b.synthetic) {
        (Some(rel), _) => read_dataset(loaded.resolve(rel)).map_err(|e| match e {
            crate::sellmeier_fit::FitError::BadPoint { row, message } => Failure::Invalid(vec![Diagnostic {
                path: "/fit/dataset".into(),
                message: format!("row {row}: {message}"),
                line: 0,
            }]),
            other => solver(other),
        })?,
        (None, Some(syn)) => {
            let truth = syn.truth.clone().unwrap_or_else(|| model.start());
            let pts = synthesize_noisy_dataset(&truth, &syn.pump_nm.values(), syn.noise_fraction, loaded.scenario.seed, &model)
                .map_err(solver)?;
            if let Some(p) = sink.path("dataset.csv")? {
                write_dataset(&p, &pts).map_err(solver)?;
            }
            pts
        }
        (None, None) => unreachable!("validated"),
    };
    let start = b.start.clone().unwrap_or_else(|| model.start());
    let report = fit(&points, &start, &model).map_err(solver)?;
    let mut rows = Vec::new();
    for p in &points {
        let m = model.signal_wavelength(p.pump_nm, &report.fitted).ok();
        rows.push(vec![
            csv_float(p.pump_nm),
            csv_float(p.signal_nm),
            m.map_or("nan".into(), csv_float),
            m.map_or("nan".into(), |m| csv_float(p.signal_nm - m)),
        ]);
    }
    sink.csv("fit_residuals.csv", &["pump_nm", "signal_nm", "model_nm", "residual_nm"], rows)?;
    let result = to_rounded_json(&json!({ "free": model.free, "start": start, "report": report }));
    sink.json("fit.json", &result)?;
    Ok(result)
}

fn jsa(loaded: &Loaded, sink: &mut Sink, with_fiber: bool) -> Result<Value, Failure> {
    let b = loaded.scenario.jsa.as_ref().expect("validated");
    let pump = b.pump();
    let setup = b.setup(crystal(loaded));
    let center = match b.grid.center {
        Some(c) => c,
        None => phase_matched_center(&pump, &setup).map_err(solver)?,
    };
    let spec = crate::biphoton::JsaGridSpec { center: Some(center), ..b.grid };
    let grid = jsa_grid(&pump, &b.coupling, &setup, &spec).map_err(solver)?;
    if let Some(p) = sink.path("jsa.csv")? {
        grid.write_csv(&p, ["omega_s_phz", "omega_i_phz", "probability"], csv_float).map_err(solver)?;
    }
    let moments = grid.moments();
    let fit2d = fit_gaussian_2d(&grid).map_err(solver)?;
    let mut marginals = serde_json::Map::new();
    for (name, axis) in [("signal", Photon::Signal), ("idler", Photon::Idler)] {
        let (w, v) = marginal(&grid, axis);
        let f = fit_gaussian_1d(&w, &v).map_err(solver)?;
        marginals.insert(name.into(), json!({ "center": f.center, "fwhm": f.fwhm, "standard_errors": f.standard_errors }));
    }
    let mut result = json!({
        "pump": pump,
        "center": center,
        "moments": moments,
        "fit": fit2d,
        "marginals": marginals,
    });
    if with_fiber {
        let fb = loaded.scenario.fiber.expect("validated");
        let fiber = fb.spec();
        let mut fiber_out = json!({
            "dispersion_scale_ns_per_phz": dispersion_scale(&fiber),
            "far_field_parameter": far_field_parameter(fit2d.sigma_s.min(fit2d.sigma_i), &fiber),
            "from_fit": time_stats_from_frequency(&fit2d, &fiber),
        });
        let methods: &[(&str, FiberMethod)] = match fb.method {
            FiberMethod::Stationary => &[("stationary", FiberMethod::Stationary)],
            FiberMethod::Exact => &[("exact", FiberMethod::Exact)],
            FiberMethod::Both => &[("stationary", FiberMethod::Stationary), ("exact", FiberMethod::Exact)],
        };
        for (name, m) in methods {
            let tg = match m {
                FiberMethod::Exact => propagate_exact(&grid, &fiber),
                _ => propagate_stationary(&grid, &fiber),
            }
            .map_err(solver)?;
            if let Some(p) = sink.path(&format!("time_{name}.csv"))? {
                tg.write_csv(&p, csv_float).map_err(solver)?;
            }
            fiber_out[*name] = json!(tg.stats());
        }
        result["fiber"] = fiber_out;
    }
    let result = to_rounded_json(&result);
    sink.json("summary.json", &result)?;
    Ok(result)
}

fn rectguide(loaded: &Loaded, sink: &mut Sink) -> Result<Value, Failure> {
    let b = loaded.scenario.rect.as_ref().expect("validated");
    let g = b.guide;
    let modes = match g.kind {
        GuideKind::Hollow => {
            let mut m = hollow_modes(&g, b.frequency_thz.expect("validated")).map_err(solver)?;
            if let Some(f) = &b.families {
                m.retain(|x| f.contains(&x.family));
            }
            m
        }
        GuideKind::Dielectric => {
            let fams = b.families.clone().unwrap_or_else(|| vec![ModeFamily::Ey, ModeFamily::Ex]);
            let mut all = Vec::new();
            for f in fams {
                all.extend(marcatili_solve(&g, b.wavelength_um.expect("validated"), f).map_err(solver)?);
            }
            all
        }
    };
    let rows = modes.iter().map(|m| {
        vec![
            format!("{:?}", m.family),
            m.indices.0.to_string(),
            m.indices.1.to_string(),
            csv_float(m.k_x),
            csv_float(m.k_y),
            csv_float(m.k_z),
            m.cutoff_thz.map_or(String::new(), csv_float),
        ]
    });
    sink.csv("rect_modes.csv", &["family", "index_1", "index_2", "k_x", "k_y", "k_z", "cutoff_thz"], rows.collect::<Vec<_>>())?;
    Ok(to_rounded_json(&json!({ "guide": g, "modes": modes })))
}

fn bentguide(loaded: &Loaded, sink: &mut Sink) -> Result<Value, Failure> {
    let spec = loaded.scenario.spec.expect("validated");
    let margin = loaded.scenario.bent.and_then(|b| b.guidance_margin).unwrap_or(DEFAULT_GUIDANCE_MARGIN);
    let vertical = bent_guide::vertical_roots(&spec).map_err(solver)?;
    let modes = bent_guide::solve(&spec, margin).map_err(solver)?;
    let q_max = vertical.len();
    let p_max: Vec<usize> = (1..=q_max).map(|q| modes.iter().filter(|m| m.q == q).count()).collect();
    let rows = modes.iter().map(|m| {
        vec![
            m.p.to_string(),
            m.q.to_string(),
            format!("{:?}", m.parity).to_lowercase(),
            csv_float(m.beta_w),
            csv_float(m.h),
            csv_float(m.m),
            csv_float(m.n_eff),
            csv_float(m.mean_radius),
            m.physical.to_string(),
        ]
    });
    sink.csv("bent_modes.csv", &["p", "q", "parity", "beta_w", "h", "m", "n_eff", "mean_radius_um", "physical"], rows.collect::<Vec<_>>())?;
    let table: Vec<Value> = modes
        .iter()
        .map(|m| json!({ "p": m.p, "q": m.q, "m": m.m, "n_eff": m.n_eff, "mean_radius_um": m.mean_radius, "physical": m.physical }))
        .collect();
    Ok(to_rounded_json(&json!({
        "spec": spec,
        "guidance_margin": margin,
        "q_max": q_max,
        "p_max": p_max,
        "vertical": vertical.iter().map(|v| json!({ "q": v.q, "parity": v.parity, "beta_w": v.beta_w, "h": v.h })).collect::<Vec<_>>(),
        "modes": table,
    })))
}

fn state_summary(state: &LightState) -> Result<Value, Failure> {
    let m: NumberMoments = state.moments().map_err(solver)?;
    let g2 = g2_from_moments(&m).map_err(solver)?;
    Ok(json!({ "state": state.to_string(), "mean": m.mean, "variance": m.variance, "g2": g2, "class": format!("{:?}", classify(g2)).to_lowercase() }))
}

fn stats_g2(state: &str) -> i32 {
    let parsed = match state.parse::<LightState>() {
        Ok(s) => s,
        Err(e) => {
            return report_invalid("stats", None, vec![Diagnostic { path: "--state".into(), message: e.to_string(), line: 0 }]);
        }
    };
    if let Err(e) = parsed.moments() {
        return report_invalid("stats", None, vec![Diagnostic { path: "--state".into(), message: e.to_string(), line: 0 }]);
    }
    let sink = Sink::new(None);
    finish("stats", state_summary(&parsed).map(|v| to_rounded_json(&v)), sink)
}

fn simulate(b: &scenario::SimulateBlock, seed: u64, sink: &mut Sink) -> Result<Value, Failure> {
    let first = photon_stats::simulate_poisson(b.rate, b.horizon, seed).map_err(solver)?;
    sink.text("arrivals.txt", &first.to_lines())?;
    let counts = photon_stats::repeated_counts(b.rate, b.horizon, b.repetitions, seed).map_err(solver)?;
    let m = NumberMoments::from_counts(&counts);
    let mut result = json!({
        "rate": b.rate,
        "horizon": b.horizon,
        "repetitions": b.repetitions,
        "seed": seed,
        "first_run_events": first.len(),
        "mean": m.mean,
        "variance": m.variance,
        "dispersion": m.dispersion(),
    });
    if let Some(p) = b.split {
        let (a, c) = photon_stats::branch(&first, p, seed).map_err(solver)?;
        sink.text("arrivals_transmitted.txt", &a.to_lines())?;
        sink.text("arrivals_reflected.txt", &c.to_lines())?;
        result["split"] = json!({ "transmission": p, "transmitted": a.len(), "reflected": c.len() });
    }
    Ok(to_rounded_json(&result))
}

fn stats_scenario(loaded: &Loaded, sink: &mut Sink) -> Result<Value, Failure> {
    let b = loaded.scenario.stats.as_ref().expect("validated");
    let mut result = json!({});
    if let Some(s) = &b.state {
        let state: LightState = s.parse().map_err(solver)?;
        result["state"] = state_summary(&state)?;
    }
    if let Some(sim) = &b.simulate {
        result["simulation"] = simulate(sim, loaded.scenario.seed, sink)?;
    }
    let result = to_rounded_json(&result);
    sink.json("stats.json", &result)?;
    Ok(result)
}
