//! Scenario files: one JSON document per run, validated before anything executes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bent_guide::BentGuideSpec;
use crate::biphoton::{
    fwhm_omega_to_tau_fourier, tau_from_power_spectrum_std, CouplingSpec, JsaGridSpec, PumpSpec, SpdcSetup,
};
use crate::dispersion::{omega_from_wavelength, CrystalSpec, Polarization};
use crate::fiber_prop::FiberSpec;
use crate::photon_stats::LightState;
use crate::rect_guide::{GuideKind, ModeFamily, RectGuideSpec};
use crate::sellmeier_fit::Weighting;

use super::locate::LineIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Dispersion,
    Phasematch,
    FitSellmeier,
    Jsa,
    Fiber,
    Rectguide,
    Bentguide,
    Stats,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Dispersion => "dispersion",
            CommandKind::Phasematch => "phasematch",
            CommandKind::FitSellmeier => "fit-sellmeier",
            CommandKind::Jsa => "jsa",
            CommandKind::Fiber => "fiber",
            CommandKind::Rectguide => "rectguide",
            CommandKind::Bentguide => "bentguide",
            CommandKind::Stats => "stats",
        }
    }

    fn needs_crystal(self) -> bool {
        matches!(
            self,
            CommandKind::Dispersion | CommandKind::Phasematch | CommandKind::FitSellmeier | CommandKind::Jsa | CommandKind::Fiber
        )
    }
}

/// Either an explicit list or `count` evenly spaced values from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Samples {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Samples {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Samples::List(v) => v.clone(),
            Samples::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|i| start + (stop - start) * i as f64 / (*n - 1) as f64).collect(),
            },
        }
    }

    fn check_positive(&self, path: &str, d: &mut Vec<Diagnostic>) {
        match self {
            Samples::List(v) => {
                if v.is_empty() {
                    d.push(Diagnostic::new(path, "needs at least one value"));
                }
                for (i, x) in v.iter().enumerate() {
                    positive(d, &format!("{path}/{i}"), *x);
                }
            }
            Samples::Range { start, stop, count } => {
                positive(d, &format!("{path}/start"), *start);
                positive(d, &format!("{path}/stop"), *stop);
                if *count == 0 {
                    d.push(Diagnostic::new(&format!("{path}/count"), "must be at least 1"));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionBlock {
    pub wavelengths_um: Samples,
    #[serde(default)]
    pub polarizations: Option<Vec<Polarization>>,
    #[serde(default)]
    pub temperature_k: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub pump_nm: Samples,
    #[serde(default)]
    pub polarizations: Option<[Polarization; 3]>,
    #[serde(default)]
    pub qpm_sign: Option<i32>,
    #[serde(default)]
    pub qpm_order: Option<i32>,
    #[serde(default)]
    pub temperature_k: Option<f64>,
    #[serde(default)]
    pub pump_angles: Option<(f64, f64)>,
    #[serde(default)]
    pub signal_angles: Option<(f64, f64)>,
    #[serde(default)]
    pub window_nm: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticBlock {
    pub pump_nm: Samples,
    pub noise_fraction: f64,
    /// Values of the free coefficients used to generate the data; the
    /// crystal's own values when absent.
    #[serde(default)]
    pub truth: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBlock {
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SyntheticBlock>,
    #[serde(default)]
    pub free: Option<Vec<usize>>,
    #[serde(default)]
    pub axis: Option<Polarization>,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    #[serde(default)]
    pub temperature_k: Option<f64>,
    #[serde(default)]
    pub window_nm: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DurationKind {
    /// τ_p of the amplitude envelope, fs.
    AmplitudeTau,
    /// Inverse standard deviation of the pump power spectrum, fs.
    PowerStdInverse,
    /// FWHM of the pump power spectrum, PHz.
    SpectralFwhm,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Duration {
    pub kind: DurationKind,
    pub value: f64,
}

impl Duration {
    pub fn amplitude_tau(&self) -> f64 {
        match self.kind {
            DurationKind::AmplitudeTau => self.value,
            DurationKind::PowerStdInverse => tau_from_power_spectrum_std(1.0 / self.value),
            DurationKind::SpectralFwhm => fwhm_omega_to_tau_fourier(self.value),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpBlock {
    #[serde(default)]
    pub wavelength_nm: Option<f64>,
    #[serde(default)]
    pub frequency_phz: Option<f64>,
    pub duration: Duration,
    pub width_um: f64,
}

fn default_pols() -> [Polarization; 3] {
    [Polarization::Z; 3]
}
fn default_sign() -> i32 {
    -1
}
fn default_order() -> i32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsaBlock {
    pub pump: PumpBlock,
    pub coupling: CouplingSpec,
    #[serde(default = "default_pols")]
    pub polarizations: [Polarization; 3],
    #[serde(default = "default_sign")]
    pub qpm_sign: i32,
    #[serde(default = "default_order")]
    pub qpm_order: i32,
    #[serde(default)]
    pub temperature_k: Option<f64>,
    #[serde(default)]
    pub signal_window_nm: Option<(f64, f64)>,
    pub grid: JsaGridSpec,
}

impl JsaBlock {
    pub fn pump(&self) -> PumpSpec {
        let central_frequency = match (self.pump.frequency_phz, self.pump.wavelength_nm) {
            (Some(f), _) => f,
            (None, Some(nm)) => omega_from_wavelength(nm * 1e-3),
            (None, None) => f64::NAN,
        };
        PumpSpec { central_frequency, tau_fs: self.pump.duration.amplitude_tau(), width_um: self.pump.width_um }
    }

    pub fn setup(&self, crystal: CrystalSpec) -> SpdcSetup {
        let t = self.temperature_k.unwrap_or(crystal.t0_kelvin);
        let mut s = SpdcSetup::new(crystal, self.polarizations, self.qpm_sign, t);
        s.qpm_order = self.qpm_order;
        s.signal_window_nm = self.signal_window_nm;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiberMethod {
    #[default]
    Stationary,
    Exact,
    Both,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberBlock {
    pub gvd_s2_per_m: f64,
    pub length_m: f64,
    #[serde(default)]
    pub method: FiberMethod,
}

impl FiberBlock {
    pub fn spec(&self) -> FiberSpec {
        FiberSpec { gvd_s2_per_m: self.gvd_s2_per_m, length_m: self.length_m }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectBlock {
    pub guide: RectGuideSpec,
    #[serde(default)]
    pub frequency_thz: Option<f64>,
    #[serde(default)]
    pub wavelength_um: Option<f64>,
    #[serde(default)]
    pub families: Option<Vec<ModeFamily>>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BentBlock {
    #[serde(default)]
    pub guidance_margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub rate: f64,
    pub horizon: f64,
    #[serde(default = "one_rep")]
    pub repetitions: usize,
    /// Beam-splitter transmission for a two-detector run.
    #[serde(default)]
    pub split: Option<f64>,
}

fn one_rep() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsBlock {
    #[serde(default)]
    pub state: Option<String>,
    #[serde(default)]
    pub simulate: Option<SimulateBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub command: CommandKind,
    #[serde(default)]
    pub crystal: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub dispersion: Option<DispersionBlock>,
    #[serde(default)]
    pub phasematch: Option<SweepBlock>,
    #[serde(default)]
    pub fit: Option<FitBlock>,
    #[serde(default)]
    pub jsa: Option<JsaBlock>,
    #[serde(default)]
    pub fiber: Option<FiberBlock>,
    #[serde(default)]
    pub rect: Option<RectBlock>,
    #[serde(default)]
    pub spec: Option<BentGuideSpec>,
    #[serde(default)]
    pub bent: Option<BentBlock>,
    #[serde(default)]
    pub stats: Option<StatsBlock>,
}

/// One violated invariant, located by JSON pointer and source line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
    pub line: usize,
}

impl Diagnostic {
    fn new(path: &str, message: impl Into<String>) -> Self {
        Self { path: path.to_string(), message: message.into(), line: 0 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
}

/// A parsed scenario with its paths resolved against the scenario's directory.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub path: PathBuf,
    pub base: PathBuf,
    pub scenario: Scenario,
    pub crystal: Option<CrystalSpec>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Loaded {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

/// Reads, parses and validates a scenario file.
pub fn load(path: &Path) -> Result<Loaded, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let parse_error = |e: serde_json::Error| {
        let message = e.to_string();
        // serde appends the position, which the caller prints separately
        let message = message.rsplit_once(" at line ").map_or(message.as_str(), |(m, _)| m).to_string();
        ScenarioError::Parse { path: path.display().to_string(), line: e.line().max(1), column: e.column(), message }
    };
    // A bare bent-guide spec stands for a one-block bentguide scenario.
    let bare = serde_json::from_str::<serde_json::Value>(&text)
        .ok()
        .filter(|v| v.get("command").is_none() && v.get("inner_radius").is_some());
    let is_bare = bare.is_some();
    let scenario: Scenario = match bare {
        Some(spec) => serde_json::from_value(serde_json::json!({ "command": "bentguide", "spec": spec })).map_err(parse_error)?,
        None => serde_json::from_str(&text).map_err(parse_error)?,
    };
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut loaded = Loaded { path: path.to_path_buf(), base, scenario, crystal: None, diagnostics: Vec::new() };
    let mut diags = validate(&mut loaded);
    let index = LineIndex::new(&text);
    for d in &mut diags {
        let pointer = if is_bare { d.path.strip_prefix("/spec").unwrap_or(&d.path) } else { &d.path };
        d.line = index.line(pointer);
    }
    loaded.diagnostics = diags;
    Ok(loaded)
}

fn positive(d: &mut Vec<Diagnostic>, path: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        d.push(Diagnostic::new(path, format!("must be positive, got {v}")));
    }
}

fn window(d: &mut Vec<Diagnostic>, path: &str, w: Option<(f64, f64)>) {
    if let Some((lo, hi)) = w {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            d.push(Diagnostic::new(path, format!("needs 0 < lo < hi, got [{lo}, {hi}]")));
        }
    }
}

fn sign(d: &mut Vec<Diagnostic>, path: &str, s: i32) {
    if s.abs() != 1 {
        d.push(Diagnostic::new(path, format!("must be +1 or -1, got {s}")));
    }
}

fn polarizations(d: &mut Vec<Diagnostic>, path: &str, pols: &[Polarization], crystal: Option<&CrystalSpec>) {
    let Some(c) = crystal else { return };
    for (i, p) in pols.iter().enumerate() {
        if let Err(e) = c.sellmeier(*p) {
            d.push(Diagnostic::new(&format!("{path}/{i}"), e.to_string()));
        }
    }
}

fn require<T>(d: &mut Vec<Diagnostic>, block: &Option<T>, name: &str, cmd: CommandKind) {
    if block.is_none() {
        d.push(Diagnostic::new(&format!("/{name}"), format!("block is required by `{}`", cmd.name())));
    }
}

fn validate(loaded: &mut Loaded) -> Vec<Diagnostic> {
    let mut d = Vec::new();
    let s = loaded.scenario.clone();
    let cmd = s.command;

    if cmd.needs_crystal() {
        match &s.crystal {
            None => d.push(Diagnostic::new("/crystal", format!("a crystal file is required by `{}`", cmd.name()))),
            Some(rel) => {
                let p = loaded.resolve(rel);
                if !p.is_file() {
                    d.push(Diagnostic::new("/crystal", format!("file not found: {}", p.display())));
                } else {
                    match CrystalSpec::from_json_str(&std::fs::read_to_string(&p).unwrap_or_default()) {
                        Ok(c) => loaded.crystal = Some(c),
                        Err(e) => d.push(Diagnostic::new("/crystal", format!("{}: {e}", p.display()))),
                    }
                }
            }
        }
    }
    let crystal = loaded.crystal.as_ref();

    match cmd {
        CommandKind::Dispersion => {
            require(&mut d, &s.dispersion, "dispersion", cmd);
            if let Some(b) = &s.dispersion {
                b.wavelengths_um.check_positive("/dispersion/wavelengths_um", &mut d);
                if let Some(p) = &b.polarizations {
                    polarizations(&mut d, "/dispersion/polarizations", p, crystal);
                }
                if let Some(t) = b.temperature_k {
                    positive(&mut d, "/dispersion/temperature_k", t);
                }
            }
        }
        CommandKind::Phasematch => {
            require(&mut d, &s.phasematch, "phasematch", cmd);
            if let Some(b) = &s.phasematch {
                b.pump_nm.check_positive("/phasematch/pump_nm", &mut d);
                if let Some(p) = &b.polarizations {
                    polarizations(&mut d, "/phasematch/polarizations", p, crystal);
                }
                if let Some(x) = b.qpm_sign {
                    sign(&mut d, "/phasematch/qpm_sign", x);
                }
                if let Some(o) = b.qpm_order {
                    if o < 1 {
                        d.push(Diagnostic::new("/phasematch/qpm_order", "must be at least 1"));
                    }
                }
                if let Some(t) = b.temperature_k {
                    positive(&mut d, "/phasematch/temperature_k", t);
                }
                window(&mut d, "/phasematch/window_nm", b.window_nm);
            }
        }
        CommandKind::FitSellmeier => {
            require(&mut d, &s.fit, "fit", cmd);
            if let Some(b) = &s.fit {
                validate_fit(&mut d, b, loaded, crystal);
            }
        }
        CommandKind::Jsa | CommandKind::Fiber => {
            require(&mut d, &s.jsa, "jsa", cmd);
            if let Some(b) = &s.jsa {
                validate_jsa(&mut d, b, crystal);
            }
            if cmd == CommandKind::Fiber {
                require(&mut d, &s.fiber, "fiber", cmd);
                if let Some(f) = &s.fiber {
                    if !f.gvd_s2_per_m.is_finite() {
                        d.push(Diagnostic::new("/fiber/gvd_s2_per_m", "must be finite"));
                    }
                    if !(f.length_m >= 0.0 && f.length_m.is_finite()) {
                        d.push(Diagnostic::new("/fiber/length_m", format!("must be non-negative, got {}", f.length_m)));
                    }
                }
            }
        }
        CommandKind::Rectguide => {
            require(&mut d, &s.rect, "rect", cmd);
            if let Some(b) = &s.rect {
                validate_rect(&mut d, b);
            }
        }
        CommandKind::Bentguide => {
            require(&mut d, &s.spec, "spec", cmd);
            if let Some(spec) = &s.spec {
                for (field, message) in spec.violations() {
                    d.push(Diagnostic::new(&format!("/spec/{field}"), message));
                }
            }
            if let Some(m) = s.bent.and_then(|b| b.guidance_margin) {
                if !(m >= 0.0 && m.is_finite()) {
                    d.push(Diagnostic::new("/bent/guidance_margin", format!("must be non-negative, got {m}")));
                }
            }
        }
        CommandKind::Stats => {
            require(&mut d, &s.stats, "stats", cmd);
            if let Some(b) = &s.stats {
                if b.state.is_none() && b.simulate.is_none() {
                    d.push(Diagnostic::new("/stats", "needs `state` or `simulate`"));
                }
                if let Some(st) = &b.state {
                    match st.parse::<LightState>().map(|x| x.moments()) {
                        Ok(Ok(_)) => {}
                        Ok(Err(e)) => d.push(Diagnostic::new("/stats/state", e.to_string())),
                        Err(e) => d.push(Diagnostic::new("/stats/state", e.to_string())),
                    }
                }
                if let Some(sim) = &b.simulate {
                    positive(&mut d, "/stats/simulate/rate", sim.rate);
                    positive(&mut d, "/stats/simulate/horizon", sim.horizon);
                    if sim.repetitions == 0 {
                        d.push(Diagnostic::new("/stats/simulate/repetitions", "must be at least 1"));
                    }
                    if let Some(p) = sim.split {
                        if !(0.0..=1.0).contains(&p) {
                            d.push(Diagnostic::new("/stats/simulate/split", format!("must lie in [0, 1], got {p}")));
                        }
                    }
                }
            }
        }
    }
    if let Some(out) = &s.output_dir {
        if out.as_os_str().is_empty() {
            d.push(Diagnostic::new("/output_dir", "must not be empty"));
        }
    }
    d
}

fn validate_fit(d: &mut Vec<Diagnostic>, b: &FitBlock, loaded: &Loaded, crystal: Option<&CrystalSpec>) {
    match (&b.dataset, &b.synthetic) {
        (Some(_), Some(_)) | (None, None) => {
            d.push(Diagnostic::new("/fit", "give exactly one of `dataset` and `synthetic`"));
        }
        (Some(rel), None) => {
            let p = loaded.resolve(rel);
            if !p.is_file() {
                d.push(Diagnostic::new("/fit/dataset", format!("file not found: {}", p.display())));
            }
        }
        (None, Some(syn)) => {
            syn.pump_nm.check_positive("/fit/synthetic/pump_nm", d);
            if !(0.0..=0.05).contains(&syn.noise_fraction) {
                d.push(Diagnostic::new(
                    "/fit/synthetic/noise_fraction",
                    format!("must lie in [0, 0.05], got {}", syn.noise_fraction),
                ));
            }
        }
    }
    let free = b.free.clone().unwrap_or_else(|| vec![0, 1, 2]);
    if free.is_empty() {
        d.push(Diagnostic::new("/fit/free", "needs at least one coefficient"));
    }
    for (i, k) in free.iter().enumerate() {
        if *k >= 5 || free[..i].contains(k) {
            d.push(Diagnostic::new(&format!("/fit/free/{i}"), format!("must be a distinct index in 0..5, got {k}")));
        }
    }
    if let Some(start) = &b.start {
        if start.len() != free.len() {
            d.push(Diagnostic::new("/fit/start", format!("needs {} values, got {}", free.len(), start.len())));
        }
    }
    if let Some(truth) = b.synthetic.as_ref().and_then(|s| s.truth.as_ref()) {
        if truth.len() != free.len() {
            d.push(Diagnostic::new("/fit/synthetic/truth", format!("needs {} values, got {}", free.len(), truth.len())));
        }
    }
    polarizations(d, "/fit/axis", &[b.axis.unwrap_or(Polarization::Z)], crystal);
    if let Some(t) = b.temperature_k {
        positive(d, "/fit/temperature_k", t);
    }
    window(d, "/fit/window_nm", b.window_nm);
}

fn validate_jsa(d: &mut Vec<Diagnostic>, b: &JsaBlock, crystal: Option<&CrystalSpec>) {
    match (b.pump.wavelength_nm, b.pump.frequency_phz) {
        (Some(nm), None) => positive(d, "/jsa/pump/wavelength_nm", nm),
        (None, Some(f)) => positive(d, "/jsa/pump/frequency_phz", f),
        _ => d.push(Diagnostic::new("/jsa/pump", "give exactly one of `wavelength_nm` and `frequency_phz`")),
    }
    if !(b.pump.duration.value > 0.0 && b.pump.duration.value.is_finite()) {
        d.push(Diagnostic::new(
            "/jsa/pump/duration/value",
            format!("pulse duration must be positive, got {}", b.pump.duration.value),
        ));
    }
    positive(d, "/jsa/pump/width_um", b.pump.width_um);
    positive(d, "/jsa/coupling/signal_width_um", b.coupling.signal_width_um);
    positive(d, "/jsa/coupling/idler_width_um", b.coupling.idler_width_um);
    polarizations(d, "/jsa/polarizations", &b.polarizations, crystal);
    sign(d, "/jsa/qpm_sign", b.qpm_sign);
    if b.qpm_order < 1 {
        d.push(Diagnostic::new("/jsa/qpm_order", "must be at least 1"));
    }
    if let Some(t) = b.temperature_k {
        positive(d, "/jsa/temperature_k", t);
    }
    window(d, "/jsa/signal_window_nm", b.signal_window_nm);
    if b.grid.n < 16 {
        d.push(Diagnostic::new("/jsa/grid/n", format!("needs at least 16 points per axis, got {}", b.grid.n)));
    }
    if !(b.grid.range_fraction > 0.0 && b.grid.range_fraction < 0.5) {
        d.push(Diagnostic::new(
            "/jsa/grid/range_fraction",
            format!("must lie in (0, 0.5), got {}", b.grid.range_fraction),
        ));
    }
    if let Some((cs, ci)) = b.grid.center {
        positive(d, "/jsa/grid/center/0", cs);
        positive(d, "/jsa/grid/center/1", ci);
    }
}

fn validate_rect(d: &mut Vec<Diagnostic>, b: &RectBlock) {
    let g = &b.guide;
    positive(d, "/rect/guide/width_um", g.width_um);
    positive(d, "/rect/guide/height_um", g.height_um);
    let allowed: &[ModeFamily] = match g.kind {
        GuideKind::Hollow => {
            match b.frequency_thz {
                Some(f) => positive(d, "/rect/frequency_thz", f),
                None => d.push(Diagnostic::new("/rect/frequency_thz", "required for a hollow guide")),
            }
            &[ModeFamily::TE, ModeFamily::TM]
        }
        GuideKind::Dielectric => {
            if !(g.clad_index >= 1.0) {
                d.push(Diagnostic::new("/rect/guide/clad_index", format!("must be at least 1, got {}", g.clad_index)));
            }
            if !(g.core_index > g.clad_index) {
                d.push(Diagnostic::new(
                    "/rect/guide/core_index",
                    format!("must exceed clad_index {}, got {}", g.clad_index, g.core_index),
                ));
            }
            match b.wavelength_um {
                Some(l) => positive(d, "/rect/wavelength_um", l),
                None => d.push(Diagnostic::new("/rect/wavelength_um", "required for a dielectric guide")),
            }
            &[ModeFamily::Ey, ModeFamily::Ex]
        }
    };
    for (i, f) in b.families.iter().flatten().enumerate() {
        if !allowed.contains(f) {
            d.push(Diagnostic::new(&format!("/rect/families/{i}"), format!("{f:?} does not apply to this guide kind")));
        }
    }
}
