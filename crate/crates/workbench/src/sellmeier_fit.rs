//! Fitting Sellmeier coefficients to measured (pump → signal) wavelength
//! pairs through the implicit phase-matching model.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{CrystalSpec, Polarization, SellmeierSet};
use crate::numerics::{least_squares, LmError, LmOptions};
use crate::phasematch::{solve_signal_wavelength, PhaseMatchError, PhaseMatchQuery};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("need at least {needed} usable points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("model has no root for pump {pump_nm} nm: {source}")]
    NoRoot { pump_nm: f64, source: PhaseMatchError },
    #[error("noise fraction {0} outside [0, 0.05]")]
    NoiseFraction(f64),
    #[error("invalid measurement at row {row}: {message}")]
    BadPoint { row: usize, message: String },
    #[error("free coefficient index {0} out of range 0..5")]
    BadFreeIndex(usize),
    #[error(transparent)]
    Optimizer(#[from] LmError),
    #[error("dataset i/o: {0}")]
    Io(String),
    #[error("a measured point lost its phase-matching root at the final coefficients")]
    LostRoots,
}

/// Half-width of the per-point root search, relative to the measured signal.
pub const LOCAL_WINDOW_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPoint {
    #[serde(rename = "lambda_pump_nm")]
    pub pump_nm: f64,
    #[serde(rename = "lambda_vis_nm")]
    pub signal_nm: f64,
    #[serde(rename = "sigma_nm")]
    pub sigma_nm: f64,
}

impl MeasurementPoint {
    fn check(&self, row: usize) -> Result<(), FitError> {
        let ok = [self.pump_nm, self.signal_nm, self.sigma_nm].iter().all(|v| *v > 0.0 && v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(FitError::BadPoint { row, message: "all fields must be positive".into() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
    InverseVariance,
}

/// Everything held fixed while the free Sellmeier coefficients move.
#[derive(Debug, Clone)]
pub struct SellmeierModel {
    /// Crystal whose `axis` set is overwritten by the trial coefficients.
    pub crystal: CrystalSpec,
    pub axis: Polarization,
    /// Template query; the pump wavelength is replaced per point.
    pub query: PhaseMatchQuery,
    pub window_nm: Option<(f64, f64)>,
    /// Indices into (a0, a1, a2, a3, a4) that the fit may move.
    pub free: Vec<usize>,
    pub weighting: Weighting,
}

impl SellmeierModel {
    /// Collinear PPKTP, all waves on the z index, fitting a0..a2.
    pub fn ppktp(crystal: CrystalSpec) -> Self {
        let mut query = PhaseMatchQuery::collinear(396.0);
        query.temperature_k = crystal.t0_kelvin;
        Self { crystal, axis: Polarization::Z, query, window_nm: None, free: vec![0, 1, 2], weighting: Weighting::Uniform }
    }

    pub fn base_set(&self) -> SellmeierSet {
        self.crystal.sellmeier(self.axis).copied().unwrap_or(SellmeierSet::constant(1.0))
    }

    /// Values of the free coefficients in the crystal as configured.
    pub fn start(&self) -> Vec<f64> {
        let all = coeff_array(&self.base_set());
        self.free.iter().map(|&i| all[i]).collect()
    }

    fn with_coeffs(&self, free: &[f64]) -> CrystalSpec {
        let mut all = coeff_array(&self.base_set());
        for (&i, v) in self.free.iter().zip(free) {
            all[i] = *v;
        }
        let set = SellmeierSet::new(all[0], all[1], all[2], all[3], all[4]);
        let mut crystal = self.crystal.clone();
        match self.axis.axis() {
            crate::dispersion::Axis::X => crystal.axes.x = Some(set),
            crate::dispersion::Axis::Y => crystal.axes.y = Some(set),
            crate::dispersion::Axis::Z => crystal.axes.z = Some(set),
        }
        crystal
    }

    /// λ_VIS(λ_p; coefficients), the phase-matching root.
    pub fn signal_wavelength(&self, pump_nm: f64, free: &[f64]) -> Result<f64, FitError> {
        self.signal_wavelength_in(pump_nm, free, self.window_nm)
    }

    fn signal_wavelength_in(&self, pump_nm: f64, free: &[f64], window_nm: Option<(f64, f64)>) -> Result<f64, FitError> {
        let crystal = self.with_coeffs(free);
        let query = PhaseMatchQuery { pump_wavelength_nm: pump_nm, ..self.query.clone() };
        solve_signal_wavelength(&query, &crystal, window_nm)
            .map(|s| s.signal_wavelength_nm)
            .map_err(|source| FitError::NoRoot { pump_nm, source })
    }

    /// Search window for one measured point: the configured window, or
    /// ±[`LOCAL_WINDOW_FRACTION`] around the measurement, kept above the pump.
    fn point_window(&self, p: &MeasurementPoint) -> (f64, f64) {
        self.window_nm.unwrap_or_else(|| {
            let half = LOCAL_WINDOW_FRACTION * p.signal_nm;
            ((p.signal_nm - half).max(p.pump_nm + 1.0), p.signal_nm + half)
        })
    }

    fn validate_free(&self) -> Result<(), FitError> {
        match self.free.iter().find(|&&i| i >= 5) {
            Some(&i) => Err(FitError::BadFreeIndex(i)),
            None => Ok(()),
        }
    }
}

fn coeff_array(s: &SellmeierSet) -> [f64; 5] {
    [s.a0, s.a1, s.a2, s.a3, s.a4]
}

/// Free-function form of [`SellmeierModel::signal_wavelength`].
pub fn model_signal_wavelength(pump_nm: f64, free: &[f64], model: &SellmeierModel) -> Result<f64, FitError> {
    model.signal_wavelength(pump_nm, free)
}

/// Σ (λ_VIS,i − model_i)² in nm².
pub fn rss(points: &[MeasurementPoint], free: &[f64], model: &SellmeierModel) -> Result<f64, FitError> {
    let predictions: Result<Vec<f64>, FitError> =
        points.par_iter().map(|p| model.signal_wavelength(p.pump_nm, free)).collect();
    Ok(predictions?.iter().zip(points).map(|(m, p)| (p.signal_nm - m).powi(2)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierFitReport {
    /// Fitted values of the free coefficients, in the order of `model.free`.
    pub fitted: Vec<f64>,
    pub uncertainties: Vec<f64>,
    /// Unweighted RSS at the fitted coefficients, nm².
    pub rss: f64,
    /// Unweighted RSS at the starting coefficients, nm².
    pub rss_literature: f64,
    pub average_error: f64,
    pub points_used: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// Levenberg-Marquardt fit of the free coefficients.
///
/// Each point's root is searched near its measured wavelength unless the
/// model sets a window. Points without a root at the starting coefficients
/// are left out; a trial step that loses the root of any remaining point is
/// treated as infeasible and rejected.
pub fn fit(points: &[MeasurementPoint], start: &[f64], model: &SellmeierModel) -> Result<SellmeierFitReport, FitError> {
    fit_with_options(points, start, model, &fit_options())
}

/// Optimizer settings for Sellmeier fits. Over a narrow pump range a0 and
/// a1 are nearly degenerate, so the fit stops once an accepted step lowers
/// the RSS by less than one part in 10⁶ instead of creeping along the valley.
pub fn fit_options() -> LmOptions {
    LmOptions { rss_tolerance: 1e-6, ..LmOptions::default() }
}

/// [`fit`] with explicit optimizer settings.
pub fn fit_with_options(
    points: &[MeasurementPoint],
    start: &[f64],
    model: &SellmeierModel,
    options: &LmOptions,
) -> Result<SellmeierFitReport, FitError> {
    model.validate_free()?;
    for (row, p) in points.iter().enumerate() {
        p.check(row)?;
    }
    let needed = model.free.len().max(4);
    if points.len() < needed {
        return Err(FitError::InsufficientData { needed, got: points.len() });
    }
    let weights: Vec<f64> = points
        .iter()
        .map(|p| match model.weighting {
            Weighting::Uniform => 1.0,
            Weighting::InverseVariance => 1.0 / p.sigma_nm,
        })
        .collect();
    let windows: Vec<(f64, f64)> = points.iter().map(|p| model.point_window(p)).collect();

    let predict = |free: &[f64], subset: &[usize]| -> Vec<Option<f64>> {
        subset.par_iter().map(|&i| model.signal_wavelength_in(points[i].pump_nm, free, Some(windows[i])).ok()).collect()
    };
    let all: Vec<usize> = (0..points.len()).collect();
    let start_pred = predict(start, &all);
    let usable: Vec<usize> = all.iter().copied().filter(|&i| start_pred[i].is_some()).collect();
    if usable.len() < needed {
        return Err(FitError::InsufficientData { needed, got: usable.len() });
    }

    let residuals = |free: &[f64]| -> Option<Vec<f64>> {
        let pred = predict(free, &usable);
        usable.iter().zip(pred).map(|(&i, m)| m.map(|m| weights[i] * (points[i].signal_nm - m))).collect()
    };
    let result = least_squares(residuals, start, options)?;

    let unweighted = |free: &[f64]| -> Option<f64> {
        let pred = predict(free, &usable);
        usable.iter().zip(pred).map(|(&i, m)| m.map(|m| (points[i].signal_nm - m).powi(2))).sum()
    };
    let rss_fit = unweighted(&result.parameters).ok_or(FitError::LostRoots)?;
    let rss_start = unweighted(start).ok_or(FitError::LostRoots)?;
    Ok(SellmeierFitReport {
        average_error: (rss_fit / usable.len() as f64).sqrt(),
        fitted: result.parameters,
        uncertainties: result.standard_errors,
        rss: rss_fit,
        rss_literature: rss_start,
        points_used: usable.len(),
        converged: result.converged,
        iterations: result.iterations,
    })
}

/// Model curve with per-point Gaussian noise of `noise_fraction` × value.
///
/// With zero noise each point carries a nominal 1 nm uncertainty.
pub fn synthesize_noisy_dataset(
    free: &[f64],
    pumps_nm: &[f64],
    noise_fraction: f64,
    seed: u64,
    model: &SellmeierModel,
) -> Result<Vec<MeasurementPoint>, FitError> {
    if !(0.0..=0.05).contains(&noise_fraction) {
        return Err(FitError::NoiseFraction(noise_fraction));
    }
    let clean: Result<Vec<f64>, FitError> = pumps_nm.par_iter().map(|&p| model.signal_wavelength(p, free)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(clean?
        .into_iter()
        .zip(pumps_nm)
        .map(|(v, &p)| {
            let sd = noise_fraction * v;
            let signal_nm = if sd > 0.0 { Normal::new(v, sd).expect("positive sd").sample(&mut rng) } else { v };
            MeasurementPoint { pump_nm: p, signal_nm, sigma_nm: if sd > 0.0 { sd } else { 1.0 } }
        })
        .collect())
}

/// Ranges (max − min) of the two Sellmeier fractions over [lo, hi] μm.
pub fn fraction_ranges(set: &SellmeierSet, lo_um: f64, hi_um: f64, samples: usize) -> (f64, f64) {
    let mut r1 = (f64::INFINITY, f64::NEG_INFINITY);
    let mut r2 = r1;
    for i in 0..samples {
        let l = lo_um + (hi_um - lo_um) * i as f64 / (samples - 1) as f64;
        let f1 = set.a1 / (l * l - set.a2);
        let f2 = set.a3 / (l * l - set.a4);
        r1 = (r1.0.min(f1), r1.1.max(f1));
        r2 = (r2.0.min(f2), r2.1.max(f2));
    }
    (r1.1 - r1.0, r2.1 - r2.0)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<MeasurementPoint>, FitError> {
    let mut reader = csv::Reader::from_path(path.as_ref()).map_err(|e| FitError::Io(e.to_string()))?;
    let mut out = Vec::new();
    for (row, rec) in reader.deserialize().enumerate() {
        let p: MeasurementPoint = rec.map_err(|e| FitError::BadPoint { row: row + 2, message: e.to_string() })?;
        p.check(row + 2)?;
        out.push(p);
    }
    Ok(out)
}

pub fn write_dataset(path: impl AsRef<Path>, points: &[MeasurementPoint]) -> Result<(), FitError> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(|e| FitError::Io(e.to_string()))?;
    for p in points {
        w.serialize(p).map_err(|e| FitError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| FitError::Io(e.to_string()))
}
