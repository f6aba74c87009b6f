//! Fiber-coupled biphoton joint spectrum: pump envelope, spatial overlap
//! θ(ω_s, ω_i), grid evaluation, marginals and Gaussian fits.
//!
//! Frequencies are angular, in rad/fs (PHz); times in fs; lengths in μm.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::dispersion::{omega_from_wavelength, wavelength_from_omega, CrystalSpec, DispersionError, Polarization};
use crate::numerics::{least_squares, GaussLegendre, LmError, LmOptions};
use crate::phasematch::{solve_signal_wavelength, PhaseMatchError, PhaseMatchQuery};

/// Gauss-Legendre order per panel of the crystal-length integral.
pub const Z_ORDER: usize = 64;
/// Cells whose pump amplitude is below e^-40 of the peak are skipped.
const PUMP_CUTOFF: f64 = 40.0;

#[derive(Debug, Error)]
pub enum BiphotonError {
    #[error("invalid {field}: {message}")]
    InvalidSpec { field: &'static str, message: String },
    #[error("transverse wavevector {k_perp} exceeds k = {k}")]
    EvanescentTransverse { k_perp: f64, k: f64 },
    #[error("every grid probability underflowed")]
    DegenerateGrid,
    #[error("fit failed: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    PhaseMatch(#[from] PhaseMatchError),
    #[error("grid i/o: {0}")]
    Io(String),
}

impl From<LmError> for BiphotonError {
    fn from(e: LmError) -> Self {
        BiphotonError::DegenerateFit(e.to_string())
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> BiphotonError {
    BiphotonError::InvalidSpec { field, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    /// Central pump frequency 2ω0, PHz.
    pub central_frequency: f64,
    /// τ_p of the amplitude envelope exp(−τ_p²(ω − 2ω0)²/2), fs.
    pub tau_fs: f64,
    /// Spatial width w_p, μm.
    pub width_um: f64,
}

impl PumpSpec {
    pub fn from_wavelength_nm(wavelength_nm: f64, tau_fs: f64, width_um: f64) -> Self {
        Self { central_frequency: omega_from_wavelength(wavelength_nm * 1e-3), tau_fs, width_um }
    }

    pub fn validate(&self) -> Result<(), BiphotonError> {
        for (field, v) in [("central_frequency", self.central_frequency), ("tau_fs", self.tau_fs), ("width_um", self.width_um)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Gaussian fiber-mode widths and central transverse wavevectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub signal_width_um: f64,
    pub idler_width_um: f64,
    /// Central transverse wavevectors of the two modes along x, 1/μm.
    #[serde(default)]
    pub transverse_offsets: (f64, f64),
}

impl CouplingSpec {
    pub fn symmetric(width_um: f64) -> Self {
        Self { signal_width_um: width_um, idler_width_um: width_um, transverse_offsets: (0.0, 0.0) }
    }

    pub fn validate(&self) -> Result<(), BiphotonError> {
        for (field, v) in [("signal_width_um", self.signal_width_um), ("idler_width_um", self.idler_width_um)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Crystal, polarizations and grating order of the down-conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdcSetup {
    pub crystal: CrystalSpec,
    /// Pump, signal and idler polarizations.
    pub polarizations: [Polarization; 3],
    pub qpm_sign: i32,
    pub qpm_order: i32,
    pub temperature_k: f64,
    /// Signal search window in nm when the crystal phase matches more than once.
    pub signal_window_nm: Option<(f64, f64)>,
}

impl SpdcSetup {
    pub fn new(crystal: CrystalSpec, polarizations: [Polarization; 3], qpm_sign: i32, temperature_k: f64) -> Self {
        Self { crystal, polarizations, qpm_sign, qpm_order: 1, temperature_k, signal_window_nm: None }
    }

    pub fn with_signal_window(self, lo_nm: f64, hi_nm: f64) -> Self {
        Self { signal_window_nm: Some((lo_nm, hi_nm)), ..self }
    }

    fn grating(&self) -> f64 {
        self.qpm_sign as f64 * self.qpm_order as f64 * self.crystal.grating_wavevector(self.temperature_k)
    }

    /// (k_p, k_s, k_i, Δk0) for collinear waves.
    fn wavevectors(&self, ws: f64, wi: f64) -> Result<(f64, f64, f64, f64), DispersionError> {
        let [pp, ps, pi] = self.polarizations;
        let kp = self.crystal.wavevector(pp, ws + wi)?;
        let ks = self.crystal.wavevector(ps, ws)?;
        let ki = self.crystal.wavevector(pi, wi)?;
        Ok((kp, ks, ki, kp - ks - ki + self.grating()))
    }

    pub fn query(&self, pump_nm: f64) -> PhaseMatchQuery {
        PhaseMatchQuery {
            pump_wavelength_nm: pump_nm,
            polarizations: self.polarizations,
            qpm_order: self.qpm_order,
            qpm_sign: self.qpm_sign,
            temperature_k: self.temperature_k,
            ..PhaseMatchQuery::collinear(pump_nm)
        }
    }
}

/// Pump spectral amplitude (√τ_p/π^¼)·exp(−τ_p²(ω − 2ω0)²/2).
pub fn pump_temporal_amplitude(omega: f64, pump: &PumpSpec) -> f64 {
    let d = omega - pump.central_frequency;
    pump.tau_fs.sqrt() / PI.powf(0.25) * (-0.5 * pump.tau_fs * pump.tau_fs * d * d).exp()
}

/// τ_p = 8 ln 2 / FWHM_ω, the conversion that turns 0.01763 PHz into 314.5 fs.
pub fn fwhm_omega_to_tau(fwhm: f64) -> f64 {
    8.0 * 2f64.ln() / fwhm
}

/// τ_p for which |A_p^t|² has the given intensity FWHM: 2√(ln 2)/FWHM_ω.
pub fn fwhm_omega_to_tau_fourier(fwhm: f64) -> f64 {
    2.0 * 2f64.ln().sqrt() / fwhm
}

/// τ_p for which |A_p^t|² has standard deviation `sigma`: 1/(√2 σ).
pub fn tau_from_power_spectrum_std(sigma: f64) -> f64 {
    1.0 / (2f64.sqrt() * sigma)
}

/// Longitudinal mismatch with transverse wavevectors (x, y) in 1/μm.
///
/// `paraxial` selects k_z ≈ k − k⊥²/(2k) over the exact square root.
pub fn phase_mismatch_longitudinal(
    ws: f64,
    wi: f64,
    ks_perp: [f64; 2],
    ki_perp: [f64; 2],
    setup: &SpdcSetup,
    paraxial: bool,
) -> Result<f64, BiphotonError> {
    let (kp, ks, ki, _) = setup.wavevectors(ws, wi)?;
    let kp_perp = [ks_perp[0] + ki_perp[0], ks_perp[1] + ki_perp[1]];
    let kz = |k: f64, q: [f64; 2]| -> Result<f64, BiphotonError> {
        let q2 = q[0] * q[0] + q[1] * q[1];
        if q2 >= k * k {
            return Err(BiphotonError::EvanescentTransverse { k_perp: q2.sqrt(), k });
        }
        Ok(if paraxial { k - q2 / (2.0 * k) } else { (k * k - q2).sqrt() })
    };
    Ok(kz(kp, kp_perp)? - kz(ks, ks_perp)? - kz(ki, ki_perp)? + setup.grating())
}

/// Spatial overlap θ(ω_s, ω_i) up to a constant.
///
/// The four transverse integrals are Gaussian and done in closed form,
/// leaving ∫dz e^{iΔk0 z} exp(½bᵀM⁻¹b)/det M(z) over the crystal.
pub fn spatial_overlap(
    ws: f64,
    wi: f64,
    pump: &PumpSpec,
    coupling: &CouplingSpec,
    setup: &SpdcSetup,
    rule: &GaussLegendre,
) -> Result<Complex64, BiphotonError> {
    let (kp, ks, ki, dk0) = setup.wavevectors(ws, wi)?;
    let wp2 = pump.width_um * pump.width_um;
    let ws2 = coupling.signal_width_um * coupling.signal_width_um;
    let wi2 = coupling.idler_width_um * coupling.idler_width_um;
    let (qs0, qi0) = coupling.transverse_offsets;
    let b = [ws2 * qs0, wi2 * qi0];
    let has_offset = qs0 != 0.0 || qi0 != 0.0;
    let offset_const = (-0.5 * (ws2 * qs0 * qs0 + wi2 * qi0 * qi0)).exp();

    let length = setup.crystal.length_um;
    let panels = 2 + (dk0.abs() * length / (2.0 * PI * 8.0)) as usize;
    let h = length / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = -0.5 * length + h * p as f64;
        for (z, w) in rule.points(lo, lo + h) {
            let m11 = Complex64::new(ws2 + wp2, z * (1.0 / kp - 1.0 / ks));
            let m22 = Complex64::new(wi2 + wp2, z * (1.0 / kp - 1.0 / ki));
            let m12 = Complex64::new(wp2, z / kp);
            let det = m11 * m22 - m12 * m12;
            let mut term = Complex64::from_polar(w, dk0 * z) / det;
            if has_offset {
                // ½ bᵀ M⁻¹ b, one transverse axis carries the offsets
                let quad = (m22 * b[0] * b[0] - m12 * 2.0 * b[0] * b[1] + m11 * b[1] * b[1]) / det;
                term *= (quad * 0.5).exp();
            }
            total += term;
        }
    }
    Ok(total * offset_const)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsaGridSpec {
    pub n: usize,
    pub range_fraction: f64,
    /// (ω_s⁰, ω_i⁰); the phase-matched pair when absent.
    #[serde(default)]
    pub center: Option<(f64, f64)>,
}

impl JsaGridSpec {
    pub fn new(n: usize, range_fraction: f64) -> Self {
        Self { n, range_fraction, center: None }
    }

    pub fn validate(&self) -> Result<(), BiphotonError> {
        if self.n < 16 {
            return Err(invalid("n", format!("need at least 16 points per axis, got {}", self.n)));
        }
        if !(self.range_fraction > 0.0 && self.range_fraction < 0.5) {
            return Err(invalid("range_fraction", format!("must lie in (0, 0.5), got {}", self.range_fraction)));
        }
        Ok(())
    }
}

/// Phase-matched (ω_s, ω_i) at the pump centre.
pub fn phase_matched_center(pump: &PumpSpec, setup: &SpdcSetup) -> Result<(f64, f64), BiphotonError> {
    let pump_nm = wavelength_from_omega(pump.central_frequency) * 1e3;
    let sol = solve_signal_wavelength(&setup.query(pump_nm), &setup.crystal, setup.signal_window_nm)?;
    let ws = omega_from_wavelength(sol.signal_wavelength_nm * 1e-3);
    Ok((ws, pump.central_frequency - ws))
}

/// Joint spectral probability on an n × n grid, row index = signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsaGrid {
    pub omega_s: Vec<f64>,
    pub omega_i: Vec<f64>,
    /// Row-major, `probability[j * n_i + k]` ↔ (ω_s[j], ω_i[k]).
    pub probability: Vec<f64>,
    pub normalized: bool,
}

impl JsaGrid {
    pub fn from_fn(omega_s: Vec<f64>, omega_i: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Self {
        let probability = omega_s.iter().flat_map(|&a| omega_i.iter().map(move |&b| (a, b))).map(|(a, b)| f(a, b)).collect();
        Self { omega_s, omega_i, probability, normalized: false }
    }

    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.probability[j * self.omega_i.len() + k]
    }

    pub fn total(&self) -> f64 {
        self.probability.iter().sum()
    }

    pub fn normalize(&mut self) -> Result<(), BiphotonError> {
        let total = self.total();
        if !(total > 0.0 && total.is_finite()) {
            return Err(BiphotonError::DegenerateGrid);
        }
        self.probability.iter_mut().for_each(|p| *p /= total);
        self.normalized = true;
        Ok(())
    }

    /// Swaps the roles of signal and idler.
    pub fn transposed(&self) -> Self {
        let (ns, ni) = (self.omega_s.len(), self.omega_i.len());
        let mut probability = vec![0.0; ns * ni];
        for j in 0..ns {
            for k in 0..ni {
                probability[k * ns + j] = self.probability[j * ni + k];
            }
        }
        Self { omega_s: self.omega_i.clone(), omega_i: self.omega_s.clone(), probability, normalized: self.normalized }
    }

    /// Probability-weighted means, standard deviations and correlation.
    pub fn moments(&self) -> Moments2D {
        weighted_moments(&self.omega_s, &self.omega_i, &self.probability)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, header: [&str; 3], fmt: impl Fn(f64) -> String) -> Result<(), BiphotonError> {
        let io = |e: csv::Error| BiphotonError::Io(e.to_string());
        let mut w = csv::Writer::from_path(path.as_ref()).map_err(io)?;
        w.write_record(header).map_err(io)?;
        let ni = self.omega_i.len();
        for (idx, p) in self.probability.iter().enumerate() {
            w.write_record([fmt(self.omega_s[idx / ni]), fmt(self.omega_i[idx % ni]), fmt(*p)]).map_err(io)?;
        }
        w.flush().map_err(|e| BiphotonError::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments2D {
    pub mean: (f64, f64),
    pub std: (f64, f64),
    pub correlation: f64,
}

/// Moments of a row-major weight table over the product grid `xs × ys`.
pub fn weighted_moments(xs: &[f64], ys: &[f64], p: &[f64]) -> Moments2D {
    let ny = ys.len();
    let total: f64 = p.iter().sum();
    let (mut mx, mut my) = (0.0, 0.0);
    for (idx, w) in p.iter().enumerate() {
        mx += w * xs[idx / ny];
        my += w * ys[idx % ny];
    }
    mx /= total;
    my /= total;
    let (mut vx, mut vy, mut cv) = (0.0, 0.0, 0.0);
    for (idx, w) in p.iter().enumerate() {
        let dx = xs[idx / ny] - mx;
        let dy = ys[idx % ny] - my;
        vx += w * dx * dx;
        vy += w * dy * dy;
        cv += w * dx * dy;
    }
    Moments2D { mean: (mx, my), std: ((vx / total).sqrt(), (vy / total).sqrt()), correlation: cv / (vx * vy).sqrt() }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// |A_p^t(ω_s + ω_i) θ(ω_s, ω_i)|² on the requested grid, normalized to unit sum.
pub fn jsa_grid(
    pump: &PumpSpec,
    coupling: &CouplingSpec,
    setup: &SpdcSetup,
    grid: &JsaGridSpec,
) -> Result<JsaGrid, BiphotonError> {
    pump.validate()?;
    coupling.validate()?;
    grid.validate()?;
    if !setup.crystal.supports(&setup.polarizations) {
        let [p, s, i] = setup.polarizations;
        for pol in [p, s, i] {
            setup.crystal.sellmeier(pol)?;
        }
    }
    let (cs, ci) = match grid.center {
        Some(c) => c,
        None => phase_matched_center(pump, setup)?,
    };
    let z = grid.range_fraction;
    let omega_s = linspace(cs * (1.0 - z), cs * (1.0 + z), grid.n);
    let omega_i = linspace(ci * (1.0 - z), ci * (1.0 + z), grid.n);
    let rule = GaussLegendre::new(Z_ORDER);

    let rows: Result<Vec<Vec<f64>>, BiphotonError> = omega_s
        .par_iter()
        .map(|&ws| {
            omega_i
                .iter()
                .map(|&wi| {
                    let d = pump.tau_fs * (ws + wi - pump.central_frequency);
                    if 0.5 * d * d > PUMP_CUTOFF {
                        return Ok(0.0);
                    }
                    let theta = spatial_overlap(ws, wi, pump, coupling, setup, &rule)?;
                    let a = pump_temporal_amplitude(ws + wi, pump);
                    Ok(a * a * theta.norm_sqr())
                })
                .collect()
        })
        .collect();
    let mut out = JsaGrid { omega_s, omega_i, probability: rows?.concat(), normalized: false };
    out.normalize()?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Photon {
    Signal,
    Idler,
}

/// Marginal distribution over one photon's frequency.
pub fn marginal(grid: &JsaGrid, axis: Photon) -> (Vec<f64>, Vec<f64>) {
    let ni = grid.omega_i.len();
    match axis {
        Photon::Signal => {
            let p = grid.probability.chunks(ni).map(|row| row.iter().sum()).collect();
            (grid.omega_s.clone(), p)
        }
        Photon::Idler => {
            let mut p = vec![0.0; ni];
            for row in grid.probability.chunks(ni) {
                for (acc, v) in p.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            (grid.omega_i.clone(), p)
        }
    }
}

/// b + a·exp(−4 ln 2 (ω − ω0)²/FWHM²) with fit diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit1D {
    pub bias: f64,
    pub amplitude: f64,
    pub center: f64,
    pub fwhm: f64,
    /// Standard errors of (bias, amplitude, center, fwhm).
    pub standard_errors: [f64; 4],
    /// Two-sided t-test p-values of the same four parameters.
    pub p_values: [f64; 4],
    pub rss: f64,
}

impl GaussianFit1D {
    pub fn sigma(&self) -> f64 {
        self.fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt())
    }

    pub fn eval(&self, omega: f64) -> f64 {
        gauss1d(&[self.bias, self.amplitude, self.center, self.fwhm], omega)
    }
}

fn gauss1d(p: &[f64], x: f64) -> f64 {
    let d = (x - p[2]) / p[3];
    p[0] + p[1] * (-4.0 * 2f64.ln() * d * d).exp()
}

pub fn fit_gaussian_1d(omega: &[f64], values: &[f64]) -> Result<GaussianFit1D, BiphotonError> {
    if omega.len() != values.len() || omega.len() < 5 {
        return Err(BiphotonError::DegenerateFit("need at least five samples".into()));
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !(hi > lo) {
        return Err(BiphotonError::DegenerateFit("samples are constant".into()));
    }
    let peak = values.iter().position(|v| *v == hi).unwrap_or(0);
    // width guess from the samples above half height
    let half = lo + 0.5 * (hi - lo);
    let above: Vec<f64> = omega.iter().zip(values).filter(|(_, v)| **v >= half).map(|(w, _)| *w).collect();
    let span = above.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - above.iter().cloned().fold(f64::INFINITY, f64::min);
    let step = (omega[omega.len() - 1] - omega[0]).abs() / (omega.len() - 1) as f64;
    let start = [lo, hi - lo, omega[peak], span.max(step)];

    // scale so the optimizer sees O(1) residuals
    let scale = 1.0 / (hi - lo);
    let opts = LmOptions { scales: Some(vec![hi - lo, hi - lo, omega[peak].abs().max(step), span.max(step)]), ..Default::default() };
    let res = least_squares(
        |p| Some(omega.iter().zip(values).map(|(w, v)| scale * (v - gauss1d(p, *w))).collect()),
        &start,
        &opts,
    )?;
    let dof = res.degrees_of_freedom.max(1) as f64;
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| BiphotonError::DegenerateFit(e.to_string()))?;
    let mut se = [0.0; 4];
    let mut pv = [0.0; 4];
    for j in 0..4 {
        // residual scaling leaves the parameter errors unchanged
        se[j] = res.standard_errors[j];
        let stat = if se[j] > 0.0 { (res.parameters[j] / se[j]).abs() } else { f64::INFINITY };
        pv[j] = if stat.is_finite() { 2.0 * (1.0 - t.cdf(stat)) } else if res.parameters[j] == 0.0 { 1.0 } else { 0.0 };
    }
    let p = &res.parameters;
    Ok(GaussianFit1D {
        bias: p[0],
        amplitude: p[1],
        center: p[2],
        fwhm: p[3].abs(),
        standard_errors: se,
        p_values: pv,
        rss: res.residual_sum_squares / (scale * scale),
    })
}

/// Bivariate normal fit of a joint distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit2D {
    pub center_s: f64,
    pub center_i: f64,
    pub sigma_s: f64,
    pub sigma_i: f64,
    pub rho: f64,
    pub amplitude: f64,
    /// Standard errors of (center_s, center_i, sigma_s, sigma_i, rho).
    pub standard_errors: [f64; 5],
    /// |ρ| within 1e-6 of one.
    pub near_singular: bool,
}

fn gauss2d(p: &[f64], ws: f64, wi: f64) -> f64 {
    let (ss, si) = (p[3].exp(), p[4].exp());
    let rho = p[5].tanh();
    let x = (ws - p[1]) / ss;
    let y = (wi - p[2]) / si;
    p[0] * (-(x * x + y * y - 2.0 * rho * x * y) / (2.0 * (1.0 - rho * rho))).exp()
}

pub fn fit_gaussian_2d(grid: &JsaGrid) -> Result<GaussianFit2D, BiphotonError> {
    let m = grid.moments();
    if !(m.std.0 > 0.0 && m.std.1 > 0.0 && m.correlation.is_finite()) {
        return Err(BiphotonError::DegenerateFit("grid support is degenerate".into()));
    }
    let ni = grid.omega_i.len();
    let peak = grid.probability.iter().cloned().fold(0.0, f64::max);
    let scale = 1.0 / peak;
    let rho0 = m.correlation.clamp(-0.99, 0.99);
    let start = [peak, m.mean.0, m.mean.1, m.std.0.ln(), m.std.1.ln(), rho0.atanh()];
    let opts = LmOptions {
        scales: Some(vec![peak, m.mean.0.abs(), m.mean.1.abs(), 1.0, 1.0, 1.0]),
        // location steps are tiny relative to the centre frequency itself
        fd_step: 1e-7,
        ..Default::default()
    };
    let res = least_squares(
        |p| {
            Some(
                grid.probability
                    .iter()
                    .enumerate()
                    .map(|(idx, v)| scale * (v - gauss2d(p, grid.omega_s[idx / ni], grid.omega_i[idx % ni])))
                    .collect(),
            )
        },
        &start,
        &opts,
    )?;
    let p = &res.parameters;
    let se = &res.standard_errors;
    let (ss, si, rho) = (p[3].exp(), p[4].exp(), p[5].tanh());
    Ok(GaussianFit2D {
        center_s: p[1],
        center_i: p[2],
        sigma_s: ss,
        sigma_i: si,
        rho,
        amplitude: p[0],
        standard_errors: [se[1], se[2], ss * se[3], si * se[4], (1.0 - rho * rho) * se[5]],
        near_singular: rho.abs() > 1.0 - 1e-6,
    })
}

/// Acceptance screen for measured spectra: every fitted parameter must be
/// significant and the model mismatch small enough for efficient SPDC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenCriteria {
    pub max_p_value: f64,
    /// 1/μm.
    pub max_mismatch: f64,
}

impl Default for ScreenCriteria {
    fn default() -> Self {
        Self { max_p_value: 0.01, max_mismatch: 1e-4 }
    }
}

impl ScreenCriteria {
    pub fn accepts(&self, fit: &GaussianFit1D, mismatch: f64) -> bool {
        // the bias may legitimately be zero, so only a, ω0 and FWHM must be significant
        fit.p_values[1..].iter().all(|p| *p < self.max_p_value) && mismatch.abs() < self.max_mismatch
    }

    /// Indices of the accepted entries.
    pub fn filter(&self, entries: &[(GaussianFit1D, f64)]) -> Vec<usize> {
        entries.iter().enumerate().filter(|(_, (f, dk))| self.accepts(f, *dk)).map(|(i, _)| i).collect()
    }
}
