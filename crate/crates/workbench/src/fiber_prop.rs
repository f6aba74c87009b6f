//! Propagation of a photon pair through two equal dispersive fibers.
//!
//! A spectral phase exp(−iβD ω²) on each photon turns the joint spectrum
//! into a joint arrival-time distribution. Far from the crystal the map is
//! the stationary-phase rescaling t = −2βD·ω.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biphoton::{weighted_moments, GaussianFit2D, JsaGrid};

/// s² (per PHz⁻²) → ns per PHz: 1e15 rad/s per PHz, 1e9 ns per s.
const S2_TO_NS_PER_PHZ: f64 = 1e24;
/// s² → fs².
const S2_TO_FS2: f64 = 1e30;

#[derive(Debug, Error)]
pub enum FiberError {
    #[error("invalid fiber: {0}")]
    InvalidFiber(String),
    #[error("stationary-phase map needs nonzero dispersion")]
    ZeroDispersion,
    #[error("quadratic phase changes by {phase_step:.3} rad between samples; refine the frequency grid")]
    GridTooCoarse { phase_step: f64 },
    #[error("frequency axis must be uniform with at least two points")]
    NonUniformGrid,
    #[error("grid i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    /// Group velocity dispersion 2β, s²/m.
    pub gvd_s2_per_m: f64,
    /// Fiber length D, m.
    pub length_m: f64,
}

impl FiberSpec {
    pub fn new(gvd_s2_per_m: f64, length_m: f64) -> Result<Self, FiberError> {
        let f = Self { gvd_s2_per_m, length_m };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), FiberError> {
        if !(self.length_m >= 0.0 && self.length_m.is_finite()) {
            return Err(FiberError::InvalidFiber(format!("length must be nonnegative, got {}", self.length_m)));
        }
        if !self.gvd_s2_per_m.is_finite() {
            return Err(FiberError::InvalidFiber("dispersion must be finite".into()));
        }
        Ok(())
    }

    /// 2βD in s².
    pub fn total_gvd(&self) -> f64 {
        self.gvd_s2_per_m * self.length_m
    }

    /// 2βD in fs², the unit that pairs with frequencies in PHz.
    fn total_gvd_fs2(&self) -> f64 {
        self.total_gvd() * S2_TO_FS2
    }
}

/// |2βD| in ns/PHz.
pub fn dispersion_scale(fiber: &FiberSpec) -> f64 {
    fiber.total_gvd().abs() * S2_TO_NS_PER_PHZ
}

/// Dimensionless 2βDσ², large in the far field where the stationary map holds.
pub fn far_field_parameter(sigma_omega: f64, fiber: &FiberSpec) -> f64 {
    fiber.total_gvd_fs2().abs() * sigma_omega * sigma_omega
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStats {
    /// Arrival-time standard deviations, ns.
    pub tau_s: f64,
    pub tau_i: f64,
    pub rho_t: f64,
}

pub fn time_stats_from_frequency(fit: &GaussianFit2D, fiber: &FiberSpec) -> TimeStats {
    let scale = dispersion_scale(fiber);
    TimeStats { tau_s: scale * fit.sigma_s, tau_i: scale * fit.sigma_i, rho_t: fit.rho }
}

/// Joint arrival-time probability; times in ns, row index = signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_s: Vec<f64>,
    pub t_i: Vec<f64>,
    pub probability: Vec<f64>,
}

impl TimeGrid {
    pub fn total(&self) -> f64 {
        self.probability.iter().sum()
    }

    pub fn stats(&self) -> TimeStats {
        let m = weighted_moments(&self.t_s, &self.t_i, &self.probability);
        TimeStats { tau_s: m.std.0, tau_i: m.std.1, rho_t: m.correlation }
    }

    pub fn transposed(&self) -> Self {
        let (ns, ni) = (self.t_s.len(), self.t_i.len());
        let mut probability = vec![0.0; ns * ni];
        for j in 0..ns {
            for k in 0..ni {
                probability[k * ns + j] = self.probability[j * ni + k];
            }
        }
        Self { t_s: self.t_i.clone(), t_i: self.t_s.clone(), probability }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, fmt: impl Fn(f64) -> String) -> Result<(), FiberError> {
        let io = |e: csv::Error| FiberError::Io(e.to_string());
        let mut w = csv::Writer::from_path(path.as_ref()).map_err(io)?;
        w.write_record(["t_s_ns", "t_i_ns", "probability"]).map_err(io)?;
        let ni = self.t_i.len();
        for (idx, p) in self.probability.iter().enumerate() {
            w.write_record([fmt(self.t_s[idx / ni]), fmt(self.t_i[idx % ni]), fmt(*p)]).map_err(io)?;
        }
        w.flush().map_err(|e| FiberError::Io(e.to_string()))
    }
}

/// Cell-by-cell remap t = −2βD·ω; probability per cell is carried over unchanged.
pub fn propagate_stationary(grid: &JsaGrid, fiber: &FiberSpec) -> Result<TimeGrid, FiberError> {
    fiber.validate()?;
    let g = fiber.total_gvd() * S2_TO_NS_PER_PHZ;
    if g == 0.0 {
        return Err(FiberError::ZeroDispersion);
    }
    let (ns, ni) = (grid.omega_s.len(), grid.omega_i.len());
    let map = |w: &[f64]| -> Vec<f64> { w.iter().map(|x| -g * x).collect() };
    let (mut t_s, mut t_i) = (map(&grid.omega_s), map(&grid.omega_i));
    let mut probability = grid.probability.clone();
    // positive dispersion reverses both axes; keep times ascending
    if g > 0.0 {
        t_s.reverse();
        t_i.reverse();
        probability = (0..ns * ni).map(|idx| grid.probability[(ns - 1 - idx / ni) * ni + (ni - 1 - idx % ni)]).collect();
    }
    Ok(TimeGrid { t_s, t_i, probability })
}

fn uniform_step(w: &[f64]) -> Result<f64, FiberError> {
    if w.len() < 2 {
        return Err(FiberError::NonUniformGrid);
    }
    let step = (w[w.len() - 1] - w[0]) / (w.len() - 1) as f64;
    let uniform = step > 0.0 && w.windows(2).all(|p| ((p[1] - p[0]) - step).abs() <= 1e-9 * step.abs().max(1e-300) + 1e-12 * w[0].abs());
    if !uniform {
        return Err(FiberError::NonUniformGrid);
    }
    Ok(step)
}

fn fft_rows(data: &mut [Complex64], row_len: usize, fft: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(row_len).for_each(|row| fft.process(row));
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// Exact quadratic-phase propagation followed by a 2D discrete Fourier transform.
///
/// The amplitude is taken as √probability with no intrinsic phase. The
/// output sum equals the input sum up to rounding (discrete Parseval).
pub fn propagate_exact(grid: &JsaGrid, fiber: &FiberSpec) -> Result<TimeGrid, FiberError> {
    fiber.validate()?;
    let (ns, ni) = (grid.omega_s.len(), grid.omega_i.len());
    let (ds, di) = (uniform_step(&grid.omega_s)?, uniform_step(&grid.omega_i)?);
    let (cs, ci) = (grid.omega_s[ns / 2], grid.omega_i[ni / 2]);
    let beta_d = 0.5 * fiber.total_gvd_fs2();

    // aliasing guard: largest phase increment between neighbouring samples
    let edge = |w: &[f64], c: f64| w.iter().map(|x| (x - c).abs()).fold(0.0, f64::max);
    let phase_step = (2.0 * beta_d.abs() * edge(&grid.omega_s, cs) * ds).max(2.0 * beta_d.abs() * edge(&grid.omega_i, ci) * di);
    if phase_step > std::f64::consts::PI {
        return Err(FiberError::GridTooCoarse { phase_step });
    }

    let mut data: Vec<Complex64> = grid
        .probability
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let a = grid.omega_s[idx / ni] - cs;
            let b = grid.omega_i[idx % ni] - ci;
            Complex64::from_polar(p.max(0.0).sqrt(), -beta_d * (a * a + b * b))
        })
        .collect();

    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_forward(ni);
    let col_fft = planner.plan_fft_forward(ns);
    fft_rows(&mut data, ni, &row_fft);
    let mut data = transpose(&data, ns, ni);
    fft_rows(&mut data, ns, &col_fft);
    let data = transpose(&data, ni, ns);

    // conjugate axes, centred, shifted by the linear phase of the grid centre
    let norm = (ns * ni) as f64;
    let axis = |n: usize, step: f64, centre: f64| -> Vec<f64> {
        let dt = 2.0 * std::f64::consts::PI / (n as f64 * step);
        let shift = -2.0 * beta_d * centre;
        (0..n).map(|k| ((k as f64 - (n / 2) as f64) * dt + shift) * 1e-6).collect()
    };
    let t_s = axis(ns, ds, cs);
    let t_i = axis(ni, di, ci);
    let mut probability = vec![0.0; ns * ni];
    for j in 0..ns {
        let src_j = (j + ns - ns / 2) % ns;
        for k in 0..ni {
            let src_k = (k + ni - ni / 2) % ni;
            probability[j * ni + k] = data[src_j * ni + src_k].norm_sqr() / norm;
        }
    }
    Ok(TimeGrid { t_s, t_i, probability })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::{fit_gaussian_2d, linspace};
    use approx::assert_relative_eq;

    fn gaussian(n: usize, sigma: (f64, f64), rho: f64, half_range: f64) -> JsaGrid {
        let ws = linspace(3.5 - half_range, 3.5 + half_range, n);
        let wi = linspace(1.2 - half_range, 1.2 + half_range, n);
        let mut g = JsaGrid::from_fn(ws, wi, |a, b| {
            let x = (a - 3.5) / sigma.0;
            let y = (b - 1.2) / sigma.1;
            (-(x * x + y * y - 2.0 * rho * x * y) / (2.0 * (1.0 - rho * rho))).exp()
        });
        g.normalize().unwrap();
        g
    }

    fn reference_fiber() -> FiberSpec {
        FiberSpec::new(-2.27e-26, 1e4).unwrap()
    }

    #[test]
    fn scale_values() {
        assert_relative_eq!(dispersion_scale(&reference_fiber()), 227.0, max_relative = 1e-12);
        assert_eq!(dispersion_scale(&FiberSpec::new(-2.27e-26, 0.0).unwrap()), 0.0);
        let twice = FiberSpec::new(-2.27e-26, 2e4).unwrap();
        assert_relative_eq!(dispersion_scale(&twice), 454.0, max_relative = 1e-12);
        assert!(FiberSpec::new(1e-26, -1.0).is_err());
    }

    #[test]
    fn frequency_to_time_stats() {
        let sigma_s: f64 = 1.156 / 227.0;
        assert!((sigma_s - 5.093e-3).abs() < 5e-7);
        let fit = GaussianFit2D {
            center_s: 1.2,
            center_i: 1.2,
            sigma_s,
            sigma_i: 0.0,
            rho: 0.9535,
            amplitude: 1.0,
            standard_errors: [0.0; 5],
            near_singular: false,
        };
        let t = time_stats_from_frequency(&fit, &reference_fiber());
        assert_relative_eq!(t.tau_s, 1.156, max_relative = 1e-12);
        assert_eq!(t.tau_i, 0.0);
        assert_eq!(t.rho_t, 0.9535);
    }

    #[test]
    fn stationary_map_is_exact_rescaling() {
        let g = gaussian(81, (0.004, 0.006), -0.4, 0.03);
        let m = g.moments();
        for fiber in [reference_fiber(), FiberSpec::new(3e-26, 5e3).unwrap()] {
            let t = propagate_stationary(&g, &fiber).unwrap();
            let s = t.stats();
            let scale = dispersion_scale(&fiber);
            assert_relative_eq!(s.tau_s, scale * m.std.0, max_relative = 1e-12);
            assert_relative_eq!(s.tau_i, scale * m.std.1, max_relative = 1e-12);
            assert_relative_eq!(s.rho_t, m.correlation, max_relative = 1e-12);
            assert!((t.total() - 1.0).abs() < 1e-14);
            assert!(t.t_s.windows(2).all(|p| p[1] > p[0]));
        }
        assert!(matches!(propagate_stationary(&g, &FiberSpec::new(0.0, 1.0).unwrap()), Err(FiberError::ZeroDispersion)));
    }

    #[test]
    fn exact_matches_chirped_gaussian() {
        // separable: each axis follows σ_t² = (1/(2σ))² + (2βDσ)²
        let sigma = 0.004;
        let g = gaussian(1024, (sigma, sigma), 0.0, 0.1);
        let fiber = FiberSpec::new(-1e-26, 10.0).unwrap(); // 2βD = −1e5 fs²
        let t = propagate_exact(&g, &fiber).unwrap();
        assert!((t.total() - 1.0).abs() < 1e-9);
        let gd = 1e5;
        let expect = ((1.0 / (2.0 * sigma)).powi(2) + (gd * sigma).powi(2)).sqrt() * 1e-6;
        let s = t.stats();
        assert_relative_eq!(s.tau_s, expect, max_relative = 1e-2);
        assert_relative_eq!(s.tau_i, expect, max_relative = 1e-2);
        assert!(s.rho_t.abs() < 1e-6);
    }

    #[test]
    fn exact_without_fiber_is_plain_transform() {
        let sigma = 0.004;
        let g = gaussian(512, (sigma, sigma), 0.0, 0.1);
        let t = propagate_exact(&g, &FiberSpec::new(-1e-26, 0.0).unwrap()).unwrap();
        let s = t.stats();
        assert_relative_eq!(s.tau_s, 1e-6 / (2.0 * sigma), max_relative = 1e-3);
    }

    #[test]
    fn exact_agrees_with_stationary_in_far_field() {
        let sigma = (0.004, 0.005);
        let g = gaussian(512, sigma, 0.6, 0.028);
        let fiber = FiberSpec::new(-7e-26, 10.0).unwrap(); // 2βD = −7e5 fs²
        assert!(far_field_parameter(sigma.0, &fiber) > 10.0);
        let a = propagate_exact(&g, &fiber).unwrap().stats();
        let b = propagate_stationary(&g, &fiber).unwrap().stats();
        assert_relative_eq!(a.tau_s, b.tau_s, max_relative = 2e-2);
        assert_relative_eq!(a.tau_i, b.tau_i, max_relative = 2e-2);
        assert_relative_eq!(a.rho_t, b.rho_t, max_relative = 2e-2);
        let fit = fit_gaussian_2d(&g).unwrap();
        let c = time_stats_from_frequency(&fit, &fiber);
        assert_relative_eq!(c.tau_s, b.tau_s, max_relative = 1e-3);
    }

    #[test]
    fn coarse_grid_rejected() {
        let g = gaussian(64, (0.004, 0.004), 0.0, 0.03);
        let fiber = FiberSpec::new(-1e-25, 10.0).unwrap();
        assert!(matches!(propagate_exact(&g, &fiber), Err(FiberError::GridTooCoarse { .. })));
    }

    #[test]
    fn label_swap_commutes() {
        let g = gaussian(64, (0.004, 0.007), 0.3, 0.03);
        let fiber = FiberSpec::new(-1e-26, 1e-3).unwrap();
        let a = propagate_exact(&g.transposed(), &fiber).unwrap();
        let b = propagate_exact(&g, &fiber).unwrap().transposed();
        // the grids differ in centre frequency, so compare shapes
        for (x, y) in a.probability.iter().zip(&b.probability) {
            assert!((x - y).abs() < 1e-12);
        }
        let a = propagate_stationary(&g.transposed(), &fiber).unwrap();
        let b = propagate_stationary(&g, &fiber).unwrap().transposed();
        assert_eq!(a, b);
    }
}
