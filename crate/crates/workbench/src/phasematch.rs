//! Quasi-phase-matching geometry: wavevector mismatch, idler direction and
//! the signal-wavelength root search.
//!
//! The grating vector points along x̂. Angles are internal to the crystal;
//! a polar angle θ is measured from x̂ and φ is the azimuth around it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{wavevector_magnitude, CrystalSpec, DispersionError, Polarization};
use crate::numerics::{brent, sign_change_brackets, RootBracket};

/// Target for |Δk| at an accepted root, 1/μm.
pub const ROOT_TOLERANCE: f64 = 1e-10;
/// Coarse bracketing step of the signal search, nm.
pub const SCAN_STEP_NM: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseMatchError {
    #[error("signal wavelength {signal_nm} nm must exceed pump wavelength {pump_nm} nm")]
    Domain { pump_nm: f64, signal_nm: f64 },
    #[error("no phase-matching root between {lo_nm} and {hi_nm} nm")]
    NoRootInWindow { lo_nm: f64, hi_nm: f64 },
    #[error("{} phase-matching roots in the window: {roots_nm:?}", roots_nm.len())]
    MultipleRoots { roots_nm: Vec<f64> },
    #[error("arcsine argument {0} is outside [-1, 1]")]
    ArcsineDomain(f64),
    #[error("idler wavevector cannot absorb the transverse momentum")]
    EvanescentIdler,
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
}

/// Everything that fixes one phase-matching problem apart from λ_VIS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchQuery {
    pub pump_wavelength_nm: f64,
    /// (θ_p, φ_p) in radians.
    #[serde(default)]
    pub pump_angles: (f64, f64),
    /// (θ_VIS, φ_VIS) in radians.
    #[serde(default)]
    pub signal_angles: (f64, f64),
    #[serde(default = "default_temperature")]
    pub temperature_k: f64,
    /// Pump, signal and idler polarizations.
    #[serde(default = "default_polarizations")]
    pub polarizations: [Polarization; 3],
    #[serde(default = "default_order")]
    pub qpm_order: i32,
    #[serde(default = "default_sign")]
    pub qpm_sign: i32,
}

fn default_temperature() -> f64 {
    298.0
}
fn default_polarizations() -> [Polarization; 3] {
    [Polarization::Z; 3]
}
fn default_order() -> i32 {
    1
}
fn default_sign() -> i32 {
    -1
}

impl PhaseMatchQuery {
    /// Collinear, all waves on the z index, first-order QPM with minus sign.
    pub fn collinear(pump_wavelength_nm: f64) -> Self {
        Self {
            pump_wavelength_nm,
            pump_angles: (0.0, 0.0),
            signal_angles: (0.0, 0.0),
            temperature_k: default_temperature(),
            polarizations: default_polarizations(),
            qpm_order: 1,
            qpm_sign: -1,
        }
    }

    pub fn validate(&self) -> Result<(), PhaseMatchError> {
        let bad = |m: &str| Err(PhaseMatchError::InvalidQuery(m.to_string()));
        if !(self.pump_wavelength_nm > 0.0 && self.pump_wavelength_nm.is_finite()) {
            return bad("pump wavelength must be positive");
        }
        let angles = [self.pump_angles.0, self.pump_angles.1, self.signal_angles.0, self.signal_angles.1];
        if angles.iter().any(|a| !a.is_finite()) {
            return bad("angles must be finite");
        }
        if self.qpm_sign.abs() != 1 {
            return bad("qpm_sign must be +1 or -1");
        }
        if !(self.temperature_k > 0.0) {
            return bad("temperature must be positive");
        }
        Ok(())
    }

    fn grating(&self, crystal: &CrystalSpec) -> f64 {
        self.qpm_sign as f64 * self.qpm_order as f64 * crystal.grating_wavevector(self.temperature_k)
    }
}

/// Wavevector mismatch for one candidate signal wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch {
    /// Signed longitudinal mismatch along the grating axis, 1/μm.
    pub longitudinal: f64,
    /// Full vector (x, y, z), 1/μm.
    pub vector: [f64; 3],
    pub magnitude: f64,
    /// Idler direction implied by transverse momentum conservation.
    pub idler_angles: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchSolution {
    pub signal_wavelength_nm: f64,
    pub idler_wavelength_nm: f64,
    pub idler_angle_rad: f64,
    pub mismatch_magnitude: f64,
}

/// λ_IR from energy conservation, all in nm.
pub fn idler_wavelength(pump_nm: f64, signal_nm: f64) -> Result<f64, PhaseMatchError> {
    if !(pump_nm > 0.0 && signal_nm > pump_nm) {
        return Err(PhaseMatchError::Domain { pump_nm, signal_nm });
    }
    Ok(1.0 / (1.0 / pump_nm - 1.0 / signal_nm))
}

fn unit(theta: f64, phi: f64) -> [f64; 3] {
    [theta.cos(), theta.sin() * phi.cos(), theta.sin() * phi.sin()]
}

/// Δk = k_p − k_VIS − k_IR + s·m·K x̂, with s = `qpm_sign`.
///
/// The idler absorbs the transverse momentum of k_p − k_VIS, so only the
/// x̂ component survives.
pub fn mismatch(query: &PhaseMatchQuery, signal_nm: f64, crystal: &CrystalSpec) -> Result<Mismatch, PhaseMatchError> {
    let idler_nm = idler_wavelength(query.pump_wavelength_nm, signal_nm)?;
    let [pp, ps, pi] = query.polarizations;
    let lp = query.pump_wavelength_nm * 1e-3;
    let ls = signal_nm * 1e-3;
    let li = idler_nm * 1e-3;
    let kp = wavevector_magnitude(crystal.index(pp, lp)?, lp);
    let ks = wavevector_magnitude(crystal.index(ps, ls)?, ls);
    let ki = wavevector_magnitude(crystal.index(pi, li)?, li);

    let up = unit(query.pump_angles.0, query.pump_angles.1);
    let us = unit(query.signal_angles.0, query.signal_angles.1);
    let ty = kp * up[1] - ks * us[1];
    let tz = kp * up[2] - ks * us[2];
    let t2 = ty * ty + tz * tz;
    if t2 >= ki * ki {
        return Err(PhaseMatchError::EvanescentIdler);
    }
    let kix = (ki * ki - t2).sqrt();
    let dx = kp * up[0] - ks * us[0] - kix + query.grating(crystal);
    let theta_i = (t2.sqrt() / ki).asin();
    let phi_i = if t2 == 0.0 { query.signal_angles.1 + std::f64::consts::PI } else { tz.atan2(ty) };
    Ok(Mismatch { longitudinal: dx, vector: [dx, 0.0, 0.0], magnitude: dx.abs(), idler_angles: (theta_i, phi_i) })
}

/// Closed-form idler polar angle, valid only at phase matching.
pub fn idler_angle(query: &PhaseMatchQuery, signal_nm: f64, crystal: &CrystalSpec) -> Result<f64, PhaseMatchError> {
    let [pp, ps, _] = query.polarizations;
    let lp = query.pump_wavelength_nm * 1e-3;
    let ls = signal_nm * 1e-3;
    let np = crystal.index(pp, lp)?;
    let ns = crystal.index(ps, ls)?;
    let theta = query.signal_angles.0;
    // the longitudinal balance expressed in units of ω_VIS/c
    let grating = query.grating(crystal) * ls / (2.0 * std::f64::consts::PI);
    let along = np * ls / lp - ns * theta.cos() + grating;
    let across = ns * theta.sin();
    let denom = (across * across + along * along).sqrt();
    if across == 0.0 {
        return Ok(0.0);
    }
    let arg = across / denom;
    if arg.abs() > 1.0 {
        return Err(PhaseMatchError::ArcsineDomain(arg));
    }
    Ok(arg.asin())
}

/// Default search window: just above the pump up to the degenerate point.
pub fn default_window(pump_nm: f64) -> (f64, f64) {
    (pump_nm + 1.0, 2.0 * pump_nm)
}

/// Finds λ_VIS where the longitudinal mismatch vanishes.
pub fn solve_signal_wavelength(
    query: &PhaseMatchQuery,
    crystal: &CrystalSpec,
    window_nm: Option<(f64, f64)>,
) -> Result<PhaseMatchSolution, PhaseMatchError> {
    query.validate()?;
    let (lo, hi) = window_nm.unwrap_or_else(|| default_window(query.pump_wavelength_nm));
    if !(lo > query.pump_wavelength_nm && hi > lo) {
        return Err(PhaseMatchError::InvalidQuery(format!("window [{lo}, {hi}] nm must lie above the pump")));
    }
    let f = |l: f64| mismatch(query, l, crystal).map(|m| m.longitudinal).unwrap_or(f64::NAN);

    let steps = (((hi - lo) / SCAN_STEP_NM).ceil() as usize).max(2);
    let xs: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
    let samples: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    if samples.iter().all(|v| v.abs() < ROOT_TOLERANCE) {
        // A dispersionless crystal without grating is phase matched
        // everywhere; the degenerate split is the natural representative.
        return finish(query, crystal, 2.0 * query.pump_wavelength_nm);
    }

    let mut roots = Vec::new();
    for bracket in sign_change_brackets(&xs, &samples) {
        let root = refine(&f, bracket)?;
        // Sign flips across a Sellmeier pole are not roots, and zeros past
        // a resonance (index below one) are artefacts of the fit formula.
        if f(root).abs() < ROOT_TOLERANCE && indices_physical(query, crystal, root) {
            roots.push(root);
        }
    }
    match roots.len() {
        0 => Err(PhaseMatchError::NoRootInWindow { lo_nm: lo, hi_nm: hi }),
        1 => finish(query, crystal, roots[0]),
        _ => Err(PhaseMatchError::MultipleRoots { roots_nm: roots }),
    }
}

fn indices_physical(query: &PhaseMatchQuery, crystal: &CrystalSpec, signal_nm: f64) -> bool {
    let Ok(idler_nm) = idler_wavelength(query.pump_wavelength_nm, signal_nm) else { return false };
    let waves = [query.pump_wavelength_nm, signal_nm, idler_nm];
    waves
        .iter()
        .zip(query.polarizations)
        .all(|(l, p)| crystal.index(p, l * 1e-3).map(|n| n >= 1.0).unwrap_or(false))
}

fn refine(f: &impl Fn(f64) -> f64, bracket: RootBracket) -> Result<f64, PhaseMatchError> {
    if bracket.f_lo == 0.0 {
        return Ok(bracket.lo);
    }
    if bracket.f_hi == 0.0 {
        return Ok(bracket.hi);
    }
    brent(f, bracket, 1e-13).map_err(|e| PhaseMatchError::InvalidQuery(e.to_string()))
}

fn finish(query: &PhaseMatchQuery, crystal: &CrystalSpec, signal_nm: f64) -> Result<PhaseMatchSolution, PhaseMatchError> {
    let m = mismatch(query, signal_nm, crystal)?;
    Ok(PhaseMatchSolution {
        signal_wavelength_nm: signal_nm,
        idler_wavelength_nm: idler_wavelength(query.pump_wavelength_nm, signal_nm)?,
        idler_angle_rad: m.idler_angles.0,
        mismatch_magnitude: m.magnitude,
    })
}

/// Solves one query per pump wavelength in parallel; order is preserved.
pub fn sweep(
    template: &PhaseMatchQuery,
    crystal: &CrystalSpec,
    pumps_nm: &[f64],
    window_nm: Option<(f64, f64)>,
) -> Vec<Result<PhaseMatchSolution, PhaseMatchError>> {
    pumps_nm
        .par_iter()
        .map(|&p| {
            let q = PhaseMatchQuery { pump_wavelength_nm: p, ..template.clone() };
            solve_signal_wavelength(&q, crystal, window_nm)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::SellmeierSet;
    use approx::assert_relative_eq;

    fn ppktp(a1: f64, a2: f64) -> CrystalSpec {
        let set = SellmeierSet::new(4.59423, a1, a2, 110.80672, 86.12171);
        CrystalSpec::isotropic("ppktp", set, 4.01, 1e4)
    }

    fn flat() -> CrystalSpec {
        CrystalSpec::isotropic("flat", SellmeierSet::constant(1.7), 0.0, 1e4)
    }

    #[test]
    fn idler_from_energy_conservation() {
        assert!((idler_wavelength(396.0, 532.0).unwrap() - 1549.06).abs() < 0.01);
        assert_relative_eq!(idler_wavelength(400.0, 800.0).unwrap(), 800.0, max_relative = 1e-14);
        assert_relative_eq!(idler_wavelength(390.0, 780.0).unwrap(), 780.0, max_relative = 1e-14);
        assert!(matches!(idler_wavelength(400.0, 400.0), Err(PhaseMatchError::Domain { .. })));
    }

    #[test]
    fn flat_crystal_is_matched_at_degeneracy() {
        let q = PhaseMatchQuery::collinear(400.0);
        assert!(mismatch(&q, 800.0, &flat()).unwrap().magnitude < 1e-12);
        let s = solve_signal_wavelength(&q, &flat(), None).unwrap();
        assert_relative_eq!(s.signal_wavelength_nm, 800.0, max_relative = 1e-10);
    }

    #[test]
    fn design_point_near_532() {
        let c = ppktp(0.06206, 0.04763);
        let q = PhaseMatchQuery::collinear(396.0);
        let s = solve_signal_wavelength(&q, &c, None).unwrap();
        assert!(s.mismatch_magnitude < ROOT_TOLERANCE);
        assert!((s.signal_wavelength_nm - 534.1).abs() < 0.2, "{}", s.signal_wavelength_nm);
        // at the root the crystal is phase matched over its full length
        assert!(s.mismatch_magnitude * c.length_um < 1e-3);
        let off = mismatch(&q, s.signal_wavelength_nm + 20.0, &c).unwrap();
        assert!(off.magnitude * c.length_um > 100.0);
        let e = 1.0 / 396.0 - 1.0 / s.signal_wavelength_nm - 1.0 / s.idler_wavelength_nm;
        assert!(e.abs() * 396.0 < 1e-12);
    }

    #[test]
    fn fitted_set_lands_near_532() {
        let c = ppktp(0.06272, 0.04814);
        let s = solve_signal_wavelength(&PhaseMatchQuery::collinear(396.0), &c, None).unwrap();
        assert!((s.signal_wavelength_nm - 528.9).abs() < 0.3, "{}", s.signal_wavelength_nm);
    }

    #[test]
    fn sweep_is_monotone() {
        let c = ppktp(0.06206, 0.04763);
        let pumps: Vec<f64> = (0..23).map(|i| 392.0 + 0.5 * i as f64).collect();
        let sols = sweep(&PhaseMatchQuery::collinear(0.0), &c, &pumps, None);
        let lv: Vec<f64> = sols.iter().map(|s| s.as_ref().unwrap().signal_wavelength_nm).collect();
        assert!(lv.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn pole_sign_flip_is_not_a_root() {
        // below ~417 nm pump the scan crosses the a2 pole of the idler index
        let c = ppktp(0.06206, 0.04763);
        let s = solve_signal_wavelength(&PhaseMatchQuery::collinear(392.0), &c, None).unwrap();
        assert!((s.signal_wavelength_nm - 516.3).abs() < 0.3);
    }

    #[test]
    fn empty_window_reports_no_root() {
        let c = ppktp(0.06206, 0.04763);
        let r = solve_signal_wavelength(&PhaseMatchQuery::collinear(396.0), &c, Some((600.0, 700.0)));
        assert!(matches!(r, Err(PhaseMatchError::NoRootInWindow { .. })));
    }

    #[test]
    fn symmetric_window_reports_both_roots() {
        let c = ppktp(0.06206, 0.04763);
        let r = solve_signal_wavelength(&PhaseMatchQuery::collinear(396.0), &c, Some((450.0, 1700.0)));
        match r {
            Err(PhaseMatchError::MultipleRoots { roots_nm }) => assert_eq!(roots_nm.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn collinear_idler_angle_is_zero() {
        let c = ppktp(0.06206, 0.04763);
        let q = PhaseMatchQuery::collinear(396.0);
        assert_eq!(idler_angle(&q, 534.0, &c).unwrap(), 0.0);
        assert_eq!(mismatch(&q, 534.0, &c).unwrap().idler_angles.0, 0.0);
    }

    #[test]
    fn tilted_signal_idler_angle_matches_vector_solution() {
        let c = ppktp(0.06206, 0.04763);
        let mut q = PhaseMatchQuery::collinear(396.0);
        q.signal_angles = (1e-3, 0.4);
        let s = solve_signal_wavelength(&q, &c, None).unwrap();
        let ls = s.signal_wavelength_nm * 1e-3;
        let li = s.idler_wavelength_nm * 1e-3;
        // transverse balance alone: n_s sinθ_s / λ_s = n_i sinθ_i / λ_i
        let ns = c.index(Polarization::Z, ls).unwrap();
        let ni = c.index(Polarization::Z, li).unwrap();
        let oracle = (ns * 1e-3f64.sin() * li / (ni * ls)).asin();
        let closed = idler_angle(&q, s.signal_wavelength_nm, &c).unwrap();
        assert_relative_eq!(closed, oracle, max_relative = 1e-8);
        assert_relative_eq!(s.idler_angle_rad, oracle, max_relative = 1e-10);
        let m = mismatch(&q, s.signal_wavelength_nm, &c).unwrap();
        assert_relative_eq!(m.idler_angles.1, 0.4 + std::f64::consts::PI - 2.0 * std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn query_validation() {
        let mut q = PhaseMatchQuery::collinear(396.0);
        q.qpm_sign = 2;
        assert!(matches!(solve_signal_wavelength(&q, &flat(), None), Err(PhaseMatchError::InvalidQuery(_))));
    }
}
