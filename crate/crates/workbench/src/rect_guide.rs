//! Straight rectangular guides: hollow metal TE/TM modes and the Marcatili
//! approximation for dielectric E^y / E^x modes.
//!
//! The core is centred on the origin, x across the width a, y across the height b.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{brent, RootBracket, RootError};

/// Speed of light in μm·THz.
pub const C_UM_THZ: f64 = 299.792458;

#[derive(Debug, Error)]
pub enum RectError {
    #[error("invalid {field}: {message}")]
    InvalidSpec { field: &'static str, message: String },
    #[error("operation needs a {expected} guide")]
    WrongKind { expected: &'static str },
    #[error("no guided modes at λ = {wavelength_um} μm")]
    NoGuidedModes { wavelength_um: f64 },
    #[error(transparent)]
    Root(#[from] RootError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuideKind {
    Hollow,
    Dielectric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectGuideSpec {
    pub width_um: f64,
    pub height_um: f64,
    pub core_index: f64,
    #[serde(default = "one")]
    pub clad_index: f64,
    pub kind: GuideKind,
}

fn one() -> f64 {
    1.0
}

impl RectGuideSpec {
    pub fn hollow(width_um: f64, height_um: f64) -> Self {
        Self { width_um, height_um, core_index: 1.0, clad_index: 1.0, kind: GuideKind::Hollow }
    }

    pub fn dielectric(width_um: f64, height_um: f64, core_index: f64, clad_index: f64) -> Self {
        Self { width_um, height_um, core_index, clad_index, kind: GuideKind::Dielectric }
    }

    pub fn validate(&self) -> Result<(), RectError> {
        for (field, v) in [("width_um", self.width_um), ("height_um", self.height_um)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RectError::InvalidSpec { field, message: format!("must be positive, got {v}") });
            }
        }
        if self.kind == GuideKind::Dielectric {
            if !(self.clad_index >= 1.0) {
                return Err(RectError::InvalidSpec { field: "clad_index", message: format!("must be at least 1, got {}", self.clad_index) });
            }
            if !(self.core_index > self.clad_index) {
                return Err(RectError::InvalidSpec {
                    field: "core_index",
                    message: format!("must exceed the cladding index {}", self.clad_index),
                });
            }
        }
        Ok(())
    }

    /// The same guide rotated by 90°.
    pub fn transposed(&self) -> Self {
        Self { width_um: self.height_um, height_um: self.width_um, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeFamily {
    TE,
    TM,
    Ey,
    Ex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectMode {
    pub family: ModeFamily,
    /// (m, n) for hollow modes, (p, q) for dielectric ones.
    pub indices: (usize, usize),
    pub k_x: f64,
    pub k_y: f64,
    pub k_z: f64,
    /// Hollow modes only, THz.
    pub cutoff_thz: Option<f64>,
}

/// Cutoff frequency (c/2π)√((mπ/a)² + (nπ/b)²) in THz.
pub fn hollow_cutoff(spec: &RectGuideSpec, m: usize, n: usize) -> f64 {
    let kx = m as f64 * PI / spec.width_um;
    let ky = n as f64 * PI / spec.height_um;
    C_UM_THZ / (2.0 * PI) * (kx * kx + ky * ky).sqrt()
}

/// Propagating hollow modes at frequency `f_thz`, sorted by cutoff.
pub fn hollow_modes(spec: &RectGuideSpec, f_thz: f64) -> Result<Vec<RectMode>, RectError> {
    spec.validate()?;
    if spec.kind != GuideKind::Hollow {
        return Err(RectError::WrongKind { expected: "hollow" });
    }
    if !(f_thz > 0.0) {
        return Err(RectError::InvalidSpec { field: "frequency", message: format!("must be positive, got {f_thz}") });
    }
    let k0 = 2.0 * PI * f_thz / C_UM_THZ;
    let m_max = (k0 * spec.width_um / PI) as usize;
    let n_max = (k0 * spec.height_um / PI) as usize;
    let mut modes = Vec::new();
    for m in 0..=m_max {
        for n in 0..=n_max {
            let kx = m as f64 * PI / spec.width_um;
            let ky = n as f64 * PI / spec.height_um;
            let kz2 = k0 * k0 - kx * kx - ky * ky;
            if kz2 <= 0.0 {
                continue;
            }
            let cutoff = Some(hollow_cutoff(spec, m, n));
            let mode = |family| RectMode { family, indices: (m, n), k_x: kx, k_y: ky, k_z: kz2.sqrt(), cutoff_thz: cutoff };
            if m + n > 0 {
                modes.push(mode(ModeFamily::TE));
            }
            if m >= 1 && n >= 1 {
                modes.push(mode(ModeFamily::TM));
            }
        }
    }
    modes.sort_by(|a, b| a.cutoff_thz.partial_cmp(&b.cutoff_thz).unwrap());
    Ok(modes)
}

/// Residual of k d − pπ + 2 arctan(r·k/κ), κ = √(k_max² − k²).
///
/// arctan of the purely imaginary argument in the complex form of the
/// equation becomes this real arctan via arctan(iu) = i·artanh(u).
pub fn marcatili_residual(k: f64, d: f64, order: usize, k_max: f64, ratio: f64) -> f64 {
    let kappa = (k_max * k_max - k * k).max(0.0).sqrt();
    k * d - order as f64 * PI + 2.0 * (ratio * k).atan2(kappa)
}

fn solve_axis(d: f64, k_max: f64, ratio: f64) -> Result<Vec<f64>, RectError> {
    // the left side rises monotonically from 0 to k_max·d + π
    let count = (k_max * d / PI).ceil() as usize;
    let mut roots = Vec::with_capacity(count);
    for order in 1..=count {
        let mut f = |k: f64| marcatili_residual(k, d, order, k_max, ratio);
        let bracket = RootBracket::new(&mut f, 0.0, k_max)?;
        roots.push(brent(f, bracket, 1e-15)?);
    }
    Ok(roots)
}

/// Guided Marcatili modes at vacuum wavelength `wavelength_um`.
///
/// Only the y-equation carries the (n_clad/n_core)² factor for E^y modes;
/// for E^x it moves to the x-equation. Modes with k_z ≤ k0·n_clad are not
/// guided and are dropped.
pub fn marcatili_solve(spec: &RectGuideSpec, wavelength_um: f64, family: ModeFamily) -> Result<Vec<RectMode>, RectError> {
    spec.validate()?;
    if spec.kind != GuideKind::Dielectric {
        return Err(RectError::WrongKind { expected: "dielectric" });
    }
    if !(wavelength_um > 0.0) {
        return Err(RectError::InvalidSpec { field: "wavelength", message: format!("must be positive, got {wavelength_um}") });
    }
    let k0 = 2.0 * PI / wavelength_um;
    let (n1, nc) = (spec.core_index, spec.clad_index);
    let k_max = k0 * (n1 * n1 - nc * nc).sqrt();
    let index_ratio = (nc / n1).powi(2);
    let (rx, ry) = match family {
        ModeFamily::Ey => (1.0, index_ratio),
        ModeFamily::Ex => (index_ratio, 1.0),
        _ => return Err(RectError::WrongKind { expected: "dielectric (Ey or Ex)" }),
    };
    let kxs = solve_axis(spec.width_um, k_max, rx)?;
    let kys = solve_axis(spec.height_um, k_max, ry)?;
    let mut modes = Vec::new();
    for (p, &kx) in kxs.iter().enumerate() {
        for (q, &ky) in kys.iter().enumerate() {
            let kz2 = k0 * k0 * n1 * n1 - kx * kx - ky * ky;
            if kz2 > (k0 * nc).powi(2) {
                modes.push(RectMode { family, indices: (p + 1, q + 1), k_x: kx, k_y: ky, k_z: kz2.sqrt(), cutoff_thz: None });
            }
        }
    }
    if modes.is_empty() {
        return Err(RectError::NoGuidedModes { wavelength_um });
    }
    modes.sort_by(|a, b| b.k_z.partial_cmp(&a.k_z).unwrap());
    Ok(modes)
}

/// Transverse profile along one axis of a symmetric slab: cos or sin in the
/// core by parity, exponential tails outside, continuous at ±d/2.
fn slab_profile(u: f64, k: f64, kappa: f64, d: f64, order: usize) -> f64 {
    let inside = |u: f64| if order % 2 == 1 { (k * u).cos() } else { (k * u).sin() };
    let h = 0.5 * d;
    if u.abs() <= h {
        inside(u)
    } else {
        inside(h.copysign(u)) * (-kappa * (u.abs() - h)).exp()
    }
}

/// Dominant-field magnitude on the product grid `xs × ys`, row-major (x major).
///
/// Hollow modes give |E_t| of the exact sin/cos pattern with walls at ±a/2,
/// ±b/2. Dielectric modes use the five Marcatili regions; the corner regions
/// are set to zero.
pub fn mode_field(mode: &RectMode, spec: &RectGuideSpec, xs: &[f64], ys: &[f64], wavelength_um: f64) -> Vec<f64> {
    let (a, b) = (spec.width_um, spec.height_um);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    match spec.kind {
        GuideKind::Hollow => {
            for &x in xs {
                for &y in ys {
                    if x.abs() > 0.5 * a || y.abs() > 0.5 * b {
                        out.push(0.0);
                        continue;
                    }
                    let (u, v) = (mode.k_x * (x + 0.5 * a), mode.k_y * (y + 0.5 * b));
                    let (ex, ey) = match mode.family {
                        ModeFamily::TM => (mode.k_x * u.cos() * v.sin(), mode.k_y * u.sin() * v.cos()),
                        _ => (mode.k_y * u.cos() * v.sin(), -mode.k_x * u.sin() * v.cos()),
                    };
                    out.push((ex * ex + ey * ey).sqrt());
                }
            }
        }
        GuideKind::Dielectric => {
            let k0 = 2.0 * PI / wavelength_um;
            let k_max2 = k0 * k0 * (spec.core_index.powi(2) - spec.clad_index.powi(2));
            let kappa_x = (k_max2 - mode.k_x * mode.k_x).max(0.0).sqrt();
            let kappa_y = (k_max2 - mode.k_y * mode.k_y).max(0.0).sqrt();
            for &x in xs {
                for &y in ys {
                    if x.abs() > 0.5 * a && y.abs() > 0.5 * b {
                        out.push(0.0);
                        continue;
                    }
                    let fx = slab_profile(x, mode.k_x, kappa_x, a, mode.indices.0);
                    let fy = slab_profile(y, mode.k_y, kappa_y, b, mode.indices.1);
                    out.push((fx * fy).abs());
                }
            }
        }
    }
    out
}
