//! Modes of a bent rectangular waveguide (an annular sector of a ring).
//!
//! The field separates as E_r = R(r)·Z(z). Vertically it is a symmetric slab
//! of half-height z0. Radially R solves Bessel's equation of order
//! λ = √(m² + 1) with R(r1) = R(r2) = 0, which fixes the azimuthal number m.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{bessel_jy, brent, scan_sign_changes, BesselError, GaussLegendre, RootError};

/// Step of the sign-change scan over m.
pub const M_SCAN_STEP: f64 = 0.05;
/// Boundary tolerance on |R(r2)| / max|R|.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;
/// A mode counts as guided when n_eff exceeds n2 by more than this fraction.
/// Zero gives the strict n_eff > n2 rule.
pub const DEFAULT_GUIDANCE_MARGIN: f64 = 0.05;

#[derive(Debug, Error)]
pub enum BentError {
    #[error("invalid {field}: {message}")]
    InvalidSpec { field: &'static str, message: String },
    #[error("Bessel evaluation failed: {0}")]
    BesselRange(#[from] BesselError),
    #[error("no real azimuthal number: radicand {radicand} is not positive")]
    NoRealSolution { radicand: f64 },
    #[error("radial profile does not vanish at the outer wall: relative value {residual:e}")]
    BoundaryResidual { residual: f64 },
    #[error(transparent)]
    Root(#[from] RootError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BentGuideSpec {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub half_height: f64,
    pub core_index: f64,
    pub clad_index: f64,
    /// Vacuum wavelength, μm.
    pub wavelength: f64,
}

impl BentGuideSpec {
    /// r1 = 0.5 μm, r2 = 1.5 μm, height 0.5 μm, n1 = 2.3 in air at 0.8 μm.
    pub fn reference() -> Self {
        Self { inner_radius: 0.5, outer_radius: 1.5, half_height: 0.25, core_index: 2.3, clad_index: 1.0, wavelength: 0.8 }
    }

    /// Field-level problems as (JSON field name, message).
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(self.inner_radius > 0.0) {
            out.push(("inner_radius", format!("must be positive, got {}", self.inner_radius)));
        }
        if !(self.outer_radius > self.inner_radius) {
            out.push(("inner_radius", format!("must be below outer_radius {}, got {}", self.outer_radius, self.inner_radius)));
        }
        if !(self.half_height > 0.0) {
            out.push(("half_height", format!("must be positive, got {}", self.half_height)));
        }
        if !(self.clad_index >= 1.0) {
            out.push(("clad_index", format!("must be at least 1, got {}", self.clad_index)));
        }
        if !(self.core_index > self.clad_index) {
            out.push(("core_index", format!("must exceed clad_index {}, got {}", self.clad_index, self.core_index)));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            out.push(("wavelength", format!("must be positive, got {}", self.wavelength)));
        }
        out
    }

    pub fn validate(&self) -> Result<(), BentError> {
        match self.violations().into_iter().next() {
            Some((field, message)) => Err(BentError::InvalidSpec { field, message }),
            None => Ok(()),
        }
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// k0·√(n1² − n2²), the largest vertical wavenumber in the core.
    pub fn vertical_limit(&self) -> f64 {
        self.k0() * (self.core_index.powi(2) - self.clad_index.powi(2)).sqrt()
    }

    pub fn width(&self) -> f64 {
        self.outer_radius - self.inner_radius
    }

    pub fn mean_bend_radius(&self) -> f64 {
        0.5 * (self.inner_radius + self.outer_radius)
    }
}

/// Symmetry of the vertical profile Z(z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// cos(β_w z) in the core; roots of tan(β_w z0) = β_s/β_w.
    Even,
    /// sin(β_w z) in the core; roots of cot(β_w z0) = −β_s/β_w.
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerticalRoot {
    pub parity: Parity,
    pub q: usize,
    pub beta_w: f64,
    pub beta_s: f64,
    pub h: f64,
}

// pole-free forms of the two transcendental equations
fn vertical_residual(parity: Parity, beta: f64, spec: &BentGuideSpec) -> f64 {
    let v = spec.vertical_limit();
    let kappa = (v * v - beta * beta).max(0.0).sqrt();
    let (s, c) = (beta * spec.half_height).sin_cos();
    match parity {
        Parity::Even => beta * s - kappa * c,
        Parity::Odd => beta * c + kappa * s,
    }
}

/// Counts (even, odd) from ⌈X⌉ and ⌈X − ½⌉, X = k0·z0·√(n1² − n2²)/π.
pub fn count_vertical_modes(spec: &BentGuideSpec) -> (usize, usize) {
    let x = spec.vertical_limit() * spec.half_height / PI;
    (x.ceil().max(0.0) as usize, (x - 0.5).ceil().max(0.0) as usize)
}

pub fn vertical_roots(spec: &BentGuideSpec) -> Result<Vec<VerticalRoot>, BentError> {
    spec.validate()?;
    let v = spec.vertical_limit();
    let k1 = spec.k0() * spec.core_index;
    let (n_even, n_odd) = count_vertical_modes(spec);
    let steps = 200 * (n_even + n_odd + 1);
    let lo = v * 1e-9;
    let mut found = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let f = |b: f64| vertical_residual(parity, b, spec);
        for bracket in scan_sign_changes(f, lo, v, steps) {
            let beta = brent(f, bracket, 1e-14)?;
            found.push((parity, beta));
        }
    }
    found.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    Ok(found
        .into_iter()
        .enumerate()
        .map(|(i, (parity, beta_w))| VerticalRoot {
            parity,
            q: i + 1,
            beta_w,
            beta_s: (v * v - beta_w * beta_w).max(0.0).sqrt(),
            h: (k1 * k1 - beta_w * beta_w).sqrt(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AzimuthalRoot {
    pub p: usize,
    pub m: f64,
    /// Mixing angle of R = sin γ·J_λ + cos γ·Y_λ.
    pub gamma: f64,
    /// |det| relative to √(J²+Y²)(hr1)·√(J²+Y²)(hr2).
    pub relative_residual: f64,
}

pub fn bessel_order(m: f64) -> f64 {
    (m * m + 1.0).sqrt()
}

fn determinant(m: f64, h: f64, r1: f64, r2: f64) -> Result<(f64, f64), BesselError> {
    let nu = bessel_order(m);
    let a = bessel_jy(nu, h * r1)?;
    let b = bessel_jy(nu, h * r2)?;
    let d = a.j * b.y - b.j * a.y;
    // D = M1·M2·sin(θ2 − θ1) in modulus-phase form, so D/(M1·M2) is the
    // well-conditioned relative size
    Ok((d, a.j.hypot(a.y) * b.j.hypot(b.y)))
}

/// Roots m of the radial determinant for vertical wavenumber `h`, largest m first.
pub fn azimuthal_numbers(spec: &BentGuideSpec, h: f64) -> Result<Vec<AzimuthalRoot>, BentError> {
    spec.validate()?;
    if !(h > 0.0) {
        return Err(BentError::InvalidSpec { field: "h", message: format!("must be positive, got {h}") });
    }
    let (r1, r2) = (spec.inner_radius, spec.outer_radius);
    let hi = h * r2;
    let n = (hi / M_SCAN_STEP).ceil() as usize;
    let ms: Vec<f64> = (0..=n).map(|i| hi * i as f64 / n as f64).collect();
    let vals: Vec<f64> = ms.par_iter().map(|&m| determinant(m, h, r1, r2).map(|d| d.0)).collect::<Result<_, _>>()?;
    let mut roots = Vec::new();
    for bracket in crate::numerics::sign_change_brackets(&ms, &vals) {
        // the determinant is continuous in m, so Bessel failures inside a
        // bracket cannot occur once both ends evaluated
        let m = brent(|m| determinant(m, h, r1, r2).map(|d| d.0).unwrap_or(f64::NAN), bracket, 1e-13)?;
        if m <= 0.0 {
            continue;
        }
        let (d, scale) = determinant(m, h, r1, r2)?;
        let inner = bessel_jy(bessel_order(m), h * r1)?;
        roots.push(AzimuthalRoot { p: 0, m, gamma: (-inner.y).atan2(inner.j), relative_residual: (d / scale).abs() });
    }
    roots.sort_by(|a, b| b.m.partial_cmp(&a.m).unwrap());
    for (i, r) in roots.iter_mut().enumerate() {
        r.p = i + 1;
    }
    Ok(roots)
}

/// Thin-annulus estimate m ≈ r_av·√(h² − π²p²/Δr² − 5/(4 r_av²)).
pub fn approximate_azimuthal(spec: &BentGuideSpec, h: f64, p: usize) -> Result<f64, BentError> {
    let r_av = spec.mean_bend_radius();
    let dr = spec.width();
    let radicand = h * h - (PI * p as f64 / dr).powi(2) - 5.0 / (4.0 * r_av * r_av);
    if radicand <= 0.0 {
        return Err(BentError::NoRealSolution { radicand });
    }
    Ok(r_av * radicand.sqrt())
}

/// Estimated radial root count ⌊hΔr/π⌋.
pub fn estimated_radial_count(spec: &BentGuideSpec, h: f64) -> usize {
    (h * spec.width() / PI).floor() as usize
}

/// One assembled mode with the data needed to sample its field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BentModeSolution {
    pub p: usize,
    pub q: usize,
    pub parity: Parity,
    pub beta_w: f64,
    pub beta_s: f64,
    pub h: f64,
    pub m: f64,
    pub gamma: f64,
    pub n_eff: f64,
    pub mean_radius: f64,
    pub physical: bool,
    pub half_height: f64,
}

impl BentModeSolution {
    pub fn radial(&self, r: f64) -> Result<f64, BesselError> {
        let b = bessel_jy(bessel_order(self.m), self.h * r)?;
        Ok(self.gamma.sin() * b.j + self.gamma.cos() * b.y)
    }

    pub fn vertical(&self, z: f64) -> f64 {
        let z0 = self.half_height;
        let inside = |z: f64| match self.parity {
            Parity::Even => (self.beta_w * z).cos(),
            Parity::Odd => (self.beta_w * z).sin(),
        };
        if z.abs() <= z0 {
            inside(z)
        } else {
            inside(z0.copysign(z)) * (-self.beta_s * (z.abs() - z0)).exp()
        }
    }

    pub fn field(&self, r: f64, z: f64) -> Result<f64, BesselError> {
        Ok(self.radial(r)? * self.vertical(z))
    }

    /// Same m and ⟨r⟩ re-classified with a different guidance margin.
    pub fn is_guided(&self, clad_index: f64, margin: f64) -> bool {
        self.n_eff > clad_index * (1.0 + margin)
    }
}

const RADIAL_PANELS: usize = 16;

/// ⟨r⟩ = ∬|E_r|² r dr dz / ∬|E_r|² dr dz.
///
/// E_r separates, so the z integrals (core plus five decay lengths of tail)
/// cancel and only the radial ones remain.
fn radial_mean(spec: &BentGuideSpec, m: f64, gamma: f64, h: f64) -> Result<(f64, f64), BesselError> {
    let rule = GaussLegendre::new(32);
    let (r1, r2) = (spec.inner_radius, spec.outer_radius);
    let nu = bessel_order(m);
    let dr = (r2 - r1) / RADIAL_PANELS as f64;
    let (mut num, mut den, mut peak) = (0.0, 0.0, 0.0f64);
    for k in 0..RADIAL_PANELS {
        let a = r1 + dr * k as f64;
        for (r, w) in rule.points(a, a + dr) {
            let b = bessel_jy(nu, h * r)?;
            let rv = gamma.sin() * b.j + gamma.cos() * b.y;
            num += w * rv * rv * r;
            den += w * rv * rv;
            peak = peak.max(rv.abs());
        }
    }
    Ok((num / den, peak))
}

/// Builds the mode, checks the outer-wall boundary condition and computes ⟨r⟩ and n_eff.
pub fn assemble_mode(
    spec: &BentGuideSpec,
    vertical: &VerticalRoot,
    azimuthal: &AzimuthalRoot,
    margin: f64,
) -> Result<BentModeSolution, BentError> {
    let (mean_radius, peak) = radial_mean(spec, azimuthal.m, azimuthal.gamma, vertical.h)?;
    let mode = BentModeSolution {
        p: azimuthal.p,
        q: vertical.q,
        parity: vertical.parity,
        beta_w: vertical.beta_w,
        beta_s: vertical.beta_s,
        h: vertical.h,
        m: azimuthal.m,
        gamma: azimuthal.gamma,
        n_eff: effective_index(azimuthal.m, spec.k0(), mean_radius),
        mean_radius,
        physical: false,
        half_height: spec.half_height,
    };
    let residual = mode.radial(spec.outer_radius)?.abs().max(mode.radial(spec.inner_radius)?.abs()) / peak;
    if residual > BOUNDARY_TOLERANCE {
        return Err(BentError::BoundaryResidual { residual });
    }
    Ok(BentModeSolution { physical: mode.is_guided(spec.clad_index, margin), ..mode })
}

/// n_eff = m/(k0·⟨r⟩).
pub fn effective_index(m: f64, k0: f64, mean_radius: f64) -> f64 {
    m / (k0 * mean_radius)
}

/// Full mode table ordered by (q, p).
pub fn solve(spec: &BentGuideSpec, margin: f64) -> Result<Vec<BentModeSolution>, BentError> {
    let roots = vertical_roots(spec)?;
    let per_q: Vec<Vec<BentModeSolution>> = roots
        .par_iter()
        .map(|v| {
            azimuthal_numbers(spec, v.h)?.iter().map(|a| assemble_mode(spec, v, a, margin)).collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, BentError>>()?;
    Ok(per_q.concat())
}

/// Maximum relative residual of u″ − (λ² − ¼)u/r² + h²u = 0 with u = √r·R(r),
/// by central differences on `samples` interior points.
///
/// This is the radial Schrödinger form of Bessel's equation; the 1/r² term is
/// the effective potential of [`effective_potential`].
pub fn qff_transform_check(mode: &BentModeSolution, spec: &BentGuideSpec, samples: usize) -> Result<f64, BentError> {
    let (r1, r2) = (spec.inner_radius, spec.outer_radius);
    let grid = (r2 - r1) / (samples + 3) as f64;
    let step = 1e-4 * (r2 - r1);
    let nu = bessel_order(mode.m);
    let u = |r: f64| -> Result<f64, BesselError> { Ok(r.sqrt() * mode.radial(r)?) };
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut residuals = Vec::with_capacity(samples);
    for i in 0..samples {
        let r = r1 + grid * (i + 2) as f64;
        let (um, u0, up) = (u(r - step)?, u(r)?, u(r + step)?);
        let upp = (up - 2.0 * u0 + um) / (step * step);
        residuals.push(upp + (mode.h * mode.h - effective_potential(nu, r)) * u0);
        scale = scale.max(mode.h * mode.h * u0.abs());
    }
    for r in residuals {
        worst = worst.max(r.abs() / scale);
    }
    Ok(worst)
}

/// (ν² − ¼)/r², the centrifugal-like term of the radial equation for u = √r·R.
pub fn effective_potential(order: f64, r: f64) -> f64 {
    (order * order - 0.25) / (r * r)
}

/// Extra potential (D−1)(D−3)/(4r²), in units of ħ²/2M, left over when the
/// D-dimensional radial Laplacian is written for u = r^((D−1)/2)·R.
/// Zero in one and three dimensions and attractive, −1/(4r²), in two.
pub fn qff_potential(dimension: u32, r: f64) -> f64 {
    let d = dimension as f64;
    (d - 1.0) * (d - 3.0) / (4.0 * r * r)
}
