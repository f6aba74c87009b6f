//! Comparisons against published reference tables.
//!
//! Each row pairs one computed quantity with its reference value and the
//! tolerance it is held to. The rows are grouped by the acceptance criterion
//! they belong to, numbered as in the README.

use serde::Serialize;

use crate::bent_guide::{self, BentGuideSpec, DEFAULT_GUIDANCE_MARGIN};
use crate::biphoton::{fit_gaussian_1d, fit_gaussian_2d, jsa_grid, marginal, CouplingSpec, JsaGridSpec, Photon};
use crate::fiber_prop::dispersion_scale;
use crate::photon_stats::{coherent_moments, fock_moments, g2_from_moments, thermal_moments, tmsv_moments};
use crate::presets;
use crate::rect_guide::{hollow_cutoff, RectGuideSpec, C_UM_THZ};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "bound", rename_all = "lowercase")]
pub enum Tolerance {
    Relative(f64),
    Absolute(f64),
    Exact,
    /// Value must stay strictly below the bound.
    Below(f64),
    /// Value must stay strictly above the expected value.
    Above,
}

impl Tolerance {
    pub fn accepts(&self, value: f64, expected: f64) -> bool {
        match *self {
            Tolerance::Relative(r) => ((value - expected) / expected).abs() <= r,
            Tolerance::Absolute(a) => (value - expected).abs() <= a,
            Tolerance::Exact => value == expected,
            Tolerance::Below(b) => value < b,
            Tolerance::Above => value > expected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenRow {
    pub criterion: u8,
    pub check: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl GoldenRow {
    fn new(criterion: u8, check: impl Into<String>, value: f64, expected: f64, tolerance: Tolerance) -> Self {
        let pass = value.is_finite() && tolerance.accepts(value, expected);
        Self { criterion, check: check.into(), value, expected, tolerance, pass }
    }

    fn failed(criterion: u8, check: impl Into<String>, expected: f64, tolerance: Tolerance) -> Self {
        Self { criterion, check: check.into(), value: f64::NAN, expected, tolerance, pass: false }
    }

    /// One human-readable line.
    pub fn describe(&self) -> String {
        let tol = match self.tolerance {
            Tolerance::Relative(r) => format!("rel {r}"),
            Tolerance::Absolute(a) => format!("abs {a}"),
            Tolerance::Exact => "exact".to_string(),
            Tolerance::Below(b) => format!("< {b}"),
            Tolerance::Above => "> expected".to_string(),
        };
        format!(
            "{} [{:>2}] {:<40} value {:<14.9} expected {:<12} ({tol})",
            if self.pass { "PASS" } else { "FAIL" },
            self.criterion,
            self.check,
            self.value,
            self.expected
        )
    }
}

/// Vertical wavenumbers β_w and radial wavenumbers h for q = 1, 2, 3.
pub const BENT_BETA_W: [f64; 3] = [5.03, 9.94, 14.46];
pub const BENT_H: [f64; 3] = [17.35, 15.09, 10.8];
/// (m, n_eff, marked non-physical) indexed [q-1][p-1].
pub const BENT_MODES: [&[(f64, f64, bool)]; 3] = [
    &[(20.54, 2.03, false), (16.50, 1.86, false), (13.23, 1.69, false), (10.26, 1.46, false), (6.03, 0.9, true)],
    &[(17.391, 1.75, false), (13.54, 1.58, false), (10.41, 1.40, false), (7.15, 1.02, true)],
    &[(11.53, 1.22, false), (8.08, 1.04, true), (4.56, 0.6, true)],
];
/// Analytical ⟨r⟩ in μm, [q-1][p-1]; p = 5 is not tabulated.
pub const BENT_MEAN_RADIUS: [&[f64]; 3] = [&[1.29, 1.13, 1.00, 0.90], &[1.27, 1.09, 0.95, 0.89], &[1.21, 0.99, 0.9]];

/// Numerical (ρ, τ_s, τ_i) for the three type-II pulse lengths, times in ns.
pub const TYPE2_REFERENCE: [(f64, f64, f64); 3] = [(0.9535, 1.156, 1.182), (-0.0921, 0.22152, 0.226509), (-0.35761, 0.19625, 0.2007)];

fn bent_rows(rows: &mut Vec<GoldenRow>) {
    let spec = BentGuideSpec::reference();
    let modes = match bent_guide::solve(&spec, DEFAULT_GUIDANCE_MARGIN) {
        Ok(m) => m,
        Err(_) => {
            rows.push(GoldenRow::failed(1, "bent-guide mode solve", 12.0, Tolerance::Exact));
            return;
        }
    };
    let q_max = modes.iter().map(|m| m.q).max().unwrap_or(0);
    rows.push(GoldenRow::new(1, "q_max", q_max as f64, 3.0, Tolerance::Exact));
    for (qi, table) in BENT_MODES.iter().enumerate() {
        let q = qi + 1;
        let family: Vec<_> = modes.iter().filter(|m| m.q == q).collect();
        match family.first() {
            Some(first) => {
                rows.push(GoldenRow::new(1, format!("beta_w q={q}"), first.beta_w, BENT_BETA_W[qi], Tolerance::Relative(0.005)));
                rows.push(GoldenRow::new(1, format!("h q={q}"), first.h, BENT_H[qi], Tolerance::Relative(0.005)));
            }
            None => rows.push(GoldenRow::failed(1, format!("beta_w q={q}"), BENT_BETA_W[qi], Tolerance::Relative(0.005))),
        }
        rows.push(GoldenRow::new(1, format!("p_max q={q}"), family.len() as f64, table.len() as f64, Tolerance::Exact));
        for (pi, &(m, n_eff, red)) in table.iter().enumerate() {
            let p = pi + 1;
            let Some(mode) = family.iter().find(|x| x.p == p) else {
                rows.push(GoldenRow::failed(1, format!("m (p={p}, q={q})"), m, Tolerance::Relative(0.01)));
                continue;
            };
            rows.push(GoldenRow::new(1, format!("m (p={p}, q={q})"), mode.m, m, Tolerance::Relative(0.01)));
            rows.push(GoldenRow::new(1, format!("n_eff (p={p}, q={q})"), mode.n_eff, n_eff, Tolerance::Relative(0.03)));
            if let Some(r) = BENT_MEAN_RADIUS[qi].get(pi) {
                rows.push(GoldenRow::new(2, format!("<r> (p={p}, q={q})"), mode.mean_radius, *r, Tolerance::Absolute(0.05)));
                let flag = if mode.physical { 0.0 } else { 1.0 };
                rows.push(GoldenRow::new(2, format!("non-physical flag (p={p}, q={q})"), flag, if red { 1.0 } else { 0.0 }, Tolerance::Exact));
            }
        }
    }
}

fn type2_rows(rows: &mut Vec<GoldenRow>) {
    let setup = presets::type2_setup();
    let scale = dispersion_scale(&presets::telecom_fiber());
    for (k, ((tau, z), (rho, ts, ti))) in presets::TYPE2_PULSES_FS.iter().zip(presets::TYPE2_RANGES).zip(TYPE2_REFERENCE).enumerate() {
        let label = format!("tau_p {tau} fs");
        let fit = jsa_grid(&presets::type2_pump(*tau), &presets::type2_coupling(), &setup, &JsaGridSpec::new(300, z))
            .and_then(|g| fit_gaussian_2d(&g));
        let Ok(fit) = fit else {
            rows.push(GoldenRow::failed(5, format!("rho, {label}"), rho, Tolerance::Absolute(0.05)));
            continue;
        };
        if k == 0 {
            rows.push(GoldenRow::new(5, format!("rho, {label}"), fit.rho, rho, Tolerance::Absolute(0.05)));
        } else {
            rows.push(GoldenRow::new(5, format!("rho < 0, {label}"), fit.rho, 0.0, Tolerance::Below(0.0)));
        }
        rows.push(GoldenRow::new(5, format!("tau_s ns, {label}"), scale * fit.sigma_s, ts, Tolerance::Relative(0.15)));
        rows.push(GoldenRow::new(5, format!("tau_i ns, {label}"), scale * fit.sigma_i, ti, Tolerance::Relative(0.15)));
    }
}

fn visible_fit(pump_width: f64, mode_width: f64, n: usize) -> Option<(f64, f64)> {
    let grid = jsa_grid(
        &presets::visible_pump(pump_width),
        &CouplingSpec::symmetric(mode_width),
        &presets::visible_setup(),
        &presets::visible_grid(n),
    )
    .ok()?;
    let (omega, values) = marginal(&grid, Photon::Signal);
    let fit = fit_gaussian_1d(&omega, &values).ok()?;
    Some((fit.center, fit.fwhm))
}

fn visible_rows(rows: &mut Vec<GoldenRow>) {
    let mut widths = Vec::new();
    for wp in presets::VISIBLE_PUMP_WIDTHS {
        for wc in presets::VISIBLE_MODE_WIDTHS {
            widths.push(visible_fit(wp, wc, 100).map_or(f64::NAN, |f| f.1));
        }
    }
    let lo = widths.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = widths.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    rows.push(GoldenRow::new(6, "FWHM span over beam-width corners", (hi - lo) / lo, 0.0, Tolerance::Below(0.007)));

    let (wp, wc) = (48.0, 13.7);
    match (visible_fit(wp, wc, 100), visible_fit(wp, wc, 300)) {
        (Some(a), Some(b)) => {
            rows.push(GoldenRow::new(7, "omega_VIS n=100 vs 300", ((a.0 - b.0) / b.0).abs(), 0.0, Tolerance::Below(0.001)));
            rows.push(GoldenRow::new(7, "FWHM_VIS n=100 vs 300", ((a.1 - b.1) / b.1).abs(), 0.0, Tolerance::Below(0.001)));
        }
        _ => rows.push(GoldenRow::failed(7, "visible grid convergence", 0.0, Tolerance::Below(0.001))),
    }
}

fn stats_rows(rows: &mut Vec<GoldenRow>) {
    let cases = [
        ("g2 fock:1", g2_from_moments(&fock_moments(1)), 0.0),
        ("g2 fock:2", g2_from_moments(&fock_moments(2)), 0.5),
        ("g2 coherent", g2_from_moments(&coherent_moments(1.0)), 1.0),
        ("g2 thermal:1", thermal_moments(1.0).and_then(|m| g2_from_moments(&m)), 2.0),
    ];
    for (name, g2, want) in cases {
        rows.push(GoldenRow::new(8, name, g2.unwrap_or(f64::NAN), want, Tolerance::Exact));
    }
    for r in [0.1, 1.0, 2.0] {
        match tmsv_moments(r) {
            Ok(t) => rows.push(GoldenRow::new(8, format!("tmsv:{r} variance > mean"), t.mode.variance, t.mode.mean, Tolerance::Above)),
            Err(_) => rows.push(GoldenRow::failed(8, format!("tmsv:{r} variance > mean"), 0.0, Tolerance::Above)),
        }
    }
}

/// Every reference-table comparison.
pub fn run() -> Vec<GoldenRow> {
    let mut rows = Vec::new();
    bent_rows(&mut rows);
    let scale = dispersion_scale(&presets::telecom_fiber());
    rows.push(GoldenRow::new(4, "|2 beta D| ns/PHz", scale, 227.0, Tolerance::Relative(1e-12)));
    type2_rows(&mut rows);
    visible_rows(&mut rows);
    stats_rows(&mut rows);
    let guide = RectGuideSpec::hollow(2.0, 1.0);
    rows.push(GoldenRow::new(10, "hollow TE10 cutoff THz", hollow_cutoff(&guide, 1, 0), C_UM_THZ / 4.0, Tolerance::Relative(1e-15)));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_kinds() {
        assert!(Tolerance::Relative(0.01).accepts(1.005, 1.0));
        assert!(!Tolerance::Relative(0.01).accepts(1.02, 1.0));
        assert!(Tolerance::Absolute(0.05).accepts(1.245, 1.29));
        assert!(!Tolerance::Absolute(0.05).accepts(1.23, 1.29));
        assert!(Tolerance::Below(0.0).accepts(-0.1, 0.0));
        assert!(!Tolerance::Above.accepts(1.0, 1.0));
        assert!(!GoldenRow::new(1, "nan", f64::NAN, 1.0, Tolerance::Above).pass);
    }

    #[test]
    fn bent_table_rows() {
        let mut rows = Vec::new();
        bent_rows(&mut rows);
        let failing: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
        // m(5,1) and n_eff(3,3) disagree with the printed table, see README
        assert_eq!(failing, vec!["m (p=5, q=1)", "n_eff (p=3, q=3)"]);
        assert_eq!(rows.iter().filter(|r| r.criterion == 2).count(), 22);
    }
}
