//! Bundled crystal files and the two reference down-conversion setups.
//!
//! The JSON files under `data/` are the same ones the command line reads, so
//! a scenario can point at them directly.

use crate::biphoton::{fwhm_omega_to_tau_fourier, tau_from_power_spectrum_std, CouplingSpec, JsaGridSpec, PumpSpec, SpdcSetup};
use crate::dispersion::{CrystalSpec, Polarization};
use crate::fiber_prop::FiberSpec;

pub const PPKTP_LITERATURE_JSON: &str = include_str!("../data/ppktp_kato2002.json");
pub const PPKTP_FITTED_JSON: &str = include_str!("../data/ppktp_fitted.json");
pub const KTP_FULL_JSON: &str = include_str!("../data/ktp_kato2002_full.json");
pub const BENT_REFERENCE_JSON: &str = include_str!("../data/bent_reference.json");

fn parse(text: &str) -> CrystalSpec {
    CrystalSpec::from_json_str(text).expect("bundled crystal file is valid")
}

/// z-axis PPKTP with literature coefficients, Λ0 = 4.01 μm.
pub fn ppktp_literature() -> CrystalSpec {
    parse(PPKTP_LITERATURE_JSON)
}

/// z-axis PPKTP with coefficients fitted to measured spectra.
pub fn ppktp_fitted() -> CrystalSpec {
    parse(PPKTP_FITTED_JSON)
}

/// KTP with all three axes, poled at 46.2 μm for type-II telecom pairs.
pub fn ktp_full() -> CrystalSpec {
    parse(KTP_FULL_JSON)
}

pub const TYPE2_PUMP_NM: f64 = 780.1;
/// Pump pulse durations τ_p (fs) measured as the inverse spectral power std.
pub const TYPE2_PULSES_FS: [f64; 3] = [94.58, 719.1, 976.0];
/// Relative grid half-ranges that keep each pulse's support on the grid.
pub const TYPE2_RANGES: [f64; 3] = [0.02, 0.0075, 0.005];

/// Telecom fiber pair: 2β = −2.27e-26 s²/m over 10 km.
pub fn telecom_fiber() -> FiberSpec {
    FiberSpec { gvd_s2_per_m: -2.27e-26, length_m: 1e4 }
}

/// Type-II PPKTP at room temperature: y-polarized pump and signal, z idler.
///
/// The grating also phase matches a short-wavelength process near 812 nm,
/// so the signal search is confined to the telecom band.
pub fn type2_setup() -> SpdcSetup {
    let crystal = ktp_full();
    let t = crystal.t0_kelvin;
    SpdcSetup::new(crystal, [Polarization::Y, Polarization::Y, Polarization::Z], 1, t).with_signal_window(1400.0, 1700.0)
}

/// Pump for a measured τ_p; the amplitude width is τ_p/√2.
pub fn type2_pump(tau_p_fs: f64) -> PumpSpec {
    PumpSpec::from_wavelength_nm(TYPE2_PUMP_NM, tau_from_power_spectrum_std(1.0 / tau_p_fs), 41.0)
}

pub fn type2_coupling() -> CouplingSpec {
    CouplingSpec::symmetric(48.75)
}

/// Visible/telecom PPKTP pair used for the width and convergence studies.
pub const VISIBLE_PUMP_OMEGA: f64 = 4.7375;
pub const VISIBLE_PUMP_FWHM: f64 = 0.01763;
pub const VISIBLE_TEMPERATURE_K: f64 = 305.01;
/// Corner values of (w_p, w_VIS) in μm.
pub const VISIBLE_PUMP_WIDTHS: [f64; 2] = [46.5, 49.5];
pub const VISIBLE_MODE_WIDTHS: [f64; 2] = [11.125, 16.29];

pub fn visible_setup() -> SpdcSetup {
    SpdcSetup::new(ppktp_fitted(), [Polarization::Z; 3], -1, VISIBLE_TEMPERATURE_K)
}

pub fn visible_pump(width_um: f64) -> PumpSpec {
    PumpSpec {
        central_frequency: VISIBLE_PUMP_OMEGA,
        tau_fs: fwhm_omega_to_tau_fourier(VISIBLE_PUMP_FWHM),
        width_um,
    }
}

pub fn visible_grid(n: usize) -> JsaGridSpec {
    JsaGridSpec::new(n, 0.02)
}
