// Collinear quasi-phase-matching tuning curve of PPKTP: signal and idler
// wavelengths as the pump is swept across the blue.
use workbench::phasematch::{sweep, PhaseMatchQuery};
use workbench::presets;

fn run_example() {
    let crystal = presets::ppktp_literature();
    let mut template = PhaseMatchQuery::collinear(396.0);
    template.temperature_k = crystal.t0_kelvin;
    let pumps: Vec<f64> = (0..6).map(|i| 392.0 + 2.0 * i as f64).collect();
    for (pump, solution) in pumps.iter().zip(sweep(&template, &crystal, &pumps, None)) {
        match solution {
            Ok(s) => println!("pump {pump:.1} nm: signal {:.3} nm, idler {:.3} nm", s.signal_wavelength_nm, s.idler_wavelength_nm),
            Err(e) => println!("pump {pump:.1} nm: {e}"),
        }
    }
}

fn main() {
    run_example();
}
