// Arrival-time statistics of type-II pairs after 10 km of telecom fiber,
// from the Gaussian fit and from the propagated joint distribution.
use workbench::biphoton::{fit_gaussian_2d, jsa_grid, JsaGridSpec};
use workbench::fiber_prop::{dispersion_scale, propagate_stationary, time_stats_from_frequency};
use workbench::presets;

fn run_example() {
    let fiber = presets::telecom_fiber();
    println!("|2 beta D| = {:.1} ns/PHz", dispersion_scale(&fiber));
    let tau_p = presets::TYPE2_PULSES_FS[1];
    let grid = jsa_grid(&presets::type2_pump(tau_p), &presets::type2_coupling(), &presets::type2_setup(), &JsaGridSpec::new(160, presets::TYPE2_RANGES[1])).unwrap();
    let fit = fit_gaussian_2d(&grid).unwrap();
    let t = time_stats_from_frequency(&fit, &fiber);
    println!("fit:  tau_s {:.4} ns, tau_i {:.4} ns, rho_t {:.4}", t.tau_s, t.tau_i, t.rho_t);
    let g = propagate_stationary(&grid, &fiber).unwrap().stats();
    println!("grid: tau_s {:.4} ns, tau_i {:.4} ns, rho_t {:.4}", g.tau_s, g.tau_i, g.rho_t);
}

fn main() {
    run_example();
}
