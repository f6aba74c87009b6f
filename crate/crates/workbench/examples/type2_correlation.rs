// Frequency correlation of type-II pairs for three pump pulse lengths.
use workbench::biphoton::{fit_gaussian_2d, jsa_grid, JsaGridSpec};
use workbench::presets;

fn run_example() {
    let setup = presets::type2_setup();
    for (tau, z) in presets::TYPE2_PULSES_FS.iter().zip(presets::TYPE2_RANGES) {
        let t = std::time::Instant::now();
        let grid = jsa_grid(&presets::type2_pump(*tau), &presets::type2_coupling(), &setup, &JsaGridSpec::new(300, z)).unwrap();
        let fit = fit_gaussian_2d(&grid).unwrap();
        println!("tau_p {tau} fs: rho {:.4}, sigma_s {:.3e}, sigma_i {:.3e} ({:.1?})", fit.rho, fit.sigma_s, fit.sigma_i, t.elapsed());
    }
}

fn main() {
    run_example();
}
