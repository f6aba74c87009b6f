// Visible-photon spectrum of the PPKTP source: centre and FWHM from a
// Gaussian fit to the marginal, across the beam-width corners and grid sizes.
use workbench::biphoton::{fit_gaussian_1d, jsa_grid, marginal, Photon};
use workbench::presets;

fn visible_fit(pump_width: f64, mode_width: f64, n: usize) -> (f64, f64) {
    let setup = presets::visible_setup();
    let pump = presets::visible_pump(pump_width);
    let coupling = workbench::biphoton::CouplingSpec::symmetric(mode_width);
    let grid = jsa_grid(&pump, &coupling, &setup, &presets::visible_grid(n)).expect("grid");
    let (omega, values) = marginal(&grid, Photon::Signal);
    let fit = fit_gaussian_1d(&omega, &values).expect("fit");
    (fit.center, fit.fwhm)
}

fn run_example() {
    for wp in presets::VISIBLE_PUMP_WIDTHS {
        for wc in presets::VISIBLE_MODE_WIDTHS {
            let t = std::time::Instant::now();
            let (center, fwhm) = visible_fit(wp, wc, 100);
            println!("2w_p {:>5} um, 2w_VIS {:>6} um: omega_VIS {center:.5} PHz, FWHM {:.3} THz ({:.1?})", 2.0 * wp, 2.0 * wc, fwhm * 1e3, t.elapsed());
        }
    }
    let t = std::time::Instant::now();
    let (c300, f300) = visible_fit(48.0, 13.7, 300);
    println!("n = 300: omega_VIS {c300:.5} PHz, FWHM {:.3} THz ({:.1?})", f300 * 1e3, t.elapsed());
}

fn main() {
    run_example();
}
