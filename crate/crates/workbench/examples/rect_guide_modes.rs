// Modes of a 2 x 1 um rectangular guide: hollow metal walls at 400 THz,
// then a silica-like dielectric core at 800 nm.
use workbench::rect_guide::{hollow_modes, marcatili_solve, ModeFamily, RectGuideSpec};

fn run_example() {
    let hollow = RectGuideSpec::hollow(2.0, 1.0);
    for m in hollow_modes(&hollow, 400.0).unwrap() {
        println!("{:?}{}{}: cutoff {:.2} THz, k_z {:.4} 1/um", m.family, m.indices.0, m.indices.1, m.cutoff_thz.unwrap(), m.k_z);
    }
    let core = RectGuideSpec::dielectric(2.0, 1.0, 1.5, 1.45);
    for family in [ModeFamily::Ey, ModeFamily::Ex] {
        for m in marcatili_solve(&core, 0.8, family).unwrap() {
            println!("{family:?}({},{}): n_eff {:.5}", m.indices.0, m.indices.1, m.k_z * 0.8 / std::f64::consts::TAU);
        }
    }
}

fn main() {
    run_example();
}
