// Whispering-gallery modes of a bent rectangular guide: azimuthal numbers,
// effective indices and where each mode sits radially.
use workbench::bent_guide::{solve, BentGuideSpec};

fn run_example() {
    let spec = BentGuideSpec::reference();
    for mode in solve(&spec, 0.05).unwrap() {
        let flag = if mode.physical { "" } else { "  (not guided)" };
        println!(
            "q {} p {}: beta_w {:.3}, h {:.3}, m {:.3}, n_eff {:.4}, <r> {:.4} um{flag}",
            mode.q, mode.p, mode.beta_w, mode.h, mode.m, mode.n_eff, mode.mean_radius
        );
    }
}

fn main() {
    run_example();
}
