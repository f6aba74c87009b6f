// Refractive indices of KTP along its three axes, and the thermal
// expansion of the poling period.
use workbench::dispersion::{omega_from_wavelength, Polarization};
use workbench::presets;

fn run_example() {
    let ktp = presets::ktp_full();
    for lambda in [0.4, 0.78, 1.0, 1.56] {
        let [nx, ny, nz] = [Polarization::X, Polarization::Y, Polarization::Z].map(|p| ktp.index(p, lambda).unwrap());
        let k = ktp.wavevector(Polarization::Z, omega_from_wavelength(lambda)).unwrap();
        println!("{lambda:.2} um: n_x {nx:.5}, n_y {ny:.5}, n_z {nz:.5}, k_z {k:.4} 1/um");
    }
    for t in [298.15, 323.15, 348.15] {
        println!("T {t} K: poling period {:.6} um", ktp.poling_period(t).unwrap());
    }
}

fn main() {
    run_example();
}
