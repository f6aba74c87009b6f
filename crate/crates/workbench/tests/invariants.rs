// Property checks of invariants that hold for every admissible input.
use proptest::prelude::*;
use workbench::biphoton::{fit_gaussian_2d, linspace, JsaGrid};
use workbench::cli::format::round9;
use workbench::fiber_prop::{propagate_stationary, FiberSpec};
use workbench::numerics::GaussLegendre;
use workbench::phasematch::idler_wavelength;
use workbench::photon_stats::{branch, g2_from_moments, simulate_poisson, LightState};
use workbench::rect_guide::{hollow_cutoff, RectGuideSpec};

fn gaussian_grid(sigma_s: f64, sigma_i: f64, rho: f64, n: usize) -> JsaGrid {
    let ws = linspace(1.2 - 6.0 * sigma_s, 1.2 + 6.0 * sigma_s, n);
    let wi = linspace(0.8 - 6.0 * sigma_i, 0.8 + 6.0 * sigma_i, n);
    JsaGrid::from_fn(ws, wi, |a, b| {
        let (x, y) = ((a - 1.2) / sigma_s, (b - 0.8) / sigma_i);
        (-(x * x + y * y - 2.0 * rho * x * y) / (2.0 * (1.0 - rho * rho))).exp()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn idler_conserves_energy(pump in 300.0..1000.0f64, excess in 1.0..2000.0f64) {
        let signal = pump + excess;
        let idler = idler_wavelength(pump, signal).unwrap();
        prop_assert!((1.0 / pump - 1.0 / signal - 1.0 / idler).abs() < 1e-12 / pump);
    }

    #[test]
    fn gaussian_fit_recovers_exact_gaussians(ss in 1e-3..1e-2f64, si in 1e-3..1e-2f64, rho in -0.9..0.9f64) {
        let fit = fit_gaussian_2d(&gaussian_grid(ss, si, rho, 41)).unwrap();
        prop_assert!((fit.sigma_s / ss - 1.0).abs() < 1e-6);
        prop_assert!((fit.sigma_i / si - 1.0).abs() < 1e-6);
        prop_assert!((fit.rho - rho).abs() < 1e-6);
    }

    #[test]
    fn swapping_photons_swaps_moments(ss in 1e-3..1e-2f64, si in 1e-3..1e-2f64, rho in -0.9..0.9f64) {
        let grid = gaussian_grid(ss, si, rho, 31);
        let (a, b) = (grid.moments(), grid.transposed().moments());
        prop_assert!((a.std.0 - b.std.1).abs() < 1e-14 && (a.std.1 - b.std.0).abs() < 1e-14);
        prop_assert!((a.correlation - b.correlation).abs() < 1e-12);
    }

    #[test]
    fn arrival_spread_scales_with_fiber_length(length in 10.0..1e4f64, factor in 1.5..4.0f64) {
        let grid = gaussian_grid(2e-3, 3e-3, 0.4, 33);
        let short = propagate_stationary(&grid, &FiberSpec::new(-2.27e-26, length).unwrap()).unwrap().stats();
        let long = propagate_stationary(&grid, &FiberSpec::new(-2.27e-26, factor * length).unwrap()).unwrap().stats();
        prop_assert!((long.tau_s / short.tau_s - factor).abs() < 1e-9 * factor);
        prop_assert!((long.rho_t - short.rho_t).abs() < 1e-9);
    }

    #[test]
    fn hollow_cutoff_is_symmetric_under_rotation(a in 0.5..5.0f64, b in 0.5..5.0f64, m in 0usize..5, n in 0usize..5) {
        let spec = RectGuideSpec::hollow(a, b);
        prop_assert!((hollow_cutoff(&spec, m, n) - hollow_cutoff(&spec.transposed(), n, m)).abs() < 1e-9);
    }

    #[test]
    fn thermal_and_coherent_g2_are_fixed(x in 0.05..5.0f64, mean in 0.01..100.0f64) {
        let thermal = LightState::Thermal(x).moments().unwrap();
        let coherent = LightState::Coherent(mean).moments().unwrap();
        prop_assert!((g2_from_moments(&thermal).unwrap() - 2.0).abs() < 1e-9);
        prop_assert!((g2_from_moments(&coherent).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fock_g2_is_one_minus_inverse_n(n in 1u32..200) {
        let g2 = g2_from_moments(&LightState::Fock(n).moments().unwrap()).unwrap();
        prop_assert!((g2 - (1.0 - 1.0 / n as f64)).abs() < 1e-12);
    }

    #[test]
    fn splitting_keeps_every_click(rate in 1.0..500.0f64, p in 0.0..1.0f64, seed in any::<u64>()) {
        let record = simulate_poisson(rate, 1.0, seed).unwrap();
        let (a, b) = branch(&record, p, seed ^ 1).unwrap();
        prop_assert_eq!(a.len() + b.len(), record.len());
        prop_assert!(a.is_valid() && b.is_valid());
    }

    #[test]
    fn simulation_is_reproducible(rate in 1.0..500.0f64, seed in any::<u64>()) {
        prop_assert_eq!(simulate_poisson(rate, 1.0, seed).unwrap(), simulate_poisson(rate, 1.0, seed).unwrap());
    }

    #[test]
    fn gauss_legendre_is_exact_for_low_degree(order in 1usize..24, c in prop::collection::vec(-3.0..3.0f64, 1..48)) {
        let degree = (2 * order - 1).min(c.len() - 1);
        let poly = |x: f64| c[..=degree].iter().rev().fold(0.0, |acc, k| acc * x + k);
        let exact: f64 = c[..=degree].iter().enumerate().map(|(k, ck)| ck * (2f64.powi(k as i32 + 1) - (-1f64).powi(k as i32 + 1)) / (k as f64 + 1.0)).sum();
        let got = GaussLegendre::new(order).integrate(-1.0, 2.0, poly);
        prop_assert!((got - exact).abs() < 1e-9 * (1.0 + exact.abs()) * 2f64.powi(degree as i32));
    }

    #[test]
    fn rounding_is_idempotent_and_close(x in -1e12..1e12f64) {
        let r = round9(x);
        prop_assert_eq!(round9(r), r);
        prop_assert!((r - x).abs() <= 5e-9 * x.abs());
    }
}
