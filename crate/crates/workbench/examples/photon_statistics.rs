// Second-order coherence of standard light states, and a Monte Carlo
// Poisson stream split on a beam splitter.
use workbench::photon_stats::{branch, g2_from_moments, pearson, simulate_poisson, LightState, NumberMoments};

fn run_example() {
    for state in ["fock:1", "fock:2", "coherent:3", "thermal:0.5", "tmsv:1"] {
        let m = state.parse::<LightState>().unwrap().moments().unwrap();
        println!("{state:>11}: mean {:.4}, variance {:.4}, g2 {:.4}", m.mean, m.variance, g2_from_moments(&m).unwrap());
    }
    let record = simulate_poisson(5000.0, 1.0, 2024).unwrap();
    let (a, b) = branch(&record, 0.5, 2025).unwrap();
    let bins = 500;
    let (ca, cb) = (a.window_counts(1.0, bins), b.window_counts(1.0, bins));
    let m = NumberMoments::from_counts(&record.window_counts(1.0, bins));
    let to_f = |c: &[u64]| c.iter().map(|&x| x as f64).collect::<Vec<_>>();
    println!("stream: {} clicks, g2 {:.4}, arm correlation {:.4}", record.len(), g2_from_moments(&m).unwrap(), pearson(&to_f(&ca), &to_f(&cb)).unwrap());
}

fn main() {
    run_example();
}
