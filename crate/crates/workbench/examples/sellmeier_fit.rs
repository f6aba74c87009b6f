// Recovers Sellmeier coefficients from a synthetic tuning curve with 0.02%
// wavelength noise, starting from the literature values. Over a 10 nm pump
// span a0 and a1 trade off along a flat valley, which the uncertainties show;
// a2 is pinned down tightly.
use workbench::presets;
use workbench::sellmeier_fit::{fit, rss, synthesize_noisy_dataset, SellmeierModel};

fn run_example() {
    let model = SellmeierModel::ppktp(presets::ppktp_literature());
    let truth = presets::ppktp_fitted().axes.z.unwrap();
    let truth = [truth.a0, truth.a1, truth.a2];
    let pumps: Vec<f64> = (0..23).map(|i| 392.0 + 0.5 * i as f64).collect();
    let data = synthesize_noisy_dataset(&truth, &pumps, 2e-4, 11, &model).unwrap();
    let start = model.start();
    let report = fit(&data, &start, &model).unwrap();
    println!("start  {start:?}, rss {:.4} nm^2", rss(&data, &start, &model).unwrap());
    for (name, (v, e)) in ["a0", "a1", "a2"].iter().zip(report.fitted.iter().zip(&report.uncertainties)) {
        println!("{name}: {v:.5} +- {e:.5}");
    }
    println!("truth  {truth:?}");
    println!("rss {:.4} nm^2 after {} iterations, converged {}", report.rss, report.iterations, report.converged);
}

fn main() {
    run_example();
}
