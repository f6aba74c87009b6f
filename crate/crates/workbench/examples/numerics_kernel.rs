// The shared numerical kernel on problems with known answers.
use workbench::numerics::{bessel_jy, brent, least_squares, GaussLegendre, LmOptions, RootBracket};

fn run_example() {
    let mut f = |x: f64| x.cos() - x;
    let bracket = RootBracket::new(&mut f, 0.0, 1.0).unwrap();
    println!("cos x = x at {:.12}", brent(f, bracket, 1e-14).unwrap());

    let gl = GaussLegendre::new(20);
    println!("int_0^pi sin = {:.12}", gl.integrate(0.0, std::f64::consts::PI, f64::sin));

    let b = bessel_jy(2.5, 3.0).unwrap();
    println!("J_2.5(3) = {:.12}, Y_2.5(3) = {:.12}", b.j, b.y);

    let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 2.0 * (-0.7 * x).exp()).collect();
    let r = least_squares(|p| Some(xs.iter().zip(&ys).map(|(x, y)| p[0] * (-p[1] * x).exp() - y).collect()), &[1.0, 0.1], &LmOptions::default()).unwrap();
    println!("decay fit: amplitude {:.9}, rate {:.9}", r.parameters[0], r.parameters[1]);
}

fn main() {
    run_example();
}
