use std::f64::consts::PI;

/// Gauss-Legendre rule on [-1, 1]. Nodes come from Newton iteration on
/// the three-term Legendre recurrence, so construction is exact to a few
/// ulps for any order; build once and reuse.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// (x, w) pairs mapped onto [a, b].
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.points(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Apply the rule on `panels` equal sub-intervals.
    pub fn integrate_composite(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

/// P_n(x) and P_n'(x).
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Convenience wrapper: Gauss-Legendre integral of `f` over [a, b].
pub fn integrate(f: impl FnMut(f64) -> f64, a: f64, b: f64, order: usize) -> f64 {
    GaussLegendre::new(order).integrate(a, b, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_on_unit_interval() {
        assert!((integrate(|x| x * x, 0.0, 1.0, 4) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sine_over_half_period() {
        assert!((integrate(f64::sin, 0.0, PI, 16) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant() {
        assert!((integrate(|_| 1.0, 0.0, 1.0, 7) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_two_and_nodes_symmetric() {
        for n in [1, 2, 5, 16, 64, 128] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "order {n}: {s}");
            for i in 0..n {
                assert!((g.nodes()[i] + g.nodes()[n - 1 - i]).abs() < 1e-15);
            }
            assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn monomials_exact_up_to_degree_2n_minus_1() {
        for n in [2usize, 3, 8, 20, 64] {
            let g = GaussLegendre::new(n);
            for d in 0..2 * n {
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                let got = g.integrate(-1.0, 1.0, |x| x.powi(d as i32));
                assert!((got - exact).abs() <= 1e-13 * exact.abs().max(1.0), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn composite_matches_single_panel_for_polynomials() {
        let g = GaussLegendre::new(6);
        let f = |x: f64| 3.0 * x.powi(5) - x * x + 2.0;
        let a = g.integrate(-0.5, 2.0, f);
        let b = g.integrate_composite(-0.5, 2.0, 7, f);
        assert!((a - b).abs() < 1e-12);
    }
}
