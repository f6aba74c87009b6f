use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LmError {
    #[error("{points} data points cannot constrain {params} parameters")]
    Underdetermined { points: usize, params: usize },
    #[error("residuals are not finite at the starting point")]
    InfeasibleStart,
    #[error("Jacobian is singular; parameters are not identifiable")]
    SingularJacobian,
}

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub initial_lambda: f64,
    /// Converged when every |step_j| < step_tolerance * (|p_j| + step_tolerance).
    pub step_tolerance: f64,
    /// Converged when an accepted step lowers RSS by less than this fraction.
    pub rss_tolerance: f64,
    /// Relative finite-difference step for the numerical Jacobian.
    pub fd_step: f64,
    /// Typical parameter magnitudes for sizing finite-difference steps.
    /// Defaults to |initial|, or 1 for parameters starting at zero.
    pub scales: Option<Vec<f64>>,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 500,
            initial_lambda: 1e-3,
            step_tolerance: 1e-10,
            rss_tolerance: 1e-12,
            fd_step: 1e-6,
            scales: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub parameters: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Row-major covariance estimate, scaled by the residual variance.
    pub covariance: Vec<f64>,
    pub residual_sum_squares: f64,
    pub initial_rss: f64,
    pub converged: bool,
    pub iterations: usize,
    pub degrees_of_freedom: usize,
}

impl FitResult {
    pub fn covariance_at(&self, i: usize, j: usize) -> f64 {
        self.covariance[i * self.parameters.len() + j]
    }
}

/// Levenberg-Marquardt minimisation of the sum of squared residuals.
///
/// `residuals` returns `None` when the parameters are infeasible; such
/// trial steps are rejected like any step that fails to lower the RSS.
/// The Jacobian is taken by central differences.
pub fn least_squares<F>(mut residuals: F, initial: &[f64], opts: &LmOptions) -> Result<FitResult, LmError>
where
    F: FnMut(&[f64]) -> Option<Vec<f64>>,
{
    let np = initial.len();
    let eval = |r: &mut F, p: &[f64]| -> Option<DVector<f64>> {
        let v = r(p)?;
        v.iter().all(|x| x.is_finite()).then(|| DVector::from_vec(v))
    };
    let mut p = initial.to_vec();
    let mut r = eval(&mut residuals, &p).ok_or(LmError::InfeasibleStart)?;
    let n = r.len();
    if n < np {
        return Err(LmError::Underdetermined { points: n, params: np });
    }
    let scale: Vec<f64> = (0..np)
        .map(|j| {
            match opts.scales.as_ref() {
                Some(s) if s[j] != 0.0 => s[j].abs(),
                _ if initial[j] != 0.0 => initial[j].abs(),
                _ => 1.0,
            }
        })
        .collect();
    let mut rss = r.norm_squared();
    let initial_rss = rss;
    let mut lambda = opts.initial_lambda;
    let mut converged = rss == 0.0;
    let mut iterations = 0;
    let mut jac = jacobian(&mut residuals, &p, &r, &scale, opts.fd_step).ok_or(LmError::InfeasibleStart)?;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * &r;
        loop {
            let mut m = a.clone();
            for j in 0..np {
                let d = a[(j, j)].max(1e-300);
                m[(j, j)] += lambda * d;
            }
            let step = match m.clone().cholesky() {
                Some(ch) => -ch.solve(&g),
                None => match m.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        if lambda > 1e30 {
                            return Err(LmError::SingularJacobian);
                        }
                        continue;
                    }
                },
            };
            let small = (0..np).all(|j| step[j].abs() < opts.step_tolerance * (p[j].abs() + opts.step_tolerance));
            let trial: Vec<f64> = (0..np).map(|j| p[j] + step[j]).collect();
            match eval(&mut residuals, &trial) {
                Some(rt) if rt.norm_squared() < rss => {
                    let new_rss = rt.norm_squared();
                    let drop = (rss - new_rss) / rss;
                    p = trial;
                    r = rt;
                    rss = new_rss;
                    lambda = (lambda / 10.0).max(1e-12);
                    if small || drop < opts.rss_tolerance || rss == 0.0 {
                        converged = true;
                    }
                    break;
                }
                _ => {
                    lambda *= 10.0;
                    if small || lambda > 1e30 {
                        converged = true;
                        break;
                    }
                }
            }
        }
        if !converged {
            jac = match jacobian(&mut residuals, &p, &r, &scale, opts.fd_step) {
                Some(j) => j,
                None => break,
            };
        }
    }

    let jac = jacobian(&mut residuals, &p, &r, &scale, opts.fd_step).unwrap_or(jac);
    // (JᵀJ)⁻¹ = V Σ⁻² Vᵀ; going through the SVD keeps the variances
    // non-negative when the coefficients are nearly degenerate.
    let svd = jac.clone().svd(false, true);
    let v_t = svd.v_t.ok_or(LmError::SingularJacobian)?;
    if svd.singular_values.iter().any(|s| !(*s > 0.0)) {
        return Err(LmError::SingularJacobian);
    }
    let inv_sigma2 = DMatrix::from_diagonal(&svd.singular_values.map(|s| 1.0 / (s * s)));
    let inv = v_t.transpose() * inv_sigma2 * &v_t;
    let dof = n.saturating_sub(np);
    let s2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let cov = inv * s2;
    let standard_errors = (0..np).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    let covariance = (0..np * np).map(|k| cov[(k / np, k % np)]).collect();
    Ok(FitResult {
        parameters: p,
        standard_errors,
        covariance,
        residual_sum_squares: rss,
        initial_rss,
        converged,
        iterations,
        degrees_of_freedom: dof,
    })
}

fn jacobian<F>(residuals: &mut F, p: &[f64], r0: &DVector<f64>, scale: &[f64], fd: f64) -> Option<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Option<Vec<f64>>,
{
    let n = r0.len();
    let mut jac = DMatrix::zeros(n, p.len());
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = fd * p[j].abs().max(scale[j]);
        q[j] = p[j] + h;
        let plus = residuals(&q);
        q[j] = p[j] - h;
        let minus = residuals(&q);
        q[j] = p[j];
        match (plus, minus) {
            (Some(a), Some(b)) => {
                for i in 0..n {
                    jac[(i, j)] = (a[i] - b[i]) / (2.0 * h);
                }
            }
            (Some(a), None) => {
                for i in 0..n {
                    jac[(i, j)] = (a[i] - r0[i]) / h;
                }
            }
            (None, Some(b)) => {
                for i in 0..n {
                    jac[(i, j)] = (r0[i] - b[i]) / h;
                }
            }
            (None, None) => return None,
        }
    }
    jac.iter().all(|x| x.is_finite()).then_some(jac)
}

/// Weighted curve fit of `model(params, x)` to `(x, y)` samples, minimising
/// sum w_i (y_i - model)^2. Weights default to one.
pub fn curve_fit(
    model: impl Fn(&[f64], f64) -> f64,
    x: &[f64],
    y: &[f64],
    weights: Option<&[f64]>,
    initial: &[f64],
    opts: &LmOptions,
) -> Result<FitResult, LmError> {
    assert_eq!(x.len(), y.len());
    let sw: Vec<f64> = match weights {
        Some(w) => w.iter().map(|w| w.sqrt()).collect(),
        None => vec![1.0; x.len()],
    };
    least_squares(
        |p| Some(x.iter().zip(y).zip(&sw).map(|((xi, yi), s)| s * (yi - model(p, *xi))).collect()),
        initial,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_recovered() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|x| 3.0 * (-2.0 * x).exp()).collect();
        let fit = curve_fit(|p, x| p[0] * (-p[1] * x).exp(), &x, &y, None, &[1.0, 1.0], &LmOptions::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.parameters[0] - 3.0).abs() < 1e-8);
        assert!((fit.parameters[1] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn constant_data() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [5.0; 4];
        let fit = curve_fit(|p, _| p[0], &x, &y, None, &[1.0], &LmOptions::default()).unwrap();
        assert!((fit.parameters[0] - 5.0).abs() < 1e-10);
        assert!(fit.residual_sum_squares < 1e-18);
    }

    #[test]
    fn line_with_symmetric_perturbation() {
        // y = 2x + 1 on x = -1, 0, 1, 2 with +eps, -eps, -eps, +eps. The
        // perturbation is orthogonal to both 1 and x, so OLS returns the
        // clean line and RSS = 4 eps^2.
        let eps = 0.01;
        let x = [-1.0, 0.0, 1.0, 2.0];
        let y = [-1.0 + eps, 1.0 - eps, 3.0 - eps, 5.0 + eps];
        let fit = curve_fit(|p, x| p[0] * x + p[1], &x, &y, None, &[0.0, 0.0], &LmOptions::default()).unwrap();
        assert!((fit.parameters[0] - 2.0).abs() < 1e-9);
        assert!((fit.parameters[1] - 1.0).abs() < 1e-9);
        assert!((fit.residual_sum_squares - 4.0 * eps * eps).abs() < 1e-12);
    }

    #[test]
    fn two_point_perturbation_closed_form() {
        // perturb y at two points symmetric about the centre by +eps and -eps:
        // x = 0..=4, shifts at x=1 (+eps) and x=3 (-eps). OLS slope moves by
        // sum((x - 2) dy) / sum((x - 2)^2) = -2 eps / 10, intercept stays at
        // the mean, and RSS = 2 eps^2 - (2 eps)^2 / 10.
        let eps = 0.05;
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let mut y: Vec<f64> = x.iter().map(|x| 2.0 * x + 1.0).collect();
        y[1] += eps;
        y[3] -= eps;
        let fit = curve_fit(|p, x| p[0] * x + p[1], &x, &y, None, &[0.0, 0.0], &LmOptions::default()).unwrap();
        let slope = 2.0 - 0.2 * eps;
        assert!((fit.parameters[0] - slope).abs() < 1e-10);
        assert!((fit.parameters[1] - (5.0 - 2.0 * slope)).abs() < 1e-10);
        assert!((fit.residual_sum_squares - (2.0 * eps * eps - 0.4 * eps * eps)).abs() < 1e-12);
    }

    #[test]
    fn standard_errors_match_ols_formula() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let noise = [0.3, -0.1, 0.2, -0.4, 0.1, 0.0, -0.2, 0.5, -0.3, 0.1, 0.2, -0.1, 0.0, 0.3, -0.2, -0.1, 0.4, -0.5, 0.2, 0.0];
        let y: Vec<f64> = x.iter().zip(noise).map(|(x, e)| 0.5 * x - 1.0 + e).collect();
        let fit = curve_fit(|p, x| p[0] * x + p[1], &x, &y, None, &[1.0, 1.0], &LmOptions::default()).unwrap();
        let n = x.len() as f64;
        let xm = x.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|x| (x - xm).powi(2)).sum();
        let s2 = fit.residual_sum_squares / (n - 2.0);
        let se_slope = (s2 / sxx).sqrt();
        let se_icpt = (s2 * (1.0 / n + xm * xm / sxx)).sqrt();
        assert!((fit.standard_errors[0] - se_slope).abs() < 1e-6 * se_slope);
        assert!((fit.standard_errors[1] - se_icpt).abs() < 1e-6 * se_icpt);
    }

    #[test]
    fn underdetermined_rejected() {
        let err = curve_fit(|p, x| p[0] * x + p[1], &[1.0], &[2.0], None, &[0.0, 0.0], &LmOptions::default());
        assert!(matches!(err, Err(LmError::Underdetermined { .. })));
    }
}
