//! Original empirical likelihood: domain test, Lagrange dual, gradient.

mod domain;

use std::fmt;

use nalgebra::{DMatrix, DVector};

pub use domain::{hull_status, Certificate, DomainStatus, MIN_WEIGHT_MARGIN};

use crate::error::{ElError, Result};
use crate::model::EstimatingModel;
use crate::sample::Sample;

/// A log-likelihood ratio that is `+inf` outside the OEL domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    /// `f64::INFINITY` for the infinite value.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// `self <= c`; never true for the infinite value.
    pub fn at_most(self, c: f64) -> bool {
        matches!(self, ExtReal::Finite(v) if v <= c)
    }

    pub fn scale(self, factor: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v * factor),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => fmt::Display::fmt(v, f),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bound on the infinity norm of `sum g_i / (1 + lambda . g_i)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub lambda: Vec<f64>,
    /// `2 sum log(1 + lambda . g_i)`.
    pub loglik_ratio: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub max_residual: f64,
}

pub fn in_domain(model: &EstimatingModel, sample: &Sample, theta: &[f64]) -> Result<DomainStatus> {
    sample.check_for(model)?;
    let g = model.g_matrix(sample, theta)?;
    Ok(hull_status(&g))
}

pub fn solve_dual(
    model: &EstimatingModel,
    sample: &Sample,
    theta: &[f64],
    opts: &SolverOptions,
) -> Result<DualSolution> {
    sample.check_for(model)?;
    let g = model.g_matrix(sample, theta)?;
    solve_dual_g(&g, opts)
}

/// Dual solve on a precomputed `n x q` matrix of g-values.
pub fn solve_dual_g(g: &DMatrix<f64>, opts: &SolverOptions) -> Result<DualSolution> {
    // Uniform weights already satisfy the constraint: lambda = 0 solves the
    // dual, even when the g-values are degenerate (e.g. a noiseless fit).
    let n = g.nrows();
    if g.row_sum().amax() <= opts.tol {
        return Ok(DualSolution {
            lambda: vec![0.0; g.ncols()],
            loglik_ratio: 0.0,
            weights: vec![1.0 / n as f64; n],
            iterations: 0,
            converged: true,
            max_residual: g.row_sum().amax(),
        });
    }
    // converged weights summing to one certify an interior point
    let attempt = newton_dual(g, opts);
    if let Ok(sol) = &attempt {
        if sol.converged && (sol.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-6 {
            return attempt;
        }
    }
    let status = hull_status(g);
    if !status.inside {
        let Certificate::Direction(direction) = status.certificate else {
            unreachable!("outside status always carries a direction")
        };
        return Err(ElError::DomainViolation { direction });
    }
    attempt
}

/// Objective of the convex dual, `-sum log(1 + lambda . g_i)`; `None` when
/// some `1 + lambda . g_i` falls below the floor `1/n`.
fn dual_objective(g: &DMatrix<f64>, lambda: &DVector<f64>, z: &mut DVector<f64>) -> Option<f64> {
    let floor = 1.0 / g.nrows() as f64;
    g.mul_to(lambda, z);
    let mut f = 0.0;
    for zi in z.iter_mut() {
        *zi += 1.0;
        if *zi < floor {
            return None;
        }
        f -= zi.ln();
    }
    Some(f)
}

/// Damped Newton on `f(lambda) = -sum log(1 + lambda . g_i)` with
/// backtracking that keeps every `1 + lambda . g_i >= 1/n`.
fn newton_dual(g: &DMatrix<f64>, opts: &SolverOptions) -> Result<DualSolution> {
    let (n, q) = g.shape();
    let mut lambda = DVector::zeros(q);
    let mut z = DVector::zeros(n);
    let mut trial_z = DVector::zeros(n);
    let mut f = dual_objective(g, &lambda, &mut z).expect("lambda = 0 is feasible");
    let mut iterations = 0;
    let mut residual;
    let mut polished = false;

    loop {
        // score r = sum g_i / z_i, Hessian H = sum g_i g_i' / z_i^2
        let mut r = DVector::zeros(q);
        let mut h = DMatrix::zeros(q, q);
        for i in 0..n {
            let gi = g.row(i);
            let inv = 1.0 / z[i];
            for a in 0..q {
                r[a] += gi[a] * inv;
                for b in 0..=a {
                    h[(a, b)] += gi[a] * gi[b] * inv * inv;
                }
            }
        }
        for a in 0..q {
            for b in 0..a {
                h[(b, a)] = h[(a, b)];
            }
        }
        residual = r.amax();
        // Close to the hull boundary the score cannot be resolved below the
        // rounding floor of its terms.
        let target = opts.tol.max(1e-13 * rounding_scale(g, &lambda, &z));
        // One extra Newton step once within tolerance: it costs little and
        // squares the error.
        if residual <= target && (polished || residual <= opts.tol * 1e-6) {
            break;
        }
        if residual <= target {
            polished = true;
        }
        if iterations >= opts.max_iter && residual <= target {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(ElError::NonConvergence {
                what: "empirical likelihood dual",
                iterations,
                residual,
                last_iterate: lambda.iter().copied().collect(),
            });
        }
        let step = h
            .cholesky()
            .map(|c| c.solve(&r))
            .ok_or_else(|| ElError::RankDeficient("dual Hessian is singular".into()))?;
        // directional derivative of f along the step
        let slope = -r.dot(&step);
        // Inside the quadratic-convergence region of a self-concordant
        // function (Newton decrement below 1/4) the full step is taken.
        let full_step_ok = -slope < 0.0625;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &lambda + alpha * &step;
            if let Some(ft) = dual_objective(g, &trial, &mut trial_z) {
                if (full_step_ok && alpha == 1.0) || ft <= f + 1e-4 * alpha * slope {
                    lambda = trial;
                    f = ft;
                    std::mem::swap(&mut z, &mut trial_z);
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        iterations += 1;
        if !accepted {
            // No decrease possible: rounding floor of the objective.
            if residual <= opts.tol.max(1e-13 * rounding_scale(g, &lambda, &z)) {
                break;
            }
            return Err(ElError::NonConvergence {
                what: "empirical likelihood dual (line search)",
                iterations,
                residual,
                last_iterate: lambda.iter().copied().collect(),
            });
        }
    }

    let weights: Vec<f64> = z.iter().map(|zi| 1.0 / (n as f64 * zi)).collect();
    let loglik_ratio = 2.0 * z.iter().map(|zi| zi.ln()).sum::<f64>();
    Ok(DualSolution {
        lambda: lambda.iter().copied().collect(),
        loglik_ratio,
        weights,
        iterations,
        converged: residual <= opts.tol,
        max_residual: residual,
    })
}

/// Rounding floor of the score sum. Each `z_i = 1 + lambda . g_i` carries an
/// absolute error of order `eps * (1 + sum_a |lambda_a g_ia|)`, which the
/// term `g_i / z_i` amplifies by `|g_i| / z_i^2`.
fn rounding_scale(g: &DMatrix<f64>, lambda: &DVector<f64>, z: &DVector<f64>) -> f64 {
    g.row_iter()
        .zip(z.iter())
        .map(|(gi, zi)| {
            let spread: f64 = gi.iter().zip(lambda.iter()).map(|(a, b)| (a * b).abs()).sum();
            gi.amax() * (1.0 + spread) / (zi * zi)
        })
        .sum()
}

/// `l(theta)`, or `+inf` outside the domain.
pub fn oel_loglik(
    model: &EstimatingModel,
    sample: &Sample,
    theta: &[f64],
    opts: &SolverOptions,
) -> Result<ExtReal> {
    match solve_dual(model, sample, theta, opts) {
        Ok(sol) => Ok(ExtReal::Finite(sol.loglik_ratio)),
        Err(ElError::DomainViolation { .. }) => Ok(ExtReal::Infinite),
        Err(e) => Err(e),
    }
}

/// Envelope gradient `J(theta) = 2 sum G_i' lambda / (1 + lambda . g_i)`,
/// where `G_i` is the Jacobian of `g(X_i, .)`. Without an analytic Jacobian
/// falls back to central differences of `l`.
pub fn oel_gradient(
    model: &EstimatingModel,
    sample: &Sample,
    theta: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let sol = solve_dual(model, sample, theta, opts)?;
    if !model.has_analytic_jacobian() {
        return loglik_gradient_fd(model, sample, theta, opts);
    }
    let lambda = DVector::from_column_slice(&sol.lambda);
    let n = sample.n() as f64;
    let mut grad = DVector::zeros(model.p());
    for (x, w) in sample.rows().zip(&sol.weights) {
        let jac = model.jacobian(x, theta);
        // 1/(1 + lambda . g_i) = n w_i
        grad += jac.transpose() * &lambda * (2.0 * n * w);
    }
    Ok(grad.iter().copied().collect())
}

/// Central differences of `l` with step `1e-6 * (1 + |theta_j|)`.
pub fn loglik_gradient_fd(
    model: &EstimatingModel,
    sample: &Sample,
    theta: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let mut t = theta.to_vec();
    let mut out = Vec::with_capacity(theta.len());
    for j in 0..theta.len() {
        let h = 1e-6 * (1.0 + theta[j].abs());
        t[j] = theta[j] + h;
        let up = oel_loglik(model, sample, &t, opts)?;
        t[j] = theta[j] - h;
        let down = oel_loglik(model, sample, &t, opts)?;
        t[j] = theta[j];
        match (up, down) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => out.push((a - b) / (2.0 * h)),
            _ => {
                return Err(ElError::DomainViolation { direction: vec![] });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_mean;

    fn mean_case(values: &[f64]) -> (EstimatingModel, Sample) {
        (builtin_mean(1).unwrap(), Sample::from_scalars(values).unwrap())
    }

    #[test]
    fn uniform_weights_at_the_sample_mean() {
        let (m, s) = mean_case(&[1.0, 2.0, 3.0]);
        let sol = solve_dual(&m, &s, &[2.0], &SolverOptions::default()).unwrap();
        assert_eq!(sol.lambda, vec![0.0]);
        assert_eq!(sol.loglik_ratio, 0.0);
        assert!(sol.converged);
    }

    #[test]
    fn closed_form_multiplier() {
        // -1/(1 - lambda) + 2/(1 + 2 lambda) = 0  =>  lambda = 1/4
        let (m, s) = mean_case(&[1.0, 2.0, 4.0]);
        let sol = solve_dual(&m, &s, &[2.0], &SolverOptions::default()).unwrap();
        assert!((sol.lambda[0] - 0.25).abs() < 1e-10, "{:?}", sol);
        assert!((sol.loglik_ratio - 2.0 * 1.125f64.ln()).abs() < 1e-10);
        assert!((sol.loglik_ratio - 0.235566).abs() < 1e-6);
        let total: f64 = sol.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-8);
        assert!(sol.weights.iter().all(|w| *w > 0.0));
        // weight identity: -2 sum log(n w_i) reproduces l
        let alt: f64 = -2.0 * sol.weights.iter().map(|w| (3.0 * w).ln()).sum::<f64>();
        assert!((alt - sol.loglik_ratio).abs() < 1e-8);
    }

    #[test]
    fn outside_domain_is_an_error_with_certificate() {
        let (m, s) = mean_case(&[1.0, 2.0, 3.0]);
        match solve_dual(&m, &s, &[5.0], &SolverOptions::default()) {
            Err(ElError::DomainViolation { direction }) => assert!(direction[0] < 0.0),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            oel_loglik(&m, &s, &[10.0], &SolverOptions::default()).unwrap(),
            ExtReal::Infinite
        );
    }

    #[test]
    fn boundary_point_is_outside() {
        let (m, s) = mean_case(&[1.0, 2.0, 3.0]);
        assert_eq!(oel_loglik(&m, &s, &[3.0], &SolverOptions::default()).unwrap(), ExtReal::Infinite);
    }

    #[test]
    fn loglik_at_sample_mean_is_zero() {
        let (m, s) = mean_case(&[1.0, 2.0, 4.0]);
        let l = oel_loglik(&m, &s, &[7.0 / 3.0], &SolverOptions::default()).unwrap();
        assert!(l.finite().unwrap().abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_the_mele_and_matches_differences() {
        let (m, s) = mean_case(&[1.0, 2.0, 4.0]);
        let opts = SolverOptions::default();
        let g0 = oel_gradient(&m, &s, &[7.0 / 3.0], &opts).unwrap();
        assert!(g0[0].abs() < 1e-12);
        let g = oel_gradient(&m, &s, &[2.0], &opts).unwrap();
        let fd = loglik_gradient_fd(&m, &s, &[2.0], &opts).unwrap();
        assert!((g[0] - fd[0]).abs() / fd[0].abs().max(1.0) < 1e-5, "{g:?} vs {fd:?}");
    }

    #[test]
    fn ext_real_display() {
        assert_eq!(ExtReal::Infinite.to_string(), "inf");
        assert!(!ExtReal::Infinite.at_most(1e300));
        assert!(ExtReal::Finite(1.0).at_most(1.0));
    }
}
