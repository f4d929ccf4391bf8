//! Maximum empirical likelihood estimator, the centre of the similarity
//! mapping.

use nalgebra::{DMatrix, DVector};

use crate::error::{ElError, Result};
use crate::model::{EstimatingModel, StartRule};
use crate::oel::{oel_gradient, oel_loglik, ExtReal, SolverOptions};
use crate::sample::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeleMethod {
    RootSolve,
    ProfileMinimize,
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeleResult {
    pub theta_tilde: Vec<f64>,
    pub loglik_at_tilde: f64,
    pub method: MeleMethod,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeleOptions {
    pub solver: SolverOptions,
    /// Gradient-norm tolerance for over-determined minimisation.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Also try perturbed starts and keep the smallest `l`.
    pub multi_start: bool,
}

impl Default for MeleOptions {
    fn default() -> Self {
        MeleOptions {
            solver: SolverOptions { tol: 1e-11, max_iter: 200 },
            grad_tol: 1e-8,
            max_iter: 200,
            multi_start: false,
        }
    }
}

pub fn mele(
    model: &EstimatingModel,
    sample: &Sample,
    init: Option<&[f64]>,
    opts: &MeleOptions,
) -> Result<MeleResult> {
    sample.check_for(model)?;
    let start = match init {
        Some(t) => {
            model.check_theta(t)?;
            t.to_vec()
        }
        None => model.default_start(sample)?,
    };
    if model.is_just_determined() {
        let (theta, iterations) = solve_estimating_equations(model, sample, &start, model.q())?;
        let l = oel_loglik(model, sample, &theta, &opts.solver)?.finite().ok_or_else(|| {
            ElError::InvalidArgument("root of the estimating equations lies on the domain boundary".into())
        })?;
        let method = match model.start_rule() {
            StartRule::LeastSquares => MeleMethod::LeastSquares,
            _ => MeleMethod::RootSolve,
        };
        return Ok(MeleResult { theta_tilde: theta, loglik_at_tilde: l, method, converged: true, iterations });
    }

    let mut starts = vec![start];
    let inside = |t: &[f64]| -> Result<bool> {
        Ok(oel_loglik(model, sample, t, &opts.solver)?.is_finite())
    };
    if !inside(&starts[0])? || opts.multi_start {
        // Root of the first p estimating equations.
        let (sub, _) = solve_estimating_equations(model, sample, &starts[0], model.p())?;
        if !inside(&starts[0])? {
            starts[0] = sub.clone();
        } else {
            starts.push(sub.clone());
        }
        if opts.multi_start {
            for j in 0..model.p() {
                for sign in [-1.0, 1.0] {
                    let mut t = sub.clone();
                    t[j] += sign * 0.5 * (1.0 + sub[j].abs());
                    starts.push(t);
                }
            }
        }
    }

    let mut best: Option<MeleResult> = None;
    for s in &starts {
        if !inside(s)? {
            continue;
        }
        let res = minimize_loglik(model, sample, s, opts)?;
        if best.as_ref().is_none_or(|b| res.loglik_at_tilde < b.loglik_at_tilde) {
            best = Some(res);
        }
    }
    best.ok_or_else(|| ElError::DomainViolation { direction: vec![] })
}

/// Newton's method on the first `k` components of `sum_i g(X_i, theta) = 0`
/// (`k = p` components are used, so the system is square).
fn solve_estimating_equations(
    model: &EstimatingModel,
    sample: &Sample,
    start: &[f64],
    k: usize,
) -> Result<(Vec<f64>, usize)> {
    let p = model.p();
    debug_assert!(k >= p);
    let n = sample.n() as f64;
    let eval = |theta: &[f64]| -> (DVector<f64>, f64) {
        let s = model.g_sum(sample, theta);
        let v = DVector::from_iterator(p, s.into_iter().take(p));
        let norm = v.amax();
        (v, norm)
    };
    let mut theta = start.to_vec();
    let (mut s, mut norm) = eval(&theta);
    let target = 1e-10 * n;
    for iter in 0..100 {
        if norm <= target {
            return Ok((theta, iter));
        }
        let mut jac = DMatrix::zeros(p, p);
        for x in sample.rows() {
            let j = model.jacobian(x, &theta);
            jac += j.rows(0, p);
        }
        let step = jac
            .lu()
            .solve(&(-&s))
            .ok_or_else(|| ElError::RankDeficient("Jacobian of the estimating equations is singular".into()))?;
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, d)| t + alpha * d).collect();
            let (ts, tn) = eval(&trial);
            if tn < norm || tn <= target {
                theta = trial;
                s = ts;
                norm = tn;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            // Converged to rounding level of the sum.
            let scale: f64 = sample.as_flat().iter().fold(0.0, |a, b| a.max(b.abs()));
            if norm <= 1e-12 * n * (1.0 + scale * scale) {
                return Ok((theta, iter));
            }
            return Err(ElError::NonConvergence {
                what: "estimating-equation root",
                iterations: iter,
                residual: norm,
                last_iterate: theta,
            });
        }
    }
    if norm <= 1e-8 * n {
        return Ok((theta, 100));
    }
    Err(ElError::NonConvergence {
        what: "estimating-equation root",
        iterations: 100,
        residual: norm,
        last_iterate: theta,
    })
}

/// BFGS on `l(theta)` using the envelope gradient; the initial inverse
/// Hessian comes from finite differences of that gradient.
fn minimize_loglik(
    model: &EstimatingModel,
    sample: &Sample,
    start: &[f64],
    opts: &MeleOptions,
) -> Result<MeleResult> {
    let p = model.p();
    let value = |t: &DVector<f64>| -> Result<ExtReal> { oel_loglik(model, sample, t.as_slice(), &opts.solver) };
    let grad = |t: &DVector<f64>| -> Result<DVector<f64>> {
        Ok(DVector::from_vec(oel_gradient(model, sample, t.as_slice(), &opts.solver)?))
    };

    let mut x = DVector::from_column_slice(start);
    let mut f = value(&x)?.finite().ok_or(ElError::DomainViolation { direction: vec![] })?;
    let mut g = grad(&x)?;
    let mut inv_h = initial_inverse_hessian(&x, &g, &grad)?;

    for iter in 0..opts.max_iter {
        if g.norm() <= opts.grad_tol * (1.0 + f.abs()) {
            return Ok(MeleResult {
                theta_tilde: x.iter().copied().collect(),
                loglik_at_tilde: f,
                method: MeleMethod::ProfileMinimize,
                converged: true,
                iterations: iter,
            });
        }
        let mut dir = -(&inv_h * &g);
        if dir.dot(&g) >= 0.0 {
            inv_h = DMatrix::identity(p, p);
            dir = -g.clone();
        }
        let slope = dir.dot(&g);
        let mut alpha = 1.0;
        let mut next = None;
        for _ in 0..60 {
            let trial = &x + alpha * &dir;
            if let ExtReal::Finite(ft) = value(&trial)? {
                if ft <= f + 1e-4 * alpha * slope {
                    next = Some((trial, ft));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew)) = next else {
            // Line search stalled at rounding level.
            let converged = g.norm() <= 1e-6 * (1.0 + f.abs());
            if converged {
                return Ok(MeleResult {
                    theta_tilde: x.iter().copied().collect(),
                    loglik_at_tilde: f,
                    method: MeleMethod::ProfileMinimize,
                    converged,
                    iterations: iter,
                });
            }
            return Err(ElError::NonConvergence {
                what: "empirical likelihood minimisation",
                iterations: iter,
                residual: g.norm(),
                last_iterate: x.iter().copied().collect(),
            });
        };
        let gn = grad(&xn)?;
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-14 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let ident = DMatrix::<f64>::identity(p, p);
            let left = &ident - rho * &s * y.transpose();
            let right = &ident - rho * &y * s.transpose();
            inv_h = &left * &inv_h * &right + rho * &s * s.transpose();
        }
        x = xn;
        f = fnew;
        g = gn;
    }
    Err(ElError::NonConvergence {
        what: "empirical likelihood minimisation",
        iterations: opts.max_iter,
        residual: g.norm(),
        last_iterate: x.iter().copied().collect(),
    })
}

fn initial_inverse_hessian(
    x: &DVector<f64>,
    g: &DVector<f64>,
    grad: &dyn Fn(&DVector<f64>) -> Result<DVector<f64>>,
) -> Result<DMatrix<f64>> {
    let p = x.len();
    let mut hess = DMatrix::zeros(p, p);
    for j in 0..p {
        let h = 1e-5 * (1.0 + x[j].abs());
        let mut xp = x.clone();
        xp[j] += h;
        let column = match grad(&xp) {
            Ok(gp) => (gp - g) / h,
            Err(ElError::DomainViolation { .. }) => {
                xp[j] = x[j] - h;
                (g - grad(&xp)?) / h
            }
            Err(e) => return Err(e),
        };
        hess.set_column(j, &column);
    }
    let sym = (&hess + hess.transpose()) * 0.5;
    Ok(match sym.clone().cholesky() {
        Some(c) => c.inverse(),
        None => DMatrix::identity(p, p),
    })
}
