//! Estimating functions `g(x, theta)` and the built-in families.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{ElError, Result};
use crate::sample::Sample;

/// Writes `g(x, theta)` (length `q`) into the output slice.
pub type EstimatingFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;
/// Writes the `q x p` Jacobian `dg/dtheta` into the output matrix.
pub type JacobianFn = dyn Fn(&[f64], &[f64], &mut DMatrix<f64>) + Send + Sync;

/// How the default starting value for the estimator is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartRule {
    Zero,
    /// Mean of the first `p` observation coordinates.
    SampleMean,
    /// Least squares of column 0 on the remaining columns.
    LeastSquares,
}

/// An estimating function defining `theta` through `E[g(X, theta)] = 0`.
#[derive(Clone)]
pub struct EstimatingModel {
    name: String,
    d: usize,
    p: usize,
    q: usize,
    g: Arc<EstimatingFn>,
    jacobian: Option<Arc<JacobianFn>>,
    start: StartRule,
}

impl fmt::Debug for EstimatingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EstimatingModel")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("p", &self.p)
            .field("q", &self.q)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("start", &self.start)
            .finish()
    }
}

impl EstimatingModel {
    pub fn new<F>(name: impl Into<String>, d: usize, p: usize, q: usize, g: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if d == 0 || p == 0 {
            return Err(ElError::InvalidDimension("d and p must be positive".into()));
        }
        if q < p {
            return Err(ElError::InvalidDimension(format!(
                "estimating-function dimension q = {q} is below p = {p}"
            )));
        }
        Ok(EstimatingModel {
            name: name.into(),
            d,
            p,
            q,
            g: Arc::new(g),
            jacobian: None,
            start: StartRule::Zero,
        })
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(&[f64], &[f64], &mut DMatrix<f64>) + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_start(mut self, start: StartRule) -> Self {
        self.start = start;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn start_rule(&self) -> StartRule {
        self.start
    }
    pub fn is_just_determined(&self) -> bool {
        self.q == self.p
    }
    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn g_into(&self, x: &[f64], theta: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.d);
        debug_assert_eq!(theta.len(), self.p);
        debug_assert_eq!(out.len(), self.q);
        (self.g)(x, theta, out)
    }

    pub fn g(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.q];
        self.g_into(x, theta, &mut out);
        out
    }

    /// `n x q` matrix whose i-th row is `g(X_i, theta)`.
    pub fn g_matrix(&self, sample: &Sample, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        let mut m = DMatrix::zeros(sample.n(), self.q);
        let mut buf = vec![0.0; self.q];
        for (i, x) in sample.rows().enumerate() {
            self.g_into(x, theta, &mut buf);
            if buf.iter().any(|v| !v.is_finite()) {
                return Err(ElError::InvalidArgument(format!(
                    "g is not finite at observation {i}"
                )));
            }
            for (j, v) in buf.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    /// Analytic Jacobian when available, central differences otherwise.
    pub fn jacobian(&self, x: &[f64], theta: &[f64]) -> DMatrix<f64> {
        match &self.jacobian {
            Some(jac) => {
                let mut m = DMatrix::zeros(self.q, self.p);
                jac(x, theta, &mut m);
                m
            }
            None => self.jacobian_fd(x, theta),
        }
    }

    /// Central-difference Jacobian with step `1e-6 * (1 + |theta_j|)`.
    pub fn jacobian_fd(&self, x: &[f64], theta: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.q, self.p);
        let mut t = theta.to_vec();
        let mut plus = vec![0.0; self.q];
        let mut minus = vec![0.0; self.q];
        for j in 0..self.p {
            let h = 1e-6 * (1.0 + theta[j].abs());
            t[j] = theta[j] + h;
            self.g_into(x, &t, &mut plus);
            t[j] = theta[j] - h;
            self.g_into(x, &t, &mut minus);
            t[j] = theta[j];
            for i in 0..self.q {
                m[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        m
    }

    /// Largest entrywise relative discrepancy between the analytic Jacobian
    /// and central differences at `(x, theta)`; `None` without an analytic one.
    pub fn jacobian_discrepancy(&self, x: &[f64], theta: &[f64]) -> Option<f64> {
        self.jacobian.as_ref()?;
        let a = self.jacobian(x, theta);
        let f = self.jacobian_fd(x, theta);
        let err = a
            .iter()
            .zip(f.iter())
            .map(|(a, f)| (a - f).abs() / f.abs().max(1.0))
            .fold(0.0, f64::max);
        Some(err)
    }

    /// Sum of `g(X_i, theta)` over the sample.
    pub fn g_sum(&self, sample: &Sample, theta: &[f64]) -> Vec<f64> {
        let mut total = vec![0.0; self.q];
        let mut buf = vec![0.0; self.q];
        for x in sample.rows() {
            self.g_into(x, theta, &mut buf);
            for (t, v) in total.iter_mut().zip(&buf) {
                *t += v;
            }
        }
        total
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.p {
            return Err(ElError::InvalidDimension(format!(
                "theta has length {}, model {} has p = {}",
                theta.len(),
                self.name,
                self.p
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(ElError::InvalidArgument("theta must be finite".into()));
        }
        Ok(())
    }

    /// Default starting value for the estimator.
    pub fn default_start(&self, sample: &Sample) -> Result<Vec<f64>> {
        match self.start {
            StartRule::Zero => Ok(vec![0.0; self.p]),
            StartRule::SampleMean => {
                let m = sample.column_means();
                Ok(m.into_iter().take(self.p).collect())
            }
            StartRule::LeastSquares => least_squares(sample),
        }
    }
}

/// `g(x, theta) = x - theta` with `d = p = q = dim`.
pub fn builtin_mean(dim: usize) -> Result<EstimatingModel> {
    if dim == 0 {
        return Err(ElError::InvalidDimension("mean model needs dim >= 1".into()));
    }
    Ok(EstimatingModel::new("mean", dim, dim, dim, |x, theta, out| {
        for ((o, xv), t) in out.iter_mut().zip(x).zip(theta) {
            *o = xv - t;
        }
    })?
    .with_jacobian(|_, _, jac| {
        jac.fill(0.0);
        jac.fill_diagonal(-1.0);
    })
    .with_start(StartRule::SampleMean))
}

/// Least-squares score `g((y, x), beta) = x (y - x'beta)`. Observations are
/// stored as `(y, x_1, ..., x_k)`, so `d = k + 1` and `p = q = k`.
pub fn builtin_linear_regression(covariate_dim: usize) -> Result<EstimatingModel> {
    if covariate_dim == 0 {
        return Err(ElError::InvalidDimension("regression needs at least one covariate".into()));
    }
    let k = covariate_dim;
    Ok(EstimatingModel::new("linear-regression", k + 1, k, k, move |obs, beta, out| {
        let (y, x) = (obs[0], &obs[1..]);
        let fit: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
        let resid = y - fit;
        for (o, xv) in out.iter_mut().zip(x) {
            *o = xv * resid;
        }
    })?
    .with_jacobian(move |obs, _, jac| {
        let x = &obs[1..];
        for i in 0..k {
            for j in 0..k {
                jac[(i, j)] = -x[i] * x[j];
            }
        }
    })
    .with_start(StartRule::LeastSquares))
}

/// Over-determined location model `g(x, theta) = (x - theta, (x - theta)^2 - 1)`.
pub fn builtin_mean_variance() -> EstimatingModel {
    EstimatingModel::new("mean-variance", 1, 1, 2, |x, theta, out| {
        let r = x[0] - theta[0];
        out[0] = r;
        out[1] = r * r - 1.0;
    })
    .expect("static dimensions are valid")
    .with_jacobian(|x, theta, jac| {
        jac[(0, 0)] = -1.0;
        jac[(1, 0)] = -2.0 * (x[0] - theta[0]);
    })
    .with_start(StartRule::SampleMean)
}

/// Least-squares coefficients of column 0 on the remaining columns.
pub fn least_squares(sample: &Sample) -> Result<Vec<f64>> {
    let k = sample.d().checked_sub(1).filter(|k| *k > 0).ok_or_else(|| {
        ElError::InvalidDimension("least squares needs a response and a covariate".into())
    })?;
    let mut xtx = DMatrix::<f64>::zeros(k, k);
    let mut xty = DVector::<f64>::zeros(k);
    for row in sample.rows() {
        let (y, x) = (row[0], &row[1..]);
        for i in 0..k {
            xty[i] += x[i] * y;
            for j in 0..k {
                xtx[(i, j)] += x[i] * x[j];
            }
        }
    }
    let chol = xtx
        .cholesky()
        .ok_or_else(|| ElError::RankDeficient("design matrix X'X is singular".into()))?;
    Ok(chol.solve(&xty).iter().copied().collect())
}

type Constructor = fn(usize) -> Result<EstimatingModel>;

/// Built-in models keyed by name. Constructors receive the observation
/// dimension `d` of the data they will be paired with.
#[derive(Clone)]
pub struct ModelRegistry {
    entries: BTreeMap<&'static str, Constructor>,
}

impl Default for ModelRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl ModelRegistry {
    pub fn builtin() -> Self {
        let mut entries: BTreeMap<&'static str, Constructor> = BTreeMap::new();
        entries.insert("mean", builtin_mean);
        entries.insert("linear-regression", |d| {
            builtin_linear_regression(d.saturating_sub(1))
        });
        entries.insert("regression", |d| builtin_linear_regression(d.saturating_sub(1)));
        entries.insert("mean-variance", |d| {
            if d != 1 {
                return Err(ElError::InvalidDimension(format!(
                    "mean-variance expects univariate data, got d = {d}"
                )));
            }
            Ok(builtin_mean_variance())
        });
        ModelRegistry { entries }
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn build(&self, name: &str, d: usize) -> Result<EstimatingModel> {
        let ctor = self.entries.get(name).ok_or_else(|| {
            ElError::InvalidArgument(format!(
                "unknown model {name:?}; known models: {}",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        ctor(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mean_model_values() {
        let m = builtin_mean(1).unwrap();
        assert_eq!(m.g(&[3.0], &[1.0]), vec![2.0]);
        let m = builtin_mean(2).unwrap();
        assert_eq!(m.g(&[1.0, 2.0], &[1.0, 2.0]), vec![0.0, 0.0]);
        let m = builtin_mean(3).unwrap();
        let jac = m.jacobian(&[0.3, -1.0, 9.0], &[1.0, 2.0, 3.0]);
        assert_eq!(jac, -DMatrix::<f64>::identity(3, 3));
        assert!(m.is_just_determined());
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(builtin_mean(0), Err(ElError::InvalidDimension(_))));
        assert!(matches!(builtin_linear_regression(0), Err(ElError::InvalidDimension(_))));
    }

    #[test]
    fn regression_values() {
        let m = builtin_linear_regression(2).unwrap();
        assert_eq!((m.d(), m.p(), m.q()), (3, 2, 2));
        assert_eq!(m.g(&[5.0, 1.0, 2.0], &[1.0, 2.0]), vec![0.0, 0.0]);
        assert_eq!(m.g(&[6.0, 1.0, 2.0], &[1.0, 2.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn mean_variance_values() {
        let m = builtin_mean_variance();
        assert_eq!(m.g(&[1.0], &[1.0]), vec![0.0, -1.0]);
        assert_eq!(m.g(&[2.0], &[1.0]), vec![1.0, 0.0]);
        assert!(!m.is_just_determined());
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let models = [
            builtin_mean(3).unwrap(),
            builtin_linear_regression(3).unwrap(),
            builtin_mean_variance(),
        ];
        for m in &models {
            for _ in 0..100 {
                let x: Vec<f64> = (0..m.d()).map(|_| rng.random_range(-5.0..5.0)).collect();
                let t: Vec<f64> = (0..m.p()).map(|_| rng.random_range(-5.0..5.0)).collect();
                let err = m.jacobian_discrepancy(&x, &t).unwrap();
                assert!(err <= 1e-5, "{}: {err}", m.name());
            }
        }
    }

    #[test]
    fn least_squares_zeroes_the_score_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<[f64; 3]> = (0..40)
            .map(|_| {
                let x1: f64 = rng.random_range(0.0..30.0);
                let e: f64 = rng.random_range(-1.0..1.0);
                [1.0 + 2.0 * x1 + e, 1.0, x1]
            })
            .collect();
        let s = Sample::from_rows(&rows).unwrap();
        let beta = least_squares(&s).unwrap();
        let m = builtin_linear_regression(2).unwrap();
        for v in m.g_sum(&s, &beta) {
            assert!(v.abs() <= 1e-10 * 40.0 * 30.0, "{v}");
        }
    }

    #[test]
    fn registry_builds_by_name() {
        let reg = ModelRegistry::builtin();
        assert_eq!(reg.build("mean", 2).unwrap().p(), 2);
        assert_eq!(reg.build("linear-regression", 3).unwrap().p(), 2);
        assert!(reg.build("mean-variance", 2).is_err());
        assert!(reg.build("nope", 1).is_err());
    }
}
