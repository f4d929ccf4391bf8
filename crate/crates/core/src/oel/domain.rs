//! Membership of `theta` in the OEL domain: is the origin an interior point
//! of the convex hull of `{g(X_i, theta)}`?

use nalgebra::{DMatrix, DVector};

use crate::lp::{self, LpOutcome};

/// Interior margin on the max-min weight below which the origin counts as
/// lying on the hull boundary (and hence outside the open domain).
pub const MIN_WEIGHT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Strictly positive weights summing to one with `sum w_i g_i = 0`.
    Weights(Vec<f64>),
    /// Direction `v` with `v . g_i >= 0` for every `i`.
    Direction(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainStatus {
    pub inside: bool,
    pub certificate: Certificate,
}

impl DomainStatus {
    /// Checks the certificate against the `n x q` matrix of g-values.
    pub fn verify(&self, g: &DMatrix<f64>) -> bool {
        match (&self.certificate, self.inside) {
            (Certificate::Weights(w), true) => {
                if w.len() != g.nrows() || w.iter().any(|v| *v <= 0.0) {
                    return false;
                }
                let total: f64 = w.iter().sum();
                let scale = g.amax().max(1.0);
                let combo = g.transpose() * DVector::from_column_slice(w);
                (total - 1.0).abs() <= 1e-9 && combo.amax() <= 1e-9 * scale
            }
            (Certificate::Direction(v), false) => {
                let v = DVector::from_column_slice(v);
                if v.len() != g.ncols() || v.amax() == 0.0 {
                    return false;
                }
                let v = &v / v.norm();
                (g * v).min() >= -1e-10 * g.amax().max(1.0)
            }
            _ => false,
        }
    }
}

/// Decides whether the origin is interior to the hull of the rows of `g`.
///
/// A rank-deficient set is reported outside with a direction from the
/// orthogonal complement of its span. Otherwise solves
///
/// ```text
/// maximize t  s.t.  sum w_i g_i = 0,  sum w_i = 1,  w_i >= t
/// ```
///
/// whose optimal dual `(v, mu)` satisfies `v . g_i >= -mu`; when the optimum
/// `t* = mu` is not positive, `v` separates.
pub fn hull_status(g: &DMatrix<f64>) -> DomainStatus {
    let (n, q) = g.shape();

    // Rescale columns so pivot tolerances are meaningful.
    let scale: Vec<f64> = (0..q)
        .map(|j| {
            let s = g.column(j).amax();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let gs = DMatrix::from_fn(n, q, |i, j| g[(i, j)] / scale[j]);
    let unscale_direction = |v: &DVector<f64>| -> Vec<f64> {
        let raw: Vec<f64> = v.iter().zip(&scale).map(|(a, s)| a / s).collect();
        let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
        raw.iter().map(|a| a / norm).collect()
    };

    if let Some(v) = null_direction(&gs) {
        let v = unscale_direction(&v);
        return DomainStatus { inside: false, certificate: Certificate::Direction(v) };
    }

    // Columns: u_1..u_n, t+, t-  with w_i = u_i + t+ - t-.
    let m = q + 1;
    let ncols = n + 2;
    let sums: Vec<f64> = (0..q).map(|j| gs.column(j).sum()).collect();
    let mut a = DMatrix::zeros(m, ncols);
    for i in 0..n {
        for j in 0..q {
            a[(j, i)] = gs[(i, j)];
        }
        a[(q, i)] = 1.0;
    }
    for j in 0..q {
        a[(j, n)] = sums[j];
        a[(j, n + 1)] = -sums[j];
    }
    a[(q, n)] = n as f64;
    a[(q, n + 1)] = -(n as f64);
    let mut b = DVector::zeros(m);
    b[q] = 1.0;
    let mut c = DVector::zeros(ncols);
    c[n] = 1.0;
    c[n + 1] = -1.0;

    match lp::solve(&a, &b, &c) {
        LpOutcome::Optimal { x, y, value } => {
            if value > MIN_WEIGHT_MARGIN {
                let t = x[n] - x[n + 1];
                let w: Vec<f64> = (0..n).map(|i| x[i] + t).collect();
                DomainStatus { inside: true, certificate: Certificate::Weights(w) }
            } else {
                let v = y.rows(0, q).into_owned();
                DomainStatus { inside: false, certificate: Certificate::Direction(unscale_direction(&v)) }
            }
        }
        LpOutcome::Infeasible { y } => {
            let v = y.rows(0, q).into_owned();
            DomainStatus { inside: false, certificate: Certificate::Direction(unscale_direction(&v)) }
        }
        // t <= 1/n always; treat as a numerical failure on the boundary.
        LpOutcome::Unbounded => {
            let mut v = vec![0.0; q];
            v[0] = 1.0;
            DomainStatus { inside: false, certificate: Certificate::Direction(v) }
        }
    }
}

/// Unit vector orthogonal to every row when the rows do not span `R^q`.
fn null_direction(g: &DMatrix<f64>) -> Option<DVector<f64>> {
    let q = g.ncols();
    let gram = g.transpose() * g;
    let eig = gram.symmetric_eigen();
    let (imin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let lmax = eig.eigenvalues.max();
    if g.nrows() < q || lmin <= 1e-24 * lmax.max(f64::MIN_POSITIVE) || lmax == 0.0 {
        let v = eig.eigenvectors.column(imin).into_owned();
        return Some(v);
    }
    None
}
