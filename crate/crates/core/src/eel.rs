//! Composite similarity mapping, its generalized inverse, the first- and
//! second-order extended empirical likelihood, and the Bartlett correction.
//!
//! The mapping sends `theta` in the OEL domain to
//! `centre + gamma(n, l(theta)) * (theta - centre)`. Every OEL contour is
//! scaled about the centre by its own factor, so images keep their shape
//! while the domain is stretched over all of `R^p`. The extended likelihood
//! at `theta` is the OEL at the preimage closest to `theta`.

use log::warn;
use nalgebra::DMatrix;

use crate::error::{ElError, Result};
use crate::estimator::{mele, MeleOptions, MeleResult};
use crate::model::EstimatingModel;
use crate::oel::{oel_loglik, ExtReal, SolverOptions};
use crate::sample::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExpansionOrder {
    First,
    Second,
}

/// `gamma(n, l)`: `1 + l/(2n)` at first order, `1 + (b/(2n)) l^delta(n)`
/// with `delta(n) = n^(-1/2)` at second order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionFactor {
    pub order: ExpansionOrder,
    pub n: usize,
    pub bartlett_b: Option<f64>,
    pub delta_n: f64,
}

impl ExpansionFactor {
    pub fn first(n: usize) -> Self {
        ExpansionFactor { order: ExpansionOrder::First, n, bartlett_b: None, delta_n: 0.0 }
    }

    pub fn second(n: usize, b: f64) -> Self {
        ExpansionFactor {
            order: ExpansionOrder::Second,
            n,
            bartlett_b: Some(b),
            delta_n: 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn gamma(&self, l: f64) -> f64 {
        let l = l.max(0.0);
        let n = self.n as f64;
        match self.order {
            ExpansionOrder::First => 1.0 + l / (2.0 * n),
            ExpansionOrder::Second => {
                // l^delta -> 0 as l -> 0+, so 1 is the continuous extension.
                if l == 0.0 {
                    return 1.0;
                }
                let b = self.bartlett_b.unwrap_or(0.0);
                1.0 + b / (2.0 * n) * l.powf(self.delta_n)
            }
        }
    }
}

/// Tuning of the preimage search along the segment `[centre, theta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseOptions {
    /// Grid intervals used to bracket sign changes of `phi`.
    pub grid_intervals: usize,
    /// Bisection stops when the bracket in `t` is this narrow.
    pub t_tol: f64,
    /// OEL values above this (and points outside the domain) count as `phi > 0`.
    pub loglik_cap: f64,
    pub max_rescans: usize,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions { grid_intervals: 64, t_tol: 1e-12, loglik_cap: 1e6, max_rescans: 32 }
    }
}

/// The point `theta'` on `[centre, theta]` with `h(theta') = theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preimage {
    pub point: Vec<f64>,
    /// Position along the segment: `point = centre + t (theta - centre)`.
    pub t: f64,
    /// OEL at the preimage, i.e. the extended log-likelihood ratio.
    pub loglik: f64,
    /// `||h(point) - theta||`.
    pub residual: f64,
}

/// `h(theta) = centre + gamma(n, l(theta)) (theta - centre)`.
pub fn forward_map(
    center: &[f64],
    factor: &ExpansionFactor,
    oel_fn: &dyn Fn(&[f64]) -> Result<ExtReal>,
    theta: &[f64],
) -> Result<Vec<f64>> {
    let l = match oel_fn(theta)? {
        ExtReal::Finite(l) => l,
        ExtReal::Infinite => return Err(ElError::DomainViolation { direction: vec![] }),
    };
    let gamma = factor.gamma(l);
    Ok(center.iter().zip(theta).map(|(c, t)| c + gamma * (t - c)).collect())
}

/// Sign-carrying evaluation of `phi(t) = gamma(l(theta'(t))) t - 1`.
#[derive(Debug, Clone, Copy)]
struct PhiPoint {
    t: f64,
    phi: f64,
    /// Finite OEL at `theta'(t)` below the cap.
    loglik: Option<f64>,
}

impl PhiPoint {
    fn negative(&self) -> bool {
        self.phi < 0.0
    }
}

/// Generalized inverse of the mapping: the preimage of `theta` closest to
/// `theta`.
///
/// Along `theta'(t) = centre + t (theta - centre)` the preimages are the
/// roots of `phi`. The segment is scanned on a grid for sign changes, the
/// last one is refined by bisection, and the remainder of the segment past
/// that root is rescanned until no further root appears.
pub fn inverse_map(
    center: &[f64],
    factor: &ExpansionFactor,
    oel_fn: &dyn Fn(&[f64]) -> Result<ExtReal>,
    theta: &[f64],
    opts: &InverseOptions,
) -> Result<Preimage> {
    let diff: Vec<f64> = theta.iter().zip(center).map(|(t, c)| t - c).collect();
    let dist = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
    let at = |t: f64| -> Vec<f64> { center.iter().zip(&diff).map(|(c, d)| c + t * d).collect() };

    if dist == 0.0 {
        let l = oel_fn(center)?.finite().ok_or(ElError::DomainViolation { direction: vec![] })?;
        return Ok(Preimage { point: center.to_vec(), t: 0.0, loglik: l, residual: 0.0 });
    }

    let phi = |t: f64| -> Result<PhiPoint> {
        if t == 0.0 {
            let l = oel_fn(center)?.finite();
            return Ok(PhiPoint { t, phi: -1.0, loglik: l });
        }
        match oel_fn(&at(t))? {
            ExtReal::Finite(l) if l <= opts.loglik_cap => {
                Ok(PhiPoint { t, phi: factor.gamma(l) * t - 1.0, loglik: Some(l) })
            }
            _ => Ok(PhiPoint { t, phi: f64::INFINITY, loglik: None }),
        }
    };

    // Last bracket [a, b] with phi(a) < 0 <= phi(b) on a grid over [lo, 1].
    let scan = |lo: PhiPoint| -> Result<Option<(PhiPoint, PhiPoint)>> {
        let k = opts.grid_intervals.max(1);
        let mut prev = lo;
        let mut last = None;
        for i in 1..=k {
            let t = if i == k { 1.0 } else { lo.t + (1.0 - lo.t) * i as f64 / k as f64 };
            let cur = phi(t)?;
            if prev.negative() && !cur.negative() {
                last = Some((prev, cur));
            }
            prev = cur;
        }
        Ok(last)
    };

    let bisect = |mut a: PhiPoint, mut b: PhiPoint| -> Result<(PhiPoint, PhiPoint)> {
        while b.t - a.t > opts.t_tol {
            let mid = phi(0.5 * (a.t + b.t))?;
            if mid.t <= a.t || mid.t >= b.t {
                break;
            }
            if mid.negative() {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok((a, b))
    };

    let start = phi(0.0)?;
    let Some((a, b)) = scan(start)? else {
        let end = phi(1.0)?;
        return Err(ElError::Surjectivity { phi_end: end.phi });
    };
    let (mut a, mut b) = bisect(a, b)?;
    for _ in 0..opts.max_rescans {
        // Rescan past the current root, starting from its negative side so a
        // root just beyond it cannot be missed.
        let resume = if b.phi == 0.0 { b } else { a };
        let Some((na, nb)) = scan_after(resume, b, &scan)? else {
            break;
        };
        if nb.t <= b.t {
            break;
        }
        let refined = bisect(na, nb)?;
        a = refined.0;
        b = refined.1;
    }

    // Prefer the finite side of the final bracket closest to a root.
    let chosen = match (a.loglik, b.loglik) {
        (_, Some(_)) if b.phi.abs() <= a.phi.abs() => b,
        (Some(_), _) => a,
        (None, Some(_)) => b,
        (None, None) => return Err(ElError::Surjectivity { phi_end: b.phi }),
    };
    let loglik = chosen.loglik.expect("chosen point has a finite OEL");
    let residual = chosen.phi.abs() * dist;
    Ok(Preimage { point: at(chosen.t), t: chosen.t, loglik, residual })
}

/// Rescan `(root, 1]` for a further negative-to-nonnegative crossing.
fn scan_after<F>(
    resume: PhiPoint,
    root_right: PhiPoint,
    scan: &F,
) -> Result<Option<(PhiPoint, PhiPoint)>>
where
    F: Fn(PhiPoint) -> Result<Option<(PhiPoint, PhiPoint)>>,
{
    if root_right.t >= 1.0 {
        return Ok(None);
    }
    let start = PhiPoint { t: root_right.t, ..resume };
    // phi just right of the root is nonnegative; only a later crossing that
    // starts from a negative value counts.
    let start = PhiPoint { phi: root_right.phi.max(0.0), ..start };
    match scan(start)? {
        Some((a, b)) if a.t > root_right.t => Ok(Some((a, b))),
        _ => Ok(None),
    }
}

/// Empirical plug-in of the Bartlett constant,
/// `b = q^-1 [ (1/2) sum_{j,k} m_jjkk - (1/3) sum_{j,k,l} m_jkl^2 ]`,
/// where `m` are moments of the standardized values
/// `z_i = S^(-1/2) (g_i - gbar)` and `S` is their covariance (divisor `n`).
pub fn bartlett_constant(model: &EstimatingModel, sample: &Sample, theta_ref: &[f64]) -> Result<f64> {
    sample.check_for(model)?;
    let g = model.g_matrix(sample, theta_ref)?;
    bartlett_constant_g(&g)
}

pub fn bartlett_constant_g(g: &DMatrix<f64>) -> Result<f64> {
    let (n, q) = g.shape();
    let nf = n as f64;
    let mean = g.row_mean();
    let centered = DMatrix::from_fn(n, q, |i, j| g[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / nf;
    let eig = cov.symmetric_eigen();
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    if lmax <= 0.0 || lmin <= 1e-12 * lmax {
        return Err(ElError::RankDeficient("covariance of g-values is singular".into()));
    }
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()))
        * eig.eigenvectors.transpose();
    let z = centered * inv_sqrt;

    let fourth: f64 = z.row_iter().map(|r| r.norm_squared().powi(2)).sum::<f64>() / nf;
    let mut third_sq = 0.0;
    for j in 0..q {
        for k in 0..q {
            for l in 0..q {
                let m: f64 = z.row_iter().map(|r| r[j] * r[k] * r[l]).sum::<f64>() / nf;
                third_sq += m * m;
            }
        }
    }
    Ok((0.5 * fourth - third_sq / 3.0) / q as f64)
}

/// `(1 - b/n)` clamped at zero; the flag reports clamping.
pub fn bartlett_factor(b: f64, n: usize) -> (f64, bool) {
    let f = 1.0 - b / n as f64;
    if f < 0.0 {
        (0.0, true)
    } else {
        (f, false)
    }
}

/// `l_B(theta) = (1 - b/n) l(theta)`, `+inf` off the domain.
pub fn bel_loglik(
    model: &EstimatingModel,
    sample: &Sample,
    theta: &[f64],
    b: f64,
    solver: &SolverOptions,
) -> Result<ExtReal> {
    let l = oel_loglik(model, sample, theta, solver)?;
    Ok(bel_from_oel(l, b, sample.n()))
}

pub fn bel_from_oel(l: ExtReal, b: f64, n: usize) -> ExtReal {
    let (factor, clamped) = bartlett_factor(b, n);
    if clamped {
        warn!("Bartlett factor 1 - b/n is negative (b = {b}, n = {n}); clamped at 0");
    }
    l.scale(factor)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalOptions {
    pub solver: SolverOptions,
    pub inverse: InverseOptions,
    pub mele: MeleOptions,
}

/// Everything reported for one `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElEvaluation {
    pub theta: Vec<f64>,
    pub oel: ExtReal,
    pub eel1: f64,
    pub eel2: Option<f64>,
    pub bel: Option<ExtReal>,
    /// First-order preimage.
    pub preimage: Vec<f64>,
    pub preimage_residual: f64,
    pub warnings: Vec<String>,
}

/// Likelihood ratios for one (model, sample) pair with the centre and the
/// Bartlett constant computed once.
#[derive(Debug, Clone)]
pub struct EelEvaluator<'a> {
    model: &'a EstimatingModel,
    sample: &'a Sample,
    mele: MeleResult,
    bartlett_b: Option<f64>,
    opts: EvalOptions,
}

impl<'a> EelEvaluator<'a> {
    /// Computes the MELE and, for just-determined models, the Bartlett
    /// constant at the MELE.
    pub fn new(model: &'a EstimatingModel, sample: &'a Sample, opts: EvalOptions) -> Result<Self> {
        let est = mele(model, sample, None, &opts.mele)?;
        let b = bartlett_constant(model, sample, &est.theta_tilde)?;
        Ok(EelEvaluator { model, sample, mele: est, bartlett_b: Some(b), opts })
    }

    /// Uses a given centre (and optional Bartlett constant).
    pub fn with_center(
        model: &'a EstimatingModel,
        sample: &'a Sample,
        center: Vec<f64>,
        bartlett_b: Option<f64>,
        opts: EvalOptions,
    ) -> Result<Self> {
        sample.check_for(model)?;
        model.check_theta(&center)?;
        let l = oel_loglik(model, sample, &center, &opts.solver)?
            .finite()
            .ok_or(ElError::DomainViolation { direction: vec![] })?;
        let est = MeleResult {
            theta_tilde: center,
            loglik_at_tilde: l,
            method: crate::estimator::MeleMethod::RootSolve,
            converged: true,
            iterations: 0,
        };
        Ok(EelEvaluator { model, sample, mele: est, bartlett_b, opts })
    }

    pub fn model(&self) -> &EstimatingModel {
        self.model
    }
    pub fn sample(&self) -> &Sample {
        self.sample
    }
    pub fn center(&self) -> &[f64] {
        &self.mele.theta_tilde
    }
    pub fn mele(&self) -> &MeleResult {
        &self.mele
    }
    pub fn bartlett_b(&self) -> Option<f64> {
        self.bartlett_b
    }
    pub fn options(&self) -> &EvalOptions {
        &self.opts
    }

    pub fn factor(&self, order: ExpansionOrder) -> Result<ExpansionFactor> {
        let n = self.sample.n();
        match order {
            ExpansionOrder::First => Ok(ExpansionFactor::first(n)),
            ExpansionOrder::Second => {
                if !self.model.is_just_determined() {
                    return Err(ElError::Unsupported(
                        "second-order extended likelihood requires p = q".into(),
                    ));
                }
                let b = self.bartlett_b.ok_or_else(|| {
                    ElError::Unsupported("second-order extended likelihood needs a Bartlett constant".into())
                })?;
                Ok(ExpansionFactor::second(n, b))
            }
        }
    }

    pub fn oel(&self, theta: &[f64]) -> Result<ExtReal> {
        oel_loglik(self.model, self.sample, theta, &self.opts.solver)
    }

    pub fn forward(&self, theta: &[f64], order: ExpansionOrder) -> Result<Vec<f64>> {
        let factor = self.factor(order)?;
        forward_map(self.center(), &factor, &|t| self.oel(t), theta)
    }

    pub fn preimage(&self, theta: &[f64], order: ExpansionOrder) -> Result<Preimage> {
        self.model.check_theta(theta)?;
        let factor = self.factor(order)?;
        inverse_map(self.center(), &factor, &|t| self.oel(t), theta, &self.opts.inverse)
    }

    /// Extended log-likelihood ratio `l*(theta)`, finite everywhere.
    pub fn eel(&self, theta: &[f64], order: ExpansionOrder) -> Result<f64> {
        Ok(self.preimage(theta, order)?.loglik)
    }

    pub fn bel(&self, theta: &[f64]) -> Result<ExtReal> {
        let b = self
            .bartlett_b
            .ok_or_else(|| ElError::Unsupported("no Bartlett constant available".into()))?;
        Ok(bel_from_oel(self.oel(theta)?, b, self.sample.n()))
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<ElEvaluation> {
        let oel = self.oel(theta)?;
        let first = self.preimage(theta, ExpansionOrder::First)?;
        let mut warnings = Vec::new();
        let eel2 = if self.model.is_just_determined() && self.bartlett_b.is_some() {
            match self.preimage(theta, ExpansionOrder::Second) {
                Ok(p) => Some(p.loglik),
                Err(e) => {
                    warnings.push(format!("second-order extended likelihood unavailable: {e}"));
                    None
                }
            }
        } else {
            None
        };
        let bel = match self.bartlett_b {
            Some(b) => {
                if bartlett_factor(b, self.sample.n()).1 {
                    warnings.push(format!("Bartlett factor clamped at 0 (b = {b})"));
                }
                Some(bel_from_oel(oel, b, self.sample.n()))
            }
            None => None,
        };
        let scale = 1.0 + theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if first.residual > 1e-8 * scale {
            warnings.push(format!(
                "preimage residual {:e} exceeds tolerance (likelihood cap or domain boundary reached)",
                first.residual
            ));
        }
        Ok(ElEvaluation {
            theta: theta.to_vec(),
            oel,
            eel1: first.loglik,
            eel2,
            bel,
            preimage: first.point,
            preimage_residual: first.residual,
            warnings,
        })
    }
}

/// One-shot extended log-likelihood ratio: estimates the centre (and the
/// Bartlett constant for second order) and evaluates at `theta`.
pub fn eel_loglik(
    model: &EstimatingModel,
    sample: &Sample,
    theta: &[f64],
    order: ExpansionOrder,
    opts: &EvalOptions,
) -> Result<f64> {
    if order == ExpansionOrder::Second && !model.is_just_determined() {
        return Err(ElError::Unsupported("second-order extended likelihood requires p = q".into()));
    }
    let eval = EelEvaluator::new(model, sample, *opts)?;
    eval.eel(theta, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_mean;

    fn mean_124() -> (EstimatingModel, Sample) {
        (builtin_mean(1).unwrap(), Sample::from_scalars(&[1.0, 2.0, 4.0]).unwrap())
    }

    const L_AT_2: f64 = 0.235_566_071_312_767; // 2 ln(9/8)

    #[test]
    fn expansion_factors() {
        let f = ExpansionFactor::first(3);
        assert_eq!(f.gamma(0.0), 1.0);
        assert!((f.gamma(L_AT_2) - (1.0 + L_AT_2 / 6.0)).abs() < 1e-15);
        assert!(f.gamma(2.0) > f.gamma(1.0));
        let s = ExpansionFactor::second(100, 1.5);
        assert_eq!(s.gamma(0.0), 1.0);
        assert!((s.gamma(1.0) - 1.0075).abs() < 1e-15);
        assert!((s.delta_n - 0.1).abs() < 1e-15);
    }

    #[test]
    fn forward_example() {
        let (m, s) = mean_124();
        let opts = SolverOptions::default();
        let oel = |t: &[f64]| oel_loglik(&m, &s, t, &opts);
        let c = [7.0 / 3.0];
        let img = forward_map(&c, &ExpansionFactor::first(3), &oel, &[2.0]).unwrap();
        assert!((img[0] - 1.986913).abs() < 1e-6, "{img:?}");
        assert_eq!(forward_map(&c, &ExpansionFactor::first(3), &oel, &c).unwrap(), c.to_vec());
        assert!(forward_map(&c, &ExpansionFactor::first(3), &oel, &[9.0]).is_err());
    }

    #[test]
    fn inverse_of_forward_example() {
        let (m, s) = mean_124();
        let opts = SolverOptions::default();
        let oel = |t: &[f64]| oel_loglik(&m, &s, t, &opts);
        let c = [7.0 / 3.0];
        let f = ExpansionFactor::first(3);
        let img = forward_map(&c, &f, &oel, &[2.0]).unwrap();
        let pre = inverse_map(&c, &f, &oel, &img, &InverseOptions::default()).unwrap();
        assert!((pre.point[0] - 2.0).abs() < 1e-9, "{pre:?}");
        assert!((pre.loglik - L_AT_2).abs() < 1e-8);
        assert!(pre.residual < 1e-10);
        let fixed = inverse_map(&c, &f, &oel, &c, &InverseOptions::default()).unwrap();
        assert_eq!(fixed.point, c.to_vec());
        assert_eq!(fixed.residual, 0.0);
    }

    #[test]
    fn remote_points_have_finite_extended_likelihood() {
        let (m, s) = mean_124();
        let eval = EelEvaluator::new(&m, &s, EvalOptions::default()).unwrap();
        for theta in [1e6, -1e6, 50.0] {
            let v = eval.eel(&[theta], ExpansionOrder::First).unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
    }

    /// The largest root wins when phi has several.
    #[test]
    fn multiple_roots_pick_the_one_closest_to_theta() {
        // Synthetic OEL along [0, 1] chosen so that
        // phi(t) = (t - 0.2)(t - 0.5)(t - 0.8), roots 0.2, 0.5, 0.8.
        let n = 1;
        let f = ExpansionFactor::first(n);
        let oel = move |x: &[f64]| -> Result<ExtReal> {
            let t = x[0];
            if t == 0.0 {
                return Ok(ExtReal::Finite(0.0));
            }
            let phi = (t - 0.2) * (t - 0.5) * (t - 0.8);
            let gamma = (phi + 1.0) / t;
            Ok(ExtReal::Finite(2.0 * n as f64 * (gamma - 1.0)))
        };
        let pre = inverse_map(&[0.0], &f, &oel, &[1.0], &InverseOptions::default()).unwrap();
        assert!((pre.t - 0.8).abs() < 1e-9, "{}", pre.t);
    }

    #[test]
    fn contraction_reports_surjectivity_failure() {
        // gamma < 1 everywhere: phi(1) < 0
        let f = ExpansionFactor::second(4, -2.0);
        let oel = |_: &[f64]| -> Result<ExtReal> { Ok(ExtReal::Finite(1.0)) };
        let err = inverse_map(&[0.0], &f, &oel, &[1.0], &InverseOptions::default()).unwrap_err();
        assert!(matches!(err, ElError::Surjectivity { .. }));
    }

    #[test]
    fn bartlett_exact_normal_moments() {
        // kurtosis 3, no skew: values +-1 with prob 1/6 each, 0 otherwise
        let g = DMatrix::from_column_slice(6, 1, &[-1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((bartlett_constant_g(&g).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bartlett_two_point() {
        let g = DMatrix::from_column_slice(6, 1, &[-1.0, 1.0, -1.0, 1.0, -1.0, 1.0]);
        assert!((bartlett_constant_g(&g).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bartlett_rank_deficiency() {
        let g = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0, 0.0, 0.0]);
        assert!(matches!(bartlett_constant_g(&g), Err(ElError::RankDeficient(_))));
    }

    #[test]
    fn bartlett_affine_invariance() {
        let g = DMatrix::from_row_slice(
            6,
            2,
            &[0.3, 1.2, -1.1, 0.4, 2.5, -0.7, -0.2, -1.9, 0.9, 0.1, -1.4, 2.2],
        );
        let a = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, 0.5, 3.0]);
        let b0 = bartlett_constant_g(&g).unwrap();
        let b1 = bartlett_constant_g(&(&g * a.transpose())).unwrap();
        assert!((b0 - b1).abs() < 1e-10, "{b0} vs {b1}");
    }

    #[test]
    fn bel_values() {
        assert_eq!(bel_from_oel(ExtReal::Finite(0.0), 1.5, 3), ExtReal::Finite(0.0));
        let v = bel_from_oel(ExtReal::Finite(L_AT_2), 1.5, 3).finite().unwrap();
        assert!((v - 0.117783).abs() < 1e-6);
        assert_eq!(bel_from_oel(ExtReal::Finite(2.0), 5.0, 3), ExtReal::Finite(0.0));
        assert_eq!(bel_from_oel(ExtReal::Infinite, 1.0, 3), ExtReal::Infinite);
        assert_eq!(bartlett_factor(4.0, 3), (0.0, true));
    }

    #[test]
    fn second_order_rejected_for_over_determined() {
        let m = crate::model::builtin_mean_variance();
        let s = Sample::from_scalars(&[-1.5, -0.7, -0.1, 0.2, 0.4, 0.9, 1.3, 2.1]).unwrap();
        let err = eel_loglik(&m, &s, &[0.1], ExpansionOrder::Second, &EvalOptions::default()).unwrap_err();
        assert!(matches!(err, ElError::Unsupported(_)));
    }
}
