//! Chi-square distribution through the regularized incomplete gamma
//! function.

use statrs::function::gamma::ln_gamma;

use crate::error::{ElError, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 1000;

/// Regularized lower incomplete gamma `P(a, x)`, by its power series for
/// `x < a + 1` and by the Lentz continued fraction of `Q` otherwise.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "gamma_p requires a > 0");
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < a + 1.0 {
        series(a, x)
    } else {
        1.0 - continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "gamma_q requires a > 0");
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < a + 1.0 {
        1.0 - series(a, x)
    } else {
        continued_fraction(a, x)
    }
}

fn prefactor(a: f64, x: f64) -> f64 {
    (a * x.ln() - x - ln_gamma(a)).exp()
}

fn series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * prefactor(a, x)
}

fn continued_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    prefactor(a, x) * h
}

pub fn chisq_cdf(x: f64, df: usize) -> f64 {
    gamma_p(df as f64 / 2.0, x / 2.0)
}

/// Quantile of the chi-square distribution by bracketed bisection on the CDF.
pub fn chisq_quantile(level: f64, df: usize) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(ElError::InvalidArgument(format!("level {level} is not in (0, 1)")));
    }
    if df == 0 {
        return Err(ElError::InvalidArgument("degrees of freedom must be positive".into()));
    }
    let mut lo = 0.0;
    let mut hi = df as f64 + 1.0;
    while chisq_cdf(hi, df) < level {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chisq_cdf(mid, df) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        // P(1, x) = 1 - e^-x
        for x in [0.1, 1.0, 2.5, 10.0] {
            assert!((gamma_p(1.0, x) - (1.0 - (-x).exp())).abs() < 1e-14);
        }
        assert_eq!(gamma_p(2.0, 0.0), 0.0);
        assert!((gamma_p(3.0, 4.0) + gamma_q(3.0, 4.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantiles() {
        assert!((chisq_quantile(0.95, 2).unwrap() - 5.991465).abs() < 1e-6);
        assert!((chisq_quantile(0.5, 2).unwrap() - 1.386294).abs() < 1e-6);
        assert!((chisq_quantile(0.95, 1).unwrap() - 3.841459).abs() < 1e-6);
        assert!(chisq_quantile(1.0, 2).is_err());
        assert!(chisq_quantile(0.0, 2).is_err());
        assert!(chisq_quantile(0.5, 0).is_err());
    }

    #[test]
    fn round_trip() {
        for df in 1..=10 {
            for level in [0.5, 0.9, 0.95, 0.99] {
                let c = chisq_quantile(level, df).unwrap();
                assert!(c > 0.0);
                assert!((chisq_cdf(c, df) - level).abs() < 1e-10);
            }
        }
    }
}
