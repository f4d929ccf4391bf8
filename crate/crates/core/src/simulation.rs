//! Seeded Monte Carlo coverage studies for the linear-regression designs.
//!
//! Each replicate draws its covariates and errors from ChaCha streams
//! selected by `(seed, replicate)` and `(design_seed, replicate)`, so a
//! report depends only on the configuration, never on scheduling.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::eel::{EelEvaluator, EvalOptions};
use crate::error::{ElError, Result};
use crate::inference::{statistic, Method};
use crate::model::{builtin_linear_regression, EstimatingModel};
use crate::oel::ExtReal;
use crate::sample::Sample;
use crate::special::chisq_quantile;

/// Uniform draw in the open interval `(0, 1)` from the top 53 bits.
pub fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Standard normal variate by inversion of the CDF.
pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    Normal::standard().inverse_cdf(open_unit(rng))
}

/// Independent stream for replicate `index` of a run seeded with `seed`.
pub fn replicate_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `y = x'beta + eps`, `eps ~ N(0, 1)`, with an intercept and covariates
/// drawn uniformly on the given ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDesign {
    pub beta: Vec<f64>,
    pub ranges: Vec<(f64, f64)>,
}

impl LinearDesign {
    /// `x = (1, x1)`, `x1 ~ U[0, 30]`, `beta = (1, 2)`.
    pub fn model1() -> Self {
        LinearDesign { beta: vec![1.0, 2.0], ranges: vec![(0.0, 30.0)] }
    }

    /// `x = (1, x1, x2)`, `x1 ~ U[0, 30]`, `x2 ~ U[20, 50]`, `beta = (1, 2, 3)`.
    pub fn model2() -> Self {
        LinearDesign { beta: vec![1.0, 2.0, 3.0], ranges: vec![(0.0, 30.0), (20.0, 50.0)] }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn estimating_model(&self) -> EstimatingModel {
        builtin_linear_regression(self.p()).expect("designs have at least one coefficient")
    }

    /// Covariate rows `(1, x_1, ..., x_k)`.
    pub fn covariates(&self, n: usize, rng: &mut impl RngCore) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let mut x = Vec::with_capacity(self.p());
                x.push(1.0);
                for (lo, hi) in &self.ranges {
                    x.push(lo + (hi - lo) * open_unit(rng));
                }
                x
            })
            .collect()
    }

    /// Rows `(y, 1, x_1, ..., x_k)`; `noise_scale = 0` gives a noiseless fit.
    pub fn responses(&self, covariates: &[Vec<f64>], noise_scale: f64, rng: &mut impl RngCore) -> Result<Sample> {
        let mut data = Vec::with_capacity(covariates.len() * (self.p() + 1));
        for x in covariates {
            let mean: f64 = x.iter().zip(&self.beta).map(|(a, b)| a * b).sum();
            let eps = standard_normal(rng);
            data.push(mean + noise_scale * eps);
            data.extend_from_slice(x);
        }
        Sample::from_flat(self.p() + 1, data)
    }

    pub fn simulate(
        &self,
        n: usize,
        design_rng: &mut impl RngCore,
        noise_rng: &mut impl RngCore,
        noise_scale: f64,
    ) -> Result<Sample> {
        let x = self.covariates(n, design_rng);
        self.responses(&x, noise_scale, noise_rng)
    }
}

pub fn simulate_model1(n: usize, rng: &mut impl RngCore) -> Result<Sample> {
    check_n(n, 3)?;
    let mut noise = ChaCha8Rng::seed_from_u64(rng.next_u64());
    LinearDesign::model1().simulate(n, rng, &mut noise, 1.0)
}

pub fn simulate_model2(n: usize, rng: &mut impl RngCore) -> Result<Sample> {
    check_n(n, 4)?;
    let mut noise = ChaCha8Rng::seed_from_u64(rng.next_u64());
    LinearDesign::model2().simulate(n, rng, &mut noise, 1.0)
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(ElError::InvalidArgument(format!("sample size {n} is below {min}")));
    }
    Ok(())
}

/// Draws replicate `index`: `(design stream, noise stream) -> sample`.
pub type SampleGenerator = dyn Fn(usize, &mut ChaCha8Rng, &mut ChaCha8Rng) -> Result<Sample> + Send + Sync;

#[derive(Clone)]
pub enum StudyModel {
    Model1,
    Model2,
    Custom {
        label: String,
        model: EstimatingModel,
        theta0: Vec<f64>,
        generator: Arc<SampleGenerator>,
    },
}

impl std::fmt::Debug for StudyModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl StudyModel {
    pub fn label(&self) -> String {
        match self {
            StudyModel::Model1 => "model1".into(),
            StudyModel::Model2 => "model2".into(),
            StudyModel::Custom { label, .. } => label.clone(),
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        match id {
            "model1" => Ok(StudyModel::Model1),
            "model2" => Ok(StudyModel::Model2),
            other => Err(ElError::InvalidArgument(format!(
                "unknown study model {other:?} (expected model1 or model2)"
            ))),
        }
    }

    fn design(&self) -> Option<LinearDesign> {
        match self {
            StudyModel::Model1 => Some(LinearDesign::model1()),
            StudyModel::Model2 => Some(LinearDesign::model2()),
            StudyModel::Custom { .. } => None,
        }
    }

    pub fn estimating_model(&self) -> EstimatingModel {
        match self {
            StudyModel::Custom { model, .. } => model.clone(),
            other => other.design().expect("linear design").estimating_model(),
        }
    }

    pub fn theta0(&self) -> Vec<f64> {
        match self {
            StudyModel::Custom { theta0, .. } => theta0.clone(),
            other => other.design().expect("linear design").beta,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub model: StudyModel,
    pub n: usize,
    pub levels: Vec<f64>,
    pub methods: Vec<Method>,
    pub replicates: usize,
    pub seed: u64,
    pub design_seed: u64,
    /// Draw the covariates once and reuse them in every replicate.
    pub fixed_design: bool,
    /// Multiply the errors by this; zero gives noiseless samples.
    pub noise_scale: f64,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    pub workers: Option<usize>,
    pub eval: EvalOptions,
}

impl StudyConfig {
    pub fn new(model: StudyModel, n: usize) -> Self {
        StudyConfig {
            model,
            n,
            levels: vec![0.90, 0.95, 0.99],
            methods: vec![Method::Oel, Method::Eel1, Method::Bel],
            replicates: 1000,
            seed: 1,
            design_seed: 2,
            fixed_design: false,
            noise_scale: 1.0,
            workers: None,
            eval: EvalOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(ElError::InvalidArgument("replicates must be at least 1".into()));
        }
        if self.levels.is_empty() || self.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return Err(ElError::InvalidArgument("levels must lie in (0, 1)".into()));
        }
        if self.methods.is_empty() {
            return Err(ElError::InvalidArgument("at least one method is required".into()));
        }
        let model = self.model.estimating_model();
        if self.n <= model.q() {
            return Err(ElError::SampleTooSmall { n: self.n, q: model.q() });
        }
        if self.methods.contains(&Method::Eel2) && !model.is_just_determined() {
            return Err(ElError::Unsupported("eel2 requires p = q".into()));
        }
        Ok(())
    }

    fn draw(&self, index: usize, fixed_x: Option<&[Vec<f64>]>) -> Result<Sample> {
        let mut design_rng = replicate_stream(self.design_seed, index as u64);
        let mut noise_rng = replicate_stream(self.seed, index as u64);
        match (&self.model, self.model.design()) {
            (StudyModel::Custom { generator, .. }, _) => generator(self.n, &mut design_rng, &mut noise_rng),
            (_, Some(design)) => match fixed_x {
                Some(x) => design.responses(x, self.noise_scale, &mut noise_rng),
                None => {
                    let x = design.covariates(self.n, &mut design_rng);
                    design.responses(&x, self.noise_scale, &mut noise_rng)
                }
            },
            _ => unreachable!("non-custom models carry a design"),
        }
    }
}

/// Statistics for one replicate at the true parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub index: usize,
    /// One entry per configured method; `Err` holds the failure reason code.
    pub statistics: Vec<std::result::Result<ExtReal, &'static str>>,
    pub bartlett_b: Option<f64>,
}

/// Evaluates each configured method at the true parameter for every
/// replicate, in replicate order.
pub fn replicate_statistics(config: &StudyConfig) -> Result<Vec<ReplicateOutcome>> {
    config.validate()?;
    let model = config.model.estimating_model();
    let theta0 = config.model.theta0();
    let fixed_x = match (config.fixed_design, config.model.design()) {
        (true, Some(design)) => {
            let mut rng = replicate_stream(config.design_seed, u64::MAX);
            Some(design.covariates(config.n, &mut rng))
        }
        _ => None,
    };

    let run_one = |index: usize| -> ReplicateOutcome {
        let fail_all = |code: &'static str| ReplicateOutcome {
            index,
            statistics: vec![Err(code); config.methods.len()],
            bartlett_b: None,
        };
        let sample = match config.draw(index, fixed_x.as_deref()) {
            Ok(s) => s,
            Err(e) => return fail_all(e.code()),
        };
        let eval = match EelEvaluator::new(&model, &sample, config.eval) {
            Ok(e) => e,
            Err(e) => return fail_all(e.code()),
        };
        let statistics = config
            .methods
            .iter()
            .map(|m| statistic(&eval, *m, &theta0).map_err(|e| e.code()))
            .collect();
        ReplicateOutcome { index, statistics, bartlett_b: eval.bartlett_b() }
    };

    let indices: Vec<usize> = (0..config.replicates).collect();
    let outcomes = match config.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| ElError::InvalidArgument(format!("cannot start worker pool: {e}")))?;
            pool.install(|| indices.par_iter().map(|&i| run_one(i)).collect())
        }
        None => indices.par_iter().map(|&i| run_one(i)).collect(),
    };
    Ok(outcomes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageEntry {
    pub method: Method,
    pub level: f64,
    pub covered: usize,
    pub failures: usize,
    /// Replicates that produced a statistic.
    pub valid: usize,
    pub coverage: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub model: String,
    pub n: usize,
    pub replicates: usize,
    pub entries: Vec<CoverageEntry>,
}

impl CoverageReport {
    pub fn get(&self, method: Method, level: f64) -> Option<&CoverageEntry> {
        self.entries
            .iter()
            .find(|e| e.method == method && (e.level - level).abs() < 1e-12)
    }

    pub fn coverage(&self, method: Method, level: f64) -> Option<f64> {
        self.get(method, level).map(|e| e.coverage)
    }

    /// Comma-delimited records, one per (method, level).
    pub fn to_delimited(&self) -> String {
        let mut out = String::from("model,n,method,level,replicates,valid,covered,failures,coverage,std_error\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                self.model, self.n, e.method, e.level, self.replicates, e.valid, e.covered, e.failures,
                e.coverage, e.std_error
            );
        }
        out
    }
}

/// Tallies coverage of every (method, level) region at the true parameter.
pub fn run_coverage(config: &StudyConfig) -> Result<CoverageReport> {
    let outcomes = replicate_statistics(config)?;
    let q = config.model.estimating_model().q();
    let mut entries = Vec::new();
    for (mi, method) in config.methods.iter().enumerate() {
        for &level in &config.levels {
            let c = chisq_quantile(level, q)?;
            let mut covered = 0;
            let mut failures = 0;
            for o in &outcomes {
                match &o.statistics[mi] {
                    Ok(v) => {
                        if v.at_most(c) {
                            covered += 1;
                        }
                    }
                    Err(_) => failures += 1,
                }
            }
            let valid = outcomes.len() - failures;
            let coverage = if valid > 0 { covered as f64 / valid as f64 } else { f64::NAN };
            let std_error = if valid > 0 { (coverage * (1.0 - coverage) / valid as f64).sqrt() } else { f64::NAN };
            entries.push(CoverageEntry { method: *method, level, covered, failures, valid, coverage, std_error });
        }
    }
    Ok(CoverageReport { model: config.model.label(), n: config.n, replicates: config.replicates, entries })
}

/// Table with one row per report, a column group per level and a column per
/// method; coverages in percent to one decimal.
pub fn format_table(reports: &[CoverageReport], levels: &[f64], methods: &[Method]) -> String {
    let mut out = String::new();
    let group_width = methods.len() * 7;
    let _ = write!(out, "{:<8} {:>5} ", "model", "n");
    for level in levels {
        let title = format!("{}% level", format_percent(*level));
        let _ = write!(out, "| {title:^width$}", width = group_width);
    }
    out.push('\n');
    let _ = write!(out, "{:<8} {:>5} ", "", "");
    for _ in levels {
        out.push_str("| ");
        for m in methods {
            let _ = write!(out, "{:>6} ", m.as_str().to_uppercase());
        }
    }
    out.push('\n');
    for r in reports {
        let _ = write!(out, "{:<8} {:>5} ", r.model, r.n);
        for level in levels {
            out.push_str("| ");
            for m in methods {
                match r.coverage(*m, *level) {
                    Some(c) if c.is_finite() => {
                        let _ = write!(out, "{:>6.1} ", 100.0 * c);
                    }
                    _ => {
                        let _ = write!(out, "{:>6} ", "-");
                    }
                }
            }
        }
        out.push('\n');
    }
    out
}

fn format_percent(level: f64) -> String {
    let pct = 100.0 * level;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model1_covariates_in_range_and_noiseless_fit() {
        let d = LinearDesign::model1();
        let mut dr = replicate_stream(3, 0);
        let mut nr = replicate_stream(4, 0);
        let s = d.simulate(200, &mut dr, &mut nr, 0.0).unwrap();
        for row in s.rows() {
            assert_eq!(row[1], 1.0);
            assert!((0.0..=30.0).contains(&row[2]));
            assert_eq!(row[0], 1.0 + 2.0 * row[2]);
        }
    }

    #[test]
    fn model2_covariates_in_range_and_noiseless_fit() {
        let d = LinearDesign::model2();
        let mut dr = replicate_stream(3, 0);
        let mut nr = replicate_stream(4, 0);
        let s = d.simulate(200, &mut dr, &mut nr, 0.0).unwrap();
        for row in s.rows() {
            assert!((20.0..=50.0).contains(&row[3]));
            assert!((row[0] - (1.0 + 2.0 * row[2] + 3.0 * row[3])).abs() < 1e-12);
        }
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(replicate_stream(9, 1), |r, _| Some(r.next_u64())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(replicate_stream(9, 1), |r, _| Some(r.next_u64())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(replicate_stream(9, 2), |r, _| Some(r.next_u64())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn public_simulators_validate_n() {
        let mut rng = replicate_stream(1, 0);
        assert!(simulate_model1(2, &mut rng).is_err());
        assert_eq!(simulate_model1(5, &mut rng).unwrap().d(), 3);
        assert_eq!(simulate_model2(5, &mut rng).unwrap().d(), 4);
    }

    #[test]
    fn config_validation() {
        let mut c = StudyConfig::new(StudyModel::Model1, 20);
        c.replicates = 0;
        assert!(c.validate().is_err());
        let mut c = StudyConfig::new(StudyModel::Model1, 20);
        c.levels = vec![1.0];
        assert!(c.validate().is_err());
        let c = StudyConfig::new(StudyModel::Model2, 3);
        assert!(c.validate().is_err());
    }

    #[test]
    fn noiseless_single_replicate_covers() {
        let mut c = StudyConfig::new(StudyModel::Model1, 10);
        c.replicates = 1;
        c.noise_scale = 0.0;
        c.methods = vec![Method::Oel, Method::Eel1, Method::Eel2, Method::Bel];
        let r = run_coverage(&c).unwrap();
        for e in &r.entries {
            assert_eq!((e.covered, e.failures), (1, 0), "{e:?}");
            assert_eq!(e.coverage, 1.0);
            assert_eq!(e.std_error, 0.0);
        }
    }

    #[test]
    fn table_layout() {
        let mut c = StudyConfig::new(StudyModel::Model1, 15);
        c.replicates = 20;
        let r = run_coverage(&c).unwrap();
        let t = format_table(&[r], &c.levels, &c.methods);
        assert!(t.contains("90% level"));
        assert!(t.contains("OEL"));
        assert!(t.lines().count() == 3);
    }
}
