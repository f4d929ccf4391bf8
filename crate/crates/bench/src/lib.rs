//! Fixtures shared by the benchmarks.

use eel_core::simulation::{open_unit, replicate_stream};
use eel_core::{builtin_linear_regression, builtin_mean, simulate_model1, EstimatingModel, Sample};

/// A Model 1 regression sample of size `n`.
pub fn model1(n: usize, seed: u64) -> (EstimatingModel, Sample) {
    let mut rng = replicate_stream(seed, 0);
    (builtin_linear_regression(2).unwrap(), simulate_model1(n, &mut rng).unwrap())
}

/// `n` draws from an exponential(1) distribution, for the scalar mean.
pub fn exponential_mean(n: usize, seed: u64) -> (EstimatingModel, Sample) {
    let mut rng = replicate_stream(seed, 0);
    let xs: Vec<f64> = (0..n).map(|_| -open_unit(&mut rng).ln()).collect();
    (builtin_mean(1).unwrap(), Sample::from_scalars(&xs).unwrap())
}
