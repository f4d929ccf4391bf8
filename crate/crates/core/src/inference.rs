//! Chi-square calibrated confidence regions and contour-grid export.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::eel::{EelEvaluator, EvalOptions, ExpansionOrder};
use crate::error::{ElError, Result};
use crate::model::EstimatingModel;
use crate::oel::ExtReal;
use crate::sample::Sample;
use crate::special::{chisq_cdf, chisq_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Oel,
    Eel1,
    Eel2,
    Bel,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Oel, Method::Eel1, Method::Eel2, Method::Bel];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Oel => "oel",
            Method::Eel1 => "eel1",
            Method::Eel2 => "eel2",
            Method::Bel => "bel",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = ElError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oel" => Ok(Method::Oel),
            "eel" | "eel1" => Ok(Method::Eel1),
            "eel2" => Ok(Method::Eel2),
            "bel" => Ok(Method::Bel),
            other => Err(ElError::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    pub method: Method,
    pub level: f64,
    pub df: usize,
    pub critical_value: f64,
}

impl RegionSpec {
    pub fn new(method: Method, level: f64, df: usize) -> Result<Self> {
        let critical_value = chisq_quantile(level, df)?;
        Ok(RegionSpec { method, level, df, critical_value })
    }

    pub fn calibration_error(&self) -> f64 {
        (chisq_cdf(self.critical_value, self.df) - self.level).abs()
    }
}

/// The statistic a method compares against the critical value.
pub fn statistic(eval: &EelEvaluator<'_>, method: Method, theta: &[f64]) -> Result<ExtReal> {
    match method {
        Method::Oel => eval.oel(theta),
        Method::Eel1 => Ok(ExtReal::Finite(eval.eel(theta, ExpansionOrder::First)?)),
        Method::Eel2 => Ok(ExtReal::Finite(eval.eel(theta, ExpansionOrder::Second)?)),
        Method::Bel => eval.bel(theta),
    }
}

/// Membership of `theta` in the region `{statistic <= critical value}`.
/// OEL and BEL regions exclude points off the OEL domain.
pub fn region_contains_with(eval: &EelEvaluator<'_>, spec: &RegionSpec, theta: &[f64]) -> Result<bool> {
    if spec.df != eval.model().q() {
        return Err(ElError::InvalidArgument(format!(
            "region uses {} degrees of freedom but the model has q = {}",
            spec.df,
            eval.model().q()
        )));
    }
    if spec.method == Method::Eel2 && !eval.model().is_just_determined() {
        return Err(ElError::Unsupported("eel2 regions require p = q".into()));
    }
    Ok(statistic(eval, spec.method, theta)?.at_most(spec.critical_value))
}

pub fn region_contains(
    model: &EstimatingModel,
    sample: &Sample,
    spec: &RegionSpec,
    theta: &[f64],
    opts: &EvalOptions,
) -> Result<bool> {
    if spec.method == Method::Eel2 && !model.is_just_determined() {
        return Err(ElError::Unsupported("eel2 regions require p = q".into()));
    }
    let eval = EelEvaluator::new(model, sample, *opts)?;
    region_contains_with(&eval, spec, theta)
}

/// Rectangle over two parameter coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub axes: [usize; 2],
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub resolution: [usize; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridTable {
    pub columns: Vec<String>,
    /// One row per node: the full `theta` followed by one value per method.
    pub rows: Vec<Vec<ExtReal>>,
}

impl GridTable {
    pub fn p(&self) -> usize {
        self.columns.iter().filter(|c| c.starts_with("theta_")).count()
    }

    /// Comma-delimited text with a header row; infinite values as `inf`.
    pub fn write_delimited<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

impl fmt::LowerExp for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => fmt::LowerExp::fmt(v, f),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

/// Evaluates each requested statistic over a two-dimensional slice of the
/// parameter space; coordinates not on the grid axes come from `fixed`
/// (the MELE when `None`).
pub fn contour_grid(
    eval: &EelEvaluator<'_>,
    methods: &[Method],
    grid: &GridSpec,
    fixed: Option<&[f64]>,
) -> Result<GridTable> {
    let p = eval.model().p();
    let [a0, a1] = grid.axes;
    if a0 >= p || a1 >= p || (a0 == a1 && p > 1) {
        return Err(ElError::InvalidArgument(format!(
            "grid axes ({a0}, {a1}) are not two distinct indices below p = {p}"
        )));
    }
    if grid.resolution.iter().any(|r| *r < 2) {
        return Err(ElError::InvalidArgument("grid resolution must be at least 2 per axis".into()));
    }
    let base: Vec<f64> = match fixed {
        Some(f) => {
            eval.model().check_theta(f)?;
            f.to_vec()
        }
        None => eval.center().to_vec(),
    };
    if methods.contains(&Method::Eel2) && !eval.model().is_just_determined() {
        return Err(ElError::Unsupported("eel2 requires p = q".into()));
    }

    let coord = |axis: usize, k: usize| -> f64 {
        let r = grid.resolution[axis];
        grid.lower[axis] + (grid.upper[axis] - grid.lower[axis]) * k as f64 / (r - 1) as f64
    };
    // A one-parameter model gets a one-dimensional grid along the first axis.
    let second = if p == 1 { 1 } else { grid.resolution[1] };
    let nodes: Vec<Vec<f64>> = (0..second)
        .flat_map(|k1| (0..grid.resolution[0]).map(move |k0| (k0, k1)))
        .map(|(k0, k1)| {
            let mut t = base.clone();
            t[a0] = coord(0, k0);
            if p > 1 {
                t[a1] = coord(1, k1);
            }
            t
        })
        .collect();

    let rows = nodes
        .par_iter()
        .map(|theta| -> Result<Vec<ExtReal>> {
            let mut row: Vec<ExtReal> = theta.iter().map(|v| ExtReal::Finite(*v)).collect();
            for m in methods {
                row.push(statistic(eval, *m, theta)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut columns: Vec<String> = (0..p).map(|i| format!("theta_{i}")).collect();
    columns.extend(methods.iter().map(|m| m.to_string()));
    Ok(GridTable { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_mean;

    fn mean_124() -> (EstimatingModel, Sample) {
        (builtin_mean(1).unwrap(), Sample::from_scalars(&[1.0, 2.0, 4.0]).unwrap())
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("pel".parse::<Method>().is_err());
    }

    #[test]
    fn region_spec_is_calibrated() {
        let spec = RegionSpec::new(Method::Oel, 0.95, 1).unwrap();
        assert!((spec.critical_value - 3.841459).abs() < 1e-6);
        assert!(spec.calibration_error() < 1e-10);
    }

    #[test]
    fn centre_is_always_contained() {
        let (m, s) = mean_124();
        let eval = EelEvaluator::new(&m, &s, EvalOptions::default()).unwrap();
        for method in Method::ALL {
            for level in [0.5, 0.9, 0.99] {
                let spec = RegionSpec::new(method, level, 1).unwrap();
                assert!(region_contains_with(&eval, &spec, &[7.0 / 3.0]).unwrap());
            }
        }
    }

    #[test]
    fn mean_example_region() {
        let (m, s) = mean_124();
        let spec = RegionSpec::new(Method::Oel, 0.95, 1).unwrap();
        assert!(region_contains(&m, &s, &spec, &[2.0], &EvalOptions::default()).unwrap());
        // outside the domain: excluded from OEL, still finite for EEL
        assert!(!region_contains(&m, &s, &spec, &[5.0], &EvalOptions::default()).unwrap());
    }

    #[test]
    fn wrong_df_is_rejected() {
        let (m, s) = mean_124();
        let spec = RegionSpec::new(Method::Oel, 0.95, 2).unwrap();
        assert!(region_contains(&m, &s, &spec, &[2.0], &EvalOptions::default()).is_err());
    }

    #[test]
    fn small_grid_has_zero_at_centre() {
        let m = builtin_mean(2).unwrap();
        let s = Sample::from_rows(&[[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [3.0, 1.0], [-1.0, -2.0]]).unwrap();
        let eval = EelEvaluator::new(&m, &s, EvalOptions::default()).unwrap();
        let c = eval.center().to_vec();
        let grid = GridSpec {
            axes: [0, 1],
            lower: [c[0], c[1]],
            upper: [c[0] + 1.0, c[1] + 1.0],
            resolution: [2, 2],
        };
        let table = contour_grid(&eval, &[Method::Oel], &grid, None).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert_eq!(table.columns, vec!["theta_0", "theta_1", "oel"]);
        assert!(table.rows[0][2].finite().unwrap().abs() < 1e-10);
        let bad = GridSpec { axes: [0, 2], ..grid };
        assert!(contour_grid(&eval, &[Method::Oel], &bad, None).is_err());
        let coarse = GridSpec { resolution: [1, 2], ..grid };
        assert!(contour_grid(&eval, &[Method::Oel], &coarse, None).is_err());
    }

    #[test]
    fn grid_output_marks_infinity() {
        let (m, s) = mean_124();
        let eval = EelEvaluator::new(&m, &s, EvalOptions::default()).unwrap();
        let grid = GridSpec { axes: [0, 0], lower: [0.0, 0.0], upper: [6.0, 6.0], resolution: [4, 2] };
        let table = contour_grid(&eval, &[Method::Oel, Method::Eel1], &grid, None).unwrap();
        assert_eq!(table.rows.len(), 4);
        let mut buf = Vec::new();
        table.write_delimited(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta_0,oel,eel1\n"));
        assert!(text.contains(",inf,"));
        for row in &table.rows {
            assert!(row[2].is_finite());
        }
    }
}
