use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use eel_core::{
    contour_grid, format_table, region_contains_with, run_coverage, EelEvaluator, ElError,
    EstimatingModel, EvalOptions, GridSpec, Method, ModelRegistry, RegionSpec, Result, Sample,
    SolverOptions, StudyConfig, StudyModel,
};

use crate::output::{ext, num, record, vector};
use crate::{ContourArgs, CoverageArgs, DataArgs, EvalArgs, RegionArgs, SolverArgs};

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| ElError::InvalidArgument(format!("--{flag}: cannot parse {s:?}")))
        })
        .collect()
}

fn parse_methods(text: &str) -> Result<Vec<Method>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

fn eval_options(s: &SolverArgs) -> Result<EvalOptions> {
    if s.tol.is_nan() || s.tol <= 0.0 || s.max_iter == 0 {
        return Err(ElError::InvalidArgument("--tol must be positive and --max-iter at least 1".into()));
    }
    Ok(EvalOptions { solver: SolverOptions { tol: s.tol, max_iter: s.max_iter }, ..EvalOptions::default() })
}

fn load(args: &DataArgs) -> Result<(EstimatingModel, Sample)> {
    let sample = Sample::read_csv(&args.data)?;
    let model = ModelRegistry::builtin().build(&args.model, sample.d())?;
    sample.check_for(&model)?;
    Ok((model, sample))
}

fn parse_theta(model: &EstimatingModel, text: &str) -> Result<Vec<f64>> {
    let theta: Vec<f64> = parse_list("theta", text)?;
    if theta.len() != model.p() {
        return Err(ElError::InvalidDimension(format!(
            "--theta has {} values but model {} has p = {}",
            theta.len(),
            model.name(),
            model.p()
        )));
    }
    Ok(theta)
}

pub fn eval(args: &EvalArgs) -> Result<ExitCode> {
    let (model, sample) = load(&args.data)?;
    let theta = parse_theta(&model, &args.theta)?;
    let opts = eval_options(&args.data.solver)?;
    let evaluator = EelEvaluator::new(&model, &sample, opts)?;
    let e = evaluator.evaluate(&theta)?;
    let m = args.machine;
    let mut pairs = vec![
        ("model", model.name().to_string()),
        ("n", sample.n().to_string()),
        ("theta", vector(&e.theta, m)),
        ("in_domain", e.oel.is_finite().to_string()),
        ("oel", ext(e.oel, m)),
        ("eel1", num(e.eel1, m)),
    ];
    pairs.push(("eel2", e.eel2.map_or("NA".into(), |v| num(v, m))));
    pairs.push(("bel", e.bel.map_or("NA".into(), |v| ext(v, m))));
    pairs.push(("theta_tilde", vector(evaluator.center(), m)));
    pairs.push(("bartlett_b", evaluator.bartlett_b().map_or("NA".into(), |b| num(b, m))));
    pairs.push(("preimage", vector(&e.preimage, m)));
    pairs.push(("preimage_residual", num(e.preimage_residual, m)));
    print!("{}", record(&pairs, m));
    for w in &e.warnings {
        eprintln!("warning: {w}");
    }
    Ok(ExitCode::SUCCESS)
}

pub fn region(args: &RegionArgs) -> Result<ExitCode> {
    let (model, sample) = load(&args.data)?;
    let theta = parse_theta(&model, &args.theta)?;
    let method: Method = args.method.parse()?;
    let spec = RegionSpec::new(method, args.level, model.q())?;
    let evaluator = EelEvaluator::new(&model, &sample, eval_options(&args.data.solver)?)?;
    let inside = region_contains_with(&evaluator, &spec, &theta)?;
    let stat = eel_core::statistic(&evaluator, method, &theta)?;
    let m = args.machine;
    let pairs = [
        ("method", method.to_string()),
        ("level", args.level.to_string()),
        ("critical_value", num(spec.critical_value, m)),
        ("statistic", ext(stat, m)),
        ("contained", inside.to_string()),
    ];
    print!("{}", record(&pairs, m));
    Ok(if inside { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn pair<T: std::str::FromStr + Copy>(flag: &str, text: &str) -> Result<[T; 2]> {
    let v: Vec<T> = parse_list(flag, text)?;
    match v.as_slice() {
        [a] => Ok([*a, *a]),
        [a, b] => Ok([*a, *b]),
        _ => Err(ElError::InvalidArgument(format!("--{flag} takes one or two values"))),
    }
}

pub fn contour(args: &ContourArgs) -> Result<ExitCode> {
    let (model, sample) = load(&args.data)?;
    let methods = parse_methods(&args.methods)?;
    let axes: [usize; 2] = pair("axes", &args.axes)?;
    let grid = GridSpec {
        axes,
        lower: pair("lower", &args.lower)?,
        upper: pair("upper", &args.upper)?,
        resolution: pair("resolution", &args.resolution)?,
    };
    let fixed = match &args.fixed {
        Some(f) => Some(parse_theta(&model, f)?),
        None => None,
    };
    let evaluator = EelEvaluator::new(&model, &sample, eval_options(&args.data.solver)?)?;
    let table = contour_grid(&evaluator, &methods, &grid, fixed.as_deref())?;
    match &args.output {
        Some(path) => table.write_delimited(BufWriter::new(File::create(path)?))?,
        None => table.write_delimited(std::io::stdout().lock())?,
    }
    Ok(ExitCode::SUCCESS)
}

pub fn coverage(args: &CoverageArgs) -> Result<ExitCode> {
    let model = StudyModel::parse(&args.model)?;
    let sizes: Vec<usize> = parse_list("n", &args.n)?;
    let levels: Vec<f64> = parse_list("levels", &args.levels)?;
    let methods = parse_methods(&args.methods)?;
    if sizes.is_empty() {
        return Err(ElError::InvalidArgument("--n needs at least one sample size".into()));
    }
    if args.workers == Some(0) {
        return Err(ElError::InvalidArgument("--workers must be at least 1".into()));
    }
    let eval = eval_options(&args.solver)?;
    let mut reports = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let config = StudyConfig {
            levels: levels.clone(),
            methods: methods.clone(),
            replicates: args.reps,
            seed: args.seed,
            design_seed: args.design_seed.unwrap_or(args.seed.wrapping_add(1)),
            fixed_design: args.fixed_design,
            workers: args.workers,
            eval,
            ..StudyConfig::new(model.clone(), n)
        };
        reports.push(run_coverage(&config)?);
    }

    let mut text = String::new();
    if args.machine {
        for (i, r) in reports.iter().enumerate() {
            let body = r.to_delimited();
            // one header for the whole run
            let skip = if i == 0 { 0 } else { body.find('\n').map_or(0, |p| p + 1) };
            text.push_str(&body[skip..]);
        }
    } else {
        text.push_str(&format_table(&reports, &levels, &methods));
        let failures: usize = reports.iter().flat_map(|r| &r.entries).map(|e| e.failures).sum();
        if failures > 0 {
            text.push_str(&format!("solver failures (excluded from denominators): {failures}\n"));
        }
    }
    match &args.output {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(text.as_bytes())?;
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
