//! Command-line front end: knot placement, fitting, method comparison
//! sweeps, regression training, and prediction.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 numerical failure. Relative output paths are resolved under
//! `FREEKNOT_OUT_DIR` when that variable is set.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use freeknot::bspline::{
    design_matrix, fit_least_squares, smoothing_diagonal, FunctionSet, KnotSequence,
    SampledFunction,
};
use freeknot::io::{self, ComparisonRow, Dataset, FunctionRow, ModelDocument};
use freeknot::m2p::{
    self, evaluate, fit_m2p, Activation, FeedforwardConfig, LearnerConfig, M2PConfig, Placement,
};
use freeknot::metrics;
use freeknot::placement::{
    derivative_envelope, equidistant_knots, ilp_place_knots, local_error_bound, verify_bound,
    BoundReport, DerivativeEnvelope, ToleranceConfig,
};
use freeknot::{Error, ErrorClass};

#[derive(Parser)]
#[command(
    name = "freeknot",
    version,
    about = "B-spline approximation with free knot placement",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Place knots for a dataset and report the per-span error bound
    Place(PlaceArgs),
    /// Fit every dataset column on an existing knots document
    Fit(FitArgs),
    /// Sweep placement settings and compare both methods at equal knot counts
    Compare(CompareArgs),
    /// Train a function-to-function regression model
    Train(TrainArgs),
    /// Predict output curves for new input functions
    Predict(PredictArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Ilp,
    Equidistant,
}

#[derive(Args)]
struct PlaceArgs {
    /// Wide CSV dataset (first column "t")
    dataset: PathBuf,
    /// Spline degree
    #[arg(long)]
    degree: usize,
    /// Local error tolerance (mutually exclusive with --knots)
    #[arg(long, conflicts_with = "knots")]
    epsilon: Option<f64>,
    /// Interior knot count (mutually exclusive with --epsilon)
    #[arg(long)]
    knots: Option<usize>,
    /// Placement method
    #[arg(long, value_enum, default_value_t = Method::Ilp)]
    method: Method,
    /// Output knots document
    #[arg(long, default_value = "knots.json")]
    out: PathBuf,
    /// Per-span bound report CSV; for --knots runs the epsilon column holds
    /// the certified tolerance (largest span delta)
    #[arg(long, default_value = "bound_report.csv")]
    report: PathBuf,
    /// Optional interior knot list CSV
    #[arg(long)]
    knot_list: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    dataset: PathBuf,
    /// Knots document produced by `place`
    knots: PathBuf,
    /// Output spline model document
    #[arg(long, default_value = "spline.json")]
    out_model: PathBuf,
    /// Per-function fit report CSV
    #[arg(long, default_value = "fit_report.csv")]
    report: PathBuf,
    /// Directory for per-function (t, actual, fitted) curve CSVs
    #[arg(long)]
    curves: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    dataset: PathBuf,
    /// Degrees to sweep, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    degrees: Vec<usize>,
    /// Sweep over tolerances; each point maps to an equal-knot-count
    /// equidistant run
    #[arg(long, value_delimiter = ',', conflicts_with = "sweep_knots")]
    sweep_epsilons: Vec<f64>,
    /// Sweep over interior knot counts; tolerance-driven runs are matched by
    /// bisection on epsilon
    #[arg(long, value_delimiter = ',')]
    sweep_knots: Vec<usize>,
    /// Aggregate comparison CSV (one row per method and sweep point)
    #[arg(long, default_value = "comparison.csv")]
    out: PathBuf,
    /// Per-function detail CSV with mean and max rows
    #[arg(long, default_value = "comparison_functions.csv")]
    detail: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LearnerKind {
    Ridge,
    Feedforward,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ActivationKind {
    Identity,
    Tanh,
    Relu,
}

#[derive(Args)]
struct TrainArgs {
    /// Input function dataset (one column per subject)
    input_dataset: PathBuf,
    /// Output function dataset (same subject order)
    output_dataset: PathBuf,
    #[arg(long)]
    degree_x: usize,
    #[arg(long)]
    degree_y: usize,
    /// Input representation tolerance
    #[arg(long)]
    eps_x: f64,
    /// Output representation tolerance
    #[arg(long)]
    eps_y: f64,
    #[arg(long, value_enum, default_value_t = LearnerKind::Ridge)]
    learner: LearnerKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.75)]
    train_fraction: f64,
    /// Ridge regularization weight
    #[arg(long, default_value_t = 1e-8)]
    lambda: f64,
    /// Hidden layer sizes for the feedforward learner
    #[arg(long, value_delimiter = ',', default_values_t = [32usize, 32])]
    hidden: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ActivationKind::Tanh)]
    activation: ActivationKind,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 0.0)]
    validation_fraction: f64,
    #[arg(long)]
    patience: Option<usize>,
    /// Rescale values onto [-1, 1] from training statistics
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value = "m2p.json")]
    out_model: PathBuf,
    /// Evaluation CSV (overall row plus one row per test subject)
    #[arg(long, default_value = "m2p_metrics.csv")]
    metrics: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model document (kind m2p)
    model: PathBuf,
    /// New input functions (columns on the input grid)
    input: PathBuf,
    /// Output grid as lower,upper,count (default: the training output grid)
    #[arg(long)]
    output_grid: Option<String>,
    /// Prediction CSV; with several input columns the column name is
    /// appended to the file stem
    #[arg(long, default_value = "prediction.csv")]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(e) => match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numerical => 4,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Place(args) => run_place(args),
        Command::Fit(args) => run_fit(args),
        Command::Compare(args) => run_compare(args),
        Command::Train(args) => run_train(args),
        Command::Predict(args) => run_predict(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn out_path(path: &Path) -> PathBuf {
    io::resolve_output_path(path)
}

/// Smallest equidistant interior count whose spans all satisfy the bound.
fn equidistant_count_for_epsilon(
    envelope: &DerivativeEnvelope,
    degree: usize,
    epsilon: f64,
) -> Result<KnotSequence, Error> {
    let grid = envelope.grid();
    let (lower, upper) = (grid[0], grid[grid.len() - 1]);
    let max_count = grid.len().saturating_sub(2);
    for count in 0..=max_count {
        let knots = equidistant_knots(lower, upper, degree, count)?;
        if verify_bound(&knots, envelope, epsilon)?.all_pass {
            return Ok(knots);
        }
    }
    // Even one knot per grid step cannot certify the bound; return the
    // densest uniform candidate rather than failing the run.
    equidistant_knots(lower, upper, degree, max_count)
}

/// Bisection on the tolerance so the placement scan lands on (or nearest
/// to) the requested interior knot count. Counts shrink as epsilon grows.
fn ilp_for_count(
    envelope: &DerivativeEnvelope,
    degree: usize,
    target: usize,
) -> Result<(f64, KnotSequence), Error> {
    let grid = envelope.grid();
    let span = grid[grid.len() - 1] - grid[0];
    let peak = envelope.values().iter().fold(0.0f64, |m, &c| m.max(c));
    if peak == 0.0 {
        // Zero envelope: every tolerance yields an empty interior.
        let eps = 1.0;
        return Ok((eps, ilp_place_knots(envelope, degree, eps)?.knots));
    }
    let mut hi = local_error_bound(span, peak, degree) * 2.0;
    let mut lo = hi * 1e-16;
    let mut best: Option<(usize, f64)> = None;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let count = ilp_place_knots(envelope, degree, mid)?.knots.interior().len();
        let distance = count.abs_diff(target);
        if best.is_none_or(|(d, _)| distance < d) {
            best = Some((distance, mid));
        }
        if count == target {
            break;
        }
        if count > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, eps) = best.expect("bisection always evaluates at least once");
    Ok((eps, ilp_place_knots(envelope, degree, eps)?.knots))
}

fn run_place(args: PlaceArgs) -> Result<(), CliError> {
    if args.epsilon.is_none() && args.knots.is_none() {
        return Err(CliError::usage("one of --epsilon or --knots is required"));
    }
    let dataset = io::read_dataset(&args.dataset)?;
    let envelope = derivative_envelope(&dataset.set, args.degree)?;

    let (knots, report): (KnotSequence, BoundReport) =
        match (args.method, args.epsilon, args.knots) {
            (Method::Ilp, Some(eps), None) => {
                let placed = ilp_place_knots(&envelope, args.degree, eps)?;
                if !placed.forced_spans.is_empty() {
                    eprintln!(
                        "note: {} span(s) violate the bound even at single grid steps",
                        placed.forced_spans.len()
                    );
                }
                let report = verify_bound(&placed.knots, &envelope, eps)?;
                (placed.knots, report)
            }
            (Method::Equidistant, Some(eps), None) => {
                let knots = equidistant_count_for_epsilon(&envelope, args.degree, eps)?;
                let report = verify_bound(&knots, &envelope, eps)?;
                (knots, report)
            }
            (Method::Ilp, None, Some(count)) => {
                let (_, knots) = ilp_for_count(&envelope, args.degree, count)?;
                let report = certified_report(&knots, &envelope)?;
                (knots, report)
            }
            (Method::Equidistant, None, Some(count)) => {
                let grid = dataset.set.grid();
                let knots = equidistant_knots(grid[0], grid[grid.len() - 1], args.degree, count)?;
                let report = certified_report(&knots, &envelope)?;
                (knots, report)
            }
            _ => unreachable!("clap enforces the epsilon/knots exclusivity"),
        };

    io::write_model(&ModelDocument::Knots(knots.clone()), out_path(&args.out))?;
    io::write_bound_report(out_path(&args.report), &report)?;
    if let Some(list) = &args.knot_list {
        io::write_knot_csv(out_path(list), &knots)?;
    }
    println!(
        "placed {} interior knots over [{}, {}]",
        knots.interior().len(),
        knots.lower(),
        knots.upper()
    );
    Ok(())
}

/// Bound report against the certified tolerance: the largest span delta, so
/// every span passes and the epsilon column records what the placement
/// guarantees.
fn certified_report(
    knots: &KnotSequence,
    envelope: &DerivativeEnvelope,
) -> Result<BoundReport, Error> {
    let probe = verify_bound(knots, envelope, 1.0)?;
    let certified = probe
        .spans
        .iter()
        .map(|s| s.delta)
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    verify_bound(knots, envelope, certified)
}

fn run_fit(args: FitArgs) -> Result<(), CliError> {
    let dataset = io::read_dataset(&args.dataset)?;
    let knots = io::read_knots(&args.knots)?;
    let design = design_matrix(&knots, dataset.set.grid())?;
    let model = fit_least_squares(&design, dataset.set.rows(), 0.0)?;
    let diagonal = smoothing_diagonal(&design)?;

    let mut rows = Vec::with_capacity(dataset.names.len());
    for (i, name) in dataset.names.iter().enumerate() {
        let actual = dataset.set.row(i);
        let fitted = model.evaluate_on(i, dataset.set.grid())?;
        let report = metrics::ApproximationReport {
            max_abs_error: metrics::max_abs_error(actual, &fitted)?,
            rmse: metrics::rmse(actual, &fitted)?,
            gcv: metrics::gcv(actual, &fitted, &diagonal)?,
            knot_count: knots.interior().len(),
            basis_count: knots.basis_count(),
        };
        if let Some(dir) = &args.curves {
            let dir = out_path(dir);
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                path: dir.clone(),
                source: e,
            })?;
            io::write_curve_csv(
                dir.join(format!("{name}.csv")),
                dataset.set.grid(),
                actual,
                &fitted,
            )?;
        }
        rows.push((name.clone(), report));
    }
    write_fit_report(&out_path(&args.report), &rows)?;
    io::write_model(&ModelDocument::Spline(model), out_path(&args.out_model))?;
    println!(
        "fitted {} function(s) on {} basis functions",
        dataset.names.len(),
        knots.basis_count()
    );
    Ok(())
}

fn write_fit_report(
    path: &Path,
    rows: &[(String, metrics::ApproximationReport)],
) -> Result<(), Error> {
    let mut text = String::from("function,max_abs_error,rmse,gcv,knot_count,basis_count\n");
    for (name, r) in rows {
        text.push_str(&format!(
            "{name},{},{},{},{},{}\n",
            r.max_abs_error, r.rmse, r.gcv, r.knot_count, r.basis_count
        ));
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

struct MethodOutcome {
    per_function: Vec<(f64, f64)>,
    per_function_gcv: Vec<f64>,
    mean_max_abs: f64,
    mean_rmse: f64,
    max_max_abs: f64,
    max_rmse: f64,
    mean_gcv: f64,
    knot_count: usize,
}

fn fit_and_measure(set: &FunctionSet, knots: &KnotSequence) -> Result<MethodOutcome, Error> {
    let design = design_matrix(knots, set.grid())?;
    let model = fit_least_squares(&design, set.rows(), 0.0)?;
    let diagonal = smoothing_diagonal(&design)?;
    let n = set.function_count();
    let mut per_function = Vec::with_capacity(n);
    let mut per_function_gcv = Vec::with_capacity(n);
    for i in 0..n {
        let fitted = model.evaluate_on(i, set.grid())?;
        per_function.push((
            metrics::max_abs_error(set.row(i), &fitted)?,
            metrics::rmse(set.row(i), &fitted)?,
        ));
        per_function_gcv.push(metrics::gcv(set.row(i), &fitted, &diagonal)?);
    }
    let count = n as f64;
    Ok(MethodOutcome {
        mean_max_abs: per_function.iter().map(|m| m.0).sum::<f64>() / count,
        mean_rmse: per_function.iter().map(|m| m.1).sum::<f64>() / count,
        max_max_abs: per_function.iter().map(|m| m.0).fold(0.0, f64::max),
        max_rmse: per_function.iter().map(|m| m.1).fold(0.0, f64::max),
        mean_gcv: per_function_gcv.iter().sum::<f64>() / count,
        per_function,
        per_function_gcv,
        knot_count: knots.interior().len(),
    })
}

fn run_compare(args: CompareArgs) -> Result<(), CliError> {
    if args.sweep_epsilons.is_empty() && args.sweep_knots.is_empty() {
        return Err(CliError::usage(
            "one of --sweep-epsilons or --sweep-knots is required",
        ));
    }
    let dataset = io::read_dataset(&args.dataset)?;
    let mut comparison = Vec::new();
    let mut detail = Vec::new();

    for &degree in &args.degrees {
        let envelope = derivative_envelope(&dataset.set, degree)?;
        let grid = dataset.set.grid();
        let (lower, upper) = (grid[0], grid[grid.len() - 1]);

        let sweep: Vec<(Option<f64>, KnotSequence)> = if !args.sweep_epsilons.is_empty() {
            args.sweep_epsilons
                .iter()
                .map(|&eps| Ok((Some(eps), ilp_place_knots(&envelope, degree, eps)?.knots)))
                .collect::<Result<_, Error>>()?
        } else {
            args.sweep_knots
                .iter()
                .map(|&k| {
                    let (eps, knots) = ilp_for_count(&envelope, degree, k)?;
                    Ok((Some(eps), knots))
                })
                .collect::<Result<_, Error>>()?
        };

        for (epsilon, ilp_knots) in sweep {
            let matched = equidistant_knots(lower, upper, degree, ilp_knots.interior().len())?;
            for (method, knots, eps) in [
                ("ilp", &ilp_knots, epsilon),
                ("equidistant", &matched, None),
            ] {
                let outcome = fit_and_measure(&dataset.set, knots)?;
                comparison.push(ComparisonRow {
                    method: method.into(),
                    degree,
                    knot_count: outcome.knot_count,
                    epsilon: eps,
                    max_abs_error: outcome.mean_max_abs,
                    rmse: outcome.mean_rmse,
                    gcv: outcome.mean_gcv,
                });
                for (i, name) in dataset.names.iter().enumerate() {
                    detail.push(FunctionRow {
                        method: method.into(),
                        degree,
                        knot_count: outcome.knot_count,
                        epsilon: eps,
                        function: name.clone(),
                        max_abs_error: outcome.per_function[i].0,
                        rmse: outcome.per_function[i].1,
                        gcv: outcome.per_function_gcv[i],
                    });
                }
                let max_gcv = outcome
                    .per_function_gcv
                    .iter()
                    .fold(0.0f64, |m, &g| m.max(g));
                for (label, max_abs, rmse, gcv) in [
                    (
                        "mean",
                        outcome.mean_max_abs,
                        outcome.mean_rmse,
                        outcome.mean_gcv,
                    ),
                    ("max", outcome.max_max_abs, outcome.max_rmse, max_gcv),
                ] {
                    detail.push(FunctionRow {
                        method: method.into(),
                        degree,
                        knot_count: outcome.knot_count,
                        epsilon: eps,
                        function: label.into(),
                        max_abs_error: max_abs,
                        rmse,
                        gcv,
                    });
                }
            }
        }
    }
    io::write_comparison_report(out_path(&args.out), &comparison)?;
    io::write_function_report(out_path(&args.detail), &detail)?;
    println!("wrote {} comparison row(s)", comparison.len());
    Ok(())
}

fn run_train(args: TrainArgs) -> Result<(), CliError> {
    let inputs = io::read_dataset(&args.input_dataset)?;
    let outputs = io::read_dataset(&args.output_dataset)?;
    if inputs.set.function_count() != outputs.set.function_count() {
        return Err(CliError::Lib(Error::InvalidInput(format!(
            "subject count mismatch: {} input column(s) vs {} output column(s)",
            inputs.set.function_count(),
            outputs.set.function_count()
        ))));
    }

    let tolerances = ToleranceConfig::new(args.eps_x, args.eps_y)?;
    let learner = match args.learner {
        LearnerKind::Ridge => LearnerConfig::Ridge { lambda: args.lambda },
        LearnerKind::Feedforward => LearnerConfig::Feedforward(FeedforwardConfig {
            hidden_layers: args.hidden.clone(),
            activation: match args.activation {
                ActivationKind::Identity => Activation::Identity,
                ActivationKind::Tanh => Activation::Tanh,
                ActivationKind::Relu => Activation::Relu,
            },
            learning_rate: args.learning_rate,
            epochs: args.epochs,
            seed: args.seed,
            validation_fraction: args.validation_fraction,
            patience: args.patience,
        }),
    };
    let config = M2PConfig {
        degree_input: args.degree_x,
        degree_output: args.degree_y,
        placement_input: Placement::Ilp {
            epsilon: tolerances.epsilon_input,
        },
        placement_output: Placement::Ilp {
            epsilon: tolerances.epsilon_output,
        },
        learner,
        normalize: args.normalize,
    };

    let split = m2p::split(inputs.set.function_count(), args.train_fraction, args.seed)?;
    let train_in = inputs.set.subset(&split.train)?;
    let train_out = outputs.set.subset(&split.train)?;
    let test_in = inputs.set.subset(&split.test)?;
    let test_out = outputs.set.subset(&split.test)?;

    let model = fit_m2p(&train_in, &train_out, &config)?;
    let evaluation = evaluate(&model, &test_in, &test_out)?;

    write_evaluation_csv(&out_path(&args.metrics), &split.test, &evaluation)?;
    io::write_model(&ModelDocument::M2P(model), out_path(&args.out_model))?;
    println!(
        "trained on {} subject(s), tested on {}: mspe_mean {} mspe_function {}",
        split.train.len(),
        split.test.len(),
        evaluation.mspe_mean,
        evaluation.mspe_function
    );
    Ok(())
}

fn write_evaluation_csv(
    path: &Path,
    test_indices: &[usize],
    evaluation: &m2p::M2PEvaluation,
) -> Result<(), Error> {
    let mut text = String::from("subject,mean_error_sq,pointwise_mse\n");
    text.push_str(&format!(
        "overall,{},{}\n",
        evaluation.mspe_mean, evaluation.mspe_function
    ));
    for report in &evaluation.subjects {
        text.push_str(&format!(
            "{},{},{}\n",
            test_indices[report.subject], report.mean_error_sq, report.pointwise_mse
        ));
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn parse_output_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(
            "--output-grid expects lower,upper,count (e.g. 0,1,50)",
        ));
    }
    let lower: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::usage("--output-grid lower bound is not a number"))?;
    let upper: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::usage("--output-grid upper bound is not a number"))?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::usage("--output-grid count is not an integer"))?;
    if lower >= upper || count < 2 {
        return Err(CliError::usage(
            "--output-grid needs lower < upper and count >= 2",
        ));
    }
    Ok((0..count)
        .map(|i| lower + (upper - lower) * i as f64 / (count - 1) as f64)
        .collect())
}

fn run_predict(args: PredictArgs) -> Result<(), CliError> {
    let model = io::read_m2p(&args.model)?;
    let Dataset { names, set } = io::read_dataset(&args.input)?;
    let grid = match &args.output_grid {
        Some(spec) => Some(parse_output_grid(spec)?),
        None => None,
    };

    for (i, name) in names.iter().enumerate() {
        let input = set.function(i)?;
        let predicted = model.predict(&input, grid.as_deref())?;
        let path = if names.len() == 1 {
            out_path(&args.out)
        } else {
            let base = out_path(&args.out);
            let stem = base
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "prediction".into());
            let ext = base
                .extension()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "csv".into());
            base.with_file_name(format!("{stem}_{name}.{ext}"))
        };
        write_prediction_csv(&path, &predicted)?;
    }
    println!("predicted {} curve(s)", names.len());
    Ok(())
}

fn write_prediction_csv(path: &Path, curve: &SampledFunction) -> Result<(), Error> {
    let mut text = String::from("s,predicted\n");
    for (s, v) in curve.grid().iter().zip(curve.values()) {
        text.push_str(&format!("{s},{v}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
