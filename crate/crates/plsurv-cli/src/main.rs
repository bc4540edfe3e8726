//! Command-line front end for the survival models in `plsurv`.
//!
//! Subcommands cover the full workflow: ingest a CSV of lifetimes, fit the
//! piecewise power-law cure model (fixed change points or grid search),
//! tabulate the product-limit estimator, compare candidate models by AIC
//! and residuals, simulate datasets, run Monte Carlo calibration studies,
//! and test group contrasts on attribute columns.
//!
//! Exit codes: 0 success, 1 usage (bad flags, bad environment), 2 data
//! validation, 3 estimation or search failure. All failures print one JSON
//! object to stderr: `{"error":{"code":..,"kind":"..","message":".."}}`.
//! Given the same inputs and flags, every command is deterministic;
//! `PLSURV_THREADS` caps the worker threads without changing any output.

mod dataset;
mod output;

use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand};
use serde::Serialize;

use plsurv::{
    apply_censoring, calibrate_ymax, cox_snell, estimate_changepoints, group_summary, km_fit,
    mc_study, mle_fit, permutation_test, refine_fit, saleh_model, sample, sample_cure,
    truncate_below_xmin, welch_test, CoxSnellResidual, FitOptions, GroupedTimes, LongTermModel,
    McConfig, PiecewisePowerLaw, SearchOptions, SurvivalSample,
};

use dataset::{DataError, Dataset};
use output::{
    hazard_curve, km_table, log_grid, survival_curve, AicRow, AttrReport, CompareReport,
    CurveTable, FitReport, GroupReport, PermutationBlock, ResidualSet, SimulateSummary,
};

/// One failure, carrying the process exit code and a machine-readable kind.
#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 1, kind: "usage", message: message.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Failure {
        Failure { code: 1, kind: "io", message: format!("{}: {e}", path.display()) }
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Failure {
        Failure { code: 2, kind: "data", message: e.0 }
    }
}

impl From<plsurv::Error> for Failure {
    fn from(e: plsurv::Error) -> Failure {
        use plsurv::Error as E;
        let (code, kind) = match &e {
            E::NoConvergence { .. } => (3, "no_convergence"),
            E::Search(_) => (3, "search"),
            E::Calibration(_) => (3, "calibration"),
            E::Study(_) => (3, "study"),
            E::Degenerate(_) => (3, "degenerate"),
            E::InvalidParameter { .. } => (2, "invalid_parameter"),
            E::Domain(_) => (2, "domain"),
            E::EmptyInput(_) => (2, "empty_input"),
            E::DegenerateTest(_) => (2, "degenerate_test"),
            E::DivergentMoment { .. } => (2, "divergent_moment"),
        };
        Failure { code, kind, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(
    name = "plsurv",
    version,
    about = "Piecewise power-law survival models with change points, censoring, and a cure fraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Fit the cure model to a dataset, with fixed or searched change points
    Fit(FitArgs),
    /// Tabulate the product-limit survival estimate with confidence bands
    Km(KmArgs),
    /// Fit several candidate models and compare them by AIC and residuals
    Compare(CompareArgs),
    /// Draw a synthetic dataset from a specified model
    Simulate(SimulateArgs),
    /// Run a Monte Carlo bias/RMSE/coverage study from a JSON config
    McStudy(McStudyArgs),
    /// Compare observed times between two attribute-defined groups
    AttrTest(AttrTestArgs),
}

#[derive(clap::Args)]
struct FitArgs {
    /// CSV dataset with time_years and event columns
    #[arg(long)]
    input: PathBuf,
    /// Lower support bound of the model (years)
    #[arg(long)]
    xmin: f64,
    /// Fixed change points as a comma list (or "none" for one segment)
    #[arg(long, conflicts_with_all = ["k", "grid"])]
    breaks: Option<String>,
    /// Number of segments for the change-point search
    #[arg(long, requires = "grid")]
    k: Option<usize>,
    /// Candidate change-point grid as lo:hi:step
    #[arg(long, requires = "k")]
    grid: Option<String>,
    /// Estimate the cure fraction, or pin it at zero
    #[arg(long, value_parser = parse_switch, default_value = "on", action = ArgAction::Set)]
    cure: bool,
    /// Sweep the fitted parameters to tighten the distance to the
    /// product-limit curve after the likelihood fit
    #[arg(long, value_parser = parse_switch, default_value = "off", action = ArgAction::Set)]
    refine: bool,
    /// Count searched change points as AIC parameters
    #[arg(long, value_parser = parse_switch, default_value = "on", action = ArgAction::Set)]
    aic_count_breaks: bool,
    /// Confidence level for intervals
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Points per emitted curve table
    #[arg(long, default_value_t = 400)]
    points: usize,
    /// Directory for fit.json, survival.json, hazard.json
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(clap::Args)]
struct KmArgs {
    /// CSV dataset with time_years and event columns
    #[arg(long)]
    input: PathBuf,
    /// Confidence level for the pointwise bands
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Write the table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CompareArgs {
    /// CSV dataset with time_years and event columns
    #[arg(long)]
    input: PathBuf,
    /// Lower support bound shared by the candidate models (years)
    #[arg(long)]
    xmin: f64,
    /// Candidate change points, one flag per model: a comma list or "none"
    #[arg(long)]
    breaks: Vec<String>,
    /// Include the published mixture-Weibull baseline in the comparison
    #[arg(long)]
    with_saleh: bool,
    /// Estimate the cure fraction in each candidate, or pin it at zero
    #[arg(long, value_parser = parse_switch, default_value = "on", action = ArgAction::Set)]
    cure: bool,
    /// Confidence level for the product-limit bands
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Points per survival overlay
    #[arg(long, default_value_t = 400)]
    points: usize,
    /// Output path for the comparison report
    #[arg(long, default_value = "compare.json")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Lower support bound of the generating model (years)
    #[arg(long)]
    xmin: f64,
    /// Change points as a comma list (or "none")
    #[arg(long, default_value = "none")]
    breaks: String,
    /// Per-segment exponents as a comma list
    #[arg(long)]
    alphas: String,
    /// Cure fraction of the generating model
    #[arg(long, default_value_t = 0.0)]
    pi: f64,
    /// Number of observations
    #[arg(long)]
    n: usize,
    /// Target censoring proportion; the bound is calibrated to hit it
    #[arg(long, conflicts_with = "horizon")]
    censor_rate: Option<f64>,
    /// Administrative censoring horizon (years)
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, default_value_t = 1234)]
    seed: u64,
    /// Write the CSV here (and a summary JSON to stdout) instead of
    /// printing the CSV to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct McStudyArgs {
    /// JSON study configuration
    #[arg(long)]
    config: PathBuf,
    /// Directory for mc_report.json and mc_report.csv
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(clap::Args)]
struct AttrTestArgs {
    /// CSV dataset with time_years, event, and the grouping column
    #[arg(long)]
    input: PathBuf,
    /// Attribute column to group by
    #[arg(long)]
    group_col: String,
    /// Value selecting the first group (matched case-insensitively)
    #[arg(long)]
    group_a: String,
    /// Value selecting the second group; all remaining rows when absent
    #[arg(long)]
    group_b: Option<String>,
    /// Permutation resamples for an exact-style p-value; 0 disables
    #[arg(long, default_value_t = 0)]
    permutation: usize,
    #[arg(long, default_value_t = 1234)]
    seed: u64,
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(format!("expected on or off, got {other:?}")),
    }
}

fn parse_f64_list(flag: &str, s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("--{flag}: {p:?} is not a number")))
        })
        .collect()
}

/// "none" means an empty break list (a single segment).
fn parse_breaks(s: &str) -> Result<Vec<f64>, Failure> {
    if s == "none" {
        Ok(Vec::new())
    } else {
        parse_f64_list("breaks", s)
    }
}

fn parse_grid_spec(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::usage(format!("--grid must be lo:hi:step with step > 0, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !lo.is_finite() || !hi.is_finite() || !(step > 0.0) || hi < lo {
        return Err(bad());
    }
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let x = lo + i as f64 * step;
        if x > hi + step * 1e-9 {
            break;
        }
        grid.push(x);
        i += 1;
    }
    Ok(grid)
}

fn emit_failure(f: &Failure) {
    let body = serde_json::json!({
        "error": { "code": f.code, "kind": f.kind, "message": f.message }
    });
    eprintln!("{body}");
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("PLSURV_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| {
            Failure::usage(format!("PLSURV_THREADS must be a positive integer, got {raw:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn main() {
    // Die quietly when the downstream pipe closes (plsurv km | head).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    std::process::exit(0);
                }
                _ => {
                    let f = Failure::usage(e.to_string());
                    emit_failure(&f);
                    std::process::exit(f.code as i32);
                }
            }
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Commands::Fit(args) => run_fit(args),
        Commands::Km(args) => run_km(args),
        Commands::Compare(args) => run_compare(args),
        Commands::Simulate(args) => run_simulate(args),
        Commands::McStudy(args) => run_mc_study(args),
        Commands::AttrTest(args) => run_attr_test(args),
    });
    if let Err(f) = result {
        emit_failure(&f);
        std::process::exit(f.code as i32);
    }
}

fn run_fit(args: FitArgs) -> Result<(), Failure> {
    let data = Dataset::from_path(&args.input)?;
    let samples = data.samples();
    let events = samples.iter().filter(|s| s.event).count();
    let options = FitOptions {
        cure: args.cure,
        count_searched_breaks: args.aic_count_breaks,
        ..FitOptions::default()
    };

    let (fit, searched) = match (&args.breaks, args.k) {
        (Some(spec), None) => {
            let breaks = parse_breaks(spec)?;
            let mut fit = mle_fit(samples, args.xmin, &breaks, &options)?;
            if args.refine {
                let (clean, _) = truncate_below_xmin(samples, args.xmin)?;
                let km = km_fit(&clean)?;
                fit = refine_fit(&fit, &clean, &km)?;
            }
            (fit, false)
        }
        (None, Some(k)) => {
            let grid = parse_grid_spec(args.grid.as_deref().expect("clap requires grid with k"))?;
            let search = SearchOptions { fit: options, refine: args.refine };
            (estimate_changepoints(samples, args.xmin, k, &grid, &search)?, true)
        }
        _ => {
            return Err(Failure::usage(
                "specify the change points: --breaks LIST, or --k N --grid lo:hi:step",
            ))
        }
    };

    let report = FitReport::new(
        &fit,
        samples.len(),
        events,
        args.level,
        searched.then_some(args.aic_count_breaks),
    )?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Failure::io(&args.out_dir, e))?;
    write_json(&args.out_dir.join("fit.json"), &report)?;
    write_json(&args.out_dir.join("survival.json"), &survival_curve(&fit.model, "fit", args.points)?)?;
    write_json(&args.out_dir.join("hazard.json"), &hazard_curve(&fit.model, "fit", args.points)?)?;

    print_fit_report(&report, &args.out_dir);
    Ok(())
}

fn print_fit_report(r: &FitReport, out_dir: &Path) {
    let k = r.alphas.len();
    println!("piecewise power-law fit: {k} segment{}", if k == 1 { "" } else { "s" });
    println!("  x_min           {}", r.x_min);
    if r.breaks.is_empty() {
        println!("  change points   none");
    } else {
        let joined: Vec<String> = r.breaks.iter().map(f64::to_string).collect();
        println!("  change points   {}", joined.join(", "));
    }
    for (i, ((a, se), ci)) in r
        .alphas
        .iter()
        .zip(&r.std_errors)
        .zip(&r.confidence.alphas)
        .enumerate()
    {
        println!(
            "  alpha[{}]        {a:.4} (se {se:.4})  [{:.4}, {:.4}]",
            i + 1,
            ci[0],
            ci[1]
        );
    }
    match (r.pi_std_error, r.confidence.pi) {
        (Some(se), Some(ci)) => println!(
            "  cure fraction   {:.4} (se {se:.4})  [{:.4}, {:.4}]",
            r.pi, ci[0], ci[1]
        ),
        _ => println!("  cure fraction   {:.4}", r.pi),
    }
    println!("  log-likelihood  {:.4}", r.loglik);
    println!("  AIC             {:.4} ({} parameters)", r.aic, r.n_params);
    println!(
        "  data            n = {}, events = {}, censoring = {:.1}%, {} censored below x_min",
        r.n,
        r.events,
        100.0 * r.censoring_rate,
        r.censored_below_xmin
    );
    if r.converged {
        println!("  converged after {} iterations", r.iterations);
    } else {
        println!("  NOT converged after {} iterations", r.iterations);
    }
    println!("  wrote fit.json, survival.json, hazard.json to {}", out_dir.display());
}

fn run_km(args: KmArgs) -> Result<(), Failure> {
    let data = Dataset::from_path(&args.input)?;
    let km = km_fit(data.samples())?;
    let table = km_table(&km, "observed", args.level)?;
    match &args.out {
        Some(path) => {
            write_json(path, &table)?;
            println!("wrote product-limit table ({} steps) to {}", table.x.len(), path.display());
        }
        None => {
            println!("{}", serde_json::to_string_pretty(&table).expect("table serialization"));
        }
    }
    Ok(())
}

fn run_compare(args: CompareArgs) -> Result<(), Failure> {
    if args.breaks.is_empty() && !args.with_saleh {
        return Err(Failure::usage(
            "nothing to compare: give at least one --breaks LIST or --with-saleh",
        ));
    }
    let data = Dataset::from_path(&args.input)?;
    let (clean, _) = truncate_below_xmin(data.samples(), args.xmin)?;
    let km = km_fit(&clean)?;
    let km_out = km_table(&km, "observed", args.level)?;
    let options = FitOptions { cure: args.cure, ..FitOptions::default() };

    // Overlay all candidates on one data-driven grid so the curves and the
    // product-limit steps share an x-range.
    let hi = clean.iter().map(|s| s.time).fold(args.xmin, f64::max);
    let grid = log_grid(args.xmin, hi, args.points);

    let mut curves = Vec::new();
    let mut aic = Vec::new();
    let mut residuals = Vec::new();
    let mut label_counts: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for spec in &args.breaks {
        let breaks = parse_breaks(spec)?;
        // A stalled maximizer is not fatal here: a misspecified candidate
        // is exactly what the comparison is meant to expose, so rank its
        // best iterate and flag the row.
        let fit = match mle_fit(&clean, args.xmin, &breaks, &options) {
            Ok(fit) => fit,
            Err(plsurv::Error::NoConvergence { best, .. }) => *best,
            Err(e) => return Err(e.into()),
        };
        let base_label = format!("k{}", breaks.len() + 1);
        let seen = label_counts.entry(base_label.clone()).or_insert(0);
        *seen += 1;
        let label =
            if *seen == 1 { base_label } else { format!("{base_label}_{seen}", seen = *seen) };
        let y: Vec<f64> = grid
            .iter()
            .map(|&x| fit.model.survival_pop(x))
            .collect::<Result<_, _>>()
            .map_err(Failure::from)?;
        curves.push(CurveTable { name: label.clone(), x: grid.clone(), y, bands: None });
        aic.push(AicRow {
            label: label.clone(),
            breaks: Some(fit.model.base().breaks().to_vec()),
            pi: Some(fit.model.pi()),
            n_params: fit.n_params,
            loglik: fit.loglik,
            aic: fit.aic,
            converged: fit.converged,
        });
        residuals.push(ResidualSet { label, values: cox_snell(&fit, &clean)? });
    }

    if args.with_saleh {
        let m = saleh_model();
        let label = "saleh_baseline".to_string();
        let y: Vec<f64> =
            grid.iter().map(|&x| m.survival(x)).collect::<Result<_, _>>().map_err(Failure::from)?;
        curves.push(CurveTable { name: label.clone(), x: grid.clone(), y, bands: None });
        let mut ll = 0.0;
        let mut values = Vec::with_capacity(clean.len());
        for s in &clean {
            let surv = m.survival(s.time)?;
            ll += if s.event { m.pdf(s.time)?.ln() } else { surv.ln() };
            values.push(CoxSnellResidual { value: -surv.ln(), event: s.event });
        }
        let n_params = 5;
        aic.push(AicRow {
            label: label.clone(),
            breaks: None,
            pi: None,
            n_params,
            loglik: ll,
            aic: 2.0 * n_params as f64 - 2.0 * ll,
            converged: true,
        });
        residuals.push(ResidualSet { label, values });
    }

    let report = CompareReport { km: km_out, curves, aic, residuals };
    write_json(&args.out, &report)?;

    println!("model comparison, n = {} (lower AIC is better)", clean.len());
    println!("  {:<16} {:>8} {:>16} {:>12}", "label", "params", "log-likelihood", "AIC");
    let mut stalled = false;
    for row in &report.aic {
        let mark = if row.converged { " " } else { "*" };
        stalled |= !row.converged;
        println!(
            "  {:<15}{mark} {:>8} {:>16.4} {:>12.4}",
            row.label, row.n_params, row.loglik, row.aic
        );
    }
    if stalled {
        println!("  * maximizer stalled before its tolerance; best iterate shown");
    }
    println!("  wrote {}", args.out.display());
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let breaks = parse_breaks(&args.breaks)?;
    let alphas = parse_f64_list("alphas", &args.alphas)?;
    let base = PiecewisePowerLaw::new(args.xmin, breaks, alphas)?;
    let model = LongTermModel::new(args.pi, base)?;

    let mut y_max = None;
    let mut horizon = args.horizon;
    let samples: Vec<SurvivalSample> = match (args.censor_rate, args.horizon) {
        (None, Some(h)) => sample_cure(&model, args.n, h, args.seed)?,
        (Some(rate), None) => {
            if args.pi == 0.0 {
                let times = sample(model.base(), args.n, args.seed)?;
                let y = calibrate_ymax(model.base(), rate)?;
                y_max = Some(y);
                // Separate stream for the censoring bounds, so the event
                // times match a complete-data draw with the same seed.
                apply_censoring(&times, y, args.seed.wrapping_add(1))?
            } else {
                if rate <= args.pi {
                    return Err(Failure {
                        code: 3,
                        kind: "calibration",
                        message: format!(
                            "target censoring rate {rate} is not reachable: every cured \
                             observation (fraction {}) is censored already",
                            args.pi
                        ),
                    });
                }
                // Under administrative censoring at h the expected censored
                // share is pi + (1 - pi) S_0(h); solve for h.
                let s0 = (rate - args.pi) / (1.0 - args.pi);
                let h = model.base().quantile(1.0 - s0)?;
                horizon = Some(h);
                sample_cure(&model, args.n, h, args.seed)?
            }
        }
        (None, None) => {
            if args.pi > 0.0 {
                return Err(Failure::usage(
                    "--pi > 0 needs --horizon or --censor-rate: cured lifetimes never end",
                ));
            }
            sample(model.base(), args.n, args.seed)?
                .into_iter()
                .map(|t| SurvivalSample { time: t, event: true })
                .collect()
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };

    let data = Dataset::from_samples(&samples);
    let csv = data.to_csv();
    let events = samples.iter().filter(|s| s.event).count();
    match &args.out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| Failure::io(path, e))?;
            let summary = SimulateSummary {
                n: data.len(),
                events,
                censoring_rate: 1.0 - events as f64 / data.len() as f64,
                y_max,
                horizon,
                seed: args.seed,
                path: path.display().to_string(),
            };
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serialization"));
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn run_mc_study(args: McStudyArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Failure::io(&args.config, e))?;
    let config: McConfig = serde_json::from_str(&text).map_err(|e| Failure {
        code: 2,
        kind: "config",
        message: format!("{}: {e}", args.config.display()),
    })?;
    let report = mc_study(&config)?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| Failure::io(&args.out_dir, e))?;
    write_json(&args.out_dir.join("mc_report.json"), &report)?;
    let csv_path = args.out_dir.join("mc_report.csv");
    std::fs::write(&csv_path, report.to_csv()).map_err(|e| Failure::io(&csv_path, e))?;

    println!(
        "Monte Carlo study: {} replications per sample size, seed {}",
        config.replications, config.seed
    );
    if let Some(y) = report.y_max {
        println!("  censoring bound calibrated to {y:.4} for target rate {}", config.censoring);
    }
    println!(
        "  {:<12} {:>6} {:>12} {:>12} {:>10} {:>8}",
        "parameter", "n", "bias", "rmse", "coverage", "dropped"
    );
    for c in &report.cells {
        println!(
            "  {:<12} {:>6} {:>12.5} {:>12.5} {:>10.3} {:>8}",
            c.parameter, c.n, c.bias, c.rmse, c.coverage, c.dropped
        );
    }
    println!("  wrote mc_report.json, mc_report.csv to {}", args.out_dir.display());
    Ok(())
}

fn run_attr_test(args: AttrTestArgs) -> Result<(), Failure> {
    let data = Dataset::from_path(&args.input)?;
    let column = data.column(&args.group_col).ok_or_else(|| Failure {
        code: 2,
        kind: "data",
        message: format!("column {:?} not found in the dataset", args.group_col),
    })?;

    let matches = |value: &str, wanted: &str| value.eq_ignore_ascii_case(wanted);
    let mut times_a = Vec::new();
    let mut times_b = Vec::new();
    for (value, sample) in column.iter().zip(data.samples()) {
        if matches(value, &args.group_a) {
            times_a.push(sample.time);
        } else if match &args.group_b {
            Some(b) => matches(value, b),
            None => true,
        } {
            times_b.push(sample.time);
        }
    }
    let label_b = args.group_b.clone().unwrap_or_else(|| "other".to_string());
    let grouped = GroupedTimes::new(args.group_a.clone(), times_a, label_b, times_b)?;
    let welch = welch_test(&grouped)?;
    let permutation = if args.permutation > 0 {
        Some(PermutationBlock {
            resamples: args.permutation,
            seed: args.seed,
            p: permutation_test(&grouped, args.permutation, args.seed)?,
        })
    } else {
        None
    };
    let (summary_a, summary_b) = group_summary(&grouped);
    let report = AttrReport {
        group_col: args.group_col,
        caveat: "censored observations enter at their observed times, so group means \
                 understate the true lifetimes wherever censoring bites"
            .to_string(),
        welch,
        permutation,
        groups: vec![
            GroupReport { summary: summary_a, times: grouped.times_a.clone() },
            GroupReport { summary: summary_b, times: grouped.times_b.clone() },
        ],
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serialization"));
    Ok(())
}
