//! Command-line front end. Exit codes: 0 success, 2 validation error,
//! 3 numerical failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lps_core::deadness::{bound_n_reinit, bound_one_reinit, estimate_dead_prob, BoundParams};
use lps_core::homotopy::{build_abs_fit_system, solve_all, PolySystem, TrackSettings};
use lps_core::init::{init_params, BiasMode, InitScheme};
use lps_core::net::{train_run, ParamSet, TrainHyper};
use lps_core::poly_approx::{l2_error, project_activation, relu};
use lps_core::CoreError;

use lps_lab::campaign::{fig1_csv, run_campaign, run_fig1, table1_csv, SpecFamily};
use lps_lab::config::{
    load_config, parse_scheme_kind, parse_selection, parse_widths, scheme_kind_name, RunConfig,
};
use lps_lab::sysparse::parse_system;
use lps_lab::targets::TargetFunction;

#[derive(Parser)]
#[command(name = "lps-lab", about = "Initialization and training experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Polynomial L2 approximation of an activation on [-1,1].
    Approx(ApproxArgs),
    /// Draw one parameter set and emit it as CSV.
    Init(InitArgs),
    /// One seeded (init, train) run on a benchmark target.
    Train(TrainArgs),
    /// Monte-Carlo born-dead probability for a scheme.
    Deadness(DeadnessArgs),
    /// Closed-form born-dead bounds.
    Bounds(BoundsArgs),
    /// Track all total-degree paths of a polynomial system.
    Homotopy(HomotopyArgs),
    /// Non-collapse campaign over many seeded training runs.
    Table1(Table1Args),
    /// Born-dead probability sweep over depth and scheme.
    Fig1(Fig1Args),
}

#[derive(Args)]
struct ApproxArgs {
    /// Only `relu` is supported.
    #[arg(long, default_value = "relu")]
    activation: String,
    #[arg(long)]
    degree: usize,
    /// What to print: legendre | monomial | error.
    #[arg(long, default_value = "monomial")]
    emit: String,
}

#[derive(Args)]
struct InitArgs {
    /// Comma-separated layer widths, e.g. 1,2,2,1.
    #[arg(long)]
    widths: String,
    #[arg(long, default_value = "he")]
    scheme: String,
    #[arg(long, default_value_t = 0)]
    reinit: u32,
    /// bernoulli | bits.
    #[arg(long, default_value = "bernoulli")]
    selection: String,
    /// sampled | zero.
    #[arg(long, default_value = "sampled")]
    bias: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// f1 | f2 | f3 | f4.
    #[arg(long)]
    function: String,
    #[arg(long, default_value = "he")]
    init: String,
    #[arg(long, default_value_t = 0)]
    reinit: u32,
    /// bernoulli | bits.
    #[arg(long, default_value = "bits")]
    selection: String,
    /// sampled | zero | auto (zero for he/xavier, sampled for lps).
    #[arg(long, default_value = "auto")]
    bias: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4000)]
    steps: usize,
}

#[derive(Args)]
struct DeadnessArgs {
    #[arg(long)]
    widths: String,
    #[arg(long, default_value = "he")]
    scheme: String,
    #[arg(long, default_value_t = 0)]
    reinit: u32,
    /// bernoulli | bits.
    #[arg(long, default_value = "bits")]
    selection: String,
    /// sampled | zero | auto (zero for he/xavier, sampled for lps).
    #[arg(long, default_value = "auto")]
    bias: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BoundsArgs {
    /// one | n.
    #[arg(long)]
    mode: String,
    #[arg(long)]
    widths: String,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Re-initialization count N.
    #[arg(long = "n-reinit", default_value_t = 1)]
    n_reinit: u32,
    /// auto (p_l = 2^l / (2^{n+1}-1)) | 0.
    #[arg(long, default_value = "auto")]
    p: String,
}

#[derive(Args)]
struct HomotopyArgs {
    /// abs-fit, or `file` together with --system-file.
    #[arg(long, default_value = "abs-fit")]
    system: String,
    #[arg(long)]
    system_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    gamma_seed: u64,
    /// Solutions CSV path (stdout when omitted).
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args)]
struct Table1Args {
    /// key = value config file; flags below override nothing when present.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "f1")]
    function: String,
    #[arg(long, default_value = "he")]
    init: String,
    #[arg(long, default_value_t = 0)]
    reinit: u32,
    /// bernoulli | bits.
    #[arg(long, default_value = "bits")]
    selection: String,
    /// sampled | zero | auto (zero for he/xavier, sampled for lps).
    #[arg(long, default_value = "auto")]
    bias: String,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the full 1000-run count.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    no_timestamp: bool,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Fig1Args {
    /// Inclusive depth range as min:max.
    #[arg(long, default_value = "2:10")]
    depths: String,
    /// Comma-separated schemes, reinit after a colon: he,lps:1,lps:4.
    #[arg(long, default_value = "he,lps:1")]
    schemes: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_timestamp: bool,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Validation(String),
    Numerical(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Numerical(..) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

fn validation<T: std::fmt::Display>(e: T) -> CliError {
    CliError::Validation(e.to_string())
}

fn build_scheme(kind: &str, reinit: u32, selection: &str, bias: &str) -> Result<InitScheme, CliError> {
    let kind = parse_scheme_kind(kind).map_err(validation)?;
    let selection_mode = parse_selection(selection).map_err(validation)?;
    let bias_mode = match bias {
        "sampled" => BiasMode::Sampled,
        "zero" => BiasMode::Zero,
        // Benchmark baselines: He and Xavier zero their biases, LPS samples them.
        "auto" => match kind {
            lps_core::init::InitKind::He | lps_core::init::InitKind::Xavier => BiasMode::Zero,
            _ => BiasMode::Sampled,
        },
        other => return Err(CliError::Validation(format!("unknown bias mode '{other}'"))),
    };
    let scheme = InitScheme {
        kind,
        reinit_count: reinit,
        selection_mode,
        bias_mode,
    };
    scheme.validate()?;
    Ok(scheme)
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(validation),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_approx(args: &ApproxArgs) -> Result<(), CliError> {
    if args.activation != "relu" {
        return Err(CliError::Validation(format!(
            "unsupported activation '{}'",
            args.activation
        )));
    }
    let mut out = String::from("# schema=k,value\n");
    match args.emit.as_str() {
        "legendre" => {
            let coeffs = project_activation(&relu, args.degree)?;
            for (k, a) in coeffs.legendre_coeffs.iter().enumerate() {
                let _ = writeln!(out, "{k},{a}");
            }
        }
        "monomial" => {
            let coeffs = project_activation(&relu, args.degree)?;
            for (k, a) in coeffs.monomial_coeffs.iter().enumerate() {
                let _ = writeln!(out, "{k},{a}");
            }
        }
        "error" => {
            let e = l2_error(&relu, args.degree)?;
            let _ = writeln!(out, "{},{}", args.degree, e);
        }
        other => {
            return Err(CliError::Validation(format!(
                "unknown emit mode '{other}' (legendre|monomial|error)"
            )))
        }
    }
    print!("{out}");
    Ok(())
}

fn params_csv(params: &ParamSet) -> String {
    let mut out = String::from("# schema=layer,row,col,value\n");
    for (l, layer) in params.layers.iter().enumerate() {
        for r in 0..layer.rows {
            for c in 0..layer.cols {
                let _ = writeln!(out, "{},{},{},{}", l, r, c, layer.weight(r, c));
            }
            // Bias sits one column past the weights.
            let _ = writeln!(out, "{},{},{},{}", l, r, layer.cols, layer.bias[r]);
        }
    }
    out
}

fn cmd_init(args: &InitArgs) -> Result<(), CliError> {
    let widths = parse_widths(&args.widths).map_err(validation)?;
    let scheme = build_scheme(&args.scheme, args.reinit, &args.selection, &args.bias)?;
    let spec = lps_core::net::NetSpec::new(widths, scheme_activation(&scheme))?;
    let params = init_params(&spec, &scheme, args.seed)?;
    emit(&args.emit, &params_csv(&params))
}

fn scheme_activation(scheme: &InitScheme) -> lps_core::net::Activation {
    if scheme.kind == lps_core::init::InitKind::LpsTanh {
        lps_core::net::Activation::Tanh
    } else {
        lps_core::net::Activation::ReLU
    }
}

fn cmd_train(args: &TrainArgs) -> Result<(), CliError> {
    let target = TargetFunction::parse(&args.function).map_err(validation)?;
    let scheme = build_scheme(&args.init, args.reinit, &args.selection, &args.bias)?;
    let config = RunConfig::defaults(target, scheme);
    let spec = config.spec();
    let (inputs, targets) = lps_lab::targets::make_dataset(target);
    let mut hyper = TrainHyper::new(args.steps, config.collapse_threshold);
    hyper.history_stride = args.steps.max(1);
    let params = init_params(&spec, &scheme, args.seed)?;
    let report = train_run(&spec, &params, &inputs, &targets, &hyper, args.seed)?;
    println!("# schema=seed,init,reinit,final_loss,collapsed");
    println!(
        "{},{},{},{},{}",
        args.seed,
        scheme_kind_name(scheme.kind),
        scheme.reinit_count,
        report.final_loss,
        report.collapsed as u8
    );
    Ok(())
}

fn cmd_deadness(args: &DeadnessArgs) -> Result<(), CliError> {
    let widths = parse_widths(&args.widths).map_err(validation)?;
    let scheme = build_scheme(&args.scheme, args.reinit, &args.selection, &args.bias)?;
    let spec = lps_core::net::NetSpec::new(widths.clone(), scheme_activation(&scheme))?;
    let report = estimate_dead_prob(&spec, &scheme, args.trials, args.seed)?;
    let spec_name: Vec<String> = widths.iter().map(|w| w.to_string()).collect();
    println!("# schema=spec,scheme,reinit,trials,dead,estimate,ci95");
    println!(
        "{},{},{},{},{},{},{}",
        spec_name.join("x"),
        scheme_kind_name(scheme.kind),
        scheme.reinit_count,
        report.trials,
        report.dead_count,
        report.estimate,
        report.ci95_halfwidth
    );
    Ok(())
}

fn cmd_bounds(args: &BoundsArgs) -> Result<(), CliError> {
    // Same full-widths convention as the other subcommands; the bounds range
    // over hidden layers only, so the output width is dropped.
    let mut widths = parse_widths(&args.widths).map_err(validation)?;
    if widths.len() < 3 {
        return Err(CliError::Validation(
            "bounds need at least one hidden layer (three widths)".into(),
        ));
    }
    widths.pop();
    let mut bp = match args.p.as_str() {
        "auto" => BoundParams::with_auto_p(widths, args.delta, args.n_reinit),
        "0" => {
            let mut bp = BoundParams::with_zero_p(widths);
            bp.delta = args.delta;
            bp.n_reinit = args.n_reinit;
            bp
        }
        other => {
            return Err(CliError::Validation(format!(
                "p must be 'auto' or '0', got '{other}'"
            )))
        }
    };
    let bound = match args.mode.as_str() {
        "one" => {
            bp.n_reinit = 1;
            bound_one_reinit(&bp)?
        }
        "n" => bound_n_reinit(&bp)?,
        other => {
            return Err(CliError::Validation(format!(
                "mode must be 'one' or 'n', got '{other}'"
            )))
        }
    };
    println!("{bound}");
    Ok(())
}

fn solutions_csv(report: &lps_core::homotopy::SolveReport, num_vars: usize) -> String {
    let mut out = String::from("# schema=cluster_id,is_real,residual");
    for i in 1..=num_vars {
        let _ = write!(out, ",re{i},im{i}");
    }
    out.push('\n');
    for (id, cl) in report.clusters.iter().enumerate() {
        let _ = write!(out, "{},{},{}", id, cl.is_real as u8, cl.residual);
        for v in &cl.representative {
            let _ = write!(out, ",{},{}", v.re, v.im);
        }
        out.push('\n');
    }
    out
}

fn cmd_homotopy(args: &HomotopyArgs) -> Result<(), CliError> {
    let system: PolySystem = match (args.system.as_str(), &args.system_file) {
        ("abs-fit", None) => build_abs_fit_system(),
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(validation)?;
            parse_system(&text).map_err(validation)?
        }
        (other, None) => {
            return Err(CliError::Validation(format!(
                "unknown system '{other}' (abs-fit, or --system-file)"
            )))
        }
    };
    let report = solve_all(&system, &TrackSettings::default(), args.gamma_seed)?;
    let converged = report
        .outcomes
        .iter()
        .filter(|o| o.status == lps_core::homotopy::PathStatus::Converged)
        .count();
    let real = report.clusters.iter().filter(|c| c.is_real).count();
    eprintln!(
        "paths={} converged={} clusters={} real={}",
        report.outcomes.len(),
        converged,
        report.clusters.len(),
        real
    );
    emit(&args.emit, &solutions_csv(&report, system.num_vars))
}

fn cmd_table1(args: &Table1Args) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => load_config(path).map_err(validation)?,
        None => {
            let target = TargetFunction::parse(&args.function).map_err(validation)?;
            let scheme = build_scheme(&args.init, args.reinit, &args.selection, &args.bias)?;
            let mut c = RunConfig::defaults(target, scheme);
            c.runs = if args.full { 1000 } else { args.runs };
            c.base_seed = args.seed;
            c.validate().map_err(validation)?;
            c
        }
    };
    let result = run_campaign(&config);
    emit(&args.out, &table1_csv(&config, &result, !args.no_timestamp))
}

fn parse_depth_range(s: &str) -> Result<(usize, usize), CliError> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| CliError::Validation(format!("depths must be min:max, got '{s}'")))?;
    let lo: usize = lo.parse().map_err(validation)?;
    let hi: usize = hi.parse().map_err(validation)?;
    if lo == 0 || hi < lo {
        return Err(CliError::Validation(format!("bad depth range '{s}'")));
    }
    Ok((lo, hi))
}

fn parse_scheme_list(s: &str) -> Result<Vec<InitScheme>, CliError> {
    s.split(',')
        .map(|item| {
            let (kind, reinit) = match item.split_once(':') {
                Some((k, r)) => (k, r.parse::<u32>().map_err(validation)?),
                None => (item, 0),
            };
            build_scheme(kind.trim(), reinit, "bits", "auto")
        })
        .collect()
}

fn cmd_fig1(args: &Fig1Args) -> Result<(), CliError> {
    let (lo, hi) = parse_depth_range(&args.depths)?;
    let schemes = parse_scheme_list(&args.schemes)?;
    if args.trials == 0 {
        return Err(CliError::Validation("at least one trial required".into()));
    }
    let rows = run_fig1(SpecFamily::width2_1d(), &schemes, lo..=hi, args.trials, args.seed)?;
    emit(&args.out, &fig1_csv(&rows, !args.no_timestamp))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Approx(a) => cmd_approx(a),
        Command::Init(a) => cmd_init(a),
        Command::Train(a) => cmd_train(a),
        Command::Deadness(a) => cmd_deadness(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Homotopy(a) => cmd_homotopy(a),
        Command::Table1(a) => cmd_table1(a),
        Command::Fig1(a) => cmd_fig1(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
