//! Command-line front end: file ingestion, metric reports, VOC plots.
//!
//! Every number printed here is the result of one library call — the CLI
//! parses flags, reads files, and serializes results, nothing more. Exit
//! codes: 0 success, 1 usage or parse error, 2 data invariant violation,
//! 3 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vocbench::io;
use vocbench::report::{
    build_report, voc_section, BandSpec, EvalOutput, OptimizeOutput, ReportOptions, VocSection,
    DEFAULT_ECE_BINS,
};
use vocbench::{
    accuracy, apply_discriminator, apply_rescale, calibrated_threshold, count_outcomes,
    discrimination, ece, fixed_voc, isotonic_rescale, omega_aware_voc, optimize_threshold,
    polarize, preset, push_up, realize, train_bin_remap, voc_svg, Error, Penalty, Preset,
    RealizeMode, ScoredDataset, VocCurve,
};

#[derive(Parser)]
#[command(
    name = "vocbench",
    version,
    about = "Evaluate classifiers as abstaining classifiers under a value model",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a prediction file at a frozen threshold under a use case.
    Eval {
        /// Prediction CSV (confidence,predicted,label[,weight]).
        #[arg(long)]
        pred: PathBuf,
        /// Use-case JSON: {"omega": r} or {"v_correct","v_abstain","v_wrong"}.
        #[arg(long)]
        usecase: PathBuf,
        /// Acceptance threshold (accept iff confidence >= threshold).
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
    },
    /// Find the value-optimal threshold on a validation file.
    Optimize {
        /// Validation prediction CSV the threshold is tuned on.
        #[arg(long)]
        val: PathBuf,
        /// Use-case JSON.
        #[arg(long)]
        usecase: PathBuf,
        /// Optional held-out prediction CSV to re-measure the tuned
        /// threshold on.
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Compute VOC curves: knots, omega_sup, banded areas, and plots.
    Voc {
        /// Prediction CSV; repeat to overlay several files in one plot.
        #[arg(long, required = true)]
        pred: Vec<PathBuf>,
        /// Curve construction mode.
        #[arg(long, value_enum, default_value_t = VocModeArg::OmegaAware)]
        mode: VocModeArg,
        /// Frozen threshold for fixed mode (default 0).
        #[arg(long)]
        threshold: Option<f64>,
        /// Right edge of the plotted omega window.
        #[arg(long, default_value_t = 10.0)]
        omega_max: f64,
        /// Area band LO:HI, where HI may be a number, "sup", or "inf";
        /// repeatable. Defaults to 0:1 and 1:sup.
        #[arg(long = "band", value_parser = parse_band)]
        band: Vec<BandSpec>,
        /// Write curve knots as CSV (single --pred only).
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// Write an SVG plot of all curves.
        #[arg(long)]
        out_svg: Option<PathBuf>,
    },
    /// Produce the full metrics report for a prediction file.
    Report {
        /// Prediction CSV the report is computed on.
        #[arg(long)]
        pred: PathBuf,
        /// Optional validation CSV; thresholds are tuned on it and
        /// measured on --pred. Defaults to --pred (in-sample).
        #[arg(long)]
        val: Option<PathBuf>,
        /// Optional use-case JSON; its omega joins the tuned set.
        #[arg(long)]
        usecase: Option<PathBuf>,
        /// Penalty to tune a threshold for; repeatable.
        #[arg(long = "omega")]
        omega: Vec<f64>,
        /// Area band LO:HI (HI may be "sup" or "inf"); repeatable.
        /// Defaults to 0:1 and 1:sup.
        #[arg(long = "band", value_parser = parse_band)]
        band: Vec<BandSpec>,
        /// Number of equal-width calibration bins.
        #[arg(long, default_value_t = DEFAULT_ECE_BINS)]
        ece_bins: usize,
        /// Discriminator JSON applied to all inputs before any metric.
        #[arg(long)]
        discriminator: Option<PathBuf>,
        /// Write the omega-aware curve knots as CSV.
        #[arg(long)]
        curve_csv: Option<PathBuf>,
        /// Write an SVG plot of the omega-aware curve.
        #[arg(long)]
        out_svg: Option<PathBuf>,
        /// Right edge of the plotted omega window.
        #[arg(long, default_value_t = 10.0)]
        omega_max: f64,
    },
    /// Build synthetic prediction files from confidence distributions.
    Synth {
        /// Built-in distribution preset.
        #[arg(long, value_parser = parse_preset)]
        preset: Option<Preset>,
        /// Distribution JSON file (list of {confidence, mass}).
        #[arg(long)]
        dist: Option<PathBuf>,
        /// Distribution transform, applied left to right; repeatable.
        /// Forms: polarize:C0:FRACTION:C_HI:C_LO and
        /// push_up:C0:DELTA_MASS:C_TARGET.
        #[arg(long = "transform", value_parser = parse_transform)]
        transform: Vec<TransformSpec>,
        /// Realization mode.
        #[arg(long, value_enum, default_value_t = RealizeArg::Population)]
        mode: RealizeArg,
        /// Number of sampled records (sample mode only).
        #[arg(long)]
        n: Option<usize>,
        /// RNG seed for sample mode.
        #[arg(long, env = "VOCBENCH_SEED", default_value_t = 0)]
        seed: u64,
        /// Write the realized prediction CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the transformed distribution JSON here.
        #[arg(long)]
        out_dist: Option<PathBuf>,
    },
    /// Fit an isotonic confidence rescale and apply it.
    Calibrate {
        /// Validation CSV the rescale is fitted on.
        #[arg(long)]
        val: PathBuf,
        /// Prediction CSV the rescale is applied to (defaults to --val).
        #[arg(long)]
        pred: Option<PathBuf>,
        /// Number of equal-width bins for the before/after ECE figures.
        #[arg(long, default_value_t = DEFAULT_ECE_BINS)]
        ece_bins: usize,
        /// Write the fitted rescale as CSV (breakpoint,output).
        #[arg(long)]
        out_rescale: Option<PathBuf>,
        /// Write the rescaled prediction CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and apply confidence discriminators.
    Discriminate {
        #[command(subcommand)]
        command: DiscriminateCommand,
    },
}

#[derive(Subcommand)]
enum DiscriminateCommand {
    /// Train a binned-accuracy discriminator on a validation file.
    Train {
        /// Validation prediction CSV.
        #[arg(long)]
        val: PathBuf,
        /// Number of equal-width confidence bins.
        #[arg(long, default_value_t = DEFAULT_ECE_BINS)]
        n_bins: usize,
        /// Key the table by (predicted class, bin) instead of bin alone.
        #[arg(long)]
        per_class: bool,
        /// Write the trained discriminator JSON here.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rewrite a prediction file's confidences with a discriminator.
    Apply {
        /// Prediction CSV to rewrite.
        #[arg(long)]
        pred: PathBuf,
        /// Discriminator JSON produced by `discriminate train`.
        #[arg(long)]
        discriminator: PathBuf,
        /// Write the rewritten prediction CSV here.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VocModeArg {
    Fixed,
    OmegaAware,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RealizeArg {
    Population,
    Sample,
}

#[derive(Clone, Copy, Debug)]
enum TransformSpec {
    Polarize {
        c0: f64,
        fraction: f64,
        c_hi: f64,
        c_lo: f64,
    },
    PushUp {
        c0: f64,
        delta_mass: f64,
        c_target: f64,
    },
}

fn parse_band(s: &str) -> Result<BandSpec, Error> {
    s.parse()
}

fn parse_preset(s: &str) -> Result<Preset, Error> {
    s.parse()
}

fn parse_transform(s: &str) -> Result<TransformSpec, String> {
    fn num(what: &str, s: &str) -> Result<f64, String> {
        s.parse()
            .map_err(|_| format!("bad {what} in transform: {s:?}"))
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["polarize", c0, fraction, c_hi, c_lo] => Ok(TransformSpec::Polarize {
            c0: num("C0", c0)?,
            fraction: num("FRACTION", fraction)?,
            c_hi: num("C_HI", c_hi)?,
            c_lo: num("C_LO", c_lo)?,
        }),
        ["push_up" | "push-up", c0, delta_mass, c_target] => Ok(TransformSpec::PushUp {
            c0: num("C0", c0)?,
            delta_mass: num("DELTA_MASS", delta_mass)?,
            c_target: num("C_TARGET", c_target)?,
        }),
        _ => Err(format!(
            "expected polarize:C0:FRACTION:C_HI:C_LO or \
             push_up:C0:DELTA_MASS:C_TARGET, got {s:?}"
        )),
    }
}

/// Command failures: usage errors exit 1; library errors exit by class.
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn lib_exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Io(_) => 1,
        Error::EmptyDataset
        | Error::InvalidField { .. }
        | Error::InvalidRow { .. }
        | Error::AbstentionDominates
        | Error::NeverAbstain => 2,
        Error::Format(_) => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(lib_exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Eval {
            pred,
            usecase,
            threshold,
        } => cmd_eval(&pred, &usecase, threshold),
        Command::Optimize { val, usecase, test } => cmd_optimize(&val, &usecase, test.as_deref()),
        Command::Voc {
            pred,
            mode,
            threshold,
            omega_max,
            band,
            out_csv,
            out_svg,
        } => cmd_voc(&pred, mode, threshold, omega_max, band, out_csv, out_svg),
        Command::Report {
            pred,
            val,
            usecase,
            omega,
            band,
            ece_bins,
            discriminator,
            curve_csv,
            out_svg,
            omega_max,
        } => cmd_report(ReportArgs {
            pred,
            val,
            usecase,
            omega,
            band,
            ece_bins,
            discriminator,
            curve_csv,
            out_svg,
            omega_max,
        }),
        Command::Synth {
            preset,
            dist,
            transform,
            mode,
            n,
            seed,
            out,
            out_dist,
        } => cmd_synth(preset, dist, transform, mode, n, seed, out, out_dist),
        Command::Calibrate {
            val,
            pred,
            ece_bins,
            out_rescale,
            out,
        } => cmd_calibrate(&val, pred.as_deref(), ece_bins, out_rescale, out),
        Command::Discriminate { command } => match command {
            DiscriminateCommand::Train {
                val,
                n_bins,
                per_class,
                out,
            } => cmd_discriminate_train(&val, n_bins, per_class, &out),
            DiscriminateCommand::Apply {
                pred,
                discriminator,
                out,
            } => cmd_discriminate_apply(&pred, &discriminator, &out),
        },
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    print!("{}", io::to_json_string(value)?);
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Lib(e.into()))
}

fn path_string(path: &Path) -> String {
    path.display().to_string()
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (std::fs::canonicalize(a), std::fs::canonicalize(b)) {
        (Ok(a), Ok(b)) => a == b,
        _ => a == b,
    }
}

fn cmd_eval(pred: &Path, usecase: &Path, threshold: f64) -> Result<(), CliError> {
    let data = io::read_predictions(pred)?;
    let use_case = io::read_use_case(usecase)?;
    let penalty = use_case.penalty();
    let counts = count_outcomes(&data.apply_threshold(threshold)?)?;
    print_json(&EvalOutput {
        threshold,
        omega: penalty.value(),
        counts: (&counts).into(),
        raw_value: use_case.use_case().map(|u| counts.raw_value(u)),
        dimensionless_value: counts.dimensionless_value(penalty)?,
    })
}

fn cmd_optimize(val: &Path, usecase: &Path, test: Option<&Path>) -> Result<(), CliError> {
    let tuning = io::read_predictions(val)?;
    let penalty = io::read_use_case(usecase)?.penalty();
    let tuned = optimize_threshold(&tuning, penalty);
    let test_value = match test {
        Some(test_path) => {
            if same_file(val, test_path) {
                log::warn!(
                    "validation and test files are the same ({}): the test value is in-sample",
                    test_path.display()
                );
            }
            let held_out = io::read_predictions(test_path)?;
            let counts = count_outcomes(&held_out.apply_threshold(tuned.threshold)?)?;
            Some(counts.dimensionless_value(penalty)?)
        }
        None => None,
    };
    print_json(&OptimizeOutput {
        omega: penalty.value(),
        threshold: tuned.threshold,
        achieved_value: tuned.achieved_value,
        accepted_weight: tuned.accepted_weight,
        calibrated_threshold: calibrated_threshold(penalty),
        test_value,
    })
}

#[derive(serde::Serialize)]
struct VocEntry {
    source: String,
    #[serde(flatten)]
    voc: VocSection,
}

fn build_curve(data: &ScoredDataset, mode: VocModeArg, threshold: f64) -> Result<VocCurve, Error> {
    match mode {
        VocModeArg::OmegaAware => Ok(omega_aware_voc(data)),
        VocModeArg::Fixed => {
            let counts = count_outcomes(&data.apply_threshold(threshold)?)?;
            fixed_voc(&counts, threshold)
        }
    }
}

fn cmd_voc(
    preds: &[PathBuf],
    mode: VocModeArg,
    threshold: Option<f64>,
    omega_max: f64,
    bands: Vec<BandSpec>,
    out_csv: Option<PathBuf>,
    out_svg: Option<PathBuf>,
) -> Result<(), CliError> {
    if mode == VocModeArg::OmegaAware && threshold.is_some() {
        return Err(usage("--threshold only applies to --mode fixed"));
    }
    if out_csv.is_some() && preds.len() > 1 {
        return Err(usage("--out-csv supports a single --pred input"));
    }
    let threshold = threshold.unwrap_or(0.0);
    let bands = if bands.is_empty() {
        BandSpec::defaults()
    } else {
        bands
    };

    let mut curves = Vec::with_capacity(preds.len());
    for path in preds {
        let data = io::read_predictions(path)?;
        curves.push(build_curve(&data, mode, threshold)?);
    }

    if let Some(path) = &out_csv {
        io::write_curve_csv(path, &curves[0])?;
    }
    if let Some(path) = &out_svg {
        let labels: Vec<String> = preds.iter().map(|p| path_string(p)).collect();
        let series: Vec<(&str, &VocCurve)> = labels
            .iter()
            .map(String::as_str)
            .zip(curves.iter())
            .collect();
        write_text(path, &voc_svg(&series, omega_max)?)?;
    }

    let entries: Vec<VocEntry> = preds
        .iter()
        .zip(curves.iter())
        .map(|(path, curve)| {
            Ok(VocEntry {
                source: path_string(path),
                voc: voc_section(curve, &bands)?,
            })
        })
        .collect::<Result<_, Error>>()?;
    print_json(&entries)
}

struct ReportArgs {
    pred: PathBuf,
    val: Option<PathBuf>,
    usecase: Option<PathBuf>,
    omega: Vec<f64>,
    band: Vec<BandSpec>,
    ece_bins: usize,
    discriminator: Option<PathBuf>,
    curve_csv: Option<PathBuf>,
    out_svg: Option<PathBuf>,
    omega_max: f64,
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let mut eval_data = io::read_predictions(&args.pred)?;
    let mut tuning = match &args.val {
        Some(path) => Some(io::read_predictions(path)?),
        None => None,
    };
    if let Some(path) = &args.discriminator {
        let h = io::read_discriminator(path)?;
        eval_data = apply_discriminator(&eval_data, &h);
        tuning = tuning.map(|d| apply_discriminator(&d, &h));
    }

    let mut omegas = Vec::with_capacity(args.omega.len() + 1);
    for value in &args.omega {
        omegas.push(Penalty::new(*value)?);
    }
    if let Some(path) = &args.usecase {
        omegas.push(io::read_use_case(path)?.penalty());
    }

    let options = ReportOptions {
        ece_bins: args.ece_bins,
        omegas,
        bands: if args.band.is_empty() {
            BandSpec::defaults()
        } else {
            args.band.clone()
        },
        svg: args.out_svg.as_deref().map(path_string),
        curve_csv: args.curve_csv.as_deref().map(path_string),
    };
    let tuning_ref = tuning.as_ref().unwrap_or(&eval_data);
    let report = build_report(&eval_data, tuning_ref, &options)?;

    if args.curve_csv.is_some() || args.out_svg.is_some() {
        let curve = omega_aware_voc(&eval_data);
        if let Some(path) = &args.curve_csv {
            io::write_curve_csv(path, &curve)?;
        }
        if let Some(path) = &args.out_svg {
            let label = path_string(&args.pred);
            write_text(path, &voc_svg(&[(label.as_str(), &curve)], args.omega_max)?)?;
        }
    }
    print_json(&report)
}

#[derive(serde::Serialize)]
struct SynthSummary {
    records: usize,
    total_weight: f64,
    accuracy: f64,
    discrimination: f64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    preset_arg: Option<Preset>,
    dist: Option<PathBuf>,
    transforms: Vec<TransformSpec>,
    mode: RealizeArg,
    n: Option<usize>,
    seed: u64,
    out: Option<PathBuf>,
    out_dist: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut distribution = match (preset_arg, &dist) {
        (Some(p), None) => preset(p),
        (None, Some(path)) => io::read_distribution(path)?,
        _ => return Err(usage("exactly one of --preset or --dist is required")),
    };
    for transform in &transforms {
        distribution = match *transform {
            TransformSpec::Polarize {
                c0,
                fraction,
                c_hi,
                c_lo,
            } => polarize(&distribution, c0, fraction, c_hi, c_lo)?,
            TransformSpec::PushUp {
                c0,
                delta_mass,
                c_target,
            } => push_up(&distribution, c0, delta_mass, c_target)?,
        };
    }
    if let Some(path) = &out_dist {
        io::write_distribution(path, &distribution)?;
    }

    let mode = match mode {
        RealizeArg::Population => {
            if n.is_some() {
                return Err(usage("--n only applies to --mode sample"));
            }
            RealizeMode::Population
        }
        RealizeArg::Sample => RealizeMode::Sample {
            n: n.ok_or_else(|| usage("--n is required with --mode sample"))?,
            seed,
        },
    };
    let data = realize(&distribution, mode)?;
    if let Some(path) = &out {
        io::write_predictions(path, &data)?;
    }
    print_json(&SynthSummary {
        records: data.len(),
        total_weight: data.total_weight(),
        accuracy: accuracy(&data),
        discrimination: discrimination(&data).discrimination,
    })
}

#[derive(serde::Serialize)]
struct CalibrateSummary {
    n_bins: usize,
    ece_before: f64,
    ece_after: f64,
}

fn cmd_calibrate(
    val: &Path,
    pred: Option<&Path>,
    ece_bins: usize,
    out_rescale: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let fit_data = io::read_predictions(val)?;
    let rescale = isotonic_rescale(&fit_data);
    let target = match pred {
        Some(path) => io::read_predictions(path)?,
        None => fit_data,
    };
    let rescaled = apply_rescale(&target, &rescale);
    if let Some(path) = &out_rescale {
        io::write_rescale(path, &rescale)?;
    }
    if let Some(path) = &out {
        io::write_predictions(path, &rescaled)?;
    }
    print_json(&CalibrateSummary {
        n_bins: ece_bins,
        ece_before: ece(&target, ece_bins)?,
        ece_after: ece(&rescaled, ece_bins)?,
    })
}

#[derive(serde::Serialize)]
struct TrainSummary {
    kind: &'static str,
    n_bins: usize,
    per_class: bool,
    entries: usize,
}

fn cmd_discriminate_train(
    val: &Path,
    n_bins: usize,
    per_class: bool,
    out: &Path,
) -> Result<(), CliError> {
    let data = io::read_predictions(val)?;
    let h = train_bin_remap(&data, n_bins, per_class)?;
    io::write_discriminator(out, &h)?;
    print_json(&TrainSummary {
        kind: h.kind().as_str(),
        n_bins: h.n_bins(),
        per_class: h.per_class(),
        entries: h.table().len(),
    })
}

#[derive(serde::Serialize)]
struct ApplySummary {
    records: usize,
    total_weight: f64,
    accuracy: f64,
}

fn cmd_discriminate_apply(
    pred: &Path,
    discriminator: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let data = io::read_predictions(pred)?;
    let h = io::read_discriminator(discriminator)?;
    let revised = apply_discriminator(&data, &h);
    io::write_predictions(out, &revised)?;
    print_json(&ApplySummary {
        records: revised.len(),
        total_weight: revised.total_weight(),
        accuracy: accuracy(&revised),
    })
}
