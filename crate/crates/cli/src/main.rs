use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use specaug_cli::augment::write_sample;
use specaug_cli::policy::{parse_grid, parse_range};
use specaug_cli::{
    generate_dataset, inspect, parse_methods, replay, run_augment, run_eval, AuditLog, CliError,
    EvalOptions, Manifest, MethodOptions, PolicyConfig, ReplicationFilter, Result, SynthOptions,
};
use specaug_core::{load_image, HoleFillMode, ImageFormat, WaveletKind, Window};

#[derive(Parser)]
#[command(
    name = "specaug",
    version,
    about = "Spectral and baseline augmentation for 2D images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Augment every eligible image of a manifest.
    Augment(AugmentArgs),
    /// Score prediction masks against patch labels.
    Eval(EvalArgs),
    /// Print transform round-trip errors and coefficient statistics.
    Inspect(InspectArgs),
    /// Rebuild one output from an audit log.
    Replay(ReplayArgs),
    /// Write a small procedural dataset with labels and prediction masks.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Wavelet {
    Haar,
    Db4,
}

impl From<Wavelet> for WaveletKind {
    fn from(w: Wavelet) -> Self {
        match w {
            Wavelet::Haar => WaveletKind::Haar,
            Wavelet::Db4 => WaveletKind::Db4,
        }
    }
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Policy JSON; overrides the method flags below.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// One method or a `+`-joined chain: dct, dwt, simple, intensity, affine, elastic.
    #[arg(long, default_value = "dwt")]
    method: String,
    #[arg(long, default_value_t = 5)]
    replications: usize,
    #[arg(long, default_value_t = 0.005)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    diseased_only: bool,
    #[arg(long, value_enum, default_value = "haar")]
    wavelet: Wavelet,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long)]
    dwt_details_only: bool,
    #[arg(long, value_parser = parse_range, default_value = "0.8:1.2")]
    gamma_range: (f64, f64),
    #[arg(long, default_value_t = 10.0)]
    rotation_max: f64,
    #[arg(long, value_parser = parse_grid, default_value = "4x4")]
    grid: (usize, usize),
    #[arg(long, value_parser = parse_range, default_value = "1:20")]
    disp_range: (f64, f64),
    /// Intensity window for gamma; defaults to the manifest's.
    #[arg(long, value_parser = parse_range)]
    window: Option<(f64, f64)>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FillMode {
    Closing,
    Flood,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// CSV report path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    hole_fill: bool,
    #[arg(long, value_enum, default_value = "closing")]
    hole_fill_mode: FillMode,
    #[arg(long, default_value_t = 0.5)]
    patch_threshold: f64,
}

#[derive(Args)]
struct InspectArgs {
    image: PathBuf,
    #[arg(long, value_enum, default_value = "haar")]
    wavelet: Wavelet,
    #[arg(long, default_value_t = 2)]
    levels: usize,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    audit: PathBuf,
    /// Output file name as listed in the audit log.
    #[arg(long)]
    output: String,
    /// Where to write the rebuilt image; labels go next to it.
    #[arg(long)]
    to: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 100)]
    size: usize,
    #[arg(long, default_value_t = 20)]
    patch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn augment(args: AugmentArgs) -> Result<()> {
    let manifest = Manifest::load(&args.manifest)?;
    let policy = match &args.policy {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| CliError::Io {
                path: path.clone(),
                source: e,
            })?;
            let policy: PolicyConfig =
                serde_json::from_slice(&bytes).map_err(|e| CliError::Json {
                    path: path.clone(),
                    source: e,
                })?;
            policy.validate()?;
            policy
        }
        None => {
            let window = match args.window {
                Some((lo, hi)) => Window::new(lo, hi)?,
                None => manifest.window()?,
            };
            let opts = MethodOptions {
                wavelet: args.wavelet.into(),
                levels: args.levels,
                details_only: args.dwt_details_only,
                gamma_range: args.gamma_range,
                window,
                rotation_max_deg: args.rotation_max,
                grid: args.grid,
                disp_range: args.disp_range,
            };
            let filter = if args.diseased_only {
                ReplicationFilter::DiseasedOnly
            } else {
                ReplicationFilter::All
            };
            PolicyConfig::new(
                parse_methods(&args.method, &opts)?,
                args.replications,
                args.eta,
                args.seed,
                filter,
            )?
        }
    };
    let audit = run_augment(&manifest, &policy, &args.out, args.workers)?;
    let c = &audit.counts;
    println!(
        "{} images, {} eligible, {} skipped, {} outputs (policy {})",
        c.images, c.eligible, c.skipped, c.outputs, audit.policy_hash
    );
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let pred = Manifest::load(&args.pred)?;
    let truth = Manifest::load(&args.truth)?;
    let opts = EvalOptions {
        hole_fill: args.hole_fill.then_some(match args.hole_fill_mode {
            FillMode::Closing => HoleFillMode::Closing,
            FillMode::Flood => HoleFillMode::Flood,
        }),
        patch_threshold: args.patch_threshold,
        ..EvalOptions::default()
    };
    let report = run_eval(&pred, &truth, &opts)?;
    match &args.out {
        Some(path) => report.write_csv(path)?,
        None => {
            let csv = report.to_csv().map_err(|source| CliError::Csv {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
            print!("{}", String::from_utf8_lossy(&csv));
        }
    }
    eprintln!(
        "mean F1 {:.6} over {} images",
        report.aggregate_f1,
        report.rows.len()
    );
    Ok(())
}

fn labels_path_for(image: &Path) -> PathBuf {
    image.with_extension("labels.csv")
}

fn main() -> ExitCode {
    // clap reports usage errors with status 2, which is reserved for I/O here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Augment(args) => augment(args),
        Command::Eval(args) => eval(args),
        Command::Inspect(args) => load_image(&args.image, ImageFormat::from_path(&args.image))
            .map_err(CliError::from)
            .and_then(|img| inspect(&img, args.wavelet.into(), args.levels))
            .map(|report| print!("{report}")),
        Command::Replay(args) => AuditLog::load(&args.audit)
            .and_then(|audit| replay(&audit, &args.output))
            .and_then(|sample| write_sample(&sample, &args.to, Some(&labels_path_for(&args.to)))),
        Command::Synth(args) => generate_dataset(
            &args.out,
            &SynthOptions {
                count: args.count,
                size: args.size,
                patch_size: args.patch_size,
                seed: args.seed,
            },
        )
        .map(|(truth, pred)| println!("{}\n{}", truth.display(), pred.display())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
