//! `quatcomp`: mask generation, completion, evaluation and the CQSVD benchmark.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use quatcomp::completion::{
    default_rank_for_missing_ratio, solve_with, write_trace_csv, Observation, SolverConfig,
};
use quatcomp::cqsvd::{cqsvd_qqr_with, diagonal_dominance, rmse, synthetic_low_rank, truncated_rmse, CqsvdConfig};
use quatcomp::image::{image_to_quat, load_mask_pgm, load_ppm, quat_to_image, save_mask_pgm, save_ppm};
use quatcomp::manifest::{MaskSource, Metrics, OutputPaths, RunManifest};
use quatcomp::mask::{gen_mask, MaskSpec};
use quatcomp::metrics::{psnr, ssim};
use quatcomp::qdct::QdctConfig;
use quatcomp::Error;

const SEED_ENV: &str = "QMC_SEED";

#[derive(Parser)]
#[command(name = "quatcomp", version, about = "Quaternion low-rank + sparse color image completion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an observation mask (PGM: 255 = observed, 0 = missing)
    Mask(MaskArgs),
    /// Fill the missing pixels of a PPM image
    Complete(CompleteArgs),
    /// Print PSNR and SSIM of an output image against a reference
    Eval(EvalArgs),
    /// Run CQSVD-QQR on a synthetic low-rank matrix and print per-iteration RMSE
    BenchCqsvd(BenchArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("kind").required(true).args(["mr", "blocks"])))]
#[command(group(ArgGroup::new("size").required(true).args(["like", "width"])))]
struct MaskArgs {
    /// Missing ratio in [0, 1) for uniformly random missing pixels
    #[arg(long)]
    mr: Option<f64>,
    /// Number of rhombus blocks to remove
    #[arg(long)]
    blocks: Option<usize>,
    /// Rhombus half-diagonal along rows
    #[arg(long, default_value_t = MaskSpec::DEFAULT_D1, requires = "blocks")]
    d1: usize,
    /// Rhombus half-diagonal along columns
    #[arg(long, default_value_t = MaskSpec::DEFAULT_D2, requires = "blocks")]
    d2: usize,
    /// Seed (falls back to $QMC_SEED, then 0)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, requires = "height")]
    width: Option<usize>,
    #[arg(long, requires = "width")]
    height: Option<usize>,
    /// Take the mask size from this PPM image
    #[arg(long, conflicts_with_all = ["width", "height"])]
    like: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompleteArgs {
    /// Input PPM (P6, maxval 255)
    #[arg(long)]
    input: PathBuf,
    /// Mask PGM (P5; 255 = observed, 0 = missing)
    #[arg(long)]
    mask: PathBuf,
    /// Factor rank [default: preset for the mask's missing ratio]
    #[arg(long)]
    rank: Option<usize>,
    /// Sparse-prior weight [default: 0.1]
    #[arg(long)]
    lambda: Option<f64>,
    /// Initial penalty [default: 0.05]
    #[arg(long)]
    mu0: Option<f64>,
    /// Penalty cap [default: 1e8]
    #[arg(long)]
    mu_max: Option<f64>,
    /// Penalty growth factor [default: 1.15]
    #[arg(long)]
    gamma: Option<f64>,
    /// Relative-change stopping tolerance [default: 1e-5]
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap [default: 300]
    #[arg(long)]
    max_iter: Option<usize>,
    /// QDCT axis "x,y,z" (normalized) [default: 1,1,1]
    #[arg(long)]
    qfactor: Option<String>,
    /// Drop the transform-domain sparse prior
    #[arg(long)]
    no_sparse: bool,
    /// Output PPM
    #[arg(long)]
    out: PathBuf,
    /// JSON run manifest
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-iteration CSV trace
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Ground-truth image for the metrics [default: the input]
    #[arg(long = "ref")]
    reference: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 300)]
    m: usize,
    #[arg(long, default_value_t = 300)]
    n: usize,
    /// Rank of the synthetic matrix
    #[arg(long, default_value_t = 250)]
    rank: usize,
    /// Target rank of the factorization
    #[arg(long, default_value_t = 120)]
    r: usize,
    #[arg(long, default_value_t = 60)]
    iters: usize,
    /// Seed (falls back to $QMC_SEED, then 0)
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_) | Error::InvalidRank { .. } => 1,
            Error::Io(_)
            | Error::Malformed { .. }
            | Error::Unsupported { .. }
            | Error::Json(_)
            | Error::DimensionMismatch { .. }
            | Error::ImageTooSmall { .. } => 2,
            Error::Solver(_) | Error::EmptyMask => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("{SEED_ENV}={v:?} is not an unsigned 64-bit integer"))),
        Err(_) => Ok(0),
    }
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn run_mask(args: MaskArgs) -> CliResult {
    let (rows, cols) = match (&args.like, args.width, args.height) {
        (Some(p), _, _) => {
            let img = load_ppm(p)?;
            (img.height(), img.width())
        }
        (None, Some(w), Some(h)) => (h, w),
        _ => return Err(Failure::usage("give --like or both --width and --height")),
    };
    let seed = resolve_seed(args.seed)?;
    let spec = match (args.mr, args.blocks) {
        (Some(mr), _) => MaskSpec::Random { mr, seed },
        (None, Some(blocks)) => MaskSpec::RhombusBlocks {
            blocks,
            d1: args.d1,
            d2: args.d2,
            seed,
        },
        (None, None) => return Err(Failure::usage("give --mr or --blocks")),
    };
    let mask = gen_mask(&spec, rows, cols)?;
    save_mask_pgm(&mask, &args.out)?;
    println!(
        "{}x{} mask: {} observed, missing ratio {:.4}",
        cols,
        rows,
        mask.observed_count(),
        mask.missing_ratio()
    );
    Ok(())
}

fn parse_qfactor(s: &str) -> CliResult<QdctConfig> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("--qfactor expects \"x,y,z\", got {s:?}")))?;
    match parts[..] {
        [x, y, z] => Ok(QdctConfig::from_axis(x, y, z)?),
        _ => Err(Failure::usage(format!("--qfactor expects three components, got {s:?}"))),
    }
}

fn run_complete(args: CompleteArgs) -> CliResult {
    let img = load_ppm(&args.input)?;
    let mask = load_mask_pgm(&args.mask)?;
    if mask.shape() != (img.height(), img.width()) {
        return Err(Error::DimensionMismatch {
            op: "mask vs image",
            left: mask.shape(),
            right: (img.height(), img.width()),
        }
        .into());
    }
    let reference = match &args.reference {
        Some(p) => load_ppm(p)?,
        None => img.clone(),
    };

    let missing_ratio = mask.missing_ratio();
    let rank = args
        .rank
        .unwrap_or_else(|| default_rank_for_missing_ratio(missing_ratio).min(img.width().min(img.height())));
    let mut cfg = SolverConfig::new(rank);
    cfg.lambda = args.lambda.unwrap_or(cfg.lambda);
    cfg.mu0 = args.mu0.unwrap_or(cfg.mu0);
    cfg.mu_max = args.mu_max.unwrap_or(cfg.mu_max);
    cfg.gamma = args.gamma.unwrap_or(cfg.gamma);
    cfg.tol = args.tol.unwrap_or(cfg.tol);
    cfg.it_max = args.max_iter.unwrap_or(cfg.it_max);
    if let Some(q) = &args.qfactor {
        cfg.qdct = parse_qfactor(q)?;
    }
    cfg.sparse = !args.no_sparse;

    let obs = Observation::new(image_to_quat(&img), mask)?;
    let mut trace = Vec::new();
    let (x, report) = solve_with(&obs, &cfg, |rec, _| trace.push(*rec))?;
    let out_img = quat_to_image(&x);
    save_ppm(&out_img, &args.out)?;
    if let Some(p) = &args.trace {
        write_trace_csv(BufWriter::new(File::create(p)?), &trace)?;
    }

    let metrics = Metrics {
        psnr: psnr(&reference, &out_img)?,
        ssim: ssim(&reference, &out_img).unwrap_or(f64::NAN),
        rmse: rmse(&image_to_quat(&reference), &image_to_quat(&out_img))?,
    };
    println!(
        "{} iterations ({}), rank {}, PSNR {:.3} dB, SSIM {:.4}",
        report.iterations,
        if report.converged { "converged" } else { "iteration cap" },
        cfg.rank,
        metrics.psnr,
        metrics.ssim
    );

    if let Some(p) = &args.report {
        let manifest = RunManifest {
            tool: "quatcomp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            input: path_string(&args.input),
            mask: MaskSource::File(path_string(&args.mask)),
            missing_ratio,
            config: cfg,
            outputs: OutputPaths {
                image: path_string(&args.out),
                report: Some(path_string(p)),
                trace: args.trace.as_deref().map(path_string),
            },
            metrics: Some(metrics),
            solve: report,
        };
        manifest.save(p)?;
    }
    Ok(())
}

fn run_eval(args: EvalArgs) -> CliResult {
    let reference = load_ppm(&args.reference)?;
    let out = load_ppm(&args.out)?;
    println!("PSNR: {:.4} dB", psnr(&reference, &out)?);
    println!("SSIM: {:.6}", ssim(&reference, &out)?);
    Ok(())
}

fn run_bench(args: BenchArgs) -> CliResult {
    let seed = resolve_seed(args.seed)?;
    if args.rank < 1 || args.rank > args.m.min(args.n) {
        return Err(Error::InvalidRank {
            rank: args.rank,
            rows: args.m,
            cols: args.n,
        }
        .into());
    }
    let cfg = CqsvdConfig {
        rank: args.r,
        eps: f64::MIN_POSITIVE,
        it_max: args.iters,
    };
    cfg.validate(args.m, args.n)?;

    let x = synthetic_low_rank(args.m, args.n, args.rank, seed);
    let mut rows = Vec::with_capacity(args.iters);
    cqsvd_qqr_with(&x, &cfg, |step| {
        let rmse = (step.residual / (args.m * args.n) as f64).sqrt();
        let dd = diagonal_dominance(step.d).expect("core is square");
        rows.push((step.iteration, rmse, dd));
    })?;

    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(out, "iteration,rmse,diagonal_dominance")?;
    for (t, e, dd) in &rows {
        writeln!(out, "{t},{e:e},{dd}")?;
    }
    out.flush()?;

    let best = truncated_rmse(&x, args.r);
    let last = rows.last().map_or(f64::NAN, |r| r.1);
    eprintln!("truncated-QSVD RMSE (top {}): {best:e}", args.r);
    eprintln!("final RMSE / truncated: {:.6}", last / best);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Mask(a) => run_mask(a),
        Command::Complete(a) => run_complete(a),
        Command::Eval(a) => run_eval(a),
        Command::BenchCqsvd(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("quatcomp: error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
