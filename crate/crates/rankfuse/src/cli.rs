//! Command-line surface: spectra, fusion, validation, candidate ranking,
//! noise sweeps and synthetic data generation.
//!
//! Every flag can also be supplied through an environment variable prefixed
//! `RANKFUSE_`. Exit codes: 0 success, 1 theorem conclusion false, 2 parse or
//! argument error, 3 degenerate matrix, 4 dimension mismatch, 5 infeasible
//! generation.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::fusion::{
    blend_with_convention, harmonic_mean_gain, optimize_blend, AlphaConvention, BlendOptimization,
    BlendSpec, FusionResult, OptimizerConfig,
};
use crate::informativeness::{
    channel_importance, low_count_for_ratio, select_low_channels, LowChannelSet, SelectionMode,
};
use crate::io::{read_matrix, write_matrix, MatrixFormat};
use crate::matrix::FeatureMatrix;
use crate::report::{
    to_json, FusionReportFile, NoiseSweepRow, PairScoreRow, TheoremReportFile, SCHEMA_VERSION,
};
use crate::spectral::{decompose, spectrum_of};
use crate::synth::{gen_complementary_pair, gen_spectrum_matrix, perturb_noise, GeneratorConfig};
use crate::theorem::{default_validation_k, validate_theorem};

#[derive(Debug, Parser)]
#[command(
    name = "rankfuse",
    about = "Effective-rank diagnostics and rank-targeted channel fusion for feature matrices",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print effective rank, entropy, numerical rank and the spectrum of a matrix.
    Erank(ErankArgs),
    /// Print the singular-value spectrum as CSV rows (index, sigma, p).
    Spectrum(SpectrumArgs),
    /// Blend two modalities in both directions and write the fused matrices plus a gain report.
    Fuse(FuseArgs),
    /// Run the full theorem bound suite on a modality pair; exit 1 if the effective rank did not increase.
    Validate(ValidateArgs),
    /// Rank candidate modalities by the harmonic mean of mutual effective-rank gains against a base.
    PairScore(PairScoreArgs),
    /// Sweep noise levels on one modality and record both gains per level.
    NoiseSweep(NoiseSweepArgs),
    /// Generate synthetic matrices: a prescribed spectrum or a complementary pair.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlphaModeArg {
    Fixed,
    Optimize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    /// α weights the channel's own modality (canonical).
    Own,
    /// α weights the other modality.
    Other,
}

impl From<ConventionArg> for AlphaConvention {
    fn from(arg: ConventionArg) -> Self {
        match arg {
            ConventionArg::Own => AlphaConvention::OwnChannel,
            ConventionArg::Other => AlphaConvention::OtherChannel,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    A,
    B,
}

#[derive(Debug, Args)]
struct ErankArgs {
    /// Input matrix (.csv, or .f64/.raw for raw-f64).
    input: PathBuf,
    /// Assert that the row count is a whole number of batches of this size.
    #[arg(long, env = "RANKFUSE_BATCH_ROWS")]
    batch_rows: Option<usize>,
    /// Emit JSON instead of the tabular form.
    #[arg(long, env = "RANKFUSE_JSON")]
    json: bool,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    input: PathBuf,
    #[arg(long, env = "RANKFUSE_BATCH_ROWS")]
    batch_rows: Option<usize>,
    #[arg(long, env = "RANKFUSE_JSON")]
    json: bool,
}

#[derive(Debug, Args)]
struct FuseArgs {
    a: PathBuf,
    b: PathBuf,
    /// Fraction of channels per side selected for blending.
    #[arg(long, default_value_t = 0.10, env = "RANKFUSE_RATIO")]
    ratio: f64,
    /// Fixed blend coefficients or projected-gradient optimization.
    #[arg(long, value_enum, default_value_t = AlphaModeArg::Fixed, env = "RANKFUSE_ALPHA_MODE")]
    alpha_mode: AlphaModeArg,
    /// Blend coefficient for fixed mode.
    #[arg(long, default_value_t = 0.5, env = "RANKFUSE_ALPHA")]
    alpha: f64,
    /// Which operand α weights.
    #[arg(long, value_enum, default_value_t = ConventionArg::Own, env = "RANKFUSE_ALPHA_CONVENTION")]
    alpha_convention: ConventionArg,
    #[arg(long, default_value_t = 0, env = "RANKFUSE_SEED")]
    seed: u64,
    /// Optimizer iterations for --alpha-mode optimize.
    #[arg(long, default_value_t = 200, env = "RANKFUSE_OPT_ITERS")]
    opt_iters: usize,
    /// Output files are <prefix>_a_fused.<ext>, <prefix>_b_fused.<ext>, <prefix>_report.json.
    #[arg(long, env = "RANKFUSE_OUT_PREFIX")]
    out_prefix: PathBuf,
    /// Output matrix format; defaults to the format of input A.
    #[arg(long, env = "RANKFUSE_FORMAT")]
    format: Option<String>,
    #[arg(long, env = "RANKFUSE_JSON")]
    json: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    x: PathBuf,
    y: PathBuf,
    #[arg(long, default_value_t = 0.10, env = "RANKFUSE_RATIO")]
    ratio: f64,
    /// Dominant subspace size; defaults to the smallest k capturing 90% of
    /// the spectral energy.
    #[arg(long, env = "RANKFUSE_K")]
    k: Option<usize>,
    /// Fixed blend coefficient; omitted means uniform-random per channel.
    #[arg(long, env = "RANKFUSE_ALPHA")]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0, env = "RANKFUSE_SEED")]
    seed: u64,
    /// Shift Y's columns to zero mean before validating.
    #[arg(long, env = "RANKFUSE_CENTER")]
    center: bool,
}

#[derive(Debug, Args)]
struct PairScoreArgs {
    base: PathBuf,
    /// Candidate modalities to rank.
    #[arg(required = true)]
    candidates: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.10, env = "RANKFUSE_RATIO")]
    ratio: f64,
    #[arg(long, value_enum, default_value_t = AlphaModeArg::Optimize, env = "RANKFUSE_ALPHA_MODE")]
    alpha_mode: AlphaModeArg,
    #[arg(long, default_value_t = 0.5, env = "RANKFUSE_ALPHA")]
    alpha: f64,
    #[arg(long, default_value_t = 0, env = "RANKFUSE_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 200, env = "RANKFUSE_OPT_ITERS")]
    opt_iters: usize,
    #[arg(long, env = "RANKFUSE_JSON")]
    json: bool,
}

#[derive(Debug, Args)]
struct NoiseSweepArgs {
    a: PathBuf,
    b: PathBuf,
    /// Which modality receives the noise.
    #[arg(long, value_enum, env = "RANKFUSE_TARGET")]
    target: TargetArg,
    /// Comma-separated noise standard deviations.
    #[arg(long, value_delimiter = ',', required = true, env = "RANKFUSE_SIGMAS")]
    sigmas: Vec<f64>,
    #[arg(long, default_value_t = 0.10, env = "RANKFUSE_RATIO")]
    ratio: f64,
    #[arg(long, default_value_t = 0, env = "RANKFUSE_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 200, env = "RANKFUSE_OPT_ITERS")]
    opt_iters: usize,
    #[arg(long, env = "RANKFUSE_JSON")]
    json: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, env = "RANKFUSE_ROWS")]
    rows: usize,
    #[arg(long, env = "RANKFUSE_COLS")]
    cols: usize,
    #[arg(long, default_value_t = 3, env = "RANKFUSE_K")]
    k: usize,
    /// Alignment target for injected channels, in [0, 1).
    #[arg(long, default_value_t = 0.2, env = "RANKFUSE_GAMMA")]
    gamma: f64,
    /// Column-norm cap for the injected modality.
    #[arg(long, default_value_t = 1.0, env = "RANKFUSE_BETA")]
    beta: f64,
    #[arg(long, default_value_t = 0, env = "RANKFUSE_SEED")]
    seed: u64,
    /// Comma-separated singular values (whole spectrum for a single matrix,
    /// informative core for a pair).
    #[arg(long, value_delimiter = ',', env = "RANKFUSE_SPECTRUM")]
    spectrum: Option<Vec<f64>>,
    /// Planted low channels per side for pair generation.
    #[arg(long, env = "RANKFUSE_LOW_COUNT")]
    low_count: Option<usize>,
    /// Generate a complementary pair instead of a single matrix.
    #[arg(long, env = "RANKFUSE_PAIR")]
    pair: bool,
    /// Output file for a single matrix.
    #[arg(long, env = "RANKFUSE_OUT")]
    out: Option<PathBuf>,
    /// Output prefix for a pair: <prefix>_a.<ext>, <prefix>_b.<ext>.
    #[arg(long, env = "RANKFUSE_OUT_PREFIX")]
    out_prefix: Option<PathBuf>,
    /// csv (default) or raw-f64.
    #[arg(long, default_value = "csv", env = "RANKFUSE_FORMAT")]
    format: String,
}

/// Exit code for an error, per the documented contract.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ZeroMatrix | Error::NonFinite { .. } => 3,
        Error::DimensionMismatch { .. } => 4,
        Error::InfeasibleConstruction(_) => 5,
        Error::Parse { .. }
        | Error::Io(_)
        | Error::InvalidArgument(_)
        | Error::InvalidAlpha { .. }
        | Error::InvalidSpectrum(_)
        | Error::IndexOutOfRange { .. } => 2,
    }
}

impl Cli {
    /// Runs the parsed command, returning the process exit code.
    pub fn run(self) -> Result<i32> {
        match self.command {
            Command::Erank(args) => cmd_erank(args),
            Command::Spectrum(args) => cmd_spectrum(args),
            Command::Fuse(args) => cmd_fuse(args),
            Command::Validate(args) => cmd_validate(args),
            Command::PairScore(args) => cmd_pair_score(args),
            Command::NoiseSweep(args) => cmd_noise_sweep(args),
            Command::Gen(args) => cmd_gen(args),
        }
    }
}

fn read_input(path: &Path, batch_rows: Option<usize>) -> Result<FeatureMatrix> {
    let m = read_matrix(path)?;
    if let Some(batch) = batch_rows {
        if batch == 0 || m.rows() % batch != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} rows do not form whole batches of {batch}",
                m.rows()
            )));
        }
    }
    Ok(m)
}

fn validate_ratio(ratio: f64) -> Result<()> {
    if ratio <= 0.0 || ratio > 1.0 || ratio.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "ratio must lie in (0, 1], got {ratio}"
        )));
    }
    Ok(())
}

fn low_set_by_ratio(m: &FeatureMatrix, ratio: f64) -> Result<LowChannelSet> {
    let profile = channel_importance(m, None)?;
    let count = low_count_for_ratio(m.cols(), ratio);
    select_low_channels(&profile, SelectionMode::BottomCount(count))
}

fn print_stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).expect("stdout");
}

fn cmd_erank(args: ErankArgs) -> Result<i32> {
    let m = read_input(&args.input, args.batch_rows)?;
    let dec = decompose(&m)?;
    let spectrum = spectrum_of(&dec);
    if args.json {
        let value = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "kind": "erank",
            "effective_rank": spectrum.effective_rank(),
            "entropy": spectrum.entropy(),
            "numerical_rank": dec.numerical_rank(),
            "spectrum": dec.singular_values()[..dec.numerical_rank()]
                .iter()
                .zip(spectrum.probabilities())
                .enumerate()
                .map(|(i, (sigma, p))| serde_json::json!({
                    "index": i + 1,
                    "sigma": sigma,
                    "p": p,
                }))
                .collect::<Vec<_>>(),
        });
        print_stdout(&format!("{}\n", serde_json::to_string_pretty(&value).expect("json")));
    } else {
        let mut text = String::new();
        text.push_str(&format!("effective_rank: {}\n", spectrum.effective_rank()));
        text.push_str(&format!("entropy: {}\n", spectrum.entropy()));
        text.push_str(&format!("numerical_rank: {}\n", dec.numerical_rank()));
        text.push_str(&spectrum_csv(&dec, &spectrum));
        print_stdout(&text);
    }
    Ok(0)
}

fn spectrum_csv(
    dec: &crate::spectral::SpectralDecomposition,
    spectrum: &crate::spectral::Spectrum,
) -> String {
    let mut text = String::from("index,sigma,p\n");
    for (i, (sigma, p)) in dec.singular_values()[..dec.numerical_rank()]
        .iter()
        .zip(spectrum.probabilities())
        .enumerate()
    {
        text.push_str(&format!("{},{},{}\n", i + 1, sigma, p));
    }
    text
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<i32> {
    let m = read_input(&args.input, args.batch_rows)?;
    let dec = decompose(&m)?;
    let spectrum = spectrum_of(&dec);
    if args.json {
        let rows: Vec<serde_json::Value> = dec.singular_values()[..dec.numerical_rank()]
            .iter()
            .zip(spectrum.probabilities())
            .enumerate()
            .map(|(i, (sigma, p))| serde_json::json!({"index": i + 1, "sigma": sigma, "p": p}))
            .collect();
        print_stdout(&format!(
            "{}\n",
            serde_json::to_string_pretty(&rows).expect("json")
        ));
    } else {
        print_stdout(&spectrum_csv(&dec, &spectrum));
    }
    Ok(0)
}

struct DirectionOutcome {
    result: FusionResult,
    alphas: Vec<f64>,
    low: LowChannelSet,
    warning: Option<String>,
}

#[derive(Clone, Copy)]
struct DirectionConfig {
    ratio: f64,
    mode: AlphaModeArg,
    alpha: f64,
    convention: AlphaConvention,
    seed: u64,
    opt_iters: usize,
}

fn fuse_direction(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    config: DirectionConfig,
) -> Result<DirectionOutcome> {
    let low = low_set_by_ratio(x, config.ratio)?;
    let (spec, warning) = match config.mode {
        AlphaModeArg::Fixed => (BlendSpec::uniform(low.clone(), config.alpha)?, None),
        AlphaModeArg::Optimize => {
            let optimizer = OptimizerConfig {
                seed: config.seed,
                iterations: config.opt_iters,
                ..OptimizerConfig::default()
            };
            let BlendOptimization { spec, warning, .. } = optimize_blend(x, y, &low, &optimizer)?;
            (spec, warning)
        }
    };
    let result = blend_with_convention(x, y, &spec, config.convention)?;
    Ok(DirectionOutcome {
        result,
        alphas: spec.coefficients(),
        low,
        warning,
    })
}

fn cmd_fuse(args: FuseArgs) -> Result<i32> {
    validate_ratio(args.ratio)?;
    let a = read_input(&args.a, None)?;
    let b = read_input(&args.b, None)?;
    a.same_dims(&b)?;

    let direction = DirectionConfig {
        ratio: args.ratio,
        mode: args.alpha_mode,
        alpha: args.alpha,
        convention: args.alpha_convention.into(),
        seed: args.seed,
        opt_iters: args.opt_iters,
    };
    let out_a = fuse_direction(&a, &b, direction)?;
    let out_b = fuse_direction(
        &b,
        &a,
        DirectionConfig {
            seed: args.seed.wrapping_add(1),
            ..direction
        },
    )?;

    let format = match &args.format {
        Some(name) => name.parse::<MatrixFormat>()?,
        None => MatrixFormat::from_path(&args.a),
    };
    let ext = format.extension();
    let prefix = args.out_prefix.as_os_str().to_string_lossy();
    let path_a = PathBuf::from(format!("{prefix}_a_fused.{ext}"));
    let path_b = PathBuf::from(format!("{prefix}_b_fused.{ext}"));
    let path_report = PathBuf::from(format!("{prefix}_report.json"));
    write_matrix(&path_a, &out_a.result.fused, format)?;
    write_matrix(&path_b, &out_b.result.fused, format)?;

    let report = FusionReportFile {
        erank_a_before: out_a.result.erank_before,
        erank_a_after: out_a.result.erank_after,
        erank_b_before: out_b.result.erank_before,
        erank_b_after: out_b.result.erank_after,
        delta_a: out_a.result.erank_gain,
        delta_b: out_b.result.erank_gain,
        harmonic_mean: harmonic_mean_gain(out_a.result.erank_gain, out_b.result.erank_gain),
        low_channels_a: out_a.low.indices().to_vec(),
        low_channels_b: out_b.low.indices().to_vec(),
        alphas_a: out_a.alphas,
        alphas_b: out_b.alphas,
        optimizer_warning_a: out_a.warning,
        optimizer_warning_b: out_b.warning,
        ..FusionReportFile::new()
    };
    let json = to_json(&report);
    std::fs::write(&path_report, format!("{json}\n"))?;

    if args.json {
        print_stdout(&format!("{json}\n"));
    } else {
        print_stdout(&format!(
            "delta_a: {}\ndelta_b: {}\nharmonic_mean: {}\nwrote {}, {}, {}\n",
            report.delta_a,
            report.delta_b,
            report.harmonic_mean,
            path_a.display(),
            path_b.display(),
            path_report.display()
        ));
    }
    Ok(0)
}

fn cmd_validate(args: ValidateArgs) -> Result<i32> {
    validate_ratio(args.ratio)?;
    let x = read_input(&args.x, None)?;
    let mut y = read_input(&args.y, None)?;
    x.same_dims(&y)?;
    if args.center {
        y = y.centered_columns();
    }
    if let Some(alpha) = args.alpha {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
    }

    let low = low_set_by_ratio(&x, args.ratio)?;
    let spec = match args.alpha {
        Some(alpha) => BlendSpec::uniform(low.clone(), alpha)?,
        None => BlendSpec::random_uniform(low.clone(), args.seed),
    };
    let k = match args.k {
        Some(k) => k,
        None => default_validation_k(&decompose(&x)?),
    };
    let report = validate_theorem(&x, &y, &low, &spec, k)?;
    print_stdout(&format!("{}\n", to_json(&TheoremReportFile::new(&report))));
    Ok(if report.conclusion_ok { 0 } else { 1 })
}

fn cmd_pair_score(args: PairScoreArgs) -> Result<i32> {
    validate_ratio(args.ratio)?;
    let base = read_input(&args.base, None)?;

    struct Scored {
        index: usize,
        row: PairScoreRow,
    }

    let outcomes: Vec<std::result::Result<Scored, (PathBuf, Error)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .candidates
            .iter()
            .enumerate()
            .map(|(index, path)| {
                let base = &base;
                let direction = DirectionConfig {
                    ratio: args.ratio,
                    mode: args.alpha_mode,
                    alpha: args.alpha,
                    convention: AlphaConvention::OwnChannel,
                    seed: args.seed,
                    opt_iters: args.opt_iters,
                };
                scope.spawn(move || {
                    let run = || -> Result<PairScoreRow> {
                        let candidate = read_input(path, None)?;
                        base.same_dims(&candidate)?;
                        let fwd = fuse_direction(base, &candidate, direction)?;
                        let rev = fuse_direction(
                            &candidate,
                            base,
                            DirectionConfig {
                                seed: direction.seed.wrapping_add(1),
                                ..direction
                            },
                        )?;
                        Ok(PairScoreRow {
                            candidate: path.display().to_string(),
                            delta_base: fwd.result.erank_gain,
                            delta_candidate: rev.result.erank_gain,
                            harmonic_mean: harmonic_mean_gain(
                                fwd.result.erank_gain,
                                rev.result.erank_gain,
                            ),
                        })
                    };
                    run()
                        .map(|row| Scored { index, row })
                        .map_err(|e| (path.clone(), e))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scoring thread")).collect()
    });

    let mut rows: Vec<Scored> = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(scored) => rows.push(scored),
            Err((path, err)) => {
                eprintln!("warning: skipping {}: {err}", path.display());
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", base.rows(), base.cols()),
            got: "no usable candidate".into(),
        });
    }
    // Harmonic mean descending; ties keep the input order.
    rows.sort_by(|a, b| {
        b.row
            .harmonic_mean
            .partial_cmp(&a.row.harmonic_mean)
            .expect("finite")
            .then(a.index.cmp(&b.index))
    });

    if args.json {
        let rows: Vec<&PairScoreRow> = rows.iter().map(|s| &s.row).collect();
        print_stdout(&format!("{}\n", to_json(&rows)));
    } else {
        let mut text = String::from("candidate,delta_base,delta_candidate,harmonic_mean\n");
        for scored in &rows {
            text.push_str(&format!(
                "{},{},{},{}\n",
                scored.row.candidate,
                scored.row.delta_base,
                scored.row.delta_candidate,
                scored.row.harmonic_mean
            ));
        }
        print_stdout(&text);
    }
    Ok(0)
}

fn cmd_noise_sweep(args: NoiseSweepArgs) -> Result<i32> {
    validate_ratio(args.ratio)?;
    if let Some(bad) = args.sigmas.iter().find(|s| **s < 0.0 || !s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sigmas must be nonnegative and finite, got {bad}"
        )));
    }
    let a = read_input(&args.a, None)?;
    let b = read_input(&args.b, None)?;
    a.same_dims(&b)?;

    let rows: Vec<Result<NoiseSweepRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .sigmas
            .iter()
            .map(|&sigma| {
                let a = &a;
                let b = &b;
                let target = args.target;
                let seed = args.seed;
                let direction = DirectionConfig {
                    ratio: args.ratio,
                    mode: AlphaModeArg::Optimize,
                    alpha: 0.5,
                    convention: AlphaConvention::OwnChannel,
                    seed,
                    opt_iters: args.opt_iters,
                };
                scope.spawn(move || -> Result<NoiseSweepRow> {
                    let (clean, noisy) = match target {
                        TargetArg::A => (b.clone(), perturb_noise(a, sigma, seed)?),
                        TargetArg::B => (a.clone(), perturb_noise(b, sigma, seed)?),
                    };
                    // The clean modality receives the perturbed channels and
                    // vice versa; both directions re-optimize their blend.
                    let clean_side = fuse_direction(&clean, &noisy, direction)?;
                    let noisy_side = fuse_direction(
                        &noisy,
                        &clean,
                        DirectionConfig {
                            seed: seed.wrapping_add(1),
                            ..direction
                        },
                    )?;
                    Ok(NoiseSweepRow {
                        sigma,
                        delta_clean: clean_side.result.erank_gain,
                        delta_noisy: noisy_side.result.erank_gain,
                        harmonic_mean: harmonic_mean_gain(
                            clean_side.result.erank_gain,
                            noisy_side.result.erank_gain,
                        ),
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep thread")).collect()
    });

    let mut table = Vec::with_capacity(rows.len());
    for row in rows {
        table.push(row?);
    }
    if args.json {
        print_stdout(&format!("{}\n", to_json(&table)));
    } else {
        let mut text = String::from("sigma,delta_clean,delta_noisy,harmonic_mean\n");
        for row in &table {
            text.push_str(&format!(
                "{},{},{},{}\n",
                row.sigma, row.delta_clean, row.delta_noisy, row.harmonic_mean
            ));
        }
        print_stdout(&text);
    }
    Ok(0)
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let format: MatrixFormat = args.format.parse()?;
    let config = GeneratorConfig {
        rows: args.rows,
        cols: args.cols,
        singular_values: args.spectrum.clone(),
        gamma_target: args.gamma,
        beta: args.beta,
        k: args.k,
        low_count: args.low_count,
        seed: args.seed,
    };
    if args.pair {
        let prefix = args.out_prefix.as_ref().ok_or_else(|| {
            Error::InvalidArgument("--pair requires --out-prefix".into())
        })?;
        let (x, y) = gen_complementary_pair(&config)?;
        let prefix = prefix.as_os_str().to_string_lossy();
        let ext = format.extension();
        let path_a = PathBuf::from(format!("{prefix}_a.{ext}"));
        let path_b = PathBuf::from(format!("{prefix}_b.{ext}"));
        write_matrix(&path_a, &x, format)?;
        write_matrix(&path_b, &y, format)?;
        print_stdout(&format!("wrote {} and {}\n", path_a.display(), path_b.display()));
    } else {
        let out = args.out.as_ref().ok_or_else(|| {
            Error::InvalidArgument("single-matrix generation requires --out".into())
        })?;
        let x = gen_spectrum_matrix(&config)?;
        write_matrix(out, &x, format)?;
        print_stdout(&format!("wrote {}\n", out.display()));
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(exit_code(&Error::ZeroMatrix), 3);
        assert_eq!(exit_code(&Error::NonFinite { row: 0, col: 0 }), 3);
        assert_eq!(
            exit_code(&Error::DimensionMismatch {
                expected: "2x2".into(),
                got: "3x2".into()
            }),
            4
        );
        assert_eq!(
            exit_code(&Error::InfeasibleConstruction("x".into())),
            5
        );
        assert_eq!(
            exit_code(&Error::Parse {
                line: 1,
                column: 1,
                message: "x".into()
            }),
            2
        );
        assert_eq!(exit_code(&Error::InvalidArgument("x".into())), 2);
    }

    #[test]
    fn cli_parses_all_subcommands() {
        Cli::try_parse_from(["rankfuse", "erank", "m.csv"]).unwrap();
        Cli::try_parse_from(["rankfuse", "spectrum", "m.csv", "--json"]).unwrap();
        Cli::try_parse_from([
            "rankfuse", "fuse", "a.csv", "b.csv", "--out-prefix", "out", "--ratio", "0.2",
        ])
        .unwrap();
        Cli::try_parse_from(["rankfuse", "validate", "x.csv", "y.csv", "--k", "3"]).unwrap();
        Cli::try_parse_from(["rankfuse", "pair-score", "base.csv", "c1.csv", "c2.csv"]).unwrap();
        Cli::try_parse_from([
            "rankfuse",
            "noise-sweep",
            "a.csv",
            "b.csv",
            "--target",
            "b",
            "--sigmas",
            "0,0.1,0.3",
        ])
        .unwrap();
        Cli::try_parse_from([
            "rankfuse", "gen", "--rows", "8", "--cols", "4", "--spectrum", "3,1", "--out", "m.csv",
        ])
        .unwrap();
    }
}
