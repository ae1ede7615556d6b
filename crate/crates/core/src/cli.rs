//! Command-line front end. Reports are `key: value` lines on stdout.
//!
//! Exit codes: 0 success, 1 a verified property failed, 2 bad arguments or
//! config, 3 I/O failure, 4 shape or group mismatch.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bench::run_bench;
use crate::compiler::{build_cache, compile_kernel, Flip, Kernel2D};
use crate::conv::apply_layer;
use crate::error::Error;
use crate::formats::{
    kernel_bin, kernel_csv, kernel_pgm, parse_params, parse_size, read_tensor, write_tensor,
    ParamFile,
};
use crate::parameters::{LayerConfig, LayerParams, Mode, ScalarField};
use crate::s4nd::{
    kernel_1d, numerical_rank, outer_kernel, singular_values, Ssm1dParams, DEFAULT_RANK_TOL,
};
use crate::verify::run_verification;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SHAPE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "ssm2d",
    version,
    about = "Two-dimensional state-space layer toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a kernel from a parameter config and export it.
    Kernel(KernelArgs),
    /// Run the property checks.
    Verify(VerifyArgs),
    /// Time the recurrence against the compiled path.
    Bench(BenchArgs),
    /// Apply the layer to a tensor file.
    Apply(ApplyArgs),
    /// Print singular values and numerical rank of a kernel.
    Rank(RankArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelFormat {
    Csv,
    Pgm,
    Bin,
}

impl KernelFormat {
    pub fn name(self) -> &'static str {
        match self {
            KernelFormat::Csv => "csv",
            KernelFormat::Pgm => "pgm",
            KernelFormat::Bin => "bin",
        }
    }
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Grid size as ROWSxCOLS.
    #[arg(long)]
    pub size: String,
    /// Overrides the mode in the config.
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: KernelFormat,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub group: usize,
    #[arg(long, default_value_t = 0)]
    pub direction: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 12)]
    pub max_size: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated ROWSxCOLS list.
    #[arg(long, default_value = "32x32")]
    pub sizes: String,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub n_ssm: usize,
    /// Channels H.
    #[arg(long, default_value_t = 64)]
    pub channels: usize,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "real")]
    pub field: ScalarField,
    #[arg(long, default_value = "normalized-relaxed")]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long, conflicts_with = "s4nd", required_unless_present = "s4nd")]
    pub config: Option<PathBuf>,
    /// Use a random separable kernel instead of a config.
    #[arg(long)]
    pub s4nd: bool,
    /// ROWSxCOLS, or a single L for LxL.
    #[arg(long)]
    pub size: String,
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// State size of the random separable factors.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value = "real")]
    pub field: ScalarField,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub group: usize,
    #[arg(long, default_value_t = 0)]
    pub direction: usize,
}

/// Failure of one command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Property,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Property => EXIT_PROPERTY,
            CliError::Io { .. } => EXIT_IO,
            CliError::Lib(e) => match e {
                Error::Shape(_) | Error::GroupMismatch { .. } | Error::EmptyGrid { .. } => {
                    EXIT_SHAPE
                }
                _ => EXIT_USAGE,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Property => write!(f, "a verified property failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    String::from_utf8(read_bytes(path)?)
        .map_err(|_| Error::format("config", "not valid UTF-8").into())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_params(path: &Path) -> CliResult<ParamFile> {
    Ok(parse_params(&read_text(path)?)?)
}

/// Kernel of parameter set `(group, direction)`, in that direction's layout.
fn config_kernel(
    file: &ParamFile,
    rows: usize,
    cols: usize,
    mode: Option<Mode>,
    group: usize,
    direction: usize,
) -> CliResult<Kernel2D> {
    let mut cfg = file.layer_config(rows, cols, file.n_ssm);
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if group >= cfg.n_ssm {
        return Err(Error::invalid("group", format!("config has {} groups", cfg.n_ssm)).into());
    }
    if direction >= cfg.directions.count() {
        return Err(Error::invalid(
            "direction",
            format!("config has {} directions", cfg.directions.count()),
        )
        .into());
    }
    let params = LayerParams {
        ssm: file.ssm.clone(),
        skip: vec![0.0; cfg.channels],
    };
    let cache = build_cache(rows, cols, cfg.mode)?;
    let kernel = compile_kernel(
        params.for_direction(&cfg, group, direction),
        &cache,
        cfg.mode,
    )?;
    let (fr, fc) = cfg.directions.flips()[direction];
    Ok(kernel.into_direction(group, direction, Flip { rows: fr, cols: fc }))
}

fn cmd_kernel(a: &KernelArgs) -> CliResult<String> {
    let file = load_params(&a.config)?;
    let (rows, cols) = parse_size(&a.size)?;
    let kernel = config_kernel(&file, rows, cols, a.mode, a.group, a.direction)?;
    let real = kernel.real_part();
    let bytes = match a.format {
        KernelFormat::Csv => kernel_csv(&real).into_bytes(),
        KernelFormat::Pgm => kernel_pgm(&real).into_bytes(),
        KernelFormat::Bin => kernel_bin(&real),
    };
    write_bytes(&a.out, &bytes)?;
    let mut r = String::new();
    let _ = writeln!(r, "command: kernel");
    let _ = writeln!(r, "size: {rows}x{cols}");
    let _ = writeln!(r, "mode: {}", a.mode.unwrap_or(file.mode));
    let _ = writeln!(r, "format: {}", a.format.name());
    let _ = writeln!(r, "max_abs: {:e}", real.max_abs());
    let _ = writeln!(r, "out: {}", a.out.display());
    Ok(r)
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<(String, bool)> {
    let report = run_verification(a.seed, a.max_size, a.trials)?;
    Ok((report.to_string(), report.passed()))
}

fn cmd_bench(a: &BenchArgs) -> CliResult<String> {
    let sizes = a
        .sizes
        .split(',')
        .map(parse_size)
        .collect::<crate::Result<Vec<_>>>()?;
    let mut r = String::new();
    let _ = writeln!(r, "command: bench");
    let _ = writeln!(r, "seed: {}", a.seed);
    let _ = writeln!(r, "field: {}", a.field);
    let _ = writeln!(r, "mode: {}", a.mode);
    for (rows, cols) in sizes {
        let mut cfg = LayerConfig::new(rows, cols, a.channels, a.n, a.n_ssm);
        cfg.field = a.field;
        cfg.mode = a.mode;
        let result = run_bench(&cfg, a.batch, a.reps, a.seed)?;
        let _ = writeln!(r, "{result}");
    }
    Ok(r)
}

fn cmd_apply(a: &ApplyArgs) -> CliResult<String> {
    let file = load_params(&a.config)?;
    let x = read_tensor(&read_bytes(&a.input)?)?;
    let cfg = file.layer_config(x.rows, x.cols, x.channels);
    let params = file.layer_params(x.channels)?;
    let y = apply_layer(&x, &params, &cfg)?;
    write_bytes(&a.out, &write_tensor(&y))?;
    let mut r = String::new();
    let _ = writeln!(r, "command: apply");
    let _ = writeln!(r, "shape: {}x{}x{}x{}", y.batch, y.rows, y.cols, y.channels);
    let _ = writeln!(r, "mode: {}", cfg.mode);
    let _ = writeln!(r, "out: {}", a.out.display());
    Ok(r)
}

fn parse_rank_size(s: &str) -> crate::Result<(usize, usize)> {
    match s.trim().parse::<usize>() {
        Ok(l) if l > 0 => Ok((l, l)),
        _ => parse_size(s),
    }
}

fn cmd_rank(a: &RankArgs) -> CliResult<String> {
    let (rows, cols) = parse_rank_size(&a.size)?;
    let (source, kernel) = match &a.config {
        Some(path) => {
            let file = load_params(path)?;
            let k = config_kernel(&file, rows, cols, a.mode, a.group, a.direction)?;
            ("config", k)
        }
        None => {
            if a.n == 0 {
                return Err(Error::invalid("n", "state dimension must be positive").into());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let k1 = kernel_1d(&Ssm1dParams::random(&mut rng, a.field, a.n), rows)?;
            let k2 = kernel_1d(&Ssm1dParams::random(&mut rng, a.field, a.n), cols)?;
            ("s4nd", outer_kernel(&k1, &k2)?)
        }
    };
    let s = singular_values(&kernel)?;
    let rank = numerical_rank(&kernel, a.tol)?;
    let mut r = String::new();
    let _ = writeln!(r, "command: rank");
    let _ = writeln!(r, "source: {source}");
    if source == "s4nd" {
        let _ = writeln!(r, "seed: {}", a.seed);
    }
    let _ = writeln!(r, "size: {rows}x{cols}");
    let listed: Vec<String> = s.iter().map(|v| format!("{v:e}")).collect();
    let _ = writeln!(r, "singular_values: {}", listed.join(", "));
    let ratio = match s.as_slice() {
        [first, second, ..] if *first > 0.0 => second / first,
        _ => 0.0,
    };
    let _ = writeln!(r, "sigma2_over_sigma1: {ratio:e}");
    let _ = writeln!(r, "tolerance: {:e}", a.tol);
    let _ = writeln!(r, "rank: {rank}");
    Ok(r)
}

/// Parses `args` (program name first), runs the command, writes the report
/// to `out` and diagnostics to `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Kernel(a) => cmd_kernel(a).map(|r| (r, true)),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a).map(|r| (r, true)),
        Command::Apply(a) => cmd_apply(a).map(|r| (r, true)),
        Command::Rank(a) => cmd_rank(a).map(|r| (r, true)),
    }
    .and_then(|(report, passed)| {
        let _ = out.write_all(report.as_bytes());
        if passed {
            Ok(())
        } else {
            Err(CliError::Property)
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
