//! Wall-clock comparison of the per-cell recurrence against the compiled
//! kernel path.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compiler::{build_cache, compile_kernel_stack};
use crate::conv::{apply_layer_recurrent, ImageTensor, SsmLayer};
use crate::error::{Error, Result};
use crate::parameters::{init_raw, LayerConfig, LayerParams};

/// Medians in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub rows: usize,
    pub cols: usize,
    pub n_state: usize,
    pub n_ssm: usize,
    pub channels: usize,
    pub batch: usize,
    pub reps: usize,
    /// Cell-by-cell recurrence over all channels and directions of one
    /// sample.
    pub scan: f64,
    pub cache_build: f64,
    /// Kernel stack compilation plus kernel transforms.
    pub compile: f64,
    /// Layer forward over the whole batch.
    pub forward: f64,
}

impl BenchResult {
    /// `scan * batch / (compile + forward)`.
    pub fn ratio(&self) -> f64 {
        self.scan * self.batch as f64 / (self.compile + self.forward)
    }
}

impl fmt::Display for BenchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = format!("{}x{}", self.rows, self.cols);
        writeln!(f, "size: {tag}")?;
        writeln!(f, "{tag}.n: {}", self.n_state)?;
        writeln!(f, "{tag}.n_ssm: {}", self.n_ssm)?;
        writeln!(f, "{tag}.channels: {}", self.channels)?;
        writeln!(f, "{tag}.batch: {}", self.batch)?;
        writeln!(f, "{tag}.reps: {}", self.reps)?;
        writeln!(f, "{tag}.scan_per_sample_s: {:.6e}", self.scan)?;
        writeln!(f, "{tag}.cache_build_s: {:.6e}", self.cache_build)?;
        writeln!(f, "{tag}.compile_s: {:.6e}", self.compile)?;
        writeln!(f, "{tag}.forward_s: {:.6e}", self.forward)?;
        write!(f, "{tag}.ratio: {:.3}", self.ratio())
    }
}

pub fn median(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

fn time<T>(f: impl FnOnce() -> Result<T>) -> Result<(f64, T)> {
    let start = Instant::now();
    let out = f()?;
    Ok((start.elapsed().as_secs_f64(), out))
}

/// Times every phase `reps` times on random parameters and inputs drawn
/// from `seed`. `cfg.channels` must be a multiple of `cfg.n_ssm`.
pub fn run_bench(cfg: &LayerConfig, batch: usize, reps: usize, seed: u64) -> Result<BenchResult> {
    if reps == 0 {
        return Err(Error::invalid("reps", "must be at least 1"));
    }
    if batch == 0 {
        return Err(Error::invalid("batch", "must be at least 1"));
    }
    if cfg.rows < 2 || cfg.cols < 2 {
        return Err(Error::invalid(
            "sizes",
            format!("{}x{} is below the 2x2 minimum", cfg.rows, cfg.cols),
        ));
    }
    cfg.validate()?;
    let params: LayerParams = init_raw(seed, cfg).constrain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let x = ImageTensor::from_fn(batch, cfg.rows, cfg.cols, cfg.channels, |_, _, _, _| {
        rng.random_range(-1.0..1.0)
    });

    let first = x.sample(0);

    let mut scan = Vec::with_capacity(reps);
    let mut cache_build = Vec::with_capacity(reps);
    let mut compile = Vec::with_capacity(reps);
    let mut forward = Vec::with_capacity(reps);
    for _ in 0..reps {
        let (t, y) = time(|| apply_layer_recurrent(&first, &params, cfg))?;
        std::hint::black_box(y);
        scan.push(t);

        let (t, cache) = time(|| build_cache(cfg.rows, cfg.cols, cfg.mode))?;
        cache_build.push(t);

        let (t, layer) = time(|| {
            let stack = compile_kernel_stack(&params, cfg, &cache)?;
            SsmLayer::with_kernels(cfg.clone(), params.clone(), stack)
        })?;
        compile.push(t);

        let (t, y) = time(|| layer.forward(&x))?;
        std::hint::black_box(y);
        forward.push(t);
    }
    Ok(BenchResult {
        rows: cfg.rows,
        cols: cfg.cols,
        n_state: cfg.n_state,
        n_ssm: cfg.n_ssm,
        channels: cfg.channels,
        batch,
        reps,
        scan: median(scan),
        cache_build: median(cache_build),
        compile: median(compile),
        forward: median(forward),
    })
}
