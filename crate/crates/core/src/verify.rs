//! Property checks run by `ssm2d verify` and the acceptance suite.
//!
//! Every check draws from its own ChaCha stream, so a report is a pure
//! function of its arguments.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compiler::{
    build_cache, compile_kernel, compile_states, kernel_gradient, Flip, Kernel2D,
};
use crate::conv::{conv2d_direct, conv2d_fft, ImageTensor, SsmLayer};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::parameters::{
    constrain, init_raw, Directions, LayerConfig, Mode, RawSsm, ScalarField, Slot, SsmParams,
};
use crate::recurrence::impulse_response;
use crate::s4nd::{
    kernel_1d, numerical_rank, outer_kernel, singular_values, Ssm1dParams, DEFAULT_RANK_TOL,
};

pub const EQUIVALENCE_TOL: f64 = 1e-10;
pub const FFT_TOL: f64 = 1e-8;
pub const GRADIENT_TOL: f64 = 1e-4;
pub const GRADIENT_STEP: f64 = 1e-6;
pub const SEPARABLE_TOL: f64 = 1e-12;
pub const LAYER_TOL: f64 = 1e-12;

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub trials: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    fn from_error(name: &'static str, trials: usize, max_error: f64, tolerance: f64) -> Self {
        Check {
            name,
            trials,
            max_error,
            tolerance,
            passed: max_error <= tolerance,
            note: String::new(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} (trials {}, max error {:e}, tolerance {:e})",
            self.name,
            if self.passed { "pass" } else { "FAIL" },
            self.trials,
            self.max_error,
            self.tolerance
        )?;
        if !self.note.is_empty() {
            write!(f, " {}", self.note)?;
        }
        Ok(())
    }
}

/// Checks run by [`run_verification`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub max_size: usize,
    pub trials: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command: verify")?;
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "max_size: {}", self.max_size)?;
        writeln!(f, "trials: {}", self.trials)?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        writeln!(f, "passed: {passed}")?;
        writeln!(f, "failed: {}", self.checks.len() - passed)?;
        let worst = self.checks.iter().map(|c| c.max_error).fold(0.0, f64::max);
        writeln!(f, "max_error: {worst:e}")
    }
}

/// Stream `k` of the generator seeded with `seed`.
pub fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// Parameters of the binomial construction: `A1 = A2 = A3 = 1`, `A4 = 0`,
/// `B = (1, 0)`, `C = (1, 0)`, scalar state.
pub fn pascal_params() -> SsmParams {
    SsmParams::real([[1.0], [1.0], [1.0], [0.0], [1.0], [0.0], [1.0], [0.0]])
        .expect("finite values")
}

/// The binomial construction yields `K[i,j] = C(i, j)` exactly, with full
/// numerical rank, on every size in `sizes`.
pub fn pascal(sizes: impl IntoIterator<Item = usize>) -> Result<Check> {
    let p = pascal_params();
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    let mut rank_ok = true;
    let mut ranks = Vec::new();
    for l in sizes {
        let cache = build_cache(l, l, Mode::Unnormalized)?;
        let k = compile_kernel(&p, &cache, Mode::Unnormalized)?;
        let real = k.real_part();
        for i in 0..l {
            for j in 0..l {
                worst = worst.max((real[(i, j)] - binomial(i, j)).abs());
            }
        }
        let rank = numerical_rank(&k, DEFAULT_RANK_TOL)?;
        rank_ok &= rank == l;
        ranks.push(format!("{l}:{rank}"));
        trials += 1;
    }
    let mut check = Check::from_error("pascal", trials, worst, 0.0)
        .with_note(format!("ranks [{}]", ranks.join(" ")));
    check.passed &= rank_ok;
    Ok(check)
}

fn max_complex_diff(a: &Grid<Complex64>, b: &Grid<Complex64>) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

const FIELDS: [ScalarField; 2] = [ScalarField::Real, ScalarField::Complex];

/// Compiled kernel against the recurrence impulse response, cycling through
/// every field, mode and size. The error is absolute.
pub fn equivalence<R: Rng>(rng: &mut R, draws: usize, sizes: &[(usize, usize)]) -> Result<Check> {
    let mut combos = Vec::new();
    for &size in sizes {
        for mode in Mode::ALL {
            combos.push((size, mode, build_cache(size.0, size.1, mode)?));
        }
    }
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for t in 0..draws {
        let ((rows, cols), mode, cache) = &combos[t % combos.len()];
        let field = FIELDS[(t / combos.len()) % 2];
        let n = rng.random_range(1..=4);
        let p = constrain(&RawSsm::random(rng, field, n));
        let compiled = compile_kernel(&p, cache, *mode)?;
        let oracle = impulse_response(&p, *rows, *cols, *mode)?;
        worst = worst.max(max_complex_diff(compiled.values(), oracle.values()));
        scale = scale.max(oracle.real_part().max_abs());
    }
    Ok(
        Check::from_error("equivalence", draws, worst, EQUIVALENCE_TOL)
            .with_note(format!("largest |K| {scale:.3e}")),
    )
}

fn random_grid<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Grid<f64> {
    Grid::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// FFT convolution against the direct sum, relative to the largest direct
/// output, over random sizes up to `max_size` and every flip.
pub fn fft_vs_direct<R: Rng>(rng: &mut R, trials: usize, max_size: usize) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let rows = rng.random_range(1..=max_size);
        let cols = rng.random_range(1..=max_size);
        let u = random_grid(rng, rows, cols);
        let k = Kernel2D::new(Grid::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }))
        .into_direction(
            0,
            0,
            Flip {
                rows: t % 2 == 1,
                cols: t % 4 >= 2,
            },
        );
        let direct = conv2d_direct(&u, &k)?;
        let fast = conv2d_fft(&u, &k)?;
        let scale = direct.max_abs();
        if scale > 0.0 {
            worst = worst.max(fast.max_abs_diff(&direct) / scale);
        }
    }
    Ok(Check::from_error("fft", trials, worst, FFT_TOL))
}

/// Analytic raw-parameter partials against central differences on a
/// `size x size` grid, cycling through fields and modes. Per draw the error
/// is `max |analytic - fd| / max |fd|` over all parameters and cells.
pub fn gradients<R: Rng>(rng: &mut R, draws: usize, size: usize) -> Result<Check> {
    let caches = Mode::ALL
        .iter()
        .map(|&m| build_cache(size, size, m))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for t in 0..draws {
        let mode = Mode::ALL[t % 3];
        let cache = &caches[t % 3];
        let field = FIELDS[(t / 3) % 2];
        let n = rng.random_range(1..=2);
        let raw = RawSsm::random(rng, field, n);
        let grad = kernel_gradient(&raw, cache, mode)?;
        let flat = raw.to_flat();
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for idx in 0..flat.len() {
            let eval = |delta: f64| -> Result<Grid<f64>> {
                let mut shifted = flat.clone();
                shifted[idx] += delta;
                let p = constrain(&RawSsm::from_flat(field, n, &shifted)?);
                Ok(compile_kernel(&p, cache, mode)?.real_part())
            };
            let (hi, lo) = (eval(GRADIENT_STEP)?, eval(-GRADIENT_STEP)?);
            for ((h, l), a) in hi.as_slice().iter().zip(lo.as_slice()).zip(grad.flat(idx)) {
                let fd = (h - l) / (2.0 * GRADIENT_STEP);
                err = err.max((a - fd).abs());
                scale = scale.max(fd.abs());
            }
        }
        if scale > 0.0 {
            worst = worst.max(err / scale);
        }
    }
    Ok(Check::from_error("gradients", draws, worst, GRADIENT_TOL))
}

/// In normalized mode with `|B| <= 1`, every state-kernel component stays
/// within `max(|B1|, |B2|)`. Reports the largest excess of a component over
/// its bound, relative to the bound.
pub fn normalization<R: Rng>(rng: &mut R, draws: usize, size: usize) -> Result<Check> {
    let cache = build_cache(size, size, Mode::Normalized)?;
    let mut excess: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    for t in 0..draws {
        let field = FIELDS[t % 2];
        let n = rng.random_range(1..=4);
        let p = constrain(&RawSsm::random(rng, field, n));
        let states = compile_states(&p, &cache)?;
        let bound = p
            .get(Slot::B1)
            .iter()
            .chain(p.get(Slot::B2))
            .map(|b| b.norm())
            .fold(0.0, f64::max);
        if bound == 0.0 {
            continue;
        }
        for i in 0..size {
            for j in 0..size {
                for z in states.kh(i, j).iter().chain(states.kv(i, j)) {
                    ratio = ratio.max(z.norm() / bound);
                    excess = excess.max(z.norm() / bound - 1.0);
                }
            }
        }
    }
    // Rounding may push a component a few ulps past the bound.
    Ok(
        Check::from_error("normalization", draws, excess.max(0.0), 1e-12)
            .with_note(format!("largest |k|/bound {ratio:.6}")),
    )
}

/// Term count `<= 2 * max(i + 1, j + 1)` (hence `<= 2 L_max` for any grid
/// containing the cell) and exponent sum `i + j` for every cell of a
/// `max_size x max_size` cache in every mode. Reports the violation count.
pub fn cache_structure(max_size: usize) -> Result<Check> {
    let mut violations = 0usize;
    let mut largest = 0usize;
    for mode in Mode::ALL {
        let cache = build_cache(max_size, max_size, mode)?;
        for i in 0..max_size {
            for j in 0..max_size {
                let bound = 2 * (i + 1).max(j + 1);
                for list in [cache.horizontal(i, j), cache.vertical(i, j)] {
                    largest = largest.max(list.len());
                    violations += usize::from(list.len() > bound);
                    violations += list.iter().filter(|m| m.degree() as usize != i + j).count();
                }
            }
        }
    }
    Ok(
        Check::from_error("cache_structure", 3, violations as f64, 0.0).with_note(format!(
            "largest cell {largest} terms, bound {}",
            2 * max_size
        )),
    )
}

/// Separable outer kernels of random 1-D SSMs have `sigma2 / sigma1` at
/// rounding level.
pub fn separable_rank<R: Rng>(rng: &mut R, trials: usize, max_size: usize) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut all_rank_one = true;
    for t in 0..trials {
        let rows = rng.random_range(2..=max_size.max(2));
        let cols = rng.random_range(2..=max_size.max(2));
        let field = FIELDS[t % 2];
        let n = rng.random_range(1..=8);
        let k1 = kernel_1d(&Ssm1dParams::random(rng, field, n), rows)?;
        let k2 = kernel_1d(&Ssm1dParams::random(rng, field, n), cols)?;
        let k = outer_kernel(&k1, &k2)?;
        let s = singular_values(&k)?;
        if s[0] > 0.0 {
            worst = worst.max(s[1] / s[0]);
        }
        all_rank_one &= numerical_rank(&k, DEFAULT_RANK_TOL)? == 1;
    }
    let mut check = Check::from_error("separable_rank", trials, worst, SEPARABLE_TOL);
    check.passed &= all_rank_one;
    Ok(check)
}

fn random_tensor<R: Rng>(rng: &mut R, batch: usize, size: usize, channels: usize) -> ImageTensor {
    ImageTensor::from_fn(batch, size, size, channels, |_, _, _, _| {
        rng.random_range(-1.0..1.0)
    })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Superposition, interior translation equivariance and batch independence
/// of the layer on `size x size` inputs. Errors are relative to the largest
/// output; batch independence must hold bit for bit.
pub fn layer_properties<R: Rng>(rng: &mut R, trials: usize, size: usize) -> Result<Check> {
    let margin = (size / 4).max(1);
    let mut linearity: f64 = 0.0;
    let mut shift: f64 = 0.0;
    let mut batch_exact = true;
    for t in 0..trials {
        let mut cfg = LayerConfig::new(size, size, 4, rng.random_range(1..=4), 2);
        cfg.field = FIELDS[t % 2];
        cfg.mode = if t % 3 == 0 {
            Mode::Unnormalized
        } else {
            Mode::Normalized
        };
        cfg.directions = [Directions::One, Directions::Two, Directions::Four][t % 3];
        cfg.shared_directions = t % 2 == 0;
        let params = init_raw(rng.random(), &cfg).constrain();
        let layer = SsmLayer::new(cfg.clone(), params)?;

        let x1 = random_tensor(rng, 2, size, 4);
        let x2 = random_tensor(rng, 2, size, 4);
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let mixed: Vec<f64> = x1
            .as_slice()
            .iter()
            .zip(x2.as_slice())
            .map(|(p, q)| a * p + b * q)
            .collect();
        let mixed = ImageTensor::new(2, size, size, 4, mixed)?;
        let y1 = layer.forward(&x1)?;
        let y2 = layer.forward(&x2)?;
        let ym = layer.forward(&mixed)?;
        let expected: Vec<f64> = y1
            .as_slice()
            .iter()
            .zip(y2.as_slice())
            .map(|(p, q)| a * p + b * q)
            .collect();
        let scale = expected.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        linearity = linearity.max(max_diff(ym.as_slice(), &expected) / scale);

        // Input supported away from the borders, shifted within the margin.
        let m = margin as i64;
        let (d1, d2) = (
            rng.random_range(-m..=m) as isize,
            rng.random_range(-m..=m) as isize,
        );
        let inside = |i: usize| i >= margin && i < size - margin;
        let base = ImageTensor::from_fn(1, size, size, 4, |_, i, j, _| {
            if inside(i) && inside(j) {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            }
        });
        let src = |i: usize, d: isize| {
            (i as isize - d)
                .try_into()
                .ok()
                .filter(|&s: &usize| s < size)
        };
        let moved = ImageTensor::from_fn(1, size, size, 4, |_, i, j, c| {
            match (src(i, d1), src(j, d2)) {
                (Some(si), Some(sj)) => base.get(0, si, sj, c),
                _ => 0.0,
            }
        });
        let yb = layer.forward(&base)?;
        let ys = layer.forward(&moved)?;
        let scale = yb.as_slice().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..size {
            for j in 0..size {
                if let (Some(si), Some(sj)) = (src(i, d1), src(j, d2)) {
                    for c in 0..4 {
                        let e = (ys.get(0, i, j, c) - yb.get(0, si, sj, c)).abs() / scale;
                        shift = shift.max(e);
                    }
                }
            }
        }

        let singles = (0..x1.batch)
            .map(|s| layer.forward(&x1.sample(s)))
            .collect::<Result<Vec<_>>>()?;
        batch_exact &= ImageTensor::stack(&singles)? == y1;
    }
    let batch = if batch_exact { "bit-exact" } else { "MISMATCH" };
    let mut check = Check::from_error("layer", trials, linearity.max(shift), LAYER_TOL).with_note(
        format!("linearity {linearity:e}, translation {shift:e}, batch {batch}"),
    );
    check.passed &= batch_exact;
    Ok(check)
}

/// Runs every check with `trials` draws each and grids up to `max_size`.
pub fn run_verification(seed: u64, max_size: usize, trials: usize) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if max_size < 2 {
        return Err(Error::invalid("max-size", "must be at least 2"));
    }
    let grad_size = max_size.min(8);
    let sizes = [
        (max_size, max_size),
        (max_size, (max_size / 2).max(1)),
        (max_size.div_ceil(3), max_size),
    ];
    let checks = vec![
        pascal(1..=max_size.min(8))?,
        equivalence(&mut stream(seed, 1), trials, &sizes)?,
        fft_vs_direct(&mut stream(seed, 2), trials, max_size)?,
        gradients(&mut stream(seed, 3), trials, grad_size)?,
        normalization(&mut stream(seed, 4), trials, max_size)?,
        cache_structure(max_size)?,
        separable_rank(&mut stream(seed, 5), trials, max_size)?,
        layer_properties(&mut stream(seed, 6), trials.min(12), max_size)?,
    ];
    Ok(VerifyReport {
        seed,
        max_size,
        trials,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(2, 4), 0.0);
        assert_eq!(binomial(30, 15), 155117520.0);
    }

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let a = run_verification(3, 6, 4).unwrap();
        assert!(a.passed(), "{a}");
        assert_eq!(
            a.to_string(),
            run_verification(3, 6, 4).unwrap().to_string()
        );
        assert_eq!(a.checks.len(), 8);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(run_verification(0, 6, 0).is_err());
        assert!(run_verification(0, 1, 3).is_err());
    }
}
