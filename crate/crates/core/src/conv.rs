//! FFT convolution and the layer forward pass.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::compiler::{build_cache, compile_kernel_stack, Flip, Kernel2D, KernelStack};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::parameters::{LayerConfig, LayerParams};
use crate::recurrence::scan_output;

/// Smallest `2^a 3^b 5^c` that is at least `min`.
pub fn fast_len(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// Padded transform size for linear convolution of `rows x cols` operands.
pub fn padded_shape(rows: usize, cols: usize) -> (usize, usize) {
    (fast_len(2 * rows - 1), fast_len(2 * cols - 1))
}

/// 2-D transform over a `p1 x p2` row-major buffer. Spectra are kept
/// transposed (`p2 x p1`) between [`Fft2d::forward`] and [`Fft2d::inverse`].
struct Fft2d {
    p1: usize,
    p2: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    swap: Vec<Complex64>,
}

impl Fft2d {
    fn new(p1: usize, p2: usize) -> Self {
        let mut planner = FftPlanner::new();
        let row_fwd = planner.plan_fft_forward(p2);
        let row_inv = planner.plan_fft_inverse(p2);
        let col_fwd = planner.plan_fft_forward(p1);
        let col_inv = planner.plan_fft_inverse(p1);
        let scratch_len = [&row_fwd, &row_inv, &col_fwd, &col_inv]
            .iter()
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Fft2d {
            p1,
            p2,
            row_fwd,
            row_inv,
            col_fwd,
            col_inv,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            swap: vec![Complex64::new(0.0, 0.0); p1 * p2],
        }
    }

    /// Rows at or beyond `active_rows` must be zero on entry.
    fn forward(&mut self, buf: &mut [Complex64], active_rows: usize) {
        let (p1, p2) = (self.p1, self.p2);
        self.row_fwd
            .process_with_scratch(&mut buf[..active_rows * p2], &mut self.scratch);
        for i in 0..p1 {
            for j in 0..p2 {
                self.swap[j * p1 + i] = buf[i * p2 + j];
            }
        }
        self.col_fwd
            .process_with_scratch(&mut self.swap, &mut self.scratch);
        buf.copy_from_slice(&self.swap);
    }

    /// Unscaled inverse; only the first `needed_rows` rows are valid after.
    fn inverse(&mut self, buf: &mut [Complex64], needed_rows: usize) {
        let (p1, p2) = (self.p1, self.p2);
        self.col_inv.process_with_scratch(buf, &mut self.scratch);
        for j in 0..p2 {
            for i in 0..needed_rows {
                self.swap[i * p2 + j] = buf[j * p1 + i];
            }
        }
        self.row_inv
            .process_with_scratch(&mut self.swap[..needed_rows * p2], &mut self.scratch);
        buf[..needed_rows * p2].copy_from_slice(&self.swap[..needed_rows * p2]);
    }
}

/// Places a causal kernel in a `p1 x p2` circular buffer so that circular
/// convolution realizes the kernel's direction: a flipped axis is stored at
/// negative (wrapped) offsets.
fn embed(canonical: &Grid<Complex64>, flip: Flip, p1: usize, p2: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); p1 * p2];
    for m in 0..canonical.rows() {
        let r = if flip.rows { (p1 - m) % p1 } else { m };
        for n in 0..canonical.cols() {
            let c = if flip.cols { (p2 - n) % p2 } else { n };
            buf[r * p2 + c] += canonical[(m, n)];
        }
    }
    buf
}

fn check_pair(u: &Grid<f64>, k: &Kernel2D) -> Result<()> {
    if u.rows() == 0 || u.cols() == 0 {
        return Err(Error::EmptyGrid {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    if u.shape() != k.shape() {
        return Err(Error::Shape(format!(
            "input is {}x{}, kernel is {}x{}",
            u.rows(),
            u.cols(),
            k.shape().0,
            k.shape().1
        )));
    }
    Ok(())
}

/// Linear convolution `y[i,j] = Re Σ K[i-î, j-ĵ] u[î,ĵ]` (causal for an
/// unflipped kernel) by zero-padded FFT.
///
/// A kernel flipped along an axis convolves in the opposite direction on that
/// axis, i.e. `y = flip(conv(flip(u), canonical))`.
pub fn conv2d_fft(u: &Grid<f64>, k: &Kernel2D) -> Result<Grid<f64>> {
    check_pair(u, k)?;
    let (rows, cols) = u.shape();
    let (p1, p2) = padded_shape(rows, cols);
    let mut fft = Fft2d::new(p1, p2);

    let mut kf = embed(&k.canonical(), k.flip, p1, p2);
    fft.forward(&mut kf, p1);

    let mut buf = vec![Complex64::new(0.0, 0.0); p1 * p2];
    for i in 0..rows {
        for j in 0..cols {
            buf[i * p2 + j] = Complex64::new(u[(i, j)], 0.0);
        }
    }
    fft.forward(&mut buf, rows);
    for (x, y) in buf.iter_mut().zip(&kf) {
        *x *= y;
    }
    fft.inverse(&mut buf, rows);
    let scale = 1.0 / (p1 * p2) as f64;
    Ok(Grid::from_fn(rows, cols, |i, j| buf[i * p2 + j].re * scale))
}

/// Explicit double sum with the same contract as [`conv2d_fft`].
pub fn conv2d_direct(u: &Grid<f64>, k: &Kernel2D) -> Result<Grid<f64>> {
    check_pair(u, k)?;
    let (rows, cols) = u.shape();
    let c = k.canonical();
    let flip = k.flip;
    Ok(Grid::from_fn(rows, cols, |i, j| {
        let mut acc = 0.0;
        for m in 0..rows {
            let si = if flip.rows { i + m } else { i.wrapping_sub(m) };
            if si >= rows {
                continue;
            }
            for n in 0..cols {
                let sj = if flip.cols { j + n } else { j.wrapping_sub(n) };
                if sj >= cols {
                    continue;
                }
                acc += c[(m, n)].re * u[(si, sj)];
            }
        }
        acc
    }))
}

/// `batch x rows x cols x channels` real tensor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    pub batch: usize,
    pub rows: usize,
    pub cols: usize,
    pub channels: usize,
    data: Vec<f64>,
}

impl ImageTensor {
    pub fn new(
        batch: usize,
        rows: usize,
        cols: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if batch == 0 || rows == 0 || cols == 0 || channels == 0 {
            return Err(Error::Shape(format!(
                "tensor extents must be positive, got {batch}x{rows}x{cols}x{channels}"
            )));
        }
        if data.len() != batch * rows * cols * channels {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {batch}x{rows}x{cols}x{channels} tensor",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("tensor".into()));
        }
        Ok(ImageTensor {
            batch,
            rows,
            cols,
            channels,
            data,
        })
    }

    pub fn from_fn(
        batch: usize,
        rows: usize,
        cols: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(batch * rows * cols * channels);
        for b in 0..batch {
            for i in 0..rows {
                for j in 0..cols {
                    for c in 0..channels {
                        data.push(f(b, i, j, c));
                    }
                }
            }
        }
        ImageTensor {
            batch,
            rows,
            cols,
            channels,
            data,
        }
    }

    fn offset(&self, b: usize, i: usize, j: usize, c: usize) -> usize {
        ((b * self.rows + i) * self.cols + j) * self.channels + c
    }

    pub fn get(&self, b: usize, i: usize, j: usize, c: usize) -> f64 {
        self.data[self.offset(b, i, j, c)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn plane(&self, b: usize, c: usize) -> Grid<f64> {
        Grid::from_fn(self.rows, self.cols, |i, j| self.get(b, i, j, c))
    }

    /// The single-sample tensor at batch index `b`.
    pub fn sample(&self, b: usize) -> ImageTensor {
        let len = self.rows * self.cols * self.channels;
        ImageTensor {
            batch: 1,
            rows: self.rows,
            cols: self.cols,
            channels: self.channels,
            data: self.data[b * len..(b + 1) * len].to_vec(),
        }
    }

    /// Concatenates tensors along the batch axis.
    pub fn stack(samples: &[ImageTensor]) -> Result<ImageTensor> {
        let first = samples
            .first()
            .ok_or_else(|| Error::Shape("cannot stack zero tensors".into()))?;
        let mut data = Vec::new();
        let mut batch = 0;
        for s in samples {
            if (s.rows, s.cols, s.channels) != (first.rows, first.cols, first.channels) {
                return Err(Error::Shape("stacked tensors differ in shape".into()));
            }
            data.extend_from_slice(&s.data);
            batch += s.batch;
        }
        ImageTensor::new(batch, first.rows, first.cols, first.channels, data)
    }
}

/// A layer with its kernels compiled once at construction.
#[derive(Debug, Clone)]
pub struct SsmLayer {
    cfg: LayerConfig,
    params: LayerParams,
    stack: KernelStack,
    padded: (usize, usize),
    /// Per group: transform of the summed direction kernels, pre-scaled by
    /// the inverse transform normalization.
    spectra: Vec<Vec<Complex64>>,
}

impl SsmLayer {
    pub fn new(cfg: LayerConfig, params: LayerParams) -> Result<Self> {
        params.validate(&cfg)?;
        let cache = build_cache(cfg.rows, cfg.cols, cfg.mode)?;
        let stack = compile_kernel_stack(&params, &cfg, &cache)?;
        SsmLayer::with_kernels(cfg, params, stack)
    }

    /// Builds the layer from an already compiled stack.
    pub fn with_kernels(cfg: LayerConfig, params: LayerParams, stack: KernelStack) -> Result<Self> {
        params.validate(&cfg)?;
        if stack.n_ssm != cfg.n_ssm
            || stack.directions != cfg.directions.count()
            || stack.iter().any(|k| k.shape() != (cfg.rows, cfg.cols))
        {
            return Err(Error::Shape(format!(
                "kernel stack does not match a {}x{} layer with {} groups and {} directions",
                cfg.rows,
                cfg.cols,
                cfg.n_ssm,
                cfg.directions.count()
            )));
        }
        let (p1, p2) = padded_shape(cfg.rows, cfg.cols);
        let mut fft = Fft2d::new(p1, p2);
        let scale = 1.0 / (p1 * p2) as f64;
        let spectra = (0..cfg.n_ssm)
            .map(|group| {
                let mut sum = vec![Complex64::new(0.0, 0.0); p1 * p2];
                for d in 0..stack.directions {
                    let k = stack.get(group, d);
                    // u is real, so Re(u * K) = u * Re(K).
                    let real = k.canonical().map(|z| Complex64::new(z.re * scale, 0.0));
                    for (s, e) in sum.iter_mut().zip(embed(&real, k.flip, p1, p2)) {
                        *s += e;
                    }
                }
                fft.forward(&mut sum, p1);
                sum
            })
            .collect();
        Ok(SsmLayer {
            cfg,
            params,
            stack,
            padded: (p1, p2),
            spectra,
        })
    }

    pub fn config(&self) -> &LayerConfig {
        &self.cfg
    }

    pub fn kernels(&self) -> &KernelStack {
        &self.stack
    }

    /// `y_c = Σ_d conv(u_c, K[group(c), d]) + D_c u_c` for every sample.
    ///
    /// Kernels are real after projection, so two channels of one group share
    /// a transform as real and imaginary parts.
    pub fn forward(&self, x: &ImageTensor) -> Result<ImageTensor> {
        let cfg = &self.cfg;
        if (x.rows, x.cols, x.channels) != (cfg.rows, cfg.cols, cfg.channels) {
            return Err(Error::Shape(format!(
                "tensor is {}x{}x{} (rows x cols x channels), layer expects {}x{}x{}",
                x.rows, x.cols, x.channels, cfg.rows, cfg.cols, cfg.channels
            )));
        }
        let (rows, cols) = (cfg.rows, cfg.cols);
        let (p1, p2) = self.padded;
        let per_group = cfg.channels / cfg.n_ssm;
        let mut fft = Fft2d::new(p1, p2);
        let mut buf = vec![Complex64::new(0.0, 0.0); p1 * p2];
        let mut out = vec![0.0; x.data.len()];

        for b in 0..x.batch {
            for group in 0..cfg.n_ssm {
                let first = group * per_group;
                let channels: Vec<usize> = (first..first + per_group).collect();
                for pair in channels.chunks(2) {
                    buf.fill(Complex64::new(0.0, 0.0));
                    for i in 0..rows {
                        for j in 0..cols {
                            let re = x.get(b, i, j, pair[0]);
                            let im = pair.get(1).map_or(0.0, |&c| x.get(b, i, j, c));
                            buf[i * p2 + j] = Complex64::new(re, im);
                        }
                    }
                    fft.forward(&mut buf, rows);
                    for (v, k) in buf.iter_mut().zip(&self.spectra[group]) {
                        *v *= k;
                    }
                    fft.inverse(&mut buf, rows);
                    for i in 0..rows {
                        for j in 0..cols {
                            let y = buf[i * p2 + j];
                            let c0 = pair[0];
                            let at = x.offset(b, i, j, c0);
                            out[at] = y.re + self.params.skip[c0] * x.data[at];
                            if let Some(&c1) = pair.get(1) {
                                let at = x.offset(b, i, j, c1);
                                out[at] = y.im + self.params.skip[c1] * x.data[at];
                            }
                        }
                    }
                }
            }
        }
        Ok(ImageTensor {
            batch: x.batch,
            rows,
            cols,
            channels: cfg.channels,
            data: out,
        })
    }
}

/// Compiles the kernels and applies the layer to `x`.
pub fn apply_layer(
    x: &ImageTensor,
    params: &LayerParams,
    cfg: &LayerConfig,
) -> Result<ImageTensor> {
    SsmLayer::new(cfg.clone(), params.clone())?.forward(x)
}

/// The layer evaluated by running the recurrence cell by cell on every
/// channel; flipped directions scan the flipped input and flip back.
///
/// The relaxed mode rewrites the kernel's first row and column, which no
/// shift-invariant scan reproduces, so this agrees with [`apply_layer`] only
/// in the other two modes.
pub fn apply_layer_recurrent(
    x: &ImageTensor,
    params: &LayerParams,
    cfg: &LayerConfig,
) -> Result<ImageTensor> {
    cfg.validate()?;
    params.validate(cfg)?;
    if (x.rows, x.cols, x.channels) != (cfg.rows, cfg.cols, cfg.channels) {
        return Err(Error::Shape(format!(
            "tensor is {}x{}x{} (rows x cols x channels), layer expects {}x{}x{}",
            x.rows, x.cols, x.channels, cfg.rows, cfg.cols, cfg.channels
        )));
    }
    let mut out = vec![0.0; x.data.len()];
    for b in 0..x.batch {
        for c in 0..cfg.channels {
            let plane = x.plane(b, c);
            let mut y = plane.map(|v| params.skip[c] * v);
            for (d, &(fr, fc)) in cfg.directions.flips().iter().enumerate() {
                let p = params.for_direction(cfg, cfg.group_of(c), d);
                let part = scan_output(p, &plane.flipped(fr, fc), cfg.mode)?.flipped(fr, fc);
                for (acc, v) in y.as_mut_slice().iter_mut().zip(part.as_slice()) {
                    *acc += v;
                }
            }
            for i in 0..cfg.rows {
                for j in 0..cfg.cols {
                    out[x.offset(b, i, j, c)] = y[(i, j)];
                }
            }
        }
    }
    ImageTensor::new(x.batch, cfg.rows, cfg.cols, cfg.channels, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{cache_builds, stack_compiles};
    use crate::parameters::{init_raw, Directions, Mode, ScalarField, SsmParams};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Grid<f64> {
        Grid::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn fast_len_is_smooth() {
        assert_eq!(fast_len(63), 64);
        assert_eq!(fast_len(7), 8);
        assert_eq!(fast_len(11), 12);
        assert_eq!(fast_len(1), 1);
    }

    #[test]
    fn hand_example() {
        let u = Grid::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let k = Kernel2D::from_real(&Grid::from_vec(2, 2, vec![1.0; 4]).unwrap());
        let expect = Grid::from_vec(2, 2, vec![1.0, 3.0, 4.0, 10.0]).unwrap();
        assert_eq!(conv2d_direct(&u, &k).unwrap(), expect);
        assert!(conv2d_fft(&u, &k).unwrap().max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn delta_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_grid(&mut rng, 5, 7);
        let k = Kernel2D::from_real(&Grid::from_fn(5, 7, |i, j| (i + j == 0) as u8 as f64));
        assert_eq!(conv2d_direct(&u, &k).unwrap(), u);
        assert!(conv2d_fft(&u, &k).unwrap().max_abs_diff(&u) < 1e-14);
    }

    #[test]
    fn fft_matches_direct_for_every_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (rows, cols) in [(1, 1), (1, 9), (16, 16), (7, 12)] {
            for flip in [(false, false), (true, false), (false, true), (true, true)] {
                let u = random_grid(&mut rng, rows, cols);
                let k = Kernel2D::new(Grid::from_fn(rows, cols, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                }))
                .into_direction(
                    0,
                    1,
                    Flip {
                        rows: flip.0,
                        cols: flip.1,
                    },
                );
                let d = conv2d_direct(&u, &k).unwrap();
                let f = conv2d_fft(&u, &k).unwrap();
                assert!(f.max_abs_diff(&d) <= 1e-12 * d.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn flipped_kernel_is_anticausal() {
        let k = Kernel2D::from_real(&Grid::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap())
            .into_direction(
                0,
                1,
                Flip {
                    rows: true,
                    cols: true,
                },
            );
        let mut u = Grid::zeros(2, 2);
        u[(1, 1)] = 1.0;
        let y = conv2d_direct(&u, &k).unwrap();
        // the impulse at the far corner reaches backwards.
        assert_eq!(y, Grid::from_vec(2, 2, vec![4.0, 3.0, 2.0, 1.0]).unwrap());
        assert!(conv2d_fft(&u, &k).unwrap().max_abs_diff(&y) < 1e-12);
    }

    #[test]
    fn rejects_mismatched_extents() {
        let u = Grid::zeros(3, 3);
        let k = Kernel2D::from_real(&Grid::zeros(3, 2));
        assert!(matches!(conv2d_fft(&u, &k), Err(Error::Shape(_))));
        assert!(matches!(conv2d_direct(&u, &k), Err(Error::Shape(_))));
    }

    fn delta_layer(mode: Mode) -> (LayerConfig, LayerParams) {
        let mut cfg = LayerConfig::new(4, 5, 3, 1, 1);
        cfg.mode = mode;
        let p = SsmParams::real([[0.0], [0.0], [0.0], [0.0], [1.0], [1.0], [0.5], [0.5]]).unwrap();
        (
            cfg,
            LayerParams {
                ssm: vec![p],
                skip: vec![1.0; 3],
            },
        )
    }

    #[test]
    fn delta_kernel_plus_skip_doubles() {
        let (cfg, params) = delta_layer(Mode::Unnormalized);
        let x = ImageTensor::from_fn(2, 4, 5, 3, |b, i, j, c| (b + 2 * i + 3 * j + 5 * c) as f64);
        let y = apply_layer(&x, &params, &cfg).unwrap();
        for (a, b) in y.as_slice().iter().zip(x.as_slice()) {
            assert!((a - 2.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn groups_map_to_contiguous_channels() {
        let mut cfg = LayerConfig::new(5, 4, 4, 2, 2);
        cfg.mode = Mode::Normalized;
        let params = init_raw(3, &cfg).constrain();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = ImageTensor::from_fn(1, 5, 4, 4, |_, _, _, _| rng.random_range(-1.0..1.0));
        let layer = SsmLayer::new(cfg.clone(), params.clone()).unwrap();
        let y = layer.forward(&x).unwrap();
        for c in 0..4 {
            let k = layer.kernels().get(c / 2, 0);
            let manual = conv2d_direct(&x.plane(0, c), k).unwrap();
            for i in 0..5 {
                for j in 0..4 {
                    let expect = manual[(i, j)] + params.skip[c] * x.get(0, i, j, c);
                    assert!((y.get(0, i, j, c) - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn compiles_once_for_many_forwards() {
        let cfg = LayerConfig::new(6, 6, 2, 2, 1);
        let params = init_raw(1, &cfg).constrain();
        let x = ImageTensor::from_fn(2, 6, 6, 2, |b, i, j, c| (b + i * j + c) as f64);
        let (caches, stacks) = (cache_builds(), stack_compiles());
        let layer = SsmLayer::new(cfg, params).unwrap();
        let first = layer.forward(&x).unwrap();
        let second = layer.forward(&x).unwrap();
        assert_eq!(first, second);
        assert_eq!(cache_builds() - caches, 1);
        assert_eq!(stack_compiles() - stacks, 1);
    }

    #[test]
    fn shape_errors() {
        let (cfg, params) = delta_layer(Mode::Normalized);
        let x = ImageTensor::from_fn(1, 4, 5, 2, |_, _, _, _| 0.0);
        assert!(matches!(
            apply_layer(&x, &params, &cfg),
            Err(Error::Shape(_))
        ));
        let mut bad = cfg.clone();
        bad.n_ssm = 2;
        let x = ImageTensor::from_fn(1, 4, 5, 3, |_, _, _, _| 0.0);
        assert!(matches!(
            apply_layer(&x, &params, &bad),
            Err(Error::GroupMismatch { .. })
        ));
    }

    #[test]
    fn bidirectional_layer_is_flip_equivariant() {
        for directions in [Directions::Two, Directions::Four] {
            let mut cfg = LayerConfig::new(6, 6, 2, 2, 1);
            cfg.directions = directions;
            let params = init_raw(5, &cfg).constrain();
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let x = ImageTensor::from_fn(1, 6, 6, 2, |_, _, _, _| rng.random_range(-1.0..1.0));
            let flipped = ImageTensor::from_fn(1, 6, 6, 2, |b, i, j, c| x.get(b, 5 - i, 5 - j, c));
            let y = apply_layer(&x, &params, &cfg).unwrap();
            let yf = apply_layer(&flipped, &params, &cfg).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    for c in 0..2 {
                        assert!((yf.get(0, i, j, c) - y.get(0, 5 - i, 5 - j, c)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn recurrent_layer_matches_fft_layer() {
        for mode in [Mode::Unnormalized, Mode::Normalized] {
            for (k, directions) in [Directions::One, Directions::Two, Directions::Four]
                .into_iter()
                .enumerate()
            {
                let mut cfg = LayerConfig::new(7, 5, 4, 3, 2);
                cfg.mode = mode;
                cfg.directions = directions;
                cfg.shared_directions = k != 1;
                cfg.field = if k == 2 {
                    ScalarField::Complex
                } else {
                    ScalarField::Real
                };
                let params = init_raw(k as u64, &cfg).constrain();
                let mut rng = ChaCha8Rng::seed_from_u64(11);
                let x = ImageTensor::from_fn(2, 7, 5, 4, |_, _, _, _| rng.random_range(-1.0..1.0));
                let fast = apply_layer(&x, &params, &cfg).unwrap();
                let slow = apply_layer_recurrent(&x, &params, &cfg).unwrap();
                let err = fast
                    .as_slice()
                    .iter()
                    .zip(slow.as_slice())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-12, "{mode} {directions}: {err}");
            }
        }
    }

    proptest! {
        #[test]
        fn batch_is_independent(seed in any::<u64>()) {
            let mut cfg = LayerConfig::new(5, 6, 3, 2, 3);
            cfg.directions = Directions::Four;
            let params = init_raw(seed, &cfg).constrain();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
            let x = ImageTensor::from_fn(3, 5, 6, 3, |_, _, _, _| rng.random_range(-1.0..1.0));
            let layer = SsmLayer::new(cfg, params).unwrap();
            let whole = layer.forward(&x).unwrap();
            let parts: Vec<_> = (0..3).map(|b| layer.forward(&x.sample(b)).unwrap()).collect();
            prop_assert_eq!(whole, ImageTensor::stack(&parts).unwrap());
        }
    }
}
