use std::cell::Cell;

use num_complex::Complex64;

use super::cache::{CoeffCache, Monomial};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::parameters::{LayerConfig, LayerParams, Mode, SsmParams};

/// Axis reversal applied to a direction's kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flip {
    pub rows: bool,
    pub cols: bool,
}

impl Flip {
    pub fn is_identity(self) -> bool {
        !self.rows && !self.cols
    }
}

/// A compiled `rows x cols` convolution kernel.
///
/// `values` is stored in the flipped layout of its direction: a kernel with
/// `flip.rows` set has its causal origin in the last row, so it weights inputs
/// at larger row indices than the output cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    values: Grid<Complex64>,
    pub group: usize,
    pub direction: usize,
    pub flip: Flip,
}

impl Kernel2D {
    pub fn new(values: Grid<Complex64>) -> Self {
        Kernel2D {
            values,
            group: 0,
            direction: 0,
            flip: Flip::default(),
        }
    }

    pub fn from_real(values: &Grid<f64>) -> Self {
        Kernel2D::new(values.map(|&x| Complex64::new(x, 0.0)))
    }

    /// Re-labels a causal kernel as direction `direction` with `flip`.
    pub fn into_direction(self, group: usize, direction: usize, flip: Flip) -> Self {
        debug_assert!(self.flip.is_identity());
        Kernel2D {
            values: self.values.flipped(flip.rows, flip.cols),
            group,
            direction,
            flip,
        }
    }

    pub fn values(&self) -> &Grid<Complex64> {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn real_part(&self) -> Grid<f64> {
        self.values.map(|z| z.re)
    }

    /// Values in causal layout, `K[m, n]` weighting the input `m` rows and `n`
    /// columns away from the output cell (backwards for an unflipped kernel).
    pub fn canonical(&self) -> Grid<Complex64> {
        self.values.flipped(self.flip.rows, self.flip.cols)
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .as_slice()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Per-coordinate state kernels `k^h[i,j][g]`, `k^v[i,j][g]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateKernels {
    pub rows: usize,
    pub cols: usize,
    pub n: usize,
    /// `rows * cols * n`, cell-major.
    pub kh: Vec<Complex64>,
    pub kv: Vec<Complex64>,
}

impl StateKernels {
    pub fn kh(&self, i: usize, j: usize) -> &[Complex64] {
        let at = (i * self.cols + j) * self.n;
        &self.kh[at..at + self.n]
    }

    pub fn kv(&self, i: usize, j: usize) -> &[Complex64] {
        let at = (i * self.cols + j) * self.n;
        &self.kv[at..at + self.n]
    }
}

/// `A_s^p` for every slot `s`, power `p` and coordinate `g`.
pub(crate) struct PowerTable {
    n: usize,
    powers: [Vec<Complex64>; 4],
}

impl PowerTable {
    /// Powers `0..=2 * l_max`, the highest degree a cell can reach.
    pub(crate) fn new(p: &SsmParams, l_max: usize) -> Self {
        let n = p.n();
        let count = 2 * l_max + 1;
        let powers = std::array::from_fn(|s| {
            let a = p.a(s);
            let mut table = Vec::with_capacity(count * n);
            table.extend(std::iter::repeat_n(Complex64::new(1.0, 0.0), n));
            for k in 1..count {
                for g in 0..n {
                    let prev = table[(k - 1) * n + g];
                    table.push(prev * a[g]);
                }
            }
            table
        });
        PowerTable { n, powers }
    }

    #[inline]
    pub(crate) fn row(&self, slot: usize, power: u32) -> &[Complex64] {
        let at = power as usize * self.n;
        &self.powers[slot][at..at + self.n]
    }
}

/// Accumulates `Σ_terms coeff * Π A^z * weight[b]` into `out` per coordinate.
#[inline]
pub(crate) fn eval_terms(
    terms: &[Monomial],
    table: &PowerTable,
    weights: [&[Complex64]; 2],
    out: &mut [Complex64],
) {
    for t in terms {
        let [z1, z2, z3, z4] = t.exponents;
        let (p1, p2, p3, p4) = (
            table.row(0, z1),
            table.row(1, z2),
            table.row(2, z3),
            table.row(3, z4),
        );
        let w = weights[t.b_index as usize - 1];
        for g in 0..out.len() {
            out[g] += p1[g] * p2[g] * p3[g] * p4[g] * w[g] * t.coeff;
        }
    }
}

/// Same as [`eval_terms`] but summed over coordinates.
#[inline]
fn eval_terms_summed(
    terms: &[Monomial],
    table: &PowerTable,
    weights: [&[Complex64]; 2],
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for t in terms {
        let [z1, z2, z3, z4] = t.exponents;
        let (p1, p2, p3, p4) = (
            table.row(0, z1),
            table.row(1, z2),
            table.row(2, z3),
            table.row(3, z4),
        );
        let w = weights[t.b_index as usize - 1];
        let mut cell = Complex64::new(0.0, 0.0);
        for g in 0..w.len() {
            cell += p1[g] * p2[g] * p3[g] * p4[g] * w[g];
        }
        acc += cell * t.coeff;
    }
    acc
}

pub(crate) fn check_compile(p: &SsmParams, cache: &CoeffCache, mode: Mode) -> Result<()> {
    if cache.mode() != mode {
        return Err(Error::ModeMismatch {
            cache: cache.mode().to_string(),
            requested: mode.to_string(),
        });
    }
    if !cache.is_exact() {
        return Err(Error::InexactCoefficients {
            rows: cache.rows(),
            cols: cache.cols(),
        });
    }
    if p.n() == 0 {
        return Err(Error::invalid("n", "state dimension must be positive"));
    }
    Ok(())
}

/// Evaluates `k^h` and `k^v` per coordinate for every cell of the cache.
///
/// These are the (possibly normalized) states of the impulse response; the
/// relaxed edge override is not applied here.
pub fn compile_states(params: &SsmParams, cache: &CoeffCache) -> Result<StateKernels> {
    check_compile(params, cache, cache.mode())?;
    let n = params.n();
    let (rows, cols) = cache.shape();
    let table = PowerTable::new(params, cache.l_max());
    let weights = [params.b(0), params.b(1)];
    let zero = Complex64::new(0.0, 0.0);
    let mut kh = vec![zero; rows * cols * n];
    let mut kv = vec![zero; rows * cols * n];
    for i in 0..rows {
        for j in 0..cols {
            let at = (i * cols + j) * n;
            eval_terms(cache.horizontal(i, j), &table, weights, &mut kh[at..at + n]);
            eval_terms(cache.vertical(i, j), &table, weights, &mut kv[at..at + n]);
        }
    }
    Ok(StateKernels {
        rows,
        cols,
        n,
        kh,
        kv,
    })
}

fn times(a: &[Complex64], b: &[Complex64], scale: f64) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x * y * scale).collect()
}

/// Compiles the causal kernel `K[i,j] = Σ_g C1[g] k^h[i,j][g] + C2[g] k^v[i,j][g]`.
///
/// `C` is folded into `B` up front, so each cell costs one pass over its
/// monomials per coordinate. Relaxed caches overwrite the first row and
/// column with their unnormalized edge lists read out through `2 C`.
pub fn compile_kernel(params: &SsmParams, cache: &CoeffCache, mode: Mode) -> Result<Kernel2D> {
    check_compile(params, cache, mode)?;
    let (rows, cols) = cache.shape();
    let table = PowerTable::new(params, cache.l_max());
    let (b1, b2, c1, c2) = (params.b(0), params.b(1), params.c(0), params.c(1));
    let ch = [times(c1, b1, 1.0), times(c1, b2, 1.0)];
    let cv = [times(c2, b1, 1.0), times(c2, b2, 1.0)];
    let mut values = Grid::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            values[(i, j)] = eval_terms_summed(cache.horizontal(i, j), &table, [&ch[0], &ch[1]])
                + eval_terms_summed(cache.vertical(i, j), &table, [&cv[0], &cv[1]]);
        }
    }
    if let Some(edges) = cache.edges() {
        let ch2 = [times(c1, b1, 2.0), times(c1, b2, 2.0)];
        let cv2 = [times(c2, b1, 2.0), times(c2, b2, 2.0)];
        let edge_value = |h: &[Monomial], v: &[Monomial]| {
            eval_terms_summed(h, &table, [&ch2[0], &ch2[1]])
                + eval_terms_summed(v, &table, [&cv2[0], &cv2[1]])
        };
        for i in 0..rows {
            values[(i, 0)] = edge_value(edges.column_h.cell(i), edges.column_v.cell(i));
        }
        for j in 0..cols {
            values[(0, j)] = edge_value(edges.row_h.cell(j), edges.row_v.cell(j));
        }
    }
    Ok(Kernel2D::new(values))
}

/// Kernels for every `(group, direction)` pair of a layer.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelStack {
    pub n_ssm: usize,
    pub directions: usize,
    kernels: Vec<Kernel2D>,
}

impl KernelStack {
    pub fn get(&self, group: usize, direction: usize) -> &Kernel2D {
        &self.kernels[group * self.directions + direction]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Kernel2D> {
        self.kernels.iter()
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }
}

thread_local! {
    static STACK_COMPILES: Cell<usize> = const { Cell::new(0) };
}

/// Number of [`compile_kernel_stack`] calls made on the current thread.
pub fn stack_compiles() -> usize {
    STACK_COMPILES.with(Cell::get)
}

/// Compiles one kernel per group and direction. With shared directions the
/// group's causal kernel is compiled once and flipped for the others.
pub fn compile_kernel_stack(
    params: &LayerParams,
    cfg: &LayerConfig,
    cache: &CoeffCache,
) -> Result<KernelStack> {
    params.validate(cfg)?;
    if cache.shape() != (cfg.rows, cfg.cols) {
        return Err(Error::Shape(format!(
            "cache is {}x{}, layer is {}x{}",
            cache.rows(),
            cache.cols(),
            cfg.rows,
            cfg.cols
        )));
    }
    STACK_COMPILES.with(|c| c.set(c.get() + 1));
    let flips = cfg.directions.flips();
    let mut kernels = Vec::with_capacity(cfg.n_ssm * flips.len());
    for group in 0..cfg.n_ssm {
        let shared = if cfg.shared_directions {
            Some(compile_kernel(
                params.for_direction(cfg, group, 0),
                cache,
                cfg.mode,
            )?)
        } else {
            None
        };
        for (d, &(rows, cols)) in flips.iter().enumerate() {
            let causal = match &shared {
                Some(k) => k.clone(),
                None => compile_kernel(params.for_direction(cfg, group, d), cache, cfg.mode)?,
            };
            kernels.push(causal.into_direction(group, d, Flip { rows, cols }));
        }
    }
    Ok(KernelStack {
        n_ssm: cfg.n_ssm,
        directions: flips.len(),
        kernels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::build_cache;
    use crate::parameters::{init_raw, Directions};
    use crate::recurrence::impulse_response;

    fn step_params() -> SsmParams {
        SsmParams::real([[0.5], [0.25], [0.3], [0.2], [1.0], [1.0], [1.0], [0.0]]).unwrap()
    }

    #[test]
    fn zero_a_is_delta() {
        let p = SsmParams::real([[0.0], [0.0], [0.0], [0.0], [1.0], [1.0], [0.5], [0.5]]).unwrap();
        let cache = build_cache(3, 4, Mode::Unnormalized).unwrap();
        let k = compile_kernel(&p, &cache, Mode::Unnormalized)
            .unwrap()
            .real_part();
        assert_eq!(
            k,
            Grid::from_fn(3, 4, |i, j| if i + j == 0 { 1.0 } else { 0.0 })
        );
    }

    #[test]
    fn one_horizontal_step_values() {
        let p = step_params();
        for (mode, expect) in [(Mode::Unnormalized, 0.75), (Mode::Normalized, 0.375)] {
            let cache = build_cache(3, 3, mode).unwrap();
            let k = compile_kernel(&p, &cache, mode).unwrap().real_part();
            assert!((k[(1, 0)] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_oracle_on_small_grid() {
        let p = step_params();
        for mode in Mode::ALL {
            let cache = build_cache(6, 4, mode).unwrap();
            let k = compile_kernel(&p, &cache, mode).unwrap();
            let oracle = impulse_response(&p, 6, 4, mode).unwrap();
            assert!(k.real_part().max_abs_diff(&oracle.real_part()) < 1e-14);
        }
    }

    #[test]
    fn states_combine_into_kernel() {
        let p = step_params();
        let cache = build_cache(5, 5, Mode::Normalized).unwrap();
        let s = compile_states(&p, &cache).unwrap();
        let k = compile_kernel(&p, &cache, Mode::Normalized).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let manual = p.c(0)[0] * s.kh(i, j)[0] + p.c(1)[0] * s.kv(i, j)[0];
                assert!((manual - k.values()[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn mode_and_exactness_guards() {
        let p = step_params();
        let cache = build_cache(3, 3, Mode::Normalized).unwrap();
        assert!(matches!(
            compile_kernel(&p, &cache, Mode::Unnormalized),
            Err(Error::ModeMismatch { .. })
        ));
        let big = build_cache(40, 40, Mode::Unnormalized).unwrap();
        assert!(matches!(
            compile_kernel(&p, &big, Mode::Unnormalized),
            Err(Error::InexactCoefficients { .. })
        ));
    }

    #[test]
    fn stack_flips() {
        let mut cfg = LayerConfig::new(2, 2, 1, 1, 1);
        cfg.directions = Directions::Two;
        cfg.mode = Mode::Unnormalized;
        let base = Kernel2D::from_real(&Grid::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        let flipped = base.clone().into_direction(
            0,
            1,
            Flip {
                rows: true,
                cols: true,
            },
        );
        assert_eq!(
            flipped.real_part(),
            Grid::from_vec(2, 2, vec![4.0, 3.0, 2.0, 1.0]).unwrap()
        );
        assert_eq!(flipped.canonical(), base.values().clone());

        let params = init_raw(1, &cfg).constrain();
        let cache = build_cache(2, 2, Mode::Unnormalized).unwrap();
        let stack = compile_kernel_stack(&params, &cfg, &cache).unwrap();
        assert_eq!(stack.len(), 2);
        let single = compile_kernel(&params.ssm[0], &cache, Mode::Unnormalized).unwrap();
        assert_eq!(stack.get(0, 0), &single);
        assert_eq!(stack.get(0, 1).canonical(), single.values().clone());
    }

    #[test]
    fn stack_rejects_bad_groups() {
        let cfg = LayerConfig::new(3, 3, 4, 1, 2);
        let params = init_raw(1, &cfg).constrain();
        let mut bad = cfg.clone();
        bad.n_ssm = 3;
        let cache = build_cache(3, 3, cfg.mode).unwrap();
        assert!(compile_kernel_stack(&params, &bad, &cache).is_err());
        let wrong = build_cache(3, 2, cfg.mode).unwrap();
        assert!(compile_kernel_stack(&params, &cfg, &wrong).is_err());
    }
}
