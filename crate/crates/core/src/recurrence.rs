//! Direct evaluation of the Roesser recurrence.
//!
//! The horizontal state advances along the first index and the vertical state
//! along the second:
//!
//! ```text
//! xh[i,j] = s * (A1 xh[i-1,j] + A2 xv[i-1,j]) + B1 u[i,j]
//! xv[i,j] = s * (A3 xh[i,j-1] + A4 xv[i,j-1]) + B2 u[i,j]
//! y[i,j]  = Re(C1 . xh[i,j] + C2 . xv[i,j])
//! ```
//!
//! with zero states outside the grid and `s` the mode's step scale. This is
//! the reference the kernel compiler is checked against.

use num_complex::Complex64;

use crate::compiler::Kernel2D;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::parameters::{Mode, SsmParams};

/// Every state of a scan plus the real output.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    pub rows: usize,
    pub cols: usize,
    pub n: usize,
    /// `rows * cols * n`, cell-major.
    pub xh: Vec<Complex64>,
    pub xv: Vec<Complex64>,
    pub y: Grid<f64>,
}

impl StateGrid {
    pub fn xh(&self, i: usize, j: usize) -> &[Complex64] {
        let at = (i * self.cols + j) * self.n;
        &self.xh[at..at + self.n]
    }

    pub fn xv(&self, i: usize, j: usize) -> &[Complex64] {
        let at = (i * self.cols + j) * self.n;
        &self.xv[at..at + self.n]
    }
}

fn check_extent(u: &Grid<f64>) -> Result<()> {
    if u.rows() == 0 || u.cols() == 0 {
        return Err(Error::EmptyGrid {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    Ok(())
}

/// Row-by-row recurrence keeping only the previous row of states. Calls
/// `visit(i, j, xh, xv)` for every cell in row-major order.
fn recur(
    p: &SsmParams,
    u: &Grid<f64>,
    scale: f64,
    mut visit: impl FnMut(usize, usize, &[Complex64], &[Complex64]),
) {
    let n = p.n();
    let (rows, cols) = u.shape();
    let (a1, a2, a3, a4) = (p.a(0), p.a(1), p.a(2), p.a(3));
    let (b1, b2) = (p.b(0), p.b(1));
    let zero = Complex64::new(0.0, 0.0);
    let mut prev_h = vec![zero; cols * n];
    let mut prev_v = vec![zero; cols * n];
    let mut cur_h = vec![zero; cols * n];
    let mut cur_v = vec![zero; cols * n];

    for i in 0..rows {
        for j in 0..cols {
            let uij = u[(i, j)];
            let at = j * n;
            for g in 0..n {
                cur_h[at + g] =
                    (a1[g] * prev_h[at + g] + a2[g] * prev_v[at + g]) * scale + b1[g] * uij;
                let (lh, lv) = if j == 0 {
                    (zero, zero)
                } else {
                    (cur_h[at - n + g], cur_v[at - n + g])
                };
                cur_v[at + g] = (a3[g] * lh + a4[g] * lv) * scale + b2[g] * uij;
            }
            visit(i, j, &cur_h[at..at + n], &cur_v[at..at + n]);
        }
        std::mem::swap(&mut prev_h, &mut cur_h);
        std::mem::swap(&mut prev_v, &mut cur_v);
    }
}

fn readout(p: &SsmParams, xh: &[Complex64], xv: &[Complex64], c_scale: f64) -> Complex64 {
    let (c1, c2) = (p.c(0), p.c(1));
    let mut acc = Complex64::new(0.0, 0.0);
    for g in 0..p.n() {
        acc += c1[g] * xh[g] + c2[g] * xv[g];
    }
    acc * c_scale
}

/// Complex output `C1 . xh + C2 . xv` for every cell (before the real
/// projection). In relaxed mode the first row and column are replaced by
/// unnormalized edge states read out through `2 C`.
fn complex_output(p: &SsmParams, u: &Grid<f64>, mode: Mode) -> Grid<Complex64> {
    let mut out = Grid::zeros(u.rows(), u.cols());
    recur(p, u, mode.step_scale(), |i, j, xh, xv| {
        out[(i, j)] = readout(p, xh, xv, 1.0);
    });
    if mode.is_relaxed() {
        relax_edges(p, u, &mut out);
    }
    out
}

/// Edge cells only depend on edge cells, so the unnormalized edge states are
/// the scans of the first row and first column on their own.
fn relax_edges(p: &SsmParams, u: &Grid<f64>, out: &mut Grid<Complex64>) {
    let first_row = Grid::from_vec(1, u.cols(), u.row(0).to_vec()).expect("row extent");
    recur(p, &first_row, 1.0, |_, j, xh, xv| {
        out[(0, j)] = readout(p, xh, xv, 2.0);
    });
    let first_col = Grid::from_fn(u.rows(), 1, |i, _| u[(i, 0)]);
    recur(p, &first_col, 1.0, |i, _, xh, xv| {
        out[(i, 0)] = readout(p, xh, xv, 2.0);
    });
}

/// Runs the recurrence over `u`, keeping every state.
///
/// In [`Mode::NormalizedRelaxed`] the stored states are the normalized ones
/// (which feed the interior); only `y` on the first row and column comes from
/// the separate unnormalized edge pass.
pub fn scan(params: &SsmParams, u: &Grid<f64>, mode: Mode) -> Result<StateGrid> {
    check_extent(u)?;
    let n = params.n();
    let (rows, cols) = u.shape();
    let mut xh = Vec::with_capacity(rows * cols * n);
    let mut xv = Vec::with_capacity(rows * cols * n);
    let mut y = Grid::zeros(rows, cols);
    recur(params, u, mode.step_scale(), |i, j, h, v| {
        xh.extend_from_slice(h);
        xv.extend_from_slice(v);
        y[(i, j)] = readout(params, h, v, 1.0);
    });
    if mode.is_relaxed() {
        relax_edges(params, u, &mut y);
    }
    Ok(StateGrid {
        rows,
        cols,
        n,
        xh,
        xv,
        y: y.map(|z| z.re),
    })
}

/// Output of [`scan`] without materializing the state grid.
pub fn scan_output(params: &SsmParams, u: &Grid<f64>, mode: Mode) -> Result<Grid<f64>> {
    check_extent(u)?;
    Ok(complex_output(params, u, mode).map(|z| z.re))
}

/// Response to a unit impulse at the origin, kept complex (the real part is
/// what the layer uses).
pub fn impulse_response(
    params: &SsmParams,
    rows: usize,
    cols: usize,
    mode: Mode,
) -> Result<Kernel2D> {
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyGrid { rows, cols });
    }
    let mut delta = Grid::zeros(rows, cols);
    delta[(0, 0)] = 1.0;
    Ok(Kernel2D::new(complex_output(params, &delta, mode)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parameters::{constrain, RawSsm, ScalarField};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn impulse(rows: usize, cols: usize, at: (usize, usize)) -> Grid<f64> {
        let mut u = Grid::zeros(rows, cols);
        u[at] = 1.0;
        u
    }

    fn pascal_params() -> SsmParams {
        SsmParams::real([[1.0], [1.0], [1.0], [0.0], [1.0], [0.0], [1.0], [0.0]]).unwrap()
    }

    #[test]
    fn zero_a_gives_delta() {
        let p = SsmParams::real([[0.0], [0.0], [0.0], [0.0], [1.0], [1.0], [0.5], [0.5]]).unwrap();
        let y = scan(&p, &impulse(4, 3, (0, 0)), Mode::Unnormalized)
            .unwrap()
            .y;
        assert_eq!(
            y,
            Grid::from_fn(4, 3, |i, j| if (i, j) == (0, 0) { 1.0 } else { 0.0 })
        );
    }

    #[test]
    fn pascal_restriction_is_transposed_display_matrix() {
        let displayed = [
            [1.0, 1.0, 1.0, 1.0, 1.0],
            [0.0, 1.0, 2.0, 3.0, 4.0],
            [0.0, 0.0, 1.0, 3.0, 6.0],
            [0.0, 0.0, 0.0, 1.0, 4.0],
            [0.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let y = scan(&pascal_params(), &impulse(5, 5, (0, 0)), Mode::Unnormalized)
            .unwrap()
            .y;
        assert_eq!(y, Grid::from_fn(5, 5, |i, j| displayed[j][i]));
    }

    #[test]
    fn one_horizontal_step() {
        let p = SsmParams::real([[0.5], [0.25], [0.3], [0.2], [1.0], [1.0], [1.0], [0.0]]).unwrap();
        let y = scan(&p, &impulse(3, 3, (0, 0)), Mode::Unnormalized)
            .unwrap()
            .y;
        assert!((y[(1, 0)] - 0.75).abs() < 1e-15);
        let y = scan(&p, &impulse(3, 3, (0, 0)), Mode::Normalized)
            .unwrap()
            .y;
        assert!((y[(1, 0)] - 0.375).abs() < 1e-15);
    }

    #[test]
    fn empty_grid_rejected() {
        let u = Grid::zeros(0, 3);
        assert!(matches!(
            scan(&pascal_params(), &u, Mode::Normalized),
            Err(Error::EmptyGrid { .. })
        ));
        assert!(impulse_response(&pascal_params(), 3, 0, Mode::Normalized).is_err());
    }

    #[test]
    fn relaxed_edges_use_unnormalized_states_and_double_c() {
        let p = SsmParams::real([[0.5], [0.25], [0.3], [0.2], [1.0], [1.0], [1.0], [0.0]]).unwrap();
        let k = impulse_response(&p, 3, 3, Mode::NormalizedRelaxed)
            .unwrap()
            .real_part();
        let unnorm = impulse_response(&p, 3, 3, Mode::Unnormalized)
            .unwrap()
            .real_part();
        let norm = impulse_response(&p, 3, 3, Mode::Normalized)
            .unwrap()
            .real_part();
        for i in 0..3 {
            assert!((k[(i, 0)] - 2.0 * unnorm[(i, 0)]).abs() < 1e-15);
            assert!((k[(0, i)] - 2.0 * unnorm[(0, i)]).abs() < 1e-15);
        }
        assert_eq!(k[(1, 1)], norm[(1, 1)]);
        assert_eq!(k[(2, 2)], norm[(2, 2)]);
    }

    #[test]
    fn normalized_states_bounded_by_b() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for field in [ScalarField::Real, ScalarField::Complex] {
            for _ in 0..20 {
                let p = constrain(&RawSsm::random(&mut rng, field, 3));
                let s = scan(&p, &impulse(10, 10, (0, 0)), Mode::Normalized).unwrap();
                for g in 0..3 {
                    let bound = p.b(0)[g].norm().max(p.b(1)[g].norm()) * (1.0 + 1e-12);
                    for cell in 0..100 {
                        assert!(s.xh[cell * 3 + g].norm() <= bound);
                        assert!(s.xv[cell * 3 + g].norm() <= bound);
                    }
                }
            }
        }
    }

    fn random_params(seed: u64, complex: bool) -> SsmParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = if complex {
            ScalarField::Complex
        } else {
            ScalarField::Real
        };
        constrain(&RawSsm::random(&mut rng, field, 2))
    }

    proptest! {
        #[test]
        fn scan_is_linear(
            seed in any::<u64>(),
            complex in any::<bool>(),
            mode in prop::sample::select(Mode::ALL.to_vec()),
            u in prop::collection::vec(-1.0f64..1.0, 30),
            w in prop::collection::vec(-1.0f64..1.0, 30),
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
        ) {
            let p = random_params(seed, complex);
            let u = Grid::from_vec(5, 6, u).unwrap();
            let w = Grid::from_vec(5, 6, w).unwrap();
            let mix = Grid::from_fn(5, 6, |i, j| alpha * u[(i, j)] + beta * w[(i, j)]);
            let yu = scan_output(&p, &u, mode).unwrap();
            let yw = scan_output(&p, &w, mode).unwrap();
            let ym = scan_output(&p, &mix, mode).unwrap();
            let expect = Grid::from_fn(5, 6, |i, j| alpha * yu[(i, j)] + beta * yw[(i, j)]);
            prop_assert!(ym.max_abs_diff(&expect) < 1e-12);
        }

        // Shifted impulses see the same causal system; the relaxed edge pass is
        // anchored to the grid, so only the two shift-invariant modes qualify.
        #[test]
        fn shifted_impulse_is_shifted_kernel(
            seed in any::<u64>(),
            complex in any::<bool>(),
            normalized in any::<bool>(),
            p_at in 0usize..4,
            q_at in 0usize..5,
        ) {
            let mode = if normalized { Mode::Normalized } else { Mode::Unnormalized };
            let p = random_params(seed, complex);
            let k = impulse_response(&p, 6, 7, mode).unwrap().real_part();
            let y = scan_output(&p, &impulse(6, 7, (p_at, q_at)), mode).unwrap();
            for i in 0..6 {
                for j in 0..7 {
                    let expect = if i >= p_at && j >= q_at { k[(i - p_at, j - q_at)] } else { 0.0 };
                    prop_assert!((y[(i, j)] - expect).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn scan_and_scan_output_agree() {
        let p = random_params(9, true);
        let u = Grid::from_fn(4, 5, |i, j| (i as f64 - j as f64 * 0.3).sin());
        for mode in Mode::ALL {
            assert_eq!(
                scan(&p, &u, mode).unwrap().y,
                scan_output(&p, &u, mode).unwrap()
            );
        }
    }
}
