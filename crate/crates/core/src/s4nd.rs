//! Separable outer-product kernels and numerical rank.
//!
//! A separable layer builds its 2-D kernel as `k1 ⊗ k2` from two 1-D diagonal
//! SSM kernels, which caps the kernel at rank one. The 2-D recurrence has no
//! such cap; [`numerical_rank`] makes the difference measurable.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::compiler::Kernel2D;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::parameters::{sigmoid, ScalarField};

/// Default relative singular-value cutoff.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// A directly parameterized discrete diagonal SSM on one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Ssm1dParams {
    pub field: ScalarField,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub c: Vec<Complex64>,
}

impl Ssm1dParams {
    pub fn real(a: &[f64], b: &[f64], c: &[f64]) -> Result<Self> {
        let lift = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Ssm1dParams::new(ScalarField::Real, lift(a), lift(b), lift(c))
    }

    pub fn new(
        field: ScalarField,
        a: Vec<Complex64>,
        b: Vec<Complex64>,
        c: Vec<Complex64>,
    ) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("n", "state dimension must be positive"));
        }
        for (name, v) in [("a", &a), ("b", &b), ("c", &c)] {
            if v.len() != a.len() {
                return Err(Error::invalid(
                    name,
                    format!("expected {} entries, got {}", a.len(), v.len()),
                ));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite(name.into()));
            }
        }
        Ok(Ssm1dParams { field, a, b, c })
    }

    /// Random parameters in the stable region: real eigenvalues (or complex
    /// moduli) are sigmoids of `U[-1, 1]`, angles `2 pi sigmoid(U[-1, 1])`,
    /// `B` and `C` (real parts, or radii) uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, field: ScalarField, n: usize) -> Self {
        let mut draw = || rng.random_range(-1.0..=1.0);
        let mut entry = |limited: bool| -> Complex64 {
            let v = draw();
            let radius = if limited { sigmoid(v) } else { v };
            match field {
                ScalarField::Real => Complex64::new(radius, 0.0),
                ScalarField::Complex => {
                    Complex64::from_polar(radius, std::f64::consts::TAU * sigmoid(draw()))
                }
            }
        };
        let a = (0..n).map(|_| entry(true)).collect();
        let b = (0..n).map(|_| entry(false)).collect();
        let c = (0..n).map(|_| entry(false)).collect();
        Ssm1dParams { field, a, b, c }
    }
}

/// `k[l] = Re Σ_g C[g] A[g]^l B[g]` for `l in 0..len`.
pub fn kernel_1d(p: &Ssm1dParams, len: usize) -> Result<Vec<f64>> {
    if len == 0 {
        return Err(Error::invalid("len", "kernel length must be at least 1"));
    }
    let mut state: Vec<Complex64> = p.b.clone();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let y: Complex64 = p.c.iter().zip(&state).map(|(c, x)| c * x).sum();
        out.push(y.re);
        for (x, a) in state.iter_mut().zip(&p.a) {
            *x *= a;
        }
    }
    Ok(out)
}

/// `K[i,j] = k1[i] k2[j]`.
pub fn outer_kernel(k1: &[f64], k2: &[f64]) -> Result<Kernel2D> {
    if k1.is_empty() || k2.is_empty() {
        return Err(Error::invalid(
            "k",
            "outer product factors must be non-empty",
        ));
    }
    Ok(Kernel2D::from_real(&Grid::from_fn(
        k1.len(),
        k2.len(),
        |i, j| k1[i] * k2[j],
    )))
}

/// Singular values of `Re(K)` in descending order.
pub fn singular_values(k: &Kernel2D) -> Result<Vec<f64>> {
    let real = k.real_part();
    if real.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("kernel".into()));
    }
    let m = DMatrix::from_row_slice(real.rows(), real.cols(), real.as_slice());
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Number of singular values above `sigma_max * tol_ratio`; zero for the
/// zero matrix.
pub fn numerical_rank(k: &Kernel2D, tol_ratio: f64) -> Result<usize> {
    if !(tol_ratio > 0.0 && tol_ratio < 1.0) {
        return Err(Error::invalid("tol_ratio", "must lie in (0, 1)"));
    }
    let s = singular_values(k)?;
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > top * tol_ratio).count())
}
