//! Analytic derivatives of the compiled kernel.
//!
//! The kernel is a polynomial in the constrained values, so every partial is
//! obtained by differentiating the cached monomials term by term. Partials
//! with respect to raw parameters then follow by the chain rule through the
//! constraint maps; the layer consumes `Re(K)`, so raw partials are real.

use num_complex::Complex64;

use super::cache::{CoeffCache, Monomial};
use super::kernel::{check_compile, PowerTable};
use crate::error::{Error, Result};
use crate::parameters::{
    constrain, constrain_derivative, Mode, Part, RawSsm, ScalarField, Slot, SsmParams,
};

/// `∂K[i,j] / ∂V` for every constrained value `V = slot[g]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueGradient {
    pub rows: usize,
    pub cols: usize,
    pub n: usize,
    data: Vec<Complex64>,
}

impl ValueGradient {
    /// Row-major grid of complex partials.
    pub fn partial(&self, slot: Slot, g: usize) -> &[Complex64] {
        let cells = self.rows * self.cols;
        let at = (slot.index() * self.n + g) * cells;
        &self.data[at..at + cells]
    }
}

/// `∂Re(K[i,j]) / ∂θ` for every raw scalar `θ`, in [`RawSsm::flat_index`]
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGradient {
    pub rows: usize,
    pub cols: usize,
    pub field: ScalarField,
    pub n: usize,
    data: Vec<f64>,
}

impl KernelGradient {
    pub fn len(&self) -> usize {
        self.data.len() / (self.rows * self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Row-major grid of partials for the raw scalar at `flat` index.
    pub fn flat(&self, flat: usize) -> &[f64] {
        let cells = self.rows * self.cols;
        &self.data[flat * cells..(flat + 1) * cells]
    }

    pub fn partial(&self, slot: Slot, part: Part, g: usize) -> &[f64] {
        let p = match part {
            Part::Value => 0,
            Part::Angle => 1,
        };
        self.flat((slot.index() * self.field.parts() + p) * self.n + g)
    }
}

struct Accumulator<'a> {
    table: &'a PowerTable,
    params: &'a SsmParams,
    cells: usize,
    n: usize,
    data: Vec<Complex64>,
}

impl Accumulator<'_> {
    /// Adds the partials of `factor * Σ_terms coeff Π A^z B_b C_out[g]` at `cell`,
    /// where `out` is 0 for the horizontal readout (`C1`) and 1 for `C2`.
    fn add(&mut self, terms: &[Monomial], out: usize, factor: f64, cell: usize) {
        let (n, cells) = (self.n, self.cells);
        let c = self.params.c(out);
        for t in terms {
            let z = t.exponents;
            let b = self.params.b(t.b_index as usize - 1);
            let rows: [&[Complex64]; 4] = std::array::from_fn(|s| self.table.row(s, z[s]));
            let lowered: [Option<&[Complex64]>; 4] =
                std::array::from_fn(|s| (z[s] > 0).then(|| self.table.row(s, z[s] - 1)));
            let coeff = t.coeff * factor;
            for g in 0..n {
                let powers = [rows[0][g], rows[1][g], rows[2][g], rows[3][g]];
                let mono = powers[0] * powers[1] * powers[2] * powers[3] * coeff;
                for s in 0..4 {
                    if let Some(low) = lowered[s] {
                        let mut d = low[g] * (z[s] as f64) * coeff;
                        for (u, &pw) in powers.iter().enumerate() {
                            if u != s {
                                d *= pw;
                            }
                        }
                        self.data[(s * n + g) * cells + cell] += d * b[g] * c[g];
                    }
                }
                let b_slot = 4 + t.b_index as usize - 1;
                self.data[(b_slot * n + g) * cells + cell] += mono * c[g];
                self.data[((6 + out) * n + g) * cells + cell] += mono * b[g];
            }
        }
    }
}

/// Partials of the kernel with respect to every constrained value.
pub fn value_gradient(params: &SsmParams, cache: &CoeffCache, mode: Mode) -> Result<ValueGradient> {
    check_compile(params, cache, mode)?;
    let (rows, cols) = cache.shape();
    let n = params.n();
    let cells = rows * cols;
    let table = PowerTable::new(params, cache.l_max());
    let mut acc = Accumulator {
        table: &table,
        params,
        cells,
        n,
        data: vec![Complex64::new(0.0, 0.0); 8 * n * cells],
    };
    let edges = cache.edges();
    for i in 0..rows {
        for j in 0..cols {
            let cell = i * cols + j;
            match edges {
                Some(e) if i == 0 => {
                    acc.add(e.row_h.cell(j), 0, 2.0, cell);
                    acc.add(e.row_v.cell(j), 1, 2.0, cell);
                }
                Some(e) if j == 0 => {
                    acc.add(e.column_h.cell(i), 0, 2.0, cell);
                    acc.add(e.column_v.cell(i), 1, 2.0, cell);
                }
                _ => {
                    acc.add(cache.horizontal(i, j), 0, 1.0, cell);
                    acc.add(cache.vertical(i, j), 1, 1.0, cell);
                }
            }
        }
    }
    Ok(ValueGradient {
        rows,
        cols,
        n,
        data: acc.data,
    })
}

/// Partials of `Re(K)` with respect to every raw scalar of `raw`.
pub fn kernel_gradient(raw: &RawSsm, cache: &CoeffCache, mode: Mode) -> Result<KernelGradient> {
    let params = constrain(raw);
    let values = value_gradient(&params, cache, mode)?;
    let (rows, cols, n) = (values.rows, values.cols, values.n);
    let cells = rows * cols;
    let field = raw.field();
    let parts: &[Part] = match field {
        ScalarField::Real => &[Part::Value],
        ScalarField::Complex => &[Part::Value, Part::Angle],
    };
    let mut data = vec![0.0; raw.len() * cells];
    for slot in Slot::ALL {
        for &part in parts {
            for g in 0..n {
                let dv = constrain_derivative(raw, slot, part, g);
                let at = raw.flat_index(slot, part, g) * cells;
                for (dst, dk) in data[at..at + cells].iter_mut().zip(values.partial(slot, g)) {
                    *dst = (dk * dv).re;
                }
            }
        }
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("kernel gradient".into()));
    }
    Ok(KernelGradient {
        rows,
        cols,
        field,
        n,
        data,
    })
}
