use std::cell::Cell;

use crate::error::{Error, Result};
use crate::parameters::Mode;

/// `coeff * A1^z1 * A2^z2 * A3^z3 * A4^z4 * B_b`, evaluated per state
/// coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub exponents: [u32; 4],
    /// 1 or 2.
    pub b_index: u8,
    pub coeff: f64,
}

impl Monomial {
    fn key(&self) -> ([u32; 4], u8) {
        (self.exponents, self.b_index)
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// Per-cell monomial lists in compressed row storage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TermLists {
    offsets: Vec<usize>,
    terms: Vec<Monomial>,
}

impl TermLists {
    fn push(&mut self, cell: Vec<Monomial>) {
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        self.terms.extend(cell);
        self.offsets.push(self.terms.len());
    }

    pub fn cell(&self, idx: usize) -> &[Monomial] {
        &self.terms[self.offsets[idx]..self.offsets[idx + 1]]
    }

    pub fn cells(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn total_terms(&self) -> usize {
        self.terms.len()
    }

    fn max_coeff(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.coeff))
    }
}

/// Unnormalized lists for the first column (`(i, 0)`) and first row
/// (`(0, j)`) used by relaxed kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTerms {
    pub column_h: TermLists,
    pub column_v: TermLists,
    pub row_h: TermLists,
    pub row_v: TermLists,
}

/// Parameter-independent coefficients of every kernel cell.
///
/// Cell `(i, j)` of the horizontal (vertical) list holds the monomials whose
/// sum is `k^h[i,j]` (`k^v[i,j]`); in normalized modes each coefficient is a
/// path count times `0.5^(i+j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffCache {
    rows: usize,
    cols: usize,
    mode: Mode,
    horizontal: TermLists,
    vertical: TermLists,
    edges: Option<EdgeTerms>,
    exact: bool,
}

/// Largest integer below which every f64 integer is exact.
const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0;

impl CoeffCache {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn l_max(&self) -> usize {
        self.rows.max(self.cols)
    }

    pub fn horizontal(&self, i: usize, j: usize) -> &[Monomial] {
        self.horizontal.cell(i * self.cols + j)
    }

    pub fn vertical(&self, i: usize, j: usize) -> &[Monomial] {
        self.vertical.cell(i * self.cols + j)
    }

    pub fn edges(&self) -> Option<&EdgeTerms> {
        self.edges.as_ref()
    }

    /// False when some unnormalized path count is at least 2^53.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn total_terms(&self) -> usize {
        self.horizontal.total_terms() + self.vertical.total_terms()
    }
}

/// Applies one propagation step to the lists of the source cell: the
/// horizontal-source terms gain exponent `via_h`, the vertical-source terms
/// gain `via_v`, equal monomials are merged.
fn propagate(
    from_h: &[Monomial],
    from_v: &[Monomial],
    via_h: usize,
    via_v: usize,
    scale: f64,
) -> Vec<Monomial> {
    let step = |t: &Monomial, via: usize| {
        let mut m = *t;
        m.exponents[via] += 1;
        m.coeff *= scale;
        m
    };
    let mut out: Vec<Monomial> = from_h
        .iter()
        .map(|t| step(t, via_h))
        .chain(from_v.iter().map(|t| step(t, via_v)))
        .collect();
    out.sort_by_key(Monomial::key);
    out.dedup_by(|later, kept| {
        if later.key() == kept.key() {
            kept.coeff += later.coeff;
            true
        } else {
            false
        }
    });
    out
}

fn build_lists(rows: usize, cols: usize, scale: f64) -> (TermLists, TermLists) {
    let origin = |b_index| Monomial {
        exponents: [0; 4],
        b_index,
        coeff: 1.0,
    };
    let mut horizontal = TermLists::default();
    let mut vertical = TermLists::default();
    let mut prev_h: Vec<Vec<Monomial>> = vec![Vec::new(); cols];
    let mut prev_v: Vec<Vec<Monomial>> = vec![Vec::new(); cols];
    for i in 0..rows {
        let mut cur_h: Vec<Vec<Monomial>> = Vec::with_capacity(cols);
        let mut cur_v: Vec<Vec<Monomial>> = Vec::with_capacity(cols);
        for j in 0..cols {
            let (h, v) = if i == 0 && j == 0 {
                (vec![origin(1)], vec![origin(2)])
            } else {
                let h = propagate(&prev_h[j], &prev_v[j], 0, 1, scale);
                let v = if j == 0 {
                    Vec::new()
                } else {
                    propagate(&cur_h[j - 1], &cur_v[j - 1], 2, 3, scale)
                };
                (h, v)
            };
            cur_h.push(h);
            cur_v.push(v);
        }
        for (h, v) in cur_h.iter().zip(&cur_v) {
            horizontal.push(h.clone());
            vertical.push(v.clone());
        }
        prev_h = cur_h;
        prev_v = cur_v;
    }
    (horizontal, vertical)
}

thread_local! {
    static CACHE_BUILDS: Cell<usize> = const { Cell::new(0) };
}

/// Number of [`build_cache`] calls made on the current thread.
pub fn cache_builds() -> usize {
    CACHE_BUILDS.with(Cell::get)
}

/// Builds the coefficient cache for an `rows x cols` kernel.
///
/// The horizontal list at `(i, j)` merges `A1 *` the horizontal list and
/// `A2 *` the vertical list of `(i-1, j)`; the vertical list merges `A3 *`
/// and `A4 *` the lists of `(i, j-1)`. The origin holds `B1` and `B2`.
pub fn build_cache(rows: usize, cols: usize, mode: Mode) -> Result<CoeffCache> {
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyGrid { rows, cols });
    }
    CACHE_BUILDS.with(|c| c.set(c.get() + 1));
    let (horizontal, vertical) = build_lists(rows, cols, mode.step_scale());
    let exact = mode != Mode::Unnormalized
        || horizontal.max_coeff().max(vertical.max_coeff()) < EXACT_LIMIT;
    let edges = mode.is_relaxed().then(|| {
        let (column_h, column_v) = build_lists(rows, 1, 1.0);
        let (row_h, row_v) = build_lists(1, cols, 1.0);
        EdgeTerms {
            column_h,
            column_v,
            row_h,
            row_v,
        }
    });
    Ok(CoeffCache {
        rows,
        cols,
        mode,
        horizontal,
        vertical,
        edges,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(exponents: [u32; 4], b_index: u8, coeff: f64) -> Monomial {
        Monomial {
            exponents,
            b_index,
            coeff,
        }
    }

    #[test]
    fn origin_holds_b_terms() {
        let c = build_cache(3, 3, Mode::Unnormalized).unwrap();
        assert_eq!(c.horizontal(0, 0), &[mono([0; 4], 1, 1.0)]);
        assert_eq!(c.vertical(0, 0), &[mono([0; 4], 2, 1.0)]);
    }

    #[test]
    fn cell_one_one_by_hand() {
        // xh[1,1] = A1 xh[0,1] + A2 xv[0,1], xh[0,1] = 0, xv[0,1] = A3 B1 + A4 B2.
        let c = build_cache(2, 2, Mode::Unnormalized).unwrap();
        assert_eq!(
            c.horizontal(1, 1),
            &[mono([0, 1, 0, 1], 2, 1.0), mono([0, 1, 1, 0], 1, 1.0)]
        );
        let n = build_cache(2, 2, Mode::Normalized).unwrap();
        assert_eq!(n.horizontal(1, 1)[0].coeff, 0.25);
    }

    #[test]
    fn first_row_and_column_lists() {
        let c = build_cache(4, 4, Mode::Unnormalized).unwrap();
        // k^h[i,0] = A1^(i-1) (A1 B1 + A2 B2), k^v[i,0] = 0.
        assert_eq!(
            c.horizontal(3, 0),
            &[mono([2, 1, 0, 0], 2, 1.0), mono([3, 0, 0, 0], 1, 1.0)]
        );
        assert!(c.vertical(3, 0).is_empty());
        assert!(c.horizontal(0, 2).is_empty());
    }

    #[test]
    fn sorted_and_degree_conserving() {
        let c = build_cache(9, 6, Mode::Normalized).unwrap();
        for i in 0..9 {
            for j in 0..6 {
                for list in [c.horizontal(i, j), c.vertical(i, j)] {
                    assert!(list.windows(2).all(|w| w[0].key() < w[1].key()));
                    for t in list {
                        assert_eq!(t.degree() as usize, i + j);
                        assert_eq!((t.exponents[0] + t.exponents[1]) as usize, i);
                        assert!(t.coeff > 0.0);
                    }
                }
            }
        }
    }

    /// Enumerates every start state and step order explicitly.
    fn brute_force_terms(i: usize, j: usize, end_h: bool) -> Vec<Monomial> {
        use std::collections::BTreeMap;
        let steps = i + j;
        let mut counts: BTreeMap<([u32; 4], u8), f64> = BTreeMap::new();
        for b_index in [1u8, 2] {
            for mask in 0u32..(1 << steps) {
                if mask.count_ones() as usize != i {
                    continue;
                }
                // bit set = horizontal step (A1 from h, A2 from v).
                let mut in_h = b_index == 1;
                let mut z = [0u32; 4];
                for s in 0..steps {
                    let horizontal = mask & (1 << s) != 0;
                    let idx = match (horizontal, in_h) {
                        (true, true) => 0,
                        (true, false) => 1,
                        (false, true) => 2,
                        (false, false) => 3,
                    };
                    z[idx] += 1;
                    in_h = horizontal;
                }
                if in_h == end_h {
                    *counts.entry((z, b_index)).or_default() += 1.0;
                }
            }
        }
        counts
            .into_iter()
            .map(|((exponents, b_index), coeff)| mono(exponents, b_index, coeff))
            .collect()
    }

    #[test]
    fn matches_path_enumeration() {
        let c = build_cache(6, 5, Mode::Unnormalized).unwrap();
        for i in 0..6 {
            for j in 0..5 {
                assert_eq!(c.horizontal(i, j), brute_force_terms(i, j, true).as_slice());
                assert_eq!(c.vertical(i, j), brute_force_terms(i, j, false).as_slice());
            }
        }
    }

    #[test]
    fn term_count_bound() {
        for (r, c) in [(8, 8), (1, 12), (12, 3), (20, 17)] {
            let cache = build_cache(r, c, Mode::Normalized).unwrap();
            let bound = 2 * r.max(c);
            for i in 0..r {
                for j in 0..c {
                    assert!(cache.horizontal(i, j).len() <= bound);
                    assert!(cache.vertical(i, j).len() <= bound);
                }
            }
        }
    }

    #[test]
    fn exactness_guard() {
        assert!(build_cache(12, 12, Mode::Unnormalized).unwrap().is_exact());
        assert!(!build_cache(40, 40, Mode::Unnormalized).unwrap().is_exact());
        assert!(build_cache(40, 40, Mode::Normalized).unwrap().is_exact());
    }

    #[test]
    fn relaxed_cache_has_unnormalized_edges() {
        let c = build_cache(3, 4, Mode::NormalizedRelaxed).unwrap();
        let e = c.edges().unwrap();
        assert_eq!(e.column_h.cells(), 3);
        assert_eq!(e.row_v.cells(), 4);
        assert!(e.row_v.cell(3).iter().all(|t| t.coeff == 1.0));
        assert!(build_cache(3, 4, Mode::Normalized)
            .unwrap()
            .edges()
            .is_none());
    }

    #[test]
    fn rejects_empty() {
        assert!(build_cache(0, 4, Mode::Normalized).is_err());
    }
}
