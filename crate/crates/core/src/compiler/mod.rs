//! Closed-form kernel compilation.
//!
//! [`build_cache`] runs a lattice-path dynamic program once per grid size and
//! mode; [`compile_kernel`] then evaluates every cell's monomials against
//! power tables of the diagonal `A` spectra in `O(L_tot * L_max * N)`, with no
//! dependence on batch size. [`kernel_gradient`] differentiates the same sum.

mod cache;
mod gradient;
mod kernel;

pub use cache::{build_cache, cache_builds, CoeffCache, EdgeTerms, Monomial, TermLists};
pub use gradient::{kernel_gradient, value_gradient, KernelGradient, ValueGradient};
pub use kernel::{
    compile_kernel, compile_kernel_stack, compile_states, stack_compiles, Flip, Kernel2D,
    KernelStack, StateKernels,
};
