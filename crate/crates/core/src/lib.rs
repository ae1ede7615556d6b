//! Two-dimensional state-space layer built on the Roesser recurrence.
//!
//! The layer keeps a horizontal and a vertical state per grid cell and is
//! linear, so its response to an input grid is a causal 2-D convolution with
//! a kernel that depends only on the parameters. This crate evaluates that
//! recurrence directly ([`recurrence`]), compiles the kernel in closed form
//! from a parameter-independent coefficient cache ([`compiler`]), applies the
//! layer with FFT convolution ([`conv`]), and provides the separable
//! outer-product baseline plus rank measurement ([`s4nd`]).
//!
//! ```
//! use ssm2d::{build_cache, compile_kernel, impulse_response, Mode, SsmParams};
//!
//! // A1 = A2 = A3 = 1, A4 = 0, B = (1, 0), C = (1, 0): binomial kernel.
//! let params = SsmParams::real([[1.0], [1.0], [1.0], [0.0], [1.0], [0.0], [1.0], [0.0]]).unwrap();
//! let cache = build_cache(5, 5, Mode::Unnormalized).unwrap();
//! let kernel = compile_kernel(&params, &cache, Mode::Unnormalized).unwrap();
//! assert_eq!(kernel.real_part().get(4, 2), 6.0);
//!
//! let oracle = impulse_response(&params, 5, 5, Mode::Unnormalized).unwrap();
//! assert_eq!(oracle.real_part(), kernel.real_part());
//! ```

pub mod bench;
pub mod cli;
pub mod compiler;
pub mod conv;
mod error;
pub mod formats;
mod grid;
pub mod parameters;
pub mod recurrence;
pub mod s4nd;
pub mod verify;

pub use compiler::{
    build_cache, compile_kernel, compile_kernel_stack, compile_states, kernel_gradient,
    value_gradient, CoeffCache, Flip, Kernel2D, KernelGradient, KernelStack, Monomial,
    StateKernels,
};
pub use conv::{
    apply_layer, apply_layer_recurrent, conv2d_direct, conv2d_fft, ImageTensor, SsmLayer,
};
pub use error::{Error, Result};
pub use grid::Grid;
pub use parameters::{
    constrain, init_raw, sigmoid, Directions, LayerConfig, LayerParams, Mode, Part, RawParams,
    RawSsm, ScalarField, Slot, SsmParams,
};
pub use recurrence::{impulse_response, scan, scan_output, StateGrid};
pub use s4nd::{kernel_1d, numerical_rank, outer_kernel, singular_values, Ssm1dParams};

pub use num_complex::Complex64;
