//! Numerical Mellin operator calculus on the half-line.
//!
//! Functions on `R+` are sampled on a logarithmic grid `t_j = e^{u_j}`. Every
//! operator acts internally on the weighted log samples `g(u) = t^{1/p} f(t)`,
//! where Mellin convolutions become Fourier multipliers and weighted shifts
//! become near-translations. The crate provides
//!
//! * [`grid`]: the grid, the maps `E` and `Φ`, and the Mellin transform;
//! * [`symbols`]: multiplier symbols `s_y`, `r_y`, `p_y^±` and bivariate
//!   pseudodifferential symbols with boundary and fiber data;
//! * [`shifts`]: slowly oscillating fixtures, shifts, weighted shift
//!   operators and Neumann inverses of binomial operators;
//! * [`operators`]: convolution and pseudodifferential operators, the
//!   principal-value Cauchy oracle, and operator analytics;
//! * [`constructions`]: the binomial symbols, the Neumann-series symbol,
//!   `h`, the regularizer symbol `f` and `g_y`;
//! * [`fredholm`]: disk lemmas, ellipticity, winding numbers, kernel
//!   estimates and the homotopy scan.

pub mod catalog;
pub mod constructions;
pub mod error;
pub mod fredholm;
pub mod grid;
pub mod io;
pub mod operators;
pub mod shifts;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
