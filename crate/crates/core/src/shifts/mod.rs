//! Slowly oscillating coefficients and shifts, the weighted shift operators
//! `U_γ`, and Neumann inversion of binomials `I - vU_γ`.

mod fixtures;
mod neumann;
mod operator;
mod shift;

pub use fixtures::{FiberEnd, FiberPoint, FiberSampling, SoFamily, SoFunction, SoKind};
pub use neumann::{neumann_apply, NeumannInverse, NeumannReport, WeightedShift, MAX_TERMS};
pub use operator::{shift_operator, ShiftOperator};
pub(crate) use operator::stencil_at;
pub use shift::{
    DirectedShift, IterateValue, ShiftDirection, ShiftIterate, SoShift, MAX_DISPLACEMENT,
    MAX_ITERATE,
};
