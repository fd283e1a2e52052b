//! Thin wrappers over `libm` for the float routines core does not provide.

pub(crate) use libm::{ceil, cos, exp, log, log1p, log2, pow, round, sin, sqrt};
