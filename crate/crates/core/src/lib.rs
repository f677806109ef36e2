#![no_std]
//! Numerics for Schottky hyperbolic surfaces: limit-set dimension, Selberg
//! zeta function and resonances, Patterson–Sullivan measure, resolvent
//! residue at δ, the resonance trace formula and wave decay.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dimension;
pub mod error;
pub mod hyperbolic;
pub mod resolvent;
pub mod schottky;
pub mod special;
pub mod trace;
pub mod wave;
pub mod zeta;

pub use error::{Error, Result};
