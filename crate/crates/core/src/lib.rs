//! Current-current deformations of the gl(r|r) WZW model at level `n`:
//! a symbolic OPE engine, the resulting RG flow, and the observables and
//! lattice checks built on top of it.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coeff;
pub mod cylinder;
pub mod flow;
pub mod observables;
pub mod ope;

pub use coeff::{rat, Coeff, Monomial, Rational};
