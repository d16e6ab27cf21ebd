//! Enumeration and verification of Ulam polynomials.
//!
//! A monic polynomial `P(z) = (z - x_1)...(z - x_n)` is an Ulam polynomial
//! when its coefficient vector, read in the order
//! `z^n + x_1 z^{n-1} + ... + x_n`, is the root tuple itself. Equivalently the
//! tuple is a fixed point of the roots-to-coefficients map. For each degree
//! there are finitely many such polynomials; this crate finds them all by
//! total-degree homotopy continuation and checks the result with independent
//! oracles.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cvec;
pub mod enumerate;
pub mod error;
pub mod homotopy;
pub mod map;
pub mod oracle;
pub mod polyroots;

pub use cvec::{parse_complex, parse_tuple, CVec};
pub use error::{Result, UlamError};
pub use num_complex::Complex64;
