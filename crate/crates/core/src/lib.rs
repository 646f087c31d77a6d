//! Turbo lattices: lattice construction, analysis and decoding built on
//! parallel concatenated convolutional (turbo) codes.
//!
//! The crate covers the whole pipeline:
//!
//! * [`gf2poly`] — polynomial arithmetic over GF(2), inverses modulo
//!   `x^L - 1`, circulant matrices (the algebra behind tail-biting).
//! * [`binmat`] — dense bit-packed GF(2) matrices.
//! * [`convcode`] — systematic feed-back convolutional encoders, zero-tail
//!   termination, tail-biting block-code conversion and trellis construction.
//! * [`interleaver`] — S-random and nested interleavers, the append
//!   construction.
//! * [`turbocode`] — parallel concatenated generator matrices, nested turbo
//!   families and exhaustive weight spectra.
//! * [`lattice`] — Construction A / Construction D bases, exact figures of
//!   merit, short-vector enumeration.
//! * [`decoder`] — BCJR, iterative turbo decoding, the mod-2 coordinate
//!   metric and the multi-stage lattice decoder.
//! * [`sim`] — reproducible unconstrained-AWGN Monte Carlo harness and the
//!   analyzer that backs the command line tool.

// Index loops over trellis states and matrix offsets read better than
// iterator chains in this code base.
#![allow(clippy::needless_range_loop)]

pub mod binmat;
pub mod convcode;
pub mod decoder;
pub mod gf2poly;
pub mod interleaver;
pub mod lattice;
pub mod sim;
pub mod turbocode;

mod error;

pub use error::{Error, Result};
