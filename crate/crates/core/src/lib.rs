//! Spatial multiplexing capabilities of a tri-polarized uniform linear array
//! in the near field.
//!
//! The transmitter is a ULA of `2M+1` elements, each carrying three
//! orthogonal infinitesimal dipoles; the receiver is a single tri-polarized
//! element in the yz-plane. The crate provides:
//!
//! - finite-element channel blocks and their scaled Gram matrix
//!   ([`finite_channel`]),
//! - the continuous-aperture (holographic) limits of that Gram matrix and
//!   their closed-form eigenvalues ([`geometry`], [`holographic`]),
//! - waterfilling, activation thresholds and stream counting
//!   ([`multiplexing`]),
//! - large-distance expansions of the thresholds ([`asymptotics`]),
//! - exact region boundaries, maps and the finite-M validation study
//!   ([`regions`]),
//! - the `holomux` command-line front end ([`cli`]).
//!
//! All lengths are in meters; moments `psi_i` carry units of m^-i. SNR values
//! are linear everywhere in the library; the CLI converts from dB.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod finite_channel;
pub mod geometry;
pub mod holographic;
pub mod multiplexing;
pub mod quadrature;
pub mod regions;
mod summation;

pub use error::{Error, Result};
pub use finite_channel::{Mat3, PolarizationConfig, ScaledGram};
pub use geometry::{FiniteArray, Moment, PsiSet, ScenarioGeometry};
pub use holographic::EigenTriple;
pub use multiplexing::{PowerAllocation, ThresholdIndex, ThresholdPair};
