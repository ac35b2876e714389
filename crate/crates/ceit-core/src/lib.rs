//! Simulation of cavity-assisted EIT cooling of a single trapped atom.
//!
//! A single Λ-type atom sits in a standing-wave trap inside a driven
//! high-finesse cavity: one ground state couples to the excited state through
//! the cavity mode, the other through an external control laser, and a weak
//! probe drives the cavity. This crate computes
//!
//! * the non-Hermitian dressed states of the control-driven atom–cavity
//!   system and weak-probe excitation/transmission spectra ([`dressed`]),
//! * heating and cooling rates `A±` per motional axis from Lamb-Dicke
//!   resolvent perturbation theory, the closed-form cavity-EIT expression on
//!   the Raman resonance line, and free-space EIT limits ([`rates`]),
//! * full Lindblad master-equation trajectories of the atom + one trapped
//!   mode, used as ground truth for the rate equations ([`oracle`]),
//! * 2-D cooling/heating maps over detuning grids with deterministic
//!   parallel evaluation ([`scan`]),
//! * sideband-spectrum synthesis and thermometry inversions ([`thermometry`]).
//!
//! All frequencies are angular (rad/µs) internally; times are in µs.
//! Conversions to/from the linear-MHz convention used by configuration files
//! live in [`units`].

pub mod dressed;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod params;
pub mod rates;
pub mod scan;
pub mod thermometry;
pub mod units;

pub use params::{Axis, MhzParams, SystemParams};

use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is out of its allowed range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A caller-facing precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Bad configuration input (file contents, grid spec, truncation caps).
    #[error("configuration error: {0}")]
    Config(String),
    /// A resolvent or steady-state solve hit an (effectively) singular matrix.
    #[error("divergent resolvent: {0}")]
    Divergent(String),
    /// The Liouvillian kernel is not one-dimensional.
    #[error("degenerate steady-state kernel (dimension {dim})")]
    DegenerateKernel { dim: usize },
    /// Time integration failed (step-size underflow, non-finite state).
    #[error("integration failure: {0}")]
    Integration(String),
    /// A scan finished only partially; the listed row tiles failed.
    #[error("partial scan result: rows {rows:?} failed: {detail}")]
    PartialScan { rows: Vec<usize>, detail: String },
    /// I/O while writing an output artifact.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
