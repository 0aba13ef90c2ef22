//! Vortex-sheet dynamics for the 2D incompressible Euler equations.
//!
//! The library works with a closed, simple, regular interface carrying a
//! vortex-sheet strength and builds the machinery around it:
//!
//! - [`curve`] — periodic-grid numerics: spectral differentiation, quadrature,
//!   arc-length reparametrization, chord-arc and Hölder diagnostics,
//!   mollification.
//! - [`biot_savart`] — Cauchy/blob kernels, velocity evaluation off the sheet,
//!   desingularized Birkhoff–Rott operators (single and multi-sheet), Plemelj
//!   traces, circulation, pressure jumps and the weighted Hilbert transform.
//! - [`subsolution`] — the explicit order-3 interface construction, the
//!   turbulence-zone map, boundary data, Lagrange interpolation coefficients
//!   and the equi-chord-arc certificate.
//! - [`dissipation`] — energy-dissipation functionals with closed-form
//!   maximizers, the flat-interface fan calculator and the leading
//!   dissipation density.
//! - [`blob`] — the δ-regularized vortex-blob time stepper with conservation
//!   diagnostics, macroscopic field sampling and zone overlays.
//! - [`config`], [`experiment`], [`output`] — presets, experiment
//!   orchestration and CSV/JSON/SVG emission.
//!
//! Every runnable capability has a matching program under `examples/`; the
//! `vortexzone` binary exposes the same pipelines as subcommands.

pub mod biot_savart;
pub mod blob;
pub mod config;
pub mod curve;
pub mod dissipation;
mod error;
pub mod experiment;
pub mod numerics;
pub mod output;
pub mod subsolution;

pub use error::Error;

/// Result type used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Complex scalar used for plane points and velocities (R^2 ≃ C).
pub type Complex = num_complex::Complex64;
