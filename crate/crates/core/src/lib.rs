//! Single-photon pulses reflecting off a one-sided cavity that contains a
//! three-level atom, and the controlled-Z gate you can build out of that.
//!
//! The atom's ground-state qubit selects which dipole transition the cavity
//! talks to, so the two qubit branches see different dressed-cavity
//! susceptibilities and the reflected photon picks up a branch-dependent
//! phase. Scattering the photon twice (store, reflect, retrieve, reflect)
//! stacks those phases into a conditional pi.
//!
//! The crate is organised around two independent routes to the same answer:
//! [`transfer`] evaluates the closed-form reflection coefficient on a
//! frequency grid, while [`dynamics`] integrates the cavity/atom equations of
//! motion against the incident pulse in the time domain. The two must agree
//! to solver accuracy, and the test suite holds them to that.
//!
//! Start with [`model::Params`] and [`wavepacket::Wavepacket`], then either
//! call [`transfer::scatter_spectrum`] or [`protocol::run_gate`], or look at
//! the `examples/` directory which walks each capability end to end.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod protocol;
pub mod sweep;
pub mod transfer;
pub mod wavepacket;

pub use error::Error;
