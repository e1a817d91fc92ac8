//! Experiment driver for the `fluxladder` simulator: configuration,
//! coupling-ratio sweeps, output files, SVG figures and the verification
//! suite behind `fluxladder verify`.

pub mod config;
pub mod figures;
pub mod output;
pub mod sweep;
pub mod verify;
