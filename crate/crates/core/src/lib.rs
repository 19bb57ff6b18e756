//! Simulator and analysis toolkit for nonlinear three-state discrete-time
//! quantum walks on the line with a Grover coin and a Kerr-type
//! amplitude-dependent phase.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod evolution;
pub mod io;
pub mod lattice;
pub mod observables;
pub mod svg;

pub use analysis::{
    detect_detrapping_time, detect_saturation, fit_power_law, DetrapParams, DetrapResult,
    PowerLawFit, Saturation,
};
pub use error::{Error, Result};
pub use evolution::{evolve, step, RunRecord, StepParams};
pub use lattice::{coin_basis, Coin, CoinBasis, CoinVector, WalkerState};
pub use observables::{
    participation_ratio, phase_portrait, probability_density, survival_probability, DensityProfile,
    PortraitPoint, TimeSeries,
};
