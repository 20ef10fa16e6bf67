//! Extra probability charge carried past fixed points by a localized wave
//! packet riding on a plane wave.
//!
//! The central quantity is the charge difference between two probe points,
//! evaluated from the excitation wave function at `t = 0` without any time
//! integration (see [`charge`]). The remaining modules provide the closed-form
//! Gaussian benchmark ([`gaussian`]), time propagation including a localized
//! laser pulse ([`evolution`]), brute-force time-integration oracles
//! ([`oracle`]) and the scenario drivers behind the `chargeflow` CLI
//! ([`scenario`]).
//!
//! Numerics are generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the scalar to `f64`, which is what the CLI uses.

// `!(a <= b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charge;
pub mod error;
pub mod evolution;
pub mod gaussian;
pub mod grid;
pub mod oracle;
pub mod scalar;
pub mod scenario;
pub mod units;
pub mod wave;

pub use error::{Error, Result};
pub use grid::Grid;
pub use scalar::Real;
pub use units::UnitSystem;
pub use wave::{PlaneWave, SpectralFunction, WaveFunction};

pub type Grid64 = Grid<f64>;
pub type UnitSystem64 = UnitSystem<f64>;
pub type WaveFunction64 = WaveFunction<f64>;
pub type SpectralFunction64 = SpectralFunction<f64>;
pub type PlaneWave64 = PlaneWave<f64>;
pub type GaussianPacket64 = gaussian::GaussianPacket<f64>;
pub type ChargeBreakdown64 = charge::ChargeBreakdown<f64>;
pub type ChargeIntegrator64 = charge::ChargeIntegrator<f64>;
pub type PulseParams64 = evolution::PulseParams<f64>;
pub type SolverConfig64 = evolution::SolverConfig<f64>;
pub type PulseRun64 = evolution::PulseRun<f64>;
pub type CurrentSample64 = oracle::CurrentSample<f64>;
pub type IntegrationOptions64 = oracle::IntegrationOptions<f64>;
pub type IntegratedCharge64 = oracle::IntegratedCharge<f64>;
