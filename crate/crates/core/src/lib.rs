//! Feedback-assisted private communication over a thermal-noise lossy bosonic
//! wiretap channel.
//!
//! The crate is organised bottom-up:
//!
//! * [`infotheory`]: closed-form rates, capacities, error bounds and the
//!   privacy-leakage budget.
//! * [`channel`]: the induced classical channels (thermal wiretap and general
//!   affine), Eve's noisy round-0 tap and the counter-based random lanes.
//! * [`protocol`]: codebook, coefficient schedule, Alice/Bob round state and the
//!   full-covariance estimator used to cross-check the recursion.
//! * [`sim`]: Monte Carlo experiment runner, report and verdict table.
//! * [`acceptance`]: the pinned acceptance checks shared by the test suite and
//!   the `verify` command.
//!
//! Everything in `infotheory`, `channel` and `protocol` is generic over the
//! scalar type through [`Real`]; the simulation harness runs in `f64`. The
//! aliases below name the common instantiations.

pub mod acceptance;
pub mod channel;
mod error;
pub mod infotheory;
pub mod protocol;
mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Real;

pub type RateQuery64 = infotheory::RateQuery<f64>;
pub type BoundQuery64 = infotheory::BoundQuery<f64>;
pub type LeakageBudget64 = infotheory::LeakageBudget<f64>;
pub type ThermalWiretapParams64 = channel::ThermalWiretapParams<f64>;
pub type NoiseModel64 = channel::NoiseModel<f64>;
pub type AffineChannel64 = channel::AffineChannel<f64>;
pub type EveTap64 = channel::EveTap<f64>;
pub type Codebook64 = protocol::Codebook<f64>;
pub type SkSchedule64 = protocol::SkSchedule<f64>;
pub type Transcript64 = protocol::Transcript<f64>;

pub type RateQuery32 = infotheory::RateQuery<f32>;
pub type BoundQuery32 = infotheory::BoundQuery<f32>;
pub type Codebook32 = protocol::Codebook<f32>;
pub type SkSchedule32 = protocol::SkSchedule<f32>;
