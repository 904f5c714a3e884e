//! Static Unruh-DeWitt detector outside a Schwarzschild black hole and its
//! ℝP³ geon quotient: mode solver, response functions and transition rates.
//!
//! Units throughout are 2M = 1, so the horizon sits at r = 1 and the Hawking
//! temperature is 1/(4π).

pub mod error;
pub mod quadrature;
pub mod radial;
pub mod rates;
pub mod response;
pub mod spacetime;
pub mod table;

pub use error::{Error, Result};
pub use radial::{amplitude_sq, solve_modes, ModeSolution, SolverConfig};
pub use rates::{rate, rate_bh, rate_j, sweep_rates, RateConfig, RatePoint, RateResult};
pub use response::{response, ResponseConfig, ResponseResult, SwitchingProfile, VacuumKind};
pub use table::{build_table, CacheOutcome, FrequencyGrid, ModeTable, TableCache, TableParams, TableSource};
pub use spacetime::{DetectorWorldline, KillingFrequency, LocalFrequency};
