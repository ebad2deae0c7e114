//! Achievable rate regions of the two-user real Gaussian multiple-access
//! channel when both users send uncoded PAM.
//!
//! - [`gap`]: Q-function, PAM error probability and the SNR gap.
//! - [`scheduler`]: time-phase schedules for the superposition corner points.
//! - [`region`]: region boundaries for six transmission schemes.
//! - [`sim`]: symbol-level Monte Carlo check of a schedule.
//! - [`io`] and [`cli`]: file formats and the `macregion` command line.

pub mod cli;
pub mod error;
pub mod gap;
pub mod io;
pub mod region;
pub mod scheduler;
pub mod sim;

pub use error::{MacError, Result};
pub use gap::{GapParams, PamSpec};
pub use region::{RatePoint, RateRegion, Scheme};
pub use scheduler::{Phase, Scenario, Schedule, Target};
pub use sim::{SimReport, SumConstellation};
