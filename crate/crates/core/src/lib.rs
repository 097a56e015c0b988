//! Frequency probability in the style of von Mises, and a GHZ laboratory
//! built on it.
//!
//! * [`collectives`]: label sequences, relative frequencies, stabilization.
//! * [`randomness`]: place selections and the randomness audit.
//! * [`combining`]: pairing, conditional frequencies, combinability and
//!   independence.
//! * [`measures`]: finite measures, the Kolmogorov-style GHZ contradiction,
//!   absolute continuity, singularity and Radon–Nikodym densities.
//! * [`ghz`]: three-photon state, Born-rule sampling per setting, exhaustive
//!   local-hidden-variable search and the counterfactual audit.
//! * [`cli`]: the batch scenario runner behind the `kollektiv` binary.

pub mod cli;
pub mod collectives;
pub mod combining;
pub mod error;
pub mod ghz;
pub mod io;
pub mod measures;
pub mod randomness;

pub use error::{Error, Result};
