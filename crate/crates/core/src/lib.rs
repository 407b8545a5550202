//! Compression maps on real tuples, the balls they induce, and a small
//! laboratory for smallest-triangle experiments in the unit disc.
//!
//! Modules, bottom up:
//! - [`compression`]: the map `x -> m/x`, mass, gap and their estimates.
//! - [`ball`]: induced balls, admissible points and theorem checkers.
//! - [`configuration`], [`generators`]: planar point sets in the unit disc.
//! - [`oracle`]: exact minimal-triangle enumeration and bound ratios.
//! - [`anneal`]: simulated annealing on the minimal triangle area.
//! - [`audit`]: seeded sweeps over the checkers.
//! - [`cli`]: the `heilbronn` command.

pub mod anneal;
pub mod audit;
pub mod ball;
pub mod cli;
pub mod compression;
pub mod configuration;
pub mod error;
pub mod generators;
pub mod numeric;
pub mod oracle;

pub use error::{Error, Result};
