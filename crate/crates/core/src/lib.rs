//! Exact tools for self-similar Cantor sumsets `E_u = E + uE'` and the planar
//! Besicovitch set formed by the segments joining two Cantor sets.
//!
//! * [`digits`]: digit systems, exact parameters, first-nonzero-digit utilities.
//! * [`lattice`]: enumeration of the digit lattices `V_n` and collision detection.
//! * [`classify`]: decision procedures for positive measure versus thin sumsets.
//! * [`measure`]: exact interval covers, union measure and dimension estimates.
//! * [`fourier`]: the Fourier transform of the canonical measure as a cosine product.
//! * [`geometry`]: direction range, horizontal sections and rasterization.

pub mod classify;
pub mod digits;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod lattice;
pub mod limits;
pub mod measure;
pub mod pgm;
pub mod selftest;

pub use digits::{star, star_u64, DigitSystem, Fraction, Interval, Param, RationalParam, SystemLabel, Value};
pub use error::{Error, Result};
pub use lattice::{CollisionRecord, CollisionReport, DigitLattice, LatticePoint, LevelKeys, LevelSummary};
pub use limits::Limits;
