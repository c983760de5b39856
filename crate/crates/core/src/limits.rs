use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resource caps shared by the enumeration, cover and raster routines.
///
/// None of these are mathematical constants; they only bound memory and time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest level `n` for which all points of `V_n` are materialized.
    pub max_level: u32,
    /// Largest level for the streaming distinct-count.
    pub max_stream_level: u32,
    /// Largest number of materialized lattice points (alphabet size to the power `n`).
    pub max_points: u64,
    /// Largest `resolution * alphabet^depth` accepted by the rasterizer.
    pub max_raster_work: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_level: 12,
            max_stream_level: 15,
            max_points: 1 << 24,
            max_raster_work: 1 << 32,
        }
    }
}

impl Limits {
    pub(crate) fn check_level(&self, level: u32) -> Result<()> {
        if level > self.max_level {
            return Err(Error::ResourceLimit {
                what: "materialized level",
                requested: level.into(),
                limit: self.max_level.into(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_points(&self, alphabet: usize, level: u32) -> Result<u64> {
        let points = (alphabet as u128).checked_pow(level).unwrap_or(u128::MAX);
        if points > self.max_points as u128 {
            return Err(Error::ResourceLimit {
                what: "materialized lattice points",
                requested: points,
                limit: self.max_points.into(),
            });
        }
        Ok(points as u64)
    }
}
