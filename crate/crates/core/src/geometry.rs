//! The planar set `B`: segments from `z in E` (height 0) to `z' in E' = c E_beta + i`
//! (height 1), its horizontal sections, and rasterization.
//!
//! At height `h` the section is `(1-h) E + h c E_beta = (1-h) E_u` with
//! `u = c h / (1-h)`, so every row of the picture is an exact sumset cover.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::section_to_u;
use crate::digits::{DigitSystem, Fraction, Interval, Param, Value};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::measure::{cover_at_depth, exact_cover, factor_cover, IntegerCover};

/// Horizontal offsets `Re(z' - z)` of the segments of `B`, and the matching slopes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DirectionRange {
    pub lo: Value,
    pub hi: Value,
    /// `1 / lo`: the steepest segment leaning left.
    pub slope_lo: Value,
    /// `1 / hi`.
    pub slope_hi: Value,
}

/// `[-max_alpha / (b-1), c max_beta / (b-1)]`.
pub fn direction_range(system: &DigitSystem) -> DirectionRange {
    let b1 = BigRational::from_integer((system.base() - 1).into());
    let lo = -BigRational::from_integer(system.max_alpha().into()) / &b1;
    let hi = BigRational::from_integer((system.second_scale() * system.max_beta()).into()) / &b1;
    DirectionRange {
        slope_lo: Value::Exact(lo.recip()),
        slope_hi: Value::Exact(hi.recip()),
        lo: Value::Exact(lo),
        hi: Value::Exact(hi),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DirectionSample {
    pub samples: u64,
    pub digits: u32,
    pub min: f64,
    pub max: f64,
    /// Every sampled offset lies in [`direction_range`], checked in integers.
    pub all_inside: bool,
}

const SAMPLE_CHUNK: u64 = 1 << 14;

/// Offsets `Re(z' - z)` for random digit strings truncated at the largest
/// depth whose numerators fit comfortably in `i128`.
pub fn sample_directions(system: &DigitSystem, samples: u64, seed: u64) -> Result<DirectionSample> {
    if samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    let b = system.base() as u128;
    let c = system.second_scale() as i128;
    let mut digits = 0u32;
    let mut scale: u128 = 1;
    while let Some(next) = scale.checked_mul(b).filter(|&s| s < 1u128 << 100) {
        scale = next;
        digits += 1;
    }
    let alpha = system.alpha_digits();
    let beta = system.beta_digits();
    let lo_num = -(system.max_alpha() as i128) * scale as i128;
    let hi_num = c * system.max_beta() as i128 * scale as i128;
    let b1 = b as i128 - 1;

    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let (min, max, inside) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = SAMPLE_CHUNK.min(samples - chunk * SAMPLE_CHUNK);
            let mut min = i128::MAX;
            let mut max = i128::MIN;
            let mut inside = true;
            for _ in 0..count {
                let (mut z, mut zp) = (0i128, 0i128);
                for _ in 0..digits {
                    z = z * b as i128 + alpha[rng.gen_range(0..alpha.len())] as i128;
                    zp = zp * b as i128 + beta[rng.gen_range(0..beta.len())] as i128;
                }
                let d = c * zp - z;
                inside &= d * b1 >= lo_num && d * b1 <= hi_num;
                min = min.min(d);
                max = max.max(d);
            }
            (min, max, inside)
        })
        .reduce(
            || (i128::MAX, i128::MIN, true),
            |x, y| (x.0.min(y.0), x.1.max(y.1), x.2 && y.2),
        );
    let s = scale as f64;
    Ok(DirectionSample {
        samples,
        digits,
        min: min as f64 / s,
        max: max as f64 / s,
        all_inside: inside,
    })
}

/// Depth-`n` cover of the section `B_h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SectionLine {
    pub h: Value,
    /// Sumset parameter of the section; absent at `h = 0` and `h = 1`.
    pub u: Option<Param>,
    pub level: u32,
    pub union_measure: Value,
    pub intervals: Vec<Interval>,
}

fn scaled_exact(cover: &IntegerCover, scale: &BigRational) -> (Value, Vec<Interval>) {
    (Value::Exact(cover.union_measure(scale)), cover.intervals(scale))
}

/// Depth-`depth` cover of `B_h` for `h` in `[0, 1]`.
pub fn section_cover(system: &DigitSystem, h: &Value, depth: u32, limits: &Limits) -> Result<SectionLine> {
    if depth == 0 {
        return Err(Error::invalid("depth", "must be at least 1"));
    }
    let one = BigRational::one();
    let (endpoint, h_param) = match h {
        Value::Exact(r) if r.is_zero() => (Some(false), None),
        Value::Exact(r) if r.is_one() => (Some(true), None),
        Value::Exact(r) if r.is_negative() || r > &one => {
            return Err(Error::invalid("h", format!("{h} is not in [0, 1]")));
        }
        Value::Exact(r) => {
            let f = Fraction::new(r.numer().magnitude().clone(), r.denom().magnitude().clone())?;
            (None, Some(Param::Rational(f)))
        }
        Value::Float(x) if *x == 0.0 => (Some(false), None),
        Value::Float(x) if *x == 1.0 => (Some(true), None),
        Value::Float(x) if !(*x > 0.0 && *x < 1.0) => {
            return Err(Error::invalid("h", format!("{x} is not in [0, 1]")));
        }
        Value::Float(x) => (None, Some(Param::irrational(*x)?)),
    };
    if let Some(top) = endpoint {
        let (digits, scale) = if top {
            (
                system.beta_digits(),
                BigRational::from_integer(system.second_scale().into()),
            )
        } else {
            (system.alpha_digits(), one)
        };
        let cover = factor_cover(system.base(), digits, depth, limits)?;
        let (union_measure, intervals) = scaled_exact(&cover, &scale);
        return Ok(SectionLine {
            h: h.clone(),
            u: None,
            level: depth,
            union_measure,
            intervals,
        });
    }
    let h = &h_param.expect("interior height");
    let sp = section_to_u(h, system)?;
    let est = cover_at_depth(system, &sp.u, depth, true, limits)?;
    let (union_measure, intervals) = match h {
        Param::Rational(f) => {
            let s = one - f.to_big_rational();
            let scale = |v: &Value| Value::Exact(v.as_exact().expect("rational cover") * &s);
            (
                scale(&est.union_measure),
                est.intervals
                    .unwrap_or_default()
                    .iter()
                    .map(|iv| Interval {
                        lo: scale(&iv.lo),
                        hi: scale(&iv.hi),
                    })
                    .collect(),
            )
        }
        Param::Irrational(x) => {
            let s = 1.0 - x;
            (
                Value::Float(est.union_measure.to_f64() * s),
                est.intervals
                    .unwrap_or_default()
                    .iter()
                    .map(|iv| Interval {
                        lo: Value::Float(iv.lo.to_f64() * s),
                        hi: Value::Float(iv.hi.to_f64() * s),
                    })
                    .collect(),
            )
        }
    };
    Ok(SectionLine {
        h: match h {
            Param::Rational(f) => Value::Exact(f.to_big_rational()),
            Param::Irrational(x) => Value::Float(*x),
        },
        u: Some(sp.u),
        level: depth,
        union_measure,
        intervals,
    })
}

/// Occupancy bitmap of `B`. Row `r` sits at height `h = r / (height - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub depth: u32,
    /// Horizontal extent: column `x` covers `[x, x+1) * extent / width`.
    pub extent: f64,
    #[serde(skip)]
    pub occupied: Vec<u64>,
    pub occupied_fraction: f64,
}

impl RasterImage {
    fn words_per_row(width: u32) -> usize {
        (width as usize).div_ceil(64)
    }

    pub fn get(&self, col: u32, row: u32) -> bool {
        let w = Self::words_per_row(self.width);
        let word = self.occupied[row as usize * w + col as usize / 64];
        word >> (col % 64) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.occupied.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn row(&self, row: u32) -> &[u64] {
        let w = Self::words_per_row(self.width);
        &self.occupied[row as usize * w..(row as usize + 1) * w]
    }
}

/// Smallest `d` with `b^d >= resolution`.
pub fn default_depth(system: &DigitSystem, resolution: u32) -> u32 {
    let mut d = 0;
    let mut p = 1u64;
    while p < resolution as u64 {
        p = p.saturating_mul(system.base());
        d += 1;
    }
    d.max(1)
}

/// Marks columns hit by `[s, s + len] * num / den` for each start `s` of `cover`.
///
/// Column of `x` is `floor(x * width / extent)` with `extent = m / (b-1)`.
struct RowGeometry {
    width: u128,
    b1: u128,
    m: u128,
}

impl RowGeometry {
    fn mark(&self, cover: &IntegerCover, num: u128, den: u128, words: &mut [u64]) -> Result<()> {
        let overflow = || Error::ResourceLimit {
            what: "raster row arithmetic",
            requested: u128::MAX,
            limit: u128::MAX,
        };
        let cdenom = cover.denom.to_u128().ok_or_else(overflow)?;
        let denom = cdenom
            .checked_mul(den)
            .and_then(|d| d.checked_mul(self.m))
            .ok_or_else(overflow)?;
        let factor = num
            .checked_mul(self.width)
            .and_then(|f| f.checked_mul(self.b1))
            .ok_or_else(overflow)?;
        let last = self.width - 1;
        let col = |x: u128| -> Result<u128> { Ok((x.checked_mul(factor).ok_or_else(overflow)? / denom).min(last)) };
        for (s, e) in cover.merged() {
            let (c0, c1) = (col(s)?, col(e)?);
            for c in c0..=c1 {
                words[(c / 64) as usize] |= 1 << (c % 64);
            }
        }
        Ok(())
    }
}

/// One raster row at height `hp / hq`.
pub fn raster_row(
    system: &DigitSystem,
    (hp, hq): (u64, u64),
    width: u32,
    depth: u32,
    limits: &Limits,
) -> Result<Vec<u64>> {
    if hq == 0 || hp > hq {
        return Err(Error::invalid("h", format!("{hp}/{hq} is not in [0, 1]")));
    }
    let geo = RowGeometry {
        width: width as u128,
        b1: system.base() as u128 - 1,
        m: system.max_alpha().max(system.second_scale() * system.max_beta()) as u128,
    };
    let mut words = vec![0u64; RasterImage::words_per_row(width)];
    if hp == 0 {
        let cover = factor_cover(system.base(), system.alpha_digits(), depth, limits)?;
        geo.mark(&cover, 1, 1, &mut words)?;
    } else if hp == hq {
        let cover = factor_cover(system.base(), system.beta_digits(), depth, limits)?;
        geo.mark(&cover, system.second_scale() as u128, 1, &mut words)?;
    } else {
        let sp = section_to_u(&Param::Rational(Fraction::from_u64(hp, hq)?), system)?;
        let u = sp.u.as_fraction().expect("rational section");
        let (cover, _) = exact_cover(system, u, depth, limits)?;
        geo.mark(&cover, (hq - hp) as u128, hq as u128, &mut words)?;
    }
    Ok(words)
}

/// Rasterizes `B` on a `resolution x resolution` grid, one exact section per row.
pub fn raster_b(system: &DigitSystem, resolution: u32, depth: Option<u32>, limits: &Limits) -> Result<RasterImage> {
    if resolution < 16 {
        return Err(Error::invalid(
            "resolution",
            format!("{resolution} is below the minimum of 16"),
        ));
    }
    let depth = depth.unwrap_or_else(|| default_depth(system, resolution));
    if depth == 0 {
        return Err(Error::invalid("depth", "must be at least 1"));
    }
    let work = (system.alphabet_size() as u128)
        .checked_pow(depth)
        .and_then(|w| w.checked_mul(resolution as u128))
        .unwrap_or(u128::MAX);
    if work > limits.max_raster_work as u128 {
        return Err(Error::ResourceLimit {
            what: "raster work (resolution * alphabet^depth)",
            requested: work,
            limit: limits.max_raster_work.into(),
        });
    }
    let last = resolution as u64 - 1;
    let rows = (0..resolution)
        .into_par_iter()
        .map(|r| raster_row(system, (r as u64, last), resolution, depth, limits))
        .collect::<Result<Vec<_>>>()?;
    let occupied: Vec<u64> = rows.into_iter().flatten().collect();
    let count: u64 = occupied.iter().map(|w| w.count_ones() as u64).sum();
    let m = system.max_alpha().max(system.second_scale() * system.max_beta());
    Ok(RasterImage {
        width: resolution,
        height: resolution,
        depth,
        extent: m as f64 / (system.base() - 1) as f64,
        occupied,
        occupied_fraction: count as f64 / (resolution as f64 * resolution as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> Value {
        Value::Exact(BigRational::new(p.into(), q.into()))
    }

    #[test]
    fn direction_examples() {
        let d = direction_range(&DigitSystem::base4());
        assert_eq!((d.lo, d.hi), (rat(-1, 3), rat(2, 3)));
        assert_eq!((d.slope_lo, d.slope_hi), (rat(-3, 1), rat(3, 2)));
        let d = direction_range(&DigitSystem::square(3).unwrap());
        assert_eq!((d.lo, d.hi), (rat(-1, 4), rat(3, 4)));
    }

    #[test]
    fn sampled_directions_stay_inside() {
        let s = sample_directions(&DigitSystem::base4(), 100_000, 1).unwrap();
        assert!(s.all_inside);
        assert!(s.min >= -1.0 / 3.0 && s.max <= 2.0 / 3.0);
        assert!(s.min < -1.0 / 3.0 + 1e-2 && s.max > 2.0 / 3.0 - 1e-2);
    }

    #[test]
    fn bottom_section_is_cantor_cover() {
        let line = section_cover(&DigitSystem::base4(), &rat(0, 1), 3, &Limits::default()).unwrap();
        assert_eq!(line.intervals.len(), 8);
        for iv in &line.intervals {
            assert_eq!(iv.length(), rat(1, 64 * 3));
        }
        assert_eq!(line.union_measure, rat(8, 192));
    }

    #[test]
    fn middle_sections() {
        let lim = Limits::default();
        let sys = DigitSystem::base4();
        let half = section_cover(&sys, &rat(1, 2), 4, &lim).unwrap();
        assert_eq!(half.u, Some(Param::rational(2, 1).unwrap()));
        assert_eq!(
            half.intervals,
            vec![Interval {
                lo: rat(0, 1),
                hi: rat(1, 2)
            }]
        );
        let third = section_cover(&sys, &rat(1, 3), 5, &lim).unwrap();
        let e1 = cover_at_depth(&sys, &Param::rational(1, 1).unwrap(), 5, false, &lim).unwrap();
        let want = e1.union_measure.as_exact().unwrap() * BigRational::new(2.into(), 3.into());
        assert_eq!(third.union_measure, Value::Exact(want));
        assert!(section_cover(&sys, &rat(3, 2), 3, &lim).is_err());
    }

    #[test]
    fn top_section_is_scaled_beta_cover() {
        let line = section_cover(&DigitSystem::base4(), &rat(1, 1), 2, &Limits::default()).unwrap();
        assert_eq!(line.intervals.len(), 4);
        assert_eq!(line.intervals[3].hi, rat(2, 3));
    }

    #[test]
    fn half_row_is_full() {
        let sys = DigitSystem::base4();
        let width = 256;
        let row = raster_row(&sys, (1, 2), width, 4, &Limits::default()).unwrap();
        // x = 1/2 lands in column floor(1/2 * 256 / (2/3)) = 192
        for c in 0..=192u32 {
            assert!(row[c as usize / 64] >> (c % 64) & 1 == 1, "column {c}");
        }
        assert_eq!(row[3] >> (193 % 64) & 1, 0);
    }

    #[test]
    fn raster_rejects_small_and_costly() {
        let sys = DigitSystem::base4();
        assert!(raster_b(&sys, 8, None, &Limits::default()).is_err());
        let err = raster_b(&sys, 64, Some(20), &Limits::default()).unwrap_err();
        assert!(err.is_resource_limit());
    }

    #[test]
    fn raster_fraction_shrinks() {
        let sys = DigitSystem::base4();
        let lim = Limits::default();
        let a = raster_b(&sys, 64, None, &lim).unwrap();
        let b = raster_b(&sys, 128, None, &lim).unwrap();
        assert_eq!(a.count(), a.occupied.iter().map(|w| w.count_ones() as u64).sum::<u64>());
        assert!(b.occupied_fraction < a.occupied_fraction);
        // the bottom row is E, the top row is 2E
        assert!(a.get(0, 0) && a.get(0, 63) && a.get(63, 63));
    }
}
