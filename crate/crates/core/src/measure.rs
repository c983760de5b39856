//! Interval covers of `E_u`, their exact union measure, and dimension estimates.
//!
//! The level-`n` cover is `{ b^-n (v + hull) : v in V_n }`. For rational `u` all
//! endpoints share the denominator `q (b-1) b^n`, so the cover is handled as a
//! list of integer start points with a common integer length and merged by a
//! single sweep. Irrational covers use floats, with every interval widened by
//! `2^-40` so the reported measure stays an upper bound.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{classify_system, Branch, ClassifyOptions};
use crate::digits::{DigitSystem, Fraction, Interval, Param, Value};
use crate::error::{Error, Result};
use crate::lattice::DigitLattice;
use crate::limits::Limits;

/// Slack added on both sides of every float interval before merging.
pub const FLOAT_SLACK: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverEstimate {
    pub level: u32,
    /// `nu_n`, the number of distinct translates.
    pub distinct_count: u64,
    pub union_measure: Value,
    /// `log nu_n / (n log b)`.
    pub box_dim_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<Interval>>,
}

/// Closed intervals `[s, s + len] / denom` with integer starts `s`, sorted.
#[derive(Debug, Clone)]
pub(crate) struct IntegerCover {
    pub starts: Vec<u128>,
    pub len: u128,
    pub denom: BigUint,
}

impl IntegerCover {
    /// Merged `(start, end)` pairs in integer units.
    pub fn merged(&self) -> Vec<(u128, u128)> {
        let mut out: Vec<(u128, u128)> = Vec::new();
        for &s in &self.starts {
            let e = s + self.len;
            match out.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => out.push((s, e)),
            }
        }
        out
    }

    pub fn covered_length(&self) -> u128 {
        let mut total = 0u128;
        let mut reach: Option<u128> = None;
        for &s in &self.starts {
            let e = s + self.len;
            match reach {
                Some(r) if s <= r => {
                    if e > r {
                        total += e - r;
                        reach = Some(e);
                    }
                }
                _ => {
                    total += self.len;
                    reach = Some(e);
                }
            }
        }
        total
    }

    pub fn union_measure(&self, scale: &BigRational) -> BigRational {
        let len = BigRational::new(BigInt::from(self.covered_length()), BigInt::from(self.denom.clone()));
        len * scale
    }

    pub fn intervals(&self, scale: &BigRational) -> Vec<Interval> {
        let d = BigInt::from(self.denom.clone());
        self.merged()
            .into_iter()
            .map(|(s, e)| Interval {
                lo: Value::Exact(BigRational::new(BigInt::from(s), d.clone()) * scale),
                hi: Value::Exact(BigRational::new(BigInt::from(e), d.clone()) * scale),
            })
            .collect()
    }
}

/// Integer cover of `E_u` at level `n`: starts `key (b-1)`, length `q max_alpha + p max_beta`,
/// denominator `q (b-1) b^n`.
pub(crate) fn exact_cover(system: &DigitSystem, u: &Fraction, n: u32, limits: &Limits) -> Result<(IntegerCover, u64)> {
    let lattice = DigitLattice::new(system, u)?;
    let keys = lattice.distinct_keys(n, limits)?;
    let b1 = (system.base() - 1) as u128;
    let starts: Vec<u128> = keys.iter().map(|&k| k as u128 * b1).collect();
    let len = lattice.q() as u128 * system.max_alpha() as u128 + lattice.p() as u128 * system.max_beta() as u128;
    let denom = BigUint::from(lattice.q()) * BigUint::from(b1) * BigUint::from(system.base()).pow(n);
    let nu = keys.len() as u64;
    Ok((IntegerCover { starts, len, denom }, nu))
}

/// Integer cover of one Cantor factor `scale * E_digits` at level `n` (used for
/// the bottom and top sections of the planar set).
pub(crate) fn factor_cover(base: u64, digits: &[u64], n: u32, limits: &Limits) -> Result<IntegerCover> {
    limits.check_level(n)?;
    limits.check_points(digits.len(), n)?;
    let mut keys = vec![0u128];
    let mut place = 1u128;
    for _ in 0..n {
        keys = digits
            .iter()
            .flat_map(|&d| keys.iter().map(move |&x| x + d as u128 * place))
            .collect();
        place *= base as u128;
    }
    keys.sort_unstable();
    keys.dedup();
    let b1 = (base - 1) as u128;
    let max_digit = digits.iter().copied().max().unwrap_or(0) as u128;
    Ok(IntegerCover {
        starts: keys.iter().map(|&k| k * b1).collect(),
        len: max_digit,
        denom: BigUint::from(b1) * BigUint::from(base).pow(n),
    })
}

/// Merged intervals, covered length and distinct count.
type FloatCover = (Vec<(f64, f64)>, f64, u64);

/// Float cover for irrational `u`: returns merged intervals and the covered length.
pub(crate) fn float_cover(system: &DigitSystem, u: f64, n: u32, limits: &Limits) -> Result<FloatCover> {
    limits.check_level(n)?;
    let points = limits.check_points(system.alphabet_size(), n)?;
    let b = system.base() as f64;
    let digits: Vec<f64> = system
        .alpha_digits()
        .iter()
        .flat_map(|&a| system.beta_digits().iter().map(move |&c| a as f64 + u * c as f64))
        .collect();
    let mut values = vec![0f64];
    let mut place = 1f64;
    for _ in 0..n {
        values = digits
            .iter()
            .flat_map(|&d| values.iter().map(move |&x| x + d * place))
            .collect();
        place *= b;
    }
    let scale = b.powi(-(n as i32));
    let hull = (system.max_alpha() as f64 + u * system.max_beta() as f64) / (b - 1.0);
    let mut ivs: Vec<(f64, f64)> = values
        .par_iter()
        .map(|&v| (v * scale - FLOAT_SLACK, (v + hull) * scale + FLOAT_SLACK))
        .collect();
    ivs.par_sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (s, e) in ivs {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    let total = merged.iter().map(|(s, e)| e - s).sum();
    Ok((merged, total, points))
}

fn box_dim(nu: u64, n: u32, base: u64) -> f64 {
    (nu as f64).ln() / (n as f64 * (base as f64).ln())
}

/// Level-`n` cover of `E_u` with its union measure (exact for rational `u`).
pub fn cover_at_depth(
    system: &DigitSystem,
    u: &Param,
    n: u32,
    keep_intervals: bool,
    limits: &Limits,
) -> Result<CoverEstimate> {
    if n == 0 {
        return Err(Error::invalid("n", "depth must be at least 1"));
    }
    match u {
        Param::Rational(f) => {
            let (cover, nu) = exact_cover(system, f, n, limits)?;
            let one = BigRational::from_integer(1.into());
            Ok(CoverEstimate {
                level: n,
                distinct_count: nu,
                union_measure: Value::Exact(cover.union_measure(&one)),
                box_dim_estimate: box_dim(nu, n, system.base()),
                intervals: keep_intervals.then(|| cover.intervals(&one)),
            })
        }
        Param::Irrational(x) => {
            let (merged, total, nu) = float_cover(system, *x, n, limits)?;
            Ok(CoverEstimate {
                level: n,
                distinct_count: nu,
                union_measure: Value::Float(total),
                box_dim_estimate: box_dim(nu, n, system.base()),
                intervals: keep_intervals.then(|| {
                    merged
                        .into_iter()
                        .map(|(s, e)| Interval {
                            lo: Value::Float(s),
                            hi: Value::Float(e),
                        })
                        .collect()
                }),
            })
        }
    }
}

/// Covering bound `log nu / (n0 log b)` from a level-`n0` lattice with `nu < b^n0` points.
pub fn dim_upper_bound_from_collision(n0: u32, nu: u64, base: u64) -> Result<f64> {
    if n0 == 0 {
        return Err(Error::invalid("n0", "must be at least 1"));
    }
    if nu == 0 {
        return Err(Error::invalid("nu", "must be at least 1"));
    }
    if base < 2 {
        return Err(Error::invalid("base", "must be at least 2"));
    }
    let full = (base as u128).checked_pow(n0).unwrap_or(u128::MAX);
    if nu as u128 >= full {
        return Err(Error::invalid(
            "nu",
            format!("{nu} >= {base}^{n0}: no multiple point, so no bound below 1"),
        ));
    }
    Ok(box_dim(nu, n0, base))
}

/// Cover estimates for levels `1..=n_max`.
pub fn box_dim_series(system: &DigitSystem, u: &Param, n_max: u32, limits: &Limits) -> Result<Vec<CoverEstimate>> {
    (1..=n_max)
        .map(|n| cover_at_depth(system, u, n, false, limits))
        .collect()
}

/// `V ∩ window = (A + alpha N) ∩ window`, in key units (values times `q`).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Progression {
    pub alpha_key: u64,
    /// `alpha_key / q`, the common difference in value units.
    pub alpha: Value,
    pub generators: Vec<u64>,
    /// Keys below this bound are exactly the keys of `V` (all levels).
    pub window: u64,
    pub levels: u32,
}

/// Looks for the smallest `alpha` such that `V` is closed under `+ alpha` within
/// the windows where `V_n` agrees with `V`, at every level up to `n_max`.
///
/// `Ok(None)` means inconclusive. Candidates are limited to a quarter of the
/// widest window so that every accepted `alpha` is checked over several periods.
pub fn progression_scan(
    system: &DigitSystem,
    u: &Fraction,
    n_max: u32,
    limits: &Limits,
) -> Result<Option<Progression>> {
    let class = classify_system(system, &Param::Rational(u.clone()), &ClassifyOptions::branch_only())?;
    if class.branch != Branch::IntervalCase {
        return Err(Error::WrongBranch {
            expected: Branch::IntervalCase.name(),
            actual: class.branch.name(),
        });
    }
    if n_max == 0 {
        return Err(Error::invalid("nMax", "must be at least 1"));
    }
    let lattice = DigitLattice::new(system, u)?;
    let gap = lattice.min_nonzero_digit_key();
    let mut windows = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let w = lattice
            .place(n)?
            .checked_mul(gap)
            .ok_or_else(|| Error::invalid("nMax", "window exceeds u64"))?;
        let keys: Vec<u64> = lattice
            .distinct_keys(n, limits)?
            .into_iter()
            .filter(|&k| k < w)
            .collect();
        windows.push((w, keys));
    }
    let (top_w, top) = windows.last().expect("n_max >= 1");
    let closed = |alpha: u64| {
        windows.iter().all(|(w, keys)| {
            keys.iter()
                .take_while(|&&v| v + alpha < *w)
                .all(|&v| keys.binary_search(&(v + alpha)).is_ok())
        })
    };
    let Some(alpha) = top
        .iter()
        .copied()
        .filter(|&a| a > 0 && a <= top_w / 4)
        .find(|&a| closed(a))
    else {
        return Ok(None);
    };
    let generators: Vec<u64> = top
        .iter()
        .copied()
        .filter(|&v| v < alpha || top.binary_search(&(v - alpha)).is_err())
        .collect();
    Ok(Some(Progression {
        alpha_key: alpha,
        alpha: Value::Exact(BigRational::new(alpha.into(), lattice.q().into())),
        generators,
        window: *top_w,
        levels: n_max,
    }))
}
