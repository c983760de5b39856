//! Exact enumeration of the digit lattices `V_n` and detection of multiple points.
//!
//! For `u = p/q` every point `A + uB` of `V_n` is identified by the integer key
//! `qA + pB`. Two digit choices give the same point iff their keys are equal,
//! so every decision here is made on integers.
//!
//! Points are indexed in mixed radix: index `i = sum idx_k m^k` picks digit
//! `idx_k` (out of `m`) at position `k`. All builders produce keys in this order
//! before any sorting, which keeps parallel output identical to serial output.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::digits::{DigitSystem, Fraction};
use crate::error::{Error, Result};
use crate::limits::Limits;

/// A point of `V_n`: the value `A + uB` written through its two digit integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub a: u64,
    pub b: u64,
    pub level: u32,
}

impl Serialize for LatticePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("LatticePoint", 3)?;
        st.serialize_field("A", &self.a.to_string())?;
        st.serialize_field("B", &self.b.to_string())?;
        st.serialize_field("level", &self.level)?;
        st.end()
    }
}

/// The digit alphabet of a lattice, flattened to per-position integer keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitLattice {
    base: u64,
    /// `(alpha, beta)` contribution of each digit choice.
    digits: Vec<(u64, u64)>,
    /// `q * alpha + p * beta` for each digit choice.
    digit_keys: Vec<u64>,
    p: u64,
    q: u64,
}

fn fraction_parts(u: &Fraction) -> Result<(u64, u64)> {
    u.to_u64_pair().ok_or_else(|| {
        Error::invalid(
            "u",
            format!("{u}: enumeration needs numerator and denominator below 2^64"),
        )
    })
}

fn key_overflow(what: &'static str) -> Error {
    Error::ResourceLimit {
        what,
        requested: u128::MAX,
        limit: u64::MAX.into(),
    }
}

impl DigitLattice {
    /// Lattice of `E_u` for a digit system: one digit per `(alpha, beta)` pair.
    pub fn new(system: &DigitSystem, u: &Fraction) -> Result<Self> {
        let (p, q) = fraction_parts(u)?;
        let mut digits = Vec::with_capacity(system.alphabet_size());
        for &a in system.alpha_digits() {
            for &b in system.beta_digits() {
                digits.push((a, b));
            }
        }
        Self::from_digits(system.base(), digits, p, q)
    }

    /// Lattice of the projected sieve `{ sum a_j 3^-j : a_j in {0, 1, u} }`.
    ///
    /// The digit `u` is recorded as `B`-digit 1, so points still read `A + uB`.
    pub fn sieve_projection(u: &Fraction) -> Result<Self> {
        let (p, q) = fraction_parts(u)?;
        Self::from_digits(3, vec![(0, 0), (1, 0), (0, 1)], p, q)
    }

    fn from_digits(base: u64, digits: Vec<(u64, u64)>, p: u64, q: u64) -> Result<Self> {
        let digit_keys = digits
            .iter()
            .map(|&(a, b)| {
                q.checked_mul(a)
                    .and_then(|x| p.checked_mul(b).and_then(|y| x.checked_add(y)))
                    .ok_or_else(|| key_overflow("digit key q*alpha + p*beta"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DigitLattice {
            base,
            digits,
            digit_keys,
            p,
            q,
        })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn alphabet_size(&self) -> usize {
        self.digits.len()
    }

    pub fn digit_keys(&self) -> &[u64] {
        &self.digit_keys
    }

    pub fn max_digit_key(&self) -> u64 {
        self.digit_keys.iter().copied().max().unwrap_or(0)
    }

    /// Smallest nonzero digit key, the gap below which level `n+1` adds nothing
    /// to `[0, b^n * gap)`.
    pub fn min_nonzero_digit_key(&self) -> u64 {
        self.digit_keys.iter().copied().filter(|&k| k > 0).min().unwrap_or(0)
    }

    /// `b^n` as `u64`, if it fits.
    pub fn place(&self, n: u32) -> Result<u64> {
        self.base.checked_pow(n).ok_or_else(|| key_overflow("base power b^n"))
    }

    /// Largest key at level `n`; fails if any level-`n` key could overflow `u64`.
    pub fn max_key(&self, n: u32) -> Result<u64> {
        let bn = (self.base as u128)
            .checked_pow(n)
            .ok_or_else(|| key_overflow("base power b^n"))?;
        let span = (bn - 1) / (self.base as u128 - 1);
        let max = span
            .checked_mul(self.max_digit_key() as u128)
            .ok_or_else(|| key_overflow("level key"))?;
        // leave headroom so interval endpoints (key * (b-1) + hull) fit in u128 math
        u64::try_from(max).map_err(|_| key_overflow("level key"))
    }

    fn check(&self, n: u32, limits: &Limits) -> Result<u64> {
        limits.check_level(n)?;
        let points = limits.check_points(self.alphabet_size(), n)?;
        self.max_key(n)?;
        Ok(points)
    }

    /// Keys of all `m^n` points in index order (unsorted, with repeats).
    pub(crate) fn keys_in_index_order(&self, n: u32) -> Vec<u64> {
        let mut keys = vec![0u64];
        let mut place = 1u64;
        for _ in 0..n {
            let len = keys.len();
            let mut next = vec![0u64; len * self.digit_keys.len()];
            next.par_iter_mut()
                .with_min_len(1 << 14)
                .enumerate()
                .for_each(|(i, out)| {
                    *out = keys[i % len] + self.digit_keys[i / len] * place;
                });
            keys = next;
            place = place.wrapping_mul(self.base);
        }
        keys
    }

    /// Key of the point with mixed-radix index `index` at level `n`.
    pub fn key_at(&self, mut index: u64, n: u32) -> u64 {
        let m = self.digit_keys.len() as u64;
        let mut key = 0u64;
        let mut place = 1u64;
        for _ in 0..n {
            key += self.digit_keys[(index % m) as usize] * place;
            index /= m;
            place = place.wrapping_mul(self.base);
        }
        key
    }

    /// The lattice point with mixed-radix index `index` at level `n`.
    pub fn point_at(&self, mut index: u64, n: u32) -> LatticePoint {
        let m = self.digit_keys.len() as u64;
        let (mut a, mut b, mut place) = (0u64, 0u64, 1u64);
        for _ in 0..n {
            let (da, db) = self.digits[(index % m) as usize];
            a += da * place;
            b += db * place;
            index /= m;
            place = place.wrapping_mul(self.base);
        }
        LatticePoint { a, b, level: n }
    }

    /// Integer key `qA + pB` of a point.
    pub fn key_of(&self, point: &LatticePoint) -> u128 {
        self.q as u128 * point.a as u128 + self.p as u128 * point.b as u128
    }

    /// All keys of `V_n`, sorted, with multiplicity.
    pub fn enumerate(&self, n: u32, limits: &Limits) -> Result<LevelKeys> {
        self.check(n, limits)?;
        let mut keys = self.keys_in_index_order(n);
        keys.par_sort_unstable();
        Ok(LevelKeys { level: n, keys })
    }

    /// Sorted distinct keys of `V_n`.
    pub fn distinct_keys(&self, n: u32, limits: &Limits) -> Result<Vec<u64>> {
        let mut keys = self.enumerate(n, limits)?.keys;
        keys.dedup();
        Ok(keys)
    }

    /// The first two indices (in index order) of each requested key.
    fn first_indices(&self, n: u32, targets: &[u64]) -> HashMap<u64, Vec<u64>> {
        let mut found: HashMap<u64, Vec<u64>> = targets.iter().map(|&k| (k, Vec::new())).collect();
        let mut remaining = targets.len();
        let total = (self.digit_keys.len() as u64).pow(n);
        for i in 0..total {
            if remaining == 0 {
                break;
            }
            let key = self.key_at(i, n);
            if let Some(slot) = found.get_mut(&key) {
                if slot.len() < 2 {
                    slot.push(i);
                    if slot.len() == 2 {
                        remaining -= 1;
                    }
                }
            }
        }
        found
    }

    /// Up to `limit` multiple points of `V_n`, smallest keys first, each with the
    /// two lowest-index digit choices that reach it.
    pub fn collisions(&self, n: u32, limit: usize, limits: &Limits) -> Result<Vec<CollisionRecord>> {
        let level = self.enumerate(n, limits)?;
        let targets: Vec<u64> = level.duplicated_keys().take(limit).collect();
        let found = self.first_indices(n, &targets);
        Ok(targets
            .iter()
            .map(|k| {
                let idx = &found[k];
                CollisionRecord {
                    first: self.point_at(idx[0], n),
                    second: self.point_at(idx[1], n),
                    key: *k,
                }
            })
            .collect())
    }

    /// Scans `V_1, V_2, ..` up to `n_max` and stops at the first level with a
    /// multiple point. Collisions persist to higher levels, so the first hit is
    /// the smallest such level.
    pub fn first_collision(&self, n_max: u32, limits: &Limits) -> Result<CollisionReport> {
        if n_max == 0 {
            return Err(Error::invalid("nMax", "must be at least 1"));
        }
        for n in 1..=n_max {
            let level = self.enumerate(n, limits)?;
            let Some(key) = level.duplicated_keys().next() else {
                continue;
            };
            let idx = &self.first_indices(n, &[key])[&key];
            return Ok(CollisionReport {
                found: true,
                first_level: Some(n),
                witness: Some((self.point_at(idx[0], n), self.point_at(idx[1], n))),
                nu: Some(level.distinct_count()),
                multiplicity_histogram: level.multiplicity_histogram(),
                levels_scanned: n,
            });
        }
        Ok(CollisionReport {
            found: false,
            first_level: None,
            witness: None,
            nu: None,
            multiplicity_histogram: BTreeMap::new(),
            levels_scanned: n_max,
        })
    }

    /// Distinct-key count `nu_n` without materializing all points.
    ///
    /// Splits `V_n = V_lo + b^lo V_hi` and sweeps the high parts in increasing
    /// order: once the next window starts above a key, that key can no longer
    /// reappear and is counted. Windows are partitioned into contiguous chunks
    /// that each own a key range, so the count is independent of thread count.
    pub fn count_distinct_streaming(&self, n: u32, limits: &Limits) -> Result<u64> {
        if n > limits.max_stream_level {
            return Err(Error::ResourceLimit {
                what: "streaming level",
                requested: n.into(),
                limit: limits.max_stream_level.into(),
            });
        }
        self.max_key(n)?;
        let lo_level = n / 2;
        let hi_level = n - lo_level;
        let low = self.distinct_keys_unchecked(lo_level);
        let high = self.distinct_keys_unchecked(hi_level);
        let place = self.base.pow(lo_level);
        let reach = *low.last().expect("nonempty") + 1;

        const CHUNK: usize = 256;
        let chunk_starts: Vec<usize> = (0..high.len()).step_by(CHUNK).collect();
        let count = chunk_starts
            .par_iter()
            .map(|&start| {
                let end = (start + CHUNK).min(high.len());
                let range_lo = high[start] * place;
                let range_hi = if end < high.len() { high[end] * place } else { u64::MAX };
                // first window that can still reach range_lo
                let first = high[..start].partition_point(|&y| y * place + reach <= range_lo);
                count_windows(&low, &high[first..end], place, range_lo, range_hi)
            })
            .sum();
        Ok(count)
    }

    fn distinct_keys_unchecked(&self, n: u32) -> Vec<u64> {
        let mut keys = self.keys_in_index_order(n);
        keys.par_sort_unstable();
        keys.dedup();
        keys
    }

    /// Checks that three constructions of `V_n` give the same multiset:
    /// the iterated sum `D + bD + .. + b^(n-1) D`, the Horner form
    /// `sum a_j b^(n-j)`, and `qA + pB` assembled from the two digit integers.
    pub fn equivalent_forms(&self, n: u32) -> Result<bool> {
        if n > 6 {
            return Err(Error::invalid(
                "n",
                format!("{n} > 6; the form check is oracle-scale only"),
            ));
        }
        self.max_key(n)?;
        let b = self.base;

        let mut iterated = vec![0u64];
        let mut place = 1u64;
        for _ in 0..n {
            iterated = iterated
                .iter()
                .flat_map(|&x| self.digit_keys.iter().map(move |&d| x + d * place))
                .collect();
            place *= b;
        }

        let mut horner = vec![0u64];
        for _ in 0..n {
            horner = horner
                .iter()
                .flat_map(|&x| self.digit_keys.iter().map(move |&d| x * b + d))
                .collect();
        }

        let mut pairs: Vec<(u128, u128)> = vec![(0, 0)];
        let mut place = 1u128;
        for _ in 0..n {
            pairs = pairs
                .iter()
                .flat_map(|&(a, bb)| {
                    self.digits
                        .iter()
                        .map(move |&(da, db)| (a + da as u128 * place, bb + db as u128 * place))
                })
                .collect();
            place *= b as u128;
        }
        let mut assembled: Vec<u128> = pairs
            .iter()
            .map(|&(a, bb)| self.q as u128 * a + self.p as u128 * bb)
            .collect();

        iterated.sort_unstable();
        horner.sort_unstable();
        assembled.sort_unstable();
        let widened: Vec<u128> = iterated.iter().map(|&k| k as u128).collect();
        Ok(iterated == horner && widened == assembled)
    }

    /// Checks `V_(n+1) = V_n + b^n V_1` as multisets of keys.
    pub fn self_affine_step(&self, n: u32, limits: &Limits) -> Result<bool> {
        if n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        let next = self.enumerate(n + 1, limits)?;
        let cur = self.enumerate(n, limits)?;
        let one = self.enumerate(1, limits)?;
        let place = self.place(n)?;
        let mut combined: Vec<u64> = one
            .keys
            .iter()
            .flat_map(|&y| cur.keys.iter().map(move |&x| x + y * place))
            .collect();
        combined.par_sort_unstable();
        Ok(combined == next.keys)
    }
}

fn count_windows(low: &[u64], windows: &[u64], place: u64, range_lo: u64, range_hi: u64) -> u64 {
    let mut pending: Vec<u64> = Vec::new();
    let mut merged: Vec<u64> = Vec::new();
    let mut count = 0u64;
    for (i, &y) in windows.iter().enumerate() {
        let offset = y * place;
        merged.clear();
        let (mut a, mut b) = (0, 0);
        while a < pending.len() || b < low.len() {
            let next = match (pending.get(a), low.get(b)) {
                (Some(&x), Some(&l)) if x <= l + offset => {
                    a += 1;
                    x
                }
                (Some(&x), None) => {
                    a += 1;
                    x
                }
                (_, Some(&l)) => {
                    b += 1;
                    l + offset
                }
                (None, None) => unreachable!(),
            };
            if merged.last() != Some(&next) {
                merged.push(next);
            }
        }
        let frontier = windows.get(i + 1).map_or(u64::MAX, |&y2| y2 * place);
        let settled = merged.partition_point(|&k| k < frontier);
        count += merged[..settled]
            .iter()
            .filter(|&&k| k >= range_lo && k < range_hi)
            .count() as u64;
        pending.clear();
        pending.extend_from_slice(&merged[settled..]);
    }
    count += pending.iter().filter(|&&k| k >= range_lo && k < range_hi).count() as u64;
    count
}

/// All keys of one level, sorted, counted with multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelKeys {
    pub level: u32,
    pub keys: Vec<u64>,
}

impl LevelKeys {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// `nu_n`, the number of distinct points.
    pub fn distinct_count(&self) -> u64 {
        runs(&self.keys).count() as u64
    }

    /// Multiplicity -> number of distinct keys with that multiplicity.
    pub fn multiplicity_histogram(&self) -> BTreeMap<u64, u64> {
        let mut hist = BTreeMap::new();
        for (_, m) in runs(&self.keys) {
            *hist.entry(m).or_insert(0) += 1;
        }
        hist
    }

    /// Keys with multiplicity at least two, ascending.
    pub fn duplicated_keys(&self) -> impl Iterator<Item = u64> + '_ {
        runs(&self.keys).filter(|&(_, m)| m > 1).map(|(k, _)| k)
    }

    pub fn has_collision(&self) -> bool {
        self.keys.windows(2).any(|w| w[0] == w[1])
    }
}

fn runs(sorted: &[u64]) -> impl Iterator<Item = (u64, u64)> + '_ {
    sorted.chunk_by(|a, b| a == b).map(|run| (run[0], run.len() as u64))
}

/// One multiple point: two distinct digit choices with the same key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollisionRecord {
    pub first: LatticePoint,
    pub second: LatticePoint,
    pub key: u64,
}

impl Serialize for CollisionRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("CollisionRecord", 5)?;
        st.serialize_field("A", &self.first.a.to_string())?;
        st.serialize_field("B", &self.first.b.to_string())?;
        st.serialize_field("A2", &self.second.a.to_string())?;
        st.serialize_field("B2", &self.second.b.to_string())?;
        st.serialize_field("key", &self.key.to_string())?;
        st.end()
    }
}

/// Outcome of [`DigitLattice::first_collision`]. `found = false` means no
/// collision up to the scanned level, which is not a proof that none exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionReport {
    pub found: bool,
    pub first_level: Option<u32>,
    pub witness: Option<(LatticePoint, LatticePoint)>,
    pub nu: Option<u64>,
    pub multiplicity_histogram: BTreeMap<u64, u64>,
    pub levels_scanned: u32,
}

impl Serialize for CollisionReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("CollisionReport", 6)?;
        st.serialize_field("found", &self.found)?;
        st.serialize_field("n0", &self.first_level)?;
        st.serialize_field("nu", &self.nu.map(|v| v.to_string()))?;
        st.serialize_field("witness", &self.witness.map(|(a, b)| [a, b]))?;
        let hist: BTreeMap<String, String> = self
            .multiplicity_histogram
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        st.serialize_field("multiplicityHistogram", &hist)?;
        st.serialize_field("levelsScanned", &self.levels_scanned)?;
        st.end()
    }
}

/// CLI-facing summary of one level: `{u, base, level, nu, collisions}`.
#[derive(Debug, Clone)]
pub struct LevelSummary {
    pub u: Fraction,
    pub base: u64,
    pub level: u32,
    pub nu: u64,
    pub collisions: Vec<CollisionRecord>,
}

impl LevelSummary {
    pub fn compute(
        lattice: &DigitLattice,
        u: &Fraction,
        n: u32,
        max_collisions: usize,
        limits: &Limits,
    ) -> Result<Self> {
        let level = lattice.enumerate(n, limits)?;
        let nu = level.distinct_count();
        let collisions = lattice.collisions(n, max_collisions, limits)?;
        Ok(LevelSummary {
            u: u.clone(),
            base: lattice.base(),
            level: n,
            nu,
            collisions,
        })
    }
}

impl Serialize for LevelSummary {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("LevelSummary", 5)?;
        st.serialize_field("u", &self.u)?;
        st.serialize_field("base", &self.base.to_string())?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("nu", &self.nu.to_string())?;
        st.serialize_field("collisions", &self.collisions)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base4(p: u64, q: u64) -> DigitLattice {
        DigitLattice::new(&DigitSystem::base4(), &Fraction::from_u64(p, q).unwrap()).unwrap()
    }

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn level_one_examples() {
        let v = base4(1, 1).enumerate(1, &lim()).unwrap();
        assert_eq!(v.keys, vec![0, 1, 1, 2]);
        assert_eq!(v.distinct_count(), 3);

        let v = base4(2, 1).enumerate(1, &lim()).unwrap();
        assert_eq!(v.keys, vec![0, 1, 2, 3]);
        assert_eq!(v.distinct_count(), 4);
    }

    #[test]
    fn one_third_level_two() {
        let lat = base4(1, 3);
        let v = lat.enumerate(2, &lim()).unwrap();
        assert_eq!(v.len(), 16);
        assert_eq!(v.distinct_count(), 14);
        assert_eq!(v.duplicated_keys().collect::<Vec<_>>(), vec![4, 16]);
        let recs = lat.collisions(2, 10, &lim()).unwrap();
        let pairs: Vec<_> = recs
            .iter()
            .map(|r| {
                let mut v = [(r.first.a, r.first.b), (r.second.a, r.second.b)];
                v.sort();
                (v, r.key)
            })
            .collect();
        assert_eq!(pairs, vec![([(0, 4), (1, 1)], 4), ([(4, 4), (5, 1)], 16)]);
    }

    #[test]
    fn first_collision_examples() {
        let r = base4(1, 1).first_collision(6, &lim()).unwrap();
        assert_eq!((r.found, r.first_level, r.nu), (true, Some(1), Some(3)));

        let lat = base4(1, 3);
        let r = lat.first_collision(6, &lim()).unwrap();
        assert_eq!((r.found, r.first_level, r.nu), (true, Some(2), Some(14)));
        let (w1, w2) = r.witness.unwrap();
        assert_ne!((w1.a, w1.b), (w2.a, w2.b));
        assert_eq!(lat.key_of(&w1), lat.key_of(&w2));
        assert_eq!(r.multiplicity_histogram, BTreeMap::from([(1, 12), (2, 2)]));

        let r = base4(2, 3).first_collision(6, &lim()).unwrap();
        assert!(!r.found);
        assert_eq!(r.levels_scanned, 6);
    }

    #[test]
    fn caps_are_enforced() {
        let tight = Limits {
            max_level: 3,
            ..Limits::default()
        };
        let err = base4(2, 3).enumerate(4, &tight).unwrap_err();
        assert!(err.is_resource_limit());
        let err = base4(2, 3).first_collision(5, &tight).unwrap_err();
        assert!(err.is_resource_limit());
        let points = Limits {
            max_points: 100,
            ..Limits::default()
        };
        assert!(base4(1, 1).enumerate(4, &points).unwrap_err().is_resource_limit());
    }

    #[test]
    fn key_overflow_is_reported() {
        let lat = base4(u64::MAX / 2, 1);
        assert!(lat.enumerate(3, &lim()).unwrap_err().is_resource_limit());
        let huge = Fraction::new(num_bigint::BigUint::from(u64::MAX) * 4u32, 3u32.into()).unwrap();
        assert!(DigitLattice::new(&DigitSystem::base4(), &huge).is_err());
    }

    #[test]
    fn equivalent_forms_examples() {
        assert!(base4(1, 1).equivalent_forms(2).unwrap());
        assert!(base4(1, 3).equivalent_forms(3).unwrap());
        let mixed = DigitSystem::mixed(2, 3).unwrap();
        let lat = DigitLattice::new(&mixed, &Fraction::from_u64(1, 5).unwrap()).unwrap();
        assert!(lat.equivalent_forms(2).unwrap());
        assert!(base4(1, 1).equivalent_forms(7).is_err());
    }

    #[test]
    fn self_affine_examples() {
        assert!(base4(1, 1).self_affine_step(1, &lim()).unwrap());
        assert!(base4(1, 3).self_affine_step(2, &lim()).unwrap());
        let sq = DigitSystem::square(3).unwrap();
        let lat = DigitLattice::new(&sq, &Fraction::from_u64(1, 2).unwrap()).unwrap();
        assert!(lat.self_affine_step(1, &lim()).unwrap());
    }

    #[test]
    fn streaming_matches_materialized() {
        for (p, q) in [(1, 1), (1, 3), (2, 3), (3, 5), (7, 11), (2, 1), (13, 9)] {
            let lat = base4(p, q);
            for n in 1..=9 {
                let want = lat.enumerate(n, &lim()).unwrap().distinct_count();
                assert_eq!(
                    lat.count_distinct_streaming(n, &lim()).unwrap(),
                    want,
                    "u={p}/{q} n={n}"
                );
            }
        }
        let sieve = DigitLattice::sieve_projection(&Fraction::from_u64(1, 4).unwrap()).unwrap();
        for n in 1..=8 {
            let want = sieve.enumerate(n, &lim()).unwrap().distinct_count();
            assert_eq!(sieve.count_distinct_streaming(n, &lim()).unwrap(), want);
        }
    }

    #[test]
    fn sieve_projection_digits() {
        let lat = DigitLattice::sieve_projection(&Fraction::from_u64(1, 2).unwrap()).unwrap();
        // digits {0, 1, u} scaled by q = 2 -> {0, 2, 1}: a full residue system mod 3
        assert_eq!(lat.digit_keys(), &[0, 2, 1]);
        assert!(!lat.first_collision(6, &lim()).unwrap().found);
        let lat = DigitLattice::sieve_projection(&Fraction::from_u64(1, 1).unwrap()).unwrap();
        assert_eq!(lat.first_collision(3, &lim()).unwrap().first_level, Some(1));
    }

    #[test]
    fn summary_json_shape() {
        let u = Fraction::from_u64(1, 3).unwrap();
        let s = LevelSummary::compute(&base4(1, 3), &u, 2, 8, &lim()).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["u"], "1/3");
        assert_eq!(v["base"], "4");
        assert_eq!(v["nu"], "14");
        assert_eq!(v["collisions"].as_array().unwrap().len(), 2);
        assert_eq!(v["collisions"][0]["key"], "4");
    }
}
