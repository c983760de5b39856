//! Fourier transform of the canonical probability measure on `E_u`.
//!
//! With uniform digits, `mu_hat(t) = prod_{j>=1} D_alpha(b^-j t) D_beta(u b^-j t)`
//! where `D_m(x) = (1/m) sum_{k<m} e^{ikx}`. Each factor is written as
//! `e^{i(m-1)x/2} R_m(x)` with the real kernel
//! `R_m(x) = (1/m) sum_k cos((k - (m-1)/2) x)`. The phases telescope to
//! `t (max_alpha + u max_beta) / (2(b-1))`, so only the real magnitudes need
//! truncating. Since `R_m(x) >= 1 - Var_m x^2 / 2` with `Var_m = (m^2-1)/12`,
//! dropping every factor past `J` costs at most
//! `(Var_alpha + u^2 Var_beta) t^2 b^-2J / (2 (b^2 - 1))`.
//!
//! Frequencies that are rational multiples of `pi` are kept exact: each
//! factor's argument is reduced modulo `4 pi` in rational arithmetic, and
//! exact zeros and unit factors are decided before any float is formed.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::digits::{ratio_to_f64, DigitSystem, Fraction, Param};
use crate::error::{Error, Result};

/// Hard ceiling on the number of product factors evaluated.
pub const MAX_TRUNCATION: u32 = 4096;

/// A frequency `t`, either exactly `X pi` for rational `X` or a plain float.
#[derive(Debug, Clone, PartialEq)]
pub enum Frequency {
    PiMultiple(BigRational),
    Real(f64),
}

impl Frequency {
    /// `2 q b^n pi`, where all head factors of the product are exactly one in modulus.
    pub fn probe(q: u64, base: u64, n: u32) -> Self {
        let x = BigInt::from(2u8) * BigInt::from(q) * BigInt::from(base).pow(n);
        Frequency::PiMultiple(BigRational::from_integer(x))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Frequency::PiMultiple(x) => ratio_to_f64(x) * std::f64::consts::PI,
            Frequency::Real(t) => *t,
        }
    }

    fn scaled(&self, num: u64, den: u64) -> Self {
        match self {
            Frequency::PiMultiple(x) => Frequency::PiMultiple(x * BigRational::new(num.into(), den.into())),
            Frequency::Real(t) => Frequency::Real(t * num as f64 / den as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierEvaluation {
    pub t: f64,
    /// Number of product factors `J` kept.
    pub truncation: u32,
    pub value: Complex64,
    pub abs_value: f64,
    /// Bound on `|value - mu_hat(t)|`.
    pub tail_bound: f64,
    /// Some kept factor vanishes identically, so `mu_hat(t) = 0` exactly.
    pub exact_zero: bool,
}

impl Serialize for FourierEvaluation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("FourierEvaluation", 7)?;
        s.serialize_field("t", &self.t)?;
        s.serialize_field("J", &self.truncation)?;
        s.serialize_field("re", &self.value.re)?;
        s.serialize_field("im", &self.value.im)?;
        s.serialize_field("absValue", &self.abs_value)?;
        s.serialize_field("tailBound", &self.tail_bound)?;
        s.serialize_field("exactZero", &self.exact_zero)?;
        s.end()
    }
}

/// The argument of one kernel factor: `pi * Y` with exact `Y`, or a float.
enum Arg {
    Pi(BigRational),
    Float(f64),
}

/// `R_m` at `arg`. Returns `None` when the factor is exactly zero.
fn kernel(m: u64, arg: &Arg) -> Option<f64> {
    if m == 1 {
        return Some(1.0);
    }
    let x = match arg {
        Arg::Pi(y) => {
            // R_m has period 4 pi; R_m(pi Y) = 0 iff mY/2 is an integer and Y/2 is not.
            let half = y / BigRational::from_integer(2.into());
            if half.is_integer() {
                let k = half.to_integer();
                return Some(if k.is_odd() && m.is_multiple_of(2) { -1.0 } else { 1.0 });
            }
            if (&half * BigRational::from_integer(m.into())).is_integer() {
                return None;
            }
            let four = BigInt::from(4u8);
            let reduced = BigRational::new(y.numer().mod_floor(&(y.denom() * &four)), y.denom().clone());
            ratio_to_f64(&reduced) * std::f64::consts::PI
        }
        Arg::Float(x) => *x,
    };
    let c = (m as f64 - 1.0) / 2.0;
    let sum: f64 = (0..m).map(|k| ((k as f64 - c) * x).cos()).sum();
    Some(sum / m as f64)
}

fn variance(m: u64) -> f64 {
    (m as f64 * m as f64 - 1.0) / 12.0
}

/// Tail bound after keeping `j` factors at frequency `|t|`.
fn tail_after(system: &DigitSystem, u: f64, t: f64, j: u32) -> f64 {
    let b = system.base() as f64;
    let var = variance(system.alpha_digits().len() as u64) + u * u * variance(system.beta_digits().len() as u64);
    var * t * t * b.powi(-2 * j as i32) / (2.0 * (b * b - 1.0))
}

fn validate(u: &Param, t: &Frequency) -> Result<()> {
    if u.to_f64() <= 0.0 {
        return Err(Error::invalid("u", "must be positive"));
    }
    if let Frequency::Real(x) = t {
        if !x.is_finite() {
            return Err(Error::invalid("t", "must be finite"));
        }
    }
    Ok(())
}

/// Evaluates `mu_hat(t)`, keeping the fewest factors whose tail bound is at most `tolerance`.
pub fn mu_hat(system: &DigitSystem, u: &Param, t: &Frequency, tolerance: f64) -> Result<FourierEvaluation> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::invalid("tolerance", "must be a positive finite number"));
    }
    validate(u, t)?;
    let tf = t.to_f64().abs();
    let uf = u.to_f64();
    let mut j = 0;
    while tail_after(system, uf, tf, j) > tolerance {
        j += 1;
        if j > MAX_TRUNCATION {
            return Err(Error::ResourceLimit {
                what: "Fourier truncation",
                requested: j as u128,
                limit: MAX_TRUNCATION as u128,
            });
        }
    }
    mu_hat_truncated(system, u, t, j)
}

/// Evaluates `mu_hat(t)` keeping exactly `j` factors.
pub fn mu_hat_truncated(system: &DigitSystem, u: &Param, t: &Frequency, j: u32) -> Result<FourierEvaluation> {
    validate(u, t)?;
    if j > MAX_TRUNCATION {
        return Err(Error::ResourceLimit {
            what: "Fourier truncation",
            requested: j as u128,
            limit: MAX_TRUNCATION as u128,
        });
    }
    let b = system.base();
    let ma = system.alpha_digits().len() as u64;
    let mb = system.beta_digits().len() as u64;
    let tf = t.to_f64();
    let uf = u.to_f64();

    let mut log_mag = 0f64;
    let mut negative = false;
    let mut exact_zero = false;
    for k in 1..=j {
        let (arg_a, arg_b) = match (t, u) {
            (Frequency::PiMultiple(x), Param::Rational(f)) => {
                let xa = x / BigRational::from_integer(BigInt::from(b).pow(k));
                let xb = &xa * f.to_big_rational();
                (Arg::Pi(xa), Arg::Pi(xb))
            }
            (Frequency::PiMultiple(x), Param::Irrational(_)) => {
                let xa = x / BigRational::from_integer(BigInt::from(b).pow(k));
                let xb = ratio_to_f64(&xa) * std::f64::consts::PI * uf;
                (Arg::Pi(xa), Arg::Float(xb))
            }
            (Frequency::Real(x), _) => {
                let xa = x * (b as f64).powi(-(k as i32));
                (Arg::Float(xa), Arg::Float(xa * uf))
            }
        };
        for (m, arg) in [(ma, arg_a), (mb, arg_b)] {
            match kernel(m, &arg) {
                None => exact_zero = true,
                Some(0.0) => exact_zero = true,
                Some(r) => {
                    log_mag += r.abs().ln();
                    negative ^= r < 0.0;
                }
            }
        }
        if exact_zero {
            break;
        }
    }

    let tail_bound = tail_after(system, uf, tf.abs(), j);
    if exact_zero {
        return Ok(FourierEvaluation {
            t: tf,
            truncation: j,
            value: Complex64::new(0.0, 0.0),
            abs_value: 0.0,
            tail_bound: 0.0,
            exact_zero: true,
        });
    }
    let mag = log_mag.exp();
    let phase = total_phase(system, u, t);
    let signed = if negative { -mag } else { mag };
    let value = Complex64::from_polar(signed, phase);
    Ok(FourierEvaluation {
        t: tf,
        truncation: j,
        value,
        abs_value: mag,
        tail_bound,
        exact_zero: false,
    })
}

/// `t (max_alpha + u max_beta) / (2(b-1))`, reduced modulo `2 pi` exactly when possible.
fn total_phase(system: &DigitSystem, u: &Param, t: &Frequency) -> f64 {
    let b1 = system.base() - 1;
    match (t, u) {
        (Frequency::PiMultiple(x), Param::Rational(f)) => {
            let w = (BigRational::from_integer(system.max_alpha().into())
                + f.to_big_rational() * BigRational::from_integer(system.max_beta().into()))
                / BigRational::from_integer((2 * b1).into());
            let y = x * w;
            let two = BigInt::from(2u8);
            let reduced = BigRational::new(y.numer().mod_floor(&(y.denom() * &two)), y.denom().clone());
            ratio_to_f64(&reduced) * std::f64::consts::PI
        }
        _ => {
            let w = (system.max_alpha() as f64 + u.to_f64() * system.max_beta() as f64) / (2 * b1) as f64;
            (t.to_f64() * w).rem_euclid(std::f64::consts::TAU)
        }
    }
}

/// One step of the product: `D_alpha(x) D_beta(u x)` with its phase.
pub fn step_factor(system: &DigitSystem, u: f64, x: f64) -> Complex64 {
    let d = |m: usize, y: f64| -> Complex64 {
        (0..m)
            .map(|k| Complex64::from_polar(1.0, k as f64 * y))
            .sum::<Complex64>()
            / m as f64
    };
    d(system.alpha_digits().len(), x) * d(system.beta_digits().len(), u * x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbePoint {
    pub n: u32,
    pub t: f64,
    pub abs_value: f64,
    pub tail_bound: f64,
    pub exact_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LimsupProbe {
    /// Every probe value exceeds ten times the tolerance.
    pub bounded_away_from_zero: bool,
    /// All probe values agree within twice the tolerance.
    pub constant: bool,
    pub values: Vec<ProbePoint>,
}

/// `|mu_hat(2 q b^n pi)|` for `n` in `n_range`.
pub fn limsup_probe(
    system: &DigitSystem,
    u: &Fraction,
    n_range: RangeInclusive<u32>,
    tolerance: f64,
) -> Result<LimsupProbe> {
    if n_range.is_empty() {
        return Err(Error::invalid("nRange", "must be nonempty"));
    }
    let (_, q) = u
        .to_u64_pair()
        .ok_or_else(|| Error::invalid("u", "numerator and denominator must fit in u64"))?;
    let param = Param::Rational(u.clone());
    let values = n_range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| {
            let t = Frequency::probe(q, system.base(), n);
            mu_hat(system, &param, &t, tolerance).map(|e| ProbePoint {
                n,
                t: e.t,
                abs_value: e.abs_value,
                tail_bound: e.tail_bound,
                exact_zero: e.exact_zero,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lo = values.iter().map(|v| v.abs_value).fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(|v| v.abs_value).fold(0.0, f64::max);
    Ok(LimsupProbe {
        bounded_away_from_zero: lo > 10.0 * tolerance,
        constant: hi - lo <= 2.0 * tolerance,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BandMax {
    pub k: u32,
    pub lo: f64,
    pub hi: f64,
    pub sup_abs: f64,
    pub argmax: f64,
}

fn van_der_corput(mut i: u64) -> f64 {
    let mut x = 0.0;
    let mut w = 0.5;
    while i > 0 {
        if i & 1 == 1 {
            x += w;
        }
        i >>= 1;
        w *= 0.5;
    }
    x
}

/// Sampled maxima of `|mu_hat|` over the bands `[b^k, b^(k+1)]`, `k = 2..=band_count+1`.
///
/// Samples follow a van der Corput sequence rotated by a seeded offset, plus
/// every probe frequency `2 q b^n pi` that falls in the band when `u` is rational.
pub fn decay_scan(
    system: &DigitSystem,
    u: &Param,
    band_count: u32,
    samples_per_band: u32,
    tolerance: f64,
    seed: u64,
) -> Result<Vec<BandMax>> {
    if band_count < 2 {
        return Err(Error::invalid("bandCount", "must be at least 2"));
    }
    if samples_per_band == 0 {
        return Err(Error::invalid("samplesPerBand", "must be at least 1"));
    }
    validate(u, &Frequency::Real(0.0))?;
    let b = system.base();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (2..=band_count + 1)
        .map(|k| {
            let rotation: f64 = rng.gen();
            let lo = (b as f64).powi(k as i32);
            let hi = lo * b as f64;
            let mut ts: Vec<Frequency> = (0..samples_per_band as u64)
                .map(|i| {
                    let s = (van_der_corput(i) + rotation).fract();
                    Frequency::Real(lo + (hi - lo) * s)
                })
                .collect();
            if let Param::Rational(f) = u {
                if let Some((_, q)) = f.to_u64_pair() {
                    for n in 0..=k + 1 {
                        let t = Frequency::probe(q, b, n);
                        let tf = t.to_f64();
                        if tf >= lo && tf <= hi {
                            ts.push(t);
                        }
                    }
                }
            }
            let evals = ts
                .par_iter()
                .map(|t| mu_hat(system, u, t, tolerance))
                .collect::<Result<Vec<_>>>()?;
            let best = evals
                .iter()
                .fold(None::<&FourierEvaluation>, |acc, e| match acc {
                    Some(a) if a.abs_value >= e.abs_value => Some(a),
                    _ => Some(e),
                })
                .expect("at least one sample");
            Ok(BandMax {
                k,
                lo,
                hi,
                sup_abs: best.abs_value,
                argmax: best.t,
            })
        })
        .collect()
}

/// Convenience for tests and callers holding `t` as a float multiple of `pi`.
pub fn pi_multiple(num: i64, den: u64) -> Frequency {
    Frequency::PiMultiple(BigRational::new(num.into(), den.into()))
}

impl Frequency {
    /// `t / b`, kept exact for multiples of `pi`.
    pub fn divided_by(&self, b: u64) -> Self {
        self.scaled(1, b)
    }

    pub fn negated(&self) -> Self {
        match self {
            Frequency::PiMultiple(x) => Frequency::PiMultiple(-x),
            Frequency::Real(t) => Frequency::Real(-t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Frequency::PiMultiple(x) => x.is_zero(),
            Frequency::Real(t) => *t == 0.0,
        }
    }
}
