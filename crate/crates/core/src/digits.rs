//! Digit systems, rational parameters and the base-`b` digit utilities.
//!
//! A [`DigitSystem`] fixes a base `b` and two digit alphabets. Together with a
//! parameter `u > 0` it defines the sumset
//!
//! ```text
//! E_u = { sum_{j>=1} (a_j + u * c_j) b^-j : a_j in alpha, c_j in beta }
//! ```
//!
//! Three families are supported: the base-4 model (`{0,1}` twice), the square
//! systems in base `r^2` and the mixed systems in base `r*s`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Which family a [`DigitSystem`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemLabel {
    Base4Model,
    Square(u64),
    Mixed(u64, u64),
}

impl fmt::Display for SystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemLabel::Base4Model => write!(f, "Base4Model"),
            SystemLabel::Square(r) => write!(f, "Square({r})"),
            SystemLabel::Mixed(r, s) => write!(f, "Mixed({r},{s})"),
        }
    }
}

impl FromStr for SystemLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::parse("system label", s, reason);
        if s == "Base4Model" {
            return Ok(SystemLabel::Base4Model);
        }
        let inner = |prefix: &str| -> Option<&str> { s.strip_prefix(prefix).and_then(|rest| rest.strip_suffix(')')) };
        if let Some(r) = inner("Square(") {
            let r = r.trim().parse().map_err(|_| bad("r is not an integer"))?;
            return Ok(SystemLabel::Square(r));
        }
        if let Some(rs) = inner("Mixed(") {
            let (r, s_) = rs.split_once(',').ok_or_else(|| bad("expected Mixed(r,s)"))?;
            let r = r.trim().parse().map_err(|_| bad("r is not an integer"))?;
            let s_ = s_.trim().parse().map_err(|_| bad("s is not an integer"))?;
            return Ok(SystemLabel::Mixed(r, s_));
        }
        Err(bad("expected Base4Model, Square(r) or Mixed(r,s)"))
    }
}

/// A base together with the digit alphabets of the two Cantor factors.
///
/// Alphabets are always `{0, .., m-1}` for some `m`; constructors enforce the
/// family invariants so an instance is valid by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitSystem {
    base: u64,
    alpha: Vec<u64>,
    beta: Vec<u64>,
    label: SystemLabel,
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

// Square(r) needs r^2 to fit, and the enumerators multiply digit keys by powers
// of the base; 2^16 keeps all of that comfortably inside u64 for small levels.
const MAX_PRIME: u64 = 1 << 16;

impl DigitSystem {
    /// The base-4 model: both factors have digits `{0, 1}`.
    pub fn base4() -> Self {
        DigitSystem {
            base: 4,
            alpha: vec![0, 1],
            beta: vec![0, 1],
            label: SystemLabel::Base4Model,
        }
    }

    /// Base `r^2`, digits `{0, .., r-1}` for both factors. `r` must be prime.
    pub fn square(r: u64) -> Result<Self> {
        if !is_prime(r) {
            return Err(Error::invalid("r", format!("{r} is not prime")));
        }
        if r > MAX_PRIME {
            return Err(Error::invalid("r", format!("{r} exceeds {MAX_PRIME}")));
        }
        Ok(DigitSystem {
            base: r * r,
            alpha: (0..r).collect(),
            beta: (0..r).collect(),
            label: SystemLabel::Square(r),
        })
    }

    /// Base `r*s`; the first factor uses digits `{0, .., r-1}`, the second `{0, .., s-1}`.
    pub fn mixed(r: u64, s: u64) -> Result<Self> {
        if r == s {
            return Err(Error::invalid("s", "r and s must be distinct primes"));
        }
        for (name, v) in [("r", r), ("s", s)] {
            if !is_prime(v) {
                return Err(Error::invalid(name, format!("{v} is not prime")));
            }
            if v > MAX_PRIME {
                return Err(Error::invalid(name, format!("{v} exceeds {MAX_PRIME}")));
            }
        }
        Ok(DigitSystem {
            base: r * s,
            alpha: (0..r).collect(),
            beta: (0..s).collect(),
            label: SystemLabel::Mixed(r, s),
        })
    }

    pub fn from_label(label: SystemLabel) -> Result<Self> {
        match label {
            SystemLabel::Base4Model => Ok(Self::base4()),
            SystemLabel::Square(r) => Self::square(r),
            SystemLabel::Mixed(r, s) => Self::mixed(r, s),
        }
    }

    /// Parses the command-line form: `base4`, `square:R` or `mixed:R,S`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::parse("digit system", s, reason);
        let s_trim = s.trim();
        if s_trim.eq_ignore_ascii_case("base4") {
            return Ok(Self::base4());
        }
        if let Some(r) = s_trim.strip_prefix("square:") {
            let r: u64 = r.trim().parse().map_err(|_| bad("r is not an integer"))?;
            return Self::square(r).map_err(|e| bad(&e.to_string()));
        }
        if let Some(rs) = s_trim.strip_prefix("mixed:") {
            let (r, t) = rs.split_once(',').ok_or_else(|| bad("expected mixed:R,S"))?;
            let r: u64 = r.trim().parse().map_err(|_| bad("r is not an integer"))?;
            let t: u64 = t.trim().parse().map_err(|_| bad("s is not an integer"))?;
            return Self::mixed(r, t).map_err(|e| bad(&e.to_string()));
        }
        Err(bad("expected base4, square:R or mixed:R,S"))
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn alpha_digits(&self) -> &[u64] {
        &self.alpha
    }

    pub fn beta_digits(&self) -> &[u64] {
        &self.beta
    }

    pub fn label(&self) -> SystemLabel {
        self.label
    }

    pub fn max_alpha(&self) -> u64 {
        self.alpha.len() as u64 - 1
    }

    pub fn max_beta(&self) -> u64 {
        self.beta.len() as u64 - 1
    }

    /// Number of distinct `(alpha, beta)` digit pairs per position.
    pub fn alphabet_size(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    /// The factor `c` in `E' = c * E_beta + i` for the planar set: 2 for the
    /// base-4 model, `r` for the square and mixed systems.
    pub fn second_scale(&self) -> u64 {
        match self.label {
            SystemLabel::Base4Model => 2,
            SystemLabel::Square(r) | SystemLabel::Mixed(r, _) => r,
        }
    }

    /// Convex hull `[0, (max_alpha + u max_beta) / (b - 1)]` of `E_u`.
    pub fn hull(&self, u: &Param) -> Interval {
        let b1 = self.base - 1;
        match u {
            Param::Rational(f) => {
                let hi = (BigRational::from_integer(self.max_alpha().into())
                    + f.to_big_rational() * BigRational::from_integer(self.max_beta().into()))
                    / BigRational::from_integer(b1.into());
                Interval {
                    lo: Value::Exact(BigRational::zero()),
                    hi: Value::Exact(hi),
                }
            }
            Param::Irrational(x) => Interval {
                lo: Value::Float(0.0),
                hi: Value::Float((self.max_alpha() as f64 + x * self.max_beta() as f64) / b1 as f64),
            },
        }
    }
}

impl fmt::Display for DigitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.label.fmt(f)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct DigitSystemRepr {
    base: String,
    alpha_digits: Vec<String>,
    beta_digits: Vec<String>,
    label: String,
}

impl Serialize for DigitSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DigitSystemRepr {
            base: self.base.to_string(),
            alpha_digits: self.alpha.iter().map(u64::to_string).collect(),
            beta_digits: self.beta.iter().map(u64::to_string).collect(),
            label: self.label.to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DigitSystem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = DigitSystemRepr::deserialize(deserializer)?;
        let label: SystemLabel = repr.label.parse().map_err(D::Error::custom)?;
        let system = DigitSystem::from_label(label).map_err(D::Error::custom)?;
        let digits = |v: &[String]| -> std::result::Result<Vec<u64>, D::Error> {
            v.iter().map(|d| d.parse::<u64>().map_err(D::Error::custom)).collect()
        };
        let base: u64 = repr.base.parse().map_err(D::Error::custom)?;
        if base != system.base
            || digits(&repr.alpha_digits)? != system.alpha
            || digits(&repr.beta_digits)? != system.beta
        {
            return Err(D::Error::custom(format!("fields do not match the {label} system")));
        }
        Ok(system)
    }
}

/// `star(n, b)`: the position `j*` and value `n*` of the first nonzero base-`b`
/// digit of `n`, reading from the least significant end.
pub fn star(n: &BigUint, base: u64) -> Result<(u64, u64)> {
    if n.is_zero() {
        return Err(Error::invalid("n", "n* is undefined for n = 0"));
    }
    if base < 2 {
        return Err(Error::invalid("base", format!("base {base} < 2")));
    }
    let b = BigUint::from(base);
    let mut m = n.clone();
    let mut j = 0u64;
    loop {
        let (quot, rem) = m.div_rem(&b);
        if !rem.is_zero() {
            // rem < base, so it fits
            return Ok((j, rem.to_u64().expect("digit below base")));
        }
        m = quot;
        j += 1;
    }
}

/// [`star`] for machine integers.
pub fn star_u64(n: u64, base: u64) -> Result<(u64, u64)> {
    star(&BigUint::from(n), base)
}

/// A reduced positive fraction `p/q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fraction {
    p: BigUint,
    q: BigUint,
}

impl Fraction {
    pub fn new(p: BigUint, q: BigUint) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::invalid("p", "must be positive"));
        }
        if q.is_zero() {
            return Err(Error::invalid("q", "must be positive"));
        }
        let g = p.gcd(&q);
        Ok(Fraction { p: p / &g, q: q / &g })
    }

    pub fn from_u64(p: u64, q: u64) -> Result<Self> {
        Self::new(p.into(), q.into())
    }

    pub fn numer(&self) -> &BigUint {
        &self.p
    }

    pub fn denom(&self) -> &BigUint {
        &self.q
    }

    /// Numerator and denominator as `u64`, if both fit.
    pub fn to_u64_pair(&self) -> Option<(u64, u64)> {
        Some((self.p.to_u64()?, self.q.to_u64()?))
    }

    pub fn recip(&self) -> Self {
        Fraction {
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }

    /// `self * b^k` for a possibly negative exponent.
    pub fn scale_by_power(&self, base: u64, k: i64) -> Self {
        let f = BigUint::from(base).pow(k.unsigned_abs() as u32);
        if k >= 0 {
            Self::new(&self.p * f, self.q.clone()).expect("nonzero")
        } else {
            Self::new(self.p.clone(), &self.q * f).expect("nonzero")
        }
    }

    pub fn to_big_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.p.clone()), BigInt::from(self.q.clone()))
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.to_big_rational())
    }

    /// Parses `p/q` or a bare positive integer `p`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::parse("rational", s, reason);
        let int = |t: &str| -> Result<BigUint> {
            let t = t.trim();
            if t.is_empty() || !t.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad("expected decimal digits"));
            }
            if t.len() > 4096 {
                return Err(bad("too many digits"));
            }
            t.parse::<BigUint>().map_err(|_| bad("expected decimal digits"))
        };
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (int(p)?, int(q)?),
            None => (int(s)?, BigUint::one()),
        };
        Self::new(p, q).map_err(|e| bad(&e.to_string()))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Fraction::parse(&s).map_err(D::Error::custom)
    }
}

/// The sumset parameter `u > 0`: an exact fraction, or a real tagged as irrational.
///
/// An irrational parameter is only ever used numerically (cover endpoints, Fourier
/// phases); branch decisions read the tag, never the float.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Rational(Fraction),
    Irrational(f64),
}

impl Param {
    pub fn rational(p: u64, q: u64) -> Result<Self> {
        Ok(Param::Rational(Fraction::from_u64(p, q)?))
    }

    pub fn irrational(x: f64) -> Result<Self> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::invalid("u", format!("{x} is not a positive finite real")));
        }
        Ok(Param::Irrational(x))
    }

    /// Parses `p/q` (or an integer) exactly; with `irrational` set, parses a
    /// positive decimal instead. A decimal without the flag is rejected.
    pub fn parse(s: &str, irrational: bool) -> Result<Self> {
        if irrational {
            let x: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::parse("irrational u", s, "expected a decimal number"))?;
            return Self::irrational(x).map_err(|e| Error::parse("irrational u", s, e.to_string()));
        }
        if s.contains(['.', 'e', 'E']) {
            return Err(Error::parse(
                "u",
                s,
                "decimal input requires the irrational flag; use p/q for exact values",
            ));
        }
        Fraction::parse(s).map(Param::Rational)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Param::Rational(f) => f.to_f64(),
            Param::Irrational(x) => *x,
        }
    }

    pub fn as_fraction(&self) -> Option<&Fraction> {
        match self {
            Param::Rational(f) => Some(f),
            Param::Irrational(_) => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Param::Rational(_))
    }

    pub fn recip(&self) -> Self {
        match self {
            Param::Rational(f) => Param::Rational(f.recip()),
            Param::Irrational(x) => Param::Irrational(1.0 / x),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Rational(r) => r.fmt(f),
            Param::Irrational(x) => write!(f, "{x}~"),
        }
    }
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Param::Rational(r) => serializer.collect_str(r),
            Param::Irrational(x) => serializer.serialize_f64(*x),
        }
    }
}

/// A reduced `p/q` together with the base-`b` first nonzero digits of `p` and `q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalParam {
    fraction: Fraction,
    base: u64,
    p_star: u64,
    q_star: u64,
    j_star_p: u64,
    j_star_q: u64,
}

impl RationalParam {
    pub fn new(fraction: &Fraction, base: u64) -> Result<Self> {
        let (j_star_p, p_star) = star(fraction.numer(), base)?;
        let (j_star_q, q_star) = star(fraction.denom(), base)?;
        let param = RationalParam {
            fraction: fraction.clone(),
            base,
            p_star,
            q_star,
            j_star_p,
            j_star_q,
        };
        debug_assert!(
            base != 4 || param.stars_both_odd() != param.stars_sum_odd(),
            "coprime p/q must satisfy exactly one of the base-4 parity cases"
        );
        Ok(param)
    }

    /// `makeRational`: reduce `p/q` and compute the star digits in `base`.
    pub fn make(p: u64, q: u64, base: u64) -> Result<Self> {
        Self::new(&Fraction::from_u64(p, q)?, base)
    }

    pub fn fraction(&self) -> &Fraction {
        &self.fraction
    }

    pub fn p(&self) -> &BigUint {
        self.fraction.numer()
    }

    pub fn q(&self) -> &BigUint {
        self.fraction.denom()
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn p_star(&self) -> u64 {
        self.p_star
    }

    pub fn q_star(&self) -> u64 {
        self.q_star
    }

    pub fn j_star_p(&self) -> u64 {
        self.j_star_p
    }

    pub fn j_star_q(&self) -> u64 {
        self.j_star_q
    }

    pub fn stars_both_odd(&self) -> bool {
        self.p_star % 2 == 1 && self.q_star % 2 == 1
    }

    pub fn stars_sum_odd(&self) -> bool {
        (self.p_star + self.q_star) % 2 == 1
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RationalParamRepr {
    p: String,
    q: String,
    base: String,
    p_star: String,
    q_star: String,
    j_star_p: String,
    j_star_q: String,
}

impl Serialize for RationalParam {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RationalParamRepr {
            p: self.p().to_string(),
            q: self.q().to_string(),
            base: self.base.to_string(),
            p_star: self.p_star.to_string(),
            q_star: self.q_star.to_string(),
            j_star_p: self.j_star_p.to_string(),
            j_star_q: self.j_star_q.to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalParam {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = RationalParamRepr::deserialize(deserializer)?;
        let fraction = Fraction::parse(&format!("{}/{}", repr.p, repr.q)).map_err(D::Error::custom)?;
        if fraction.numer().to_string() != repr.p.trim() || fraction.denom().to_string() != repr.q.trim() {
            return Err(D::Error::custom("p/q is not in lowest terms"));
        }
        let base: u64 = repr.base.parse().map_err(D::Error::custom)?;
        if !(2..=MAX_PRIME * MAX_PRIME).contains(&base) {
            return Err(D::Error::custom(format!("base {base} out of range")));
        }
        let param = RationalParam::new(&fraction, base).map_err(D::Error::custom)?;
        let fields = [
            (&repr.p_star, param.p_star),
            (&repr.q_star, param.q_star),
            (&repr.j_star_p, param.j_star_p),
            (&repr.j_star_q, param.j_star_q),
        ];
        for (given, expected) in fields {
            if given.parse::<u64>().ok() != Some(expected) {
                return Err(D::Error::custom("star digits do not match p/q in this base"));
            }
        }
        Ok(param)
    }
}

/// An exact rational or a float, used for interval endpoints and measures.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => ratio_to_f64(r),
            Value::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            Value::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(_) => serializer.collect_str(self),
            Value::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub lo: Value,
    pub hi: Value,
}

impl Interval {
    pub fn length(&self) -> Value {
        match (&self.lo, &self.hi) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(b - a),
            (a, b) => Value::Float(b.to_f64() - a.to_f64()),
        }
    }
}

/// Float conversion that survives numerators and denominators beyond `f64` range.
pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits().max(r.denom().bits()) as i64 - 900;
    let n = if shift > 0 {
        r.numer() >> shift as usize
    } else {
        r.numer().clone()
    };
    let d = if shift > 0 {
        r.denom() >> shift as usize
    } else {
        r.denom().clone()
    };
    n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(f64::INFINITY)
}
