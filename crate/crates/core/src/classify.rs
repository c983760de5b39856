//! Decision procedures: does `E_u` contain an interval, or is it a thin set?
//!
//! For rational `u = p/q` the answer depends only on the first nonzero digits
//! `p*`, `q*` in the system's base:
//!
//! | system        | interval (positive measure) when |
//! |---------------|----------------------------------|
//! | base-4 model  | `p* + q*` odd                    |
//! | base `r^2`    | `r | p*` or `r | q*`             |
//! | base `r*s`    | `r | p*` or `s | q*`             |
//!
//! Otherwise `E_u` is null with dimension below one, and some `V_n` has a
//! multiple point; a witness for that is found by enumeration when requested.
//! Irrational `u` always gives a null set, decided by the type tag.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::digits::{DigitSystem, Fraction, Param, RationalParam, SystemLabel};
use crate::error::{Error, Result};
use crate::lattice::DigitLattice;
use crate::limits::Limits;
use crate::measure::dim_upper_bound_from_collision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    /// `E_u` is the closure of its interior; no `V_n` has a multiple point.
    IntervalCase,
    /// `E_u` is null with dimension `< 1`; some `V_n` has a multiple point.
    SingularThinCase,
    /// `u` irrational: `E_u` is null and no `V_n` has a multiple point.
    IrrationalCase,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::IntervalCase => "IntervalCase",
            Branch::SingularThinCase => "SingularThinCase",
            Branch::IrrationalCase => "IrrationalCase",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which decision rule produced a [`Classification`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    Base4Parity,
    SquareDivisibility {
        r: u64,
    },
    MixedDivisibility {
        r: u64,
        s: u64,
    },
    /// Product set `(E_u)^d`, decided by the one-dimensional rule.
    ProductOfBase4 {
        d: u32,
    },
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Base4Parity => write!(f, "base4-parity"),
            Criterion::SquareDivisibility { r } => write!(f, "square-divisibility(r={r})"),
            Criterion::MixedDivisibility { r, s } => write!(f, "mixed-divisibility(r={r},s={s})"),
            Criterion::ProductOfBase4 { d } => write!(f, "product-of-base4(d={d})"),
        }
    }
}

/// Enumeration evidence for the thin branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witnesses {
    /// First level with a multiple point.
    pub n0: u32,
    /// `#V_{n0}`, strictly below `b^{n0}`.
    pub nu: u64,
    /// `log nu / (n0 log b)`, times `d` for product sets.
    pub dim_upper_bound: f64,
}

/// `u = b^base_shift * value^(+-1)`, with `value` in lowest terms and no
/// trailing base-`b` zeros in its numerator or denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalization {
    pub value: Fraction,
    pub reciprocal: bool,
    pub base_shift: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub u: Param,
    pub base: u64,
    pub branch: Branch,
    pub criterion: Criterion,
    pub star: Option<(u64, u64)>,
    pub normalized: Option<Normalization>,
    pub witnesses: Option<Witnesses>,
}

impl Serialize for Classification {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Classification", 10)?;
        st.serialize_field("u", &self.u)?;
        st.serialize_field("base", &self.base.to_string())?;
        st.serialize_field("branch", &self.branch)?;
        st.serialize_field("theorem", &self.criterion.to_string())?;
        st.serialize_field("pStar", &self.star.map(|s| s.0.to_string()))?;
        st.serialize_field("qStar", &self.star.map(|s| s.1.to_string()))?;
        st.serialize_field("n0", &self.witnesses.map(|w| w.n0))?;
        st.serialize_field("nu", &self.witnesses.map(|w| w.nu.to_string()))?;
        st.serialize_field("dimUpperBound", &self.witnesses.map(|w| w.dim_upper_bound))?;
        st.serialize_field("normalizedU", &self.normalized.as_ref().map(|n| n.value.to_string()))?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifyOptions {
    /// Scan levels `1..=n` for a collision witness in the thin branch; `None` skips it.
    pub witness_levels: Option<u32>,
    pub limits: Limits,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            witness_levels: Some(8),
            limits: Limits::default(),
        }
    }
}

impl ClassifyOptions {
    /// Branch only, no enumeration.
    pub fn branch_only() -> Self {
        ClassifyOptions {
            witness_levels: None,
            limits: Limits::default(),
        }
    }
}

/// Branch of a rational parameter under the rule of `system`.
pub fn rational_branch(system: &DigitSystem, u: &RationalParam) -> Branch {
    debug_assert_eq!(system.base(), u.base());
    let (ps, qs) = (u.p_star(), u.q_star());
    let interval = match system.label() {
        SystemLabel::Base4Model => (ps + qs) % 2 == 1,
        SystemLabel::Square(r) => ps % r == 0 || qs % r == 0,
        SystemLabel::Mixed(r, s) => ps % r == 0 || qs % s == 0,
    };
    if interval {
        Branch::IntervalCase
    } else {
        Branch::SingularThinCase
    }
}

fn strip_base(n: &BigUint, base: u64, j: u64) -> BigUint {
    n / BigUint::from(base).pow(j as u32)
}

/// Strips trailing base-`b` zeros from `p` and `q`, then (for symmetric
/// alphabets) inverts so the result lies in `(0, 1]`.
pub fn normalize(system: &DigitSystem, u: &RationalParam) -> Normalization {
    let b = system.base();
    let p = strip_base(u.p(), b, u.j_star_p());
    let q = strip_base(u.q(), b, u.j_star_q());
    let shift = u.j_star_p() as i64 - u.j_star_q() as i64;
    let value = Fraction::new(p, q).expect("nonzero");
    let symmetric = system.alpha_digits() == system.beta_digits();
    if symmetric && value.numer() > value.denom() {
        Normalization {
            value: value.recip(),
            reciprocal: true,
            base_shift: shift,
        }
    } else {
        Normalization {
            value,
            reciprocal: false,
            base_shift: shift,
        }
    }
}

fn classify_with(
    system: &DigitSystem,
    u: &Param,
    criterion: Criterion,
    dim_factor: u32,
    opts: &ClassifyOptions,
) -> Result<Classification> {
    let fraction = match u {
        Param::Irrational(x) => {
            if !(x.is_finite() && *x > 0.0) {
                return Err(Error::invalid("u", "must be positive"));
            }
            return Ok(Classification {
                u: u.clone(),
                base: system.base(),
                branch: Branch::IrrationalCase,
                criterion,
                star: None,
                normalized: None,
                witnesses: None,
            });
        }
        Param::Rational(f) => f,
    };
    let rp = RationalParam::new(fraction, system.base())?;
    let branch = rational_branch(system, &rp);
    let normalized = normalize(system, &rp);
    let witnesses = match (branch, opts.witness_levels) {
        (Branch::SingularThinCase, Some(levels)) => {
            let lattice = DigitLattice::new(system, &normalized.value)?;
            let report = lattice.first_collision(levels, &opts.limits)?;
            match (report.first_level, report.nu) {
                (Some(n0), Some(nu)) => {
                    let bound = dim_upper_bound_from_collision(n0, nu, system.base())?;
                    Some(Witnesses {
                        n0,
                        nu,
                        dim_upper_bound: dim_factor as f64 * bound,
                    })
                }
                _ => None,
            }
        }
        _ => None,
    };
    Ok(Classification {
        u: u.clone(),
        base: system.base(),
        branch,
        criterion,
        star: Some((rp.p_star(), rp.q_star())),
        normalized: Some(normalized),
        witnesses,
    })
}

/// Base-4 model: interval iff `p* + q*` is odd.
pub fn classify_base4(u: &Param, opts: &ClassifyOptions) -> Result<Classification> {
    classify_with(&DigitSystem::base4(), u, Criterion::Base4Parity, 1, opts)
}

/// Base `r^2` system: interval iff `r` divides `p*` or `q*`.
pub fn classify_square(r: u64, u: &Param, opts: &ClassifyOptions) -> Result<Classification> {
    let system = DigitSystem::square(r)?;
    classify_with(&system, u, Criterion::SquareDivisibility { r }, 1, opts)
}

/// Base `r*s` system: interval iff `r | p*` or `s | q*`.
pub fn classify_mixed(r: u64, s: u64, u: &Param, opts: &ClassifyOptions) -> Result<Classification> {
    let system = DigitSystem::mixed(r, s)?;
    classify_with(&system, u, Criterion::MixedDivisibility { r, s }, 1, opts)
}

/// Dispatches on the family of `system`.
pub fn classify_system(system: &DigitSystem, u: &Param, opts: &ClassifyOptions) -> Result<Classification> {
    match system.label() {
        SystemLabel::Base4Model => classify_base4(u, opts),
        SystemLabel::Square(r) => classify_square(r, u, opts),
        SystemLabel::Mixed(r, s) => classify_mixed(r, s, u, opts),
    }
}

/// The product set `F_u = (E_u)^d`: same branch as `d = 1`, dimension bound times `d`.
pub fn classify_multi_dim(d: u32, u: &Param, opts: &ClassifyOptions) -> Result<Classification> {
    if d < 1 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    classify_with(&DigitSystem::base4(), u, Criterion::ProductOfBase4 { d }, d, opts)
}

/// Measure class of the projected sieve `{ sum a_j 3^-j : a_j in {0, 1, u} }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SieveClass {
    PositiveMeasure,
    ThinDimension,
}

/// Positive measure iff `u = p/q` in lowest terms with `p + q = 0 mod 3`.
pub fn classify_projected_sieve(p: u64, q: u64) -> Result<SieveClass> {
    if p == 0 || q == 0 {
        return Err(Error::invalid("u", "p and q must be positive"));
    }
    if p.gcd(&q) != 1 {
        return Err(Error::invalid("u", format!("{p}/{q} is not in lowest terms")));
    }
    if (p as u128 + q as u128).is_multiple_of(3) {
        Ok(SieveClass::PositiveMeasure)
    } else {
        Ok(SieveClass::ThinDimension)
    }
}

/// A horizontal section height `h` and the sumset parameter it induces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionParam {
    pub h: Param,
    pub u: Param,
}

/// `u = c h / (1 - h)`, with `c` the scale of the upper Cantor set (2 for the base-4 model).
pub fn section_to_u(h: &Param, system: &DigitSystem) -> Result<SectionParam> {
    let c = system.second_scale();
    let u = match h {
        Param::Rational(f) => {
            if f.numer() >= f.denom() {
                return Err(Error::invalid("h", format!("{f} is not in (0, 1)")));
            }
            let (p, q) = (f.numer(), f.denom());
            Param::Rational(Fraction::new(p * c, q - p)?)
        }
        Param::Irrational(x) => {
            if !(*x > 0.0 && *x < 1.0) {
                return Err(Error::invalid("h", format!("{x} is not in (0, 1)")));
            }
            Param::Irrational(c as f64 * x / (1.0 - x))
        }
    };
    Ok(SectionParam { h: h.clone(), u })
}

/// Inverse of [`section_to_u`]: `h = u / (u + c)`.
pub fn u_to_section(u: &Param, system: &DigitSystem) -> Result<SectionParam> {
    let c = system.second_scale();
    let h = match u {
        Param::Rational(f) => {
            let (p, q) = (f.numer(), f.denom());
            Param::Rational(Fraction::new(p.clone(), p + q * c)?)
        }
        Param::Irrational(x) => {
            if !(x.is_finite() && *x > 0.0) {
                return Err(Error::invalid("u", "must be positive"));
            }
            Param::Irrational(x / (x + c as f64))
        }
    };
    Ok(SectionParam { h, u: u.clone() })
}

/// `h -> 4h / (3h + 1)` maps the section for `u` onto the section for `4u`.
pub fn shifted_section(h: &Fraction) -> Fraction {
    let (p, q) = (h.numer(), h.denom());
    Fraction::new(p * 4u32, p * 3u32 + q).expect("positive")
}

/// True iff the sections at `h` and `4h / (3h + 1)` fall in the same branch.
pub fn section_invariance(h: &Fraction) -> Result<bool> {
    let system = DigitSystem::base4();
    let opts = ClassifyOptions::branch_only();
    let a = section_to_u(&Param::Rational(h.clone()), &system)?;
    let b = section_to_u(&Param::Rational(shifted_section(h)), &system)?;
    Ok(classify_base4(&a.u, &opts)?.branch == classify_base4(&b.u, &opts)?.branch)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: u64, q: u64) -> Param {
        Param::rational(p, q).unwrap()
    }

    fn base4(p: u64, q: u64) -> Classification {
        classify_base4(&rat(p, q), &ClassifyOptions::default()).unwrap()
    }

    #[test]
    fn base4_examples() {
        assert_eq!(base4(2, 1).branch, Branch::IntervalCase);
        assert_eq!(base4(1, 2).branch, Branch::IntervalCase);
        let one = base4(1, 1);
        assert_eq!(one.branch, Branch::SingularThinCase);
        let w = one.witnesses.unwrap();
        assert_eq!((w.n0, w.nu), (1, 3));
        assert!((w.dim_upper_bound - 3f64.ln() / 4f64.ln()).abs() < 1e-12);

        let irr = classify_base4(&Param::irrational(2f64.sqrt()).unwrap(), &ClassifyOptions::default()).unwrap();
        assert_eq!(irr.branch, Branch::IrrationalCase);
        assert!(irr.witnesses.is_none());
        assert!(classify_base4(&Param::Irrational(-1.0), &ClassifyOptions::default()).is_err());
    }

    #[test]
    fn normalization_records_shift_and_inversion() {
        let c = base4(4, 3);
        assert_eq!(c.branch, Branch::SingularThinCase);
        let n = c.normalized.unwrap();
        assert_eq!(n.value, Fraction::from_u64(1, 3).unwrap());
        assert_eq!((n.reciprocal, n.base_shift), (false, 1));
        assert_eq!(c.witnesses.unwrap().n0, 2);

        let n = base4(5, 16).normalized.unwrap();
        assert_eq!(n.value, Fraction::from_u64(1, 5).unwrap());
        assert_eq!((n.reciprocal, n.base_shift), (true, -2));
    }

    #[test]
    fn square_examples() {
        let o = ClassifyOptions::default();
        let c = classify_square(3, &rat(1, 3), &o).unwrap();
        assert_eq!(c.star, Some((1, 3)));
        assert_eq!(c.branch, Branch::IntervalCase);
        assert_eq!(
            classify_square(3, &rat(1, 1), &o).unwrap().branch,
            Branch::SingularThinCase
        );
        assert!(classify_square(4, &rat(1, 1), &o).is_err());
    }

    #[test]
    fn mixed_examples() {
        let o = ClassifyOptions::default();
        let c = classify_mixed(2, 3, &rat(1, 2), &o).unwrap();
        assert_eq!(c.star, Some((1, 2)));
        assert_eq!(c.branch, Branch::SingularThinCase);
        assert_eq!(c.witnesses.unwrap().n0, 1);
        assert_eq!(
            classify_mixed(2, 3, &rat(2, 1), &o).unwrap().branch,
            Branch::IntervalCase
        );
        let irr = Param::irrational(0.7).unwrap();
        assert_eq!(classify_mixed(2, 3, &irr, &o).unwrap().branch, Branch::IrrationalCase);
        assert!(classify_mixed(3, 3, &rat(1, 2), &o).is_err());
    }

    #[test]
    fn mixed_is_not_reciprocal_symmetric() {
        // u = 3 is thin, 1/3 is an interval case in base 6
        let o = ClassifyOptions::branch_only();
        assert_eq!(
            classify_mixed(2, 3, &rat(3, 1), &o).unwrap().branch,
            Branch::SingularThinCase
        );
        assert_eq!(
            classify_mixed(2, 3, &rat(1, 3), &o).unwrap().branch,
            Branch::IntervalCase
        );
        let n = normalize(
            &DigitSystem::mixed(2, 3).unwrap(),
            &RationalParam::make(3, 1, 6).unwrap(),
        );
        assert!(!n.reciprocal);
    }

    #[test]
    fn sieve_examples() {
        assert_eq!(classify_projected_sieve(1, 2).unwrap(), SieveClass::PositiveMeasure);
        assert_eq!(classify_projected_sieve(1, 1).unwrap(), SieveClass::ThinDimension);
        assert_eq!(classify_projected_sieve(2, 7).unwrap(), SieveClass::PositiveMeasure);
        assert!(classify_projected_sieve(2, 4).is_err());
    }

    #[test]
    fn multi_dim_examples() {
        let o = ClassifyOptions::default();
        let c = classify_multi_dim(2, &rat(1, 1), &o).unwrap();
        assert_eq!(c.branch, Branch::SingularThinCase);
        let bound = c.witnesses.unwrap().dim_upper_bound;
        assert!((bound - 2.0 * 3f64.ln() / 4f64.ln()).abs() < 1e-12);
        assert!(bound < 2.0);
        assert_eq!(
            classify_multi_dim(3, &rat(2, 1), &o).unwrap().branch,
            Branch::IntervalCase
        );
        let irr = Param::irrational(std::f64::consts::E).unwrap();
        assert_eq!(classify_multi_dim(2, &irr, &o).unwrap().branch, Branch::IrrationalCase);
        assert!(classify_multi_dim(0, &rat(1, 1), &o).is_err());
    }

    #[test]
    fn section_examples() {
        let sys = DigitSystem::base4();
        let s = section_to_u(&rat(1, 3), &sys).unwrap();
        assert_eq!(s.u, rat(1, 1));
        let s = u_to_section(&rat(2, 1), &sys).unwrap();
        assert_eq!(s.h, rat(1, 2));
        assert!(section_to_u(&rat(1, 1), &sys).is_err());
        assert!(section_to_u(&rat(3, 2), &sys).is_err());
        assert!(section_to_u(&Param::Irrational(1.5), &sys).is_err());
        // base-9 variant: u = 3h / (1 - h)
        let s = section_to_u(&rat(1, 4), &DigitSystem::square(3).unwrap()).unwrap();
        assert_eq!(s.u, rat(1, 1));
    }

    #[test]
    fn section_invariance_examples() {
        assert!(section_invariance(&Fraction::from_u64(1, 3).unwrap()).unwrap());
        assert!(section_invariance(&Fraction::from_u64(1, 2).unwrap()).unwrap());
        // h = 1/3 -> 4/6 = 2/3 -> u = 4
        assert_eq!(
            shifted_section(&Fraction::from_u64(1, 3).unwrap()),
            Fraction::from_u64(2, 3).unwrap()
        );
    }

    #[test]
    fn json_fields() {
        let v = serde_json::to_value(base4(1, 1)).unwrap();
        assert_eq!(v["branch"], "SingularThinCase");
        assert_eq!(v["n0"], 1);
        assert_eq!(v["nu"], "3");
        assert_eq!(v["normalizedU"], "1/1");
        assert_eq!(v["base"], "4");
        assert!(v["dimUpperBound"].as_f64().unwrap() < 1.0);
    }
}
