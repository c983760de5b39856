//! Brute-force cross-checks. Every oracle here works directly from digit
//! strings and `BigRational` values, without the integer key encoding, the
//! interval merge or the centered kernel factorization used by the library.

use std::collections::BTreeSet;

use besicovitch::fourier::{mu_hat, Frequency};
use besicovitch::geometry::direction_range;
use besicovitch::measure::cover_at_depth;
use besicovitch::{DigitLattice, DigitSystem, Fraction, Limits, Param, Value};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// All values `sum_{k<n} (alpha_k + u beta_k) b^k`, with multiplicity.
fn values(sys: &DigitSystem, u: &BigRational, n: u32) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero()];
    for k in 0..n {
        let place = BigRational::from_integer(BigInt::from(sys.base()).pow(k));
        let mut next = Vec::new();
        for v in &out {
            for &a in sys.alpha_digits() {
                for &b in sys.beta_digits() {
                    next.push(v + (r(a as i64, 1) + u * r(b as i64, 1)) * &place);
                }
            }
        }
        out = next;
    }
    out
}

fn systems() -> Vec<DigitSystem> {
    vec![
        DigitSystem::base4(),
        DigitSystem::square(3).unwrap(),
        DigitSystem::mixed(2, 3).unwrap(),
    ]
}

#[test]
fn pairwise_collisions_at_one_third() {
    // 16 level-2 points, 256 ordered pairs compared as exact rationals
    let sys = DigitSystem::base4();
    let u = r(1, 3);
    let pts = values(&sys, &u, 2);
    assert_eq!(pts.len(), 16);
    let mut equal_pairs = 0;
    for i in 0..16 {
        for j in 0..16 {
            if i != j && pts[i] == pts[j] {
                equal_pairs += 1;
            }
        }
    }
    // two unordered colliding pairs
    assert_eq!(equal_pairs, 4);
    let distinct: BTreeSet<_> = pts.iter().cloned().collect();
    assert_eq!(distinct.len(), 14);

    let report = DigitLattice::new(&sys, &Fraction::from_u64(1, 3).unwrap())
        .unwrap()
        .first_collision(6, &Limits::default())
        .unwrap();
    assert_eq!((report.first_level, report.nu), (Some(2), Some(14)));
    let (a, b) = report.witness.unwrap();
    assert_ne!((a.a, a.b), (b.a, b.b));
    assert_eq!(3 * a.a + a.b, 3 * b.a + b.b);
}

#[test]
fn distinct_counts_match_rational_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let lim = Limits::default();
    for sys in systems() {
        let max_n = if sys.alphabet_size() > 4 { 2 } else { 4 };
        for _ in 0..40 {
            let (p, q) = (rng.gen_range(1..=40u64), rng.gen_range(1..=40u64));
            let f = Fraction::from_u64(p, q).unwrap();
            let u = f.to_big_rational();
            let lattice = DigitLattice::new(&sys, &f).unwrap();
            for n in 1..=max_n {
                let want: BTreeSet<_> = values(&sys, &u, n).into_iter().collect();
                let got = lattice.distinct_keys(n, &lim).unwrap();
                assert_eq!(got.len(), want.len(), "{sys:?} u={p}/{q} n={n}");
                // keys are q times the values
                let scaled: Vec<BigRational> = got
                    .iter()
                    .map(|&k| r(k as i64, 1) / r(f.to_u64_pair().unwrap().1 as i64, 1))
                    .collect();
                assert_eq!(scaled, want.into_iter().collect::<Vec<_>>());
            }
        }
    }
}

#[test]
fn union_measure_matches_rational_merge() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let lim = Limits::default();
    for sys in systems() {
        let max_n = if sys.alphabet_size() > 4 { 2 } else { 4 };
        for _ in 0..25 {
            let (p, q) = (rng.gen_range(1..=40u64), rng.gen_range(1..=40u64));
            let u = r(p as i64, q as i64);
            let hull = (r(sys.max_alpha() as i64, 1) + &u * r(sys.max_beta() as i64, 1)) / r(sys.base() as i64 - 1, 1);
            for n in 1..=max_n {
                let scale = r(1, sys.base().pow(n) as i64);
                let mut ivs: Vec<(BigRational, BigRational)> = values(&sys, &u, n)
                    .into_iter()
                    .map(|v| (&v * &scale, (&v + &hull) * &scale))
                    .collect();
                ivs.sort();
                let mut total = BigRational::zero();
                let mut cur: Option<(BigRational, BigRational)> = None;
                for (a, b) in ivs {
                    cur = match cur {
                        Some((s, e)) if a <= e => Some((s, e.max(b))),
                        Some((s, e)) => {
                            total += e - s;
                            Some((a, b))
                        }
                        None => Some((a, b)),
                    };
                }
                let (s, e) = cur.unwrap();
                total += e - s;
                let got = cover_at_depth(&sys, &Param::rational(p, q).unwrap(), n, false, &lim).unwrap();
                assert_eq!(got.union_measure, Value::Exact(total), "{sys:?} u={p}/{q} n={n}");
            }
        }
    }
}

/// Plain truncated product of `(1/m) sum_k e^{ikx}` factors, no centering.
fn direct_product(sys: &DigitSystem, u: f64, t: f64, j: i32) -> Complex64 {
    let d = |digits: &[u64], x: f64| -> Complex64 {
        digits
            .iter()
            .map(|&k| Complex64::from_polar(1.0, k as f64 * x))
            .sum::<Complex64>()
            / digits.len() as f64
    };
    (1..=j)
        .map(|k| {
            let x = t * (sys.base() as f64).powi(-k);
            d(sys.alpha_digits(), x) * d(sys.beta_digits(), u * x)
        })
        .product()
}

#[test]
fn fourier_matches_direct_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for sys in systems() {
        for _ in 0..50 {
            let (p, q) = (rng.gen_range(1..=20u64), rng.gen_range(1..=20u64));
            let u = Param::rational(p, q).unwrap();
            let t: f64 = rng.gen_range(-300.0..300.0);
            let got = mu_hat(&sys, &u, &Frequency::Real(t), 1e-12).unwrap();
            let want = direct_product(&sys, u.to_f64(), t, 60);
            assert!(
                (got.value - want).norm() < 1e-9,
                "{sys:?} u={p}/{q} t={t}: {} vs {}",
                got.value,
                want
            );
        }
    }
}

#[test]
fn exact_probe_frequencies_match_float_evaluation() {
    // the exact pi-multiple route and the float route agree where floats are still accurate
    let sys = DigitSystem::base4();
    for (p, q) in [(1u64, 1u64), (1, 3), (3, 5), (2, 3)] {
        let u = Param::rational(p, q).unwrap();
        for n in 0..3 {
            let exact = mu_hat(&sys, &u, &Frequency::probe(q, 4, n), 1e-12).unwrap();
            let float = direct_product(&sys, u.to_f64(), Frequency::probe(q, 4, n).to_f64(), 60);
            assert!((exact.value - float).norm() < 1e-8, "u={p}/{q} n={n}");
        }
    }
}

#[test]
fn direction_extremes_from_finite_digit_strings() {
    // extremes over all depth-6 strings approach the exact range from inside
    for sys in [DigitSystem::base4(), DigitSystem::square(3).unwrap()] {
        let c = sys.second_scale() as i64;
        let b = sys.base() as i64;
        let depth = 6;
        let top = b.pow(depth);
        // min is reached with all alpha digits maximal and beta digits zero
        let z_max: i64 = (0..depth).map(|k| sys.max_alpha() as i64 * b.pow(k)).sum();
        let zp_max: i64 = (0..depth).map(|k| sys.max_beta() as i64 * b.pow(k)).sum();
        let lo = r(-z_max, top);
        let hi = r(c * zp_max, top);
        let range = direction_range(&sys);
        let (elo, ehi) = (
            range.lo.as_exact().unwrap().clone(),
            range.hi.as_exact().unwrap().clone(),
        );
        assert!(lo > elo && hi < ehi);
        let gap = r(1, b.pow(depth) / 10);
        assert!(&lo - &elo < gap && &ehi - &hi < gap);
    }
}
