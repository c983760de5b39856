use besicovitch::classify::{
    classify_base4, classify_multi_dim, classify_square, classify_system, section_to_u, u_to_section, Branch,
    ClassifyOptions,
};
use besicovitch::fourier::{mu_hat, mu_hat_truncated, step_factor, Frequency};
use besicovitch::measure::cover_at_depth;
use besicovitch::{pgm, star, star_u64, DigitLattice, DigitSystem, Fraction, Limits, Param, RationalParam};
use num_bigint::BigUint;
use num_rational::BigRational;
use proptest::prelude::*;

fn coprime() -> impl Strategy<Value = (u64, u64)> {
    (1u64..=200, 1u64..=200).prop_filter("reduced", |&(p, q)| num_integer::gcd(p, q) == 1)
}

fn system() -> impl Strategy<Value = DigitSystem> {
    prop_oneof![
        Just(DigitSystem::base4()),
        Just(DigitSystem::square(2).unwrap()),
        Just(DigitSystem::square(3).unwrap()),
        Just(DigitSystem::mixed(2, 3).unwrap()),
        Just(DigitSystem::mixed(3, 2).unwrap()),
    ]
}

fn branch_only() -> ClassifyOptions {
    ClassifyOptions::branch_only()
}

proptest! {
    #[test]
    fn star_shifts_with_base(n in 1u64..1_000_000, base in 2u64..40) {
        let (j, d) = star_u64(n, base).unwrap();
        prop_assert!(d != 0 && d < base);
        prop_assert_eq!(star_u64(n * base, base).unwrap(), (j + 1, d));
        prop_assert_eq!((n / base.pow(j as u32)) % base, d);
        prop_assert_eq!(star(&BigUint::from(n), base).unwrap(), (j, d));
    }

    #[test]
    fn reduced_parameters_never_have_two_even_stars(p in 1u64..=10_000, q in 1u64..=10_000) {
        let r = RationalParam::make(p, q, 4).unwrap();
        prop_assert!(r.p_star() % 2 == 1 || r.q_star() % 2 == 1);
        prop_assert_eq!(r.stars_both_odd(), !r.stars_sum_odd());
    }

    #[test]
    fn branch_is_symmetric_under_reciprocal((p, q) in coprime()) {
        let u = Param::rational(p, q).unwrap();
        let v = Param::rational(q, p).unwrap();
        let o = branch_only();
        prop_assert_eq!(classify_base4(&u, &o).unwrap().branch, classify_base4(&v, &o).unwrap().branch);
        prop_assert_eq!(classify_square(3, &u, &o).unwrap().branch, classify_square(3, &v, &o).unwrap().branch);
    }

    #[test]
    fn branch_is_invariant_under_base_scaling((p, q) in coprime(), sys in system()) {
        let o = branch_only();
        let b = sys.base();
        let u = Param::rational(p, q).unwrap();
        let scaled = Param::Rational(Fraction::from_u64(p, q).unwrap().scale_by_power(b, 1));
        prop_assert_eq!(classify_system(&sys, &u, &o).unwrap().branch, classify_system(&sys, &scaled, &o).unwrap().branch);
    }

    #[test]
    fn one_dimensional_product_is_base4((p, q) in coprime()) {
        let u = Param::rational(p, q).unwrap();
        let o = ClassifyOptions::default();
        let a = classify_multi_dim(1, &u, &o).unwrap();
        let b = classify_base4(&u, &o).unwrap();
        prop_assert_eq!(a.branch, b.branch);
        prop_assert_eq!(a.witnesses, b.witnesses);
    }

    #[test]
    fn thin_branch_witness_bound_is_below_one((p, q) in coprime()) {
        let c = classify_base4(&Param::rational(p, q).unwrap(), &ClassifyOptions::default()).unwrap();
        if let Some(w) = c.witnesses {
            prop_assert_eq!(c.branch, Branch::SingularThinCase);
            prop_assert!(w.dim_upper_bound > 0.0 && w.dim_upper_bound < 1.0);
            prop_assert!(w.nu < 4u64.pow(w.n0));
        }
    }

    #[test]
    fn section_round_trip(p in 1u64..=1000, extra in 1u64..=1000, sys in system()) {
        let h = Param::rational(p, p + extra).unwrap();
        let u = section_to_u(&h, &sys).unwrap().u;
        prop_assert_eq!(u_to_section(&u, &sys).unwrap().h, h);
    }

    #[test]
    fn cover_invariants((p, q) in (1u64..=12, 1u64..=12), n in 1u32..=5, sys in system()) {
        let lim = Limits::default();
        let u = Param::rational(p, q).unwrap();
        let hull = sys.hull(&u).length();
        let a = cover_at_depth(&sys, &u, n, false, &lim).unwrap();
        let b = cover_at_depth(&sys, &u, n + 1, false, &lim).unwrap();
        let (ma, mb) = (a.union_measure.as_exact().unwrap(), b.union_measure.as_exact().unwrap());
        prop_assert!(mb <= ma);
        let bound = BigRational::new(a.distinct_count.into(), sys.base().pow(n).into()) * hull.as_exact().unwrap();
        prop_assert!(ma <= &bound);
        prop_assert!(a.box_dim_estimate > 0.0 && a.box_dim_estimate <= 1.0 + 1e-12);
    }

    #[test]
    fn cover_scales_with_reciprocal((p, q) in (1u64..=15, 1u64..=15), n in 1u32..=5) {
        let lim = Limits::default();
        let sys = DigitSystem::base4();
        let u = Param::rational(p, q).unwrap();
        let v = u.recip();
        let mu = cover_at_depth(&sys, &u, n, false, &lim).unwrap();
        let mv = cover_at_depth(&sys, &v, n, false, &lim).unwrap();
        let ratio = BigRational::new(q.into(), p.into());
        prop_assert_eq!(mv.union_measure.as_exact().unwrap(), &(mu.union_measure.as_exact().unwrap() * ratio));
    }

    #[test]
    fn streaming_count_matches_materialized((p, q) in (1u64..=30, 1u64..=30), n in 1u32..=7, sys in system()) {
        let lim = Limits::default();
        let l = DigitLattice::new(&sys, &Fraction::from_u64(p, q).unwrap()).unwrap();
        let nu = l.distinct_keys(n, &lim);
        prop_assume!(nu.is_ok());
        prop_assert_eq!(l.count_distinct_streaming(n, &lim).unwrap(), nu.unwrap().len() as u64);
    }

    #[test]
    fn lattice_forms_and_self_affinity((p, q) in (1u64..=40, 1u64..=40), n in 1u32..=4, sys in system()) {
        let l = DigitLattice::new(&sys, &Fraction::from_u64(p, q).unwrap()).unwrap();
        prop_assert!(l.equivalent_forms(n).unwrap());
        prop_assert!(l.self_affine_step(n, &Limits::default()).unwrap());
    }

    #[test]
    fn fourier_basic_properties((p, q) in (1u64..=20, 1u64..=20), t in -500.0f64..500.0, sys in system()) {
        let tol = 1e-10;
        let u = Param::rational(p, q).unwrap();
        let a = mu_hat(&sys, &u, &Frequency::Real(t), tol).unwrap();
        let b = mu_hat(&sys, &u, &Frequency::Real(-t), tol).unwrap();
        prop_assert!(a.abs_value <= 1.0 + 1e-12);
        prop_assert!((a.value - b.value.conj()).norm() <= 2.0 * tol + 1e-12);

        // functional equation: mu_hat(t) = C(t/b) mu_hat(t/b)
        let bt = sys.base() as f64;
        let c = mu_hat(&sys, &u, &Frequency::Real(t / bt), tol).unwrap();
        let rhs = step_factor(&sys, u.to_f64(), t / bt) * c.value;
        prop_assert!((a.value - rhs).norm() <= 2.0 * tol + 1e-12);

        // doubling the truncation moves the value by less than the reported bound
        let d = mu_hat_truncated(&sys, &u, &Frequency::Real(t), 2 * a.truncation.max(1)).unwrap();
        prop_assert!((a.value - d.value).norm() <= a.tail_bound + 1e-12);
    }

    #[test]
    fn pgm_decoder_never_panics(data in proptest::collection::vec(any::<u8>(), 0..256)) {
        let _ = pgm::decode(&data);
    }

    #[test]
    fn fraction_text_round_trip((p, q) in coprime()) {
        let f = Fraction::from_u64(p, q).unwrap();
        prop_assert_eq!(Fraction::parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn rational_param_json_round_trip((p, q) in coprime(), base in prop_oneof![Just(4u64), Just(9), Just(6), Just(25)]) {
        let r = RationalParam::make(p, q, base).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let back: RationalParam = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, r);
    }
}

#[test]
fn square_two_matches_base4() {
    let o = branch_only();
    for p in 1..=50u64 {
        for q in 1..=50u64 {
            if num_integer::gcd(p, q) != 1 {
                continue;
            }
            let u = Param::rational(p, q).unwrap();
            assert_eq!(
                classify_square(2, &u, &o).unwrap().branch,
                classify_base4(&u, &o).unwrap().branch,
                "{p}/{q}"
            );
        }
    }
}

#[test]
fn digit_system_json_round_trip() {
    for sys in [
        DigitSystem::base4(),
        DigitSystem::square(5).unwrap(),
        DigitSystem::mixed(2, 7).unwrap(),
    ] {
        let s = serde_json::to_string(&sys).unwrap();
        let back: DigitSystem = serde_json::from_str(&s).unwrap();
        assert_eq!(back, sys);
    }
    assert!(serde_json::from_str::<DigitSystem>(
        r#"{"base":"5","alphaDigits":["0","1"],"betaDigits":["0","1"],"label":"Base4Model"}"#
    )
    .is_err());
}
