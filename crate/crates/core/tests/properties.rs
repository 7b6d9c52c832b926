use std::collections::BTreeMap;

use proptest::prelude::*;

use fedforge::geometry::{preset_with, Orders};
use fedforge::poly::parse_polynomial;
use fedforge::scalar::GaussianRational;
use fedforge::series::{reverse_fiber_system, FiberTag, GradedSeries, Grading, Substitution, TermSpec, Var, VariableProfile};
use fedforge::weyl::{self, WeylElement};

type Key = (u32, [u32; 2], [u32; 2], u8);

fn profile() -> VariableProfile {
    VariableProfile::new(2, 5, 5, 3, FiberTag::Y).unwrap()
}

fn scalar() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, 1i64..=4, -2i64..=2).prop_map(|(a, b, c)| &GaussianRational::ratio(a, b) + &(&GaussianRational::i() * &GaussianRational::integer(c)))
}

fn build(p: VariableProfile, terms: BTreeMap<Key, GaussianRational>) -> GradedSeries {
    let specs = terms
        .into_iter()
        .map(|((nu, x, y, dx), c)| {
            let idx: Vec<usize> = (0..2).filter(|k| dx & (1 << k) != 0).collect();
            TermSpec::new(c).nu(nu).x(&x).fiber(&y).dx(&idx)
        })
        .collect();
    GradedSeries::polynomial(p, specs).unwrap()
}

/// `ν ≤ 1`, `x`-exponents ≤ 2, fiber degree ≤ `max_fiber`, form parts from `dx_masks`.
fn series(max_fiber: u32, dx_masks: Vec<u8>) -> impl Strategy<Value = GradedSeries> {
    let key = (0u32..=1, [0u32..=2, 0u32..=2], [0u32..=max_fiber, 0u32..=max_fiber], proptest::sample::select(dx_masks))
        .prop_filter("fiber degree", move |(_, _, y, _)| y[0] + y[1] <= max_fiber);
    proptest::collection::btree_map(key, scalar(), 0..5).prop_map(|t| build(profile(), t))
}

fn functions() -> impl Strategy<Value = GradedSeries> {
    series(2, vec![0])
}

fn forms() -> impl Strategy<Value = GradedSeries> {
    series(2, vec![0, 1, 2, 3])
}

fn same(a: &GradedSeries, b: &GradedSeries) -> Result<(), TestCaseError> {
    prop_assert!(a.agrees_with(b), "{}", a.difference_report(b).unwrap());
    Ok(())
}

fn parity(a: &GradedSeries) -> Option<u32> {
    let mut degs = a.terms().map(|(m, _)| m.form_deg() % 2);
    let first = degs.next()?;
    degs.all(|d| d == first).then_some(first)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn addition_is_a_group(a in forms(), b in forms(), c in forms()) {
        same(&(&(&a + &b) + &c), &(&a + &(&b + &c)))?;
        same(&(&a + &b), &(&b + &a))?;
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn multiplication_is_associative_and_distributive(a in forms(), b in forms(), c in forms()) {
        same(&a.mul(&b).unwrap().mul(&c).unwrap(), &a.mul(&b.mul(&c).unwrap()).unwrap())?;
        same(&a.mul(&(&b + &c)).unwrap(), &(&a.mul(&b).unwrap() + &a.mul(&c).unwrap()))?;
        same(&GradedSeries::one(profile()).mul(&a).unwrap(), &a)?;
    }

    #[test]
    fn forms_commute_up_to_sign(a in forms(), b in forms()) {
        if let (Some(p), Some(q)) = (parity(&a), parity(&b)) {
            let ba = b.mul(&a).unwrap();
            let expected = if p * q % 2 == 1 { ba.neg() } else { ba };
            same(&a.mul(&b).unwrap(), &expected)?;
        }
    }

    #[test]
    fn derivatives_obey_leibniz(a in functions(), b in functions(), k in 0usize..2) {
        for var in [Var::X(k), Var::Fiber(k)] {
            let lhs = a.mul(&b).unwrap().partial_deriv(var).unwrap();
            let rhs = &a.partial_deriv(var).unwrap().mul(&b).unwrap() + &a.mul(&b.partial_deriv(var).unwrap()).unwrap();
            same(&lhs, &rhs)?;
        }
    }

    #[test]
    fn substitution_is_a_homomorphism(a in functions(), b in functions(), c in scalar()) {
        let p = profile();
        let y1 = GradedSeries::fiber_var(p, 0);
        let shift = GradedSeries::fiber_var(p, 1).scale(&c);
        let sub = Substitution::new(p)
            .x(0, &(&GradedSeries::x_var(p, 0) + &y1) + &shift)
            .fiber(1, &GradedSeries::fiber_var(p, 1) + &y1.pow(2).unwrap());
        let lhs = a.mul(&b).unwrap().substitute(&sub).unwrap();
        let rhs = a.substitute(&sub).unwrap().mul(&b.substitute(&sub).unwrap()).unwrap();
        same(&lhs, &rhs)?;
        same(&(&a + &b).substitute(&sub).unwrap(), &(&a.substitute(&sub).unwrap() + &b.substitute(&sub).unwrap()))?;
    }

    #[test]
    fn reversion_round_trips(h1 in series(3, vec![0]), h2 in series(3, vec![0])) {
        let zp = VariableProfile::new(2, 5, 4, 3, FiberTag::Zeta).unwrap();
        let high = |h: &GradedSeries| h.select(|m| m.fiber_deg() >= 2 && m.nu == 0).reprofile(zp).unwrap();
        let system = vec![&GradedSeries::fiber_var(zp, 0) + &high(&h1), &GradedSeries::fiber_var(zp, 1) + &high(&h2)];
        let inverse = reverse_fiber_system(&system, FiberTag::Xi).unwrap();
        let back = (0..2).fold(Substitution::new(*inverse[0].profile()), |s, j| s.fiber(j, inverse[j].clone()));
        for (p, f) in system.iter().enumerate() {
            let xp = *inverse[0].profile();
            same(&f.reprofile(zp).unwrap().substitute(&back).unwrap(), &GradedSeries::fiber_var(xp, p))?;
        }
    }

    #[test]
    fn delta_homotopy_identity(a in series(3, vec![0, 1, 2, 3])) {
        let w = WeylElement::new(a.clone());
        let lhs = &weyl::delta(&weyl::delta_inv(&w)).into_series() + &weyl::delta_inv(&weyl::delta(&w)).into_series();
        let a00 = a.select(|m| m.fiber_deg() == 0 && m.dx == 0);
        same(&lhs, &(&a - &a00))?;
        prop_assert!(weyl::delta(&weyl::delta(&w)).is_zero());
        prop_assert!(weyl::delta_inv(&weyl::delta_inv(&w)).is_zero());
    }

    #[test]
    fn fiber_product_is_associative(a in functions(), b in functions(), c in functions(), chart in 0usize..3) {
        let name = ["moyal2", "wick2", "torsion2"][chart];
        let geo = preset_with(name, Orders::for_degree(6)).unwrap();
        let p = geo.weyl_profile();
        let w = |s: &GradedSeries| WeylElement::new(s.select(|m| m.total_deg() <= 4).reprofile(p).unwrap());
        let (a, b, c) = (w(&a), w(&b), w(&c));
        let left = weyl::fiber_product(&geo, &weyl::fiber_product(&geo, &a, &b).unwrap(), &c).unwrap();
        let right = weyl::fiber_product(&geo, &a, &weyl::fiber_product(&geo, &b, &c).unwrap()).unwrap();
        same(&left, &right)?;
    }

    #[test]
    fn scalars_form_a_field(a in scalar(), b in scalar()) {
        if let Some(inv) = a.inv() {
            prop_assert!((&a * &inv).is_one());
        }
        prop_assert_eq!(&(&a + &b) * &(&a - &b), &(&a * &a) - &(&b * &b));
        prop_assert_eq!(a.to_string().parse::<GaussianRational>().unwrap(), a);
    }

    #[test]
    fn polynomials_print_and_parse_back(a in functions()) {
        let x_only = a.select(|m| m.fiber_deg() == 0).up_to(Grading::Nu, 1);
        let p = profile();
        prop_assert_eq!(parse_polynomial(&x_only.to_string(), p).unwrap(), x_only);
    }
}
