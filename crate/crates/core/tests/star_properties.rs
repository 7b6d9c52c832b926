use proptest::prelude::*;

use fedforge::dequant::base_poisson;
use fedforge::geometry::{preset_with, Orders};
use fedforge::quantizer::Quantizer;
use fedforge::scalar::GaussianRational;
use fedforge::series::{GradedSeries, TermSpec};
use fedforge::verify::c1_formula;

const CHARTS: [&str; 6] = ["moyal2", "wick2", "torsion2", "moyal2-omega", "symmetric2", "curved2"];

fn quantizers() -> &'static [Quantizer] {
    static Q: std::sync::OnceLock<Vec<Quantizer>> = std::sync::OnceLock::new();
    Q.get_or_init(|| {
        CHARTS.iter().map(|c| Quantizer::for_geometry(&preset_with(c, Orders::for_degree(4)).unwrap()).unwrap()).collect()
    })
}

fn poly(q: &Quantizer, terms: &[(i64, u32, u32)]) -> GradedSeries {
    let p = q.geometry().weyl_profile();
    terms.iter().fold(GradedSeries::zero(p), |acc, &(c, a, b)| {
        &acc + &GradedSeries::polynomial(p, vec![TermSpec::new(c).x(&[a, b])]).unwrap()
    })
}

fn terms() -> impl Strategy<Value = Vec<(i64, u32, u32)>> {
    proptest::collection::vec((-4i64..=4, 0u32..=2, 0u32..=2), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn star_is_associative(chart in 0usize..6, f in terms(), g in terms(), h in terms()) {
        let q = &quantizers()[chart];
        let (f, g, h) = (poly(q, &f), poly(q, &g), poly(q, &h));
        let left = q.star(&q.star(&f, &g).unwrap().certified_series(), &h).unwrap();
        let right = q.star(&f, &q.star(&g, &h).unwrap().certified_series()).unwrap();
        for r in 0..=q.certified_order() {
            let (a, b) = (left.coefficient(r).unwrap(), right.coefficient(r).unwrap());
            prop_assert!(a.agrees_with(b), "{} nu^{r}: {}", CHARTS[chart], a.difference_report(b).unwrap());
        }
    }

    #[test]
    fn low_cochains(chart in 0usize..6, f in terms(), g in terms()) {
        let q = &quantizers()[chart];
        let geo = q.geometry();
        let (f, g) = (poly(q, &f), poly(q, &g));
        prop_assert_eq!(q.extract_c(0, &f, &g).unwrap(), f.mul(&g).unwrap());
        let c1 = q.extract_c(1, &f, &g).unwrap();
        prop_assert!(c1.agrees_with(&c1_formula(geo, &f, &g).unwrap()));
        let anti = c1.sub(&q.extract_c(1, &g, &f).unwrap()).unwrap();
        prop_assert!(anti.agrees_with(&base_poisson(geo, &f, &g).unwrap().scale(&GaussianRational::i())));
    }

    #[test]
    fn one_is_the_unit(chart in 0usize..6, f in terms()) {
        let q = &quantizers()[chart];
        let f = poly(q, &f);
        let one = GradedSeries::one(q.geometry().weyl_profile());
        prop_assert!(q.star(&one, &f).unwrap().certified_series().agrees_with(&f));
        prop_assert!(q.star(&f, &one).unwrap().certified_series().agrees_with(&f));
    }
}
