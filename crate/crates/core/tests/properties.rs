use num_complex::Complex64 as C;
use num_rational::BigRational;
use proptest::prelude::*;

use wickstar::io::{jet_from_json, jet_to_json};
use wickstar::jet::Jet;
use wickstar::scalar::complex_ratio;
use wickstar::seminorm::{seminorm, Cutoffs, SeminormParams};
use wickstar::wick::product::wick_star;
use wickstar::wick::rescale::rescale;
use wickstar::{ExactComplex as E, MultiIndex, Scalar};

type Terms<T> = Vec<(MultiIndex, MultiIndex, T)>;

fn mi(k: u32) -> MultiIndex {
    MultiIndex::new(vec![k]).unwrap()
}

fn exact_terms(max_deg: u32) -> impl Strategy<Value = Terms<E>> {
    proptest::collection::vec((0..=max_deg, 0..=max_deg, -5i64..6, -5i64..6, 1i64..4), 1..4).prop_map(
        move |v| {
            v.into_iter()
                .filter(|(i, j, ..)| i + j <= max_deg)
                .map(|(i, j, a, b, d)| (mi(i), mi(j), complex_ratio(a, b, d)))
                .collect()
        },
    )
}

fn float_terms(max_deg: u32) -> impl Strategy<Value = Terms<C>> {
    proptest::collection::vec((0..=max_deg, 0..=max_deg, -1.0..1.0f64, -1.0..1.0f64), 1..5).prop_map(move |v| {
        v.into_iter()
            .filter(|(i, j, ..)| i + j <= max_deg)
            .map(|(i, j, a, b)| (mi(i), mi(j), C::new(a, b)))
            .collect()
    })
}

fn exact(terms: Terms<E>, hbar: &BigRational) -> Jet<E> {
    Jet::from_monomials(1, vec![E::zero()], hbar.clone(), terms).unwrap()
}

fn float(terms: Terms<C>, hbar: f64) -> Jet<C> {
    Jet::from_monomials(1, vec![C::new(0.0, 0.0)], hbar, terms).unwrap()
}

fn star<T: Scalar>(f: &Jet<T>, g: &Jet<T>) -> Jet<T> {
    let alpha = T::from_real(f.hbar().clone());
    wick_star(f, g, &alpha, None, None).unwrap().value
}

fn same<T: Scalar>(a: &Jet<T>, b: &Jet<T>) -> bool {
    Jet::linear(&T::one(), a, &-T::one(), b).unwrap().terms().all(|(_, v)| v.is_zero())
}

fn hbar_q() -> impl Strategy<Value = BigRational> {
    (1i64..5, 1i64..5).prop_map(|(a, b)| BigRational::new(a.into(), b.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn star_is_associative(f in exact_terms(2), g in exact_terms(2), h in exact_terms(2), hbar in hbar_q()) {
        let (f, g, h) = (exact(f, &hbar), exact(g, &hbar), exact(h, &hbar));
        prop_assert!(same(&star(&star(&f, &g), &h), &star(&f, &star(&g, &h))));
    }

    #[test]
    fn conjugation_reverses_products(f in exact_terms(3), g in exact_terms(3), hbar in hbar_q()) {
        let (f, g) = (exact(f, &hbar), exact(g, &hbar));
        prop_assert!(same(&star(&f, &g).conjugate(), &star(&g.conjugate(), &f.conjugate())));
    }

    #[test]
    fn one_is_a_unit(f in exact_terms(3), hbar in hbar_q()) {
        let f = exact(f, &hbar);
        let one = Jet::constant(1, vec![E::zero()], hbar, E::one()).unwrap();
        prop_assert!(same(&star(&one, &f), &f));
        prop_assert!(same(&star(&f, &one), &f));
    }

    #[test]
    fn states_are_positive(f in float_terms(3), hbar in prop::sample::select(vec![0.25, 0.5, 1.0, 2.0])) {
        let f = float(f, hbar);
        let v = star(&f.conjugate(), &f).delta();
        prop_assert!(v.im.abs() <= 1e-12 * (1.0 + v.re.abs()));
        prop_assert!(v.re >= -1e-12);
    }

    #[test]
    fn rescaling_is_a_homomorphism(f in exact_terms(3), g in exact_terms(3), hbar in hbar_q(), s in 1i64..4) {
        // alpha = s^2 keeps the square root rational.
        let alpha = BigRational::from_integer((s * s).into());
        let big = &hbar * &alpha;
        let (f, g) = (exact(f, &big), exact(g, &big));
        let left = rescale(&star(&f, &g), &alpha).unwrap();
        let right = star(&rescale(&f, &alpha).unwrap(), &rescale(&g, &alpha).unwrap());
        prop_assert!(same(&left, &right));
    }

    #[test]
    fn seminorms_are_absolutely_homogeneous(f in float_terms(3), re in -3.0..3.0f64, im in -3.0..3.0f64, m in 0u32..2) {
        let f = float(f, 0.5);
        let c = C::new(re, im);
        let params = SeminormParams::origin(1, m, 0).unwrap();
        let cut = Cutoffs::uniform(60);
        let a = seminorm(&f, &params, 0.5, &cut).unwrap().value;
        let b = seminorm(&f.scale(&c), &params, 0.5, &cut).unwrap().value;
        prop_assert!((b - c.norm() * a).abs() <= 1e-10 * (1.0 + b.abs()));
    }

    #[test]
    fn lower_sets_count_products(e in proptest::collection::vec(0u32..5, 1..4)) {
        let r = MultiIndex::new(e.clone()).unwrap();
        let lower = r.lower_set();
        prop_assert_eq!(lower.len() as u32, e.iter().map(|k| k + 1).product::<u32>());
        prop_assert!(lower.iter().all(|a| a.leq(&r)));
    }

    #[test]
    fn exact_jets_round_trip_through_json(f in exact_terms(3), hbar in hbar_q()) {
        let f = exact(f, &hbar);
        let back: Jet<E> = jet_from_json(&jet_to_json(&f).unwrap()).unwrap();
        prop_assert!(same(&f, &back));
        prop_assert_eq!(back.hbar(), f.hbar());
    }
}
